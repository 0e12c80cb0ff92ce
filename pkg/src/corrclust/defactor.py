"""Pseudo-index construction and factor removal by regression.

A group's pseudo-index is the per-day mean (or, robustly, median) of its
members' returns.  Each member is regressed on its group index with either
ordinary least squares or the Theil-Sen estimator, and the fitted component
is subtracted, leaving the residual series.

The Theil-Sen slope is the median of all pairwise slopes over unordered day
pairs (pairs with equal x are skipped) and the intercept is the median of
the per-day offsets y - beta * x.  Every median of an even count is the
midpoint of the two central order statistics.  The estimator is computed by
full O(T^2) enumeration; at a couple of thousand days that is a few million
slopes per series, which is tractable and exactly testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .panel import ReturnsPanel
from .tabular import fmt

VALID_GROUPINGS = ("sector", "country", "all")
VALID_INDEX_METHODS = ("mean", "median")
VALID_FIT_METHODS = ("ols", "theil_sen")


@dataclass(frozen=True)
class PseudoIndex:
    group: str
    method: str  # mean | median
    values: np.ndarray  # (T,)


@dataclass(frozen=True)
class RegressionFit:
    alpha: float
    beta: float
    method: str  # ols | theil_sen

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise NumericError("regression produced a non-finite coefficient")


@dataclass(frozen=True)
class ResidualPanel(ReturnsPanel):
    """Returns panel stripped of a fitted factor, plus its provenance."""

    provenance: str = ""


def pseudo_index(
    panel: ReturnsPanel, members: list[str], method: str, group: str | None = None
) -> PseudoIndex:
    """Per-day mean or median of the members' returns."""
    if method not in VALID_INDEX_METHODS:
        raise ValidationError(f"index method must be one of {VALID_INDEX_METHODS}")
    if not members:
        raise ValidationError("pseudo-index needs a nonempty member set")
    pos = {c: i for i, c in enumerate(panel.companies)}
    missing = [m for m in members if m not in pos]
    if missing:
        raise ValidationError(f"unknown company {missing[0]!r} in pseudo-index members")
    block = panel.returns[[pos[m] for m in members]]
    values = block.mean(axis=0) if method == "mean" else np.median(block, axis=0)
    return PseudoIndex(group=group or ",".join(members), method=method, values=values)


def ols_fit(x: np.ndarray, y: np.ndarray) -> RegressionFit:
    """Least-squares alpha, beta for y = alpha + beta * x + eps."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValidationError("ols_fit needs two equal-length series of length >= 2")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise NumericError("ols_fit: regressor is constant")
    beta = float(xc @ (y - y.mean())) / sxx
    alpha = float(y.mean() - beta * x.mean())
    return RegressionFit(alpha=alpha, beta=beta, method="ols")


def theil_sen_fit(x: np.ndarray, y: np.ndarray, _pair_idx=None) -> RegressionFit:
    """Median-of-pairwise-slopes fit, robust to outliers in y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValidationError("theil_sen_fit needs two equal-length series of length >= 2")
    if _pair_idx is None:
        _pair_idx = np.triu_indices(x.size, k=1)
    m, n = _pair_idx
    dx = x[m] - x[n]
    keep = dx != 0
    if not keep.any():
        raise NumericError("theil_sen_fit: all x values are equal")
    slopes = (y[m][keep] - y[n][keep]) / dx[keep]
    beta = float(np.median(slopes))
    alpha = float(np.median(y - beta * x))
    return RegressionFit(alpha=alpha, beta=beta, method="theil_sen")


def residualize(
    panel: ReturnsPanel,
    grouping: str,
    index_method: str = "median",
    fit_method: str = "theil_sen",
    leave_one_out: bool = False,
) -> ResidualPanel:
    """Strip each company's returns of its group's pseudo-index influence.

    ``grouping`` is ``sector``, ``country`` or ``all`` (one market-wide
    index).  With ``leave_one_out`` a company is excluded from its own
    index before fitting, which avoids degenerate self-regression in tiny
    groups.
    """
    if grouping not in VALID_GROUPINGS:
        raise ValidationError(f"grouping must be one of {VALID_GROUPINGS}")
    if fit_method not in VALID_FIT_METHODS:
        raise ValidationError(f"fit method must be one of {VALID_FIT_METHODS}")
    labels = panel.label_map(grouping)
    groups: dict[str, list[str]] = {}
    for cid in panel.companies:
        groups.setdefault(labels[cid], []).append(cid)

    pos = {c: i for i, c in enumerate(panel.companies)}
    fit = ols_fit if fit_method == "ols" else theil_sen_fit
    pair_idx = np.triu_indices(panel.returns.shape[1], k=1)
    residuals = np.empty_like(panel.returns)
    for label, members in groups.items():
        shared = None
        if not leave_one_out:
            shared = pseudo_index(panel, members, index_method, group=label).values
            _require_varying(shared, label)
        for cid in members:
            if shared is None:
                others = [m for m in members if m != cid]
                if not others:
                    raise ValidationError(
                        f"group {label!r} has a single member; "
                        "leave-one-out leaves nothing to index"
                    )
                index = pseudo_index(panel, others, index_method, group=label).values
                _require_varying(index, label)
            else:
                index = shared
            i = pos[cid]
            coeffs = (
                fit(index, panel.returns[i], _pair_idx=pair_idx)
                if fit_method == "theil_sen"
                else fit(index, panel.returns[i])
            )
            residuals[i] = panel.returns[i] - coeffs.alpha - coeffs.beta * index

    provenance = (
        f"grouping={grouping} index={index_method} fit={fit_method} "
        f"leave_one_out={str(leave_one_out).lower()}"
    )
    return ResidualPanel(
        companies=list(panel.companies),
        dates=list(panel.dates),
        returns=residuals,
        meta=list(panel.meta),
        provenance=provenance,
    )


def _require_varying(index: np.ndarray, label: str) -> None:
    if np.all(index == index[0]):
        raise NumericError(f"pseudo-index for group {label!r} is constant")


def residual_comment(panel: ResidualPanel) -> str:
    return f"# residuals: {panel.provenance}"


def fit_line(fit: RegressionFit) -> str:
    return f"{fit.method}: alpha={fmt(fit.alpha)} beta={fmt(fit.beta)}"
