"""Correlation and distance matrices, static and exponentially forgetting.

The static path is the standard sample Pearson correlation over equally
weighted days, mapped to the metric w = sqrt(2 (1 - rho)), which runs from 0
(perfectly correlated) to 2 (perfectly anticorrelated).

The dynamic path replaces the flat average with exponential forgetting:

    var[i]    <- (1 - lam) * var[i] + lam * r[i]^2
    rho[i][j] <- (1 - lam) * rho[i][j] + lam * r[i] * r[j] / (sigma[i] * sigma[j])

with all variances updated before any correlation, correlations using the
same-step sigmas, and both states starting at zero.  The running rho may
transiently leave [-1, 1]; it is clamped only when a distance matrix is
emitted, never in the state itself.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import NumericError, ValidationError
from .panel import ReturnsPanel
from .tabular import fmt, parse_date, read_rows, write_rows


@dataclass(frozen=True)
class CorrelationMatrix:
    companies: list[str]
    rho: np.ndarray

    def __post_init__(self):
        _check_square(self.rho, len(self.companies), "correlation")
        if not np.allclose(np.diag(self.rho), 1.0, rtol=0, atol=1e-12):
            raise ValidationError("correlation diagonal must be 1")
        if np.any(self.rho < -1) or np.any(self.rho > 1):
            raise ValidationError("correlation entries must lie in [-1, 1]")


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative distances with a zero diagonal.

    Correlation-derived matrices additionally lie in [0, 2]; that is
    guaranteed by ``to_distance`` and ``ew_distance`` rather than enforced
    here, so generic distance inputs remain clusterable.
    """

    companies: list[str]
    w: np.ndarray

    def __post_init__(self):
        _check_square(self.w, len(self.companies), "distance")
        if np.any(np.diag(self.w) != 0):
            raise ValidationError("distance diagonal must be 0")
        if np.any(self.w < 0) or not np.all(np.isfinite(self.w)):
            raise ValidationError("distance entries must be finite and nonnegative")


def _check_square(m: np.ndarray, n: int, kind: str) -> None:
    if m.shape != (n, n):
        raise ValidationError(f"{kind} matrix must be {n}x{n}, got {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValidationError(f"{kind} matrix must be symmetric")


def pearson(panel: ReturnsPanel) -> CorrelationMatrix:
    """Sample Pearson correlation of each pair of return series."""
    r = panel.returns
    if r.shape[1] < 2:
        raise ValidationError("need at least two days for correlations")
    sd = r.std(axis=1)
    for i in np.flatnonzero(sd == 0):
        raise NumericError(f"company {panel.companies[i]!r} has zero variance")
    rho = np.corrcoef(r)
    rho = np.clip(rho, -1.0, 1.0)  # guard ulp-level overshoot
    np.fill_diagonal(rho, 1.0)
    rho = (rho + rho.T) / 2
    return CorrelationMatrix(list(panel.companies), rho)


def to_distance(corr: CorrelationMatrix) -> DistanceMatrix:
    """w[i][j] = sqrt(2 (1 - rho[i][j]))."""
    w = np.sqrt(np.maximum(2.0 * (1.0 - corr.rho), 0.0))
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix(list(corr.companies), w)


# ---------------------------------------------------------------------------
# exponential forgetting


@dataclass(frozen=True)
class EWState:
    """Running exponentially forgetting variances and pairwise correlations."""

    t: int
    lam: float
    var: np.ndarray  # (n,)
    rho: np.ndarray  # (n, n)


def initial_ew_state(n: int, lam: float) -> EWState:
    if not 0 < lam < 1:
        raise ValidationError("forgetting factor must lie in (0, 1)")
    return EWState(t=0, lam=lam, var=np.zeros(n), rho=np.zeros((n, n)))


def ew_step(state: EWState, returns_t: np.ndarray) -> EWState:
    """Advance the running estimates by one day of returns.

    Pairs where either running sigma is still zero keep their previous rho
    for the step (no update, no decay).
    """
    r = np.asarray(returns_t, dtype=float)
    n = state.var.shape[0]
    if r.shape != (n,):
        raise ValidationError(f"expected a length-{n} return vector, got {r.shape}")
    lam = state.lam
    var = (1.0 - lam) * state.var + lam * r * r
    sigma = np.sqrt(var)
    ok = sigma > 0
    valid = np.outer(ok, ok)
    term = np.zeros((n, n))
    np.divide(np.outer(r, r), np.outer(sigma, sigma), out=term, where=valid)
    rho = np.where(valid, (1.0 - lam) * state.rho + lam * term, state.rho)
    return EWState(t=state.t + 1, lam=lam, var=var, rho=rho)


def ew_distance(state: EWState, companies: list[str]) -> DistanceMatrix:
    """Distance matrix from the current state, clamping rho into [-1, 1]."""
    rho = np.clip(state.rho, -1.0, 1.0)
    w = np.sqrt(2.0 * (1.0 - rho))
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix(companies, w)


def default_burn_in(lam: float) -> int:
    """Three mean lifetimes, enough to forget the zero initialization."""
    return math.ceil(3.0 / lam)


def ew_distance_series(
    panel: ReturnsPanel, lam: float, burn_in: int | None = None
) -> Iterator[tuple[dt.date, DistanceMatrix]]:
    """Run the forgetting recursion over the panel, yielding one distance
    matrix per day from ``burn_in`` onwards."""
    t_total = panel.returns.shape[1]
    if burn_in is None:
        burn_in = default_burn_in(lam)
    if not 0 <= burn_in < t_total:
        raise ValidationError(f"burn_in must lie in [0, {t_total})")
    state = initial_ew_state(len(panel.companies), lam)
    companies = list(panel.companies)
    for t in range(t_total):
        state = ew_step(state, panel.returns[:, t])
        if t >= burn_in:
            yield panel.dates[t], ew_distance(state, companies)


# ---------------------------------------------------------------------------
# serialization


def write_matrix_csv(path, companies: list[str], matrix: np.ndarray) -> None:
    header = ["id"] + list(companies)
    rows = [
        [cid] + [fmt(matrix[i, j]) for j in range(len(companies))]
        for i, cid in enumerate(companies)
    ]
    write_rows(path, header, rows)


def read_matrix_csv(path) -> tuple[list[str], np.ndarray]:
    header, rows, _ = read_rows(path)
    companies = header[1:]
    if [r[0] for r in rows] != companies:
        raise ValidationError(f"{path}: row ids do not match header ids")
    matrix = np.array([[float(c) for c in r[1:]] for r in rows], dtype=float)
    return companies, matrix


def write_distance_series_long(path, series) -> None:
    """Write (date, DistanceMatrix) pairs as long-format rows date,i,j,w."""
    out_rows = []
    for day, dist in series:
        ids = dist.companies
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                out_rows.append([day.isoformat(), ids[i], ids[j], fmt(dist.w[i, j])])
    write_rows(path, ["date", "i", "j", "w"], out_rows)


def read_distance_series_long(path) -> list[tuple[dt.date, DistanceMatrix]]:
    header, rows, _ = read_rows(path)
    if header != ["date", "i", "j", "w"]:
        raise ValidationError(f"{path}: expected header date,i,j,w")
    by_day: dict[dt.date, list[tuple[str, str, float]]] = {}
    order: list[dt.date] = []
    for r in rows:
        day = parse_date(r[0], where=f"{path}: ")
        if day not in by_day:
            by_day[day] = []
            order.append(day)
        by_day[day].append((r[1], r[2], float(r[3])))
    out = []
    for day in order:
        ids: list[str] = []
        for a, b, _ in by_day[day]:
            for c in (a, b):
                if c not in ids:
                    ids.append(c)
        idx = {c: k for k, c in enumerate(ids)}
        w = np.zeros((len(ids), len(ids)))
        for a, b, value in by_day[day]:
            w[idx[a], idx[b]] = value
            w[idx[b], idx[a]] = value
        out.append((day, DistanceMatrix(ids, w)))
    return out
