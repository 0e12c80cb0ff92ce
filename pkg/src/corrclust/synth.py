"""Synthetic multi-factor return panels with known sector/country structure.

Returns follow a linear factor model,

    r[i][t] = bm * f[t] + bs * g[sector(i)][t] + bc(i, t) * h[country(i)][t]
              + idio * e[i][t],

where f, g, h, e are independent unit-variance draws: Gaussian, or
variance-normalized Student-t when a finite tail dof is set (heavy tails are
what separate the robust fits from least squares in practice).  Sector and
country assignments cross deterministically: sectors fill contiguous
blocks while countries rotate round-robin inside them, so every sector
contains members from several countries.

An optional regime shift raises the country loading to a new value from a
given day onward, for all countries or a chosen subset, mimicking a crisis
that increases within-country co-movement.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .panel import CompanyMeta, PricePanel, ReturnsPanel

_EPOCH = dt.date(2000, 1, 3)  # a Monday


@dataclass(frozen=True)
class RegimeShift:
    day: int  # first day index with the new loading, 1 <= day < T
    beta_country_post: float
    countries: tuple[str, ...] | None = None  # None = every country


@dataclass(frozen=True)
class FactorModelSpec:
    sectors: tuple[tuple[str, int], ...]
    countries: tuple[tuple[str, int], ...]
    days: int
    beta_market: float = 0.5
    beta_sector: float = 1.0
    beta_country: float = 0.4
    idio_scale: float = 1.0
    tail_dof: float | None = 3.0  # None or inf = Gaussian
    regime: RegimeShift | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.sectors or not self.countries:
            raise ValidationError("need at least one sector and one country")
        if any(k < 1 for _, k in self.sectors) or any(k < 1 for _, k in self.countries):
            raise ValidationError("group counts must be at least 1")
        n_s = sum(k for _, k in self.sectors)
        n_c = sum(k for _, k in self.countries)
        if n_s != n_c:
            raise ValidationError(
                f"sector counts sum to {n_s} but country counts sum to {n_c}"
            )
        if self.days < 2:
            raise ValidationError("need at least two days")
        for name, value in [
            ("beta_market", self.beta_market),
            ("beta_sector", self.beta_sector),
            ("beta_country", self.beta_country),
            ("idio_scale", self.idio_scale),
        ]:
            if value < 0:
                raise ValidationError(f"{name} must be nonnegative")
        if self.tail_dof is not None and math.isfinite(self.tail_dof) and self.tail_dof <= 2:
            raise ValidationError("tail_dof must exceed 2 for finite variance")
        if self.regime is not None:
            if not 1 <= self.regime.day < self.days:
                raise ValidationError("regime day must lie in [1, days)")
            if self.regime.countries is not None:
                known = {label for label, _ in self.countries}
                for c in self.regime.countries:
                    if c not in known:
                        raise ValidationError(f"regime names unknown country {c!r}")

    @property
    def n(self) -> int:
        return sum(k for _, k in self.sectors)


def default_spec(seed: int = 0, **overrides) -> FactorModelSpec:
    """Desk-scale spec: 5 sectors x 4 countries, 60 companies, 1000 days."""
    base = dict(
        sectors=(
            ("Financials", 12),
            ("Industrials", 12),
            ("Energy", 12),
            ("Technology", 12),
            ("Utilities", 12),
        ),
        countries=(("GB", 15), ("FR", 15), ("DE", 15), ("SE", 15)),
        days=1000,
        seed=seed,
    )
    base.update(overrides)
    return FactorModelSpec(**base)


def assign_labels(spec: FactorModelSpec) -> list[CompanyMeta]:
    """Deterministic sector x country crossing.

    Sectors fill contiguous blocks in declaration order; countries are dealt
    round-robin across the whole roster, skipping any country whose quota is
    already spent.
    """
    sector_of: list[str] = []
    for label, count in spec.sectors:
        sector_of.extend([label] * count)
    quota = {label: count for label, count in spec.countries}
    order = [label for label, _ in spec.countries]
    country_of: list[str] = []
    cursor = 0
    for _ in range(spec.n):
        for _ in range(len(order)):
            candidate = order[cursor % len(order)]
            cursor += 1
            if quota[candidate] > 0:
                quota[candidate] -= 1
                country_of.append(candidate)
                break
    width = len(str(spec.n))
    return [
        CompanyMeta(
            id=f"C{i + 1:0{width}d}",
            sector=sector_of[i],
            country=country_of[i],
            currency="EUR",
        )
        for i in range(spec.n)
    ]


def _unit_draws(rng: np.random.Generator, shape, tail_dof) -> np.ndarray:
    if tail_dof is None or math.isinf(tail_dof):
        return rng.standard_normal(shape)
    return rng.standard_t(tail_dof, size=shape) / math.sqrt(tail_dof / (tail_dof - 2))


def trading_dates(count: int, start: dt.date = _EPOCH) -> list[dt.date]:
    """``count`` consecutive weekdays starting at ``start``."""
    out, day = [], start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return out


def generate(spec: FactorModelSpec) -> ReturnsPanel:
    """Draw a panel from the factor model, bit-reproducible given the seed."""
    meta = assign_labels(spec)
    n, t = spec.n, spec.days
    rng = np.random.default_rng(spec.seed)
    f = _unit_draws(rng, t, spec.tail_dof)
    g = _unit_draws(rng, (len(spec.sectors), t), spec.tail_dof)
    h = _unit_draws(rng, (len(spec.countries), t), spec.tail_dof)
    e = _unit_draws(rng, (n, t), spec.tail_dof)

    sector_idx = {label: k for k, (label, _) in enumerate(spec.sectors)}
    country_idx = {label: k for k, (label, _) in enumerate(spec.countries)}
    bc = np.full((n, t), spec.beta_country)
    if spec.regime is not None:
        affected = (
            {label for label, _ in spec.countries}
            if spec.regime.countries is None
            else set(spec.regime.countries)
        )
        rows = [i for i, m in enumerate(meta) if m.country in affected]
        bc[np.ix_(rows, range(spec.regime.day, t))] = spec.regime.beta_country_post

    returns = (
        spec.beta_market * f[None, :]
        + spec.beta_sector * g[[sector_idx[m.sector] for m in meta]]
        + bc * h[[country_idx[m.country] for m in meta]]
        + spec.idio_scale * e
    )
    dates = trading_dates(t + 1)[1:]
    return ReturnsPanel(
        companies=[m.id for m in meta], dates=dates, returns=returns, meta=meta
    )


def expected_correlation(
    spec: FactorModelSpec,
    same_sector: bool,
    same_country: bool,
    post_regime: bool = False,
) -> float:
    """Population correlation implied by the factor model for two distinct
    companies with the given co-membership pattern.

    With ``post_regime`` the country loading takes its post-shift value
    (i.e. the pattern describes companies in a regime-affected country).
    """
    bc = spec.beta_country
    if post_regime:
        if spec.regime is None:
            raise ValidationError("spec has no regime shift")
        bc = spec.regime.beta_country_post
    bm2, bs2, bc2 = spec.beta_market**2, spec.beta_sector**2, bc**2
    total = bm2 + bs2 + bc2 + spec.idio_scale**2
    if total == 0:
        return 0.0
    shared = bm2 + (bs2 if same_sector else 0.0) + (bc2 if same_country else 0.0)
    return shared / total


def to_price_panel(panel: ReturnsPanel, initial_price: float = 100.0) -> PricePanel:
    """Prices reconstructed by exponentiating cumulative returns from a
    common initial price, with one extra leading date."""
    n, t = panel.returns.shape
    log_prices = np.concatenate(
        [np.zeros((n, 1)), np.cumsum(panel.returns, axis=1)], axis=1
    )
    prices = initial_price * np.exp(log_prices)
    first = panel.dates[0]
    day = first - dt.timedelta(days=1)
    while day.weekday() >= 5:
        day -= dt.timedelta(days=1)
    return PricePanel(
        companies=list(panel.companies),
        dates=[day] + list(panel.dates),
        prices=prices,
        meta=list(panel.meta),
    )
