"""Price/return panel ingestion.

File formats
------------
Prices:   header ``date,<id_1>,<id_2>,...``, one row per trading date
          (ISO-8601), empty cell = missing price for that company/date.
Metadata: header ``id,sector,country,currency``, one row per company.
FX rates: header ``date,currency,rate`` where ``rate`` converts one unit of
          ``currency`` into the base currency.

Companies with a missing price on the retained date grid are dropped (and
reported) rather than imputed; the retained grid is the set of file dates
with at least one quote, which makes it the common grid of every retained
company.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .tabular import fmt, parse_date, read_rows, write_rows


@dataclass(frozen=True)
class CompanyMeta:
    """Classification labels for one company."""

    id: str
    sector: str
    country: str
    currency: str = ""


@dataclass(frozen=True)
class PricePanel:
    """n x T matrix of positive closing prices on a common date grid."""

    companies: list[str]
    dates: list[dt.date]
    prices: np.ndarray  # shape (n, T)
    meta: list[CompanyMeta]

    def __post_init__(self):
        n, t = self.prices.shape
        if n != len(self.companies) or t != len(self.dates):
            raise ValidationError("price matrix shape does not match companies x dates")
        if len(self.meta) != n:
            raise ValidationError("metadata list does not match company count")
        if not np.all(self.prices > 0):
            raise ValidationError("prices must be strictly positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")

    @property
    def currencies(self) -> list[str]:
        return [m.currency for m in self.meta]


@dataclass(frozen=True)
class ReturnsPanel:
    """n x T matrix of daily log returns with company labels."""

    companies: list[str]
    dates: list[dt.date]
    returns: np.ndarray  # shape (n, T)
    meta: list[CompanyMeta]

    def __post_init__(self):
        n, t = self.returns.shape
        if n != len(self.companies) or t != len(self.dates):
            raise ValidationError("returns matrix shape does not match companies x dates")
        if len(self.meta) != n:
            raise ValidationError("metadata list does not match company count")
        if not np.all(np.isfinite(self.returns)):
            raise ValidationError("returns must be finite")

    def label_map(self, grouping: str) -> dict[str, str]:
        """Map company id -> label for ``grouping`` in {sector, country, all}."""
        if grouping == "sector":
            return {m.id: m.sector for m in self.meta}
        if grouping == "country":
            return {m.id: m.country for m in self.meta}
        if grouping == "all":
            return {m.id: "all" for m in self.meta}
        raise ValidationError(f"unknown grouping {grouping!r}")


@dataclass(frozen=True)
class FxTable:
    """Conversion rates into a base currency, keyed by (date, currency)."""

    base: str
    rates: dict[tuple[dt.date, str], float]


def load_metadata(path) -> dict[str, CompanyMeta]:
    header, rows, _ = read_rows(path)
    if header[:4] != ["id", "sector", "country", "currency"]:
        raise ValidationError(f"{path}: expected header id,sector,country,currency")
    out: dict[str, CompanyMeta] = {}
    for i, row in enumerate(rows, start=2):
        cid, sector, country, currency = (c.strip() for c in row[:4])
        if not cid:
            raise ValidationError(f"{path}: line {i}: empty company id")
        if cid in out:
            raise ValidationError(f"{path}: line {i}: duplicate metadata for {cid!r}")
        out[cid] = CompanyMeta(cid, sector, country, currency)
    return out


def load_fx(path, base: str) -> FxTable:
    header, rows, _ = read_rows(path)
    if header[:3] != ["date", "currency", "rate"]:
        raise ValidationError(f"{path}: expected header date,currency,rate")
    rates: dict[tuple[dt.date, str], float] = {}
    for i, row in enumerate(rows, start=2):
        day = parse_date(row[0], where=f"{path}: line {i}: ")
        try:
            rate = float(row[2])
        except ValueError:
            raise ValidationError(f"{path}: line {i}: invalid rate {row[2]!r}") from None
        rates[(day, row[1].strip())] = rate
    return FxTable(base=base, rates=rates)


def load_prices(price_path, meta_path) -> tuple[PricePanel, list[str]]:
    """Read a price file plus its metadata, dropping incomplete companies.

    Returns the panel and the list of dropped company ids (one entry per
    company, formatted ``id: first missing date``).
    """
    meta = load_metadata(meta_path)
    header, rows, _ = read_rows(price_path)
    if not header or header[0] != "date":
        raise ValidationError(f"{price_path}: first header column must be 'date'")
    companies = [c.strip() for c in header[1:]]
    if len(set(companies)) != len(companies):
        raise ValidationError(f"{price_path}: duplicate company columns")
    missing_meta = [c for c in companies if c not in meta]
    if missing_meta:
        raise ValidationError(
            f"{price_path}: no metadata for company {missing_meta[0]!r}"
        )

    dates: list[dt.date] = []
    cells: list[list[float]] = []  # per date row, nan = missing
    for i, row in enumerate(rows, start=2):
        day = parse_date(row[0], where=f"{price_path}: line {i}: ")
        values = []
        for col, cell in zip(companies, row[1:]):
            cell = cell.strip()
            if not cell:
                values.append(math.nan)
                continue
            try:
                price = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{price_path}: line {i}: invalid price {cell!r} for {col}"
                ) from None
            values.append(price)
        if all(math.isnan(v) for v in values):
            continue  # a date quoted by nobody is not part of the grid
        dates.append(day)
        cells.append(values)
    if not dates:
        raise ValidationError(f"{price_path}: no price rows")
    order = np.argsort(dates)
    dates = [dates[k] for k in order]
    grid = np.asarray(cells, dtype=float)[order].T  # (n, T)

    kept_idx, dropped = [], []
    for j, cid in enumerate(companies):
        gaps = np.isnan(grid[j])
        if gaps.any():
            first = dates[int(np.argmax(gaps))]
            dropped.append(f"{cid}: missing price on {first.isoformat()}")
        else:
            kept_idx.append(j)
    if not kept_idx:
        raise ValidationError(f"{price_path}: every company has gaps on the date grid")

    kept = [companies[j] for j in kept_idx]
    panel = PricePanel(
        companies=kept,
        dates=dates,
        prices=grid[kept_idx],
        meta=[meta[c] for c in kept],
    )
    return panel, dropped


def convert_currency(panel: PricePanel, fx: FxTable) -> PricePanel:
    """Multiply every non-base price by its (date, currency) conversion rate."""
    prices = panel.prices.copy()
    for i, currency in enumerate(panel.currencies):
        if currency == fx.base:
            continue
        for t, day in enumerate(panel.dates):
            rate = fx.rates.get((day, currency))
            if rate is None:
                raise ValidationError(
                    f"missing FX rate for currency {currency!r} on {day.isoformat()}"
                )
            prices[i, t] *= rate
    meta = [replace(m, currency=fx.base) for m in panel.meta]
    return PricePanel(panel.companies, panel.dates, prices, meta)


def to_log_returns(panel: PricePanel) -> ReturnsPanel:
    """r[i][t] = ln(P[i][t+1] / P[i][t]); the date axis shrinks by one."""
    if len(panel.dates) < 2:
        raise ValidationError("need at least two dates to compute returns")
    returns = np.log(panel.prices[:, 1:] / panel.prices[:, :-1])
    return ReturnsPanel(panel.companies, panel.dates[1:], returns, panel.meta)


# ---------------------------------------------------------------------------
# serialization


def write_prices_csv(path, panel: PricePanel) -> None:
    header = ["date"] + list(panel.companies)
    rows = [
        [day.isoformat()] + [fmt(panel.prices[i, t]) for i in range(len(panel.companies))]
        for t, day in enumerate(panel.dates)
    ]
    write_rows(path, header, rows)


def write_metadata_csv(path, meta: list[CompanyMeta]) -> None:
    write_rows(
        path,
        ["id", "sector", "country", "currency"],
        [[m.id, m.sector, m.country, m.currency] for m in meta],
    )


def write_returns_csv(path, panel: ReturnsPanel, comments: list[str] | None = None) -> None:
    header = ["date"] + list(panel.companies)
    rows = [
        [day.isoformat()] + [fmt(panel.returns[i, t]) for i in range(len(panel.companies))]
        for t, day in enumerate(panel.dates)
    ]
    write_rows(path, header, rows, comments=comments)


def read_returns_csv(path, meta: dict[str, CompanyMeta]) -> ReturnsPanel:
    header, rows, _ = read_rows(path)
    if not header or header[0] != "date":
        raise ValidationError(f"{path}: first header column must be 'date'")
    companies = header[1:]
    for cid in companies:
        if cid not in meta:
            raise ValidationError(f"{path}: no metadata for company {cid!r}")
    dates = [parse_date(r[0], where=f"{path}: ") for r in rows]
    values = np.array([[float(c) for c in r[1:]] for r in rows], dtype=float).T
    return ReturnsPanel(companies, dates, values, [meta[c] for c in companies])
