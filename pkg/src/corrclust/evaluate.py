"""Hierarchical purity of labeled groups and permutation significance.

For every unordered pair of group members, find the smallest dendrogram
cluster containing both and take the fraction of its leaves that carry the
group's label; the group's purity is the mean of those fractions over all
M(M-1)/2 pairs.  Since the leaves carrying the label are exactly the group
members, the same statistic scores an arbitrary leaf subset against its own
membership, which is how permutation replicates are evaluated: a replicate
draws M leaves uniformly without replacement and plays the role of a
pseudo-group.  Significance is reported with add-one smoothing,

    p = (1 + #{replicates with purity >= observed}) / (B + 1),

so p is never zero and never exceeds one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hcluster import Dendrogram
from .panel import CompanyMeta
from .tabular import fmt, read_rows, write_rows

EXHAUSTIVE_CAP = 500_000  # refuse to enumerate more subsets than this


@dataclass(frozen=True)
class PurityRow:
    label: str
    members: int
    purity: float
    p_value: float
    replicates: int


@dataclass(frozen=True)
class PurityReport:
    grouping: str
    rows: list[PurityRow]


@dataclass(frozen=True)
class PermutationResult:
    p_value: float
    observed: float
    replicates: int
    n_at_least: int  # replicates with purity >= observed


def subset_purity(d: Dendrogram, member_idx: list[int], _tables=None) -> float:
    """Purity of a leaf subset scored against its own membership."""
    if len(member_idx) < 2:
        raise ValidationError("purity needs at least two members")
    parent, sizes = _tables if _tables is not None else membership_tables(d)
    n = d.n
    inside = np.zeros(2 * n - 1, dtype=int)
    inside[member_idx] = 1
    for k, m in enumerate(d.merges):
        inside[n + k] = inside[m.left] + inside[m.right]

    members = sorted(member_idx)
    total = 0.0
    npairs = 0
    for ai in range(len(members)):
        for bi in range(ai + 1, len(members)):
            a, b = members[ai], members[bi]
            while a != b:  # parent ids always exceed child ids
                if a < b:
                    a = parent[a]
                else:
                    b = parent[b]
            total += inside[a] / sizes[a]
            npairs += 1
    return total / npairs


def membership_tables(d: Dendrogram):
    """Parent pointers and node sizes, reusable across purity calls."""
    parent = d.parents().tolist()
    sizes = d.node_sizes().tolist()
    return parent, sizes


def group_members(d: Dendrogram, labels: dict[str, str], group: str) -> list[int]:
    missing = [c for c in d.leaves if c not in labels]
    if missing:
        raise ValidationError(f"no label for company {missing[0]!r}")
    return [i for i, c in enumerate(d.leaves) if labels[c] == group]


def purity(d: Dendrogram, labels: dict[str, str], group: str, _tables=None) -> float:
    """Mean same-label fraction of the smallest common cluster over all
    member pairs of ``group``."""
    members = group_members(d, labels, group)
    if len(members) < 2:
        raise ValidationError(f"group {group!r} has fewer than two members")
    return subset_purity(d, members, _tables=_tables)


def permutation_pvalue(
    d: Dendrogram,
    labels: dict[str, str],
    group: str,
    replicates: int = 999,
    seed: int = 0,
    exhaustive: bool = False,
) -> PermutationResult:
    """Compare the group's purity against random same-size leaf subsets."""
    members = group_members(d, labels, group)
    m = len(members)
    n = d.n
    if m < 2:
        raise ValidationError(f"group {group!r} has fewer than two members")
    if m > n:
        raise ValidationError("group size exceeds leaf count")
    tables = membership_tables(d)
    observed = subset_purity(d, members, _tables=tables)

    if exhaustive:
        total = 1
        for k in range(m):
            total = total * (n - k) // (k + 1)
        if total > EXHAUSTIVE_CAP:
            raise ValidationError(
                f"exhaustive enumeration of {total} subsets exceeds the cap"
            )
        draws = (list(c) for c in itertools.combinations(range(n), m))
        count = total
    else:
        if replicates < 1:
            raise ValidationError("need at least one replicate")
        streams = np.random.SeedSequence(seed).spawn(replicates)
        draws = (
            sorted(np.random.default_rng(s).choice(n, size=m, replace=False).tolist())
            for s in streams
        )
        count = replicates

    at_least = 0
    for subset in draws:
        if subset_purity(d, subset, _tables=tables) >= observed:
            at_least += 1
    p = (1 + at_least) / (count + 1)
    return PermutationResult(
        p_value=p, observed=observed, replicates=count, n_at_least=at_least
    )


def purity_report(
    d: Dendrogram,
    meta: list[CompanyMeta],
    grouping: str,
    replicates: int = 999,
    seed: int = 0,
) -> PurityReport:
    """One purity row per group with at least two members, deterministic
    given the seed (each group gets its own derived substream)."""
    if grouping == "sector":
        labels = {m.id: m.sector for m in meta}
    elif grouping == "country":
        labels = {m.id: m.country for m in meta}
    else:
        raise ValidationError("report grouping must be 'sector' or 'country'")
    groups = sorted({labels[c] for c in d.leaves if c in labels})
    rows = []
    for gi, group in enumerate(groups):
        members = group_members(d, labels, group)
        if len(members) < 2:
            continue
        group_seed = np.random.SeedSequence([seed, gi]).generate_state(1)[0]
        result = permutation_pvalue(
            d, labels, group, replicates=replicates, seed=int(group_seed)
        )
        rows.append(
            PurityRow(
                label=group,
                members=len(members),
                purity=result.observed,
                p_value=result.p_value,
                replicates=result.replicates,
            )
        )
    if not rows:
        raise ValidationError(f"no {grouping} group has two or more members")
    return PurityReport(grouping=grouping, rows=rows)


# ---------------------------------------------------------------------------
# serialization


def write_purity_csv(path, reports: list[PurityReport]) -> None:
    rows = [
        [rep.grouping, r.label, str(r.members), fmt(r.purity), fmt(r.p_value), str(r.replicates)]
        for rep in reports
        for r in rep.rows
    ]
    write_rows(path, ["grouping", "label", "M", "purity", "p_value", "B"], rows)


def read_purity_csv(path) -> list[PurityReport]:
    header, rows, _ = read_rows(path)
    if header != ["grouping", "label", "M", "purity", "p_value", "B"]:
        raise ValidationError(f"{path}: unexpected purity header")
    by_grouping: dict[str, list[PurityRow]] = {}
    for r in rows:
        by_grouping.setdefault(r[0], []).append(
            PurityRow(
                label=r[1],
                members=int(r[2]),
                purity=float(r[3]),
                p_value=float(r[4]),
                replicates=int(r[5]),
            )
        )
    return [PurityReport(grouping=g, rows=rs) for g, rs in by_grouping.items()]


def format_purity_table(report: PurityReport) -> str:
    """Human-readable aligned table."""
    width = max([len(r.label) for r in report.rows] + [len(report.grouping)])
    lines = [f"{report.grouping:<{width}}    M  purity   p-value"]
    for r in report.rows:
        lines.append(
            f"{r.label:<{width}}  {r.members:3d}  {r.purity:6.4f}  {r.p_value:8.6f}"
        )
    return "\n".join(lines)
