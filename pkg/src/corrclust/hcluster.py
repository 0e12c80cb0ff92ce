"""Average-link (UPGMA) agglomerative clustering and dendrogram queries.

Leaves carry node ids 0..n-1 and internal nodes n..2n-2 in merge order, so a
parent id is always larger than its children's.  The linkage between two
clusters is the mean of all cross-pair distances, maintained incrementally
through the size-weighted Lance-Williams update

    d(k, i+j) = (|i| d(k,i) + |j| d(k,j)) / (|i| + |j|)

with candidate pairs kept in a lazy-deletion priority queue keyed by
(height, smaller id, larger id), which makes tie-breaking deterministic:
lowest height first, then lowest node id, then lowest partner id.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .correlate import DistanceMatrix
from .errors import ValidationError
from .tabular import fmt, read_rows, write_rows


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    leaves: list[str]
    merges: list[Merge]

    def __post_init__(self):
        n = len(self.leaves)
        if len(self.merges) != n - 1:
            raise ValidationError(f"expected {n - 1} merges for {n} leaves")

    @property
    def n(self) -> int:
        return len(self.leaves)

    def parents(self) -> np.ndarray:
        """parent[v] for every node id; the root maps to itself."""
        n = self.n
        parent = np.arange(2 * n - 1)
        for k, m in enumerate(self.merges):
            parent[m.left] = n + k
            parent[m.right] = n + k
        return parent

    def node_sizes(self) -> np.ndarray:
        n = self.n
        sizes = np.ones(2 * n - 1, dtype=int)
        for k, m in enumerate(self.merges):
            sizes[n + k] = sizes[m.left] + sizes[m.right]
        return sizes

    def leaf_indices(self, node: int) -> list[int]:
        """Leaf ids under ``node``, ascending."""
        n = self.n
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                m = self.merges[v - n]
                stack.extend((m.left, m.right))
        return sorted(out)

    def clades(self) -> set[frozenset[str]]:
        """The leaf-name set of every internal node (topology fingerprint)."""
        return {
            frozenset(self.leaves[i] for i in self.leaf_indices(self.n + k))
            for k in range(len(self.merges))
        }


def average_link(dist: DistanceMatrix) -> Dendrogram:
    """Cluster a distance matrix bottom-up under average linkage."""
    n = len(dist.companies)
    if n < 2:
        raise ValidationError("need at least two companies to cluster")
    pd: dict[tuple[int, int], float] = {}
    heap: list[tuple[float, int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            d = float(dist.w[i, j])
            pd[(i, j)] = d
            heap.append((d, i, j))
    heapq.heapify(heap)

    active = set(range(n))
    sizes = {i: 1 for i in range(n)}
    merges: list[Merge] = []
    next_id = n
    while len(active) > 1:
        while True:
            h, a, b = heapq.heappop(heap)
            if a in active and b in active:
                break
        active.discard(a)
        active.discard(b)
        m = next_id
        next_id += 1
        size = sizes[a] + sizes[b]
        for k in active:
            dk = (sizes[a] * pd[_key(a, k)] + sizes[b] * pd[_key(b, k)]) / size
            pd[(k, m)] = dk  # k < m: new ids grow monotonically
            heapq.heappush(heap, (dk, k, m))
        active.add(m)
        sizes[m] = size
        merges.append(Merge(left=a, right=b, height=h, size=size))
    return Dendrogram(leaves=list(dist.companies), merges=merges)


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def lowest_common_node(d: Dendrogram, i: int, j: int, parent: np.ndarray | None = None) -> int:
    """Internal node id of the lowest common ancestor of leaf ids i and j."""
    if parent is None:
        parent = d.parents()
    a, b = i, j
    while a != b:
        if a < b:
            a = int(parent[a])
        else:
            b = int(parent[b])
    return a


def smallest_common_cluster(d: Dendrogram, a: str, b: str) -> set[str]:
    """Leaf set of the lowest cluster containing both named leaves."""
    try:
        i, j = d.leaves.index(a), d.leaves.index(b)
    except ValueError as exc:
        raise ValidationError(f"unknown leaf in ({a!r}, {b!r})") from exc
    if i == j:
        raise ValidationError("smallest_common_cluster needs two distinct leaves")
    node = lowest_common_node(d, i, j)
    return {d.leaves[k] for k in d.leaf_indices(node)}


# ---------------------------------------------------------------------------
# Newick serialization


def to_newick(d: Dendrogram) -> str:
    """Newick text with branch lengths; child branch = parent - child height.

    Children are written with the subtree containing the lowest leaf id
    first, so output is deterministic.
    """
    n = d.n
    min_leaf = list(range(n)) + [0] * len(d.merges)
    for k, m in enumerate(d.merges):
        min_leaf[n + k] = min(min_leaf[m.left], min_leaf[m.right])

    def height(v: int) -> float:
        return 0.0 if v < n else d.merges[v - n].height

    def children(m: Merge) -> tuple[int, int]:
        return (m.left, m.right) if min_leaf[m.left] < min_leaf[m.right] else (m.right, m.left)

    def render(v: int, parent_height: float) -> str:
        branch = fmt(parent_height - height(v))
        if v < n:
            return f"{_quote(d.leaves[v])}:{branch}"
        m = d.merges[v - n]
        a, b = children(m)
        return f"({render(a, m.height)},{render(b, m.height)}):{branch}"

    if not d.merges:
        return f"{_quote(d.leaves[0])};"
    m = d.merges[-1]
    a, b = children(m)
    return f"({render(a, m.height)},{render(b, m.height)});"


def _quote(label: str) -> str:
    if any(c in label for c in "(),:;'\" \t"):
        return "'" + label.replace("'", "''") + "'"
    return label


def parse_newick(text: str):
    """Parse a Newick string into nested (children, label, branch) tuples.

    Internal nodes have label None; the returned structure reproduces the
    emitted topology and branch lengths.
    """
    text = text.strip()
    if not text.endswith(";"):
        raise ValidationError("Newick text must end with ';'")
    s = text[:-1]
    pos = 0

    def parse_node():
        nonlocal pos
        children = []
        label = None
        if pos < len(s) and s[pos] == "(":
            pos += 1
            while True:
                children.append(parse_node())
                if pos >= len(s):
                    raise ValidationError("unbalanced parentheses in Newick text")
                if s[pos] == ",":
                    pos += 1
                    continue
                if s[pos] == ")":
                    pos += 1
                    break
                raise ValidationError(f"unexpected character {s[pos]!r} in Newick text")
        else:
            start = pos
            if pos < len(s) and s[pos] == "'":
                pos += 1
                while pos < len(s):
                    if s[pos] == "'" and pos + 1 < len(s) and s[pos + 1] == "'":
                        pos += 2
                    elif s[pos] == "'":
                        pos += 1
                        break
                    else:
                        pos += 1
                label = s[start + 1 : pos - 1].replace("''", "'")
            else:
                while pos < len(s) and s[pos] not in ",():;":
                    pos += 1
                label = s[start:pos]
        branch = 0.0
        if pos < len(s) and s[pos] == ":":
            pos += 1
            start = pos
            while pos < len(s) and s[pos] not in ",()":
                pos += 1
            branch = float(s[start:pos])
        return (tuple(children), label, branch)

    node = parse_node()
    if pos != len(s):
        raise ValidationError("trailing characters after Newick root")
    return node


def newick_clades(text: str) -> set[frozenset[str]]:
    """Leaf sets of all internal nodes of a Newick string."""
    clades: set[frozenset[str]] = set()

    def walk(node) -> frozenset[str]:
        children, label, _ = node
        if not children:
            return frozenset([label])
        leaves = frozenset().union(*(walk(c) for c in children))
        clades.add(leaves)
        return leaves

    walk(parse_newick(text))
    return clades


# ---------------------------------------------------------------------------
# merge-table serialization


def write_merges_csv(path, d: Dendrogram) -> None:
    rows = [
        [str(k), str(m.left), str(m.right), fmt(m.height), str(m.size)]
        for k, m in enumerate(d.merges)
    ]
    write_rows(path, ["step", "left", "right", "height", "size"], rows)


def read_merges_csv(path, leaves: list[str]) -> Dendrogram:
    header, rows, _ = read_rows(path)
    if header != ["step", "left", "right", "height", "size"]:
        raise ValidationError(f"{path}: expected header step,left,right,height,size")
    merges = []
    for k, r in enumerate(rows):
        if int(r[0]) != k:
            raise ValidationError(f"{path}: merge steps must be consecutive from 0")
        merges.append(Merge(left=int(r[1]), right=int(r[2]), height=float(r[3]), size=int(r[4])))
    return Dendrogram(leaves=list(leaves), merges=merges)


def write_leaf_order_csv(path, d: Dendrogram) -> None:
    write_rows(path, ["node", "id"], [[str(i), cid] for i, cid in enumerate(d.leaves)])


def read_leaf_order_csv(path) -> list[str]:
    header, rows, _ = read_rows(path)
    if header != ["node", "id"]:
        raise ValidationError(f"{path}: expected header node,id")
    out = [""] * len(rows)
    for r in rows:
        out[int(r[0])] = r[1]
    return out
