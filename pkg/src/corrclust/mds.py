"""Two-dimensional stress-minimizing embeddings of distance matrices.

The objective is the raw stress sum_{i<j} (||x_i - x_j|| - w_ij)^2 with unit
weights.  It is minimized by SMACOF majorization (the Guttman transform),
which is deterministic and never increases the stress, starting from the
classical double-centering solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlate import DistanceMatrix
from .errors import NumericError, ValidationError
from .panel import CompanyMeta
from .tabular import fmt, read_rows, write_rows


@dataclass(frozen=True)
class Embedding:
    companies: list[str]
    points: np.ndarray  # (n, 2)
    stress: float
    iterations: int

    def __post_init__(self):
        if self.points.shape != (len(self.companies), 2):
            raise ValidationError("embedding must be n x 2")
        if not np.all(np.isfinite(self.points)):
            raise ValidationError("embedding coordinates must be finite")


def stress(points: np.ndarray, w: np.ndarray) -> float:
    """sum_{i<j} (||x_i - x_j|| - w_ij)^2."""
    d = _pairwise(points)
    iu = np.triu_indices(len(points), k=1)
    diff = d[iu] - w[iu]
    return float(diff @ diff)


def _pairwise(points: np.ndarray) -> np.ndarray:
    delta = points[:, None, :] - points[None, :, :]
    return np.sqrt((delta * delta).sum(axis=2))


def classical_mds(dist: DistanceMatrix) -> Embedding:
    """Double-center the squared distances and keep the top two eigenpairs.

    Negative eigenvalues (non-Euclidean input) are truncated to zero.
    """
    w = dist.w
    n = w.shape[0]
    if n < 2:
        raise ValidationError("need at least two points to embed")
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (w * w) @ j
    evals, evecs = np.linalg.eigh(b)
    top = np.argsort(evals)[::-1][:2]
    lam = np.maximum(evals[top], 0.0)
    points = evecs[:, top] * np.sqrt(lam)
    return Embedding(
        companies=list(dist.companies),
        points=points,
        stress=stress(points, w),
        iterations=0,
    )


def smacof(
    dist: DistanceMatrix,
    init: Embedding | None = None,
    max_iters: int = 500,
    tol: float = 1e-9,
) -> Embedding:
    """Iterate the Guttman transform until the relative stress decrease
    drops below ``tol`` or ``max_iters`` is reached.

    Coincident points contribute no direction to the transform (the
    zero-distance convention), so the update never divides by zero.
    """
    if max_iters < 1:
        raise ValidationError("max_iters must be at least 1")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    w = dist.w
    n = w.shape[0]
    if init is None:
        init = classical_mds(dist)
    if list(init.companies) != list(dist.companies):
        raise ValidationError("init embedding companies do not match the matrix")
    x = init.points - init.points.mean(axis=0)
    prev = stress(x, w)
    iterations = 0
    for iterations in range(1, max_iters + 1):
        d = _pairwise(x)
        ratio = np.zeros((n, n))
        np.divide(w, d, out=ratio, where=d > 0)
        b = -ratio
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        x = (b @ x) / n
        cur = stress(x, w)
        if cur > prev * (1 + 1e-12) + 1e-15:
            raise NumericError(
                f"stress increased at iteration {iterations}: {prev} -> {cur}"
            )
        done = prev == 0 or (prev - cur) / prev < tol
        prev = cur
        if done:
            break
    return Embedding(
        companies=list(dist.companies), points=x, stress=prev, iterations=iterations
    )


def procrustes_residual(a: Embedding, b: Embedding) -> float:
    """Minimal RMS point discrepancy aligning ``b`` onto ``a`` over
    translation, rotation, reflection, and uniform scaling."""
    pa, pb = a.points, b.points
    if pa.shape != pb.shape:
        raise ValidationError("embeddings must have the same shape")
    n = pa.shape[0]
    ca = pa - pa.mean(axis=0)
    cb = pb - pb.mean(axis=0)
    norm_b = float((cb * cb).sum())
    if norm_b == 0:
        return float(np.sqrt((ca * ca).sum() / n))
    u, s, vt = np.linalg.svd(cb.T @ ca)
    scale = s.sum() / norm_b
    rot = u @ vt
    aligned = scale * cb @ rot
    diff = ca - aligned
    return float(np.sqrt((diff * diff).sum() / n))


# ---------------------------------------------------------------------------
# serialization


def write_embedding_csv(path, emb: Embedding, meta: dict[str, CompanyMeta] | None = None) -> None:
    rows = []
    for i, cid in enumerate(emb.companies):
        m = meta.get(cid) if meta else None
        rows.append(
            [
                cid,
                fmt(emb.points[i, 0]),
                fmt(emb.points[i, 1]),
                m.sector if m else "",
                m.country if m else "",
            ]
        )
    write_rows(path, ["id", "x", "y", "label_sector", "label_country"], rows)


def read_embedding_csv(path) -> Embedding:
    header, rows, _ = read_rows(path)
    if header != ["id", "x", "y", "label_sector", "label_country"]:
        raise ValidationError(f"{path}: unexpected embedding header")
    companies = [r[0] for r in rows]
    points = np.array([[float(r[1]), float(r[2])] for r in rows], dtype=float)
    return Embedding(companies=companies, points=points, stress=0.0, iterations=0)
