"""Volume and orthogonalization primitives.

Volumes are kept in log space throughout: the volume of ``k`` vectors is the
product of their Gram-Schmidt residual norms, and that product over- or
underflows a double long before ``k`` gets interesting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

#: A residual norm ``r`` of an incoming vector ``v`` counts as zero when
#: ``r <= RANK_TOL * max(1, |v|)``.
RANK_TOL = 1e-10

#: Re-orthogonalize once when a residual keeps less than this fraction of the
#: input norm ("twice is enough").
REORTH_FRACTION = math.sqrt(0.5)

#: Greedy argmax ties: candidates whose squared residual is within this
#: relative distance of the maximum are tied and the lowest index wins.
TIE_RTOL = 1e-12


class DimensionMismatchError(ValueError):
    """Vectors that should share a dimension do not."""


class RankDeficientError(ValueError):
    """A vector lies (numerically) in the span of a basis it should extend."""


class ZeroVolumeError(ValueError):
    """The log of a zero volume was requested."""


VectorsLike = Union["PointSet", np.ndarray, Sequence[Sequence[float]]]


def as_matrix(vectors: VectorsLike, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a collection of vectors into a 2-D float64 array (one row each)."""
    if isinstance(vectors, PointSet):
        arr = vectors.points
    elif isinstance(vectors, np.ndarray):
        arr = vectors
    else:
        rows = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
        if not rows:
            return np.zeros((0, dim or 0))
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise DimensionMismatchError(f"vectors have mixed lengths {sorted(lengths)}")
        arr = np.vstack(rows)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :] if arr.size else np.zeros((0, dim or 0))
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D array of vectors, got shape {arr.shape}")
    if dim is not None and arr.shape[0] and arr.shape[1] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {arr.shape[1]}")
    return arr


def _as_vector(v, dim: int) -> np.ndarray:
    vec = np.asarray(v, dtype=np.float64).ravel()
    if vec.shape[0] != dim:
        raise DimensionMismatchError(f"expected a vector of dimension {dim}, got {vec.shape[0]}")
    return vec


def is_negligible(residual_norm: float, input_norm: float) -> bool:
    """Rank decision for a single Gram-Schmidt step."""
    return residual_norm <= RANK_TOL * max(1.0, input_norm)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=arr.dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered collection of ``n`` vectors in ``R^d`` with stable integer ids.

    ``sources`` is only set on composed sets and records, per row, the
    ``(part, original id)`` pair the row came from.
    """

    points: np.ndarray
    ids: Optional[np.ndarray] = None
    sources: Optional[tuple] = None

    def __post_init__(self):
        pts = as_matrix(self.points)
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"a point set needs n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        ids = np.arange(pts.shape[0]) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (pts.shape[0],):
            raise ValueError(f"need one id per point, got {ids.shape[0]} ids for {pts.shape[0]} points")
        if self.sources is not None and len(self.sources) != pts.shape[0]:
            raise ValueError("need one source entry per point")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "ids", _readonly(ids.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, rows: Sequence[int]) -> "PointSet":
        """Rows ``rows`` as a new point set, keeping their ids."""
        rows = np.asarray(rows, dtype=np.int64)
        sources = None if self.sources is None else tuple(self.sources[r] for r in rows)
        return PointSet(self.points[rows], self.ids[rows], sources)


@dataclass(frozen=True)
class LogVolume:
    """Natural log of a volume, with an explicit zero flag.

    ``log_value`` raises for zero volumes; use :meth:`as_float` when a total
    order including zero (as ``-inf``) is wanted.
    """

    value: float
    is_zero: bool = False

    @classmethod
    def zero(cls) -> "LogVolume":
        return cls(-math.inf, True)

    @property
    def log_value(self) -> float:
        if self.is_zero:
            raise ZeroVolumeError("volume is zero; its log is undefined")
        return self.value

    @property
    def volume(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.value)

    def as_float(self) -> float:
        return -math.inf if self.is_zero else self.value


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Incrementally built Gram-Schmidt basis.

    Attributes
    ----------
    original : ndarray, shape (t, d)
        The vectors in insertion order.
    orthogonalized : ndarray, shape (t, d)
        Their mutually orthogonal residuals.
    residual_norms : ndarray, shape (t,)
        Euclidean norms of ``orthogonalized``.
    """

    original: np.ndarray
    orthogonalized: np.ndarray
    residual_norms: np.ndarray

    def __post_init__(self):
        for name in ("original", "orthogonalized", "residual_norms"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=np.float64)))
        norms = self.residual_norms
        units = self.orthogonalized / norms[:, None] if norms.size else self.orthogonalized.copy()
        object.__setattr__(self, "units", _readonly(units))

    @classmethod
    def empty(cls, dim: int) -> "OrthoBasis":
        return cls(np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def from_vectors(cls, vectors: VectorsLike, dim: Optional[int] = None) -> "OrthoBasis":
        """Orthogonalize ``vectors`` in order; raises RankDeficientError on dependence."""
        mat = as_matrix(vectors, dim)
        basis = cls.empty(mat.shape[1] if dim is None else dim)
        for v in mat:
            basis = extend_basis(basis, v)
        return basis

    @property
    def dim(self) -> int:
        return self.original.shape[1]

    @property
    def size(self) -> int:
        return self.original.shape[0]

    def __len__(self) -> int:
        return self.size

    def log_volume(self) -> LogVolume:
        return LogVolume(float(np.sum(np.log(self.residual_norms))))

    def triangular(self) -> np.ndarray:
        """Lower-triangular ``L`` with ``original = L @ units``.

        ``L[j, j]`` is the j-th residual norm, so ``L @ L.T`` is the Gram
        matrix of ``original``.
        """
        lower = np.tril(self.original @ self.units.T)
        np.fill_diagonal(lower, self.residual_norms)
        return lower


def gram_matrix(vectors: VectorsLike) -> np.ndarray:
    """Matrix of pairwise inner products, ``G[i, j] = <v_i, v_j>``."""
    mat = as_matrix(vectors)
    gram = mat @ mat.T
    return (gram + gram.T) / 2


def residual(basis: OrthoBasis, v) -> tuple[np.ndarray, float]:
    """Component of ``v`` orthogonal to ``span(basis)`` and its norm.

    Modified Gram-Schmidt, with one extra pass when more than half of the
    squared norm was projected away.
    """
    vec = _as_vector(v, basis.dim)
    r = vec.copy()
    for q in basis.units:
        r -= (q @ r) * q
    norm = float(np.linalg.norm(r))
    if norm < REORTH_FRACTION * float(np.linalg.norm(vec)):
        for q in basis.units:
            r -= (q @ r) * q
        norm = float(np.linalg.norm(r))
    return r, norm


def extend_basis(basis: OrthoBasis, v) -> OrthoBasis:
    """New basis with ``v`` appended; the existing entries are unchanged."""
    vec = _as_vector(v, basis.dim)
    r, norm = residual(basis, vec)
    if is_negligible(norm, float(np.linalg.norm(vec))):
        raise RankDeficientError(
            f"residual norm {norm:.3e} is below the rank tolerance; vector lies in the basis span"
        )
    return OrthoBasis(
        np.vstack([basis.original, vec]),
        np.vstack([basis.orthogonalized, r]),
        np.append(basis.residual_norms, norm),
    )


def log_volume(vectors: VectorsLike) -> LogVolume:
    """Log of the volume of the parallelepiped spanned by ``vectors``.

    The empty set has volume 1.
    """
    mat = as_matrix(vectors)
    if mat.shape[0] == 0:
        return LogVolume(0.0)
    basis = OrthoBasis.empty(mat.shape[1])
    for v in mat:
        try:
            basis = extend_basis(basis, v)
        except RankDeficientError:
            return LogVolume.zero()
    return basis.log_volume()
