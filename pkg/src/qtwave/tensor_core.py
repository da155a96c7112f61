"""Dense complex tensors, pairwise contraction and truncated SVD.

Dense tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` in
C order; there is no wrapper class.  Everything in the package is built on
:func:`contract` and :func:`truncated_svd`.

Truncation rule
---------------
Singular values are dropped from the tail while the *relative discarded
squared weight*

    sum(s[r:] ** 2) / sum(s ** 2)

stays at or below ``cutoff``.  The same rule is used for every compression in
the package, so discarded weights from successive bonds add up to a bound on
the squared norm error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, ParameterError

DTYPE = np.complex128


@dataclass(frozen=True)
class SvdOptions:
    """Truncation settings.

    Attributes:
        cutoff: Maximum relative discarded squared singular weight, in [0, 1).
        max_rank: Optional hard cap on the number of kept singular values.
    """

    cutoff: float = 1e-14
    max_rank: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.cutoff < 1.0):
            raise ParameterError(f"cutoff must lie in [0, 1), got {self.cutoff}")
        if self.max_rank is not None and self.max_rank < 1:
            raise ParameterError(f"max_rank must be >= 1, got {self.max_rank}")


EXACT = SvdOptions(cutoff=0.0)


def as_tensor(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=DTYPE)


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    The result carries the free axes of ``a`` (in order) followed by the free
    axes of ``b``.

    Raises:
        DimensionError: if a pair of axes has unequal extents.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = []
    axes_b = []
    for ia, ib in axis_pairs:
        if not (-a.ndim <= ia < a.ndim) or not (-b.ndim <= ib < b.ndim):
            raise DimensionError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"axis pair ({ia}, {ib}) has mismatched extents {a.shape[ia]} != {b.shape[ib]}"
            )
        axes_a.append(ia)
        axes_b.append(ib)
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def _raw_svd(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"SVD did not converge for a {m.shape[0]}x{m.shape[1]} matrix") from exc


def truncation_rank(s: np.ndarray, opts: SvdOptions) -> tuple[int, float]:
    """Number of singular values to keep and the relative discarded weight."""
    top = float(np.max(np.abs(s))) if len(s) else 0.0
    if top == 0.0:
        return 1, 0.0
    # normalise first so that squaring neither overflows nor underflows
    s2 = (s.real / top) ** 2
    total = float(s2.sum())
    # tail[r] = weight discarded when keeping the first r values
    tail = np.concatenate([np.cumsum(s2[::-1])[::-1], [0.0]]) / total
    rank = int(np.argmax(tail <= opts.cutoff))
    rank = max(rank, 1)
    if opts.max_rank is not None:
        rank = min(rank, opts.max_rank)
    return rank, float(tail[rank])


def truncated_svd(m: np.ndarray, opts: SvdOptions = EXACT):
    """Truncated singular value decomposition of a matrix.

    Returns ``(U, S, Vh, discarded_weight)`` with ``S`` real, nonnegative and
    descending.  Columns of ``U`` are phase-fixed so that their first entry
    of non-negligible magnitude is real and nonnegative.

    Raises:
        DimensionError: if ``m`` is not a nonempty matrix.
        NumericalError: if LAPACK fails to converge.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"truncated_svd expects a matrix, got rank {m.ndim}")
    if m.size == 0:
        raise DimensionError(f"truncated_svd got an empty {m.shape[0]}x{m.shape[1]} matrix")
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"non-finite entries in a {m.shape[0]}x{m.shape[1]} matrix")
    u, s, vh = _raw_svd(m)
    rank, discarded = truncation_rank(s, opts)
    u = u[:, :rank]
    s = s[:rank]
    vh = vh[:rank, :]
    # deterministic phase: first entry with |u| above 1e-12 of the column max
    mag = np.abs(u)
    first = np.argmax(mag > 1e-12 * mag.max(axis=0, keepdims=True), axis=0)
    ref = u[first, np.arange(rank)]
    phase = np.where(np.abs(ref) > 0, ref / np.where(np.abs(ref) > 0, np.abs(ref), 1.0), 1.0)
    u = u * phase.conj()[None, :]
    vh = vh * phase[:, None]
    return u, s, vh, discarded
