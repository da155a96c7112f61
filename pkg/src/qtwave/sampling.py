"""Amplitude sampling of large states, binning, and error metrics.

Samples draw grid indices uniformly at random and read the amplitude at each
one.  They are not Born-rule samples.  This is how a field on a grid too
large to store densely gets reconstructed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, LayoutError, ParameterError
from .oracle import DenseField
from .registers import Layout, indices_to_bits
from .tt import Mps, evaluate_amplitudes

CHUNK = 1 << 14


@dataclass(frozen=True)
class SampleSet:
    """Sampled grid indices ``(m, n_axes)`` and their complex amplitudes."""

    seed: int
    indices: np.ndarray
    values: np.ndarray
    layout: Layout

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.layout == other.layout
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"i_{a}" for a in self.layout.labels] + ["re", "im"])
            for idx, v in zip(self.indices, self.values):
                w.writerow([int(i) for i in idx] + [repr(float(v.real)), repr(float(v.imag))])


def _stream(seed: int, chunk_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk_id])))


def _draw_chunk(s: Mps, layout: Layout, seed: int, chunk_id: int, size: int):
    rng = _stream(seed, chunk_id)
    # row-major draws, so a shorter run is a prefix of a longer one
    idx = rng.integers(0, np.array(layout.shape, dtype=np.int64), size=(size, len(layout.shape)), dtype=np.int64)
    vals = evaluate_amplitudes(s, indices_to_bits(layout, idx))
    return idx, vals


def sample_points(s: Mps, layout: Layout, count: int, seed: int, threads: int = 1) -> SampleSet:
    """Draw ``count`` uniform grid indices and read the amplitudes of ``s``.

    Work is split into fixed-size chunks, each with its own Philox stream
    keyed by ``(seed, chunk)``, so the result does not depend on ``threads``.

    Raises:
        ParameterError: if ``count < 1`` or ``seed`` is negative.
        LayoutError: if the layout still has a time qubit.
        DimensionError: if ``s`` does not match the layout.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    if seed < 0 or seed >= 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if layout.has_time_qubit:
        raise LayoutError("project out the time qubit before sampling")
    if s.n_sites != layout.n_total:
        raise DimensionError(f"state has {s.n_sites} sites, layout expects {layout.n_total}")
    sizes = [min(CHUNK, count - k) for k in range(0, count, CHUNK)]
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _draw_chunk(s, layout, seed, j[0], j[1]), jobs))
    else:
        parts = [_draw_chunk(s, layout, seed, cid, size) for cid, size in jobs]
    idx = np.concatenate([p[0] for p in parts])
    vals = np.concatenate([p[1] for p in parts])
    return SampleSet(int(seed), idx, vals, layout)


@dataclass(frozen=True)
class Histogram:
    """Per-bin mean and count of sampled amplitudes.

    Attributes:
        bins: bins per axis.
        mean: complex per-bin mean; ``nan`` where empty.
        count: samples per bin.
        centers: bin-centre coordinates per axis, in ``[0, 1)``.
    """

    bins: tuple[int, ...]
    mean: np.ndarray
    count: np.ndarray
    centers: tuple[np.ndarray, ...]

    @property
    def empty(self) -> np.ndarray:
        return self.count == 0

    def write_csv(self, path: str | Path) -> None:
        labels = [f"c{k}" for k in range(len(self.bins))]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(labels + ["mean_re", "mean_im", "count"])
            for pos in np.ndindex(*self.bins):
                m = self.mean[pos]
                w.writerow(
                    [repr(float(self.centers[a][p])) for a, p in enumerate(pos)]
                    + [repr(float(m.real)), repr(float(m.imag)), int(self.count[pos])]
                )


def bin_of(indices: np.ndarray, layout: Layout, bins: Sequence[int]) -> np.ndarray:
    """Bin coordinates of grid indices: ``i * bins // N`` per axis."""
    return np.stack(
        [(indices[:, a].astype(np.int64) * b) // n_pts for a, (b, n_pts) in enumerate(zip(bins, layout.shape))],
        axis=1,
    )


def _normalize_bins(bins: int | Sequence[int], dims: int) -> tuple[int, ...]:
    out = (int(bins),) if np.isscalar(bins) else tuple(int(b) for b in bins)
    if len(out) == 1:
        out = out * dims
    if len(out) != dims:
        raise ParameterError(f"{len(out)} bin counts given for {dims} axes")
    if any(b < 1 for b in out):
        raise ParameterError(f"bins per axis must be >= 1, got {out}")
    return out


def histogram(samples: SampleSet, bins: int | Sequence[int]) -> Histogram:
    """Group samples into equal-width bins and average their values."""
    layout = samples.layout
    bins = _normalize_bins(bins, len(layout.axes))
    flat = np.ravel_multi_index(tuple(bin_of(samples.indices, layout, bins).T), bins)
    size = math.prod(bins)
    count = np.bincount(flat, minlength=size)
    total = np.bincount(flat, weights=samples.values.real, minlength=size) + 1j * np.bincount(
        flat, weights=samples.values.imag, minlength=size
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan + 0j)
    centers = tuple((np.arange(b) + 0.5) / b for b in bins)
    return Histogram(bins, mean.reshape(bins), count.reshape(bins), centers)


def bin_average(values: np.ndarray, bins: int | Sequence[int]) -> np.ndarray:
    """Exact per-bin mean of a dense grid function (grid sizes divisible by bins)."""
    values = np.asarray(values)
    bins = _normalize_bins(bins, values.ndim)
    shape = []
    for b, n_pts in zip(bins, values.shape):
        if n_pts % b:
            raise ParameterError(f"{b} bins do not divide {n_pts} grid points")
        shape += [b, n_pts // b]
    return values.reshape(shape).mean(axis=tuple(range(1, 2 * values.ndim, 2)))


@dataclass(frozen=True)
class ErrorReport:
    """Maximum absolute difference, raw and relative to the reference peak."""

    raw: float
    peak: float
    points: int

    @property
    def relative(self) -> float:
        """``raw / peak``; ``nan`` when the reference is identically zero."""
        return self.raw / self.peak if self.peak > 0 else math.nan

    @property
    def relative_defined(self) -> bool:
        return self.peak > 0

    def to_dict(self) -> dict:
        return {
            "max_abs_error": self.raw,
            "reference_peak": self.peak,
            "relative_error": None if not self.relative_defined else self.relative,
            "points": self.points,
        }


_COMPONENTS = ("psi0", "psi1", "both")


def _pick(f: DenseField | np.ndarray, component: str) -> list[np.ndarray]:
    if isinstance(f, DenseField):
        if component == "both":
            return [f.psi0, f.psi1]
        return [getattr(f, component)]
    return [np.asarray(f)]


def max_abs_error(
    a: DenseField | SampleSet | np.ndarray, b: DenseField | np.ndarray, component: str = "psi0"
) -> ErrorReport:
    """Maximum ``|a - b|`` over the compared points.

    ``a`` may be a dense field, a plain array, or a :class:`SampleSet`, in
    which case only the sampled indices are compared (against ``b``'s chosen
    component, or ``b`` itself when it is an array).

    Raises:
        ParameterError: if nothing overlaps or the component name is unknown.
        DimensionError: if grid shapes differ.
    """
    if component not in _COMPONENTS:
        raise ParameterError(f"component must be one of {_COMPONENTS}, got {component!r}")
    if isinstance(a, SampleSet):
        if component == "both":
            raise ParameterError("sample sets carry one component; choose psi0 or psi1")
        ref = _pick(b, component)[0]
        if len(a) == 0:
            raise ParameterError("empty sample set")
        if ref.shape != a.layout.shape:
            raise DimensionError(f"reference grid {ref.shape} != sampled grid {a.layout.shape}")
        picked = ref[tuple(a.indices.T)]
        diff = np.abs(a.values - picked)
        return ErrorReport(float(diff.max()), float(np.abs(ref).max()), len(a))
    xs, ys = _pick(a, component), _pick(b, component)
    if len(xs) != len(ys):
        raise ParameterError("cannot compare a plain array against both spinor components")
    raw, peak, pts = 0.0, 0.0, 0
    for x, y in zip(xs, ys):
        if x.shape != y.shape:
            raise DimensionError(f"shapes differ: {x.shape} != {y.shape}")
        if x.size == 0:
            raise ParameterError("empty overlap")
        raw = max(raw, float(np.abs(x - y).max()))
        peak = max(peak, float(np.abs(y).max()))
        pts += x.size
    return ErrorReport(raw, peak, pts)
