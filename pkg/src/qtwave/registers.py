"""Register layout: an optional time qubit followed by x, y, z registers.

Site order on the chain is ``[time][x MSB..LSB][y MSB..LSB][z MSB..LSB]``.
Each register of ``n`` qubits discretises the unit box into ``N = 2**n``
periodic points ``x_i = i / N``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, LayoutError
from .tensor_core import DTYPE
from .tt import Mps, product_mps

AXIS_LABELS = ("x", "y", "z")


@dataclass(frozen=True)
class Layout:
    """Map from registers to chain sites.

    Attributes:
        axes: ``(label, n_qubits)`` pairs in chain order; labels from x, y, z.
        has_time_qubit: whether site 0 carries the spinor component.
    """

    axes: tuple[tuple[str, int], ...]
    has_time_qubit: bool = False

    def __post_init__(self) -> None:
        axes = tuple((str(a), int(n)) for a, n in self.axes)
        object.__setattr__(self, "axes", axes)
        if not 1 <= len(axes) <= 3:
            raise LayoutError(f"need 1 to 3 axes, got {len(axes)}")
        labels = [a for a, _ in axes]
        unknown = [a for a in labels if a not in AXIS_LABELS]
        if unknown:
            raise LayoutError(f"unknown axis label {unknown[0]!r}")
        if labels != sorted(labels, key=AXIS_LABELS.index) or len(set(labels)) != len(labels):
            raise LayoutError(f"axes must be distinct and ordered x, y, z; got {labels}")
        for a, n in axes:
            if n < 1:
                raise LayoutError(f"axis {a} needs at least one qubit, got {n}")

    @classmethod
    def uniform(cls, n: int, dims: int, has_time_qubit: bool = False) -> Layout:
        return cls(tuple((AXIS_LABELS[d], n) for d in range(dims)), has_time_qubit)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.axes)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        """Grid points per axis."""
        return tuple(2**n for _, n in self.axes)

    @property
    def n_spatial(self) -> int:
        return sum(self.qubits)

    @property
    def n_total(self) -> int:
        return self.n_spatial + int(self.has_time_qubit)

    @property
    def offset(self) -> int:
        return int(self.has_time_qubit)

    def n_of(self, axis: str) -> int:
        for a, n in self.axes:
            if a == axis:
                return n
        raise LayoutError(f"axis {axis!r} not in layout {self.labels}")

    def spacing(self, axis: str) -> float:
        return 2.0 ** -self.n_of(axis)

    def register_span(self, axis: str) -> range:
        """Chain sites occupied by ``axis``."""
        start = self.offset
        for a, n in self.axes:
            if a == axis:
                return range(start, start + n)
            start += n
        raise LayoutError(f"axis {axis!r} not in layout {self.labels}")

    def with_time_qubit(self, flag: bool = True) -> Layout:
        return Layout(self.axes, flag)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        return {"axes": [[a, n] for a, n in self.axes], "has_time_qubit": self.has_time_qubit}

    @classmethod
    def from_dict(cls, d: dict) -> Layout:
        return cls(tuple((a, int(n)) for a, n in d["axes"]), bool(d.get("has_time_qubit", False)))

    @classmethod
    def from_json(cls, text: str) -> Layout:
        return cls.from_dict(json.loads(text))


def index_to_coord(layout: Layout, index: Sequence[int]) -> np.ndarray:
    """Coordinates ``i_l / N_l`` (indices wrap periodically)."""
    if len(index) != len(layout.axes):
        raise DimensionError(f"index has {len(index)} entries for {len(layout.axes)} axes")
    return np.array(
        [float(Fraction(int(i) % 2**n, 2**n)) for i, (_, n) in zip(index, layout.axes)]
    )


def axis_coords(layout: Layout, axis: str) -> np.ndarray:
    n = layout.n_of(axis)
    return np.arange(2**n) / 2**n


def register_span(layout: Layout, axis: str) -> range:
    return layout.register_span(axis)


def indices_to_bits(layout: Layout, indices: np.ndarray) -> np.ndarray:
    """Spatial bitstrings (MSB first per register) for an ``(m, n_axes)`` index array."""
    indices = np.asarray(indices, dtype=np.int64)
    cols = []
    for k, (_, n) in enumerate(layout.axes):
        shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        cols.append((indices[:, k : k + 1] >> shifts[None, :]) & 1)
    return np.concatenate(cols, axis=1)


def plus_state(layout: Layout) -> Mps:
    """Uniform superposition ``2**(-n/2)`` over all spatial bitstrings."""
    if layout.has_time_qubit:
        raise LayoutError("plus_state is defined on the spatial registers only")
    v = np.full(2, 1 / np.sqrt(2), dtype=DTYPE)
    return product_mps([v] * layout.n_spatial)


def spinor_assemble(psi0: Mps, psi1: Mps) -> Mps:
    """State with a leading time site: ``|0>|psi0> + |1>|psi1>``."""
    if psi0.n_sites != psi1.n_sites:
        raise DimensionError(f"component site counts differ: {psi0.n_sites} != {psi1.n_sites}")
    n = psi0.n_sites
    time = np.zeros((1, 2, 2), dtype=DTYPE)
    time[0, 0, 0] = 1.0
    time[0, 1, 1] = 1.0
    cores = [time]
    for i, (a, b) in enumerate(zip(psi0.cores, psi1.cores)):
        la, _, ra = a.shape
        lb, _, rb = b.shape
        if i == n - 1:
            c = np.zeros((la + lb, 2, 1), dtype=DTYPE)
            c[:la] = a
            c[la:] = b
        else:
            c = np.zeros((la + lb, 2, ra + rb), dtype=DTYPE)
            c[:la, :, :ra] = a
            c[la:, :, ra:] = b
        cores.append(c)
    return Mps(cores)


def spinor_project(psi: Mps, bit: int, layout: Layout | None = None) -> Mps:
    """Unnormalised spatial component selected by the time qubit value ``bit``."""
    if layout is not None and not layout.has_time_qubit:
        raise LayoutError("layout has no time qubit")
    if bit not in (0, 1):
        raise LayoutError(f"time bit must be 0 or 1, got {bit}")
    if psi.n_sites < 2:
        raise LayoutError("state has no spatial sites after the time qubit")
    head = psi.cores[0][:, bit, :]  # (1, chi)
    cores = list(psi.cores[1:])
    cores[0] = np.tensordot(head, cores[0], axes=(1, 0))
    return Mps(cores)
