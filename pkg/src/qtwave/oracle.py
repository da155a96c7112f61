"""Dense reference solvers on small grids.

Fields are numpy arrays of shape ``(N_x[, N_y[, N_z]])``; a :class:`DenseField`
bundles the two spinor components.  Transforms are unitary (``1/sqrt(N)`` per
axis) and use the same exponent sign as the QFT core, so that
``d/dx = -i Q^dagger D Q`` with ``D = N sin(2 pi k / N)``.

The axis-to-Pauli assignment (``paulis``) must match the one used by
:mod:`qtwave.evolve`; both default to x->X, y->Y, z->Z in axis order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, DimensionError, ParameterError
from .qft_mpo import FORWARD_SIGN
from .registers import Layout
from .tensor_core import DTYPE
from .tt import Mps, dense_to_mps, mps_to_dense

DENSE_POINTS_BUDGET = 2**30
PAULI_ORDER = ("X", "Y", "Z")


@dataclass
class DenseField:
    """Spinor components ``psi0``, ``psi1`` on a full grid."""

    psi0: np.ndarray
    psi1: np.ndarray

    def __post_init__(self) -> None:
        self.psi0 = np.asarray(self.psi0, dtype=DTYPE)
        self.psi1 = np.asarray(self.psi1, dtype=DTYPE)
        if self.psi0.shape != self.psi1.shape:
            raise DimensionError(f"component shapes differ: {self.psi0.shape} != {self.psi1.shape}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.psi0.shape

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.psi0, self.psi0).real + np.vdot(self.psi1, self.psi1).real))

    def to_vector(self) -> np.ndarray:
        """Dense spinor vector with the time qubit as the leading bit."""
        return np.concatenate([self.psi0.reshape(-1), self.psi1.reshape(-1)])

    @classmethod
    def from_vector(cls, vec: np.ndarray, shape: Sequence[int]) -> DenseField:
        vec = np.asarray(vec).reshape(2, -1)
        return cls(vec[0].reshape(shape), vec[1].reshape(shape))

    @classmethod
    def from_mps(cls, psi: Mps, layout: Layout) -> DenseField:
        if not layout.has_time_qubit:
            raise DimensionError("DenseField.from_mps expects a layout with a time qubit")
        _check_budget(layout.shape)
        return cls.from_vector(mps_to_dense(psi), layout.shape)

    def to_mps(self, opts=None) -> Mps:
        from .tensor_core import EXACT

        return dense_to_mps(self.to_vector(), opts or EXACT)

    def copy(self) -> DenseField:
        return DenseField(self.psi0.copy(), self.psi1.copy())


def _check_budget(shape: Sequence[int]) -> None:
    if math.prod(shape) > DENSE_POINTS_BUDGET:
        raise CapacityError(f"{math.prod(shape)} grid points exceed the dense budget {DENSE_POINTS_BUDGET}")


def _check_pow2(shape: Sequence[int]) -> None:
    for s in shape:
        if s < 1 or s & (s - 1):
            raise ParameterError(f"grid size {s} is not a power of two")


# ---------------------------------------------------------------------------
# transforms


def dft(a: np.ndarray | DenseField, sign: int = FORWARD_SIGN):
    """Unitary DFT over every axis, ``exp(sign 2j pi k i / N) / sqrt(N)``."""
    if isinstance(a, DenseField):
        return DenseField(dft(a.psi0, sign), dft(a.psi1, sign))
    a = np.asarray(a, dtype=DTYPE)
    _check_pow2(a.shape)
    if sign == -1:
        return np.fft.fftn(a, norm="ortho")
    if sign == 1:
        return np.fft.ifftn(a, norm="ortho")
    raise ParameterError(f"sign must be +1 or -1, got {sign}")


def idft(a: np.ndarray | DenseField, sign: int = FORWARD_SIGN):
    """Inverse of :func:`dft` with the same ``sign``."""
    return dft(a, -sign)


def dispersion(n: int, k: int) -> float:
    """``N sin(2 pi k / N)`` for ``k`` in ``[-N/2, N/2)``."""
    big_n = 2**n
    if not -big_n // 2 <= k < big_n // 2 or (big_n == 1 and k != 0):
        raise ParameterError(f"wavenumber {k} outside [-{big_n // 2}, {big_n // 2})")
    return big_n * math.sin(2 * math.pi * k / big_n)


def dispersion_grid(size: int) -> np.ndarray:
    """``p`` over the wrap-around DFT index ``0..N-1``."""
    return size * np.sin(2 * np.pi * np.arange(size) / size)


def default_paulis(dims: int) -> tuple[str, ...]:
    return PAULI_ORDER[:dims]


def _momenta(shape: Sequence[int], paulis: Sequence[str] | None):
    dims = len(shape)
    paulis = tuple(paulis) if paulis is not None else default_paulis(dims)
    if len(paulis) != dims or len(set(paulis)) != dims or set(paulis) - set(PAULI_ORDER):
        raise ParameterError(f"invalid Pauli assignment {paulis} for {dims} axes")
    comps = {"X": 0.0, "Y": 0.0, "Z": 0.0}
    for axis, (size, label) in enumerate(zip(shape, paulis)):
        p = dispersion_grid(size)
        view = [1] * dims
        view[axis] = size
        comps[label] = p.reshape(view)
    full = np.zeros(tuple(shape))
    return tuple(comps[k] + full for k in PAULI_ORDER)


# ---------------------------------------------------------------------------
# exact propagation


class KSpacePropagator:
    """Per-wavevector data ``|p|``, ``theta_z``, ``phi_xy`` of the exact solution."""

    def __init__(self, shape: Sequence[int], paulis: Sequence[str] | None = None):
        _check_pow2(shape)
        _check_budget(shape)
        self.shape = tuple(shape)
        px, py, pz = _momenta(shape, paulis)
        self.px, self.py, self.pz = px, py, pz
        self.pabs = np.sqrt(px**2 + py**2 + pz**2)
        zero = self.pabs == 0
        ratio = np.where(zero, 1.0, pz / np.where(zero, 1.0, self.pabs))
        self.theta = np.where(zero, 0.0, np.arccos(np.clip(ratio, -1.0, 1.0)))
        self.phi = np.where(zero, 0.0, np.arctan2(py, px))

    def matrix(self, t: float):
        """Entries ``(u00, u01, u10, u11)`` of the per-mode 2x2 evolution."""
        c = np.cos(self.pabs * t)
        s = np.sin(self.pabs * t)
        ct, st = np.cos(self.theta), np.sin(self.theta)
        u00 = c - 1j * ct * s
        u01 = -1j * np.exp(-1j * self.phi) * st * s
        u10 = -1j * s * st * np.exp(1j * self.phi)
        u11 = c + 1j * ct * s
        return u00, u01, u10, u11

    def apply(self, field_k: DenseField, t: float) -> DenseField:
        if field_k.shape != self.shape:
            raise DimensionError(f"field shape {field_k.shape} != propagator shape {self.shape}")
        u00, u01, u10, u11 = self.matrix(t)
        return DenseField(u00 * field_k.psi0 + u01 * field_k.psi1, u10 * field_k.psi0 + u11 * field_k.psi1)

    def generator(self, field_k: DenseField) -> DenseField:
        """``|p| h(k)`` applied per mode."""
        a, b = field_k.psi0, field_k.psi1
        return DenseField(self.pz * a + (self.px - 1j * self.py) * b, (self.px + 1j * self.py) * a - self.pz * b)


def exact_evolve(field_k: DenseField, t: float, paulis: Sequence[str] | None = None) -> DenseField:
    """Evolve a wavevector-space field to time ``t`` in a single pass."""
    return KSpacePropagator(field_k.shape, paulis).apply(field_k, t)


def exact_solution(field: DenseField, t: float, paulis: Sequence[str] | None = None) -> DenseField:
    """Real-space field at time ``t``: transform, propagate, transform back."""
    return idft(exact_evolve(dft(field), t, paulis))


# ---------------------------------------------------------------------------
# Runge-Kutta reference


def spectral_derivative(a: np.ndarray, axis: int) -> np.ndarray:
    """Periodic central-difference derivative, evaluated through the DFT."""
    size = a.shape[axis]
    view = [1] * a.ndim
    view[axis] = size
    p = dispersion_grid(size).reshape(view)
    ak = dft(a)
    return idft(-1j * p * ak)


def _apply_pauli(label: str, a: np.ndarray, b: np.ndarray):
    if label == "X":
        return b, a
    if label == "Y":
        return -1j * b, 1j * a
    return a, -b


def eom_rhs(field: DenseField, paulis: Sequence[str] | None = None) -> DenseField:
    """``sum_l sigma_l d_l Psi`` in real space."""
    paulis = tuple(paulis) if paulis is not None else default_paulis(field.psi0.ndim)
    out0 = np.zeros_like(field.psi0)
    out1 = np.zeros_like(field.psi1)
    for axis, label in enumerate(paulis):
        d0 = spectral_derivative(field.psi0, axis)
        d1 = spectral_derivative(field.psi1, axis)
        r0, r1 = _apply_pauli(label, d0, d1)
        out0 += r0
        out1 += r1
    return DenseField(out0, out1)


def max_momentum(shape: Sequence[int]) -> float:
    return math.sqrt(sum(np.max(np.abs(dispersion_grid(s))) ** 2 for s in shape))


def rk4_evolve(
    field: DenseField, dt: float, steps: int, paulis: Sequence[str] | None = None
) -> DenseField:
    """Classical RK4 on the real-space equations of motion.

    Raises:
        ParameterError: if ``dt * max|p| >= 2.7`` (outside the RK4 stability region).
    """
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    pmax = max_momentum(field.shape)
    if abs(dt) * pmax >= 2.7:
        raise ParameterError(f"dt * max|p| = {abs(dt) * pmax:.3f} violates the RK4 stability guard 2.7")
    psi = field.copy()

    def rhs(f: DenseField) -> DenseField:
        return eom_rhs(f, paulis)

    for _ in range(steps):
        k1 = rhs(psi)
        k2 = rhs(DenseField(psi.psi0 + 0.5 * dt * k1.psi0, psi.psi1 + 0.5 * dt * k1.psi1))
        k3 = rhs(DenseField(psi.psi0 + 0.5 * dt * k2.psi0, psi.psi1 + 0.5 * dt * k2.psi1))
        k4 = rhs(DenseField(psi.psi0 + dt * k3.psi0, psi.psi1 + dt * k3.psi1))
        psi = DenseField(
            psi.psi0 + dt / 6 * (k1.psi0 + 2 * k2.psi0 + 2 * k3.psi0 + k4.psi0),
            psi.psi1 + dt / 6 * (k1.psi1 + 2 * k2.psi1 + 2 * k3.psi1 + k4.psi1),
        )
    return psi
