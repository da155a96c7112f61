"""Initial conditions: diagonal encoders, state preparation, spinor set-up.

Functions of position are encoded on the diagonal of an Mpo.  Gaussians go
through :func:`qtwave.pauli_iz.exp_iz_mpo`, polynomial prefactors through
:func:`qtwave.pauli_iz.iz_sum_to_mpo`, and products of the two through
:func:`qtwave.tt.mpo_mul`.  Applying such an Mpo to the all-ones product
state (the plus state with its ``sqrt(2)`` per-site prefactor folded into the
cores) yields an Mps whose amplitudes are the function values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, LayoutError, NumericalError, ParameterError
from .pauli_iz import IZSum, affine, embed, exp_iz_mpo, index_operator, iz_sum_to_mpo, power
from .registers import Layout, spinor_assemble
from .tensor_core import DTYPE, SvdOptions
from .tt import (
    Mpo,
    Mps,
    apply_mpo,
    compress,
    concat_mpo,
    diagonal_part,
    dense_to_mps,
    mpo_mul,
    product_mps,
    zero_mpo,
)

DEFAULT_SVD = SvdOptions(1e-14)
DENSE_POINTS_BUDGET = 2**30

FUNCTION_KINDS = ("gaussian", "ricker1d", "ricker2d", "tapered_gaussian3d", "zero")


@dataclass(frozen=True)
class FunctionSpec:
    """Which initial function to build, and its parameters.

    ``mu`` holds one center per axis; a single value is broadcast.
    """

    kind: str
    mu: tuple[float, ...] = (0.5,)
    sigma: float = 0.1
    alpha: float = 1.2

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", tuple(float(m) for m in np.atleast_1d(self.mu)))
        if self.kind not in FUNCTION_KINDS:
            raise ParameterError(f"unknown function kind {self.kind!r}; expected one of {FUNCTION_KINDS}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        for m in self.mu:
            if not 0.0 <= m < 1.0:
                raise ParameterError(f"mu must lie in [0, 1), got {m}")

    def centers(self, dims: int) -> tuple[float, ...]:
        if len(self.mu) == 1:
            return self.mu * dims
        if len(self.mu) != dims:
            raise ParameterError(f"{len(self.mu)} centers given for {dims} axes")
        return self.mu


# ---------------------------------------------------------------------------
# symbolic arguments


def position_sum(n: int, mu: float = 0.0) -> IZSum:
    """``x - mu`` on an ``n``-qubit register, ``x_i = i / 2**n``."""
    return affine(index_operator(n), 2.0**-n, -mu)


def gaussian_exponent(n: int, mu: float, sigma: float) -> IZSum:
    """``-(x - mu)**2 / (2 sigma**2)``."""
    return power(position_sum(n, mu), 2).scaled(-1.0 / (2 * sigma**2))


def gaussian_mpo(n: int, mu: float, sigma: float, opts: SvdOptions = DEFAULT_SVD) -> Mpo:
    """Diagonal ``exp(-(x_i - mu)**2 / 2 sigma**2)``."""
    _check_params(mu, sigma)
    return exp_iz_mpo(gaussian_exponent(n, mu, sigma), 1.0, None, opts)


def ricker1d_mpo(n: int, mu: float, sigma: float, opts: SvdOptions = DEFAULT_SVD) -> Mpo:
    """Diagonal ``2/(sqrt(3 sigma) pi**(1/4)) (1 - ((x-mu)/sigma)**2) exp(-(x-mu)**2/2 sigma**2)``."""
    _check_params(mu, sigma)
    pref = 2.0 / (math.sqrt(3 * sigma) * math.pi**0.25)
    bracket = affine(power(position_sum(n, mu), 2), -pref / sigma**2, pref)
    poly = iz_sum_to_mpo(bracket, opts)
    return diagonal_part(mpo_mul(poly, gaussian_mpo(n, mu, sigma, opts), opts))


def ricker2d_sum(layout: Layout, mux: float, muy: float, sigma: float) -> IZSum:
    """Polynomial prefactor ``(1 - ((x-mux)**2 + (y-muy)**2) / 2 sigma**2) / (pi sigma**4)``."""
    nx, ny = _two_axes(layout)
    total = nx + ny
    r2 = embed(power(position_sum(nx, mux), 2), total, 0) + embed(power(position_sum(ny, muy), 2), total, nx)
    return affine(r2, -1.0 / (2 * sigma**2), 1.0).scaled(1.0 / (math.pi * sigma**4))


def ricker2d_mpo(
    layout: Layout, mux: float, muy: float, sigma: float, opts: SvdOptions = DEFAULT_SVD
) -> Mpo:
    """Two-dimensional Ricker wavelet on the x and y registers of ``layout``."""
    _check_params(mux, sigma)
    _check_params(muy, sigma)
    nx, ny = _two_axes(layout)
    poly = iz_sum_to_mpo(ricker2d_sum(layout, mux, muy, sigma), opts)
    gauss = concat_mpo(gaussian_mpo(nx, mux, sigma, opts), gaussian_mpo(ny, muy, sigma, opts))
    return diagonal_part(mpo_mul(poly, gauss, opts))


def _two_axes(layout: Layout) -> tuple[int, int]:
    if layout.labels != ("x", "y"):
        raise LayoutError(f"2D Ricker needs axes (x, y), got {layout.labels}")
    return layout.n_of("x"), layout.n_of("y")


def _check_params(mu: float, sigma: float) -> None:
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if not 0.0 <= mu < 1.0:
        raise ParameterError(f"mu must lie in [0, 1), got {mu}")


# ---------------------------------------------------------------------------
# states


def _ones_state(n: int) -> Mps:
    # plus state with its sqrt(2) per-site prefactor folded in
    return product_mps([np.ones(2, dtype=DTYPE)] * n)


def prepare_state(f_mpo: Mpo, normalize: bool = False, opts: SvdOptions = DEFAULT_SVD) -> Mps:
    """Mps with amplitudes ``f(x_i)`` from a diagonal encoder.

    Raises:
        NumericalError: if the resulting state has zero norm.
    """
    s = apply_mpo(f_mpo, _ones_state(f_mpo.n_sites), opts)
    nrm = s.norm()
    if nrm == 0.0 or not np.isfinite(nrm):
        raise NumericalError("prepared state has zero (or non-finite) norm")
    return s.scale(1.0 / nrm) if normalize else s


def prep_operator(f_mpo: Mpo) -> Mpo:
    """``|0><0|_t (x) sqrt(2)**n f`` acting on time-plus (x) spatial-plus.

    The ``sqrt(2)`` factors are spread one per spatial core.
    """
    proj = np.diag([1.0, 0.0]).astype(DTYPE).reshape(1, 2, 2, 1)
    cores = [proj] + [c * math.sqrt(2) for c in f_mpo.cores]
    return Mpo(cores)


def _window(t: np.ndarray, mu: float, alpha: float) -> np.ndarray:
    u = np.pi * (t - mu)
    base = np.clip(np.cos(u), 0.0, None)
    with np.errstate(divide="ignore"):
        return np.where(base > 0, base ** (np.abs(u) / alpha), 0.0)


def tapered_gaussian_fields(layout: Layout, mu: float, sigma: float, alpha: float):
    """Dense ``(psi0, psi1)`` of the tapered 3D Gaussian, each with norm ``1/sqrt(2)``."""
    if layout.labels != ("x", "y", "z"):
        raise LayoutError(f"tapered 3D Gaussian needs axes (x, y, z), got {layout.labels}")
    npts = math.prod(layout.shape)
    if npts > DENSE_POINTS_BUDGET:
        raise CapacityError(f"{npts} grid points exceed the dense budget {DENSE_POINTS_BUDGET}")
    x = np.arange(layout.shape[0]) / layout.shape[0]
    y = np.arange(layout.shape[1]) / layout.shape[1]
    z = np.arange(layout.shape[2]) / layout.shape[2]
    gx = np.exp(-((x - mu) ** 2) / (2 * sigma**2))
    gy = np.exp(-((y - mu) ** 2) / (2 * sigma**2))
    gz = np.exp(-((z - mu) ** 2) / (2 * sigma**2))
    dgz = -(z - mu) / sigma**2 * gz
    mx = _window(x, mu, alpha)
    my = _window(y, mu, alpha)

    u, v = np.meshgrid(x - mu, y - mu, indexing="ij")
    w = u + 1j * v
    aw = np.abs(w)
    delta = min(1.0 / layout.shape[0], 1.0 / layout.shape[1])
    safe = np.where(aw < delta / 2, 1.0, aw)
    fxy = sigma**2 * (w / safe**2) * (np.exp(-(aw**2) / (2 * sigma**2)) - 1.0)
    fxy = np.where(aw < delta / 2, 0.0, fxy)

    taper = (mx[:, None] * my[None, :])[:, :, None]
    psi0 = taper * (gx[:, None] * gy[None, :])[:, :, None] * gz[None, None, :]
    psi1 = taper * fxy[:, :, None] * dgz[None, None, :]
    psi0 = psi0.astype(DTYPE) / (np.linalg.norm(psi0) * math.sqrt(2))
    psi1 = psi1.astype(DTYPE) / (np.linalg.norm(psi1) * math.sqrt(2))
    return psi0, psi1


def tapered_gaussian3d(layout: Layout, mu: float, sigma: float, alpha: float, opts: SvdOptions = DEFAULT_SVD):
    """Tapered 3D Gaussian ``(psi0, psi1)`` as Mps, built densely then split."""
    psi0, psi1 = tapered_gaussian_fields(layout, mu, sigma, alpha)
    return dense_to_mps(psi0.reshape(-1), opts), dense_to_mps(psi1.reshape(-1), opts)


def zero_state(n: int) -> Mps:
    return product_mps([np.zeros(2, dtype=DTYPE)] * n)


def function_mpo(spec: FunctionSpec, layout: Layout, opts: SvdOptions = DEFAULT_SVD) -> Mpo:
    """Diagonal encoder of ``spec`` over the spatial registers of ``layout``."""
    spatial = layout.with_time_qubit(False)
    mus = spec.centers(len(spatial.axes))
    if spec.kind == "gaussian":
        return concat_mpo(*(gaussian_mpo(n, m, spec.sigma, opts) for (_, n), m in zip(spatial.axes, mus)))
    if spec.kind == "ricker1d":
        if len(spatial.axes) != 1:
            raise LayoutError("ricker1d needs a single axis")
        return ricker1d_mpo(spatial.qubits[0], mus[0], spec.sigma, opts)
    if spec.kind == "ricker2d":
        return ricker2d_mpo(spatial, mus[0], mus[1], spec.sigma, opts)
    if spec.kind == "zero":
        return zero_mpo(spatial.n_spatial)
    raise ParameterError(f"{spec.kind} has no diagonal encoder")


def initial_spinor(spec: FunctionSpec, layout: Layout, opts: SvdOptions = DEFAULT_SVD) -> Mps:
    """Normalised spinor state ``(psi0, psi1)`` with a leading time qubit.

    All kinds except ``tapered_gaussian3d`` start at rest (``psi1 = 0``).
    """
    spatial = layout.with_time_qubit(False)
    if spec.kind == "tapered_gaussian3d":
        mus = spec.centers(3)
        if len(set(mus)) != 1:
            raise ParameterError("tapered 3D Gaussian uses one common center")
        psi0, psi1 = tapered_gaussian3d(spatial, mus[0], spec.sigma, spec.alpha, opts)
    else:
        psi0 = prepare_state(function_mpo(spec, spatial, opts), normalize=True, opts=opts)
        psi1 = zero_state(spatial.n_spatial)
    out, _ = compress(spinor_assemble(psi0, psi1), opts)
    return out
