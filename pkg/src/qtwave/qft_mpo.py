"""Quantum Fourier transform core (no terminal swaps) as an Mpo.

The core maps a register to bit-reversed wavenumber order:

    dense(core) = P_rev @ F,   F[k, i] = exp(sign * 2j*pi*k*i / N) / sqrt(N)

so the amplitude of bitstring ``b`` after the core is the ``rev(b)``-th
Fourier coefficient.  Diagonal operators in wavenumber space must therefore
be supplied with reversed IZ strings (:func:`qtwave.pauli_iz.reverse_strings`).

The default ``sign = +1`` makes ``d/dx = -i Q^dagger D Q`` with
``D = N sin(2 pi k / N)``, so ``Q^dagger exp(-i H t) Q`` integrates the
first-order equations of motion forward in time.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .registers import Layout
from .tensor_core import DTYPE, SvdOptions
from .tt import Mpo, Mps, apply_mpo, concat_mpo, identity_mpo, mpo_mul, product_mpo

FORWARD_SIGN = 1

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=DTYPE) / np.sqrt(2)
_P0 = np.diag([1.0, 0.0]).astype(DTYPE)
_P1 = np.diag([0.0, 1.0]).astype(DTYPE)


@dataclass(frozen=True)
class QftCore:
    mpo: Mpo
    sign: int
    n: int


def _controlled_phase(n: int, control: int, target: int, phi: float) -> Mpo:
    """``|0><0|_c + |1><1|_c (x) diag(1, e^{i phi})_t`` with bond 2 between the sites."""
    lo, hi = sorted((control, target))
    eye = np.eye(2, dtype=DTYPE)
    phase = np.diag([1.0, np.exp(1j * phi)]).astype(DTYPE)
    first_pair = (_P0, _P1) if lo == control else (eye, phase)
    last_pair = (eye, phase) if lo == control else (_P0, _P1)
    cores = []
    for k in range(n):
        if k < lo or k > hi:
            cores.append(eye.reshape(1, 2, 2, 1))
        elif k == lo:
            c = np.zeros((1, 2, 2, 2), dtype=DTYPE)
            c[0, :, :, 0], c[0, :, :, 1] = first_pair
            cores.append(c)
        elif k == hi:
            c = np.zeros((2, 2, 2, 1), dtype=DTYPE)
            c[0, :, :, 0], c[1, :, :, 0] = last_pair
            cores.append(c)
        else:
            c = np.zeros((2, 2, 2, 2), dtype=DTYPE)
            c[0, :, :, 0] = eye
            c[1, :, :, 1] = eye
            cores.append(c)
    return Mpo(cores)


def _single(n: int, site: int, gate: np.ndarray) -> Mpo:
    mats = [np.eye(2, dtype=DTYPE)] * n
    mats = list(mats)
    mats[site] = gate
    return product_mpo(mats)


def build_qft_core(n: int, sign: int = FORWARD_SIGN, opts: SvdOptions = SvdOptions(1e-14)) -> QftCore:
    """Hadamard and controlled-phase ladder applied gate by gate to the identity.

    The accumulated operator is compressed after every gate.
    """
    if n < 1:
        raise ParameterError(f"QFT needs n >= 1, got {n}")
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    u = identity_mpo(n)
    for j in range(n):
        u = mpo_mul(_single(n, j, _HADAMARD), u, opts)
        for k in range(j + 1, n):
            phi = sign * 2 * np.pi / 2 ** (k - j + 1)
            u = mpo_mul(_controlled_phase(n, k, j, phi), u, opts)
    return QftCore(u, sign, n)


_CACHE: dict[tuple[int, int, float, int | None], QftCore] = {}
_CACHE_LOCK = threading.Lock()


def qft_core(n: int, sign: int = FORWARD_SIGN, opts: SvdOptions = SvdOptions(1e-14)) -> QftCore:
    """Cached :func:`build_qft_core`."""
    key = (n, sign, opts.cutoff, opts.max_rank)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    core = build_qft_core(n, sign, opts)
    with _CACHE_LOCK:
        _CACHE[key] = core
    return core


def layout_qft_mpo(
    layout: Layout, inverse: bool = False, sign: int = FORWARD_SIGN, opts: SvdOptions = SvdOptions(1e-14)
) -> Mpo:
    """QFT core on every spatial register, identity on the time qubit."""
    parts = [identity_mpo(1)] if layout.has_time_qubit else []
    for _, n in layout.axes:
        q = qft_core(n, sign, opts).mpo
        parts.append(q.dagger() if inverse else q)
    return concat_mpo(*parts)


def apply_qft(
    s: Mps,
    layout: Layout,
    inverse: bool = False,
    opts: SvdOptions = SvdOptions(1e-14),
    sign: int = FORWARD_SIGN,
    build_opts: SvdOptions | None = None,
) -> Mps:
    """Apply the per-register QFT core (or its adjoint) to a state.

    ``opts`` truncates the state; ``build_opts`` (default ``opts``) compresses
    the core while it is built.
    """
    if s.n_sites != layout.n_total:
        raise DimensionError(f"state has {s.n_sites} sites, layout expects {layout.n_total}")
    return apply_mpo(layout_qft_mpo(layout, inverse, sign, build_opts or opts), s, opts)


def bit_reverse_permutation(n: int) -> np.ndarray:
    """``perm[i] = rev(i)`` over ``n`` bits."""
    idx = np.arange(2**n)
    out = np.zeros_like(idx)
    for b in range(n):
        out |= ((idx >> b) & 1) << (n - 1 - b)
    return out


def dft_matrix(n: int, sign: int = FORWARD_SIGN) -> np.ndarray:
    big_n = 2**n
    k = np.arange(big_n)
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / big_n) / np.sqrt(big_n)
