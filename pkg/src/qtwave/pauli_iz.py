"""Sums of Pauli strings built from I and Z only.

Such sums are always diagonal in the computational basis, which makes them
a compact symbolic carrier for functions of grid position.  A string is
stored as an integer mask with the same bit layout as a basis index: the
first (leftmost, most significant) character is the highest bit, and a set
bit means ``Z``.  The diagonal entry of a string at basis index ``i`` is
therefore ``(-1) ** popcount(i & mask)``.
"""

from __future__ import annotations

import math
from types import MappingProxyType
from typing import Iterator, Mapping

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError
from .tensor_core import DTYPE, EXACT, SvdOptions
from .tt import Mpo, compress_mpo, diagonal_part, identity_mpo, mpo_mul, mpo_sum, zero_mpo

_PAULI = {
    "I": np.eye(2, dtype=DTYPE),
    "X": np.array([[0, 1], [1, 0]], dtype=DTYPE),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=DTYPE),
    "Z": np.diag([1.0, -1.0]).astype(DTYPE),
}


def pauli_matrix(label: str) -> np.ndarray:
    return _PAULI[label].copy()


def string_to_mask(chars: str) -> int:
    if set(chars) - {"I", "Z"}:
        raise ParameterError(f"IZ strings may only contain I and Z, got {chars!r}")
    return int(chars.replace("I", "0").replace("Z", "1"), 2) if chars else 0


def mask_to_string(mask: int, n: int) -> str:
    return format(mask, f"0{n}b").replace("0", "I").replace("1", "Z") if n else ""


def _reverse_mask(mask: int, n: int) -> int:
    return int(format(mask, f"0{n}b")[::-1], 2) if n else 0


class IZSum:
    """Immutable weighted sum of IZ strings over ``register_size`` qubits."""

    __slots__ = ("_terms", "register_size")

    def __init__(self, terms: Mapping[int | str, complex], register_size: int, prune: float = 0.0):
        if register_size < 0:
            raise ParameterError(f"register_size must be >= 0, got {register_size}")
        clean: dict[int, complex] = {}
        for key, c in terms.items():
            mask = string_to_mask(key) if isinstance(key, str) else int(key)
            if isinstance(key, str) and len(key) != register_size:
                raise DimensionError(f"string {key!r} does not have length {register_size}")
            if mask >> register_size:
                raise DimensionError(f"mask {mask:#x} does not fit {register_size} qubits")
            clean[mask] = clean.get(mask, 0.0) + complex(c)
        self._terms = MappingProxyType({m: c for m, c in clean.items() if abs(c) > prune})
        self.register_size = register_size

    @property
    def terms(self) -> Mapping[int, complex]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[str, complex]]:
        n = self.register_size
        for m in sorted(self._terms, key=lambda m: mask_to_string(m, n)):
            yield mask_to_string(m, n), self._terms[m]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IZSum):
            return NotImplemented
        return self.register_size == other.register_size and dict(self._terms) == dict(other._terms)

    def isclose(self, other: IZSum, atol: float = 1e-12) -> bool:
        if self.register_size != other.register_size:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= atol for k in keys)

    def coefficient(self, chars: str) -> complex:
        return self._terms.get(string_to_mask(chars), 0.0)

    def __add__(self, other: IZSum) -> IZSum:
        _same_register(self, other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0.0) + c
        return IZSum(out, self.register_size)

    def __sub__(self, other: IZSum) -> IZSum:
        return self + other.scaled(-1.0)

    def __mul__(self, other: IZSum) -> IZSum:
        return multiply(self, other)

    def scaled(self, factor: complex) -> IZSum:
        return IZSum({m: c * factor for m, c in self._terms.items()}, self.register_size)

    def diagonal(self) -> np.ndarray:
        """Brute-force diagonal over all ``2**n`` basis states."""
        n = self.register_size
        if n > 26:
            raise ParameterError(f"refusing to enumerate 2**{n} diagonal entries")
        idx = np.arange(2**n, dtype=np.int64)
        out = np.zeros(2**n, dtype=DTYPE)
        for m, c in self._terms.items():
            out += c * _parity_sign(idx & m)
        return out

    def evaluate(self, index: int) -> complex:
        return sum(c * (-1) ** bin(index & m).count("1") for m, c in self._terms.items())

    def dump(self) -> str:
        """One ``+a.bbbbe+xx+c.ddddi STRING`` line per term, sorted by string."""
        return "\n".join(f"{c.real:+.4e}{c.imag:+.4f}i {s}" for s, c in self)

    def __repr__(self) -> str:
        return f"IZSum(register_size={self.register_size}, n_terms={len(self)})"


def parse_dump(text: str) -> IZSum:
    """Inverse of :meth:`IZSum.dump` (to the printed precision)."""
    terms: dict[str, complex] = {}
    size = None
    for line in text.strip().splitlines():
        coeff, chars = line.split()
        cut = max(coeff.rfind("+", 1), coeff.rfind("-", 1))
        # skip the exponent sign of the real part
        while coeff[cut - 1] in "eE":
            cut = max(coeff.rfind("+", 1, cut), coeff.rfind("-", 1, cut))
        terms[chars] = complex(float(coeff[:cut]), float(coeff[cut:-1]))
        size = len(chars)
    if size is None:
        raise ParameterError("empty dump")
    return IZSum(terms, size)


def _parity_sign(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    parity = np.zeros_like(x)
    while np.any(x):
        parity ^= x & 1
        x >>= 1
    return 1 - 2 * parity


def _same_register(a: IZSum, b: IZSum) -> None:
    if a.register_size != b.register_size:
        raise DimensionError(f"register size mismatch: {a.register_size} != {b.register_size}")


def identity_sum(n: int, coeff: complex = 1.0) -> IZSum:
    return IZSum({0: coeff}, n)


def index_operator(n: int) -> IZSum:
    """Diagonal ``0, 1, ..., 2**n - 1`` as ``sum_q 2**(n-q-1) (I - Z_q)``."""
    if n <= 0:
        raise ParameterError(f"index operator needs n >= 1, got {n}")
    terms: dict[int, complex] = {0: (2**n - 1) / 2}
    for q in range(n):  # q = 0 is the most significant qubit
        terms[1 << (n - 1 - q)] = -(2 ** (n - q - 2))
    return IZSum(terms, n)


def affine(s: IZSum, scale: complex, shift: complex) -> IZSum:
    """``scale * s + shift * I``."""
    out = {m: c * scale for m, c in s.terms.items()}
    out[0] = out.get(0, 0.0) + shift
    return IZSum(out, s.register_size)


def multiply(a: IZSum, b: IZSum) -> IZSum:
    """Product expanded with ``Z**2 = I`` on each qubit."""
    _same_register(a, b)
    out: dict[int, complex] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            m = ma ^ mb
            out[m] = out.get(m, 0.0) + ca * cb
    return IZSum(out, a.register_size)


def power(s: IZSum, k: int) -> IZSum:
    if k < 0:
        raise ParameterError(f"power needs k >= 0, got {k}")
    out = identity_sum(s.register_size)
    base = s
    while k:
        if k & 1:
            out = multiply(out, base)
        k >>= 1
        if k:
            base = multiply(base, base)
    return out


def embed(s: IZSum, total: int, offset: int) -> IZSum:
    """Place ``s`` on qubits ``offset .. offset+n-1`` of a ``total``-qubit register."""
    n = s.register_size
    if offset < 0 or offset + n > total:
        raise DimensionError(f"cannot embed {n} qubits at {offset} into {total}")
    shift = total - offset - n
    return IZSum({m << shift: c for m, c in s.terms.items()}, total)


def reverse_strings(s: IZSum) -> IZSum:
    """Reverse the character order of every string (bit-reversal conjugation)."""
    n = s.register_size
    return IZSum({_reverse_mask(m, n): c for m, c in s.terms.items()}, n)


def sin_dispersion(n: int, eps_pauli: float = 0.0) -> IZSum:
    """IZ expansion of ``N sin(2 pi i / N)``, ``N = 2**n``, over basis index ``i``.

    Uses ``exp(2 pi i î / N) = prod_q exp(i b_q) (cos b_q I - i sin b_q Z_q)``
    with ``b_q = pi 2**-(q+1)`` for the 0-based qubit ``q``.  Strings are
    enumerated depth first; a branch is dropped once ``N`` times its partial
    magnitude falls below ``eps_pauli`` (every remaining factor has modulus at
    most one, so no kept term is lost).  Terms are kept when
    ``|coefficient| >= eps_pauli`` and above round-off.
    """
    if n < 1:
        raise ParameterError(f"sin_dispersion needs n >= 1, got {n}")
    if eps_pauli < 0:
        raise ParameterError(f"eps_pauli must be >= 0, got {eps_pauli}")
    big_n = float(2**n)
    b = [math.pi * 2.0 ** -(q + 1) for q in range(n)]
    cos_b = [math.cos(x) for x in b]
    sin_b = [math.sin(x) for x in b]
    phase = complex(math.cos(sum(b)), math.sin(sum(b)))
    floor = max(eps_pauli, 64 * np.finfo(float).eps * big_n)
    terms: dict[int, complex] = {}

    stack = [(0, 0, big_n * phase)]
    while stack:
        q, mask, partial = stack.pop()
        if abs(partial) < floor:
            continue
        if q == n:
            c = partial.imag
            if abs(c) >= floor:
                terms[mask] = c
            continue
        bit = 1 << (n - 1 - q)
        stack.append((q + 1, mask | bit, partial * (-1j * sin_b[q])))
        stack.append((q + 1, mask, partial * cos_b[q]))
    return IZSum(terms, n)


# ---------------------------------------------------------------------------
# compilation to MPOs


def string_mpo(mask: int, n: int, coeff: complex = 1.0) -> Mpo:
    """Bond-1 operator ``coeff * P`` for an IZ string."""
    cores = []
    for q in range(n):
        p = _PAULI["Z"] if (mask >> (n - 1 - q)) & 1 else _PAULI["I"]
        cores.append(p.reshape(1, 2, 2, 1))
    cores[0] = cores[0] * coeff
    return Mpo(cores)


def iz_sum_to_mpo(s: IZSum, opts: SvdOptions = EXACT) -> Mpo:
    """Diagonal Mpo of a sum, by compressed addition of the per-string Mpos."""
    n = s.register_size
    if len(s) == 0:
        return zero_mpo(n)
    return diagonal_part(mpo_sum([string_mpo(m, n, c) for m, c in s.terms.items()], opts))


def _factor_mpo(mask: int, n: int, a: complex, b: complex, time_pauli: str | None) -> Mpo:
    """``a * I + b * (sigma (x) P)`` as an Mpo with bond dimension at most 2."""
    ops = ([_PAULI[time_pauli]] if time_pauli else []) + [
        _PAULI["Z"] if (mask >> (n - 1 - q)) & 1 else _PAULI["I"] for q in range(n)
    ]
    total = len(ops)
    eye = _PAULI["I"]
    active = [k for k, p in enumerate(ops) if p is not eye and not np.array_equal(p, eye)]
    if not active:
        return identity_mpo(total).scale(a + b)
    lo, hi = active[0], active[-1]
    cores = []
    for k, p in enumerate(ops):
        if k < lo or k > hi:
            cores.append(eye.reshape(1, 2, 2, 1))
        elif lo == hi:
            cores.append((a * eye + b * p).reshape(1, 2, 2, 1))
        elif k == lo:
            c = np.zeros((1, 2, 2, 2), dtype=DTYPE)
            c[0, :, :, 0] = a * eye
            c[0, :, :, 1] = b * p
            cores.append(c)
        elif k == hi:
            c = np.zeros((2, 2, 2, 1), dtype=DTYPE)
            c[0, :, :, 0] = eye
            c[1, :, :, 0] = p
            cores.append(c)
        else:
            c = np.zeros((2, 2, 2, 2), dtype=DTYPE)
            c[0, :, :, 0] = eye
            c[1, :, :, 1] = p
            cores.append(c)
    return Mpo(cores)


def _diag_exp_factor(mask: int, n: int, c: complex) -> Mpo:
    """``exp(c P)`` for an IZ string ``P``, with bond dimension at most 2.

    The bond carries the parity of the ``Z`` bits seen so far and the last
    active core emits ``exp(+c)`` or ``exp(-c)``.  Unlike ``cosh I + sinh P``
    this never subtracts two large numbers, so ``exp(-|c|)`` survives.
    """
    active = [q for q in range(n) if (mask >> (n - 1 - q)) & 1]
    vals = np.exp(np.array([c, -c], dtype=DTYPE))
    eye = _PAULI["I"]
    cores = []
    for q in range(n):
        if q not in active:
            inside = active[0] < q < active[-1]
            cores.append(np.einsum("ab,oi->aoib", np.eye(2), eye) if inside else eye.reshape(1, 2, 2, 1))
            continue
        first, last = q == active[0], q == active[-1]
        core = np.zeros((1 if first else 2, 2, 2, 1 if last else 2), dtype=DTYPE)
        for p_in in range(core.shape[0]):
            for bit in (0, 1):
                p_out = p_in ^ bit
                if last:
                    core[p_in, bit, bit, 0] = vals[p_out]
                else:
                    core[p_in, bit, bit, p_out] = 1.0
        cores.append(core)
    return Mpo(cores)


def _exp_diagonal(s: IZSum, scale: complex, opts: SvdOptions) -> Mpo:
    """``exp(scale * s)`` for a diagonal sum, by scaling and squaring.

    Multiplying one factor per term directly lets partial sums of the
    exponent reach magnitudes far beyond the final one (for a narrow Gaussian
    they swing by hundreds), and relative truncation then wipes out entries
    that matter.  Dividing the exponent by ``2**m`` keeps every partial sum of
    order one; ``m`` squarings restore the full exponential.
    """
    n = s.register_size
    args = {m: complex(scale) * c for m, c in s.terms.items()}
    shift = args.pop(0, 0j)
    spread = sum(abs(a.real) for a in args.values())
    squarings = max(0, math.ceil(math.log2(spread))) if spread > 1 else 0
    div = 2.0**squarings
    # each squaring doubles the error, so work 4**m tighter and truncate once at the end
    inner = SvdOptions(opts.cutoff / 4.0**squarings)
    out = identity_mpo(n)
    for mask, a in sorted(args.items(), key=lambda kv: (-abs(kv[1]), kv[0])):
        out = mpo_mul(_diag_exp_factor(mask, n, a / div), out, inner)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            out = diagonal_part(mpo_mul(out, out, inner))
        scalar = np.exp(shift)
        out = diagonal_part(compress_mpo(out, opts).scale(scalar))
    if not (np.isfinite(scalar) and all(np.isfinite(c).all() for c in out.cores)):
        raise NumericalError("exponential overflowed; rescale the exponent")
    return out


def exp_iz_mpo(
    s: IZSum,
    scale: complex = 1.0,
    time_pauli: str | None = None,
    opts: SvdOptions = EXACT,
) -> Mpo:
    """Compile ``exp(scale * sum_m c_m sigma (x) P_m)`` into an Mpo.

    With ``time_pauli`` (one of ``"X"``, ``"Y"``, ``"Z"``) the result has an
    extra leading site carrying ``sigma`` and every term contributes a factor
    ``cosh(scale c_m) I + sinh(scale c_m) sigma (x) P_m``; the factors commute
    and are multiplied in order of descending ``|c_m|``.  Without it the
    operator is diagonal and is built by scaling and squaring.

    Raises:
        NumericalError: if the exponential overflows.
    """
    if time_pauli is not None and time_pauli not in ("X", "Y", "Z"):
        raise ParameterError(f"time_pauli must be X, Y or Z, got {time_pauli!r}")
    if time_pauli is None:
        return _exp_diagonal(s, scale, opts)
    n = s.register_size
    out = identity_mpo(n + 1)
    for mask, c in sorted(s.terms.items(), key=lambda kv: (-abs(kv[1]), kv[0])):
        arg = complex(scale) * c
        with np.errstate(over="ignore", invalid="ignore"):
            a, b = np.cosh(arg), np.sinh(arg)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise NumericalError(f"cosh/sinh overflow for coefficient {arg}; rescale the exponent")
        out = mpo_mul(_factor_mpo(mask, n, a, b, time_pauli), out, opts)
    return out
