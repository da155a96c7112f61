"""Matrix product states and operators over qubit chains.

Index conventions
-----------------
* Site 0 is the leftmost (most significant) qubit.  Dense vectors produced by
  :func:`mps_to_dense` are indexed by the integer whose binary digits are the
  site values read left to right.
* MPS cores have shape ``(chi_left, 2, chi_right)``.
* MPO cores have shape ``(b_left, 2, 2, b_right)`` with the first physical
  index the output (row) and the second the input (column).

All public functions return new objects; cores are stored read-only.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, NumericalError, ParameterError
from .tensor_core import DTYPE, EXACT, SvdOptions, truncated_svd

# dense bridging limits (total qubits)
DENSE_MPS_QUBITS = 26
DENSE_MPO_QUBITS = 13


def _freeze(core: np.ndarray) -> np.ndarray:
    core = np.ascontiguousarray(core, dtype=DTYPE)
    core.flags.writeable = False
    return core


class Mps:
    """Tensor train of rank-3 cores ``(chi_l, 2, chi_r)``."""

    __slots__ = ("cores", "orthogonality_center")

    def __init__(self, cores: Iterable[np.ndarray], orthogonality_center: int | None = None):
        cores = tuple(_freeze(c) for c in cores)
        if not cores:
            raise DimensionError("an Mps needs at least one site")
        for i, c in enumerate(cores):
            if c.ndim != 3 or c.shape[1] != 2:
                raise DimensionError(f"Mps core {i} has shape {c.shape}, expected (chi, 2, chi')")
        _check_bonds(cores)
        self.cores = cores
        self.orthogonality_center = orthogonality_center

    def __len__(self) -> int:
        return len(self.cores)

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def bond_dims(self) -> list[int]:
        return [c.shape[0] for c in self.cores] + [self.cores[-1].shape[2]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def norm(self) -> float:
        return float(np.sqrt(max(inner(self, self).real, 0.0)))

    def scale(self, factor: complex) -> Mps:
        """Multiply the state by ``factor`` (applied to the center core if any)."""
        site = self.orthogonality_center if self.orthogonality_center is not None else 0
        cores = list(self.cores)
        cores[site] = cores[site] * factor
        return Mps(cores, self.orthogonality_center)

    def normalized(self) -> Mps:
        nrm = self.norm()
        if nrm == 0.0:
            raise NumericalError("cannot normalize a zero-norm state")
        return self.scale(1.0 / nrm)

    def to_dense(self) -> np.ndarray:
        return mps_to_dense(self)

    def __repr__(self) -> str:
        return f"Mps(n_sites={self.n_sites}, bond_dims={self.bond_dims})"


class Mpo:
    """Tensor train of rank-4 cores ``(b_l, 2, 2, b_r)``."""

    __slots__ = ("cores",)

    def __init__(self, cores: Iterable[np.ndarray]):
        cores = tuple(_freeze(c) for c in cores)
        if not cores:
            raise DimensionError("an Mpo needs at least one site")
        for i, c in enumerate(cores):
            if c.ndim != 4 or c.shape[1:3] != (2, 2):
                raise DimensionError(f"Mpo core {i} has shape {c.shape}, expected (b, 2, 2, b')")
        _check_bonds(cores)
        self.cores = cores

    def __len__(self) -> int:
        return len(self.cores)

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def bond_dims(self) -> list[int]:
        return [c.shape[0] for c in self.cores] + [self.cores[-1].shape[-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def dagger(self) -> Mpo:
        return Mpo(c.transpose(0, 2, 1, 3).conj() for c in self.cores)

    def scale(self, factor: complex) -> Mpo:
        cores = list(self.cores)
        cores[0] = cores[0] * factor
        return Mpo(cores)

    def to_dense(self) -> np.ndarray:
        return mpo_to_dense(self)

    def diagonal(self) -> np.ndarray:
        """Dense diagonal, contracted without forming the full matrix."""
        return mps_to_dense(mpo_diagonal_mps(self))

    def __repr__(self) -> str:
        return f"Mpo(n_sites={self.n_sites}, bond_dims={self.bond_dims})"


def _check_bonds(cores: Sequence[np.ndarray]) -> None:
    if cores[0].shape[0] != 1 or cores[-1].shape[-1] != 1:
        raise DimensionError("boundary bond dimensions must be 1")
    for i in range(len(cores) - 1):
        if cores[i].shape[-1] != cores[i + 1].shape[0]:
            raise DimensionError(
                f"bond {i}|{i + 1} mismatch: {cores[i].shape[-1]} != {cores[i + 1].shape[0]}"
            )


def _same_length(a, b) -> None:
    if len(a) != len(b):
        raise DimensionError(f"site count mismatch: {len(a)} != {len(b)}")


def max_bond(x: Mps | Mpo) -> int:
    return x.max_bond


# ---------------------------------------------------------------------------
# constructors


def product_state(bits: Sequence[int] | str) -> Mps:
    """Computational basis state ``|bits>``."""
    cores = []
    for b in bits:
        c = np.zeros((1, 2, 1), dtype=DTYPE)
        c[0, int(b), 0] = 1.0
        cores.append(c)
    return Mps(cores)


def product_mps(vectors: Sequence[np.ndarray]) -> Mps:
    """Product state from one length-2 vector per site."""
    return Mps(np.asarray(v, dtype=DTYPE).reshape(1, 2, 1) for v in vectors)


def identity_mpo(n_sites: int) -> Mpo:
    eye = np.eye(2, dtype=DTYPE).reshape(1, 2, 2, 1)
    return Mpo([eye] * n_sites)


def zero_mpo(n_sites: int) -> Mpo:
    z = np.zeros((1, 2, 2, 1), dtype=DTYPE)
    return Mpo([z] * n_sites)


def product_mpo(matrices: Sequence[np.ndarray]) -> Mpo:
    """Bond-1 operator ``m_0 (x) m_1 (x) ...``."""
    return Mpo(np.asarray(m, dtype=DTYPE).reshape(1, 2, 2, 1) for m in matrices)


def concat_mpo(*parts: Mpo) -> Mpo:
    """Tensor product of operators on consecutive site blocks."""
    cores: list[np.ndarray] = []
    for p in parts:
        cores.extend(p.cores)
    return Mpo(cores)


def concat_mps(*parts: Mps) -> Mps:
    cores: list[np.ndarray] = []
    for p in parts:
        cores.extend(p.cores)
    return Mps(cores)


def embed_mpo(op: Mpo, n_sites: int, start: int) -> Mpo:
    """Pad ``op`` with identity cores so it acts on sites ``start..start+len(op)-1``."""
    if start < 0 or start + len(op) > n_sites:
        raise DimensionError(f"cannot embed {len(op)} sites at {start} into a chain of {n_sites}")
    eye = np.eye(2, dtype=DTYPE).reshape(1, 2, 2, 1)
    return Mpo([eye] * start + list(op.cores) + [eye] * (n_sites - start - len(op)))


# ---------------------------------------------------------------------------
# dense bridging


def _contract_chain(cores: Sequence[np.ndarray]) -> np.ndarray:
    out = cores[0]
    for c in cores[1:]:
        out = np.tensordot(out, c, axes=(-1, 0))
    return out


def mps_to_dense(s: Mps) -> np.ndarray:
    """State vector of length ``2**n_sites``."""
    if s.n_sites > DENSE_MPS_QUBITS:
        raise CapacityError(f"dense state of {s.n_sites} qubits exceeds budget {DENSE_MPS_QUBITS}")
    return _contract_chain(s.cores).reshape(-1)


def mpo_to_dense(o: Mpo) -> np.ndarray:
    """Operator matrix of shape ``(2**n, 2**n)``; rows are outputs."""
    n = o.n_sites
    if n > DENSE_MPO_QUBITS:
        raise CapacityError(f"dense operator on {n} qubits exceeds budget {DENSE_MPO_QUBITS}")
    t = _contract_chain(o.cores).reshape((2, 2) * n)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return t.transpose(perm).reshape(2**n, 2**n)


def mpo_diagonal_mps(o: Mpo) -> Mps:
    """Train whose amplitudes are the diagonal entries of ``o``."""
    return Mps(np.einsum("aiib->aib", c) for c in o.cores)


def _split_dense(t: np.ndarray, n: int, d: int, opts: SvdOptions) -> list[np.ndarray]:
    cores = []
    rest = t.reshape(1, -1)
    for _ in range(n - 1):
        left = rest.shape[0]
        mat = rest.reshape(left * d, -1)
        u, s, vh, _ = truncated_svd(mat, opts)
        cores.append(u.reshape(left, d, -1))
        rest = s[:, None] * vh
    cores.append(rest.reshape(rest.shape[0], d, 1))
    return cores


def dense_to_mps(vec: np.ndarray, opts: SvdOptions = EXACT) -> Mps:
    """Split a length-``2**n`` vector into an Mps by successive SVDs."""
    vec = np.asarray(vec, dtype=DTYPE).reshape(-1)
    n = int(round(np.log2(vec.size)))
    if 2**n != vec.size:
        raise DimensionError(f"vector length {vec.size} is not a power of two")
    if n > DENSE_MPS_QUBITS:
        raise CapacityError(f"dense state of {n} qubits exceeds budget {DENSE_MPS_QUBITS}")
    if n == 0:
        raise DimensionError("need at least one qubit")
    return Mps(_split_dense(vec, n, 2, opts), orthogonality_center=n - 1)


def dense_to_mpo(mat: np.ndarray, opts: SvdOptions = EXACT) -> Mpo:
    mat = np.asarray(mat, dtype=DTYPE)
    n = int(round(np.log2(mat.shape[0])))
    if mat.shape != (2**n, 2**n):
        raise DimensionError(f"matrix shape {mat.shape} is not (2^n, 2^n)")
    if n > DENSE_MPO_QUBITS:
        raise CapacityError(f"dense operator on {n} qubits exceeds budget {DENSE_MPO_QUBITS}")
    t = mat.reshape((2,) * (2 * n))
    perm = [k for q in range(n) for k in (q, n + q)]
    t = t.transpose(perm)
    cores = _split_dense(t, n, 4, opts)
    return Mpo(c.reshape(c.shape[0], 2, 2, c.shape[-1]) for c in cores)


# ---------------------------------------------------------------------------
# gauge and compression (generic over physical dimension)


def _left_orthonormalize(cores: list[np.ndarray], upto: int) -> None:
    """QR sweep making cores ``[0, upto)`` left isometries, in place."""
    for i in range(upto):
        c = cores[i]
        l, d, r = c.shape
        q, rr = np.linalg.qr(c.reshape(l * d, r))
        cores[i] = q.reshape(l, d, -1)
        cores[i + 1] = np.tensordot(rr, cores[i + 1], axes=(1, 0))


def _right_orthonormalize(cores: list[np.ndarray], downto: int) -> None:
    """LQ sweep making cores ``(downto, end]`` right isometries, in place."""
    for i in range(len(cores) - 1, downto, -1):
        c = cores[i]
        l, d, r = c.shape
        q, rr = np.linalg.qr(c.reshape(l, d * r).T)
        cores[i] = q.T.reshape(-1, d, r)
        cores[i - 1] = np.tensordot(cores[i - 1], rr.T, axes=(-1, 0))


def _truncate_right_to_left(cores: list[np.ndarray], opts: SvdOptions) -> float:
    """Truncating SVD sweep on a left-canonical train; returns summed discarded weight."""
    total = 0.0
    for i in range(len(cores) - 1, 0, -1):
        c = cores[i]
        l, d, r = c.shape
        u, s, vh, disc = truncated_svd(c.reshape(l, d * r), opts)
        total += disc
        cores[i] = vh.reshape(-1, d, r)
        cores[i - 1] = np.tensordot(cores[i - 1], u * s[None, :], axes=(-1, 0))
    return total


def _compress_cores(cores: list[np.ndarray], opts: SvdOptions) -> float:
    _left_orthonormalize(cores, len(cores) - 1)
    return _truncate_right_to_left(cores, opts)


def canonicalize(s: Mps, center: int) -> Mps:
    """Gauge-equivalent Mps with orthogonality center at site ``center`` (0-based).

    Raises:
        IndexError: if ``center`` is outside ``[0, n_sites)``.
    """
    if not (0 <= center < s.n_sites):
        raise IndexError(f"center {center} out of range for {s.n_sites} sites")
    cores = list(s.cores)
    _left_orthonormalize(cores, center)
    _right_orthonormalize(cores, center)
    return Mps(cores, orthogonality_center=center)


def compress(s: Mps, opts: SvdOptions) -> tuple[Mps, float]:
    """Truncate every bond; returns the new Mps (center 0) and the summed discarded weight."""
    cores = list(s.cores)
    disc = _compress_cores(cores, opts)
    return Mps(cores, orthogonality_center=0), disc


def compress_mpo(o: Mpo, opts: SvdOptions) -> Mpo:
    cores = [c.reshape(c.shape[0], 4, c.shape[-1]) for c in o.cores]
    _compress_cores(cores, opts)
    return Mpo(c.reshape(c.shape[0], 2, 2, c.shape[-1]) for c in cores)


# ---------------------------------------------------------------------------
# scalars


def inner(a: Mps, b: Mps) -> complex:
    """``<a|b>`` with ``a`` conjugated."""
    _same_length(a, b)
    env = np.ones((1, 1), dtype=DTYPE)
    for ca, cb in zip(a.cores, b.cores):
        env = np.tensordot(env, cb, axes=(1, 0))  # (la, d, rb)
        env = np.tensordot(ca.conj(), env, axes=([0, 1], [0, 1]))  # (ra, rb)
    return complex(env[0, 0])


def evaluate_amplitude(s: Mps, bits: Sequence[int] | str) -> complex:
    """``<bits|s>`` by contracting the selected slices left to right."""
    if len(bits) != s.n_sites:
        raise DimensionError(f"bitstring length {len(bits)} != site count {s.n_sites}")
    v = np.ones(1, dtype=DTYPE)
    for c, b in zip(s.cores, bits):
        v = v @ c[:, int(b), :]
    return complex(v[0])


def evaluate_amplitudes(s: Mps, bits: np.ndarray) -> np.ndarray:
    """Vectorised :func:`evaluate_amplitude` for an ``(m, n_sites)`` array of bits."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 2 or bits.shape[1] != s.n_sites:
        raise DimensionError(f"bits must have shape (m, {s.n_sites}), got {bits.shape}")
    v = np.ones((bits.shape[0], 1), dtype=DTYPE)
    for i, c in enumerate(s.cores):
        sel = c.transpose(1, 0, 2)[bits[:, i]]  # (m, l, r)
        v = np.einsum("ml,mlr->mr", v, sel)
    return v[:, 0]


# ---------------------------------------------------------------------------
# operator application


def apply_mpo(o: Mpo, s: Mps, opts: SvdOptions = EXACT) -> Mps:
    """Compressed ``o|s>``; see :func:`zip_up`."""
    return zip_up(o, s, opts)[0]


def zip_up(o: Mpo, s: Mps, opts: SvdOptions = EXACT) -> tuple[Mps, float]:
    """Compressed ``o|s>`` by the zip-up algorithm, with the discarded weight.

    A left-to-right sweep contracts one site at a time and splits off an
    isometry by SVD (at a tenth of the requested cutoff); a right-to-left
    sweep then truncates at ``opts``.  The result has its orthogonality center
    at site 0, which is the gauge the next zip-up prefers.
    """
    _same_length(o, s)
    zip_opts = SvdOptions(cutoff=opts.cutoff * 0.1, max_rank=None if opts.max_rank is None else 2 * opts.max_rank)
    n = s.n_sites
    carry = np.ones((1, 1, 1), dtype=DTYPE)  # (chi_new, b, chi)
    cores: list[np.ndarray] = []
    for i in range(n):
        w = o.cores[i]
        m = s.cores[i]
        t = np.tensordot(carry, m, axes=(2, 0))  # (chi_new, b, in, chi')
        t = np.tensordot(t, w, axes=([1, 2], [0, 2]))  # (chi_new, chi', out, b')
        t = t.transpose(0, 2, 3, 1)  # (chi_new, out, b', chi')
        cn, _, bb, cc = t.shape
        if i == n - 1:
            cores.append(t.reshape(cn, 2, bb * cc))
            break
        u, sv, vh, _ = truncated_svd(t.reshape(cn * 2, bb * cc), zip_opts)
        cores.append(u.reshape(cn, 2, -1))
        carry = (sv[:, None] * vh).reshape(-1, bb, cc)
    disc = _truncate_right_to_left(cores, opts)
    return Mps(cores, orthogonality_center=0), disc


def apply_mpo_exact(o: Mpo, s: Mps) -> Mps:
    """Uncompressed ``o|s>``; bond dimensions multiply."""
    _same_length(o, s)
    cores = []
    for w, m in zip(o.cores, s.cores):
        t = np.einsum("aoib,cid->acobd", w, m)
        a, c, _, b, d = t.shape
        cores.append(t.reshape(a * c, 2, b * d))
    return Mps(cores)


def mpo_mul(a: Mpo, b: Mpo, opts: SvdOptions = EXACT) -> Mpo:
    """Compressed operator product ``a @ b`` (``b`` acts first)."""
    _same_length(a, b)
    cores = []
    for wa, wb in zip(a.cores, b.cores):
        t = np.einsum("aomb,cmid->acoibd", wa, wb)
        al, cl, _, _, br, dr = t.shape
        cores.append(t.reshape(al * cl, 2, 2, br * dr))
    return compress_mpo(Mpo(cores), opts)


def diagonal_part(o: Mpo) -> Mpo:
    """Keep only the ``out == in`` entries of every core.

    For a product of cores this is exactly the diagonal of the full operator,
    so it strips round-off that SVD compression leaves off the diagonal.
    """
    mask = np.eye(2, dtype=bool)[None, :, :, None]
    return Mpo([np.where(mask, c, 0) for c in o.cores])


def mpo_add(a: Mpo, b: Mpo, opts: SvdOptions = EXACT) -> Mpo:
    """Compressed ``a + b`` via block direct sum of the cores."""
    _same_length(a, b)
    n = a.n_sites
    if n == 1:
        return Mpo([a.cores[0] + b.cores[0]])
    cores = []
    for i, (wa, wb) in enumerate(zip(a.cores, b.cores)):
        la, _, _, ra = wa.shape
        lb, _, _, rb = wb.shape
        if i == 0:
            c = np.concatenate([wa, wb], axis=3)
        elif i == n - 1:
            c = np.concatenate([wa, wb], axis=0)
        else:
            c = np.zeros((la + lb, 2, 2, ra + rb), dtype=DTYPE)
            c[:la, :, :, :ra] = wa
            c[la:, :, :, ra:] = wb
        cores.append(c)
    return compress_mpo(Mpo(cores), opts)


def mpo_sum(terms: Sequence[Mpo], opts: SvdOptions = EXACT) -> Mpo:
    """Sum of many operators by balanced pairwise :func:`mpo_add`."""
    if not terms:
        raise ParameterError("mpo_sum needs at least one term")
    items = list(terms)
    while len(items) > 1:
        nxt = [mpo_add(items[k], items[k + 1], opts) for k in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def spread_mpo(op: Mpo, sites: Sequence[int], n_sites: int) -> Mpo:
    """Place the cores of ``op`` on increasing chain ``sites``; identities elsewhere.

    Bonds of ``op`` are carried through the identity cores in between, so an
    operator on the time qubit and one spatial register can skip the others.
    """
    if len(sites) != len(op) or list(sites) != sorted(set(sites)):
        raise DimensionError("sites must be increasing and match the operator length")
    if sites[0] < 0 or sites[-1] >= n_sites:
        raise DimensionError(f"sites {sites[0]}..{sites[-1]} outside a chain of {n_sites}")
    eye = np.eye(2, dtype=DTYPE)
    cores = []
    k = 0
    bond = 1
    for pos in range(n_sites):
        if k < len(sites) and sites[k] == pos:
            c = op.cores[k]
            bond = c.shape[-1]
            k += 1
        else:
            c = np.einsum("ab,oi->aoib", np.eye(bond, dtype=DTYPE), eye)
        cores.append(c)
    return Mpo(cores)
