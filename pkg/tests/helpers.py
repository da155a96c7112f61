"""Shared builders and brute-force references for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from qtwave.tt import Mpo, Mps


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


def crandn(gen: np.random.Generator, *shape: int) -> np.ndarray:
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_mps(n: int, chi: int, seed: int = 0) -> Mps:
    gen = rng(seed)
    dims = [1] + [min(chi, 2 ** min(k, n - k)) for k in range(1, n)] + [1]
    return Mps(crandn(gen, dims[k], 2, dims[k + 1]) for k in range(n))


def random_mpo(n: int, chi: int, seed: int = 0) -> Mpo:
    gen = rng(seed)
    dims = [1] + [chi] * (n - 1) + [1]
    return Mpo(crandn(gen, dims[k], 2, 2, dims[k + 1]) for k in range(n))


def naive_contract(a: np.ndarray, b: np.ndarray, pairs) -> np.ndarray:
    """Explicit index loops; only for tiny tensors."""
    pa = [p % a.ndim for p, _ in pairs]
    pb = [q % b.ndim for _, q in pairs]
    free_a = [k for k in range(a.ndim) if k not in pa]
    free_b = [k for k in range(b.ndim) if k not in pb]
    out = np.zeros([a.shape[k] for k in free_a] + [b.shape[k] for k in free_b], dtype=complex)
    summed = [range(a.shape[k]) for k in pa]
    for fa in itertools.product(*[range(a.shape[k]) for k in free_a]):
        for fb in itertools.product(*[range(b.shape[k]) for k in free_b]):
            acc = 0j
            for s in itertools.product(*summed):
                ia = [0] * a.ndim
                ib = [0] * b.ndim
                for k, v in zip(free_a, fa):
                    ia[k] = v
                for k, v in zip(free_b, fb):
                    ib[k] = v
                for k, q, v in zip(pa, pb, s):
                    ia[k] = v
                    ib[q] = v
                acc += a[tuple(ia)] * b[tuple(ib)]
            out[fa + fb] = acc
    return out


def bits_of(i: int, n: int) -> list[int]:
    return [(i >> (n - 1 - q)) & 1 for q in range(n)]


def ghz(n: int) -> Mps:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    from qtwave.tt import dense_to_mps

    return dense_to_mps(v)
