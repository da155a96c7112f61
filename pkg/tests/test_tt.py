from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import bits_of, crandn, ghz, random_mpo, random_mps, rng
from qtwave.errors import CapacityError, DimensionError
from qtwave.tensor_core import EXACT, SvdOptions
from qtwave.tt import (
    Mpo,
    Mps,
    apply_mpo,
    apply_mpo_exact,
    canonicalize,
    compress,
    dense_to_mpo,
    dense_to_mps,
    evaluate_amplitude,
    evaluate_amplitudes,
    identity_mpo,
    inner,
    max_bond,
    mpo_add,
    mpo_mul,
    mpo_sum,
    mpo_to_dense,
    mps_to_dense,
    product_mpo,
    product_state,
    spread_mpo,
    zero_mpo,
    zip_up,
)

Z = np.diag([1.0, -1.0])


def _is_left_iso(c):
    l, d, r = c.shape
    m = c.reshape(l * d, r)
    return np.abs(m.conj().T @ m - np.eye(r)).max() < 1e-10


def _is_right_iso(c):
    l, d, r = c.shape
    m = c.reshape(l, d * r)
    return np.abs(m @ m.conj().T - np.eye(l)).max() < 1e-10


# --- structures ------------------------------------------------------------


def test_mps_rejects_bad_cores():
    with pytest.raises(DimensionError):
        Mps([np.ones((1, 3, 1))])
    with pytest.raises(DimensionError):
        Mps([np.ones((1, 2, 2)), np.ones((3, 2, 1))])
    with pytest.raises(DimensionError):
        Mps([])


def test_cores_are_read_only():
    s = product_state("01")
    with pytest.raises(ValueError):
        s.cores[0][0, 0, 0] = 5


def test_max_bond_product_and_ghz():
    assert max_bond(product_state("0110")) == 1
    assert max_bond(ghz(6)) == 2


# --- canonical forms ---------------------------------------------------------


def test_canonicalize_product_state():
    s = product_state("0101")
    c = canonicalize(s, 1)
    assert c.orthogonality_center == 1 and c.max_bond == 1
    np.testing.assert_allclose(mps_to_dense(c), mps_to_dense(s), atol=1e-12)


@pytest.mark.parametrize("center", [0, 3, 7])
def test_canonicalize_isometries_and_amplitudes(center):
    s = random_mps(8, 6, seed=center)
    c = canonicalize(s, center)
    for i, core in enumerate(c.cores):
        if i < center:
            assert _is_left_iso(core)
        elif i > center:
            assert _is_right_iso(core)
    g = rng(11)
    for _ in range(16):
        b = g.integers(0, 2, 8)
        assert abs(evaluate_amplitude(c, b) - evaluate_amplitude(s, b)) < 1e-12 * max(1, s.norm())
    assert abs(np.linalg.norm(c.cores[center]) - s.norm()) < 1e-10 * s.norm()


def test_canonicalize_out_of_range():
    with pytest.raises(IndexError):
        canonicalize(product_state("00"), 2)


# --- compression --------------------------------------------------------------


def test_compress_product_state_unchanged():
    s = product_state("1101")
    out, disc = compress(s, SvdOptions(1e-3))
    assert disc == 0.0 and out.max_bond == 1
    np.testing.assert_allclose(mps_to_dense(out), mps_to_dense(s), atol=1e-14)


def test_compress_ghz_bonds():
    # pad GHZ with redundant bond dimension first
    s = ghz(8)
    doubled = Mps(
        [np.concatenate([c, c], axis=2) / np.sqrt(2) if i == 0 else c for i, c in enumerate(s.cores)][:1]
        + [np.concatenate([c, c], axis=0) / np.sqrt(2) if i == 1 else c for i, c in enumerate(s.cores)][1:]
    )
    out, _ = compress(doubled, SvdOptions(1e-12))
    assert out.bond_dims[1:-1] == [2] * 7


def test_compress_fidelity_random_state():
    s = random_mps(12, 8, seed=3)
    out, disc = compress(s, SvdOptions(1e-4))
    a, b = mps_to_dense(out), mps_to_dense(s)
    fid = abs(np.vdot(a, b)) ** 2 / np.vdot(b, b).real ** 2
    assert fid >= 1 - 2e-4
    assert np.linalg.norm(a - b) ** 2 <= disc * np.vdot(b, b).real + 1e-12
    assert 1 - out.norm() ** 2 / s.norm() ** 2 <= disc + 1e-12


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 8), chi=st.integers(1, 6), seed=st.integers(0, 1000))
def test_compress_cutoff_zero_is_gauge_only(n, chi, seed):
    s = random_mps(n, chi, seed)
    out, disc = compress(s, EXACT)
    ref = mps_to_dense(s)
    np.testing.assert_allclose(mps_to_dense(out), ref, atol=1e-12 * np.abs(ref).max())
    assert disc < 1e-20


# --- scalars ----------------------------------------------------------------


def test_inner_basics():
    s = random_mps(6, 4, seed=1)
    v = inner(s, s)
    assert abs(v.imag) < 1e-12 * abs(v) and v.real >= 0
    assert inner(product_state("00"), product_state("01")) == 0


def test_inner_matches_dense():
    a, b = random_mps(8, 5, 1), random_mps(8, 5, 2)
    assert abs(inner(a, b) - np.vdot(mps_to_dense(a), mps_to_dense(b))) < 1e-12 * a.norm() * b.norm()
    with pytest.raises(DimensionError):
        inner(a, random_mps(7, 2))


def test_evaluate_amplitude_product_state():
    s = product_state("0110")
    assert evaluate_amplitude(s, "0110") == 1
    for i in range(16):
        if i != 0b0110:
            assert evaluate_amplitude(s, bits_of(i, 4)) == 0
    with pytest.raises(DimensionError):
        evaluate_amplitude(s, "011")


def test_evaluate_amplitude_random_state():
    s = random_mps(10, 6, seed=4)
    dense = mps_to_dense(s)
    g = rng(5)
    idx = g.integers(0, 2**10, 100)
    bits = np.array([bits_of(int(i), 10) for i in idx])
    for i, b in zip(idx, bits):
        assert abs(evaluate_amplitude(s, b) - dense[i]) < 1e-12 * np.abs(dense).max()
    np.testing.assert_allclose(evaluate_amplitudes(s, bits), dense[idx], atol=1e-12 * np.abs(dense).max())


# --- operator application ----------------------------------------------------


def test_apply_identity():
    s = random_mps(6, 4, seed=8)
    out = apply_mpo(identity_mpo(6), s, SvdOptions(1e-14))
    np.testing.assert_allclose(mps_to_dense(out), mps_to_dense(s), atol=1e-12 * s.norm())


def test_apply_single_z():
    out = apply_mpo(product_mpo([Z]), product_state("1"))
    np.testing.assert_allclose(mps_to_dense(out), [0, -1])


def test_apply_random_matches_dense():
    o, s = random_mpo(10, 4, 1), random_mps(10, 4, 2)
    ref = mpo_to_dense(o) @ mps_to_dense(s)
    got = mps_to_dense(apply_mpo(o, s, SvdOptions(1e-14)))
    assert np.abs(got - ref).max() <= 1e-10 * np.abs(ref).max()
    exact = mps_to_dense(apply_mpo_exact(o, s))
    assert np.abs(exact - ref).max() <= 1e-12 * np.abs(ref).max()


def test_apply_relative_error_vs_cutoff():
    o, s = random_mpo(10, 3, 5), random_mps(10, 6, 6)
    ref = mpo_to_dense(o) @ mps_to_dense(s)
    cutoff = 1e-6
    got, disc = zip_up(o, s, SvdOptions(cutoff))
    err = np.linalg.norm(mps_to_dense(got) - ref) ** 2 / np.linalg.norm(ref) ** 2
    assert err <= 10 * cutoff
    assert got.orthogonality_center == 0 and _is_right_iso(got.cores[-1])


def test_apply_length_mismatch():
    with pytest.raises(DimensionError):
        apply_mpo(identity_mpo(3), product_state("00"))


def test_mpo_mul_identity_and_involution():
    a = random_mpo(5, 3, 9)
    np.testing.assert_allclose(mpo_to_dense(mpo_mul(a, identity_mpo(5))), mpo_to_dense(a), atol=1e-10)
    zz = mpo_mul(product_mpo([Z]), product_mpo([Z]))
    np.testing.assert_allclose(mpo_to_dense(zz), np.eye(2), atol=1e-14)


def test_mpo_mul_diagonals_multiply_pointwise():
    g = rng(12)
    f, h = g.standard_normal(8), g.standard_normal(8)
    prod = mpo_mul(dense_to_mpo(np.diag(f)), dense_to_mpo(np.diag(h)))
    np.testing.assert_allclose(mpo_to_dense(prod), np.diag(f * h), atol=1e-12)


def test_mpo_mul_order_and_dense():
    a, b = random_mpo(6, 3, 1), random_mpo(6, 3, 2)
    ref = mpo_to_dense(a) @ mpo_to_dense(b)
    got = mpo_to_dense(mpo_mul(a, b))
    assert np.abs(got - ref).max() <= 1e-10 * np.abs(ref).max()


def test_mpo_add():
    a, b = random_mpo(8, 3, 3), random_mpo(8, 2, 4)
    np.testing.assert_allclose(mpo_to_dense(mpo_add(a, zero_mpo(8))), mpo_to_dense(a), atol=1e-10)
    np.testing.assert_allclose(
        mpo_to_dense(mpo_add(product_mpo([np.eye(2)]), product_mpo([Z]))), np.diag([2, 0]), atol=1e-14
    )
    ref = mpo_to_dense(a) + mpo_to_dense(b)
    assert np.abs(mpo_to_dense(mpo_add(a, b)) - ref).max() <= 1e-10 * np.abs(ref).max()
    total = mpo_sum([a, b, a])
    assert np.abs(mpo_to_dense(total) - (ref + mpo_to_dense(a))).max() <= 1e-10 * np.abs(ref).max()


# --- dense bridges -------------------------------------------------------------


def test_dense_roundtrip():
    s = random_mps(9, 5, 3)
    v = mps_to_dense(s)
    np.testing.assert_allclose(mps_to_dense(dense_to_mps(v)), v, atol=1e-12 * np.abs(v).max())
    m = mpo_to_dense(random_mpo(4, 3, 1))
    np.testing.assert_allclose(mpo_to_dense(dense_to_mpo(m)), m, atol=1e-12 * np.abs(m).max())


def test_dense_budget():
    with pytest.raises(CapacityError):
        mps_to_dense(Mps([np.ones((1, 2, 1))] * 27))
    with pytest.raises(DimensionError):
        dense_to_mps(np.ones(3))


def test_spread_mpo_skips_registers():
    g = rng(2)
    op = dense_to_mpo(crandn(g, 4, 4))
    full = spread_mpo(op, [0, 2], 3)
    ref = np.einsum("acbd,ef->aecbfd", mpo_to_dense(op).reshape(2, 2, 2, 2), np.eye(2)).reshape(8, 8)
    np.testing.assert_allclose(mpo_to_dense(full), ref, atol=1e-12)
    with pytest.raises(DimensionError):
        spread_mpo(op, [2, 0], 3)
