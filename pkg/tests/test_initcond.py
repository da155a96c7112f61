from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import bits_of
from qtwave.errors import CapacityError, LayoutError, NumericalError, ParameterError
from qtwave.initcond import (
    FunctionSpec,
    _window,
    function_mpo,
    gaussian_mpo,
    initial_spinor,
    prep_operator,
    prepare_state,
    ricker1d_mpo,
    ricker2d_mpo,
    tapered_gaussian3d,
    tapered_gaussian_fields,
    zero_state,
)
from qtwave.registers import Layout, plus_state, spinor_assemble, spinor_project
from qtwave.tensor_core import SvdOptions
from qtwave.tt import apply_mpo, evaluate_amplitude, mpo_to_dense, mps_to_dense, zero_mpo

TIGHT = SvdOptions(1e-24)


def gauss(x, mu, s):
    return np.exp(-((x - mu) ** 2) / (2 * s**2))


def ricker1d(x, mu, s):
    return 2 / (math.sqrt(3 * s) * math.pi**0.25) * (1 - ((x - mu) / s) ** 2) * gauss(x, mu, s)


def ricker2d(x, y, mux, muy, s):
    r2 = (x - mux) ** 2 + (y - muy) ** 2
    return (1 - r2 / (2 * s**2)) * np.exp(-r2 / (2 * s**2)) / (math.pi * s**4)


def check_diagonal(op, expected):
    mat = mpo_to_dense(op)
    diag = np.diag(mat)
    off = mat - np.diag(diag)
    assert np.abs(off).max() <= 1e-12
    assert np.abs(diag - expected).max() <= 1e-9 * np.abs(expected).max()


@pytest.mark.parametrize("n", [1, 3, 5, 8])
def test_gaussian_diagonal(n):
    x = np.arange(2**n) / 2**n
    check_diagonal(gaussian_mpo(n, 0.3, 0.15, TIGHT), gauss(x, 0.3, 0.15))


@pytest.mark.parametrize("n,sigma", [(8, 0.03), (8, 0.05), (6, 0.03), (3, 0.06)])
def test_narrow_gaussian_keeps_accuracy(n, sigma):
    """Exponent terms of size hundreds must not destroy the small entries."""
    x = np.arange(2**n) / 2**n
    for mu in (0.0, 0.31, 0.5, 0.77):
        check_diagonal(gaussian_mpo(n, mu, sigma, TIGHT), gauss(x, mu, sigma))


@given(st.integers(2, 8), st.floats(0, 0.99), st.floats(0.02, 0.5))
@settings(max_examples=20, deadline=None)
def test_gaussian_diagonal_property(n, mu, sigma):
    x = np.arange(2**n) / 2**n
    check_diagonal(gaussian_mpo(n, mu, sigma, TIGHT), gauss(x, mu, sigma))


@pytest.mark.parametrize("n", [2, 6, 8])
def test_ricker1d_diagonal(n):
    x = np.arange(2**n) / 2**n
    check_diagonal(ricker1d_mpo(n, 0.5, 0.1, TIGHT), ricker1d(x, 0.5, 0.1))


@pytest.mark.parametrize("nx,ny", [(3, 3), (4, 4), (3, 5)])
def test_ricker2d_diagonal(nx, ny):
    lay = Layout((("x", nx), ("y", ny)))
    x = np.arange(2**nx) / 2**nx
    y = np.arange(2**ny) / 2**ny
    f = ricker2d(x[:, None], y[None, :], 0.5, 0.4, 0.1).reshape(-1)
    check_diagonal(ricker2d_mpo(lay, 0.5, 0.4, 0.1, TIGHT), f)


def test_ricker2d_encoder_bond_small():
    op = ricker2d_mpo(Layout.uniform(12, 2), 0.5, 0.5, 0.1)
    assert op.max_bond <= 16


def test_parameter_validation():
    with pytest.raises(ParameterError):
        gaussian_mpo(4, 0.5, 0.0)
    with pytest.raises(ParameterError):
        gaussian_mpo(4, 1.0, 0.1)
    with pytest.raises(ParameterError):
        FunctionSpec("square")
    with pytest.raises(ParameterError):
        FunctionSpec("gaussian", (0.5,), 0.1, alpha=0)
    with pytest.raises(ParameterError):
        FunctionSpec("gaussian", (0.2, 0.3)).centers(3)
    assert FunctionSpec("gaussian", 0.25).centers(3) == (0.25,) * 3
    with pytest.raises(LayoutError):
        ricker2d_mpo(Layout.uniform(3, 1), 0.5, 0.5, 0.1)
    with pytest.raises(LayoutError):
        tapered_gaussian3d(Layout.uniform(3, 2), 0.5, 0.1, 1.2)
    with pytest.raises(CapacityError):
        tapered_gaussian_fields(Layout.uniform(11, 3), 0.5, 0.1, 1.2)


@pytest.mark.parametrize("n", [1, 4, 8])
def test_prepare_state_pointwise(n):
    x = np.arange(2**n) / 2**n
    f = gauss(x, 0.6, 0.2)
    s = prepare_state(gaussian_mpo(n, 0.6, 0.2, TIGHT), opts=TIGHT)
    np.testing.assert_allclose(mps_to_dense(s), f, atol=1e-10)
    sn = prepare_state(gaussian_mpo(n, 0.6, 0.2, TIGHT), normalize=True, opts=TIGHT)
    np.testing.assert_allclose(mps_to_dense(sn) * np.linalg.norm(f), f, atol=1e-10)


def test_prepare_state_zero_function_raises():
    with pytest.raises(NumericalError):
        prepare_state(zero_mpo(3))


def test_prep_operator_dense_n3():
    n = 3
    x = np.arange(2**n) / 2**n
    f = gauss(x, 0.5, 0.2)
    mat = mpo_to_dense(prep_operator(gaussian_mpo(n, 0.5, 0.2, TIGHT)))
    expected = np.zeros((2 ** (n + 1),) * 2, dtype=complex)
    expected[: 2**n, : 2**n] = np.diag(f * math.sqrt(2) ** n)
    np.testing.assert_allclose(mat, expected, atol=1e-12)


def test_prep_operator_on_plus_state():
    n = 4
    enc = gaussian_mpo(n, 0.5, 0.2, TIGHT)
    psi = apply_mpo(prep_operator(enc), plus_state(Layout.uniform(n + 1, 1)))
    assert spinor_project(psi, 1).norm() == 0
    ref = prepare_state(enc, opts=TIGHT)
    for i in range(2**n):
        bits = bits_of(i, n)
        got = evaluate_amplitude(spinor_project(psi, 0), bits)
        assert abs(got * math.sqrt(2) - evaluate_amplitude(ref, bits)) < 1e-12


def test_initial_spinor_ricker_at_rest():
    lay = Layout.uniform(4, 2, True)
    psi = initial_spinor(FunctionSpec("ricker2d", (0.5, 0.5), 0.1), lay)
    assert abs(psi.norm() - 1) < 1e-12
    assert spinor_project(psi, 1).norm() < 1e-14
    x = np.arange(16) / 16
    f = ricker2d(x[:, None], x[None, :], 0.5, 0.5, 0.1).reshape(-1)
    np.testing.assert_allclose(mps_to_dense(spinor_project(psi, 0)), f / np.linalg.norm(f), atol=1e-10)


def test_initial_spinor_gaussian_separable():
    lay = Layout((("x", 3), ("y", 4)), True)
    psi = initial_spinor(FunctionSpec("gaussian", (0.25, 0.5), 0.2), lay)
    x, y = np.arange(8) / 8, np.arange(16) / 16
    f = (gauss(x, 0.25, 0.2)[:, None] * gauss(y, 0.5, 0.2)[None, :]).reshape(-1)
    np.testing.assert_allclose(mps_to_dense(spinor_project(psi, 0)), f / np.linalg.norm(f), atol=1e-10)


def test_function_mpo_zero_kind():
    assert np.all(mpo_to_dense(function_mpo(FunctionSpec("zero"), Layout.uniform(2, 1))) == 0)
    with pytest.raises(ParameterError):
        function_mpo(FunctionSpec("tapered_gaussian3d"), Layout.uniform(2, 3))


def test_window_shape():
    t = np.linspace(0, 0.999, 200)
    m = _window(t, 0.5, 1.2)
    assert abs(_window(np.array([0.5]), 0.5, 1.2)[0] - 1) < 1e-15
    assert np.all((m >= 0) & (m <= 1))
    np.testing.assert_allclose(m, _window(1.0 - t, 0.5, 1.2), atol=1e-12)
    u = np.pi * 0.2
    assert abs(_window(np.array([0.7]), 0.5, 1.2)[0] - math.cos(u) ** (u / 1.2)) < 1e-14


def _f_xy(n, mu, sigma):
    big = 2**n
    x = np.arange(big) / big
    u, v = np.meshgrid(x - mu, x - mu, indexing="ij")
    w = u + 1j * v
    r = np.abs(w)
    safe = np.where(r < 0.5 / big, 1.0, r)
    f = np.where(r < 0.5 / big, 0.0, sigma**2 * w / safe**2 * (np.exp(-(r**2) / (2 * sigma**2)) - 1))
    return x, u, v, f, np.exp(-(r**2) / (2 * sigma**2))


def test_tapered_fields_structure():
    n, mu, sigma, alpha = 5, 0.5, 0.1, 1.2
    lay = Layout.uniform(n, 3)
    psi0, psi1 = tapered_gaussian_fields(lay, mu, sigma, alpha)
    assert abs(np.linalg.norm(psi0) - 2**-0.5) < 1e-12
    assert abs(np.linalg.norm(psi1) - 2**-0.5) < 1e-12
    x, _, _, f, gxy = _f_xy(n, mu, sigma)
    m = _window(x, mu, alpha)
    taper = m[:, None] * m[None, :]
    gz = gauss(x, mu, sigma)
    dgz = -(x - mu) / sigma**2 * gz
    ref0 = (taper * gxy)[:, :, None] * gz[None, None, :]
    ref1 = (taper * f)[:, :, None] * dgz[None, None, :]
    np.testing.assert_allclose(psi0, ref0 / np.linalg.norm(ref0) / math.sqrt(2), atol=1e-13)
    np.testing.assert_allclose(psi1, ref1 / np.linalg.norm(ref1) / math.sqrt(2), atol=1e-13)
    # the grid contains (mu, mu), where the analytic limit 0 is used
    assert np.all(psi1[16, 16, :] == 0)
    assert np.all(np.isfinite(psi1))


@pytest.mark.parametrize("n", [6, 7])
def test_psi1_velocity_identity(n):
    """The transverse factor f satisfies div(Re f, Im f) = -g and curl = 0.

    The divergence carries a minus sign: for the radial field
    ``sigma**2 (e**(-r**2/2 sigma**2) - 1) / r`` it equals ``-g`` exactly.
    """
    mu, sigma = 0.5, 0.1
    _, u, v, f, g = _f_xy(n, mu, sigma)
    h = 2.0**-n

    def dx(a):
        return (np.roll(a, -1, 0) - np.roll(a, 1, 0)) / (2 * h)

    def dy(a):
        return (np.roll(a, -1, 1) - np.roll(a, 1, 1)) / (2 * h)

    inside = (np.abs(u) <= 3 * sigma) & (np.abs(v) <= 3 * sigma)
    div = dx(f.real) + dy(f.imag)
    curl = dy(f.real) - dx(f.imag)
    assert np.abs(curl)[inside].max() <= 0.05 * g.max()
    assert np.abs(div + g)[inside].max() <= 0.05 * g.max()
    # the opposite sign is far off, so the test does distinguish the two
    assert np.abs(div - g)[inside].max() > 1.5


def test_tapered_mps_matches_fields():
    lay = Layout.uniform(4, 3)
    p0, p1 = tapered_gaussian3d(lay, 0.5, 0.1, 1.2)
    d0, d1 = tapered_gaussian_fields(lay, 0.5, 0.1, 1.2)
    np.testing.assert_allclose(mps_to_dense(p0), d0.reshape(-1), atol=1e-7)
    np.testing.assert_allclose(mps_to_dense(p1), d1.reshape(-1), atol=1e-7)
    psi = initial_spinor(FunctionSpec("tapered_gaussian3d", (0.5,), 0.1, 1.2), Layout.uniform(4, 3, True))
    assert abs(psi.norm() - 1) < 1e-7
    with pytest.raises(ParameterError):
        initial_spinor(FunctionSpec("tapered_gaussian3d", (0.5, 0.4, 0.5)), Layout.uniform(3, 3, True))


def test_zero_state():
    z = zero_state(3)
    assert z.norm() == 0
    both = spinor_assemble(z, z)
    assert both.norm() == 0
