from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import bits_of, random_mps, rng
from qtwave.errors import DimensionError, LayoutError
from qtwave.registers import (
    Layout,
    index_to_coord,
    indices_to_bits,
    plus_state,
    register_span,
    spinor_assemble,
    spinor_project,
)
from qtwave.tt import evaluate_amplitude, mps_to_dense, zero_mpo
from qtwave.initcond import zero_state


def test_layout_validation():
    with pytest.raises(LayoutError):
        Layout(())
    with pytest.raises(LayoutError):
        Layout((("y", 2), ("x", 2)))
    with pytest.raises(LayoutError):
        Layout((("x", 0),))
    with pytest.raises(LayoutError):
        Layout((("w", 2),))
    lay = Layout((("x", 3), ("y", 2), ("z", 4)), has_time_qubit=True)
    assert lay.n_total == 10 and lay.shape == (8, 4, 16)
    assert Layout.from_json(lay.to_json()) == lay


@given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.booleans())
def test_spans_partition_sites(qubits, time):
    lay = Layout(tuple(zip("xyz", qubits)), time)
    covered = [s for a in lay.labels for s in register_span(lay, a)]
    assert covered == list(range(int(time), lay.n_total))


def test_missing_axis():
    with pytest.raises(LayoutError):
        Layout.uniform(3, 1).register_span("y")


def test_coordinates():
    lay = Layout.uniform(4, 1)
    assert index_to_coord(lay, [8])[0] == 0.5
    assert index_to_coord(lay, [0])[0] == 0.0
    assert index_to_coord(lay, [15])[0] == 1 - 1 / 16
    assert index_to_coord(lay, [16 + 3])[0] == index_to_coord(lay, [3])[0]
    with pytest.raises(DimensionError):
        index_to_coord(lay, [1, 2])


def test_indices_to_bits():
    lay = Layout((("x", 3), ("y", 2)))
    bits = indices_to_bits(lay, np.array([[5, 2]]))
    assert bits.tolist() == [[1, 0, 1, 1, 0]]


def test_plus_state():
    np.testing.assert_allclose(mps_to_dense(plus_state(Layout.uniform(1, 1))), [2**-0.5] * 2)
    s = plus_state(Layout((("x", 2), ("y", 2))))
    np.testing.assert_allclose(mps_to_dense(s), 0.25)
    assert s.max_bond == 1 and abs(s.norm() - 1) < 1e-15
    with pytest.raises(LayoutError):
        plus_state(Layout.uniform(2, 1, True))


def test_assemble_and_project_round_trip():
    a, b = random_mps(6, 4, 1), random_mps(6, 3, 2)
    psi = spinor_assemble(a, b)
    assert psi.n_sites == 7
    np.testing.assert_allclose(mps_to_dense(spinor_project(psi, 0)), mps_to_dense(a), atol=1e-12)
    np.testing.assert_allclose(mps_to_dense(spinor_project(psi, 1)), mps_to_dense(b), atol=1e-12)
    assert abs(psi.norm() ** 2 - a.norm() ** 2 - b.norm() ** 2) < 1e-10 * psi.norm() ** 2
    g = rng(3)
    for _ in range(50):
        t, i = int(g.integers(0, 2)), int(g.integers(0, 64))
        ref = evaluate_amplitude(a if t == 0 else b, bits_of(i, 6))
        assert abs(evaluate_amplitude(psi, [t] + bits_of(i, 6)) - ref) < 1e-12


def test_assemble_with_zero_component():
    a = random_mps(4, 2, 5)
    psi = spinor_assemble(a, zero_state(4))
    assert spinor_project(psi, 1).norm() == 0
    np.testing.assert_allclose(mps_to_dense(spinor_project(psi, 0)), mps_to_dense(a), atol=1e-14)


def test_assemble_and_project_errors():
    with pytest.raises(DimensionError):
        spinor_assemble(random_mps(3, 2), random_mps(4, 2))
    psi = spinor_assemble(random_mps(3, 2), random_mps(3, 2))
    with pytest.raises(LayoutError):
        spinor_project(psi, 2)
    with pytest.raises(LayoutError):
        spinor_project(psi, 0, Layout.uniform(3, 1))
    with pytest.raises(LayoutError):
        spinor_project(random_mps(1, 1), 0)
