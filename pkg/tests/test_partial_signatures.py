from fractions import Fraction

import numpy as np
import pytest

from maslovkit.errors import NonIsolated, NotAnEigenvalue, NotGSymmetric
from maslovkit.forms_core import as_array
from maslovkit.partial_signatures import (
    PolyPath, TaylorPath, affine_crossing, eigencurve_signatures, jet_at, jump_decomposition,
    nilpotent_block_signatures, partial_signatures, pencil_crossing, spectral_flow,
)
from maslovkit.polys import PolyMatrix


def _poly(entries):
    return PolyPath(PolyMatrix.from_entries(entries), (Fraction(-1, 2), Fraction(1, 2)))


def test_off_diagonal_linear_coupling():
    # [[1, t], [t, t^3]]: kernel direction e2 first becomes negative at order 2
    P = _poly([[[1], [0, 1]], [[0, 1], [0, 0, 0, 1]]])
    table = partial_signatures(jet_at(P, 0))
    assert table.sigma == (0, -1)
    assert all(table.invariant_checks().values())


def test_quadratic_coupling_reaches_order_three():
    P = _poly([[[1], [0, 0, 1]], [[0, 0, 1], [0, 0, 0, 1]]])
    table = partial_signatures(jet_at(P, 0))
    assert table.sigma == (0, 0, 1)
    jr = jump_decomposition(table)
    assert jr.sf_across == table.odd_sigma_sum() == 1


def test_transversal_crossing_is_first_order():
    table = partial_signatures(TaylorPath(0, [as_array([[0]]), as_array([[1]])]))
    assert table.sigma == (1,)
    jr = jump_decomposition(table)
    assert (jr.sf_left, jr.sf_right, jr.sf_across) == (1, 0, 1)
    assert (jr.coindex_left, jr.coindex_right, jr.coindex_across) == (0, 1, 1)


def test_nondegenerate_point_has_empty_table():
    table = partial_signatures(TaylorPath(0, [as_array([[2]]), as_array([[1]])]))
    assert table.n0 == 0 and table.sigma == ()


def test_degenerate_jet_raises_non_isolated():
    with pytest.raises(NonIsolated):
        partial_signatures(TaylorPath(0, [as_array([[0]]), as_array([[0]])]))


def test_spectral_flow_matches_crossing_sum():
    P = _poly([[[0, 1], [0]], [[0], [0, 0, -1]]])
    rep = spectral_flow(P, detail=True)
    assert rep.consistent
    assert rep.value == sum(c.contribution for c in rep.crossings)


def test_spectral_flow_irrational_root():
    # t^2 - 1/8 has irrational roots in [-1/2, 1/2]
    P = _poly([[[Fraction(-1, 8), 0, 1]]])
    assert spectral_flow(P) == 0


def test_eigencurve_table_orders():
    table = eigencurve_signatures([[0, 0, 1], [0, -1], [3]], np.eye(3, dtype=int))
    assert table.n0 == 2
    assert table.sigma == (-1, 1)


def test_nilpotent_block_worked_instance():
    rep = nilpotent_block_signatures(as_array([[0, 1], [1, 0]]), as_array([[0, 1], [0, 0]]))
    assert rep.all_hold
    assert rep.sign_relation == ["zero", "opposite"]


def test_affine_crossing_both_signs_of_lambda0():
    A, K = as_array([[1, 0], [0, -1]]), as_array([[1, 0], [0, 0]])
    rep = affine_crossing(A, K, -1)
    assert rep.consistent
    rep = affine_crossing(as_array([[-1, 0], [0, 1]]), K, 1)
    assert rep.consistent


def test_affine_crossing_rejects_non_eigenvalue():
    with pytest.raises(NotAnEigenvalue):
        affine_crossing(as_array([[1]]), as_array([[1]]), 2)


def test_pencil_crossing_consistent():
    g = as_array([[1, 0], [0, -1]])
    T = as_array([[0, 0], [0, 0]])
    assert pencil_crossing(g, T).consistent


def test_pencil_rejects_non_g_symmetric():
    with pytest.raises(NotGSymmetric):
        pencil_crossing(as_array([[1, 0], [0, 1]]), as_array([[0, 1], [0, 0]]))
