import math

import numpy as np
import pytest

from maslovkit.errors import M0TooSmall
from maslovkit.morse_sturm import (
    MorseSturmProblem, conjugate_instants, geodesic_maslov, integrate_flow, morse_index_galerkin,
    spectral_index, verify_index_theorem,
)
from maslovkit.polys import PolyMatrix

PI = math.pi


def _sphere(c):
    return MorseSturmProblem(np.eye(2), -(c * PI) ** 2 * np.eye(2))


def test_flow_is_symplectic_and_matches_finite_differences():
    flow = integrate_flow(_sphere(1.3))
    assert flow.symplectic_defect() < 1e-9
    assert flow.fd_check() < 1e-5


def test_conjugate_instants_of_round_sphere():
    inst = conjugate_instants(_sphere(2.5))
    assert [round(t, 8) for t, _ in inst] == [0.4, 0.8]
    assert all(mult == 2 for _, mult in inst)


def test_flat_problem_has_no_index():
    rep = verify_index_theorem(MorseSturmProblem(np.eye(2), np.zeros((2, 2))), N=8)
    assert (rep.i_maslov, rep.i_morse, rep.i_spectral) == (0, 0, 0)
    assert rep.all_checks_pass


def test_index_theorem_with_conjugate_endpoint():
    rep = verify_index_theorem(_sphere(1.0), N=16)
    assert (rep.i_maslov, rep.i_morse, rep.i_spectral) == (2, 2, 2)
    assert rep.instants[-1].t0 == 1.0


def test_indefinite_metric():
    prob = MorseSturmProblem(np.diag([1.0, -1.0]), np.diag([0.0, -(1.5 * PI) ** 2]))
    rep = verify_index_theorem(prob, N=16)
    assert rep.holds and rep.i_maslov == -1
    assert any(c.table.sigma[0] < 0 for c in rep.instants)


def test_index_invariant_under_change_of_frame():
    prob = _sphere(1.7)
    T = np.array([[2.0, 1.0], [0.0, 1.0]])
    assert geodesic_maslov(prob.conjugated(T)) == geodesic_maslov(prob) == 2


def test_galerkin_and_spectral_agree_on_polynomial_curvature():
    R = PolyMatrix(np.array([[[-30.0, 0.0], [0.0, -5.0]], [[-20.0, 0.0], [0.0, 0.0]]]))
    prob = MorseSturmProblem(np.eye(2), R)
    assert morse_index_galerkin(prob, 16) == spectral_index(prob, 16) == geodesic_maslov(prob)


def test_rejects_small_shift():
    with pytest.raises(M0TooSmall):
        spectral_index(_sphere(1.5), 8, M0=1.0)


def test_round_trip_through_dict():
    prob = _sphere(0.5)
    again = MorseSturmProblem.from_dict(prob.as_dict())
    assert np.allclose(again.R_at(0.3), prob.R_at(0.3)) and np.allclose(again.g, prob.g)


def test_rejects_degenerate_metric():
    with pytest.raises(ValueError):
        MorseSturmProblem(np.diag([1.0, 0.0]), np.zeros((2, 2)))
