from fractions import Fraction
from itertools import permutations

import numpy as np

from generators import rand_lagrangian, rotation_path
from maslovkit.forms_core import as_array
from maslovkit.lagrangian_maslov import AnalyticPath, LagrangianFrame, SymplecticSpace
from maslovkit.multi_indices import (
    SymplecticPath, conley_zehnder, cz_comparison, hormander_fourfold, kashiwara_triple,
    pair_maslov, qbar,
)
from maslovkit.polys import PolyMatrix

V = SymplecticSpace.standard(1)


def _line(a, b):
    return LagrangianFrame(V, as_array([[a], [b]]))


def test_triple_normalization_value():
    assert kashiwara_triple(_line(1, 0), _line(1, 1), _line(0, 1)) == 1


def test_triple_is_alternating():
    rng = np.random.default_rng(3)
    W = SymplecticSpace.standard(2)
    for _ in range(10):
        L = [rand_lagrangian(rng, W) for _ in range(3)]
        base = kashiwara_triple(*L)
        for p in permutations(range(3)):
            sign = 1 if p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
            assert kashiwara_triple(*(L[i] for i in p)) == sign * base


def test_triple_vanishes_with_repeated_argument():
    A, B = _line(1, 0), _line(2, 3)
    assert kashiwara_triple(A, A, B) == 0


def test_fourfold_antisymmetric_in_pairs():
    A, B, C, D = _line(1, 0), _line(1, 1), _line(0, 1), _line(1, -2)
    assert hormander_fourfold(A, B, C, D) == -hormander_fourfold(A, B, D, C)


def test_fourfold_connecting_paths_agree():
    rep = hormander_fourfold(_line(1, 0), _line(0, 1), _line(1, 0), _line(1, 3), detail=True)
    assert len(set(rep.values)) == 1 and rep.value == rep.values[0]


def test_qbar_closed_form_on_generic_triple():
    # generic lines in R^2: qbar = (tau + 3 - 1) / 2 with n = 1 and no intersections
    A, B, C = _line(1, 0), _line(1, 1), _line(0, 1)
    tau = kashiwara_triple(A, B, C)
    assert qbar(A, B, C) == Fraction(tau - 1, 2)


def test_pair_index_is_antisymmetric():
    g1 = AnalyticPath(V, PolyMatrix.from_entries([[[1]], [[0, 1]]]), (-1, 1))
    g2 = AnalyticPath(V, PolyMatrix.from_entries([[[1]], [[0, -1]]]), (-1, 1))
    assert pair_maslov(g1, g2) == -pair_maslov(g2, g1)


def test_full_rotation_conley_zehnder():
    ts = [Fraction(i, 40) for i in range(41)]
    phi = SymplecticPath.from_function(V, lambda s: rotation_path(s, [4]), ts)
    assert conley_zehnder(phi) == 2


def test_loop_comparison_cz_equals_minus_mu():
    ts = [Fraction(i, 40) for i in range(41)]
    phi = SymplecticPath.from_function(V, lambda s: rotation_path(s, [4]), ts)
    rep = cz_comparison(phi, _line(1, 0), _line(1, 2))
    assert rep.is_loop and rep.cz == -rep.mu and rep.holds and rep.holds_corrected


def test_fixed_point_at_start_needs_endpoint_correction():
    # identity at s = 0 then a quarter turn: Gr(Phi(0)) is the whole diagonal
    ts = [Fraction(i, 24) for i in range(25)]
    phi = SymplecticPath.from_function(V, lambda s: rotation_path(s, [1]), ts)
    rep = cz_comparison(phi, _line(1, 0), _line(1, 2))
    assert rep.fixed_dims == (2, 0)
    assert rep.holds_corrected
