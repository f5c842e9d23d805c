"""Partial signatures, Maslov-type indices and Morse-Sturm index theorems.

Exact rational arithmetic is the default; float inputs switch to a
tolerance-driven backend controlled by :func:`float_policy`.
"""
from .errors import (AmbiguousRank, EntirelySingular, M0TooSmall, MaslovKitError, NonIsolated,
                     NotStabilized, NotSymplectic, NotTransversal, OrderExceeded, RefinementExhausted)
from .forms_core import (Inertia, Subspace, SymForm, b_orthogonal, float_policy, inertia, kernel_basis,
                         negative_space, pullback, relative_dimension, relative_index, restrict)
from .partial_signatures import (PolyPath, SignatureTable, TaylorPath, affine_crossing, bk_form,
                                 eigencurve_signatures, jet_at, jump_decomposition,
                                 nilpotent_block_signatures, partial_signatures, pencil_crossing,
                                 spectral_flow, wk_space)
from .lagrangian_maslov import (AnalyticPath, LagrangianFrame, SampledPath, SymplecticSpace, chart,
                                intersection_dim, maslov_analytic, maslov_continuous)
from .multi_indices import (DoubledSpace, SymplecticPath, conley_zehnder, cz_comparison,
                            hormander_fourfold, kashiwara_triple, maslov_from_fourfold, pair_maslov,
                            pair_maslov_lifted, qbar)
from .morse_sturm import (JacobiFlow, MorseSturmProblem, conjugate_instants,
                          conjugate_partial_signatures, geodesic_maslov, integrate_flow,
                          morse_index_galerkin, spectral_index, verify_index_theorem)
from .polys import PolyMatrix

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRank",
    "AnalyticPath",
    "DoubledSpace",
    "EntirelySingular",
    "Inertia",
    "JacobiFlow",
    "LagrangianFrame",
    "M0TooSmall",
    "MaslovKitError",
    "MorseSturmProblem",
    "NonIsolated",
    "NotStabilized",
    "NotSymplectic",
    "NotTransversal",
    "OrderExceeded",
    "PolyMatrix",
    "PolyPath",
    "RefinementExhausted",
    "SampledPath",
    "SignatureTable",
    "Subspace",
    "SymForm",
    "SymplecticPath",
    "SymplecticSpace",
    "TaylorPath",
    "affine_crossing",
    "b_orthogonal",
    "bk_form",
    "chart",
    "conjugate_instants",
    "conjugate_partial_signatures",
    "conley_zehnder",
    "cz_comparison",
    "eigencurve_signatures",
    "float_policy",
    "geodesic_maslov",
    "hormander_fourfold",
    "inertia",
    "integrate_flow",
    "intersection_dim",
    "jet_at",
    "jump_decomposition",
    "kashiwara_triple",
    "kernel_basis",
    "maslov_analytic",
    "maslov_continuous",
    "maslov_from_fourfold",
    "morse_index_galerkin",
    "negative_space",
    "nilpotent_block_signatures",
    "pair_maslov",
    "pair_maslov_lifted",
    "partial_signatures",
    "pencil_crossing",
    "pullback",
    "qbar",
    "relative_dimension",
    "relative_index",
    "restrict",
    "spectral_flow",
    "spectral_index",
    "verify_index_theorem",
    "wk_space",
]
