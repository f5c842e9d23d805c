"""Pair, triple and four-fold Maslov indices and the Conley-Zehnder index."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EntirelySingular, InconsistentData, NotSymplectic
from .forms_core import SymForm, as_array, identity, inertia, inverse, is_exact, like, zeros
from .lagrangian_maslov import (AnalyticPath, LagrangianFrame, SampledPath, SymplecticSpace, intersection_dim,
                                _decompose, lagrangian_complement, maslov_analytic,
                                maslov_continuous, transversal_lagrangian)
from .polys import PolyMatrix


def _blockdiag(A, B):
    ex = is_exact(A)
    top = np.hstack([A, zeros((A.shape[0], B.shape[1]), ex)])
    bot = np.hstack([zeros((B.shape[0], A.shape[1]), ex), like(A, B)])
    return np.vstack([top, bot])


class DoubledSpace:
    """(V + V, omega + (-omega)) with its diagonal."""

    def __init__(self, base: SymplecticSpace):
        self.base = base
        self.doubled = base.direct_sum(base.negated())
        I = identity(base.dim2n, base.exact)
        self.diagonal = LagrangianFrame(self.doubled, np.vstack([I, I]))

    def embed(self, L1, L2) -> LagrangianFrame:
        F1 = L1.frame if isinstance(L1, LagrangianFrame) else as_array(L1, self.base.exact)
        F2 = L2.frame if isinstance(L2, LagrangianFrame) else as_array(L2, self.base.exact)
        return LagrangianFrame(self.doubled, _blockdiag(like(self.base.omega, F1), F2))

    def graph(self, Phi) -> LagrangianFrame:
        """Gr(Phi) = {(x, Phi x)}."""
        Phi = like(self.base.omega, Phi)
        return LagrangianFrame(self.doubled, np.vstack([identity(self.base.dim2n, self.base.exact), Phi]))


# ------------------------------------------------------------- pairs

def pair_maslov(g1, g2, seed: int = 0) -> int:
    """mu(g1, g2) as the diagonal Maslov index of the direct-sum path.

    Both paths are either analytic on the same interval or sampled at the
    same times.
    """
    D = DoubledSpace(g1.space)
    if isinstance(g1, AnalyticPath) and isinstance(g2, AnalyticPath):
        if g1.interval != g2.interval:
            raise ValueError("paths live on different intervals")
        P1, P2 = g1.poly, g2.poly
        d = max(P1.degree, P2.degree)
        m, n = g1.space.dim2n, g1.space.n
        C = zeros((d + 1, 2 * m, 2 * n))
        C[: P1.degree + 1, :m, :n] = P1.coeffs
        C[: P2.degree + 1, m:, n:] = P2.coeffs
        return maslov_analytic(AnalyticPath(D.doubled, PolyMatrix(C), g1.interval), D.diagonal, seed=seed)
    if list(g1.times) != list(g2.times):
        raise ValueError("sampled paths must share their sample times")
    prov = None
    if g1.provider is not None and g2.provider is not None:
        p1, p2 = g1.provider, g2.provider
        prov = lambda t: _blockdiag(like(g1.space.omega, p1(t)), like(g1.space.omega, p2(t)))
    frames = [D.embed(a, b) for a, b in zip(g1.frames, g2.frames)]
    return maslov_continuous(SampledPath(D.doubled, g1.times, frames, prov), D.diagonal, seed=seed)


def pair_maslov_lifted(g1: SampledPath, psi: Callable, L0: LagrangianFrame, seed: int = 0) -> int:
    """mu_{L0}(t -> psi(t)^{-1} g1(t)), where psi is a symplectic lifting with psi(t) L0 = g2(t)."""
    def inv_at(t):
        return inverse(like(g1.space.omega, psi(t)))
    return maslov_continuous(g1.mapped(inv_at), L0, seed=seed)


def constant_path(space, L, times) -> SampledPath:
    F = L.frame if isinstance(L, LagrangianFrame) else L
    return SampledPath(space, times, [LagrangianFrame(space, F)] * len(times), provider=lambda t: F)


# --------------------------------------------------- triple / four-fold

def kashiwara_form(L1, L2, L3):
    """Matrix of  omega(x1, x2) + omega(x2, x3) + omega(x3, x1)  on L1 + L2 + L3 (doubled)."""
    Om = L1.space.omega
    F1, F2, F3 = L1.frame, like(Om, L2.frame), like(Om, L3.frame)
    n = F1.shape[1]
    B = zeros((3 * n, 3 * n), is_exact(Om))
    B[:n, n:2 * n] = F1.T @ Om @ F2
    B[n:2 * n, 2 * n:] = F2.T @ Om @ F3
    B[2 * n:, :n] = F3.T @ Om @ F1
    return SymForm(B + B.T)


def kashiwara_triple(L1, L2, L3) -> int:
    """Signature of the Kashiwara form."""
    return inertia(kashiwara_form(L1, L2, L3)).signature


@dataclass
class FourfoldReport:
    value: int
    values: tuple       # one value per connecting path
    transversals: list  # the Lagrangians Q used to build each connecting path


def _exact_frame(L):
    if L.space.exact:
        return L
    raise ValueError("four-fold index needs exact Lagrangian frames")


def connecting_path(Lstart, Lend, Q) -> AnalyticPath:
    """Straight segment between Lstart and Lend written as graphs over a complement of Q."""
    P = lagrangian_complement(Q)
    space = Q.space
    N = P.frame.T @ space.omega @ Q.frame
    X = []
    for L in (Lstart, Lend):
        A, C = _decompose(P, Q, L)
        X.append(C @ inverse(A))
    # F(s) = F_P + F_Q ((1 - s) X0 + s X1), isotropic because N X is symmetric
    c0 = P.frame + Q.frame @ X[0]
    c1 = Q.frame @ (X[1] - X[0])
    for Xi in X:
        NX = N @ Xi
        if not np.array_equal(NX, NX.T):
            raise InconsistentData("graph map is not symmetric")
    return AnalyticPath(space, PolyMatrix(np.stack([c0, c1])), (0, 1))


def _path_index(path: AnalyticPath, L, seed):
    try:
        return maslov_analytic(path, L, seed=seed, verify=False)
    except EntirelySingular:
        # the whole segment meets L; fall back to chart bookkeeping on samples
        return maslov_continuous(path.sampled(17), L, seed=seed)


def hormander_fourfold(L0, L1, L0p, L1p, seed: int = 0, detail: bool = False):
    """q(L0, L1; L0', L1') = mu_{L1}(g) - mu_{L0}(g) for a path g from L0' to L1'.

    The value is computed along two connecting paths built over independent
    transversals and the two results must agree.
    """
    L0, L1, L0p, L1p = (_exact_frame(x) for x in (L0, L1, L0p, L1p))
    if L0.same_as(L1) or L0p.same_as(L1p):
        rep = FourfoldReport(0, (0,), [])
        return rep if detail else 0
    rng = np.random.default_rng(seed)
    space = L0.space
    vals, Qs = [], []
    avoid = [L0p, L1p]
    for _ in range(2):
        Q = transversal_lagrangian(space, avoid, rng, randomize=bool(Qs))
        g = connecting_path(L0p, L1p, Q)
        vals.append(_path_index(g, L1, seed) - _path_index(g, L0, seed))
        Qs.append(Q)
        avoid = avoid + [Q]
    if len(set(vals)) != 1:
        raise InconsistentData(f"four-fold index depends on the connecting path: {vals}")
    rep = FourfoldReport(vals[0], tuple(vals), Qs)
    return rep if detail else vals[0]


def qbar(L0, L1, L2, seed: int = 0) -> int:
    """q(L0, L1; L2, L0)."""
    return hormander_fourfold(L0, L1, L2, L0, seed=seed)


def maslov_from_fourfold(path: SampledPath, L0: LagrangianFrame, seed: int = 0, variant: str = "q") -> int:
    """Rebuild mu_{L0} from four-fold indices over a transversal partition.

    variant "q":    mu = -sum q(L0, L_i; g(t_{i-1}), g(t_i))
    variant "qbar": mu =  sum [qbar(L0, L_i, g(t_i)) - qbar(L0, L_i, g(t_{i-1}))]
    The partition and the L_i are the ones chosen by the chart bookkeeping.
    """
    res = maslov_continuous(path, L0, seed=seed, detail=True)
    total = 0
    for seg in res.segments:
        La, Lb, Li = seg.frame_start, seg.frame_end, seg.chart
        if variant == "q":
            total -= hormander_fourfold(L0, Li, La, Lb, seed=seed)
        elif variant == "qbar":
            total += qbar(L0, Li, Lb, seed=seed) - qbar(L0, Li, La, seed=seed)
        else:
            raise ValueError(f"unknown variant {variant!r}")
    return total


# ------------------------------------------------------ symplectic paths

class SymplecticPath:
    """Samples of Phi(t) in Sp(V, omega), optionally with a provider t -> Phi(t)."""

    def __init__(self, space: SymplecticSpace, times, mats, provider: Callable | None = None, tol=1e-9):
        mats = [like(space.omega, M) for M in mats]
        for t, M in zip(times, mats):
            if not space.is_symplectic_map(M, tol):
                raise NotSymplectic(f"Phi({t}) is not symplectic")
        self.space = space
        self.times = list(times)
        self.mats = mats
        self.provider = provider
        self.tol = tol

    @classmethod
    def from_function(cls, space, f, times, tol=1e-9):
        return cls(space, times, [f(t) for t in times], provider=f, tol=tol)

    def graph_path(self) -> SampledPath:
        D = DoubledSpace(self.space)
        prov = None
        if self.provider is not None:
            f = self.provider
            prov = lambda t: D.graph(f(t)).frame
        return SampledPath(D.doubled, self.times, [D.graph(M) for M in self.mats], prov)

    def orbit(self, ell0) -> SampledPath:
        """t -> Phi(t) ell0."""
        F = ell0.frame
        prov = None
        if self.provider is not None:
            f = self.provider
            prov = lambda t: like(F, f(t)) @ F
        return SampledPath(self.space, self.times, [LagrangianFrame(self.space, M @ F) for M in self.mats], prov)


def conley_zehnder(phi: SymplecticPath, seed: int = 0) -> int:
    """Diagonal Maslov index of the graph path t -> Gr(Phi(t))."""
    D = DoubledSpace(phi.space)
    return maslov_continuous(phi.graph_path(), D.diagonal, seed=seed)


@dataclass
class ComparisonReport:
    cz: int
    mu: int
    q: int
    is_loop: bool
    fixed_dims: tuple = (0, 0)    # dim(Gr Phi(a) cap Delta), dim(Gr Phi(b) cap Delta)

    @property
    def holds(self):
        """cz + mu = q, and cz = -mu for loops."""
        return self.cz + self.mu == self.q and (not self.is_loop or self.cz == -self.mu)

    @property
    def endpoint_shift(self):
        return self.fixed_dims[1] - self.fixed_dims[0]

    @property
    def holds_corrected(self):
        """cz + mu = q + dim(Gr Phi(b) cap Delta) - dim(Gr Phi(a) cap Delta)."""
        return self.cz + self.mu == self.q + self.endpoint_shift


def cz_comparison(phi: SymplecticPath, L0, ell0, seed: int = 0) -> ComparisonReport:
    """cz(Phi) + mu_{L0}(Phi ell0) against q(Delta, L0+ell0; Gr(Phi(a)^-1), Gr(Phi(b)^-1)).

    With the extended-coindex convention the two sides differ by the change
    of dim(Gr Phi cap Delta) between the endpoints; both forms are reported.
    """
    D = DoubledSpace(phi.space)
    cz = conley_zehnder(phi, seed)
    mu = maslov_continuous(phi.orbit(ell0), L0, seed=seed)
    Pa, Pb = phi.mats[0], phi.mats[-1]
    q = hormander_fourfold(D.diagonal, D.embed(L0, ell0), D.graph(inverse(Pa)), D.graph(inverse(Pb)), seed=seed)
    loop = np.array_equal(Pa, Pb) if is_exact(Pa) else bool(np.allclose(Pa, Pb))
    dims = tuple(intersection_dim(D.diagonal, D.graph(P)) for P in (Pa, Pb))
    return ComparisonReport(cz, mu, q, loop, dims)
