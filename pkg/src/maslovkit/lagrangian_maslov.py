"""Lagrangian frames, charts and the L0-Maslov index of Lagrangian paths.

A Lagrangian is stored as a 2n x n frame F whose columns span it.  Given a
Lagrangian L1 transversal to L0, any L transversal to L1 is the graph of a
map T: L0 -> L1, and the chart value is the symmetric form  omega(T., .)  on
L0 written in the basis given by the columns of F0.  Writing
F = F0 A + F1 C this is

    M = A^{-T} C^T K,     K = F1^T Omega F0,

and ``A^T M A = C^T K A`` is a polynomial in t for polynomial frames, which
is what the analytic crossing code jets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (DimensionMismatch, EntirelySingular, InconsistentData, NotTransversal,
                     RefinementExhausted)
from .forms_core import (SymForm, as_array, det, frac, identity, inertia,
                         inverse, is_exact, like, nullspace, orth_complement, rank, span_equal, zeros)
from .partial_signatures import (CrossingRecord, TaylorPath, jump_decomposition,
                                 partial_signatures, DEFAULT_MAX_ORDER)
from .polys import PolyMatrix, count_distinct_roots, det_poly, real_roots

TRANSVERSAL_MARGIN = 1e-6
CANDIDATES_PER_SEGMENT = 32
MAX_REFINE_DEPTH = 24
FOLD_RATIO = 1.25


# ------------------------------------------------------------ spaces

class SymplecticSpace:
    """R^{2n} with the nondegenerate skew form x^T Omega y."""

    def __init__(self, omega, exact_kind=None):
        W = as_array(omega, exact_kind)
        m = W.shape[0]
        if W.ndim != 2 or W.shape != (m, m) or m % 2:
            raise DimensionMismatch("omega must be a square matrix of even size")
        if is_exact(W):
            if not np.array_equal(W.T, -W):
                raise ValueError("omega is not skew-symmetric")
            if det(W) == 0:
                raise ValueError("omega is degenerate")
        else:
            if np.abs(W + W.T).max() > 1e-12 * max(1.0, np.abs(W).max()):
                raise ValueError("omega is not skew-symmetric")
            if rank(W) < m:
                raise ValueError("omega is degenerate")
        self.omega = W

    @classmethod
    def standard(cls, n, exact_kind=True):
        """omega((v, a), (w, b)) = <v, b> - <a, w>."""
        I = identity(n, exact_kind)
        Z = zeros((n, n), exact_kind)
        return cls(np.block([[Z, I], [-I, Z]]))

    @classmethod
    def from_metric(cls, g):
        """omega_g((v1, v2), (w1, w2)) = g(v1, w2) - g(v2, w1)."""
        g = SymForm(g).mat
        Z = zeros(g.shape, is_exact(g))
        return cls(np.block([[Z, g], [-g, Z]]))

    @property
    def dim2n(self):
        return self.omega.shape[0]

    @property
    def n(self):
        return self.omega.shape[0] // 2

    @property
    def exact(self):
        return is_exact(self.omega)

    def negated(self):
        return SymplecticSpace(-self.omega)

    def direct_sum(self, other):
        a, b = self.omega, like(self.omega, other.omega)
        Z1 = zeros((a.shape[0], b.shape[1]), self.exact)
        return SymplecticSpace(np.block([[a, Z1], [Z1.T, b]]))

    def is_symplectic_map(self, Phi, tol=1e-9):
        Phi = like(self.omega, Phi)
        D = Phi.T @ self.omega @ Phi - self.omega
        if self.exact:
            return all(v == 0 for v in D.flat)
        return float(np.abs(D).max(initial=0.0)) <= tol

    def __repr__(self):
        return f"SymplecticSpace(dim={self.dim2n})"


class LagrangianFrame:
    """A Lagrangian subspace given by a full-rank isotropic 2n x n frame."""

    def __init__(self, space: SymplecticSpace, frame, check=True):
        F = like(space.omega, frame)
        if F.ndim == 1:
            F = F.reshape(-1, 1)
        if F.shape != (space.dim2n, space.n):
            raise DimensionMismatch(f"frame shape {F.shape} != ({space.dim2n}, {space.n})")
        if check:
            G = F.T @ space.omega @ F
            if space.exact:
                if any(v != 0 for v in G.flat):
                    raise ValueError("frame is not isotropic")
            else:
                scale = max(1.0, float(np.abs(F).max()) ** 2)
                if np.abs(G).max() > 1e-8 * scale:
                    raise ValueError("frame is not isotropic")
            if rank(F) != space.n:
                raise ValueError("frame does not have full rank")
        self.space = space
        self.frame = F

    def same_as(self, other) -> bool:
        return span_equal(self.frame, like(self.frame, _frame(other)))

    def image(self, Phi):
        """Phi(L) for a linear map Phi of the ambient space."""
        return LagrangianFrame(self.space, like(self.frame, Phi) @ self.frame)

    def as_dict(self):
        from .serialization import matrix_to_json
        return {"omega": matrix_to_json(self.space.omega), "frame": matrix_to_json(self.frame)}

    def __repr__(self):
        return f"LagrangianFrame({self.frame.tolist()!r})"


def _frame(L):
    return L.frame if isinstance(L, LagrangianFrame) else L


def _orthonormal(F):
    q, _ = np.linalg.qr(np.asarray(F, dtype=float))
    return q


def transversality_margin(F1, F2) -> float:
    """Smallest singular value of the concatenated orthonormalized frames."""
    M = np.hstack([_orthonormal(_frame(F1)), _orthonormal(_frame(F2))])
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def is_transversal(L1, L2, margin=TRANSVERSAL_MARGIN) -> bool:
    F1, F2 = _frame(L1), _frame(L2)
    if is_exact(F1) and is_exact(F2):
        return det(np.hstack([F1, F2])) != 0
    return transversality_margin(F1, F2) >= margin


def intersection_dim(L1, L2) -> int:
    F1, F2 = _frame(L1), _frame(L2)
    return F1.shape[1] + F2.shape[1] - rank(np.hstack([F1, like(F1, F2)]))


# ------------------------------------------------------------ charts

def _decompose(L0, L1, L):
    """(A, C) with F = F0 A + F1 C."""
    F0, F1, F = _frame(L0), _frame(L1), _frame(L)
    F1, F = like(F0, F1), like(F0, F)
    S = np.hstack([F0, F1])
    n = F0.shape[1]
    if is_exact(S):
        if det(S) == 0:
            raise NotTransversal("L0 and L1 intersect")
    elif transversality_margin(F0, F1) < TRANSVERSAL_MARGIN:
        raise NotTransversal("L0 and L1 are not transversal within tolerance")
    X = inverse(S) @ F
    return X[:n], X[n:]


def chart(L0: LagrangianFrame, L1: LagrangianFrame, L: LagrangianFrame) -> SymForm:
    """omega(T., .) on L0, where L is the graph of T: L0 -> L1."""
    A, C = _decompose(L0, L1, L)
    Om = L0.space.omega
    F0, F1 = L0.frame, like(L0.frame, _frame(L1))
    if is_exact(A):
        if det(A) == 0:
            raise NotTransversal("L meets L1")
    elif transversality_margin(_frame(L), F1) < TRANSVERSAL_MARGIN:
        raise NotTransversal("L is not transversal to L1 within tolerance")
    K = F1.T @ Om @ F0
    M = inverse(A).T @ C.T @ K
    form = SymForm(M)
    if form.exact:
        # the kernel of the chart is L cap L0
        if inertia(form).n_zero != intersection_dim(L0, L):
            raise InconsistentData("chart kernel differs from L cap L0")
    return form


def lagrangian_complement(L: LagrangianFrame) -> LagrangianFrame:
    """A Lagrangian transversal to L, built from its Euclidean complement."""
    F = L.frame
    Om = L.space.omega
    W = orth_complement(F)
    N = W.T @ Om @ F
    P = W.T @ Om @ W
    half = Fraction(1, 2) if is_exact(F) else 0.5
    X = -half * (inverse(N) @ P)
    return LagrangianFrame(L.space, W + F @ X)


def some_lagrangian(space: SymplecticSpace) -> LagrangianFrame:
    """A Lagrangian built greedily from standard basis vectors."""
    m, ex = space.dim2n, space.exact
    E = identity(m, ex)
    S = zeros((m, 0), ex)
    while S.shape[1] < space.n:
        perp = nullspace(S.T @ space.omega) if S.shape[1] else E
        for j in range(perp.shape[1]):
            v = perp[:, j:j + 1]
            if rank(np.hstack([S, v])) > S.shape[1]:
                S = np.hstack([S, v])
                break
    return LagrangianFrame(space, S)


def _random_symmetric(rng, n, exact_kind):
    if exact_kind:
        S = zeros((n, n), True)
        for i in range(n):
            for j in range(i, n):
                v = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
                S[i, j] = S[j, i] = v
        return S
    X = rng.standard_normal((n, n))
    return (X + X.T) / 2


def random_graph_lagrangian(Q: LagrangianFrame, rng, P: LagrangianFrame | None = None):
    """span(F_P + F_Q N^{-1} S), a random Lagrangian transversal to Q."""
    P = lagrangian_complement(Q) if P is None else P
    Om = Q.space.omega
    N = P.frame.T @ Om @ Q.frame
    S = _random_symmetric(rng, Q.space.n, Q.space.exact)
    return LagrangianFrame(Q.space, P.frame + Q.frame @ (inverse(N) @ S))


def transversal_lagrangian(space: SymplecticSpace, avoid: Sequence = (), rng=None,
                           margin=TRANSVERSAL_MARGIN, attempts=CANDIDATES_PER_SEGMENT,
                           randomize=False) -> LagrangianFrame:
    """A Lagrangian transversal to every Lagrangian in ``avoid``.

    The complement of ``avoid[0]`` is tried first unless ``randomize`` is set;
    then random graphs over it are drawn from ``rng``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    avoid = [a if isinstance(a, LagrangianFrame) else LagrangianFrame(space, a) for a in avoid]
    if not avoid:
        return some_lagrangian(space)
    Q = avoid[0]
    P = lagrangian_complement(Q)
    if not randomize and all(is_transversal(P, a, margin) for a in avoid[1:]):
        return P
    for _ in range(attempts):
        cand = random_graph_lagrangian(Q, rng, P)
        if all(is_transversal(cand, a, margin) for a in avoid[1:]):
            return cand
    raise RefinementExhausted(f"no transversal Lagrangian after {attempts} candidates")


# -------------------------------------------------------------- paths

class SampledPath:
    """Ordered samples (t_i, L_i); an optional provider t -> frame allows refinement."""

    def __init__(self, space: SymplecticSpace, times, frames, provider: Callable | None = None):
        if len(times) != len(frames) or len(times) < 1:
            raise ValueError("need matching, nonempty time and frame lists")
        ts = list(times)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample times must be strictly increasing")
        self.space = space
        self.times = ts
        self.frames = [f if isinstance(f, LagrangianFrame) else LagrangianFrame(space, f) for f in frames]
        self.provider = provider

    @classmethod
    def from_function(cls, space, f, times):
        """Sample ``f(t)`` (a frame matrix) and keep ``f`` as refinement provider."""
        return cls(space, times, [LagrangianFrame(space, f(t)) for t in times], provider=f)

    def __len__(self):
        return len(self.times)

    def sample(self, t):
        if self.provider is None:
            raise RefinementExhausted("raw sample list cannot be refined")
        return LagrangianFrame(self.space, self.provider(t))

    def restricted(self, lo, hi):
        keep = [i for i, t in enumerate(self.times) if lo <= t <= hi]
        return SampledPath(self.space, [self.times[i] for i in keep],
                           [self.frames[i] for i in keep], self.provider)

    def mapped(self, Phi_of_t):
        """Pointwise image t -> Phi(t) L(t)."""
        prov = None
        if self.provider is not None:
            p = self.provider
            prov = lambda t: like(self.space.omega, Phi_of_t(t)) @ like(self.space.omega, p(t))
        return SampledPath(self.space, self.times,
                           [L.image(Phi_of_t(t)) for t, L in zip(self.times, self.frames)], prov)


class AnalyticPath:
    """A polynomial frame F(t) on [a, b] spanning a Lagrangian for every t."""

    def __init__(self, space: SymplecticSpace, frame, interval=(0, 1)):
        if not space.exact:
            raise ValueError("analytic paths use the exact scalar kind")
        if not isinstance(frame, PolyMatrix):
            frame = PolyMatrix.from_entries(frame)
        if frame.shape != (space.dim2n, space.n):
            raise DimensionMismatch("frame polynomial has the wrong shape")
        iso = frame.T @ (PolyMatrix.constant(space.omega) @ frame)
        if not iso.is_zero():
            raise ValueError("frame is not isotropic identically in t")
        self.space = space
        self.poly = frame
        self.interval = (frac(interval[0]), frac(interval[1]))
        gram = det_poly(frame.T @ frame)
        if real_roots(gram, *self.interval):
            raise ValueError("frame loses rank inside the interval")

    def __call__(self, t) -> LagrangianFrame:
        return LagrangianFrame(self.space, self.poly(t), check=False)

    def restricted(self, a, b):
        return AnalyticPath(self.space, self.poly, (a, b))

    def sampled(self, count):
        """Uniform exact samples with the polynomial as provider."""
        a, b = self.interval
        ts = [a + (b - a) * Fraction(i, count - 1) for i in range(count)]
        return SampledPath(self.space, ts, [self(t) for t in ts], provider=lambda t: self.poly(frac(t)))


# --------------------------------------------------- continuous index

@dataclass
class SegmentRecord:
    t_start: object
    t_end: object
    chart_start: int
    chart_end: int
    chart: LagrangianFrame | None = None
    frame_start: LagrangianFrame | None = None
    frame_end: LagrangianFrame | None = None

    @property
    def contribution(self):
        return self.chart_end - self.chart_start


@dataclass
class MaslovResult:
    value: int
    segments: list = field(default_factory=list)
    crossings: list = field(default_factory=list)


def _chart_count(L0, L1, L, plain):
    inr = inertia(chart(L0, L1, L))
    return inr.n_plus if plain else inr.ext_coindex


def subspace_gap(L, M) -> float:
    """Spectral norm of the difference of the orthogonal projectors."""
    Q1, Q2 = _orthonormal(_frame(L)), _orthonormal(_frame(M))
    return float(np.linalg.norm(Q1 @ Q1.T - Q2 @ Q2.T, 2))


def _step_ok(L1, La, Lb, gap=None):
    """The short arc between two nearby samples stays transversal to L1."""
    gap = subspace_gap(La, Lb) if gap is None else gap
    return 2.0 * gap < min(transversality_margin(L1, La), transversality_margin(L1, Lb))


class _ChartSampler:
    """Random graph Lagrangians over a fixed complement of L0, scored in floats."""

    def __init__(self, L0: LagrangianFrame, rng):
        self.space = L0.space
        self.rng = rng
        P = lagrangian_complement(L0)
        Ninv = inverse(P.frame.T @ L0.space.omega @ L0.frame)
        self.P, self.Q, self.Ninv = P.frame, L0.frame, Ninv
        self.Pf, self.Qf = (np.asarray(x, dtype=float) for x in (P.frame, L0.frame))
        self.QNf = self.Qf @ np.asarray(Ninv, dtype=float)

    def draw(self):
        S = _random_symmetric(self.rng, self.space.n, self.space.exact)
        return S, self.Pf + self.QNf @ np.asarray(S, dtype=float)

    def build(self, S) -> LagrangianFrame:
        return LagrangianFrame(self.space, self.P + self.Q @ (self.Ninv @ S), check=False)


def _segment_chart(sampler: _ChartSampler, Fa, Fb):
    """Best of a batch of candidate charts for one step, or None."""
    gap = subspace_gap(Fa, Fb)
    best, best_m = None, -1.0
    for _ in range(CANDIDATES_PER_SEGMENT):
        S, Ff = sampler.draw()
        m = min(transversality_margin(Ff, Fa), transversality_margin(Ff, Fb))
        if m > best_m:
            best, best_m = S, m
        if 2.0 * gap < m and m > 0.1:
            break
    if best is None or not 2.0 * gap < best_m or best_m < TRANSVERSAL_MARGIN:
        return None
    return sampler.build(best)


def _resolve_folds(path, times, frames):
    """Subdivide steps on which the path is visibly longer than its chord.

    A coarse step can hide an excursion (up to an almost complete half-turn)
    whose ends are close again.  The polygonal length through the quarter
    points is compared with the gap between the ends; a step is accepted once
    the two agree up to FOLD_RATIO.  Only used with a provider.
    """
    i = 0
    span = [None] * len(times)
    while i < len(times) - 1:
        a, b = times[i], times[i + 1]
        if span[i] is None:
            span[i] = b - a
        if (b - a) * 2 ** MAX_REFINE_DEPTH < span[i]:
            i += 1
            continue
        ts = [a + (b - a) * k / 4 for k in (1, 2, 3)]
        Fs = [path.sample(t) for t in ts]
        chain = [frames[i]] + Fs + [frames[i + 1]]
        length = sum(subspace_gap(F, G) for F, G in zip(chain, chain[1:]))
        if length > FOLD_RATIO * subspace_gap(frames[i], frames[i + 1]) + 1e-6:
            times[i + 1:i + 1] = ts
            frames[i + 1:i + 1] = Fs
            span[i + 1:i + 1] = [span[i]] * 3
            continue
        i += 1


def maslov_continuous(path: SampledPath, L0: LagrangianFrame, seed: int = 0, plain: bool = False,
                      detail: bool = False):
    """mu_{L0} by chart bookkeeping over a partition with common transversals.

    Between consecutive samples the path is taken to be the short arc; a
    segment [t_i, t_j] is admissible for a chart L1 when every step in it is
    shorter (in projector gap) than half the transversality margin of its
    ends to L1.  Each segment contributes the change of the extended coindex
    (plain coindex with ``plain=True``) of the chart image between its ends.
    Steps that admit no chart are bisected through the provider if there is
    one; raw sample lists raise RefinementExhausted instead.  With a provider,
    steps along which the path is much longer than its chord are subdivided
    first.
    """
    sampler = _ChartSampler(L0, np.random.default_rng(seed))
    times = list(path.times)
    frames = list(path.frames)
    refine = path.provider is not None
    if refine:
        _resolve_folds(path, times, frames)
    total = 0
    segments = []
    i = 0
    depth = 0
    while i < len(times) - 1:
        L1 = _segment_chart(sampler, frames[i], frames[i + 1])
        if L1 is None:
            if not refine or depth >= MAX_REFINE_DEPTH:
                raise RefinementExhausted(f"no common transversal on [{times[i]}, {times[i + 1]}]")
            tm = (times[i] + times[i + 1]) / 2
            times.insert(i + 1, tm)
            frames.insert(i + 1, path.sample(tm))
            depth += 1
            continue
        depth = 0
        j = i + 1
        while j + 1 < len(times) and _step_ok(L1, frames[j], frames[j + 1]):
            j += 1
        a = _chart_count(L0, L1, frames[i], plain)
        b = _chart_count(L0, L1, frames[j], plain)
        segments.append(SegmentRecord(times[i], times[j], a, b, L1, frames[i], frames[j]))
        total += b - a
        i = j
    if detail:
        return MaslovResult(total, segments)
    return total


# ----------------------------------------------------- analytic index

def _chart_poly(path: AnalyticPath, L0, L1):
    """(A(t), C^T K A(t)) as polynomial matrices."""
    F0, F1 = L0.frame, L1.frame
    n = path.space.n
    S_inv = inverse(np.hstack([F0, F1]))
    X = PolyMatrix.constant(S_inv) @ path.poly
    A = PolyMatrix(X.coeffs[:, :n, :])
    C = PolyMatrix(X.coeffs[:, n:, :])
    K = F1.T @ path.space.omega @ F0
    return A, C.T @ (PolyMatrix.constant(K) @ A)


def _pick_chart(path, L0, point_frame, rng, bracket=None, exclude=None):
    """A Lagrangian L1 transversal to L0 and the path near the crossing."""
    avoid = [L0, point_frame] + ([exclude] if exclude is not None else [])
    for _ in range(CANDIDATES_PER_SEGMENT):
        L1 = transversal_lagrangian(path.space, avoid, rng)
        if exclude is not None and L1.same_as(exclude):
            avoid = avoid + [L1]
            continue
        A, B = _chart_poly(path, L0, L1)
        if bracket is not None:
            dA = det_poly(A)
            if count_distinct_roots(dA, bracket[0], bracket[1]) or \
                    all(c == 0 for c in dA):
                avoid = avoid + [L1]
                continue
        return L1, A, B
    raise RefinementExhausted("could not find a chart around the crossing")


def _crossing(path, L0, root, a, b, plain, rng, exclude=None):
    if root.rational:
        t0 = root.value
        L1, _, B = _pick_chart(path, L0, path(t0), rng, exclude=exclude)
        order = max(DEFAULT_MAX_ORDER, B.degree + 1)
        jet = B.taylor(t0, order)
        table = partial_signatures(TaylorPath(t0, jet, True))
        jr = jump_decomposition(table)
        if a == b:
            pos, c = "point", 0
        elif t0 == a:
            pos, c = "left", jr.coindex_right if plain else jr.sf_right
        elif t0 == b:
            pos, c = "right", jr.coindex_left if plain else jr.sf_left
        else:
            pos, c = "interior", jr.coindex_across if plain else jr.sf_across
        return CrossingRecord(t0, pos, c, table), L1
    lo, hi = root.lo, root.hi
    mid = (lo + hi) / 2
    L1, _, B = _pick_chart(path, L0, path(mid), rng, bracket=(lo, hi), exclude=exclude)
    ilo, ihi = inertia(SymForm(B(lo))), inertia(SymForm(B(hi)))
    c = (ihi.n_plus - ilo.n_plus) if plain else (ihi.ext_coindex - ilo.ext_coindex)
    return CrossingRecord((lo, hi), "interior", c, None), L1


def maslov_analytic(path: AnalyticPath, L0: LagrangianFrame, seed: int = 0, plain: bool = False,
                    detail: bool = False, verify: bool = True):
    """mu_{L0} as a sum of partial-signature contributions at the crossings.

    Interior crossings contribute the sum of odd partial signatures, a
    crossing at the left end minus the sum of the n^-_k, and one at the right
    end the sum of n^+_{odd} + n^-_{even}.  With ``verify`` each table is
    recomputed in a second, independently chosen chart and compared.
    """
    rng = np.random.default_rng(seed)
    L0 = L0 if isinstance(L0, LagrangianFrame) else LagrangianFrame(path.space, L0)
    a, b = path.interval
    D = PolyMatrix.constant(L0.frame).hstack(path.poly)
    d = det_poly(D)
    if all(c == 0 for c in d):
        raise EntirelySingular("the path lies inside the Maslov cycle of L0")
    roots = real_roots(d, a, b)
    crossings = []
    total = 0
    for r in roots:
        rec, L1 = _crossing(path, L0, r, a, b, plain, rng)
        if verify:
            rec2, _ = _crossing(path, L0, r, a, b, plain, rng, exclude=L1)
            same = rec.contribution == rec2.contribution and (
                rec.table is None or rec.table.key() == rec2.table.key())
            if not same:
                raise InconsistentData(f"crossing data at {rec.t0} depends on the chart")
        crossings.append(rec)
        total += rec.contribution
    if detail:
        return MaslovResult(total, crossings=crossings)
    return total
