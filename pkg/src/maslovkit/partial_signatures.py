"""Partial signatures of analytic paths of symmetric forms at an isolated degeneracy.

A path is handled through its jet  L(t0 + s) = L_0 + L_1 s + ... + L_m s^m.
A generalized Jordan chain (u_0, ..., u_k) solves the triangular system

    sum_{j=0}^{r} L_{r-j} u_j = 0,   r = 0, ..., k.

W_k is the space of u_0 that start a chain of length k, and on W_k

    B_k(u_0, v_0) = sum_{j=0}^{k-1} <L_{k-j} u_j, v_0>.

The inertia of the B_k decomposes the jump of the (extended) coindex of the
path across t0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (InconsistentData, NonIsolated, NotAnEigenvalue, NotGSymmetric,
                     NotNilpotent, OrderExceeded, DimensionMismatch)
from .forms_core import (Inertia, SymForm, Subspace, as_array, canonical_basis, colspace, frac, identity, inertia,
                         inverse, is_exact, kernel_basis, like, nullspace, restrict, solve,
                         span_equal, zeros, det)
from .polys import PolyMatrix, det_poly, real_roots

DEFAULT_MAX_ORDER = 8


# ----------------------------------------------------------------- types

class TaylorPath:
    """Jet of a symmetric-form path at t0: coefficient matrices L_0..L_m."""

    def __init__(self, t0, coeffs, exact_kind=None):
        if len(coeffs) < 2:
            raise ValueError("a jet needs at least L_0 and L_1")
        mats = [SymForm(c, exact_kind).mat for c in coeffs]
        kinds = {is_exact(m) for m in mats}
        if len(kinds) != 1:
            mats = [as_array(m, True) for m in mats]
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise DimensionMismatch("jet coefficients differ in size")
        self.t0 = frac(t0) if is_exact(mats[0]) else float(t0)
        self.coeffs = mats

    @property
    def dim(self):
        return self.coeffs[0].shape[0]

    @property
    def max_order(self):
        return len(self.coeffs) - 1

    @property
    def exact(self):
        return is_exact(self.coeffs[0])

    def L(self, k):
        if k > self.max_order:
            raise OrderExceeded(f"jet order {self.max_order} < requested {k}")
        return self.coeffs[k]


class PolyPath:
    """Polynomial path of symmetric matrices on an interval [a, b]."""

    def __init__(self, poly, interval=(Fraction(-1), Fraction(1))):
        if not isinstance(poly, PolyMatrix):
            poly = PolyMatrix.from_entries(poly)
        if poly.shape[0] != poly.shape[1] or not poly.is_symmetric():
            raise ValueError("polynomial path must be square and symmetric")
        self.poly = poly
        a, b = frac(interval[0]), frac(interval[1])
        if a > b:
            raise ValueError("interval endpoints out of order")
        self.interval = (a, b)

    @property
    def dim(self):
        return self.poly.shape[0]

    def __call__(self, t):
        return self.poly(t)


def jet_at(path: PolyPath, t0, order=DEFAULT_MAX_ORDER, exact_kind=True) -> TaylorPath:
    """Exact Taylor coefficients of the polynomial path at t0."""
    t0 = frac(t0)
    a, b = path.interval
    if not a <= t0 <= b:
        raise ValueError(f"t0={t0} outside [{a}, {b}]")
    L = path.poly.taylor(t0, max(order, 1))
    if not exact_kind:
        L = [m.astype(float) for m in L]
    return TaylorPath(t0, L, exact_kind)


@dataclass
class ChainExtension:
    extendible: bool
    next_vector: np.ndarray | None
    obstruction: np.ndarray | None


@dataclass
class SignatureLevel:
    k: int
    space: Subspace
    form: SymForm
    inertia: Inertia


@dataclass
class SignatureTable:
    """Per-order data: dim W_k and the inertia of B_k, k = 1..k_max."""
    n0: int
    levels: list = field(default_factory=list)
    w_dims: list = field(default_factory=list)   # dim W_1 .. dim W_{k_max+1}
    t0: object = None

    @property
    def k_max(self):
        return len(self.levels)

    @property
    def sigma(self):
        return tuple(l.inertia.signature for l in self.levels)

    def n_plus(self, k):
        return self.levels[k - 1].inertia.n_plus if k <= self.k_max else 0

    def n_minus(self, k):
        return self.levels[k - 1].inertia.n_minus if k <= self.k_max else 0

    def key(self):
        """Comparable summary: (dim W_k, n+, n-, n0) per order plus the terminal dimension."""
        return (tuple((l.space.dim, l.inertia.n_plus, l.inertia.n_minus, l.inertia.n_zero)
                      for l in self.levels), tuple(self.w_dims))

    def odd_sigma_sum(self):
        return sum(l.inertia.signature for l in self.levels if l.k % 2 == 1)

    def invariant_checks(self):
        """The two structural identities every table must satisfy."""
        checks = {}
        checks["dim W_(k+1) = n0(B_k)"] = all(
            self.w_dims[i + 1] == self.levels[i].inertia.n_zero for i in range(self.k_max))
        checks["sum (n+_k + n-_k) = dim Ker L_0"] = (
            sum(l.inertia.n_plus + l.inertia.n_minus for l in self.levels) == self.n0)
        checks["dim W_1 = dim Ker L_0"] = (self.w_dims[0] if self.w_dims else 0) == self.n0
        return checks

    def as_dict(self):
        return {
            "t0": None if self.t0 is None else str(self.t0),
            "n0": self.n0,
            "k_max": self.k_max,
            "w_dims": list(self.w_dims),
            "levels": [{"k": l.k, "dim_W": l.space.dim, **l.inertia.as_dict()} for l in self.levels],
            "sigma": list(self.sigma),
        }


@dataclass(frozen=True)
class JumpRecord:
    sf_left: int        # ext coindex at t0 minus ext coindex at t0 - eps
    sf_right: int       # ext coindex at t0 + eps minus ext coindex at t0
    sf_across: int
    coindex_left: int   # same with the plain coindex n+
    coindex_right: int
    coindex_across: int

    def as_dict(self):
        return dict(self.__dict__)


# ------------------------------------------------------- chain machinery

def _block_system(path: TaylorPath, k: int, offset: int = 0):
    """Block lower-triangular Toeplitz matrix with blocks L_{r-j}, r, j < k."""
    n = path.dim
    S = zeros((n * k, n * k), path.exact)
    for r in range(k):
        for j in range(r + 1):
            S[r * n:(r + 1) * n, j * n:(j + 1) * n] = path.L(r - j)
    return S


def _check_chain(path, chain):
    n = path.dim
    for r in range(len(chain)):
        acc = zeros(n, path.exact)
        for j in range(r + 1):
            acc = acc + path.L(r - j) @ chain[j]
        if path.exact:
            if any(v != 0 for v in acc):
                raise InconsistentData(f"chain equation {r} violated")
        elif np.abs(acc.astype(float)).max() > 1e-7 * max(1.0, np.abs(np.hstack(chain)).max()):
            raise InconsistentData(f"chain equation {r} violated")


def chain_extend(path: TaylorPath, chain) -> ChainExtension:
    """Try to append u_{k+1} to a valid chain (u_0..u_k); minimum-norm pick."""
    chain = [like(path.coeffs[0], c) for c in chain]
    k = len(chain) - 1
    if k + 1 > path.max_order:
        raise OrderExceeded(f"extending to length {k + 2} needs L_{k + 1}")
    _check_chain(path, chain)
    rhs = zeros(path.dim, path.exact)
    for j in range(k + 1):
        rhs = rhs + path.L(k + 1 - j) @ chain[j]
    x = solve(path.L(0), -rhs)
    if x is not None:
        return ChainExtension(True, x, None)
    K = kernel_basis(path.L(0)).basis
    # the image of a symmetric L_0 is Ker(L_0)^perp: report the kernel component
    coef = solve(K.T @ K, K.T @ rhs)
    return ChainExtension(False, None, K @ coef)


def wk_space(path: TaylorPath, k: int) -> Subspace:
    """Initial vectors of generalized Jordan chains of length k."""
    if k < 1:
        raise ValueError("k >= 1")
    if k - 1 > path.max_order:
        raise OrderExceeded(f"W_{k} needs L_{k - 1}")
    N = nullspace(_block_system(path, k))
    return Subspace(canonical_basis(N[: path.dim]), ambient_dim=path.dim, check=False)


def _lift(path, k, u0, perturb=False):
    """A chain (u_0..u_{k-1}) starting at u0 (minimum-norm; optionally shifted)."""
    n = path.dim
    if k == 1:
        return [u0]
    S = _block_system(path, k - 1)
    rhs = np.concatenate([-(path.L(r) @ u0) for r in range(1, k)])
    x = solve(S, rhs)
    if x is None:
        raise InconsistentData("vector does not start a chain of the requested length")
    if perturb:
        N = nullspace(S)
        if N.shape[1]:
            x = x + N @ like(x, [1 + i for i in range(N.shape[1])])
    return [u0] + [x[(j - 1) * n: j * n] for j in range(1, k)]


def bk_form(path: TaylorPath, k: int, check_choice=True):
    """(W_k, B_k) with B_k expressed in the returned basis of W_k."""
    if k > path.max_order:
        raise OrderExceeded(f"B_{k} needs L_{k}")
    W = wk_space(path, k)
    m = W.dim

    def assemble(perturb):
        ys = []
        for a in range(m):
            u = _lift(path, k, W.basis[:, a], perturb)
            y = zeros(path.dim, path.exact)
            for j in range(k):
                y = y + path.L(k - j) @ u[j]
            ys.append(y)
        M = zeros((m, m), path.exact)
        for a in range(m):
            for b in range(m):
                M[a, b] = ys[a] @ W.basis[:, b]
        return M

    M = assemble(False)
    if path.exact:
        if not np.array_equal(M, M.T):
            raise InconsistentData(f"B_{k} is not symmetric")
        if check_choice and m and not np.array_equal(M, assemble(True)):
            raise InconsistentData(f"B_{k} depends on the chain choice")
    return W, SymForm(M)


def partial_signatures(path: TaylorPath) -> SignatureTable:
    """Iterate W_k, B_k until W_{k+1} = {0}; verify the structural identities."""
    n0 = kernel_basis(path.L(0)).dim
    table = SignatureTable(n0=n0, t0=path.t0)
    if n0 == 0:
        table.w_dims = [0]
        return table
    k = 1
    W = wk_space(path, 1)
    table.w_dims.append(W.dim)
    while True:
        if k > path.max_order:
            raise NonIsolated(f"W_{k} still nonzero at jet order {path.max_order}")
        Wk, B = bk_form(path, k)
        inr = inertia(B)
        table.levels.append(SignatureLevel(k, Wk, B, inr))
        Wnext = wk_space(path, k + 1)
        table.w_dims.append(Wnext.dim)
        kerB = kernel_basis(B).basis
        if kerB.shape[1] != Wnext.dim or (Wnext.dim and not span_equal(Wk.basis @ kerB, Wnext.basis)):
            raise InconsistentData(f"W_{k + 1} differs from Ker B_{k}")
        if Wnext.dim == 0:
            break
        k += 1
    bad = [name for name, ok in table.invariant_checks().items() if not ok]
    if bad:
        raise InconsistentData("table invariants failed: " + ", ".join(bad))
    return table


def jump_decomposition(table: SignatureTable) -> JumpRecord:
    odd = [l.inertia for l in table.levels if l.k % 2 == 1]
    even = [l.inertia for l in table.levels if l.k % 2 == 0]
    all_ = [l.inertia for l in table.levels]
    sf_left = sum(i.n_plus for i in odd) + sum(i.n_minus for i in even)
    sf_right = -sum(i.n_minus for i in all_)
    sf_across = sum(i.signature for i in odd)
    c_right = sum(i.n_plus for i in all_)
    c_left = -(sum(i.n_minus for i in odd) + sum(i.n_plus for i in even))
    assert sf_left + sf_right == sf_across == c_left + c_right
    return JumpRecord(sf_left, sf_right, sf_across, c_left, c_right, c_left + c_right)


# ---------------------------------------------------- eigencurve oracle

def eigencurve_signatures(eig_jets, frames, t0=0) -> SignatureTable:
    """Table assembled from an explicit smooth eigendecomposition.

    ``eig_jets[i]`` lists the Taylor coefficients of the i-th eigenvalue in
    powers of (t - t0); column i of ``frames`` is its eigenvector at t0.  The
    frames must be mutually orthogonal.
    """
    V = as_array(frames, True)
    n = V.shape[0]
    jets = [[frac(c) for c in j] for j in eig_jets]
    if V.shape != (n, n) or len(jets) != n:
        raise InconsistentData("need one eigenvector per eigenvalue")
    G = V.T @ V
    if any(G[i, j] != 0 for i in range(n) for j in range(n) if i != j) or any(G[i, i] == 0 for i in range(n)):
        raise InconsistentData("eigenvector frames must be orthogonal and nonzero")

    def order(j):
        return next((p for p, c in enumerate(j) if c != 0), None)

    orders = [order(j) for j in jets]
    idx1 = [i for i in range(n) if orders[i] != 0]
    table = SignatureTable(n0=len(idx1), t0=t0)
    if not idx1:
        table.w_dims = [0]
        return table
    k = 1
    while True:
        idx = [i for i in range(n) if orders[i] is None or orders[i] >= k]
        table.w_dims.append(len(idx))
        if not idx:
            break
        if any(k >= len(jets[i]) for i in idx):
            raise NonIsolated(f"eigenvalue jets too short to resolve order {k}")
        W = Subspace(V[:, idx], check=False)
        B = zeros((len(idx), len(idx)))
        for a, i in enumerate(idx):
            B[a, a] = jets[i][k] * G[i, i]
        form = SymForm(B)
        table.levels.append(SignatureLevel(k, W, form, inertia(form)))
        k += 1
    return table


# --------------------------------------------------------- spectral flow

@dataclass
class CrossingRecord:
    t0: object            # exact root or isolating interval (lo, hi)
    position: str         # "left", "right" or "interior"
    contribution: int
    table: SignatureTable | None

    def as_dict(self):
        return {"t0": [str(x) for x in self.t0] if isinstance(self.t0, tuple) else str(self.t0),
                "position": self.position, "contribution": self.contribution,
                "table": None if self.table is None else self.table.as_dict()}


@dataclass
class SpectralFlowReport:
    value: int
    crossings: list
    telescoped: int

    @property
    def consistent(self):
        return self.value == self.telescoped


def _ext_coindex(M):
    return inertia(SymForm(M)).ext_coindex


def spectral_flow(path: PolyPath, interval=None, detail=False, exact_kind=True):
    """n̄+(P(b)) - n̄+(P(a)), checked against the sum of per-crossing jumps."""
    a, b = (path.interval if interval is None else (frac(interval[0]), frac(interval[1])))
    conv = (lambda M: M) if exact_kind else (lambda M: M.astype(float))
    value = _ext_coindex(conv(path(b))) - _ext_coindex(conv(path(a)))
    d = det_poly(path.poly)
    roots = real_roots(d, a, b)
    order = max(DEFAULT_MAX_ORDER, len(d) + 1)
    crossings = []
    total = 0
    for r in roots:
        if r.rational:
            pos = "left" if r.value == a else "right" if r.value == b else "interior"
            if a == b:
                pos = "point"
            table = partial_signatures(jet_at(PolyPath(path.poly, (a, b)), r.value, order, exact_kind))
            jr = jump_decomposition(table)
            c = {"left": jr.sf_right, "right": jr.sf_left, "interior": jr.sf_across, "point": 0}[pos]
            crossings.append(CrossingRecord(r.value, pos, c, table))
        else:
            c = _ext_coindex(conv(path(r.hi))) - _ext_coindex(conv(path(r.lo)))
            crossings.append(CrossingRecord((r.lo, r.hi), "interior", c, None))
        total += c
    if total != value:
        raise InconsistentData(f"spectral flow {value} differs from telescoped crossings {total}")
    if detail:
        return SpectralFlowReport(value, crossings, total)
    return value


# ---------------------------------------------------- nilpotent block

def _matpow(T, k):
    out = identity(T.shape[0], is_exact(T))
    for _ in range(k):
        out = out @ T
    return out


@dataclass
class NilpotentReport:
    table: SignatureTable
    path_forms: list          # B_k from the chain construction
    displayed_forms: list     # g(c, b) with a = T^{k-1} c
    sign_relation: list       # per k: "opposite", "equal" or "mixed"
    identities: dict          # name -> (lhs, rhs, holds)
    displayed_identities: dict
    wk_match: bool

    @property
    def all_hold(self):
        return self.wk_match and all(v[2] for v in self.identities.values())


def _identity_values(levels_inertia, g_in, gT_in):
    odd = [i for k, i in levels_inertia if k % 2 == 1]
    even = [i for k, i in levels_inertia if k % 2 == 0]
    allv = [i for _, i in levels_inertia]
    l1 = sum(i.n_minus for i in odd) + sum(i.n_plus for i in even)
    r1a = gT_in.ext_index - g_in.n_minus
    r1b = g_in.n_plus - gT_in.n_plus
    l2 = sum(i.n_plus for i in allv)
    r2a = gT_in.ext_index - g_in.n_plus
    r2b = g_in.n_minus - gT_in.n_plus
    l3 = sum(i.signature for i in odd)
    r3 = -g_in.signature
    return {
        "sum(n-(B_odd)+n+(B_even)) = ext_index(gT) - n-(g)": (l1, r1a, l1 == r1a),
        "sum(n-(B_odd)+n+(B_even)) = n+(g) - n+(gT)": (l1, r1b, l1 == r1b),
        "sum n+(B_k) = ext_index(gT) - n+(g)": (l2, r2a, l2 == r2a),
        "sum n+(B_k) = n-(g) - n+(gT)": (l2, r2b, l2 == r2b),
        "sum sigma(B_odd) = -sigma(g)": (l3, r3, l3 == r3),
    }


def nilpotent_block_signatures(g, T) -> NilpotentReport:
    """Partial signatures of  lambda -> gT - lambda g  at 0 for g-symmetric nilpotent T."""
    g = SymForm(g).mat
    T = like(g, T)
    n = g.shape[0]
    gT = g @ T
    if is_exact(g):
        if not np.array_equal(gT, gT.T):
            raise NotGSymmetric("g T is not symmetric")
        if any(v != 0 for v in _matpow(T, n).flat):
            raise NotNilpotent("T^n != 0")
    else:
        if np.abs(gT - gT.T).max() > 1e-9 * max(1, np.abs(gT).max()):
            raise NotGSymmetric("g T is not symmetric")
        if np.abs(_matpow(T, n)).max() > 1e-9 * max(1, np.abs(T).max()) ** n:
            raise NotNilpotent("T^n != 0")
    if is_exact(g) and det(g) == 0:
        raise ValueError("g must be nondegenerate")
    path = TaylorPath(0, [gT, -g] + [zeros((n, n), is_exact(g))] * n, is_exact(g))
    table = partial_signatures(path)
    path_forms, disp_forms, relation = [], [], []
    wk_ok = True
    for lvl in table.levels:
        k = lvl.k
        Tk1 = _matpow(T, k - 1)
        Tk = _matpow(T, k)
        expected = Subspace(colspace(Tk1 @ nullspace(Tk)), ambient_dim=n, check=False) \
            if nullspace(Tk).shape[1] else Subspace(zeros((n, 0), is_exact(g)), check=False)
        if not span_equal(expected.basis, lvl.space.basis):
            wk_ok = False
        A = lvl.space.basis
        sys_ = np.vstack([Tk1, Tk])
        D = zeros((A.shape[1], A.shape[1]), is_exact(g))
        for i in range(A.shape[1]):
            c = solve(sys_, np.concatenate([A[:, i], zeros(n, is_exact(g))]))
            if c is None:
                raise InconsistentData("W_k vector not in T^(k-1) Ker T^k")
            for j in range(A.shape[1]):
                D[i, j] = c @ g @ A[:, j]
        P = lvl.form.mat
        path_forms.append(P)
        disp_forms.append(D)
        eq = np.array_equal(P, D) if is_exact(g) else np.allclose(P, D)
        opp = np.array_equal(P, -D) if is_exact(g) else np.allclose(P, -D)
        relation.append("equal" if eq and not opp else "opposite" if opp and not eq
                        else "zero" if eq and opp else "mixed")
    g_in = inertia(SymForm(g))
    gT_in = inertia(SymForm(gT))
    lv = [(l.k, l.inertia) for l in table.levels]
    ids = _identity_values(lv, g_in, gT_in)
    disp_lv = [(l.k, inertia(SymForm(D))) for l, D in zip(table.levels, disp_forms)]
    disp_ids = _identity_values(disp_lv, g_in, gT_in)
    return NilpotentReport(table, path_forms, disp_forms, relation, ids, disp_ids, wk_ok)


# ------------------------------------------------------- affine crossings

def power_kernel(M):
    """Stabilized union of Ker(M^j)."""
    n = M.shape[0]
    P = identity(n, is_exact(M))
    prev = -1
    K = nullspace(P)
    for _ in range(n + 1):
        P = P @ M
        K = nullspace(P)
        if K.shape[1] == prev:
            break
        prev = K.shape[1]
    return Subspace(K, ambient_dim=n, check=False)


@dataclass
class AffineReport:
    lam0: object
    H: Subspace
    B1: Inertia
    B2: Inertia
    sf_left: int
    sf_right: int
    sf_across: int
    printed: tuple            # the lambda0 > 0 closed form evaluated as is
    table: SignatureTable
    jumps: JumpRecord

    @property
    def consistent(self):
        return (self.sf_left, self.sf_right, self.sf_across) == (
            self.jumps.sf_left, self.jumps.sf_right, self.jumps.sf_across)


def affine_crossing(A, K, lam0) -> AffineReport:
    """Spectral flow of  lambda -> A + lambda K  near an isolated degeneracy lambda0 != 0."""
    A = SymForm(A).mat
    K = SymForm(K, is_exact(A)).mat
    ex = is_exact(A)
    lam0 = frac(lam0) if ex else float(lam0)
    if lam0 == 0:
        raise ValueError("lambda0 must be nonzero")
    n = A.shape[0]
    if ex and det(A) == 0:
        raise ValueError("A must be invertible")
    M = inverse(A) @ K + identity(n, ex) * (1 / lam0)
    H = power_kernel(M)
    if H.dim == 0:
        raise NotAnEigenvalue(f"1/lambda0 is not an eigenvalue of -A^-1 K (lambda0={lam0})")
    B1 = inertia(restrict(A, H))
    B2 = inertia(restrict(A + lam0 * K, H))
    if B1.n_zero:
        raise InconsistentData("<A., .> degenerates on the generalized eigenspace")
    printed = (B2.ext_coindex - B1.n_plus, B1.n_minus - B2.ext_coindex, -B1.signature)
    if lam0 > 0:
        left, right, across = printed
    else:
        # parameter orientation is reversed relative to the t-path: mirror the formula
        left, right, across = (B2.ext_coindex - B1.n_minus, B1.n_plus - B2.ext_coindex, B1.signature)
    path = TaylorPath(lam0, [A + lam0 * K, K] + [zeros((n, n), ex)] * (n + 1), ex)
    table = partial_signatures(path)
    return AffineReport(lam0, H, B1, B2, left, right, across, printed, table, jump_decomposition(table))


@dataclass
class PencilReport:
    H: Subspace
    B: Inertia
    BT: Inertia
    sf_left: int
    sf_right: int
    sf_across: int
    table: SignatureTable
    jumps: JumpRecord

    @property
    def consistent(self):
        return (self.sf_left, self.sf_right, self.sf_across) == (
            self.jumps.sf_left, self.jumps.sf_right, self.jumps.sf_across)


def pencil_crossing(g, T) -> PencilReport:
    """Jumps of  t -> gT - t g  at t = 0 from g and gT restricted to the power kernel of T."""
    g = SymForm(g).mat
    T = like(g, T)
    ex = is_exact(g)
    gT = g @ T
    if ex and not np.array_equal(gT, gT.T):
        raise NotGSymmetric("g T is not symmetric")
    n = g.shape[0]
    H = power_kernel(T)
    Bi = inertia(restrict(g, H))
    BTi = inertia(restrict(gT, H))
    left = BTi.ext_coindex - Bi.n_plus
    right = Bi.n_minus - BTi.ext_coindex
    across = -Bi.signature
    path = TaylorPath(0, [gT, -g] + [zeros((n, n), ex)] * (n + 1), ex)
    table = partial_signatures(path)
    return PencilReport(H, Bi, BTi, left, right, across, table, jump_decomposition(table))
