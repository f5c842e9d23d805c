"""Morse-Sturm systems V'' = R(t) V with a constant nondegenerate metric g.

Jacobi flow and its lambda-sensitivities, conjugate instants with their
partial signatures, the geodesic Maslov index, the generalized Morse index
(Galerkin), the spectral index (Galerkin pencil and shooting) and the check
that all three agree.

Conventions.  Phase space is R^n + R^n with omega_g((v, a), (w, b)) =
g(v, b) - g(a, w).  Phi(t) maps (V(0), V'(0)) to (V(t), V'(t)); L0 = 0 + R^n.
Y(t) is the upper-right block of Phi(t), so J_v(t) = Y(t) v is the Jacobi
field with J(0) = 0, J'(0) = v.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eig, expm, null_space, schur, svd
from scipy.optimize import minimize_scalar

from .errors import M0TooSmall, NotStabilized, RefinementExhausted
from .forms_core import SymForm, as_array, float_policy, inertia
from .lagrangian_maslov import LagrangianFrame, SampledPath, SymplecticSpace, maslov_continuous
from .partial_signatures import SignatureTable, TaylorPath, partial_signatures
from .polys import PolyMatrix

JET_ORDER = 8
SCAN_POINTS = 2001
LAMBDA_SCAN_POINTS = 1201
ROOT_TOL = 1e-7          # smallest normalized singular value accepted as a crossing
MULT_TOL = 1e-6          # singular values below this count toward the multiplicity
JET_REL_TOL = 1e-7       # rank tolerance used on float jets
RTOL, ATOL = 1e-10, 1e-12


# ------------------------------------------------------------- problem

class MorseSturmProblem:
    """Metric g and a curve R(t) of g-symmetric endomorphisms on [0, 1].

    ``R`` is a constant matrix, a PolyMatrix, or ``("samples", times, values)``
    interpolated by a cubic spline.
    """

    def __init__(self, g, R, label: str = ""):
        self.g_exact = as_array(g)
        self.g = np.asarray(self.g_exact, dtype=float)
        self.n = self.g.shape[0]
        if not np.allclose(self.g, self.g.T) or abs(np.linalg.det(self.g)) < 1e-12:
            raise ValueError("g must be symmetric and nondegenerate")
        self.label = label
        if isinstance(R, PolyMatrix):
            self.kind = "poly"
            self.poly = R
            self._pf = [np.asarray(c, dtype=float) for c in R.coeffs]
        elif isinstance(R, tuple) and R and R[0] == "samples":
            self.kind = "samples"
            self.times = np.asarray(R[1], dtype=float)
            self.values = np.asarray([np.asarray(as_array(v), dtype=float) for v in R[2]])
            self.spline = CubicSpline(self.times, self.values, axis=0)
        else:
            self.kind = "constant"
            self.R_exact = as_array(R)
            self.R0 = np.asarray(self.R_exact, dtype=float)
        for t in np.linspace(0, 1, 11):
            gR = self.g @ self.R_at(t)
            if not np.allclose(gR, gR.T, atol=1e-9 * max(1.0, np.abs(gR).max())):
                raise ValueError(f"g R({t:g}) is not symmetric")

    # R and its Taylor coefficients
    def R_at(self, t) -> np.ndarray:
        if self.kind == "constant":
            return self.R0
        if self.kind == "poly":
            out = np.zeros((self.n, self.n))
            for c in reversed(self._pf):
                out = out * t + c
            return out
        return self.spline(t)

    def R_taylor(self, t0, order: int) -> list:
        """Taylor coefficients R^(j)(t0)/j!, j = 0..order."""
        out = [np.zeros((self.n, self.n)) for _ in range(order + 1)]
        if self.kind == "constant":
            out[0] = self.R0.copy()
        elif self.kind == "poly":
            d = len(self._pf) - 1
            for j in range(min(order, d) + 1):
                acc = np.zeros((self.n, self.n))
                for i in range(j, d + 1):
                    acc = acc + math.comb(i, j) * self._pf[i] * t0 ** (i - j)
                out[j] = acc
        else:
            for j in range(min(order, 3) + 1):
                out[j] = self.spline(t0, j) / math.factorial(j)
        return out

    def sup_norm(self) -> float:
        ts = np.linspace(0, 1, 201)
        return max(np.linalg.norm(self.R_at(t), 2) for t in ts)

    @property
    def n_minus_g(self) -> int:
        return inertia(SymForm(self.g_exact)).n_minus

    @property
    def space(self) -> SymplecticSpace:
        return SymplecticSpace.from_metric(self.g)

    def conjugated(self, T) -> "MorseSturmProblem":
        """Change of frame: g -> T^T g T, R -> T^-1 R T."""
        T = np.asarray(as_array(T), dtype=float)
        Ti = np.linalg.inv(T)
        g2 = T.T @ self.g @ T
        if self.kind == "constant":
            R2 = Ti @ self.R0 @ T
        elif self.kind == "poly":
            R2 = PolyMatrix(np.stack([Ti @ c @ T for c in self._pf]))
        else:
            R2 = ("samples", self.times, [Ti @ v @ T for v in self.values])
        return MorseSturmProblem(g2, R2, label=self.label + " (conjugated)")

    # JSON
    @classmethod
    def from_dict(cls, d: dict) -> "MorseSturmProblem":
        from .serialization import poly_from_json
        n = int(d["n"])
        g = as_array(d["g"])
        Rd = d["R"]
        kind = Rd.get("kind", "constant")
        if kind == "constant":
            R = as_array(Rd["value"])
        elif kind == "poly":
            R = poly_from_json(Rd["coeffs"])
        elif kind == "samples":
            R = ("samples", [float(Fraction(str(t))) for t in Rd["times"]], Rd["values"])
        else:
            raise ValueError(f"unknown R kind {kind!r}")
        prob = cls(g, R, label=d.get("label", ""))
        if prob.n != n:
            raise ValueError(f"n = {n} does not match g of size {prob.n}")
        return prob

    def as_dict(self) -> dict:
        from .serialization import matrix_to_json, poly_to_json
        if self.kind == "constant":
            R = {"kind": "constant", "value": matrix_to_json(self.R_exact)}
        elif self.kind == "poly":
            R = {"kind": "poly", "coeffs": poly_to_json(self.poly)}
        else:
            R = {"kind": "samples", "times": self.times.tolist(), "values": self.values.tolist()}
        return {"n": self.n, "g": matrix_to_json(self.g_exact), "R": R, "label": self.label}


# ---------------------------------------------------------------- flow

def _generator(R, lam, n):
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = R - lam * np.eye(n)
    return A


class JacobiFlow:
    """Phi_lambda(t) for v'' = (R - lambda) v and its lambda-Taylor coefficients.

    ``coeffs(t)[k]`` is (d/dlambda)^k Phi / k!.  Constant R uses one matrix
    exponential of a block-bidiagonal generator (the nilpotent shift plays the
    role of lambda); otherwise the augmented linear system is integrated with
    DOP853 and evaluated through its dense output.
    """

    def __init__(self, prob: MorseSturmProblem, lam: float = 0.0, sens_order: int = 0):
        if not 0 <= sens_order <= 8:
            raise ValueError("sens_order must be in 0..8")
        self.prob, self.lam, self.order = prob, float(lam), sens_order
        n = prob.n
        m = 2 * n
        K = sens_order + 1
        E = np.zeros((m, m))
        E[n:, :n] = -np.eye(n)
        self._E = E
        if prob.kind == "constant":
            big = np.zeros((K * m, K * m))
            A = _generator(prob.R0, self.lam, n)
            for k in range(K):
                big[k * m:(k + 1) * m, k * m:(k + 1) * m] = A
                if k + 1 < K:
                    big[k * m:(k + 1) * m, (k + 1) * m:(k + 2) * m] = E
            self._big = big
            self._sol = None
        else:
            def rhs(t, y):
                X = y.reshape(K, m, m)
                A = _generator(prob.R_at(t), self.lam, n)
                out = np.empty_like(X)
                out[0] = A @ X[0]
                for k in range(1, K):
                    out[k] = A @ X[k] + E @ X[k - 1]
                return out.ravel()
            y0 = np.zeros((K, m, m))
            y0[0] = np.eye(m)
            sol = solve_ivp(rhs, (0.0, 1.0), y0.ravel(), method="DOP853", rtol=RTOL, atol=ATOL,
                            dense_output=True)
            if not sol.success:
                raise RuntimeError(f"integration failed: {sol.message}")
            self._sol = sol

    def coeffs(self, t) -> list:
        m = 2 * self.prob.n
        K = self.order + 1
        t = float(t)
        if self._sol is None:
            Z = expm(t * self._big)
            return [Z[:m, k * m:(k + 1) * m] for k in range(K)]
        y = self._sol.sol(t).reshape(K, m, m)
        return [y[k] for k in range(K)]

    def __call__(self, t) -> np.ndarray:
        return self.coeffs(t)[0]

    def symplectic_defect(self, ts=None) -> float:
        ts = np.linspace(0, 1, 21) if ts is None else ts
        Om = self.prob.space.omega.astype(float)
        # relative to |Phi|^2 so that badly scaled frames are not penalized
        return max(float(np.abs(P.T @ Om @ P - Om).max()) / max(1.0, float(np.abs(P).max()) ** 2)
                   for P in (self(t) for t in ts))

    def fd_check(self, t=1.0, h=1e-4) -> float:
        """Richardson-extrapolated central difference of the first sensitivity."""
        if self.order < 1:
            return 0.0
        f = lambda lam, hh: JacobiFlow(self.prob, lam, 0)(t)
        d1 = (f(self.lam + h, h) - f(self.lam - h, h)) / (2 * h)
        d2 = (f(self.lam + h / 2, h) - f(self.lam - h / 2, h)) / h
        rich = (4 * d2 - d1) / 3
        return float(np.abs(rich - self.coeffs(t)[1]).max())


def integrate_flow(prob: MorseSturmProblem, lam: float = 0.0, sens_order: int = 0) -> JacobiFlow:
    return JacobiFlow(prob, lam, sens_order)


def _blocks(Phi, n):
    """(Y, Y') for the Jacobi fields vanishing at 0."""
    return Phi[:n, n:], Phi[n:, n:]


def _closeness(Y, Yp):
    """Normalized distance of span[Y; Y'] from L0: smallest singular values of the upper block."""
    Q, _ = np.linalg.qr(np.vstack([Y, Yp]))
    return svd(Q[: Y.shape[0]], compute_uv=False)


# ---------------------------------------------------------------- jets

def y_jets(prob: MorseSturmProblem, t0, Y0, Y1, order: int = JET_ORDER + 1) -> list:
    """Taylor coefficients y_k of Y at t0 from Y'' = R Y (Leibniz recursion)."""
    r = prob.R_taylor(t0, order)
    y = [np.asarray(Y0, float), np.asarray(Y1, float)]
    for k in range(order - 1):
        s = sum(r[j] @ y[k - j] for j in range(k + 1))
        y.append(s / ((k + 2) * (k + 1)))
    return y


def _b_jets(g, y, T=None, order=JET_ORDER):
    """Jets of Y^T g Y' (T None) or Y^T g (Y' - T^-1 Y)."""
    yp = [(j + 1) * y[j + 1] for j in range(len(y) - 1)]
    if T is not None:
        Ti = np.linalg.inv(T)
        yp = [yp[j] - Ti @ y[j] for j in range(len(yp))]
    out = []
    for mdeg in range(order + 1):
        B = sum(y[i].T @ g @ yp[mdeg - i] for i in range(mdeg + 1))
        out.append((B + B.T) / 2)
    return out


def _poly_det(P):
    """Determinant of a square matrix of coefficient arrays (low degree first)."""
    m = len(P)
    if m == 1:
        return P[0][0]
    out = np.zeros(1)
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in P[1:]]
        term = np.polynomial.polynomial.polymul(P[0][j], _poly_det(minor))
        out = np.polynomial.polynomial.polyadd(out, term if j % 2 == 0 else -term)
    return out


def _polish(y, mult, radius):
    """Offset s of the crossing nearest 0 from the jets y_k of Y at the current point.

    det(U^T Y(t + s) V) restricted to the near-kernel is a polynomial in s whose
    roots near 0 form a cluster around the true crossing; its centroid is well
    conditioned even when the individual roots are not.
    """
    U, _, Vt = svd(y[0])
    Uk, Vk = U[:, -mult:], Vt[-mult:].T
    P = [[np.array([float(Uk[:, a] @ yk @ Vk[:, b]) for yk in y]) for b in range(mult)] for a in range(mult)]
    d = np.polynomial.polynomial.polytrim(_poly_det(P), 0)
    if len(d) < 2:
        return 0.0
    roots = np.polynomial.polynomial.polyroots(d)
    near = roots[np.abs(roots) < radius]
    if near.size == 0:
        return 0.0
    return float(np.mean(near).real)


# ------------------------------------------------------ conjugate instants

@dataclass
class ConjugateInstant:
    t0: float
    multiplicity: int
    table: SignatureTable | None = None
    signature: int | None = None     # signature of g on {J'(t0) : J(t0) = 0}
    degenerate: bool = False
    bifurcation: bool = False
    formula: str = ""
    checks: dict = field(default_factory=dict)

    def as_dict(self):
        return {"t0": self.t0, "multiplicity": self.multiplicity, "signature": self.signature,
                "degenerate": self.degenerate, "bifurcation": self.bifurcation, "formula": self.formula,
                "table": None if self.table is None else self.table.as_dict(), "checks": dict(self.checks)}


def _scan_minima(f, a, b, points, include_end=True):
    """Local minima of f on a uniform grid of (a, b], refined by bounded Brent."""
    ts = np.linspace(a, b, points)
    vals = np.array([f(t) for t in ts])
    hits = []
    h = ts[1] - ts[0]
    for i in range(1, points):
        last = i == points - 1
        left = vals[i - 1]
        right = np.inf if last else vals[i + 1]
        if vals[i] <= left and vals[i] <= right and vals[i] < 0.05:
            if last and not include_end:
                continue
            lo, hi = ts[i - 1], (b if last else ts[i + 1])
            res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
            tb, vb = float(res.x), float(res.fun)
            if f(hi) < vb and last:
                tb, vb = hi, f(hi)
            if hits and abs(tb - hits[-1][0]) < h:
                if vb < hits[-1][1]:
                    hits[-1] = (tb, vb)
                continue
            hits.append((tb, vb))
    return hits, h


class _Locator:
    """Crossings of t -> span[Y(t); Y'(t)] with L0 for a family of (Y, Y') jets."""

    def __init__(self, prob, frames, jets):
        self.prob, self.frames, self.jets = prob, frames, jets

    def close(self, t):
        return _closeness(*self.frames(t))[-1]

    def find(self, a, b, points, include_end=True):
        hits, h = _scan_minima(self.close, a, b, points, include_end)
        out = []
        for t, v in hits:
            if v > 1e-3:
                continue
            sv = _closeness(*self.frames(t))
            mult = int(np.sum(sv < 1e-3))
            for _ in range(4):
                s = _polish(self.jets(t), mult, radius=2 * h)
                t_new = min(max(t + s, a), b)
                if abs(t_new - t) < 1e-15:
                    break
                t = t_new
            sv = _closeness(*self.frames(t))
            if sv[-1] > ROOT_TOL:
                continue
            mult = int(np.sum(sv < MULT_TOL))
            out.append((t, mult))
        out.sort()
        for (t1, _), (t2, _) in zip(out, out[1:]):
            if t2 - t1 < 2 * h:
                warnings.warn(f"crossings at {t1:.6g} and {t2:.6g} are closer than the scan resolution")
        return out


def _t_locator(prob, flow):
    n = prob.n

    def frames(t):
        return _blocks(flow(t), n)

    def jets(t):
        return y_jets(prob, t, *frames(t))

    return _Locator(prob, frames, jets)


def conjugate_instants(prob: MorseSturmProblem, flow: JacobiFlow | None = None) -> list:
    """[(t0, multiplicity)] for t0 in (0, 1]."""
    flow = integrate_flow(prob) if flow is None else flow
    a = min(1e-3, 1.0 / SCAN_POINTS)
    return _t_locator(prob, flow).find(a, 1.0, SCAN_POINTS)


def _snap(Y, mult):
    """Remove the smallest ``mult`` singular values of Y (they are round-off)."""
    U, s, Vt = svd(Y)
    s = s.copy()
    s[len(s) - mult:] = 0
    return (U * s) @ Vt


def _random_g_symmetric(rng, g):
    n = g.shape[0]
    X = rng.standard_normal((n, n))
    S = X + X.T
    return np.linalg.solve(g, S)   # g T = S symmetric


def _table_from_jets(t0, Bj):
    with float_policy(rel_tol=JET_REL_TOL):
        return partial_signatures(TaylorPath(t0, Bj, exact_kind=False))


def _same_table(a, b):
    return a.key() == b.key()


def _instant_tables(g, t0, y, mult, rng, require_formula2=False):
    """Partial signatures from formula1 when Y'(t0) is invertible, else formula2.

    formula2 (Y^T g (Y' - T^-1 Y)) is always recomputed with two independent
    g-symmetric T, which must give the same table.
    """
    checks = {}
    y = [_snap(y[0], mult)] + list(y[1:])
    Y0, Y1 = y[0], y[1]
    sv1 = svd(Y1, compute_uv=False)
    injective = sv1[-1] > 1e-6 * max(1.0, sv1[0])
    Ts = []
    for _ in range(64):
        T = _random_g_symmetric(rng, g)
        M = Y0 - T @ Y1
        if abs(np.linalg.det(T)) > 1e-6 and svd(M, compute_uv=False)[-1] > 1e-6 * max(1.0, np.abs(M).max()):
            Ts.append(T)
            if len(Ts) == 2:
                break
    if len(Ts) < 2:
        raise RefinementExhausted("no admissible g-symmetric T found")
    t2 = [_table_from_jets(t0, _b_jets(g, y, T)) for T in Ts]
    checks["formula2 independent of T"] = _same_table(*t2)
    if injective and not require_formula2:
        table = _table_from_jets(t0, _b_jets(g, y))
        checks["formula1 = formula2"] = _same_table(table, t2[0])
        return table, "formula1", checks
    return t2[0], "formula2", checks


def conjugate_partial_signatures(prob: MorseSturmProblem, t0: float, flow: JacobiFlow | None = None,
                                 seed: int = 0, detail: bool = False):
    """Partial signatures of the geodesic at a conjugate instant t0 (kappa-basis J'(0) = v)."""
    flow = integrate_flow(prob) if flow is None else flow
    n = prob.n
    Y0, Y1 = _blocks(flow(t0), n)
    sv = _closeness(Y0, Y1)
    mult = int(np.sum(sv < MULT_TOL))
    if mult == 0:
        raise ValueError(f"t0 = {t0} is not a conjugate instant")
    y = y_jets(prob, t0, Y0, Y1)
    table, formula, checks = _instant_tables(prob.g, t0, y, mult, np.random.default_rng(seed))
    if detail:
        return table, formula, checks
    return table


def _instant(prob, flow, t0, mult, seed):
    table, formula, checks = conjugate_partial_signatures(prob, t0, flow, seed, detail=True)
    n = prob.n
    Y0, Y1 = _blocks(flow(t0), n)
    K = null_space(_snap(Y0, mult), rcond=1e-8)
    D = Y1 @ K                                    # {J'(t0) : J(t0) = 0}
    with float_policy(rel_tol=JET_REL_TOL):
        inr = inertia(SymForm(D.T @ prob.g @ D, False))
    checks["multiplicity = dim W1"] = table.w_dims[0] == mult
    interior = t0 < 1.0 - 1e-12
    return ConjugateInstant(t0, mult, table, inr.signature, inr.n_zero > 0,
                            interior and table.odd_sigma_sum() != 0, formula, checks)


def _final_term(table: SignatureTable) -> int:
    return sum(table.n_plus(k) for k in range(1, table.k_max + 1, 2)) + \
        sum(table.n_minus(k) for k in range(2, table.k_max + 1, 2))


def geodesic_instants(prob, flow=None, seed=0) -> list:
    flow = integrate_flow(prob) if flow is None else flow
    return [_instant(prob, flow, t0, m, seed) for t0, m in conjugate_instants(prob, flow)]


def flow_path(prob, flow, a=0.0, b=1.0, count=129) -> SampledPath:
    """Samples of t -> Phi(t) L0 with the flow as provider."""
    space = prob.space
    n = prob.n
    prov = lambda t: flow(float(t))[:, n:]
    ts = list(np.linspace(a, b, count))
    return SampledPath(space, ts, [LagrangianFrame(space, prov(t), check=False) for t in ts], prov)


@dataclass
class MaslovReport:
    value: int
    instants: list
    mu_flow: int            # mu_{L0} of the sampled flow path on [0, 1]
    mu_from_eps: int        # mu_{L0} on [eps, 1]
    eps: float
    checks: dict


def geodesic_maslov(prob: MorseSturmProblem, seed: int = 0, detail: bool = False):
    """i_Maslov = sum of odd partial signatures at interior instants plus the final-instant term.

    Cross-checked against the sampled flow path: mu_{L0}(gamma) + n-(g), and
    mu on [eps, 1] minus n-(g) for eps below the first conjugate instant.
    """
    flow = integrate_flow(prob)
    inst = geodesic_instants(prob, flow, seed)
    value = 0
    for c in inst:
        if c.t0 < 1.0 - 1e-12:
            value += c.table.odd_sigma_sum()
        else:
            value += _final_term(c.table)
    L0 = LagrangianFrame(prob.space, np.vstack([np.zeros((prob.n, prob.n)), np.eye(prob.n)]))
    mu = maslov_continuous(flow_path(prob, flow), L0, seed=seed)
    eps = min([c.t0 for c in inst] + [1.0]) / 2
    mu_eps = maslov_continuous(flow_path(prob, flow, eps, 1.0), L0, seed=seed)
    checks = {
        "i_Maslov = mu(flow path) + n-(g)": value == mu + prob.n_minus_g,
        "mu on [0,1] = mu on [eps,1] - n-(g)": mu == mu_eps - prob.n_minus_g,
        "symplectic defect <= 1e-9": flow.symplectic_defect() <= 1e-9,
    }
    for c in inst:
        for k, v in c.checks.items():
            checks[f"t0={c.t0:.6g}: {k}"] = v
    rep = MaslovReport(value, inst, mu, mu_eps, eps, checks)
    return rep if detail else value


def bifurcation_flags(prob: MorseSturmProblem, seed: int = 0) -> list:
    """[(t0, flagged)] for interior conjugate instants; flagged when the odd signature sum is nonzero."""
    return [(c.t0, c.bifurcation) for c in geodesic_instants(prob, seed=seed) if c.t0 < 1.0 - 1e-12]


# ------------------------------------------------------------- Galerkin

def _galerkin(prob: MorseSturmProblem, N: int, t: float = 1.0):
    """Stiffness + potential and mass matrices of the rescaled index form on the sine basis.

    S_t(V, W) = int_0^1 g(V', W') + t^2 g(R(ts) V, W) ds, basis sqrt(2) sin(k pi s) e_i,
    index (k, i) -> k * n + i.
    """
    g = prob.g
    k = np.arange(1, N + 1)
    S = np.kron(np.diag((k * np.pi) ** 2), g)
    G = np.kron(np.eye(N), g)
    if t != 0:
        if prob.kind == "constant":
            S = S + t * t * np.kron(np.eye(N), g @ prob.R0)
        else:
            x, w = np.polynomial.legendre.leggauss(4 * N + 40)
            s = (x + 1) / 2
            w = w / 2
            phi = np.sqrt(2) * np.sin(np.outer(k, s) * np.pi)         # N x Q
            for q in range(len(s)):
                gR = g @ prob.R_at(t * s[q])
                S = S + t * t * w[q] * np.kron(np.outer(phi[:, q], phi[:, q]), gR)
    return (S + S.T) / 2, G


def _inertia_f(M):
    return inertia(SymForm(M, False))


@dataclass
class MorseReport:
    value: int
    values: dict            # N -> value
    kernel_dim: int
    sf: int


def morse_index_galerkin(prob: MorseSturmProblem, N: int = 16, detail: bool = False):
    """dim Ker(S_1) - sf(S, [0, 1]) on the Galerkin spaces of dimension N and 2N."""
    if N < 4:
        raise ValueError("N >= 4")
    vals = {}
    last = None
    for NN in (N, 2 * N):
        S0, _ = _galerkin(prob, NN, 0.0)
        S1, _ = _galerkin(prob, NN, 1.0)
        i0, i1 = _inertia_f(S0), _inertia_f(S1)
        sf = i1.ext_coindex - i0.ext_coindex
        vals[NN] = i1.n_zero - sf
        last = (i1.n_zero, sf)
    if len(set(vals.values())) != 1:
        raise NotStabilized(f"Galerkin Morse index not stabilized: {vals}")
    rep = MorseReport(vals[N], vals, last[0], last[1])
    return rep if detail else rep.value


# -------------------------------------------------------- spectral index

@dataclass
class EigenRecord:
    lam: float
    dim_H: int              # generalized eigenspace (Galerkin pencil)
    dim_ker: int            # geometric multiplicity (Galerkin)
    sigma_g: int            # signature of g-hat on H
    galerkin_B1: tuple      # (n+, n-) of -g-hat on the kernel
    shoot_dim: int | None = None
    shoot_B1: tuple | None = None
    shoot_table: SignatureTable | None = None

    def as_dict(self):
        return {"lambda": self.lam, "dim_H": self.dim_H, "dim_ker": self.dim_ker, "sigma_g": self.sigma_g,
                "galerkin_B1": list(self.galerkin_B1), "shoot_dim": self.shoot_dim,
                "shoot_B1": None if self.shoot_B1 is None else list(self.shoot_B1),
                "shoot_sigma": None if self.shoot_table is None else list(self.shoot_table.sigma)}


@dataclass
class SpectralReport:
    value: int
    galerkin: dict          # N -> dim Ker(I_0) - sf
    formula_value: int      # H_0 term plus sum of sigma(g-hat | H_lambda)
    shooting: int           # mu_{L0} of lambda -> l(lambda) on [-M0, 0] from per-eigenvalue tables
    shooting_sampled: int   # the same index from the sampled Lagrangian path
    M0: float
    eigen: list
    checks: dict


def _gen_eigenspace(S, G, lam, radius):
    """Generalized eigenspace of the pencil S - lambda G at lambda, via an ordered real Schur form."""
    A = np.linalg.solve(G, S)
    _, Z, sdim = schur(A, output="real", sort=lambda x, y: abs(complex(x, y) - lam) <= radius)
    return Z[:, :sdim]


def _pencil_eigen(S, G, lo, hi):
    """Real eigenvalues of S v = lambda G v in [lo, hi], clustered."""
    w = eig(S, G, right=False)
    scale = max(1.0, np.abs(S).max())
    real = sorted(float(x.real) for x in w if abs(x.imag) <= 1e-7 * scale and lo - 1e-9 <= x.real <= hi + 1e-9)
    clusters = []
    for x in real:
        if clusters and abs(x - clusters[-1][-1]) <= 1e-6 * max(1.0, abs(x)):
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [(float(np.mean(c)), len(c)) for c in clusters]


def _galerkin_spectral(prob, N, M0):
    S, G = _galerkin(prob, N, 1.0)
    i0 = _inertia_f(S)
    iM = _inertia_f(S + M0 * G)
    if iM.n_zero:
        raise M0TooSmall("I_{-M0} is degenerate")
    return S, G, i0.n_zero - (i0.ext_coindex - iM.ext_coindex)


def _flow_batch(prob, lams) -> np.ndarray:
    """Phi_lambda(1) for many lambda at once (one stacked integration)."""
    n, m = prob.n, 2 * prob.n
    lams = np.asarray(lams, dtype=float)
    B = len(lams)

    def rhs(t, y):
        X = y.reshape(B, m, m)
        out = _generator(prob.R_at(t), 0.0, n) @ X
        out[:, n:] -= lams[:, None, None] * X[:, :n]
        return out.ravel()

    y0 = np.broadcast_to(np.eye(m), (B, m, m)).ravel()
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=RTOL, atol=ATOL)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.y[:, -1].reshape(B, m, m)


def _lambda_locator(prob, M0):
    n = prob.n
    cache = {}

    def flow_at(lam, order=0):
        key = (round(lam, 12), order)
        if key not in cache:
            cache[key] = JacobiFlow(prob, lam, order).coeffs(1.0)
        return cache[key]

    def prefill(lams):
        # non-constant R: integrate the whole grid together instead of one ODE per lambda
        if prob.kind == "constant":
            return
        todo = [x for x in lams if (round(x, 12), 0) not in cache]
        for x, P in zip(todo, _flow_batch(prob, todo) if todo else []):
            cache[(round(x, 12), 0)] = [P]
    flow_at.prefill = prefill

    def frames(lam):
        return _blocks(flow_at(lam)[0], n)

    def jets(lam):
        cs = flow_at(lam, JET_ORDER)
        return [c[:n, n:] for c in cs]

    return _Locator(prob, frames, jets), flow_at


def _lambda_table(prob, lam, mult, flow_at, rng):
    """Partial signatures of lambda -> Y_lambda(1)^T g Y'_lambda(1) at an eigenvalue."""
    n = prob.n
    cs = flow_at(lam, JET_ORDER)
    Ys = [c[:n, n:] for c in cs]
    Yps = [c[n:, n:] for c in cs]
    Ys[0] = _snap(Ys[0], mult)
    Bj = []
    for m in range(JET_ORDER + 1):
        B = sum(Ys[i].T @ prob.g @ Yps[m - i] for i in range(m + 1))
        Bj.append((B + B.T) / 2)
    return _table_from_jets(lam, Bj)


def spectral_index(prob: MorseSturmProblem, N: int = 16, M0: float | None = None, seed: int = 0,
                   detail: bool = False):
    """dim Ker(I_0) - sf(I_lambda, [-M0, 0]), by the Galerkin pencil and by shooting.

    Shooting: l(lambda) = Phi_lambda(1) L0, whose L0-Maslov index over [-M0, 0]
    is assembled from partial signatures at each eigenvalue (odd sums inside,
    the endpoint term at lambda = 0) and also computed from samples.
    """
    if N < 4:
        raise ValueError("N >= 4")
    M0 = prob.sup_norm() + 1.0 if M0 is None else float(M0)
    if M0 <= prob.sup_norm():
        raise M0TooSmall("M0 must exceed sup |R|")
    rng = np.random.default_rng(seed)
    gal = {}
    for NN in (N, 2 * N):
        S, G, v = _galerkin_spectral(prob, NN, M0)
        gal[NN] = v
    if len(set(gal.values())) != 1:
        raise NotStabilized(f"Galerkin spectral index not stabilized: {gal}")
    S, G, _ = _galerkin_spectral(prob, N, M0)

    # per-eigenvalue Galerkin data
    eigen = []
    formula = 0
    for lam, m in _pencil_eigen(S, G, -M0, 0.0):
        H = _gen_eigenspace(S, G, lam, 1e-6 * max(1.0, abs(lam)) + 1e-9)
        K = null_space(S - lam * G, rcond=1e-9)
        with float_policy(rel_tol=1e-7):
            sg = _inertia_f(H.T @ G @ H)
            b1 = _inertia_f(-(K.T @ G @ K))
        rec = EigenRecord(lam, H.shape[1], K.shape[1], sg.signature, (b1.n_plus, b1.n_minus))
        if abs(lam) <= 1e-8 * max(1.0, M0):
            with float_policy(rel_tol=1e-7):
                sI = _inertia_f(H.T @ S @ H)
            rec.lam = 0.0
            formula += sg.n_plus - sI.n_plus
        else:
            formula += sg.signature
        eigen.append(rec)

    # shooting
    loc, flow_at = _lambda_locator(prob, M0)
    lams = list(np.linspace(-M0, 0.0, 129))
    flow_at.prefill(list(np.linspace(-M0, 0.0, LAMBDA_SCAN_POINTS)) + lams
                    + [a + (b - a) * k / 4 for a, b in zip(lams, lams[1:]) for k in (1, 2, 3)])
    if loc.close(-M0) < 1e-6:
        raise M0TooSmall("l(-M0) meets the Maslov cycle")
    crossings = loc.find(-M0, 0.0, LAMBDA_SCAN_POINTS)
    shoot = 0
    matched = True
    for lam, mult in crossings:
        table = _lambda_table(prob, lam, mult, flow_at, rng)
        at_end = abs(lam) < 1e-9
        shoot += _final_term(table) if at_end else table.odd_sigma_sum()
        lv = table.levels[0].inertia
        near = [r for r in eigen if abs(r.lam - lam) <= 1e-6 * max(1.0, abs(lam)) + 1e-9]
        if near:
            near[0].shoot_dim, near[0].shoot_B1, near[0].shoot_table = mult, (lv.n_plus, lv.n_minus), table
        else:
            matched = False
    n = prob.n
    space = prob.space
    L0 = LagrangianFrame(space, np.vstack([np.zeros((n, n)), np.eye(n)]))
    prov = lambda lam: flow_at(float(lam))[0][:, n:]
    path = SampledPath(space, lams, [LagrangianFrame(space, prov(x), check=False) for x in lams], prov)
    sampled = maslov_continuous(path, L0, seed=seed)

    checks = {
        "Galerkin stabilized (N, 2N)": True,
        "Galerkin = eigenspace formula": gal[N] == formula,
        "shooting tables = sampled shooting": shoot == sampled,
        "Galerkin = shooting": gal[N] == shoot,
        "every shooting eigenvalue has a Galerkin eigenvalue": matched,
    }
    for r in eigen:
        if r.shoot_dim is None:
            checks[f"lambda={r.lam:.6g}: found by shooting"] = False
            continue
        checks[f"lambda={r.lam:.6g}: dim W1 equal"] = r.shoot_dim == r.dim_ker
        checks[f"lambda={r.lam:.6g}: B1 sign-opposite"] = r.shoot_B1 == (r.galerkin_B1[1], r.galerkin_B1[0])
    rep = SpectralReport(gal[N], gal, formula, shoot, sampled, M0, eigen, checks)
    return rep if detail else rep.value


# ---------------------------------------------------------- index theorem

@dataclass
class GeodesicIndexReport:
    i_maslov: int
    i_morse: int
    i_spectral: int
    instants: list
    galerkin_dims: tuple
    verdicts: dict
    maslov: MaslovReport | None = None
    morse: MorseReport | None = None
    spectral: SpectralReport | None = None

    @property
    def holds(self):
        return self.i_maslov == self.i_morse == self.i_spectral

    @property
    def all_checks_pass(self):
        return self.holds and all(self.verdicts.values())

    def as_dict(self):
        return {
            "i_maslov": self.i_maslov, "i_morse": self.i_morse, "i_spectral": self.i_spectral,
            "theorem_holds": self.holds,
            "instants": [c.as_dict() for c in self.instants],
            "galerkin_dims": list(self.galerkin_dims),
            "eigenvalues": [] if self.spectral is None else [e.as_dict() for e in self.spectral.eigen],
            "M0": None if self.spectral is None else self.spectral.M0,
            "verdicts": dict(self.verdicts),
        }


def verify_index_theorem(prob: MorseSturmProblem, N: int = 16, M0: float | None = None,
                         seed: int = 0) -> GeodesicIndexReport:
    mas = geodesic_maslov(prob, seed=seed, detail=True)
    mor = morse_index_galerkin(prob, N, detail=True)
    spe = spectral_index(prob, N, M0, seed=seed, detail=True)
    verdicts = {"theorem holds": mas.value == mor.value == spe.value}
    verdicts.update({f"maslov: {k}": v for k, v in mas.checks.items()})
    verdicts.update({f"spectral: {k}": v for k, v in spe.checks.items()})
    return GeodesicIndexReport(mas.value, mor.value, spe.value, mas.instants, (N, 2 * N), verdicts,
                               mas, mor, spe)
