"""Polynomial matrices with exact coefficients and certified real-root isolation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
import sympy

from .errors import DimensionMismatch, NonIsolated
from .forms_core import as_array, det, exact, frac, zeros


class PolyMatrix:
    """Matrix-valued polynomial  P(t) = sum_k C[k] t^k  (exact coefficients)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        C = np.asarray(coeffs, dtype=object)
        if C.ndim != 3:
            raise DimensionMismatch("coefficient stack must have shape (deg+1, rows, cols)")
        C = exact(C)
        # trim trailing zero coefficients but keep at least one
        k = C.shape[0]
        while k > 1 and all(v == 0 for v in C[k - 1].flat):
            k -= 1
        self.coeffs = C[:k]

    @classmethod
    def from_entries(cls, entries):
        """Build from a nested list whose (i, j) entry is a coefficient list, low degree first."""
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        deg = max((len(e) for row in entries for e in row), default=1) - 1
        C = zeros((deg + 1, rows, cols))
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise DimensionMismatch("ragged polynomial matrix")
            for j, e in enumerate(row):
                if not isinstance(e, (list, tuple)):
                    e = [e]
                for k, c in enumerate(e):
                    C[k, i, j] = frac(c)
        return cls(C)

    @classmethod
    def constant(cls, M):
        M = as_array(M, True)
        return cls(M.reshape((1,) + M.shape))

    @classmethod
    def linear(cls, A, B):
        """A + t B."""
        A, B = as_array(A, True), as_array(B, True)
        return cls(np.stack([A, B]))

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def entries(self):
        return [[[self.coeffs[k, i, j] for k in range(self.coeffs.shape[0])]
                 for j in range(self.shape[1])] for i in range(self.shape[0])]

    def __call__(self, t):
        t = frac(t)
        out = zeros(self.shape)
        for C in self.coeffs[::-1]:
            out = out * t + C
        return out

    def eval_float(self, t):
        C = self.coeffs.astype(float)
        out = np.zeros(self.shape)
        for M in C[::-1]:
            out = out * t + M
        return out

    def taylor(self, t0, order):
        """[L_0, ..., L_order] with P(t) = sum L_k (t - t0)^k."""
        t0 = frac(t0)
        d = self.degree
        out = []
        for k in range(order + 1):
            L = zeros(self.shape)
            for j in range(k, d + 1):
                L = L + self.coeffs[j] * (comb(j, k) * t0 ** (j - k))
            out.append(L)
        return out

    def shift(self, t0):
        """Q(s) = P(t0 + s)."""
        return PolyMatrix(np.stack(self.taylor(t0, self.degree)))

    def __matmul__(self, other):
        if not isinstance(other, PolyMatrix):
            other = PolyMatrix.constant(other)
        da, db = self.degree, other.degree
        C = zeros((da + db + 1, self.shape[0], other.shape[1]))
        for i in range(da + 1):
            for j in range(db + 1):
                C[i + j] = C[i + j] + self.coeffs[i] @ other.coeffs[j]
        return PolyMatrix(C)

    def __rmatmul__(self, other):
        return PolyMatrix.constant(other) @ self

    def __add__(self, other):
        if not isinstance(other, PolyMatrix):
            other = PolyMatrix.constant(other)
        d = max(self.degree, other.degree)
        C = zeros((d + 1,) + self.shape)
        C[: self.degree + 1] = C[: self.degree + 1] + self.coeffs
        C[: other.degree + 1] = C[: other.degree + 1] + other.coeffs
        return PolyMatrix(C)

    def __neg__(self):
        return PolyMatrix(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    @property
    def T(self):
        return PolyMatrix(np.transpose(self.coeffs, (0, 2, 1)))

    def hstack(self, other):
        d = max(self.degree, other.degree)
        A = zeros((d + 1,) + self.shape)
        A[: self.degree + 1] = self.coeffs
        B = zeros((d + 1,) + other.shape)
        B[: other.degree + 1] = other.coeffs
        return PolyMatrix(np.concatenate([A, B], axis=2))

    def is_zero(self):
        return all(v == 0 for v in self.coeffs.flat)

    def is_symmetric(self):
        return all(np.array_equal(C, C.T) for C in self.coeffs)


def scalar_poly_eval(coeffs, t):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _interpolate(xs, ys):
    """Coefficients (low degree first) of the interpolating polynomial."""
    n = len(xs)
    # Newton divided differences
    dd = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j])
    coeffs = [Fraction(0)] * n
    basis = [Fraction(1)]
    for i in range(n):
        for k, b in enumerate(basis):
            coeffs[k] += dd[i] * b
        # basis *= (t - xs[i])
        nb = [Fraction(0)] * (len(basis) + 1)
        for k, b in enumerate(basis):
            nb[k + 1] += b
            nb[k] -= xs[i] * b
        basis = nb
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def det_poly(P: PolyMatrix):
    """Exact coefficients of det P(t), low degree first."""
    m = P.shape[0]
    if P.shape != (m, m):
        raise DimensionMismatch("det of a non-square polynomial matrix")
    bound = m * P.degree
    xs = [Fraction(k) for k in range(bound + 1)]
    return _interpolate(xs, [det(P(x)) for x in xs])


@dataclass(frozen=True)
class RootBracket:
    """A real root: exact when rational (lo == hi == value), else an isolating interval."""
    lo: Fraction
    hi: Fraction
    value: Fraction | None

    @property
    def rational(self):
        return self.value is not None

    def approx(self):
        return float(self.value) if self.value is not None else float((self.lo + self.hi) / 2)


_T = sympy.Symbol("t")


def _to_sympy_poly(coeffs):
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], _T, domain="QQ")


def _q(x):
    return Fraction(int(x.p), int(x.q))


def real_roots(coeffs, a=None, b=None):
    """Distinct real roots of an exact polynomial lying in [a, b] (closed).

    Rational roots are returned exactly; irrational ones as isolating
    intervals with rational endpoints that exclude a, b and every other root.
    Raises NonIsolated for the zero polynomial.
    """
    coeffs = [frac(c) for c in coeffs]
    if all(c == 0 for c in coeffs):
        raise NonIsolated("polynomial vanishes identically")
    a = None if a is None else frac(a)
    b = None if b is None else frac(b)
    p = _to_sympy_poly(coeffs)
    if p.degree() <= 0:
        return []
    p = p.sqf_part()
    _, factors = p.factor_list()
    rational = []
    others = []
    for f, _m in factors:
        if f.degree() == 1:
            c1, c0 = f.all_coeffs()
            rational.append(_q(-c0 / c1))
        else:
            others.append(f)
    brackets = []
    for f in others:
        for (lo, hi), _m in f.intervals():
            brackets.append([f, _q(lo), _q(hi)])
    marks = list(rational) + [x for x in (a, b) if x is not None]

    def conflicts(idx):
        _, lo, hi = brackets[idx]
        if any(lo <= x <= hi for x in marks):
            return True
        for j, (_, l2, h2) in enumerate(brackets):
            if j != idx and not (h2 < lo or l2 > hi):
                return True
        return False

    for _ in range(200):
        bad = [i for i in range(len(brackets)) if conflicts(i)]
        if not bad:
            break
        for i in bad:
            f, lo, hi = brackets[i]
            nlo, nhi = f.refine_root(sympy.Rational(lo.numerator, lo.denominator),
                                     sympy.Rational(hi.numerator, hi.denominator),
                                     eps=sympy.Rational((hi - lo).numerator, (hi - lo).denominator) / 4)
            brackets[i] = [f, _q(nlo), _q(nhi)]
    else:
        raise NonIsolated("failed to separate real roots")
    out = []
    for r in rational:
        if (a is None or r >= a) and (b is None or r <= b):
            out.append(RootBracket(r, r, r))
    for _, lo, hi in brackets:
        if (a is None or lo > a) and (b is None or hi < b):
            out.append(RootBracket(lo, hi, None))
    out.sort(key=lambda r: r.lo)
    return out


def count_distinct_roots(coeffs, lo, hi):
    """Number of distinct real roots in the closed interval [lo, hi]."""
    coeffs = [frac(c) for c in coeffs]
    p = _to_sympy_poly(coeffs).sqf_part()
    if p.degree() <= 0:
        return 0
    return int(p.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                             sympy.Rational(hi.numerator, hi.denominator)))


def isolating_radius(coeffs, t0, start=Fraction(1, 2)):
    """A rational eps > 0 such that t0 is the only root in [t0 - eps, t0 + eps]."""
    t0 = frac(t0)
    eps = frac(start)
    for _ in range(400):
        if count_distinct_roots(coeffs, t0 - eps, t0 + eps) <= 1:
            return eps
        eps /= 2
    raise NonIsolated("could not isolate root")
