"""Symmetric bilinear form algebra over exact rationals or floats.

Matrices are numpy arrays.  An ``object`` array of ``Fraction`` entries is the
exact kind; a ``float64`` array is the float kind.  Every routine dispatches on
the kind of its input and never mixes the two.

Float rank decisions use a single policy: a singular value (or eigenvalue
magnitude) counts as zero when it is below ``rel_tol * max(smax, 1)``.  In
strict mode a value inside ``(tol, 10 tol)`` raises :class:`AmbiguousRank`.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AmbiguousRank, DimensionMismatch

DEFAULT_REL_TOL = 1e-9

_policy = contextvars.ContextVar("maslovkit_float_policy", default=(DEFAULT_REL_TOL, False))


@contextlib.contextmanager
def float_policy(rel_tol=None, strict=None):
    """Temporarily change the float zero tolerance and/or strict mode."""
    cur_tol, cur_strict = _policy.get()
    token = _policy.set((cur_tol if rel_tol is None else float(rel_tol),
                         cur_strict if strict is None else bool(strict)))
    try:
        yield
    finally:
        _policy.reset(token)


def get_policy():
    return _policy.get()


# ---------------------------------------------------------------- scalars

def frac(x) -> Fraction:
    """Convert a scalar (int, float, str "p/q", Fraction, sympy Rational) exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if hasattr(x, "p") and hasattr(x, "q"):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def is_exact(M) -> bool:
    return getattr(M, "dtype", None) == object


def exact(M):
    """Exact (Fraction object) copy of an array-like."""
    M = _unwrap(M)
    A = np.asarray(M, dtype=object)
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        out[idx] = frac(v)
    return out


def floaty(M):
    """Float copy of an array-like (exact entries are rounded)."""
    M = _unwrap(M)
    if isinstance(M, np.ndarray) and M.dtype != object:
        return M.astype(float)
    A = np.asarray(M, dtype=object)
    out = np.empty(A.shape, dtype=float)
    for idx, v in np.ndenumerate(A):
        out[idx] = float(frac(v)) if isinstance(v, str) else float(v)
    return out


def _has_float(obj) -> bool:
    if isinstance(obj, (float, np.floating)):
        return True
    if isinstance(obj, (list, tuple)):
        return any(_has_float(o) for o in obj)
    if isinstance(obj, np.ndarray):
        if obj.dtype == object:
            return any(isinstance(v, (float, np.floating)) for v in obj.flat)
        return obj.dtype.kind == "f"
    return False


def _unwrap(M):
    if isinstance(M, SymForm):
        return M.mat
    if isinstance(M, Subspace):
        return M.basis
    return M


def as_array(M, exact_kind=None):
    """Normalize to an exact or float 2-D/1-D array.

    With ``exact_kind=None`` the kind is inferred: anything containing a
    Python float (or a float ndarray) is float, everything else is exact.
    """
    M = _unwrap(M)
    if exact_kind is None:
        exact_kind = not _has_float(M)
    if exact_kind:
        if is_exact(M) and all(isinstance(v, Fraction) for v in M.flat):
            return M
        return exact(M)
    return floaty(M)


def identity(n, exact_kind=True):
    if exact_kind:
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = Fraction(int(i == j))
        return out
    return np.eye(n)


def zeros(shape, exact_kind=True):
    if exact_kind:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def like(M, data):
    """Cast ``data`` to the kind of ``M``."""
    return as_array(data, is_exact(M))


# ---------------------------------------------------------- float policy

def _float_tol(s_max):
    rel, _ = _policy.get()
    return rel * max(float(s_max), 1.0)


def _count_nonzero(values, s_max):
    """Number of values above tolerance, honoring strict mode."""
    tol = _float_tol(s_max)
    _, strict = _policy.get()
    a = np.abs(np.asarray(values, dtype=float))
    if strict and np.any((a > tol) & (a < 10 * tol)):
        raise AmbiguousRank(f"value within ambiguity band ({tol:.3g}, {10 * tol:.3g})")
    return int(np.sum(a > tol)), tol


# ------------------------------------------------------ exact elimination

def _rref_lists(rows, ncols):
    rows = [list(r) for r in rows]
    piv = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        pr = rows[r]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        piv.append(c)
        r += 1
    return rows, piv


def rref(M):
    """Reduced row echelon form (exact kind only): (R, pivot_columns)."""
    A = as_array(M, True)
    if A.ndim != 2:
        raise DimensionMismatch("rref needs a matrix")
    rows, piv = _rref_lists(A.tolist(), A.shape[1])
    R = np.array(rows, dtype=object).reshape(A.shape)
    return R, piv


def rank(M) -> int:
    M = _unwrap(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    if is_exact(M):
        return len(_rref_lists(M.tolist(), M.shape[1])[1])
    s = np.linalg.svd(M, compute_uv=False)
    return _count_nonzero(s, s[0] if len(s) else 0.0)[0]


def nullspace(M):
    """Basis (columns) of the right null space."""
    M = _unwrap(M)
    m, n = M.shape
    if is_exact(M):
        if m == 0:
            return identity(n, True)
        rows, piv = _rref_lists(M.tolist(), n)
        free = [j for j in range(n) if j not in piv]
        out = zeros((n, len(free)), True)
        for k, f in enumerate(free):
            out[f, k] = Fraction(1)
            for i, p in enumerate(piv):
                out[p, k] = -rows[i][f]
        return out
    if m == 0:
        return np.eye(n)
    _, s, vh = np.linalg.svd(M)
    r = _count_nonzero(s, s[0] if len(s) else 0.0)[0]
    return vh[r:].T.conj().copy()


def colspace(M):
    """Basis of the column span."""
    M = _unwrap(M)
    if M.shape[1] == 0:
        return M.copy()
    if is_exact(M):
        _, piv = _rref_lists(M.tolist(), M.shape[1])
        return M[:, piv].copy()
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    r = _count_nonzero(s, s[0] if len(s) else 0.0)[0]
    return u[:, :r].copy()


def canonical_basis(M):
    """Basis of span(M) in reduced column echelon form (exact), orthonormal (float)."""
    M = _unwrap(M)
    if not is_exact(M):
        return colspace(M)
    if M.shape[1] == 0:
        return M.copy()
    rows, piv = _rref_lists(M.T.tolist(), M.shape[0])
    out = np.array(rows[: len(piv)], dtype=object).reshape(len(piv), M.shape[0]).T
    return out.copy()


def det(M):
    M = _unwrap(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch("det of non-square matrix")
    if not is_exact(M):
        return float(np.linalg.det(M)) if n else 1.0
    rows = [list(r) for r in M.tolist()]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            d = -d
        pv = rows[c][c]
        d *= pv
        for i in range(c + 1, n):
            f = rows[i][c]
            if f != 0:
                f = f / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return d


def inverse(M):
    M = _unwrap(M)
    n = M.shape[0]
    if not is_exact(M):
        return np.linalg.inv(M)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M.tolist())]
    rows, piv = _rref_lists(aug, 2 * n)
    if piv[:n] != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular")
    return np.array([r[n:] for r in rows], dtype=object).reshape(n, n)


def solve(A, b):
    """Minimum-norm solution of ``A x = b`` or ``None`` if inconsistent.

    ``b`` may be a vector or a matrix of right-hand sides (then all columns
    must be solvable).
    """
    A = _unwrap(A)
    b = _unwrap(b)
    vec = b.ndim == 1
    B = b.reshape(-1, 1) if vec else b
    m, n = A.shape
    if is_exact(A):
        k = B.shape[1]
        aug = [list(A[i]) + list(B[i]) for i in range(m)]
        rows, piv = _rref_lists(aug, n + k)
        if any(p >= n for p in piv):
            return None
        X = zeros((n, k), True)
        for i, p in enumerate(piv):
            for j in range(k):
                X[p, j] = rows[i][n + j]
        N = nullspace(A)
        if N.shape[1]:
            # project the echelon solution onto the row space
            G = N.T @ N
            X = X - N @ (inverse(G) @ (N.T @ X))
        return X[:, 0] if vec else X
    X, *_ = np.linalg.lstsq(A, B, rcond=None)
    scale = max(np.abs(A).max(initial=0.0), 1.0) * max(np.abs(X).max(initial=0.0), 1.0)
    if np.abs(A @ X - B).max(initial=0.0) > 1e3 * _float_tol(scale) + _float_tol(np.abs(B).max(initial=0.0)):
        return None
    return X[:, 0] if vec else X


def intersect(U, V):
    """Basis of span(U) ∩ span(V)."""
    U, V = _unwrap(U), _unwrap(V)
    if U.shape[1] == 0 or V.shape[1] == 0:
        return U[:, :0].copy()
    N = nullspace(np.hstack([U, -V]))
    return colspace(U @ N[: U.shape[1]])


def orth_complement(U):
    """Euclidean orthogonal complement of span(U)."""
    U = _unwrap(U)
    if U.shape[1] == 0:
        return identity(U.shape[0], is_exact(U))
    return nullspace(U.T)


def span_equal(U, V) -> bool:
    U, V = _unwrap(U), _unwrap(V)
    ru, rv = rank(U), rank(V)
    return ru == rv and rank(np.hstack([U, V])) == ru


def span_contains(U, V) -> bool:
    """True when span(V) ⊆ span(U)."""
    U, V = _unwrap(U), _unwrap(V)
    return rank(np.hstack([U, V])) == rank(U)


# ------------------------------------------------------------ data types

@dataclass(frozen=True)
class Inertia:
    n_plus: int
    n_minus: int
    n_zero: int

    def __post_init__(self):
        assert min(self.n_plus, self.n_minus, self.n_zero) >= 0

    @property
    def dim(self):
        return self.n_plus + self.n_minus + self.n_zero

    @property
    def signature(self):
        return self.n_plus - self.n_minus

    @property
    def ext_coindex(self):
        return self.n_plus + self.n_zero

    @property
    def ext_index(self):
        return self.n_minus + self.n_zero

    def as_dict(self):
        return {"n_plus": self.n_plus, "n_minus": self.n_minus, "n_zero": self.n_zero,
                "signature": self.signature, "ext_coindex": self.ext_coindex,
                "ext_index": self.ext_index}


class SymForm:
    """A symmetric bilinear form on R^dim given by its matrix."""

    __slots__ = ("mat",)

    def __init__(self, mat, exact_kind=None):
        if isinstance(mat, SymForm):
            mat = mat.mat
        A = as_array(mat, exact_kind)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"form matrix must be square, got {A.shape}")
        if is_exact(A):
            if not np.array_equal(A, A.T):
                raise ValueError("exact form matrix is not symmetric")
        else:
            asym = np.abs(A - A.T).max(initial=0.0)
            if asym > 1e-6 * max(np.abs(A).max(initial=0.0), 1.0):
                raise ValueError(f"float form matrix is far from symmetric ({asym:.3g})")
            A = (A + A.T) / 2
        self.mat = A

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def exact(self):
        return is_exact(self.mat)

    def __call__(self, u, v):
        return u @ self.mat @ v

    def __neg__(self):
        return SymForm(-self.mat)

    def __eq__(self, other):
        return isinstance(other, SymForm) and self.mat.shape == other.mat.shape and \
            np.array_equal(self.mat, other.mat)

    def __repr__(self):
        return f"SymForm({self.mat.tolist()!r})"


class Subspace:
    """A subspace of R^ambient_dim stored as a full-column-rank basis."""

    __slots__ = ("basis",)

    def __init__(self, basis, ambient_dim=None, check=True):
        if isinstance(basis, Subspace):
            basis = basis.basis
        B = as_array(basis) if not isinstance(basis, np.ndarray) else basis
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if ambient_dim is not None and B.shape[0] != ambient_dim:
            if B.size == 0:
                B = zeros((ambient_dim, 0), is_exact(B))
            else:
                raise DimensionMismatch("basis rows differ from ambient dimension")
        if check and B.shape[1] and rank(B) != B.shape[1]:
            raise ValueError("subspace basis is not of full column rank")
        self.basis = B

    @classmethod
    def span(cls, M):
        """Subspace spanned by the columns of M (dependent columns dropped)."""
        M = _unwrap(M)
        return cls(colspace(M), check=False)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim and \
            span_equal(self.basis, other.basis)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _mat(form):
    if isinstance(form, SymForm):
        return form.mat
    return SymForm(form).mat


# --------------------------------------------------------------- inertia

def congruence_diagonalize(M):
    """Exact symmetric elimination: returns (P, d) with P^T M P = diag(d)."""
    M = as_array(M, True)
    n = M.shape[0]
    A = [list(r) for r in M.tolist()]
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    remaining = list(range(n))
    d = [Fraction(0)] * n
    while remaining:
        i = next((k for k in remaining if A[k][k] != 0), None)
        if i is None:
            pair = next(((a, b) for a in remaining for b in remaining if a != b and A[a][b] != 0), None)
            if pair is None:
                break
            i, j = pair
            # basis change e_i -> e_i + e_j makes the (i, i) entry 2 A[i][j]
            for c in range(n):
                A[i][c] += A[j][c]
            for r in range(n):
                A[r][i] += A[r][j]
            for r in range(n):
                P[r][i] += P[r][j]
        p = A[i][i]
        remaining.remove(i)
        for r in remaining:
            f = A[i][r]
            if f == 0:
                continue
            f = f / p
            Ar, Ai = A[r], A[i]
            for c in range(n):
                Ar[c] -= f * Ai[c]
            for c in range(n):
                A[c][r] -= f * A[c][i]
            for c in range(n):
                P[c][r] -= f * P[c][i]
        d[i] = p
    Pm = np.array(P, dtype=object).reshape(n, n)
    return Pm, d


def inertia(form) -> Inertia:
    """Sign counts (n+, n-, n0) of a symmetric form."""
    A = _mat(form)
    n = A.shape[0]
    if n == 0:
        return Inertia(0, 0, 0)
    if is_exact(A):
        _, d = congruence_diagonalize(A)
        pos = sum(1 for x in d if x > 0)
        neg = sum(1 for x in d if x < 0)
        res = Inertia(pos, neg, n - pos - neg)
    else:
        ev = np.linalg.eigvalsh(A)
        smax = np.abs(ev).max()
        _, tol = _count_nonzero(ev, smax)
        pos = int(np.sum(ev > tol))
        neg = int(np.sum(ev < -tol))
        res = Inertia(pos, neg, n - pos - neg)
    assert res.n_plus + res.n_minus + res.n_zero == n
    return res


def negative_space(form) -> Subspace:
    """A maximal negative definite subspace (the negative eigenspace for floats)."""
    A = _mat(form)
    if is_exact(A):
        P, d = congruence_diagonalize(A)
        cols = [i for i, x in enumerate(d) if x < 0]
        return Subspace(P[:, cols], ambient_dim=A.shape[0], check=False)
    ev, vec = np.linalg.eigh(A)
    _, tol = _count_nonzero(ev, np.abs(ev).max() if len(ev) else 0.0)
    return Subspace(vec[:, ev < -tol], ambient_dim=A.shape[0], check=False)


# --------------------------------------------------------- form operations

def kernel_basis(form) -> Subspace:
    A = _mat(form)
    K = Subspace(nullspace(A), ambient_dim=A.shape[0], check=False)
    return K


def restrict(form, sub) -> SymForm:
    """basis^T · mat · basis."""
    A = _mat(form)
    B = sub.basis if isinstance(sub, Subspace) else as_array(sub, is_exact(A))
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"subspace ambient {B.shape[0]} != form dim {A.shape[0]}")
    return SymForm(B.T @ A @ B)


def pullback(form, mapping) -> SymForm:
    A = _mat(form)
    T = mapping if isinstance(mapping, np.ndarray) else as_array(mapping, is_exact(A))
    if T.shape[0] != A.shape[0]:
        raise DimensionMismatch("map rows must equal form dimension")
    return SymForm(T.T @ A @ T)


def _basis(x):
    return x.basis if isinstance(x, Subspace) else _unwrap(x)


def relative_dimension(v, w) -> int:
    """dim(W^perp ∩ V) - dim(W ∩ V^perp), Euclidean orthogonality."""
    V, W = _basis(v), _basis(w)
    if V.shape[0] != W.shape[0]:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    a = intersect(orth_complement(W), V).shape[1] if V.shape[1] else 0
    b = intersect(W, orth_complement(V)).shape[1] if W.shape[1] else 0
    return a - b


def b_orthogonal(form, w) -> Subspace:
    """{x : B(x, y) = 0 for all y in W}."""
    A = _mat(form)
    W = _basis(w)
    if W.shape[1] == 0:
        return Subspace(identity(A.shape[0], is_exact(A)), check=False)
    return Subspace(nullspace((A @ W).T), ambient_dim=A.shape[0], check=False)


def relative_index(form, w) -> int:
    """Index of ``form`` relative to W: relative dimension of its negative space w.r.t. W."""
    return relative_dimension(negative_space(form), w)


def relative_index_via_restrictions(form, w) -> int:
    """n^-(B restricted to the B-orthogonal of W) - n^+(B restricted to W)."""
    A = _mat(form)
    W = _basis(w)
    perp = b_orthogonal(A, W)
    return inertia(restrict(A, perp)).n_minus - inertia(restrict(A, W)).n_plus
