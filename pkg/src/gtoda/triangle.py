"""Triangles (log-scale Gelfand-Tsetlin-type arrays), the tridiagonal
Hessenberg Lax matrix, and the structured maps between triangles, totally
positive upper-triangular matrices and Lax matrices.
"""
import numpy as np

from . import matrixcore
from .errors import DomainError

#: reject triangles whose entries would overflow exp()
ENTRY_LIMIT = 700.0


def row_offset(m):
    """Flat offset of row m (1-based) in the row-major triangle layout."""
    return m * (m - 1) // 2


def tri_size(n):
    return n * (n + 1) // 2


class Triangle:
    """Array x^m_i, 1 <= i <= m <= n, stored flat row-major.

    Entries are log-scale coordinates; all finite.
    """

    __slots__ = ("n", "flat")

    def __init__(self, n, flat=None):
        self.n = int(n)
        if flat is None:
            self.flat = np.zeros(tri_size(self.n))
        else:
            flat = np.asarray(flat, dtype=float).reshape(-1)
            if flat.shape[0] != tri_size(self.n):
                raise ValueError(
                    f"flat size {flat.shape[0]} != {tri_size(self.n)} for n={self.n}")
            self.flat = flat.copy()
        if not np.all(np.isfinite(self.flat)):
            raise ValueError("triangle entries must be finite")

    @classmethod
    def from_rows(cls, rows):
        rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
        n = len(rows)
        for m, r in enumerate(rows, start=1):
            if r.shape[0] != m:
                raise ValueError(f"row {m} must have {m} entries, got {r.shape[0]}")
        return cls(n, np.concatenate(rows))

    @classmethod
    def from_flat(cls, flat):
        flat = np.asarray(flat, dtype=float).reshape(-1)
        n = int((np.sqrt(8 * flat.shape[0] + 1) - 1) / 2 + 0.5)
        return cls(n, flat)

    def row(self, m):
        """Row m (1-based) as a view."""
        return self.flat[row_offset(m):row_offset(m) + m]

    def x(self, m, i):
        """Entry x^m_i, both indices 1-based."""
        if not (1 <= i <= m <= self.n):
            raise IndexError(f"triangle index out of range: m={m}, i={i}")
        return float(self.flat[row_offset(m) + i - 1])

    @property
    def bottom(self):
        return self.row(self.n).copy()

    def rows(self):
        return [self.row(m).copy() for m in range(1, self.n + 1)]

    def copy(self):
        return Triangle(self.n, self.flat)

    def __eq__(self, other):
        return (isinstance(other, Triangle) and self.n == other.n
                and np.array_equal(self.flat, other.flat))

    def __repr__(self):
        rows = ", ".join(str(list(np.round(self.row(m), 6))) for m in range(1, self.n + 1))
        return f"Triangle(n={self.n}, rows=[{rows}])"

    def to_json(self):
        return {"n": self.n, "rows": [[float(v) for v in self.row(m)]
                                      for m in range(1, self.n + 1)]}

    @classmethod
    def from_json(cls, obj):
        if len(obj["rows"]) != obj["n"]:
            raise ValueError("inconsistent triangle JSON")
        return cls.from_rows(obj["rows"])


class LaxMatrix:
    """Tridiagonal Hessenberg matrix: diagonal p, subdiagonal -q (q > 0),
    superdiagonal fixed to 1."""

    __slots__ = ("p", "q")

    def __init__(self, p, q):
        self.p = np.atleast_1d(np.asarray(p, dtype=float)).copy()
        self.q = np.asarray(q, dtype=float).reshape(-1).copy()
        n = self.p.shape[0]
        if self.q.shape[0] != max(n - 1, 0):
            raise ValueError("q must have length n-1")
        if np.any(self.q <= 0):
            raise DomainError("Lax matrix requires q_i > 0")

    @property
    def n(self):
        return self.p.shape[0]

    def to_matrix(self):
        n = self.n
        M = np.diag(self.p)
        if n > 1:
            M += np.diag(np.ones(n - 1), k=1)
            M -= np.diag(self.q, k=-1)
        return M

    @classmethod
    def from_matrix(cls, M, tol=1e-9):
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        if n > 1:
            if np.max(np.abs(np.diag(M, k=1) - 1.0)) > tol:
                raise ValueError("superdiagonal must be 1")
            off = np.abs(M - np.diag(np.diag(M))
                         - np.diag(np.diag(M, k=1), k=1)
                         - np.diag(np.diag(M, k=-1), k=-1))
            if off.max() > tol:
                raise ValueError("matrix is not tridiagonal")
        q = -np.diag(M, k=-1) if n > 1 else np.zeros(0)
        return cls(np.diag(M).copy(), q)

    def __repr__(self):
        return f"LaxMatrix(p={list(np.round(self.p, 6))}, q={list(np.round(self.q, 6))})"


def _check_range(X):
    if np.max(np.abs(X.flat)) > ENTRY_LIMIT:
        raise OverflowError("triangle entry exceeds exp-safe range")


def f_map(b):
    """Triangle coordinates of a totally positive upper-triangular b:
    partial row sums of x^m are the log solid minors."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if np.any(np.abs(np.tril(b, k=-1)) > 0):
        raise DomainError("input must be upper triangular")
    flat = np.empty(tri_size(n))
    for m in range(1, n + 1):
        prev = 0.0
        for k in range(1, m + 1):
            d = matrixcore.minor(b, m, k)
            if not d > 0:
                raise DomainError(f"non-positive minor Delta^{m}_{k} = {d}")
            s = np.log(d)
            flat[row_offset(m) + k - 1] = s - prev
            prev = s
    return Triangle(n, flat)


def bidiagonal_factor(n, m, w):
    """E_m(w): identity in the leading (m-1) block, then the bidiagonal
    block with diagonal w and superdiagonal 1."""
    w = np.asarray(w, dtype=float)
    k = w.shape[0]
    if k != n - m + 1:
        raise ValueError("w must have length n-m+1")
    E = np.eye(n)
    E[m - 1:, m - 1:] = matrixcore.epsilon_matrix(w)
    return E


def w_params(X):
    """Positive parameters of the bidiagonal factorization, one vector
    w^m of length n-m+1 per factor."""
    n = X.n
    out = []
    for m in range(1, n + 1):
        w = np.empty(n - m + 1)
        w[0] = np.exp(X.x(m, 1))
        for i in range(2, n - m + 2):
            w[i - 1] = np.exp(X.x(m + i - 1, i) - X.x(m + i - 2, i - 1))
        out.append(w)
    return out


def f_inv(X):
    """Inverse of f_map: assemble b = E_1(w^1) ... E_n(w^n)."""
    _check_range(X)
    n = X.n
    b = np.eye(n)
    for m, w in enumerate(w_params(X), start=1):
        b = b @ bidiagonal_factor(n, m, w)
    return b


def u_params(X):
    """Lower-triangular parameters u^m_i = e^{x^{m+1}_{i+1} - x^m_i} and
    the diagonal D_ii = e^{x^n_i} of the Gauss decomposition of b*wbar0."""
    n = X.n
    U = [np.array([np.exp(X.x(m + 1, i + 1) - X.x(m, i)) for i in range(1, m + 1)])
         for m in range(1, n)]
    D = np.exp(X.row(n))
    return U, D


def elementary_lower(n, i, a):
    """l_i(a) = I + a f_i."""
    L = np.eye(n)
    L[i, i - 1] = a
    return L


def lower_factor(n, m, u):
    """L_m(u) = l_m(u_m) l_{m-1}(u_{m-1}) ... l_1(u_1)."""
    L = np.eye(n)
    for i in range(m, 0, -1):
        L = L @ elementary_lower(n, i, u[i - 1])
    return L


def h_map(X):
    """Unit-lower-triangular L = L_1(u^1) ... L_{n-1}(u^{n-1})."""
    _check_range(X)
    n = X.n
    U, _ = u_params(X)
    L = np.eye(n)
    for m in range(1, n):
        L = L @ lower_factor(n, m, U[m - 1])
    return L


def g_lambda(X, lam):
    """Lax matrix of a triangle: q from bottom-row gaps, p by the row
    recursion with base p^1_1 = lambda_1."""
    _check_range(X)
    n = X.n
    lam = np.asarray(lam, dtype=float)
    if lam.shape[0] != n:
        raise ValueError("lambda must have length n")
    xn = X.row(n)
    q = np.exp(np.diff(xn))
    p = np.array([lam[0]])
    for m in range(2, n + 1):
        pm = np.empty(m)
        pm[0] = p[0] + np.exp(X.x(m, 2) - X.x(m - 1, 1))
        pm[m - 1] = lam[m - 1] - np.exp(X.x(m, m) - X.x(m - 1, m - 1))
        for i in range(2, m):
            pm[i - 1] = (p[i - 1] + np.exp(X.x(m, i + 1) - X.x(m - 1, i))
                         - np.exp(X.x(m, i) - X.x(m - 1, i - 1)))
        p = pm
    return LaxMatrix(p, q)
