"""The convex potential on triangles with fixed bottom row, its
constrained minimizer, the induced potential on bottom rows and its
gradient, and the geometric Bender-Knuth involutions.
"""
import numpy as np
import scipy.linalg

from . import _core
from .errors import ConvergenceError
from .triangle import Triangle, row_offset, tri_size

GRAD_TOL = 1e-11
PURE_NEWTON_TOL = 1e-6
MAX_NEWTON_ITER = 200


def rho_vector(n):
    """(n-1, n-3, ..., 1-n)."""
    return np.array([n - 1 - 2 * i for i in range(n)], dtype=float)


def _exp_terms(n):
    """Flat index pairs (a, b) of every exponential weight e^{x_a - x_b}."""
    pairs = []
    for m in range(1, n):
        o, no = row_offset(m), row_offset(m + 1)
        for i in range(1, m + 1):
            pairs.append((no + i, o + i - 1))      # e^{x^{m+1}_{i+1} - x^m_i}
            pairs.append((o + i - 1, no + i - 1))  # e^{x^m_i - x^{m+1}_i}
    return pairs


def F_potential(X):
    """Sum of the exponential arrow weights of the triangle; 0 for n=1."""
    if X.n == 1:
        return 0.0
    x = X.flat
    return float(sum(np.exp(x[a] - x[b]) for a, b in _exp_terms(X.n)))


def _linear_coeffs(n, lam):
    """Gradient of the linear part of the lambda-tilted potential,
    over all triangle entries."""
    c = np.zeros(tri_size(n))
    for m in range(1, n + 1):
        o = row_offset(m)
        c[o:o + m] -= lam[m - 1]
        if m < n:
            c[o:o + m] += lam[m]
    return c


def F_lambda(X, lam):
    """Tilted potential: linear drift term plus the arrow-weight sum."""
    lam = np.asarray(lam, dtype=float)
    n = X.n
    lin = 0.0
    for m in range(1, n + 1):
        above = np.sum(X.row(m - 1)) if m > 1 else 0.0
        lin += lam[m - 1] * (above - np.sum(X.row(m)))
    return lin + F_potential(X)


def full_grad(X, lam):
    """Gradient of the tilted potential with respect to all entries."""
    n = X.n
    x = X.flat
    g = _linear_coeffs(n, np.asarray(lam, dtype=float))
    for a, b in _exp_terms(n):
        v = np.exp(x[a] - x[b])
        g[a] += v
        g[b] -= v
    return g


def interior_grad(X, lam):
    return full_grad(X, lam)[:tri_size(X.n) - X.n]


def interior_hessian(X, lam):
    """Hessian of the tilted potential in the interior entries (analytic;
    each exponential term contributes a 2x2 pattern)."""
    n = X.n
    n_int = tri_size(n) - n
    x = X.flat
    H = np.zeros((n_int, n_int))
    for a, b in _exp_terms(n):
        v = np.exp(x[a] - x[b])
        if a < n_int:
            H[a, a] += v
        if b < n_int:
            H[b, b] += v
        if a < n_int and b < n_int:
            H[a, b] -= v
            H[b, a] -= v
    return H


def lr_arrays(X):
    """The two one-sided arrow sums l^m_i, r^m_i for 1 <= i <= m < n."""
    n = X.n
    l, r = [], []
    for m in range(1, n):
        lm = np.empty(m)
        rm = np.empty(m)
        for i in range(1, m + 1):
            lv = np.exp(X.x(m + 1, i + 1) - X.x(m, i)) if i == m else (
                np.exp(X.x(m + 1, i + 1) - X.x(m, i))
                + np.exp(X.x(m - 1, i) - X.x(m, i)))
            rv = np.exp(X.x(m, i) - X.x(m + 1, i)) if i == 1 else (
                np.exp(X.x(m, i) - X.x(m + 1, i))
                + np.exp(X.x(m, i) - X.x(m - 1, i - 1)))
            lm[i - 1] = lv
            rm[i - 1] = rv
        l.append(lm)
        r.append(rm)
    return l, r


def critical_residual(X, lam):
    """max |lambda_m + l^m_i - lambda_{m+1} - r^m_i|; zero exactly on the
    balanced manifold."""
    lam = np.asarray(lam, dtype=float)
    if X.n == 1:
        return 0.0
    l, r = lr_arrays(X)
    res = 0.0
    for m in range(1, X.n):
        res = max(res, float(np.max(np.abs(lam[m - 1] + l[m - 1] - lam[m] - r[m - 1]))))
    return res


def _init_interior(x):
    """Fill rows above the bottom by downward averaging."""
    n = len(x)
    rows = [None] * n
    rows[n - 1] = np.asarray(x, dtype=float)
    for m in range(n - 1, 0, -1):
        below = rows[m]
        rows[m - 1] = 0.5 * (below[:-1] + below[1:])
    return Triangle.from_rows(rows)


def critical_point(x, lam, grad_tol=GRAD_TOL, max_iter=MAX_NEWTON_ITER):
    """Minimizer of the tilted potential over triangles with bottom row x:
    damped Newton with analytic gradient and Hessian."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = np.asarray(lam, dtype=float)
    n = x.shape[0]
    if lam.shape[0] != n:
        raise ValueError("x and lambda must have equal length")
    X = _init_interior(x)
    if n == 1:
        return X
    n_int = tri_size(n) - n
    for _ in range(max_iter):
        g = interior_grad(X, lam)
        # tolerances are relative to the size of the exponential weights:
        # the achievable gradient floor is machine epsilon times that scale
        scale = 1.0 + F_potential(X)
        if np.max(np.abs(g)) < grad_tol * scale:
            return X
        H = interior_hessian(X, lam)
        c, low = scipy.linalg.cho_factor(H)
        step = scipy.linalg.cho_solve((c, low), -g)
        if np.max(np.abs(g)) < PURE_NEWTON_TOL * scale:
            # quadratic basin: the predicted decrease is below the
            # floating-point resolution of F, so skip the line search
            trial = X.flat.copy()
            trial[:n_int] += step
            X = Triangle(n, trial)
            continue
        f0 = F_lambda(X, lam)
        alpha = 1.0
        while alpha > 1e-12:
            trial = X.flat.copy()
            trial[:n_int] += alpha * step
            Xt = Triangle(n, trial)
            if F_lambda(Xt, lam) <= f0 + 1e-4 * alpha * float(g @ step):
                X = Xt
                break
            alpha *= 0.5
        else:
            raise ConvergenceError("line search failed in critical_point")
    raise ConvergenceError(f"no convergence after {max_iter} Newton iterations")


def u_lambda(x, lam):
    """Value of the tilted potential at the constrained minimizer."""
    return F_lambda(critical_point(x, lam), lam)


def grad_u(x, lam):
    """Gradient of u in the bottom row, by envelope differentiation: the
    bottom-row partials of the tilted potential at the minimizer (the
    interior gradient vanishes there)."""
    X = critical_point(x, lam)
    return full_grad(X, lam)[tri_size(X.n) - X.n:]


def bender_knuth(X, m, i):
    """Geometric Bender-Knuth involution: x^m_i -> x^m_i + log(l/r)."""
    if not (1 <= i <= m < X.n):
        raise IndexError(f"bender_knuth indices out of range: m={m}, i={i}")
    l, r = lr_arrays(X)
    flat = X.flat.copy()
    flat[row_offset(m) + i - 1] += np.log(l[m - 1][i - 1] / r[m - 1][i - 1])
    return Triangle(X.n, flat)


def givental_identity_check(X, lam):
    """Check F(X) = <rho, bottom-row velocity> for balanced triangles."""
    lam = np.asarray(lam, dtype=float)
    n = X.n
    vel = _core.tri_field_rsk(X.flat[None, :], lam)[0]
    xdot_bottom = vel[row_offset(n):]
    lhs = F_potential(X)
    rhs = float(rho_vector(n) @ xdot_bottom)
    residual = abs(lhs - rhs)
    return {"check": "givental_identity", "F": lhs, "pairing": rhs,
            "max_residual": residual}


def singular_limit_offsets(N, lam):
    """Minimizer with bottom row -N*rho; its insertion offsets diverge
    like N(k-1), so insertion from it approaches the identity-start map."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0]
    return critical_point(-N * rho_vector(n), lam)
