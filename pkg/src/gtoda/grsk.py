"""Continuous-time geometric RSK: path operators, the full mapping from a
path to a triangle-valued path, insertion into an arbitrary initial
triangle, the matrix-valued path, and the non-intersecting-path
Monte-Carlo oracle for solid minors.
"""
import math

import numpy as np

from . import _core, matrixcore
from .triangle import Triangle, row_offset, tri_size


class SampledPath:
    """Piecewise-linear path on a strictly increasing grid starting at 0,
    with value 0 at time 0."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float).reshape(-1)
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != grid.shape[0]:
            raise ValueError("values must have shape (len(grid), n)")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing and start at 0")
        if not np.all(np.isfinite(values[1:])):
            raise ValueError("path values must be finite")
        self.grid = grid
        self.values = values

    @property
    def n(self):
        return self.values.shape[1]

    @classmethod
    def from_function(cls, fn, t_end, num, n=None):
        """Sample a function t -> R^n on a uniform grid (fn(0) must be 0)."""
        grid = np.linspace(0.0, t_end, num + 1)
        vals = np.array([np.atleast_1d(fn(t)) for t in grid], dtype=float)
        return cls(grid, vals)

    def index_of(self, t, tol=1e-12):
        j = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[j] - t) > tol:
            raise ValueError(f"t={t} is not a grid point")
        return j

    def at(self, t):
        """Piecewise-linear interpolation."""
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, self.grid, self.values[:, c])
                         for c in range(self.n)], axis=-1)

    def copy(self):
        return SampledPath(self.grid.copy(), self.values.copy())


def p_op(path, i):
    """Path operator on coordinates (i, i+1): shift by the log of the
    running integral of e^{eta_{i+1} - eta_i}.

    The returned path is singular at t=0 (value -inf/+inf at grid point 0);
    use it for t > 0 only.
    """
    if not 1 <= i <= path.n - 1:
        raise IndexError(f"p_op index out of range: i={i}, n={path.n}")
    g = _log_integrand(path, i)
    log_int = _core.log_trap_cumint(g, np.diff(path.grid))
    vals = path.values.copy()
    with np.errstate(invalid="ignore"):  # inf - inf only at grid point 0
        vals[:, i - 1] += log_int
        vals[:, i] -= log_int
    return _raw_path(path.grid, vals)


def _log_integrand(path, i):
    """Log-integrand of the (i, i+1) operator.  Compositions of
    operators carry opposite infinities at grid point 0 whose difference
    has a finite limit; replace a non-finite (or +inf) first sample by
    linear extrapolation so the first trapezoid segment stays O(h^2).
    A genuine -inf sample (vanishing integrand) is kept."""
    g = path.values[:, i] - path.values[:, i - 1]
    if g.shape[0] >= 3 and not (np.isfinite(g[0]) or g[0] == -np.inf):
        g = g.copy()
        g[0] = 2.0 * g[1] - g[2]
    return g


def _raw_path(grid, values):
    """Build a SampledPath without the finite-value check (operator
    outputs are -inf/+inf at t=0 by design)."""
    p = SampledPath.__new__(SampledPath)
    p.grid = np.asarray(grid, dtype=float)
    p.values = np.asarray(values, dtype=float)
    return p


def p_op_r(path, i, r):
    """Regularized path operator: the log term is log[e^{-r} + integral],
    equal to -r at t=0."""
    if not 1 <= i <= path.n - 1:
        raise IndexError(f"p_op_r index out of range: i={i}, n={path.n}")
    g = _log_integrand(path, i)
    log_int = np.logaddexp(-r, _core.log_trap_cumint(g, np.diff(path.grid)))
    vals = path.values.copy()
    vals[:, i - 1] += log_int
    vals[:, i] -= log_int
    return _raw_path(path.grid, vals)


class TrianglePath:
    """Triangle-valued path on a grid; flat row-major triangle layout."""

    __slots__ = ("grid", "flats", "n")

    def __init__(self, grid, flats, n):
        self.grid = np.asarray(grid, dtype=float)
        self.flats = np.asarray(flats, dtype=float)
        self.n = n

    def index_of(self, t, tol=1e-12):
        j = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[j] - t) > tol:
            raise ValueError(f"t={t} is not a grid point")
        return j

    def triangle_at(self, t):
        return Triangle(self.n, self.flats[self.index_of(t)])

    def bottom_at(self, t):
        j = self.index_of(t)
        return self.flats[j, row_offset(self.n):].copy()


def pi_n(path):
    """Full geometric RSK of a path started from the zero triangle (the
    matrix start whose solid minors are all 1): equivalent to inserting
    into the all-zero triangle, so the value at t=0 is finite and the
    n=2 bottom row is (log(1+t), -log(1+t)) for a flat path."""
    return pi_xi(path, Triangle(path.n))


def pi_n_singular(path):
    """Scale-invariant geometric RSK composition without regularization:
    row m of the output triangle is the first m coordinates of the m-th
    composed path.  Values at grid point 0 are singular (+-inf)."""
    n = path.n
    K = path.grid.shape[0]
    flats = np.empty((K, tri_size(n)))
    current = path
    flats[:, 0] = current.values[:, 0]
    for m in range(2, n + 1):
        for i in range(m - 1, 0, -1):
            current = p_op(current, i)
        flats[:, row_offset(m):row_offset(m + 1)] = current.values[:, :m]
    return TrianglePath(path.grid, flats, n)


def insertion_offsets(xi):
    """Row-sum offsets mu_m and partial-sum offsets r^m_k of an initial
    triangle."""
    n = xi.n
    mu = np.empty(n)
    mu[0] = xi.x(1, 1)
    for m in range(2, n + 1):
        mu[m - 1] = np.sum(xi.row(m)) - np.sum(xi.row(m - 1))
    r = {}
    for m in range(2, n + 1):
        for k in range(2, m + 1):
            r[(m, k)] = float(np.sum(xi.row(m - 1)[:k - 1])
                              - np.sum(xi.row(m)[:k - 1]))
    return mu, r


def pi_xi(path, xi):
    """Insert a path into an arbitrary initial triangle: regularized
    operators with offsets read off the initial triangle.  The value at
    t=0 is the initial triangle itself."""
    n = path.n
    if xi.n != n:
        raise ValueError("path and initial triangle dimension mismatch")
    mu, r = insertion_offsets(xi)
    K = path.grid.shape[0]
    current = _raw_path(path.grid, path.values + mu)
    flats = np.empty((K, tri_size(n)))
    flats[:, 0] = current.values[:, 0]
    for m in range(2, n + 1):
        for i in range(m - 1, 0, -1):
            current = p_op_r(current, i, r[(m, i + 1)])
        flats[:, row_offset(m):row_offset(m + 1)] = current.values[:, :m]
    return TrianglePath(path.grid, flats, n)


def b_path_grid(path):
    """Matrix-valued geometric RSK path: log-entries of b(t) on the whole
    grid, shape (K+1, n, n) after exponentiation.  b(0) = I."""
    n = path.n
    K = path.grid.shape[0]
    dt = np.diff(path.grid)
    NEG_INF = -np.inf
    logb = np.full((n, n, K), NEG_INF)
    for i in range(n):
        logb[i, i] = path.values[:, i]
    for span in range(1, n):
        for i in range(n - span):
            j = i + span
            integrand = logb[i + 1, j] - path.values[:, i]
            logb[i, j] = path.values[:, i] + _core.log_trap_cumint(integrand, dt)
    with np.errstate(over="raise"):
        b = np.exp(np.transpose(logb, (2, 0, 1)))
    return b


def b_path(path, t):
    """b(t) at a grid point t."""
    j = path.index_of(t)
    return b_path_grid(path)[j]


def b_ode(eta_dot, t_grid, b0=None):
    """RK4 integration of the linear matrix evolution driven by the path
    velocity: db/dt = eps(eta_dot(t)) b.  Cross-check oracle for b_path
    and the flows started from arbitrary initial b."""
    t_grid = np.asarray(t_grid, dtype=float)
    n = np.atleast_1d(eta_dot(t_grid[0])).shape[0]
    b = np.eye(n) if b0 is None else np.array(b0, dtype=float)
    out = np.empty((t_grid.shape[0], n, n))
    out[0] = b
    rhs = lambda t, y: matrixcore.epsilon_matrix(eta_dot(t)) @ y
    for j in range(t_grid.shape[0] - 1):
        t, h = t_grid[j], t_grid[j + 1] - t_grid[j]
        k1 = rhs(t, b)
        k2 = rhs(t + h / 2, b + h / 2 * k1)
        k3 = rhs(t + h / 2, b + h / 2 * k2)
        k4 = rhs(t + h, b + h * k3)
        b = b + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = b
    return out


def _path_energy(path, start_level, jumps, t):
    """E_eta of a down-right path from level start_level at time 0 to
    level start_level - J at time t, with ascending jump times (S, J)."""
    S, J = jumps.shape
    epochs = np.concatenate([np.zeros((S, 1)), jumps, np.full((S, 1), t)], axis=1)
    E = np.zeros(S)
    for c in range(J + 1):
        level = start_level - c  # 1-based coordinate
        col = level - 1
        v1 = np.interp(epochs[:, c + 1], path.grid, path.values[:, col])
        v0 = np.interp(epochs[:, c], path.grid, path.values[:, col])
        E += v1 - v0
    return E


def kmg_minor_oracle(path, t, m, k, samples=10000, seed=0, chunk=200000):
    """Monte-Carlo estimate of the k-tuple non-intersecting down-right
    path integral that represents the solid minor Delta^m_k(b(t)).

    Paths l = 1..k run from level m-k+l down to level l; jump-time vectors
    are sampled uniformly in their simplices and weighted by the
    exponential path energy, with a strict-ordering indicator evaluated
    just after every jump epoch.  Returns (estimate, standard_error).
    """
    if not (1 <= k <= m <= path.n):
        raise IndexError(f"kmg indices out of range: m={m}, k={k}, n={path.n}")
    J = m - k
    volume = (t ** J / math.factorial(J)) ** k
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        S = min(chunk, samples - done)
        jumps = [np.sort(rng.uniform(0.0, t, size=(S, J)), axis=1) for _ in range(k)]
        w = np.zeros(S)
        for l in range(1, k + 1):
            w += _path_energy(path, m - k + l, jumps[l - 1], t)
        w = np.exp(w)
        if k > 1 and J > 0:
            ok = np.ones(S, dtype=bool)
            # check strict level ordering just after every jump epoch
            epochs = np.concatenate(jumps, axis=1)
            for l in range(k - 1):
                lo = (m - k + l + 1) - (jumps[l][:, :, None] <= epochs[:, None, :]).sum(axis=1)
                hi = (m - k + l + 2) - (jumps[l + 1][:, :, None] <= epochs[:, None, :]).sum(axis=1)
                ok &= np.all(hi > lo, axis=1)
            w = w * ok
        total += float(np.sum(w))
        total_sq += float(np.sum(w * w))
        done += S
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    est = volume * mean
    se = volume * math.sqrt(var / samples)
    return est, se
