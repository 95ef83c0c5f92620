"""Deterministic dynamics: the two triangle flows, the linear
upper-triangular flow and its conjugated triangle form, the tridiagonal
Lax flow by LDU factorization and by direct integration, and the
normal-form conjugation of a Lax matrix to the spectral-drift matrix.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _core, matrixcore, triangle as tri
from .critical import critical_residual
from .errors import FactorizationBlowUp, SpectrumError
from .grsk import TrianglePath
from .triangle import ENTRY_LIMIT, LaxMatrix, Triangle, row_offset, tri_size


@dataclass
class FlowConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    blowup_guard: float = matrixcore.PIVOT_FLOOR

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")


@dataclass
class FactorizationState:
    n_part: np.ndarray
    r_part: np.ndarray
    M0: LaxMatrix


def vf_dyn_rsk(X, lam):
    """Insertion-type vector field on triangles (top-down chained
    recursion in the velocities)."""
    lam = np.asarray(lam, dtype=float)
    return _core.tri_field_rsk(X.flat[None, :], lam)[0]


def vf_dyn(X, lam):
    """Local (shuffling-type) vector field on triangles; each entry moves
    by the spectral drift of its row plus nearest-neighbor exponentials."""
    lam = np.asarray(lam, dtype=float)
    return _core.tri_field_local(X.flat[None, :], lam)[0]


_FIELDS = {"rsk": _core.tri_field_rsk, "local": _core.tri_field_local}


def integrate_triangle(X0, lam, cfg, field="rsk"):
    """Fixed-step RK4 trajectory of a triangle flow.  Raises
    OverflowError with the first bad time if an entry leaves the
    exp-safe range."""
    if field not in _FIELDS:
        raise ValueError(f"unknown field {field!r}")
    f = _FIELDS[field]
    lam = np.asarray(lam, dtype=float)
    n = X0.n
    steps = int(round(cfg.t_end / cfg.dt))
    grid = np.linspace(0.0, steps * cfg.dt, steps + 1)
    flats = np.empty((steps + 1, tri_size(n)))
    x = X0.flat[None, :].copy()
    flats[0] = x[0]
    h = cfg.dt
    for j in range(steps):
        k1 = f(x, lam)
        k2 = f(x + h / 2 * k1, lam)
        k3 = f(x + h / 2 * k2, lam)
        k4 = f(x + h * k3, lam)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.abs(x) <= ENTRY_LIMIT):
            raise OverflowError(
                f"triangle entry left exp-safe range at t={grid[j + 1]:.6g}")
        flats[j + 1] = x[0]
    return TrianglePath(grid, flats, n)


def r_flow(b, lam, t):
    """Linear flow on positive upper-triangular matrices:
    left-multiplication by the exponential of the spectral-drift matrix."""
    lam = np.asarray(lam, dtype=float)
    return matrixcore.matrix_exp(matrixcore.epsilon_matrix(lam), t) @ np.asarray(b, dtype=float)


def s_flow(X, lam, t):
    """Triangle form of the linear flow: map to a matrix, apply r_flow,
    map back.  Agrees with integrate_triangle(field='rsk')."""
    return tri.f_map(r_flow(tri.f_inv(X), lam, t))


def toda_lax_rhs(M):
    """Structured tangent of the Lax flow, equal entrywise to the
    commutator of M with its strictly lower part:
    qdot_i = (p_{i+1} - p_i) q_i; pdot_1 = -q_1, pdot_n = q_{n-1},
    pdot_i = q_{i-1} - q_i in between."""
    p, q = M.p, M.q
    n = p.shape[0]
    qdot = (p[1:] - p[:-1]) * q
    pdot = np.zeros(n)
    if n > 1:
        pdot[0] = -q[0]
        pdot[n - 1] = q[n - 2]
        for i in range(1, n - 1):
            pdot[i] = q[i - 1] - q[i]
    return pdot, qdot


def integrate_lax(M0, t_end, dt):
    """Fixed-step RK4 on the structured Lax tangent; oracle for the
    factorization solution.  Returns (times, P, Q) with P shape
    (K+1, n), Q shape (K+1, n-1)."""
    steps = int(round(t_end / dt))
    grid = np.linspace(0.0, steps * dt, steps + 1)
    n = M0.n
    P = np.empty((steps + 1, n))
    Q = np.empty((steps + 1, max(n - 1, 0)))
    p, q = M0.p.copy(), M0.q.copy()
    P[0], Q[0] = p, q

    def rhs(p, q):
        return toda_lax_rhs(LaxMatrix(p, q))

    for j in range(steps):
        a1, b1 = rhs(p, q)
        a2, b2 = rhs(p + dt / 2 * a1, q + dt / 2 * b1)
        a3, b3 = rhs(p + dt / 2 * a2, q + dt / 2 * b2)
        a4, b4 = rhs(p + dt * a3, q + dt * b3)
        p = p + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        q = q + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        P[j + 1], Q[j + 1] = p, q
    return grid, P, Q


def toda_flow_factorized(M0, t, pivot_floor=matrixcore.PIVOT_FLOOR):
    """Lax flow by factorization: LDU-factor the matrix exponential of
    t*M0 and conjugate M0 by the unit-lower part.  Raises
    FactorizationBlowUp (tagged with t) when a leading principal minor
    vanishes — the indefinite lattice genuinely blows up there."""
    E = matrixcore.matrix_exp(M0.to_matrix(), t)
    try:
        L, d, U = matrixcore.gauss_ldu(E, pivot_floor=pivot_floor)
    except FactorizationBlowUp as exc:
        raise FactorizationBlowUp(str(exc), pivot_index=exc.pivot_index,
                                  time=t) from None
    Mt = scipy.linalg.solve_triangular(L, M0.to_matrix() @ L, lower=True,
                                       unit_diagonal=True)
    state = FactorizationState(n_part=L, r_part=np.diag(d) @ U, M0=M0)
    return LaxMatrix.from_matrix(Mt, tol=1e-6), state


def kostant_L(M, lam, tol=1e-8):
    """Unique unit-lower-triangular L conjugating M to the spectral-drift
    matrix: eps_lam L = L M.  Filled row by row with the exact recursion
    L[i+1, j] = L[i, j-1] + (p_j - lam_i) L[i, j] - q_j L[i, j+1];
    raises SpectrumError when the residual shows lam is not the spectrum."""
    lam = np.asarray(lam, dtype=float)
    p, q = M.p, M.q
    n = p.shape[0]
    if lam.shape[0] != n:
        raise ValueError("lambda must have length n")
    L = np.zeros((n, n))
    L[0, 0] = 1.0
    for i in range(n - 1):
        for j in range(i + 2):
            v = (p[j] - lam[i]) * L[i, j]
            if j > 0:
                v += L[i, j - 1]
            if j < n - 1:
                v -= q[j] * L[i, j + 1]
            L[i + 1, j] = v
    eps = matrixcore.epsilon_matrix(lam)
    res = np.max(np.abs(eps @ L - L @ M.to_matrix()))
    scale = max(1.0, float(np.max(np.abs(L))))
    if res > tol * scale:
        raise SpectrumError(
            f"conjugation residual {res:.3e}: lambda is not the spectrum of M")
    if np.max(np.abs(np.diag(L) - 1.0)) > tol * scale:
        raise SpectrumError("normal-form L failed to be unit lower triangular")
    return L


def _lower_projection(M):
    """Strictly lower-triangular part."""
    return np.tril(M, k=-1)


def lr_evolution_check(traj, lam, wbar=None):
    """Check the factor evolutions along a triangle trajectory:
    finite-difference derivative of the unit-lower factor matches L*Q
    (Q the strictly lower part of the Lax matrix) and of the upper
    factor matches P*R, plus eigenvalue drift of the Lax matrix."""
    lam = np.asarray(lam, dtype=float)
    n = traj.n
    if wbar is None:
        wbar = matrixcore.wbar0(n)
    grid = traj.grid
    K = grid.shape[0]
    dt = grid[1] - grid[0]
    Ls = np.empty((K, n, n))
    Rs = np.empty((K, n, n))
    ev0 = None
    eig_drift = 0.0
    for j in range(K):
        X = Triangle(n, traj.flats[j])
        Ls[j] = tri.h_map(X)
        Lg, d, U = matrixcore.gauss_ldu(tri.f_inv(X) @ wbar)
        Rs[j] = np.diag(d) @ U
        ev = np.sort(matrixcore.eigenvalues(tri.g_lambda(X, lam).to_matrix()).real)
        if ev0 is None:
            ev0 = ev
        eig_drift = max(eig_drift, float(np.max(np.abs(ev - ev0))))
    res_L = 0.0
    res_R = 0.0
    for j in range(1, K - 1):
        X = Triangle(n, traj.flats[j])
        M = tri.g_lambda(X, lam).to_matrix()
        Q = _lower_projection(M)
        P = M - Q
        Ldot = (Ls[j + 1] - Ls[j - 1]) / (2 * dt)
        Rdot = (Rs[j + 1] - Rs[j - 1]) / (2 * dt)
        res_L = max(res_L, float(np.max(np.abs(Ldot - Ls[j] @ Q))))
        res_R = max(res_R, float(np.max(np.abs(Rdot - P @ Rs[j]))))
    crit = max(critical_residual(Triangle(n, traj.flats[j]), lam)
               for j in range(K))
    return {"check": "lr_evolution",
            "L_residual": res_L, "R_residual": res_R,
            "eigenvalue_drift": eig_drift, "critical_residual": crit,
            "max_residual": max(res_L, res_R)}
