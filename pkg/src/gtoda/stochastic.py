"""Brownian-driven layer: Euler-Maruyama simulation of the two
triangle SDEs, streaming Brownian geometric RSK, quadrature evaluation
of the kernel eigenfunctions for n <= 3, sampling from the
fixed-bottom-row Gibbs kernel, and seeded distributional tests.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

from . import _core, critical
from .critical import critical_point, F_lambda, _exp_terms, _linear_coeffs
from .errors import ConvergenceError, DomainError
from .grsk import SampledPath
from .triangle import Triangle, row_offset, tri_size

KS_ALPHA = 0.01


@dataclass
class SdeConfig:
    eps: float = 1.0
    lam: tuple = (0.0, 0.0)
    dt: float = 1e-3
    t_end: float = 1.0
    replicas: int = 10000
    seed: int = 0

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if self.eps < 0 or self.dt <= 0 or self.t_end <= 0:
            raise ValueError("need eps >= 0, dt > 0, t_end > 0")

    @property
    def n(self):
        return self.lam.shape[0]

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


@dataclass
class WhittakerEval:
    x: np.ndarray
    lam: np.ndarray
    eps: float
    value: float
    log_value: float
    accuracy_warning: bool = False


def sample_brownian(cfg, rng=None):
    """One driving path: independent Gaussian increments of variance
    eps*dt plus drift lam*dt per coordinate, piecewise linear on the
    step grid, started at 0."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    K = cfg.steps
    grid = np.linspace(0.0, K * cfg.dt, K + 1)
    inc = (math.sqrt(cfg.eps * cfg.dt) * rng.standard_normal((K, cfg.n))
           + cfg.dt * cfg.lam)
    vals = np.vstack([np.zeros((1, cfg.n)), np.cumsum(inc, axis=0)])
    return SampledPath(grid, vals)


def em_step_rsk(X, lam, eps, dW, dt):
    """One Euler-Maruyama step of the insertion-type SDE; dW is the raw
    Brownian increment (variance dt) of the n driving noises."""
    lam = np.asarray(lam, dtype=float)
    dB = math.sqrt(eps) * np.asarray(dW, dtype=float)
    inc = _core.em_increment_rsk(X.flat[None, :], lam, dt, dB[None, :])[0]
    return Triangle(X.n, X.flat + inc)


def em_step_warren(X, lam, eps, dW, dt):
    """One Euler-Maruyama step of the entrywise-noise SDE; dW is the raw
    Brownian increment (variance dt), one per triangle entry."""
    lam = np.asarray(lam, dtype=float)
    dWs = math.sqrt(eps) * np.asarray(dW, dtype=float)
    inc = _core.em_increment_warren(X.flat[None, :], lam, dt, dWs[None, :])[0]
    return Triangle(X.n, X.flat + inc)


def simulate_em(cfg, flats0, kind="rsk", rng=None, drift=None):
    """Batched Euler-Maruyama run from initial flat triangles (B, T).

    kind 'rsk' uses n shared per-row noises, 'warren' one noise per
    entry.  Optional drift(x) overrides the vector-field drift entirely
    (used for the diffusion of the bottom-row process, where the state
    is (B, n) and the noise is per coordinate)."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    x = np.array(flats0, dtype=float)
    B, T = x.shape
    s = math.sqrt(cfg.eps * cfg.dt)
    for _ in range(cfg.steps):
        if drift is not None:
            x = x + s * rng.standard_normal((B, T)) + cfg.dt * drift(x)
        elif kind == "rsk":
            dB = s * rng.standard_normal((B, cfg.n))
            x = x + _core.em_increment_rsk(x, cfg.lam, cfg.dt, dB)
        elif kind == "warren":
            dW = s * rng.standard_normal((B, T))
            x = x + _core.em_increment_warren(x, cfg.lam, cfg.dt, dW)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        if not np.all(np.isfinite(x)):
            raise OverflowError("Euler-Maruyama state left the finite range")
    return x


def pi2_stream(cfg, times, rng=None):
    """Streaming Brownian geometric RSK for n=2: evolve B independent
    driving paths step by step, maintain the running log-integral of
    e^{eta_2 - eta_1} by the trapezoid rule, and record the full
    triangle (x11, x21, x22) at the requested times (must be positive
    grid multiples)."""
    if cfg.n != 2:
        raise ValueError("pi2_stream is for n=2")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    B, dt = cfg.replicas, cfg.dt
    s = math.sqrt(cfg.eps * dt)
    eta = np.zeros((B, 2))
    g_prev = np.zeros(B)           # log integrand at current grid point
    log_int = np.full(B, -np.inf)  # log of the running integral
    want = {int(round(t / dt)): t for t in times}
    out = {}
    for j in range(1, cfg.steps + 1):
        eta += s * rng.standard_normal((B, 2)) + dt * cfg.lam
        g = eta[:, 1] - eta[:, 0]
        log_int = np.logaddexp(log_int,
                               np.logaddexp(g_prev, g) + math.log(dt / 2.0))
        g_prev = g
        if j in want:
            flats = np.column_stack([eta[:, 0],
                                     eta[:, 0] + log_int,
                                     eta[:, 1] - log_int])
            out[want[j]] = flats
    return out


def _batched_F(n, flats, lam):
    """Tilted potential over a batch of flat triangles (..., T)."""
    lin = _linear_coeffs(n, np.asarray(lam, dtype=float))
    val = flats @ lin
    for a, b in _exp_terms(n):
        val = val + np.exp(flats[..., a] - flats[..., b])
    return val


def _log_integrand_factory(x, lam, eps):
    """log of e^{-F_lambda/eps} as a function of the interior entries,
    vectorized over a batch of interior points (..., T-n)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = np.asarray(lam, dtype=float)
    n = x.shape[0]
    T = tri_size(n)

    def logf(interior):
        interior = np.asarray(interior, dtype=float)
        flats = np.empty(interior.shape[:-1] + (T,))
        flats[..., : T - n] = interior
        flats[..., T - n:] = x
        return -_batched_F(n, flats, lam) / eps

    return logf


def _gauss_nodes(center, half, m):
    z, w = np.polynomial.legendre.leggauss(m)
    return center + half * z, half * w


def whittaker_eval(x, lam, eps, rel_tol=None):
    """Kernel eigenfunction by quadrature over the triangle interior:
    log of the integral of e^{-F_lambda/eps} over triangles with fixed
    bottom row x.  Supports n <= 3; the window around the constrained
    minimizer grows until the integrand tail is below 1e-12 of the
    peak."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = np.asarray(lam, dtype=float)
    n = x.shape[0]
    if n == 1:
        lv = float(lam[0] * x[0] / eps)
        return WhittakerEval(x, lam, eps, math.exp(lv), lv)
    if n > 3:
        raise DomainError("quadrature eigenfunction supports n <= 3 only")
    if rel_tol is None:
        rel_tol = 1e-8 if n == 2 else 1e-6
    logf = _log_integrand_factory(x, lam, eps)
    Xstar = critical_point(x, lam)
    dint = tri_size(n) - n
    center = Xstar.flat[:dint]
    peak = float(logf(center))
    H = critical.interior_hessian(Xstar, lam) / eps
    sig = np.sqrt(np.diag(np.linalg.inv(H)))
    warn = False
    half = 8.0 * sig
    for _ in range(30):
        edges_ok = True
        for d in range(dint):
            for sgn in (-1.0, 1.0):
                pt = center.copy()
                pt[d] += sgn * half[d]
                if float(logf(pt)) - peak > math.log(1e-12):
                    half[d] *= 1.5
                    edges_ok = False
        if edges_ok:
            break
    else:
        warn = True
    prev = None
    for m in (24, 32, 48, 64, 96):
        axes = [_gauss_nodes(center[d], half[d], m) for d in range(dint)]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        logw = np.zeros(pts.shape[0])
        for d in range(dint):
            W = np.meshgrid(*[np.log(a[1]) for a in axes], indexing="ij")[d]
            logw += W.ravel()
        vals = logf(pts) - peak + logw
        lv = peak + _logsumexp(vals)
        if prev is not None and abs(lv - prev) < rel_tol:
            break
        prev = lv
    else:
        warn = True
    return WhittakerEval(x, lam, eps, math.exp(lv) if lv < 700 else math.inf,
                         lv, accuracy_warning=warn)


def _logsumexp(a):
    m = float(np.max(a))
    return m + math.log(float(np.sum(np.exp(a - m))))


def grad_log_psi_table(lam, eps, s_min=-12.0, s_max=12.0, ds=0.05):
    """n=2 drift table: by translation invariance the eigenfunction
    factorizes through the gap s = x2 - x1, so the gradient of its log is
    ((lam1+lam2)/(2 eps)) * (1, 1) + phi'(s) * (-1, 1) with phi the log
    of the gap profile.  Returns (s_grid, phi_prime)."""
    lam = np.asarray(lam, dtype=float)
    s_grid = np.arange(s_min, s_max + ds / 2, ds)
    logphi = np.array([whittaker_eval(np.array([-s / 2, s / 2]), lam, eps).log_value
                       for s in s_grid])
    return s_grid, np.gradient(logphi, s_grid)


def make_drift(lam, eps, multiplier=1.0):
    """Drift x -> eps * grad log psi_lambda(x) for the n=2 bottom-row
    diffusion, interpolated from the gap table; multiplier deliberately
    scales it for negative-control tests."""
    lam = np.asarray(lam, dtype=float)
    s_grid, dphi = grad_log_psi_table(lam, eps)
    base = (lam[0] + lam[1]) / (2.0 * eps)

    def drift(x):
        s = x[:, 1] - x[:, 0]
        g = np.interp(s, s_grid, dphi)
        out = np.empty_like(x)
        out[:, 0] = base - g
        out[:, 1] = base + g
        return multiplier * eps * out

    return drift


def sample_sigma_lambda(x, lam, eps, count, seed=0):
    """Samples from the Gibbs kernel with density proportional to
    e^{-F_lambda/eps} over triangles with fixed bottom row x.

    n=2: inverse-CDF on a fine quadrature grid of the single interior
    entry.  n=3: rejection sampling from a Gaussian proposal matched to
    the Hessian of the tilted potential at the minimizer (covariance
    inflated 2x, envelope constant estimated on a probe grid)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = np.asarray(lam, dtype=float)
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    logf = _log_integrand_factory(x, lam, eps)
    Xstar = critical_point(x, lam)
    dint = tri_size(n) - n
    center = Xstar.flat[:dint]
    H = critical.interior_hessian(Xstar, lam) / eps
    if n == 2:
        sig = math.sqrt(1.0 / H[0, 0])
        grid = np.linspace(center[0] - 10 * sig, center[0] + 10 * sig, 4001)
        lv = logf(grid[:, None])
        p = np.exp(lv - np.max(lv))
        cdf = np.cumsum((p[:-1] + p[1:]) / 2)
        cdf = np.concatenate([[0.0], cdf]) / cdf[-1]
        u = rng.uniform(size=count)
        interior = np.interp(u, cdf, grid)[:, None]
    elif n == 3:
        cov = 2.0 * np.linalg.inv(H)
        chol = np.linalg.cholesky(cov)
        icov = np.linalg.inv(cov)
        probe = center + (rng.standard_normal((4000, dint)) @ chol.T)

        def log_ratio(pts):
            d = pts - center
            logq = -0.5 * np.einsum("bi,ij,bj->b", d, icov, d)
            return logf(pts) - logq

        logM = float(np.max(log_ratio(probe))) + math.log(1.2)
        samples = []
        tried = 0
        while sum(len(s) for s in samples) < count:
            m = max(4 * count, 1000)
            pts = center + (rng.standard_normal((m, dint)) @ chol.T)
            acc = np.log(rng.uniform(size=m)) < log_ratio(pts) - logM
            samples.append(pts[acc])
            tried += m
            got = sum(len(s) for s in samples)
            if tried > 2000 and got / tried < 1e-3:
                raise ConvergenceError("rejection acceptance below 1e-3")
        interior = np.vstack(samples)[:count]
    else:
        raise DomainError("kernel sampling supports n in {2, 3} only")
    out = []
    for row in interior:
        flat = np.concatenate([row, x])
        out.append(Triangle(n, flat))
    return out


def generator_test(cfg, t0=0.1, drift_multiplier=1.0):
    """Two-sample comparison of the bottom-row law at t_end:
    (a) streaming geometric RSK of Brownian paths; (b) the bottom-row
    diffusion with quadrature drift, started from an independent batch
    of route (a) at time t0.  Returns per-coordinate KS statistics."""
    if cfg.n != 2:
        raise DomainError("generator_test is implemented for n=2")
    lam = cfg.lam
    a = pi2_stream(cfg, [cfg.t_end], rng=np.random.default_rng(cfg.seed))
    bottom_a = a[cfg.t_end][:, 1:]
    b0 = pi2_stream(cfg, [t0], rng=np.random.default_rng(cfg.seed + 1))
    start = b0[t0][:, 1:]
    drift = make_drift(lam, cfg.eps, multiplier=drift_multiplier)
    cfg_b = SdeConfig(eps=cfg.eps, lam=tuple(lam), dt=cfg.dt,
                      t_end=cfg.t_end - t0, replicas=cfg.replicas,
                      seed=cfg.seed + 2)
    bottom_b = simulate_em(cfg_b, start, drift=drift,
                           rng=np.random.default_rng(cfg.seed + 2))
    ks = [scipy.stats.ks_2samp(bottom_a[:, c], bottom_b[:, c])
          for c in range(2)]
    p_min = min(k.pvalue for k in ks)
    return {"test": "generator_match", "n": 2, "eps": cfg.eps,
            "lambda": [float(v) for v in lam], "replicas": cfg.replicas,
            "seed": cfg.seed, "drift_multiplier": drift_multiplier,
            "ks_stat": [float(k.statistic) for k in ks],
            "p_value": [float(k.pvalue) for k in ks],
            "pass": bool(p_min > KS_ALPHA)}


def marginal_match_test(cfg, t0=0.1):
    """KS comparison of the insertion-type SDE (initialized from the
    streaming geometric RSK triangle at t0) against the streaming
    geometric RSK bottom row at t_end, coordinate x^2_1."""
    if cfg.n != 2:
        raise DomainError("marginal_match_test is implemented for n=2")
    a = pi2_stream(cfg, [cfg.t_end], rng=np.random.default_rng(cfg.seed))
    ref = a[cfg.t_end][:, 1]
    b0 = pi2_stream(cfg, [t0], rng=np.random.default_rng(cfg.seed + 1))
    cfg_b = SdeConfig(eps=cfg.eps, lam=tuple(cfg.lam), dt=cfg.dt,
                      t_end=cfg.t_end - t0, replicas=cfg.replicas,
                      seed=cfg.seed + 2)
    flats = simulate_em(cfg_b, b0[t0], kind="rsk",
                        rng=np.random.default_rng(cfg.seed + 2))
    ks = scipy.stats.ks_2samp(ref, flats[:, 1])
    return {"test": "rsk_sde_marginal", "n": 2, "eps": cfg.eps,
            "lambda": [float(v) for v in cfg.lam], "replicas": cfg.replicas,
            "seed": cfg.seed, "ks_stat": float(ks.statistic),
            "p_value": float(ks.pvalue), "pass": bool(ks.pvalue > KS_ALPHA)}


def warren_match_test(cfg, t0=0.1):
    """Thm-style equality of fixed-time bottom-row laws between the two
    SDE dynamics, both initialized from the streaming geometric RSK
    triangle at t0; KS on x^2_1 at t_end."""
    if cfg.n != 2:
        raise DomainError("warren_match_test is implemented for n=2")
    b0 = pi2_stream(cfg, [t0], rng=np.random.default_rng(cfg.seed + 1))
    cfg_r = SdeConfig(eps=cfg.eps, lam=tuple(cfg.lam), dt=cfg.dt,
                      t_end=cfg.t_end - t0, replicas=cfg.replicas,
                      seed=cfg.seed + 2)
    fr = simulate_em(cfg_r, b0[t0], kind="rsk",
                     rng=np.random.default_rng(cfg.seed + 2))
    cfg_w = SdeConfig(eps=cfg.eps, lam=tuple(cfg.lam), dt=cfg.dt,
                      t_end=cfg.t_end - t0, replicas=cfg.replicas,
                      seed=cfg.seed + 3)
    fw = simulate_em(cfg_w, b0[t0], kind="warren",
                     rng=np.random.default_rng(cfg.seed + 3))
    ks = scipy.stats.ks_2samp(fr[:, 1], fw[:, 1])
    return {"test": "two_sde_marginal", "n": 2, "eps": cfg.eps,
            "lambda": [float(v) for v in cfg.lam], "replicas": cfg.replicas,
            "seed": cfg.seed, "ks_stat": float(ks.statistic),
            "p_value": float(ks.pvalue), "pass": bool(ks.pvalue > KS_ALPHA)}
