"""End-to-end acceptance checks: ten numbered criteria, each with a
stated tolerance and a single printed pass/fail line."""
import math
import time

import numpy as np
import pytest
import scipy.stats

from gtoda import critical, flows, grsk, stochastic, tauexplicit
from gtoda import matrixcore as mc
from gtoda import triangle as tri
from gtoda.stochastic import SdeConfig
from gtoda.triangle import Triangle


def _line(num, desc, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num}: {desc} ({detail})")
    assert ok, f"criterion {num}: {desc} ({detail})"


def _smooth_path(n, rng, t_end=2.0, num=2000, clustered=False):
    """Random band-limited path with value 0 at t=0."""
    if clustered:
        grid = t_end * (np.arange(num + 1) / num) ** 2
        grid[1:] = np.maximum.accumulate(np.maximum(grid[1:], 1e-12))
    else:
        grid = np.linspace(0.0, t_end, num + 1)
    vals = np.zeros((num + 1, n))
    for c in range(n):
        for k in range(1, 4):
            a, b = rng.uniform(-0.8, 0.8, 2)
            vals[:, c] += a * np.sin(k * grid) + b * (np.cos(k * grid) - 1.0)
    return grsk.SampledPath(grid, vals)


def test_criterion_01_flat_start_three_routes():
    t0 = time.time()
    times = (0.5, 1.0, 2.0)
    res_s = res_rk = res_pi = 0.0
    # route 1: factorized flow
    for t in times:
        X = flows.s_flow(Triangle(2), [0.0, 0.0], t)
        res_s = max(res_s, abs(X.x(2, 1) - math.log(1 + t)),
                    abs(X.x(2, 2) + math.log(1 + t)))
    # route 2: RK4 of the triangle field
    traj = flows.integrate_triangle(Triangle(2), [0.0, 0.0],
                                    flows.FlowConfig(dt=1e-3, t_end=2.0))
    for t in times:
        b = traj.bottom_at(t)
        res_rk = max(res_rk, abs(b[0] - math.log(1 + t)),
                     abs(b[1] + math.log(1 + t)))
    # route 3: path-operator quadrature of the flat path
    grid = np.linspace(0.0, 2.0, 2001)
    flat = grsk.SampledPath(grid, np.zeros((2001, 2)))
    out = grsk.pi_n(flat)
    for t in times:
        j = out.index_of(t)
        res_pi = max(res_pi, abs(out.flats[j, 1] - math.log(1 + t)),
                     abs(out.flats[j, 2] + math.log(1 + t)))
    ok = res_s < 1e-8 and res_rk < 1e-6 and res_pi < 1e-6
    _line(1, "flat-start bottom row by three routes", ok,
          f"factorized={res_s:.2e}<1e-8 rk4={res_rk:.2e}<1e-6 "
          f"quadrature={res_pi:.2e}<1e-6, {time.time()-t0:.2f}s")


def test_criterion_02_critical_start_closed_form():
    t0 = time.time()
    lam = np.array([1.0, -1.0])
    X0 = critical.critical_point([0.0, 0.0], lam)
    ey = math.sqrt(2.0) - 1.0
    res = 0.0
    for t in np.linspace(0.0, 2.0, 41):
        X = flows.s_flow(X0, lam, t)
        res = max(res, abs(X.x(2, 1) - math.log(math.exp(t) + ey * math.sinh(t))))
    ok = res < 1e-7
    _line(2, "critical-start closed-form bottom entry", ok,
          f"max_err={res:.2e}<1e-7, {time.time()-t0:.2f}s")


def test_criterion_03_explicit_solution_and_tau():
    t0 = time.time()
    rng = np.random.default_rng(303)
    res_b = res_h = res_z = 0.0
    for n in (2, 3, 4, 5):
        gaps = rng.uniform(0.3, 0.5, n - 1)
        lam = np.concatenate([[0.0], -np.cumsum(gaps)])
        lam -= lam.mean()
        for t in (0.5, 1.0, 2.0):
            res_b = max(res_b, float(np.max(np.abs(
                tauexplicit.b_explicit(lam, t)
                - mc.matrix_exp(mc.epsilon_matrix(lam), t)))))
        # sample away from t=0, where the high-order vanishing of the
        # corner minors makes a plain relative comparison ill-conditioned
        ts = np.linspace(1.0, 2.0, 5)
        for k in range(1, n + 1):
            tk = tauexplicit.tau_k(lam, k)
            th = tauexplicit.tau_hankel(lam, k)
            denom = np.maximum(np.abs(tk(ts)), 1e-300)
            res_h = max(res_h, float(np.max(np.abs(tk(ts) - th(ts)) / denom)))
    ts = np.linspace(0.2, 2.0, 7)
    for n in (2, 3, 4, 5):
        for k in range(1, n):
            tk = tauexplicit.tau_k(np.zeros(n), k)
            res_z = max(res_z, float(np.max(np.abs(
                tk(ts) - tauexplicit.tau_zero_lambda(n, k, ts)))))
    res_z = max(res_z, float(np.max(np.abs(
        tauexplicit.tau_zero_lambda(3, 1, ts) - ts ** 2 / 2.0))))
    ok = res_b < 1e-10 and res_h < 1e-9 and res_z < 1e-10
    _line(3, "explicit matrix path and tau identities", ok,
          f"matrix={res_b:.2e}<1e-10 hankel={res_h:.2e}<1e-9 "
          f"zero_drift={res_z:.2e}<1e-10, {time.time()-t0:.2f}s")


def test_criterion_04_commutative_diagrams():
    t0 = time.time()
    rng = np.random.default_rng(404)
    # (a) triangle flow vs conjugated linear flow
    res_a = 0.0
    for n in (2, 3, 4):
        X0 = Triangle(n, 0.3 * rng.standard_normal(tri.tri_size(n)))
        lam = rng.uniform(-0.5, 0.5, n)
        t = rng.uniform(0.5, 2.0)
        traj = flows.integrate_triangle(X0, lam, flows.FlowConfig(dt=1e-3, t_end=t),
                                        field="rsk")
        Xs = flows.s_flow(X0, lam, traj.grid[-1])
        res_a = max(res_a, float(np.max(np.abs(Xs.flat - traj.flats[-1]))))
    # (b) triangle flow then Lax map vs Toda flow of the Lax map
    res_b = 0.0
    for n in (2, 3, 4):
        lam = np.sort(rng.uniform(-1.0, 1.0, n))[::-1] + 0.3 * np.arange(n)[::-1]
        X0 = critical.critical_point(rng.standard_normal(n), lam)
        M0 = tri.g_lambda(X0, lam)
        for t in (0.5, 1.5):
            Xt = flows.s_flow(X0, lam, t)
            Ma = tri.g_lambda(Xt, lam)
            Mb, _ = flows.toda_flow_factorized(M0, t)
            res_b = max(res_b, float(np.max(np.abs(Ma.p - Mb.p))),
                        float(np.max(np.abs(Ma.q - Mb.q))))
    # (c) eigenvalue drift along integrated Toda trajectories
    res_c = 0.0
    for n in (2, 3, 4):
        lam = np.sort(rng.uniform(-1.0, 1.0, n))[::-1] + 0.3 * np.arange(n)[::-1]
        X0 = critical.critical_point(rng.standard_normal(n), lam)
        M0 = tri.g_lambda(X0, lam)
        grid, P, Q = flows.integrate_lax(M0, 2.0, 1e-3)
        ev0 = np.sort(mc.eigenvalues(M0.to_matrix()).real)
        for j in range(0, grid.shape[0], 100):
            M = tri.LaxMatrix(P[j], Q[j]).to_matrix()
            ev = np.sort(mc.eigenvalues(M).real)
            res_c = max(res_c, float(np.max(np.abs(ev - ev0))))
    ok = res_a < 1e-7 and res_b < 1e-6 and res_c < 1e-6
    _line(4, "commutative diagrams and isospectrality", ok,
          f"conjugation={res_a:.2e}<1e-7 lax_map={res_b:.2e}<1e-6 "
          f"eigendrift={res_c:.2e}<1e-6, {time.time()-t0:.2f}s")


def test_criterion_05_balanced_manifold_invariance():
    t0 = time.time()
    rng = np.random.default_rng(505)
    res_start = res_crit = res_pair = 0.0
    cases = [(2, 7), (3, 7), (4, 6)]
    for n, reps in cases:
        for _ in range(reps):
            lam = rng.uniform(-0.8, 0.8, n)
            x = rng.standard_normal(n)
            X0 = critical.critical_point(x, lam)
            res_start = max(res_start, critical.critical_residual(X0, lam))
            cfg = flows.FlowConfig(dt=1e-3, t_end=2.0)
            ta = flows.integrate_triangle(X0, lam, cfg, field="rsk")
            tb = flows.integrate_triangle(X0, lam, cfg, field="local")
            res_pair = max(res_pair, float(np.max(np.abs(ta.flats - tb.flats))))
            for j in range(0, ta.grid.shape[0], 200):
                res_crit = max(res_crit, critical.critical_residual(
                    Triangle(n, ta.flats[j]), lam))
    ok = res_start < 1e-10 and res_crit < 1e-6 and res_pair < 1e-6
    _line(5, "balanced manifold: two fields, one flow", ok,
          f"start_residual={res_start:.2e}<1e-10 along={res_crit:.2e}<1e-6 "
          f"field_gap={res_pair:.2e}<1e-6, {time.time()-t0:.2f}s")


def test_criterion_06_energy_pairing_and_gradient_flow():
    t0 = time.time()
    rng = np.random.default_rng(606)
    # energy identity along balanced trajectories
    res_e = 0.0
    for n in (2, 3):
        lam = rng.uniform(-0.6, 0.6, n)
        X0 = critical.critical_point(rng.standard_normal(n), lam)
        for t in np.linspace(0.0, 2.0, 9):
            Xt = flows.s_flow(X0, lam, t)
            res_e = max(res_e, critical.givental_identity_check(Xt, lam)["max_residual"])
    # envelope gradient vs finite differences
    res_fd = 0.0
    h = 1e-5
    for n in (2, 3):
        lam = rng.uniform(-0.6, 0.6, n)
        x = 0.5 * rng.standard_normal(n)
        g = critical.grad_u(x, lam)
        for c in range(n):
            xp = x.copy(); xp[c] += h
            xm = x.copy(); xm[c] -= h
            fd = (critical.u_lambda(xp, lam) - critical.u_lambda(xm, lam)) / (2 * h)
            res_fd = max(res_fd, abs(g[c] - fd))
    # gradient flow of the induced potential tracks the bottom row
    res_g = 0.0
    for n in (2, 3):
        lam = rng.uniform(-0.6, 0.6, n)
        X0 = critical.critical_point(0.3 * rng.standard_normal(n), lam)
        x = X0.bottom
        dt = 1e-3
        for _ in range(1000):
            k1 = -critical.grad_u(x, lam)
            k2 = -critical.grad_u(x + dt * k1, lam)
            x = x + dt / 2 * (k1 + k2)
        Xs = flows.s_flow(X0, lam, 1.0)
        res_g = max(res_g, float(np.max(np.abs(x - Xs.bottom))))
    ok = res_e < 1e-8 and res_fd < 1e-6 and res_g < 1e-5
    _line(6, "energy pairing and semiclassical gradient flow", ok,
          f"pairing={res_e:.2e}<1e-8 envelope_fd={res_fd:.2e}<1e-6 "
          f"gradient_flow={res_g:.2e}<1e-5, {time.time()-t0:.2f}s")


def test_criterion_07_minor_monte_carlo():
    t0 = time.time()
    rng = np.random.default_rng(707)
    path = _smooth_path(3, rng, t_end=1.0, num=1000)
    t = 1.0
    b = grsk.b_path(path, t)
    target = float(np.linalg.det(b[np.ix_([0, 1], [1, 2])]))
    est, se = grsk.kmg_minor_oracle(path, t, m=3, k=2, samples=100000, seed=7)
    dev = abs(est - target)
    ok = dev <= 3.0 * se
    _line(7, "non-intersecting-path estimate of a solid minor", ok,
          f"|{est:.6f}-{target:.6f}|={dev:.2e} <= 3*se={3*se:.2e}, "
          f"{time.time()-t0:.2f}s")


def test_criterion_08_braid_relations():
    t0 = time.time()
    rng = np.random.default_rng(808)
    res = 0.0
    for _ in range(10):
        path = _smooth_path(3, rng, t_end=2.0, num=80000, clustered=True)
        a = grsk.p_op(grsk.p_op(grsk.p_op(path, 1), 2), 1)
        b = grsk.p_op(grsk.p_op(grsk.p_op(path, 2), 1), 2)
        res = max(res, float(np.max(np.abs(a.values[1:] - b.values[1:]))))
    ok = res < 1e-8
    _line(8, "braid relation of path operators", ok,
          f"max_gap={res:.2e}<1e-8, {time.time()-t0:.2f}s")


def test_criterion_09_stochastic_matches():
    t0 = time.time()
    cfg = SdeConfig(eps=1.0, lam=(0.0, 0.0), dt=1e-3, t_end=1.0,
                    replicas=10000, seed=42)
    gen = stochastic.generator_test(cfg, t0=0.1)
    war = stochastic.warren_match_test(cfg, t0=0.1)
    neg = stochastic.generator_test(cfg, t0=0.1, drift_multiplier=2.0)
    p_gen = min(gen["p_value"])
    p_war = war["p_value"]
    p_neg = min(neg["p_value"])
    ok = p_gen > 0.01 and p_war > 0.01 and p_neg < 1e-4
    _line(9, "seeded distributional checks", ok,
          f"generator_p={p_gen:.3g}>0.01 two_sde_p={p_war:.3g}>0.01 "
          f"negative_control_p={p_neg:.3g}<1e-4, {time.time()-t0:.1f}s")


def test_criterion_10_whittaker_eigenfunction():
    t0 = time.time()
    rng = np.random.default_rng(1010)
    eps = 1.0
    h = 1e-3
    res = 0.0
    for _ in range(5):
        lam = rng.uniform(-0.8, 0.8, 2)
        x = rng.uniform(-1.0, 1.0, 2)
        lv = {}
        for dx in [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h)]:
            lv[dx] = stochastic.whittaker_eval(x + np.array(dx), lam,
                                               eps).log_value
        lap = 0.0
        for d in range(2):
            lp = lv[(h, 0)] if d == 0 else lv[(0, h)]
            lm = lv[(-h, 0)] if d == 0 else lv[(0, -h)]
            l0 = lv[(0, 0)]
            g = (lp - lm) / (2 * h)
            dd = (lp - 2 * l0 + lm) / (h * h)
            lap += dd + g * g
        val = -eps * eps * lap + 2.0 * math.exp(x[1] - x[0])
        res = max(res, abs(val + lam[0] ** 2 + lam[1] ** 2))
    ok = res < 1e-3
    _line(10, "quadrature eigenfunction of the kernel operator", ok,
          f"max_residual={res:.2e}<1e-3, {time.time()-t0:.2f}s")
