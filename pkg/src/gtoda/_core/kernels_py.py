"""Pure-numpy twin of the compiled kernels.

All functions operate on batches: a triangle batch is a C-contiguous
float64 array of shape (B, T) with T = n(n+1)/2, rows stored top-down,
entry (m, i) (1-based) at flat index m(m-1)/2 + i - 1.
"""
import numpy as np

BACKEND = "python"


def _off(m):
    return m * (m - 1) // 2


def _n_from_size(T):
    n = int((np.sqrt(8 * T + 1) - 1) / 2 + 0.5)
    if n * (n + 1) // 2 != T:
        raise ValueError(f"flat size {T} is not triangular")
    return n


def tri_field_rsk(x, lam):
    """Velocity of the insertion-type flow (noise-free), batched."""
    x = np.atleast_2d(x)
    n = _n_from_size(x.shape[1])
    d = np.empty_like(x)
    d[:, 0] = lam[0]
    for m in range(2, n + 1):
        o, po = _off(m), _off(m - 1)
        d[:, o] = d[:, po] + np.exp(x[:, o + 1] - x[:, po])
        d[:, o + m - 1] = lam[m - 1] - np.exp(x[:, o + m - 1] - x[:, po + m - 2])
        for i in range(2, m):
            d[:, o + i - 1] = (d[:, po + i - 1]
                               + np.exp(x[:, o + i] - x[:, po + i - 1])
                               - np.exp(x[:, o + i - 1] - x[:, po + i - 2]))
    return d


def tri_field_local(x, lam):
    """Velocity of the local (shuffling-type) flow, batched."""
    x = np.atleast_2d(x)
    n = _n_from_size(x.shape[1])
    d = np.empty_like(x)
    d[:, 0] = lam[0]
    for m in range(2, n + 1):
        o, po = _off(m), _off(m - 1)
        d[:, o] = lam[m - 1] + np.exp(x[:, po] - x[:, o])
        d[:, o + m - 1] = lam[m - 1] - np.exp(x[:, o + m - 1] - x[:, po + m - 2])
        for i in range(2, m):
            d[:, o + i - 1] = (lam[m - 1]
                               + np.exp(x[:, po + i - 1] - x[:, o + i - 1])
                               - np.exp(x[:, o + i - 1] - x[:, po + i - 2]))
    return d


def em_increment_rsk(x, lam, dt, dB):
    """One Euler-Maruyama increment of the insertion-type SDE.

    dB has shape (B, n): the m-th driving noise enters row m on the
    diagonal entry and propagates to the rest of the row through the
    increment chaining.  dB must already be scaled (sqrt(eps) * N(0, dt)).
    """
    x = np.atleast_2d(x)
    n = _n_from_size(x.shape[1])
    inc = np.empty_like(x)
    inc[:, 0] = dB[:, 0] + lam[0] * dt
    for m in range(2, n + 1):
        o, po = _off(m), _off(m - 1)
        inc[:, o + m - 1] = dB[:, m - 1] + (
            lam[m - 1] - np.exp(x[:, o + m - 1] - x[:, po + m - 2])) * dt
        inc[:, o] = inc[:, po] + np.exp(x[:, o + 1] - x[:, po]) * dt
        for i in range(2, m):
            inc[:, o + i - 1] = inc[:, po + i - 1] + (
                np.exp(x[:, o + i] - x[:, po + i - 1])
                - np.exp(x[:, o + i - 1] - x[:, po + i - 2])) * dt
    return inc


def em_increment_warren(x, lam, dt, dW):
    """One Euler-Maruyama increment of the entrywise-noise SDE.

    dW has shape (B, T): one independent noise per triangle entry,
    already scaled (sqrt(eps) * N(0, dt)).
    """
    return dW + dt * tri_field_local(x, lam)


def log_trap_cumint(g, dt):
    """Streaming log-domain trapezoid rule.

    g has shape (..., K+1): log-integrand samples on a grid with segment
    widths dt (shape (K,)).  Returns (..., K+1) with entry j equal to
    log of the integral up to grid point j; entry 0 is -inf.
    """
    g = np.asarray(g, dtype=float)
    dt = np.asarray(dt, dtype=float)
    with np.errstate(divide="ignore"):
        seg = np.logaddexp(g[..., :-1], g[..., 1:]) + np.log(dt / 2.0)
        cum = np.logaddexp.accumulate(seg, axis=-1)
    out = np.empty(g.shape, dtype=float)
    out[..., 0] = -np.inf
    out[..., 1:] = cum
    return out
