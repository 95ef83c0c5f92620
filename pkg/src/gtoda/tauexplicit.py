"""Closed-form solutions of the linear matrix evolution with constant
spectral drift, corner-minor tau functions, and exact identities among
them.  All symbolic work uses exponential polynomials sum_r p_r(t) e^{rt}
with exact coefficient arithmetic.
"""
import math

import numpy as np

from .errors import DegenerateNodes

NODE_TOL = 1e-9


def _key(r):
    return round(float(r), 12)


def _trim(c):
    c = np.asarray(c, dtype=float)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else None


class ExpPolynomial:
    """Finite sum of p_r(t) e^{rt} with polynomial coefficients p_r,
    stored as {rate: ascending coefficient array}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for r, c in terms.items():
                c = _trim(c)
                if c is not None:
                    self.terms[_key(r)] = c

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, a):
        return cls({0.0: [a]}) if a != 0 else cls()

    @classmethod
    def exponential(cls, rate):
        return cls({rate: [1.0]})

    def is_zero(self, tol=0.0):
        return all(np.max(np.abs(c)) <= tol for c in self.terms.values())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t, dtype=float)
        for r, c in self.terms.items():
            out = out + np.polynomial.polynomial.polyval(t, c) * np.exp(r * t)
        return out if out.ndim else float(out)

    def _accum(self, out, r, c):
        c = _trim(c)
        if c is None:
            return
        k = _key(r)
        if k in out:
            a = out[k]
            if a.shape[0] < c.shape[0]:
                a, c = c.copy(), a
            else:
                a = a.copy()
            a[: c.shape[0]] += c
            s = _trim(a)
            if s is None:
                del out[k]
            else:
                out[k] = s
        else:
            out[k] = c

    def __add__(self, other):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(other)
        out = {}
        for r, c in self.terms.items():
            self._accum(out, r, c)
        for r, c in other.terms.items():
            self._accum(out, r, c)
        res = ExpPolynomial.zero()
        res.terms = out
        return res

    def __neg__(self):
        return ExpPolynomial({r: -c for r, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ExpPolynomial):
            return ExpPolynomial({r: c * float(other) for r, c in self.terms.items()})
        out = {}
        for r1, c1 in self.terms.items():
            for r2, c2 in other.terms.items():
                self._accum(out, r1 + r2, np.convolve(c1, c2))
        res = ExpPolynomial.zero()
        res.terms = out
        return res

    __rmul__ = __mul__

    def deriv(self, order=1):
        """d/dt of p(t)e^{rt} is (p' + r p)e^{rt}."""
        f = self
        for _ in range(order):
            out = {}
            for r, c in f.terms.items():
                d = np.arange(1, c.shape[0]) * c[1:]
                rc = r * c
                f._accum(out, r, np.concatenate([d, [0.0]]) if d.size else np.zeros(1))
                f._accum(out, r, rc)
            g = ExpPolynomial.zero()
            g.terms = out
            f = g
        return f

    def abs_eval(self, t):
        """Sum of |coefficient| * t^j * e^{rt} for t >= 0: the magnitude
        that a floating-point evaluation at t passes through, used as the
        condition-aware scale for cancellation residuals."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t, dtype=float)
        for r, c in self.terms.items():
            out = out + np.polynomial.polynomial.polyval(t, np.abs(c)) * np.exp(r * t)
        return out if out.ndim else float(out)

    def max_coeff(self):
        return max((float(np.max(np.abs(c))) for c in self.terms.values()),
                   default=0.0)

    def __repr__(self):
        parts = [f"({list(np.round(c, 6))})e^{{{r}t}}"
                 for r, c in sorted(self.terms.items())]
        return "ExpPolynomial(" + (" + ".join(parts) or "0") + ")"


def _cluster(nodes, tol=NODE_TOL):
    """Snap nearly equal nodes to a common representative."""
    nodes = list(map(float, nodes))
    reps = []
    out = []
    for v in nodes:
        for r in reps:
            if abs(v - r) <= tol:
                out.append(r)
                break
        else:
            reps.append(v)
            out.append(v)
    return out


def divided_difference_exp(nodes, tol=NODE_TOL):
    """Divided difference of z -> e^{tz} over the given nodes, as an
    exponential polynomial in t.  Repeated nodes (within tol) are handled
    confluently: over k+1 copies of r the result is t^k e^{rt} / k!."""
    nodes = _cluster(nodes, tol)
    m = len(nodes)
    if m == 0:
        raise ValueError("need at least one node")

    def dd(i, j):
        if nodes[i] == nodes[j]:
            k = j - i
            c = np.zeros(k + 1)
            c[k] = 1.0 / math.factorial(k)
            return ExpPolynomial({nodes[i]: c})
        return (dd(i + 1, j) - dd(i, j - 1)) * (1.0 / (nodes[j] - nodes[i]))

    return dd(0, m - 1)


def b_exp_polys(lam):
    """Upper-triangular matrix of exponential polynomials solving the
    constant-drift linear evolution with identity start: entry (i, j) is
    the divided difference of e^{tz} over drifts i..j."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0]
    B = [[ExpPolynomial.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            B[i][j] = divided_difference_exp(lam[i:j + 1])
    return B


def b_explicit(lam, t):
    """Numeric value of the closed-form matrix path at time t."""
    B = b_exp_polys(lam)
    n = len(B)
    return np.array([[B[i][j](t) for j in range(n)] for i in range(n)])


def b_det_form(lam, t, tol=NODE_TOL):
    """Distinct-drift closed form: entry (i, j) is a sum of pure
    exponentials with partial-fraction weights.  Raises DegenerateNodes
    when two drifts coincide within tol."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0]
    diffs = lam[:, None] - lam[None, :]
    np.fill_diagonal(diffs, np.inf)
    if np.min(np.abs(diffs)) < tol:
        raise DegenerateNodes("drift values must be pairwise distinct")
    b = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            s = 0.0
            for k in range(i, j + 1):
                denom = np.prod([lam[k] - lam[l]
                                 for l in range(i, j + 1) if l != k])
                s += math.exp(t * lam[k]) / denom
            b[i, j] = s
    return b


def _det_expoly(M):
    """Determinant of a matrix of exponential polynomials by cofactor
    expansion along the first row."""
    k = len(M)
    if k == 1:
        return M[0][0]
    total = ExpPolynomial.zero()
    for j in range(k):
        sub = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det_expoly(sub)
        total = total + (term if j % 2 == 0 else -term)
    return total


def tau_k(lam, k):
    """k-th tau function: top-right k x k corner minor of the closed-form
    matrix path, as an exponential polynomial."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0]
    if not 1 <= k <= n:
        raise IndexError(f"tau index out of range: k={k}, n={n}")
    B = b_exp_polys(lam)
    M = [[B[i][n - k + j] for j in range(k)] for i in range(k)]
    return _det_expoly(M)


def tau_hankel(lam, k):
    """Hankel-determinant form: det of the k x k array of derivatives of
    tau_1, entry (i, j) holding the (k + i - j - 1)-th derivative."""
    lam = np.asarray(lam, dtype=float)
    t1 = tau_k(lam, 1)
    derivs = {}

    def d(o):
        if o not in derivs:
            derivs[o] = t1.deriv(o)
        return derivs[o]

    M = [[d(k + i - j - 1) for j in range(k)] for i in range(k)]
    return _det_expoly(M)


def tau_zero_lambda(n, k, t):
    """Closed form at zero drift: a superfactorial ratio times
    t^{k(n-k)}."""
    num = math.prod(math.factorial(j) for j in range(k))
    den = math.prod(math.factorial(n - 1 - j) for j in range(k))
    return num / den * np.asarray(t, dtype=float) ** (k * (n - k))


def toda_log_second_derivative_check(lam, k, t_samples=None):
    """Residual of the bilinear identity
    tau_k'' tau_k - (tau_k')^2 + tau_{k+1} tau_{k-1} = 0
    (with tau_0 = 1), evaluated exactly on coefficients and on sample
    times, scaled by the size of tau_k^2."""
    lam = np.asarray(lam, dtype=float)
    tk = tau_k(lam, k)
    t_lo = ExpPolynomial.constant(1.0) if k == 1 else tau_k(lam, k - 1)
    t_hi = tau_k(lam, k + 1)
    prods = (tk.deriv(2) * tk, tk.deriv() * tk.deriv(), t_hi * t_lo)
    resid = prods[0] - prods[1] + prods[2]
    # scale by the size of the cancelling terms (backward-error measure)
    scale = max(max(p.max_coeff() for p in prods), 1e-300)
    coeff_res = resid.max_coeff() / scale
    if t_samples is None:
        t_samples = np.linspace(0.2, 2.0, 7)
    denom = np.maximum.reduce([p.abs_eval(t_samples) for p in prods])
    vals = np.abs(resid(t_samples)) / np.maximum(denom, 1e-300)
    max_res = max(coeff_res, float(np.max(vals)))
    return {"check": f"tau_bilinear_k{k}", "max_residual": max_res}
