"""Small dense linear algebra: solid minors, Gauss LDU, eigenvalues,
matrix exponentials and the structured matrices eps(lambda) and wbar0.

Everything here is a pure function of its inputs; matrices are plain
float64 numpy arrays.  Intended scale is n <= ~10.
"""
import numpy as np
import scipy.linalg

from .errors import FactorizationBlowUp

#: pivot treated as vanishing when |pivot| < PIVOT_FLOOR * (running scale)
PIVOT_FLOOR = 1e-13


def _square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def minor(b, m, k):
    """Solid minor: det of rows 1..k, columns m-k+1..m (1-based), with
    the convention that the empty minor (k = 0) equals 1."""
    b = _square(b)
    n = b.shape[0]
    if not (0 <= k <= m <= n):
        raise IndexError(f"minor indices out of range: m={m}, k={k}, n={n}")
    if k == 0:
        return 1.0
    return float(np.linalg.det(b[0:k, m - k:m]))


def gauss_ldu(A, pivot_floor=PIVOT_FLOOR):
    """Gauss decomposition A = L D U with L unit-lower, D diagonal, U
    unit-upper triangular.

    The pivots are the ratios of consecutive leading principal minors.
    Raises FactorizationBlowUp when a pivot falls below
    pivot_floor * scale, where scale tracks the magnitude of the active
    submatrix.
    """
    A = _square(A)
    n = A.shape[0]
    W = A.copy()
    L = np.eye(n)
    d = np.zeros(n)
    for j in range(n):
        scale = max(1.0, float(np.max(np.abs(W[j:, j:]))) if j < n else 1.0)
        piv = W[j, j]
        if abs(piv) < pivot_floor * scale:
            raise FactorizationBlowUp(
                f"vanishing leading principal minor at pivot {j + 1} "
                f"(pivot {piv:.3e}, scale {scale:.3e})",
                pivot_index=j + 1,
            )
        d[j] = piv
        if j + 1 < n:
            mult = W[j + 1:, j] / piv
            L[j + 1:, j] = mult
            W[j + 1:, j:] -= np.outer(mult, W[j, j:])
    U = np.eye(n)
    for j in range(n):
        U[j, j + 1:] = W[j, j + 1:] / d[j]
    return L, d, U


def eigenvalues(M):
    """Eigenvalues with algebraic multiplicity (standard dense method)."""
    M = _square(M)
    if M.shape[0] > 10:
        raise ValueError("eigenvalues: intended for n <= 10")
    return np.linalg.eigvals(M)


def matrix_exp(A, t=1.0):
    """e^{tA} (Pade scaling-and-squaring, via scipy)."""
    A = _square(A)
    E = scipy.linalg.expm(t * A)
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix_exp overflowed; ||tA|| too large")
    return E


def epsilon_matrix(lam):
    """eps(lambda): diagonal lambda_i, superdiagonal 1, zero elsewhere."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    n = lam.shape[0]
    E = np.diag(lam)
    if n > 1:
        E += np.diag(np.ones(n - 1), k=1)
    return E


def s_bar(n, i):
    """Representative of the adjacent transposition (i, i+1) in GL(n):
    the 2x2 block [[0, -1], [1, 0]] embedded at rows/cols i, i+1 (1-based)."""
    if not 1 <= i <= n - 1:
        raise IndexError(f"s_bar index out of range: i={i}, n={n}")
    S = np.eye(n)
    S[i - 1:i + 1, i - 1:i + 1] = [[0.0, -1.0], [1.0, 0.0]]
    return S


def wbar0(n):
    """Representative of the longest permutation, built from the reduced
    word 1 21 321 ... (n-1 ... 21)."""
    W = np.eye(n)
    for m in range(2, n + 1):
        for i in range(m - 1, 0, -1):
            W = W @ s_bar(n, i)
    return W


def is_positive_upper(b, tol=0.0):
    """True iff b is upper triangular with all solid minors > tol."""
    b = _square(b)
    n = b.shape[0]
    if np.any(np.abs(np.tril(b, k=-1)) > 0):
        return False
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            if minor(b, m, k) <= tol:
                return False
    return True


def matrix_to_json(A):
    A = _square(A)
    return {"n": int(A.shape[0]), "rows": [[float(v) for v in row] for row in A]}


def matrix_from_json(obj):
    A = _square(np.array(obj["rows"], dtype=float))
    if A.shape[0] != obj["n"]:
        raise ValueError("inconsistent matrix JSON: n != len(rows)")
    return A
