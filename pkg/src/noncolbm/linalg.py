"""Deterministic linear-algebra kernels: ordered eigenvalues, determinants,
Pfaffians, Vandermonde products, and the one-dimensional heat kernel."""

import numpy as np

HERMITIAN_TOL = 1e-12


def weyl_vector(coords, strict=False):
    """Validate and return an ordered coordinate vector.

    With strict=True the coordinates must be strictly increasing (a point of
    the open Weyl chamber); otherwise ties are allowed.
    """
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("coordinate vector must be a nonempty 1-d array")
    gaps = np.diff(x)
    if strict:
        if not np.all(gaps > 0):
            raise ValueError("coordinates must be strictly increasing")
    elif not np.all(gaps >= 0):
        raise ValueError("coordinates must be nondecreasing")
    return x


def check_hermitian(H, tol=HERMITIAN_TOL):
    """Validate an N x N Hermitian (or real symmetric) matrix and return it."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(H).max()) if H.size else 1.0)
    if np.abs(H - H.conj().T).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return H


def check_skew(A, tol=HERMITIAN_TOL):
    """Validate a real skew-symmetric matrix and return it."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(A).max()) if A.size else 1.0)
    if np.abs(A + A.T).max() > tol * scale:
        raise ValueError("matrix is not skew-symmetric within tolerance")
    return A


def vandermonde(x):
    """Product of (x_j - x_i) over all pairs i < j.

    Nonnegative for ordered input; zero when two coordinates coincide.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return 1.0
    diffs = x[None, :] - x[:, None]
    return float(np.prod(diffs[np.triu_indices(n, k=1)]))


def heat_kernel(t, x, y):
    """Gaussian transition kernel (2*pi*t)^(-1/2) * exp(-(y-x)^2 / (2t)).

    Accepts array arguments; broadcasts like numpy.
    """
    if np.any(np.asarray(t) <= 0):
        raise ValueError("time must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-((y - x) ** 2) / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)


def ordered_eigenvalues(H, tol=HERMITIAN_TOL):
    """Ascending real eigenvalues of a Hermitian matrix."""
    H = check_hermitian(H, tol=tol)
    return np.linalg.eigvalsh(H)


def ordered_eigensystem(H, tol=HERMITIAN_TOL):
    """Ascending eigenvalues and a unitary of eigenvectors (columns)."""
    H = check_hermitian(H, tol=tol)
    return np.linalg.eigh(H)


def determinant(M):
    """Determinant of a square real or complex matrix (LU with pivoting)."""
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ValueError("matrix must be square")
    d = np.linalg.det(M)
    if np.iscomplexobj(M):
        return d
    return d


def pfaffian(A, tol=HERMITIAN_TOL):
    """Pfaffian of an even-dimensional real skew-symmetric matrix.

    Skew-symmetric tridiagonalization with partial pivoting (Parlett-Reid);
    the Pfaffian is the product of the superdiagonal of the tridiagonal form
    times the sign of the accumulated permutation.
    """
    A = check_skew(A, tol=tol).copy()
    n = A.shape[0]
    if n % 2 != 0:
        raise ValueError("Pfaffian requires even dimension")
    if n == 0:
        return 1.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        # pivot: largest entry in column k below the diagonal
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1])
            A[k + 2:, k + 2:] -= np.outer(A[k + 2:, k + 1], tau)
    return float(pf)
