"""Haar-distributed unitary sampling and the two sides of the unitary-group
Gaussian integral identity, plus the ensemble-convolution density evaluated
both by Monte Carlo and by chamber quadrature."""

import math

import numpy as np

from . import densities, linalg, paths
from .densities import MCEstimate
from .rng import as_generator


def haar_unitary(n, rng, size=None):
    """Haar-random unitary matrices via QR of a complex Ginibre matrix.

    Each column of Q is divided by the phase of the corresponding diagonal
    entry of R; without that correction the law is not Haar.
    Returns (n, n) for size=None, else (size, n, n).
    """
    gen = as_generator(rng)
    m = 1 if size is None else size
    z = (gen.normal(size=(m, n, n)) + 1j * gen.normal(size=(m, n, n)))
    z /= math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.einsum("sii->si", r)
    q = q * (d / np.abs(d))[:, None, :]
    return q[0] if size is None else q


def hc_monte_carlo(x, y, sigma, samples, rng, batch=20000):
    """Haar average of exp{-Tr(L_x - U' L_y U)^2 / (2 sigma^2)} with the
    diagonal matrices L_x, L_y built from strictly ordered x, y."""
    x = linalg.weyl_vector(x, strict=True)
    y = linalg.weyl_vector(y, strict=True)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    n = x.size
    gen = as_generator(rng)
    if n == 1:
        val = math.exp(-((x[0] - y[0]) ** 2) / (2.0 * sigma ** 2))
        return MCEstimate(val, 0.0, samples)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        u = haar_unitary(n, gen, size=m)
        a = np.einsum("sji,j,sjk->sik", np.conj(u), y, u)
        a[:, np.arange(n), np.arange(n)] -= x
        tr2 = np.real(np.einsum("sij,sji->s", a, a))
        vals = np.exp(-tr2 / (2.0 * sigma ** 2))
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += m
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    se = math.sqrt(var / samples)
    return MCEstimate(float(mean), float(se), samples)


def hc_closed_form(x, y, sigma):
    """Determinant form of the same Haar average."""
    x = linalg.weyl_vector(x, strict=True)
    y = linalg.weyl_vector(y, strict=True)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    n = x.size
    c = densities.constants(n)
    kernel = linalg.heat_kernel(sigma ** 2, x[:, None], y[None, :])
    det = np.linalg.det(kernel)
    hx = linalg.vandermonde(x)
    hy = linalg.vandermonde(y)
    return float(c.c1 * sigma ** (n * n) / (hx * hy) * det)


def interpolation_scales(T, t):
    """Variance scale of the bridge part and inverse scale of the endpoint
    part of the finite-horizon process at time t."""
    if not 0 < t < T:
        raise ValueError("need 0 < t < T")
    sigma2 = t * (T - t) / T
    alpha = T / t ** 2
    return sigma2, alpha


def convolution_mc(n, T, t, H, samples, rng):
    """Monte Carlo value of the symmetric-ensemble / Hermitian-ensemble
    convolution density at H: average the Hermitian Gaussian density of
    H - A over symmetric draws A."""
    H = linalg.check_hermitian(H)
    sigma2, alpha = interpolation_scales(T, t)
    gen = as_generator(rng)
    a = paths.sample_goe(n, 1.0 / alpha, samples, gen)
    vals = densities.matrix_density("gue", H[None, :, :] - a, sigma2)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    return MCEstimate(mean, se, samples)


def convolution_quadrature(n, T, t, H, rel_tol=1e-6):
    """Closed-form value of the same convolution density by reducing the
    symmetric-matrix integral to an ordered-eigenvalue chamber integral."""
    H = linalg.check_hermitian(H)
    sigma2, alpha = interpolation_scales(T, t)
    c = densities.constants(n)
    tr_h2 = float(np.real(np.einsum("ij,ji->", H, H)))
    hdiag = np.real(np.diag(H))
    pref = (alpha ** (n * (n + 1) / 4.0) * sigma2 ** (-n * n / 2.0)
            / (c.c3 * c.c2))

    def integrand(a):
        h = densities.vandermonde_batch(a)
        tr_diff = tr_h2 - 2.0 * a @ hdiag + np.sum(a * a, axis=-1)
        return h * np.exp(-0.5 * alpha * np.sum(a * a, axis=-1)
                          - tr_diff / (2.0 * sigma2))

    span = 8.0 * math.sqrt(1.0 / alpha + sigma2)
    lo = float(hdiag.min()) - span
    hi = float(hdiag.max()) + span
    val = densities.chamber_integrate(integrand, n, lo, hi, rel_tol=rel_tol)
    return pref * val


def interpolation_identity_check(n, T, t, y, haar_samples, rng):
    """Haar-averaged transition density of the finite-horizon matrix process
    against the ordered-eigenvalue density: returns (MCEstimate, target).

    The matrix transition density is evaluated at conjugations of the
    diagonal matrix of y by Haar unitaries; its eigenvalue-space counterpart
    is the finite-horizon chamber density at y."""
    y = linalg.weyl_vector(y, strict=True)
    gen = as_generator(rng)
    c = densities.constants(n)
    cu = c.c3 / c.c1
    hy2 = linalg.vandermonde(y) ** 2
    u = haar_unitary(n, gen, size=haar_samples)
    vals = np.empty(haar_samples)
    for k in range(haar_samples):
        h = np.einsum("ji,j,jk->ik", np.conj(u[k]), y, u[k])
        vals[k] = convolution_quadrature(n, T, t, h, rel_tol=1e-5)
    vals *= cu * hy2
    est = MCEstimate(float(vals.mean()),
                     float(vals.std(ddof=1) / math.sqrt(haar_samples)),
                     haar_samples)
    target = float(densities.finite_horizon_density(T, 0, None, t, y))
    return est, target
