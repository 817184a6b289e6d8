"""Samplers for scalar Brownian motions and bridges, the Hermitian
matrix-valued processes built from them, the endpoint-pinned variant, and the
bridge + endpoint decomposition.  Bridges are sampled by the exact Gaussian
conditional construction, so the finite-dimensional laws are exact on any
grid."""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .rng import as_generator


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing times starting at 0, with a horizon bound."""
    times: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1 or t[0] != 0.0:
            raise ValueError("grid must be 1-d and start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("grid times must be strictly increasing")
        if t[-1] > self.horizon + 1e-12:
            raise ValueError("grid extends beyond the horizon")
        object.__setattr__(self, "times", t)

    @property
    def mesh(self):
        return float(np.max(np.diff(self.times))) if self.times.size > 1 \
            else 0.0

    @classmethod
    def uniform(cls, horizon, steps):
        return cls(np.linspace(0.0, horizon, steps + 1), horizon)


@dataclass
class ScalarPath:
    grid: TimeGrid
    values: np.ndarray


@dataclass
class MatrixPath:
    grid: TimeGrid
    values: np.ndarray  # (K, N, N) complex, Hermitian at every time


def sample_brownian(grid, rng, start=0.0):
    """Standard Brownian path on the grid (independent Gaussian increments)."""
    gen = as_generator(rng)
    t = grid.times
    inc = gen.normal(size=t.size - 1) * np.sqrt(np.diff(t))
    vals = start + np.concatenate([[0.0], np.cumsum(inc)])
    return ScalarPath(grid, vals)


def sample_bridge(grid, T, endpoint, rng):
    """Brownian bridge of duration T from 0 to endpoint, sampled on the grid
    by sequential exact Gaussian conditioning."""
    gen = as_generator(rng)
    t = grid.times
    if t[-1] > T + 1e-12:
        raise ValueError("grid extends beyond the bridge duration")
    vals = np.empty(t.size)
    vals[0] = 0.0
    for k in range(t.size - 1):
        remain = T - t[k]
        dt = t[k + 1] - t[k]
        if abs(t[k + 1] - T) < 1e-14:
            vals[k + 1] = endpoint
            continue
        mean = vals[k] + (endpoint - vals[k]) * dt / remain
        var = dt * (T - t[k + 1]) / remain
        vals[k + 1] = mean + math.sqrt(var) * gen.normal()
    return ScalarPath(grid, vals)


def _bridge_batch(times, T, endpoints, gen):
    """Exact bridges from 0 to each endpoint, vectorized: (m, K) values."""
    m = endpoints.size
    vals = np.zeros((m, times.size))
    for k in range(times.size - 1):
        remain = T - times[k]
        dt = times[k + 1] - times[k]
        if abs(times[k + 1] - T) < 1e-14:
            vals[:, k + 1] = endpoints
            continue
        mean = vals[:, k] + (endpoints - vals[:, k]) * dt / remain
        var = dt * (T - times[k + 1]) / remain
        vals[:, k + 1] = mean + math.sqrt(var) * gen.normal(size=m)
    return vals


def _brownian_batch(times, m, gen):
    inc = gen.normal(size=(m, times.size - 1)) * np.sqrt(np.diff(times))
    return np.concatenate([np.zeros((m, 1)), np.cumsum(inc, axis=1)], axis=1)


@dataclass
class XiTDrivers:
    """Scalar drivers of one finite-horizon matrix-process realization:
    Brownian paths for every i <= j (with their value at the horizon) and
    duration-T bridges ending at 0 for every i < j."""
    n: int
    grid: TimeGrid
    horizon: float
    breal: np.ndarray      # (n_pairs_leq, K) Brownian values on grid
    breal_end: np.ndarray  # (n_pairs_leq,) Brownian values at the horizon
    bridges: np.ndarray    # (n_pairs_lt, K) bridge values on grid


def pairs_upper(n, include_diag):
    k = 0 if include_diag else 1
    iu, ju = np.triu_indices(n, k=k)
    return list(zip(iu.tolist(), ju.tolist()))


def sample_xit_drivers(n, grid, T, rng):
    """Sample the independent scalar drivers of the finite-horizon process."""
    gen = as_generator(rng)
    times = grid.times
    if times[-1] > T + 1e-12:
        raise ValueError("grid extends beyond the horizon")
    leq = pairs_upper(n, include_diag=True)
    lt = pairs_upper(n, include_diag=False)
    # Brownian drivers, extended to the horizon for the decomposition
    if abs(times[-1] - T) < 1e-14:
        ext = times
    else:
        ext = np.concatenate([times, [T]])
    bre = _brownian_batch(ext, len(leq), gen)
    breal = bre[:, :times.size]
    breal_end = bre[:, -1]
    bridges = _bridge_batch(times, T, np.zeros(len(lt)), gen)
    return XiTDrivers(n, grid, T, breal, breal_end, bridges)


def _assemble(n, times_count, diag, offre, offim):
    """Hermitian path (K, n, n) from per-pair scalar paths (pairs, K)."""
    out = np.zeros((times_count, n, n), dtype=complex)
    leq = pairs_upper(n, include_diag=True)
    lt = pairs_upper(n, include_diag=False)
    di = 0
    for idx, (i, j) in enumerate(leq):
        if i == j:
            out[:, i, i] = diag[di]
            di += 1
    for idx, (i, j) in enumerate(lt):
        z = (offre[idx] + 1j * offim[idx]) / math.sqrt(2.0)
        out[:, i, j] = z
        out[:, j, i] = np.conj(z)
    return out


def _split_leq(n, paths_leq):
    """Split (pairs_leq, K) into diagonal (n, K) and off-diagonal rows."""
    leq = pairs_upper(n, include_diag=True)
    diag_rows = [k for k, (i, j) in enumerate(leq) if i == j]
    off_rows = [k for k, (i, j) in enumerate(leq) if i != j]
    return paths_leq[diag_rows], paths_leq[off_rows]


def xit_from_drivers(drivers):
    """Assemble the finite-horizon Hermitian process from its drivers."""
    diag, offre = _split_leq(drivers.n, drivers.breal)
    return MatrixPath(drivers.grid,
                      _assemble(drivers.n, drivers.grid.times.size,
                                diag, offre, drivers.bridges))


def build_matrix_process(kind, n, grid, rng, T=None):
    """Sample one realization of a Hermitian matrix-valued process.

    kind: "gue" (Brownian real and imaginary parts), "goe" (real symmetric
    Brownian), or "xit" (Brownian real parts, bridge imaginary parts pinned
    to 0 at the horizon T).
    """
    gen = as_generator(rng)
    kind = kind.lower()
    times = grid.times
    n_lt = len(pairs_upper(n, include_diag=False))
    n_leq = len(pairs_upper(n, include_diag=True))
    if kind == "xit":
        if T is None:
            raise ValueError("xit needs a horizon T")
        return xit_from_drivers(sample_xit_drivers(n, grid, T, gen))
    if kind == "gue":
        bre = _brownian_batch(times, n_leq, gen)
        bim = _brownian_batch(times, n_lt, gen)
        diag, offre = _split_leq(n, bre)
        return MatrixPath(grid, _assemble(n, times.size, diag, offre, bim))
    if kind == "goe":
        bre = _brownian_batch(times, n_leq, gen)
        diag, offre = _split_leq(n, bre)
        zero = np.zeros((n_lt, times.size))
        vals = _assemble(n, times.size, diag, offre, zero)
        return MatrixPath(grid, vals)
    raise ValueError("unknown process kind %r" % (kind,))


def build_pinned_process(n, grid, T, H, rng):
    """Finite-horizon process pinned to end exactly at the Hermitian matrix H.

    Every scalar component is an independent bridge; off-diagonal components
    end at sqrt(2) times the corresponding entry before the 1/sqrt(2)
    scaling, so the matrix value at the horizon is H itself.
    """
    H = linalg.check_hermitian(H)
    if H.shape[0] != n:
        raise ValueError("H has wrong dimension")
    gen = as_generator(rng)
    times = grid.times
    leq = pairs_upper(n, include_diag=True)
    lt = pairs_upper(n, include_diag=False)
    ends_re = np.array([H[i, j].real * (1.0 if i == j else math.sqrt(2.0))
                        for (i, j) in leq])
    ends_im = np.array([H[i, j].imag * math.sqrt(2.0) for (i, j) in lt])
    bre = _bridge_batch(times, T, ends_re, gen)
    bim = _bridge_batch(times, T, ends_im, gen)
    diag, offre = _split_leq(n, bre)
    return MatrixPath(grid, _assemble(n, times.size, diag, offre, bim))


def theta_decomposition(drivers):
    """Split the finite-horizon process into its bridge part (distributed as
    a complex Hermitian Gaussian ensemble at every fixed time) and the
    endpoint part (real symmetric), summing exactly to the original path."""
    n, grid, T = drivers.n, drivers.grid, drivers.horizon
    times = grid.times
    frac = times / T
    slope = drivers.breal_end[:, None] * frac[None, :]
    bridged = drivers.breal - slope
    diag1, offre1 = _split_leq(n, bridged)
    theta1 = _assemble(n, times.size, diag1, offre1, drivers.bridges)
    diag2, offre2 = _split_leq(n, slope)
    zero = np.zeros_like(drivers.bridges)
    theta2 = _assemble(n, times.size, diag2, offre2, zero)
    return MatrixPath(grid, theta1), MatrixPath(grid, theta2)


def eigenvalue_path(mp):
    """Ascending eigenvalues at every grid time, shape (K, N)."""
    return np.linalg.eigvalsh(mp.values)


# Fast single-time marginal samplers (exact laws, used by the statistical
# verification suites where whole paths are not needed).

def sample_gue(n, t, size, rng):
    """(size, n, n) Hermitian draws from the GUE law at variance scale t."""
    gen = as_generator(rng)
    out = np.zeros((size, n, n), dtype=complex)
    d = gen.normal(scale=math.sqrt(t), size=(size, n))
    for i in range(n):
        out[:, i, i] = d[:, i]
    for (i, j) in pairs_upper(n, include_diag=False):
        z = (gen.normal(scale=math.sqrt(t / 2.0), size=size)
             + 1j * gen.normal(scale=math.sqrt(t / 2.0), size=size))
        out[:, i, j] = z
        out[:, j, i] = np.conj(z)
    return out


def sample_goe(n, t, size, rng):
    """(size, n, n) symmetric draws from the GOE law at variance scale t."""
    gen = as_generator(rng)
    out = np.zeros((size, n, n))
    d = gen.normal(scale=math.sqrt(t), size=(size, n))
    for i in range(n):
        out[:, i, i] = d[:, i]
    for (i, j) in pairs_upper(n, include_diag=False):
        v = gen.normal(scale=math.sqrt(t / 2.0), size=size)
        out[:, i, j] = v
        out[:, j, i] = v
    return out


def sample_xit_marginal(n, t, T, size, rng):
    """(size, n, n) draws of the finite-horizon process at a fixed time t."""
    if not 0 < t <= T:
        raise ValueError("need 0 < t <= T")
    gen = as_generator(rng)
    out = np.zeros((size, n, n), dtype=complex)
    d = gen.normal(scale=math.sqrt(t), size=(size, n))
    for i in range(n):
        out[:, i, i] = d[:, i]
    var_im = t * (T - t) / T
    for (i, j) in pairs_upper(n, include_diag=False):
        z = (gen.normal(scale=math.sqrt(t / 2.0), size=size)
             + 1j * gen.normal(scale=math.sqrt(var_im / 2.0), size=size))
        out[:, i, j] = z
        out[:, j, i] = np.conj(z)
    return out


def matrix_path_csv_rows(mp):
    """Rows for the CSV dump: time, then entries row-major with real and
    imaginary parts interleaved."""
    rows = []
    for k, t in enumerate(mp.grid.times):
        row = [t]
        for i in range(mp.values.shape[1]):
            for j in range(mp.values.shape[2]):
                row.append(mp.values[k, i, j].real)
                row.append(mp.values[k, i, j].imag)
        rows.append(row)
    return rows
