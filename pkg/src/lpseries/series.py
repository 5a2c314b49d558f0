"""Sampling of truncated Gaussian random series F_N = sum_{n<=N} g_n c_n e_n.

Complex Gaussian convention, fixed package-wide: g = X1 + i*X2 with X1, X2
independent standard normals, so E|g|^2 = 2 and E|g|^4 = 8.  Every
downstream constant (moment ratios, variance laws, the expected-norm
functional) is derived under this convention; do not normalize |g| to unit
second moment anywhere.

Randomness comes from counter-based Philox streams keyed by
(master_seed, stream_index), so draws are reproducible bit-for-bit and
distinct stream indices are statistically independent.  Monte Carlo
estimators consume seeds in fixed-size blocks, one stream per block, which
makes their results independent of any worker-level parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import ConstantModulusBasis
from .specfun import (
    DomainError,
    bessel_j,
    bessel_zeros,
    kernel_g,
    order_for_dimension,
)

_MASK64 = (1 << 64) - 1
MC_BLOCK = 2048

def stream(master_seed, index):
    """Independent reproducible generator for (master seed, stream index)."""
    key = np.array([master_seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

def sample_complex_gaussian(rng, count):
    """count i.i.d. complex Gaussians with E|g|^2 = 2 (unit-variance parts)."""
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")
    x = rng.standard_normal((count, 2))
    return x[:, 0] + 1j * x[:, 1]

def _complex_block(rng, n_seeds, n_modes):
    x = rng.standard_normal((n_seeds, n_modes, 2))
    return x[..., 0] + 1j * x[..., 1]

@lru_cache(maxsize=16)
def _zero_table(nu, n_max):
    return bessel_zeros(nu, n_max)

@dataclass(frozen=True)
class PowerLaw:
    """c_n = a * n^(-alpha); square-summable for alpha > 1/2."""

    a: float
    alpha: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise DomainError(f"amplitude must be positive, got {self.a}")
        if self.alpha <= 0.5:
            raise DomainError(f"alpha must exceed 1/2, got {self.alpha}")

    def values(self, n_max):
        return self.a * np.arange(1, n_max + 1, dtype=float) ** (-self.alpha)

    def describe(self):
        return {"kind": "powerlaw", "a": self.a, "alpha": self.alpha}

@dataclass(frozen=True)
class InverseZero:
    """c_n = scale / z_{n,d}; the Gibbs sequence is InverseZero(2, sqrt(2))."""

    d: int
    scale: float

    def __post_init__(self):
        order_for_dimension(self.d)
        if self.scale <= 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def values(self, n_max):
        nu = order_for_dimension(self.d)
        table = _zero_table(nu, max(n_max, 64))
        return self.scale / table.zeros[:n_max]

    def describe(self):
        return {"kind": "invzero", "d": self.d, "scale": self.scale}

@dataclass(frozen=True)
class Sparse:
    """Nonzero values at the given increasing indices, zero elsewhere."""

    indices: tuple
    amplitudes: tuple

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        amp = np.asarray(self.amplitudes, dtype=float)
        if idx.size != amp.size:
            raise DomainError("indices and amplitudes must have equal length")
        if idx.size and (idx[0] < 1 or np.any(np.diff(idx) <= 0)):
            raise DomainError("indices must be strictly increasing and >= 1")
        if np.any(amp < 0.0):
            raise DomainError("amplitudes must be nonnegative")
        object.__setattr__(self, "indices", tuple(int(i) for i in idx))
        object.__setattr__(self, "amplitudes", tuple(float(v) for v in amp))

    def values(self, n_max):
        out = np.zeros(n_max)
        for i, v in zip(self.indices, self.amplitudes):
            if i <= n_max:
                out[i - 1] = v
        return out

    def describe(self):
        return {
            "kind": "sparse",
            "indices": list(self.indices),
            "amplitudes": list(self.amplitudes),
        }

@dataclass(frozen=True)
class Explicit:
    """First coefficients given verbatim; zero beyond the list."""

    amplitudes: tuple

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=float)
        if np.any(amp < 0.0) or not np.all(np.isfinite(amp)):
            raise DomainError("amplitudes must be finite and nonnegative")
        object.__setattr__(self, "amplitudes", tuple(float(v) for v in amp))

    def values(self, n_max):
        out = np.zeros(n_max)
        take = min(n_max, len(self.amplitudes))
        out[:take] = self.amplitudes[:take]
        return out

    def describe(self):
        return {"kind": "explicit", "amplitudes": list(self.amplitudes)}

@dataclass(frozen=True)
class SeriesDraw:
    """One realization of the truncated series on a grid's nodes."""

    seed: int
    n_modes: int
    coeffs: object
    g: np.ndarray
    field_values: np.ndarray

    def __post_init__(self):
        self.g.setflags(write=False)
        self.field_values.setflags(write=False)

def _require_resolved(basis, n, grid):
    if isinstance(basis, ConstantModulusBasis):
        return
    if n > basis.n_max:
        raise IndexError(f"truncation {n} exceeds basis n_max {basis.n_max}")
    grid.require_frequency(float(basis.zeros.zeros[n - 1]), what=f"mode {n}")

def field_rows(basis, lo, hi, grid):
    """Rows e_n(nodes) for modes lo..hi (1-based, inclusive)."""
    if isinstance(basis, ConstantModulusBasis):
        return np.ones((hi - lo + 1, 1))
    z = basis.zeros.zeros[lo - 1 : hi]
    j = bessel_j(basis.nu, np.outer(z, grid.nodes))
    rows = j / basis.normalizers[lo - 1 : hi, None]
    if basis.nu != 0.0:
        rows = rows / grid.nodes[None, :] ** basis.nu
    return rows

def draw_series(c, basis, n_modes, grid, seed):
    """Sample F_N at the grid nodes; (seed, N, c, basis, grid) fix the draw."""
    _require_resolved(basis, n_modes, grid)
    coeffs = c.values(n_modes)
    g = sample_complex_gaussian(stream(seed, 0), n_modes)
    weights = g * coeffs
    if isinstance(basis, ConstantModulusBasis):
        field = np.array([weights.sum()])
    else:
        field = np.zeros(grid.n_nodes, dtype=complex)
        for lo in range(1, n_modes + 1, 128):
            hi = min(lo + 127, n_modes)
            field += weights[lo - 1 : hi] @ field_rows(basis, lo, hi, grid)
    return SeriesDraw(
        seed=int(seed), n_modes=int(n_modes), coeffs=c, g=g, field_values=field
    )

def pointwise_sigma2(c, basis, r, n_modes):
    """sigma^2(r) = sum_{n<=N} c_n^2 e_n(r)^2."""
    coeffs = c.values(n_modes)
    if isinstance(basis, ConstantModulusBasis):
        return float(np.sum(coeffs**2))
    if n_modes > basis.n_max:
        raise IndexError(f"truncation {n_modes} exceeds basis n_max {basis.n_max}")
    z = basis.zeros.zeros[:n_modes]

    e = kernel_g(basis.d, z * r) * z**basis.nu / basis.normalizers[:n_modes]
    return float(np.sum(coeffs**2 * e**2))

def l2_cauchy_increment(c, basis, m, n, grid, n_seeds, master_seed=0):
    """Monte Carlo estimate of E ||F_m - F_n||^2 in the spatial L2 norm.

    The analytic value is 2 * sum_{m < k <= n} c_k^2; tests compare against
    it at three standard errors.
    """
    if m > n:
        raise DomainError(f"need m <= n, got m={m}, n={n}")
    if m == n:
        return 0.0
    _require_resolved(basis, n, grid)
    coeffs = c.values(n)[m:]
    if isinstance(basis, ConstantModulusBasis):
        total = 0.0
        done = 0
        for b_idx, count in _blocks(n_seeds):
            g = _complex_block(stream(master_seed, b_idx), count, n - m)
            total += float(np.sum(np.abs(g @ coeffs) ** 2)) * basis.measure_mass
            done += count
        return total / done
    rows = field_rows(basis, m + 1, n, grid)
    total = 0.0
    done = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n - m)
        field = (g * coeffs[None, :]) @ rows
        total += float(np.sum((np.abs(field) ** 2) @ grid.weights))
        done += count
    return total / done

def pointwise_field_samples(c, basis, r, n_modes, n_seeds, master_seed=0):
    """F_N(r) over n_seeds independent seeds, as a complex vector."""
    coeffs = c.values(n_modes)
    if isinstance(basis, ConstantModulusBasis):
        e = np.ones(n_modes)
    else:
        if n_modes > basis.n_max:
            raise IndexError(
                f"truncation {n_modes} exceeds basis n_max {basis.n_max}"
            )

        z = basis.zeros.zeros[:n_modes]
        e = kernel_g(basis.d, z * r) * z**basis.nu / basis.normalizers[:n_modes]
    vec = coeffs * e
    out = np.empty(n_seeds, dtype=complex)
    pos = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n_modes)
        out[pos : pos + count] = g @ vec
        pos += count
    return out

def _blocks(n_seeds, block=MC_BLOCK):
    if n_seeds < 1:
        raise DomainError(f"n_seeds must be >= 1, got {n_seeds}")
    idx = 0
    remaining = n_seeds
    while remaining > 0:
        count = min(block, remaining)
        yield idx, count
        idx += 1
        remaining -= count


def map_seed_blocks(fn, n_seeds, workers=1):
    """Apply fn(block_index, count) over the seed blocks, in block order.

    Each block draws from its own counter-based stream, so results do not
    depend on worker count or scheduling; threads only overlap the
    GIL-releasing numpy work.
    """
    blocks = list(_blocks(n_seeds))
    if workers <= 1 or len(blocks) <= 1:
        return [fn(idx, count) for idx, count in blocks]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bc: fn(*bc), blocks))
