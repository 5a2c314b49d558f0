"""Orthonormal bases of the weighted radial L2 space.

RadialBasis holds the Bessel eigenfunctions of the Laplacian on the unit
ball restricted to radial profiles,

    e_n(r) = beta_n^-1 z_n^((d-2)/2) G(z_n r),

orthonormal in L2([0,1], r^(d-1) dr).  The normalizer beta_n is the
L2(r dr) norm of J_nu(z_n r) for every dimension; the r^(-(d-2)/2)
prefactor of the eigenfunction reconciles the two weights, which the test
suite checks explicitly through the Gram matrix.

ConstantModulusBasis is the flat baseline: |e_n| identically 1 on a
probability measure, standing in for the torus exponentials.  Every
quantity computed in this package depends on the basis only through |e_n|,
so no phases are modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureGrid, build_grid, lp_norm
from .specfun import (
    DomainError,
    ZeroTable,
    bessel_j,
    bessel_zeros,
    kernel_g,
    kernel_g_at_zero,
    order_for_dimension,
)

_BLOCK = 128
_EVAL_CHUNK = 1 << 20


@dataclass(frozen=True)
class RadialBasis:
    d: int
    nu: float
    zeros: ZeroTable
    normalizers: np.ndarray
    n_max: int

    def __post_init__(self):
        self.normalizers.setflags(write=False)

    def zero(self, n):
        return self.zeros.zero(n)

    def normalizer(self, n):
        if not 1 <= n <= self.n_max:
            raise IndexError(f"mode index {n} outside 1..{self.n_max}")
        return float(self.normalizers[n - 1])


@dataclass(frozen=True)
class ConstantModulusBasis:
    """Baseline basis with |e_n(r)| = 1 under a probability measure."""

    modulus: float = 1.0
    measure_mass: float = 1.0


def build_radial_basis(d, n_max, grid):
    """Zeros plus quadrature normalizers; grid must resolve mode n_max."""
    nu = order_for_dimension(d)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    table = bessel_zeros(nu, n_max)
    grid.require_frequency(float(table.zeros[-1]), what=f"mode {n_max}")
    w_rdr = grid.raw_weights * grid.nodes
    beta = np.empty(n_max)
    for lo in range(0, n_max, _BLOCK):
        hi = min(lo + _BLOCK, n_max)
        j = bessel_j(nu, np.outer(table.zeros[lo:hi], grid.nodes))
        beta[lo:hi] = np.sqrt((j * j) @ w_rdr)
    return RadialBasis(d=int(d), nu=nu, zeros=table, normalizers=beta, n_max=int(n_max))


def eval_e(basis, n, r):
    """e_n at radius r in [0,1], through the regular G-kernel form."""
    if not 1 <= n <= basis.n_max:
        raise IndexError(f"mode index {n} outside 1..{basis.n_max}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("radius must lie in [0,1]")
    z = basis.zeros.zeros[n - 1]
    scale = z**basis.nu / basis.normalizers[n - 1]
    return scale * kernel_g(basis.d, z * arr)


def e_squared_block(basis, lo, hi, nodes):
    """(hi-lo) x len(nodes) matrix of e_n(r)^2 for interior nodes, 1-based lo.

    Uses the raw r^(-nu) J form, valid off r = 0; analysis passes use it to
    batch over modes without touching the G series mode by mode.
    """
    z = basis.zeros.zeros[lo - 1 : hi]
    j = bessel_j(basis.nu, np.outer(z, nodes))
    out = j * j
    out /= basis.normalizers[lo - 1 : hi, None] ** 2
    if basis.nu != 0.0:
        out /= nodes[None, :] ** (2.0 * basis.nu)
    return out


def lp_norm_of_e(basis, n, p, grid):
    """L^p(r^(d-1) dr) norm of e_n by weighted quadrature."""
    if isinstance(basis, ConstantModulusBasis):
        return basis.measure_mass ** (1.0 / p)
    if p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    if not 1 <= n <= basis.n_max:
        raise IndexError(f"mode index {n} outside 1..{basis.n_max}")
    z = float(basis.zeros.zeros[n - 1])
    grid.require_frequency(z, what=f"mode {n}")
    total = 0.0
    for lo in range(0, grid.n_nodes, _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, grid.n_nodes)
        e = eval_e(basis, n, grid.nodes[lo:hi])
        total += float(np.sum(grid.weights[lo:hi] * np.abs(e) ** p))
    return total ** (1.0 / p)


def sup_norm_of_e(basis, n, grid):
    """Max of |e_n| over the closed interval (grid nodes plus r = 0)."""
    if not 1 <= n <= basis.n_max:
        raise IndexError(f"mode index {n} outside 1..{basis.n_max}")
    best = abs(float(eval_e(basis, n, 0.0)))
    for lo in range(0, grid.n_nodes, _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, grid.n_nodes)
        e = eval_e(basis, n, grid.nodes[lo:hi])
        best = max(best, float(np.max(np.abs(e))))
    return best


def delta_bound(n, p, d):
    """Three-regime growth bound for ||e_n||_p.

    1 below the bend p = 2d/(d-1), a log power at the bend, and
    n^(-d/p + (d-1)/2) above it.
    """
    if p < 2.0:
        raise DomainError(f"delta_bound requires p >= 2, got {p}")
    if n < 1:
        raise DomainError(f"mode index must be >= 1, got {n}")
    bend = 2.0 * d / (d - 1.0)
    if abs(p - bend) <= 1e-12:
        return math.log(2.0 + n) ** ((d - 1.0) / (2.0 * d))
    if p < bend:
        return 1.0
    return float(n) ** (-d / p + (d - 1.0) / 2.0)


def concentration_radius(basis):
    """Largest s such that |G| >= G(0)/2 on all of [0, s].

    Inside r <= s/z_n the mode keeps at least half its central height, which
    pins the n^((d-1)/2) concentration growth near the origin.
    """
    d = basis.d if isinstance(basis, RadialBasis) else 2
    half = 0.5 * kernel_g_at_zero(d)
    step = 1e-3
    s = np.arange(0.0, 50.0, step)
    vals = np.abs(kernel_g(d, s))
    below = np.nonzero(vals < half)[0]
    if below.size == 0:
        raise DomainError("kernel never drops below half its central value")
    lo = s[below[0] - 1]
    hi = s[below[0]]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(kernel_g(d, mid)) >= half:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mode_norm_scan(d, p, ns, points_per_gap=4, gl_points=10, zeros=None):
    """beta_n and ||e_n||_p at the requested mode indices, via substitution.

    Changing variables t = z_n r turns both the normalizer integral and the
    p-norm integral into cumulative integrals of |G| over [0, z_n], so one
    streaming pass with panel edges at the Bessel zeros covers every
    requested n.  This evaluates norms for indices far beyond what a dense
    radial grid could hold.

    Returns (zeros[ns], beta[ns], norm_p[ns]) as arrays aligned with ns,
    which must be increasing 1-based indices.
    """
    nu = order_for_dimension(d)
    ns = np.asarray(ns, dtype=int)
    if ns.size == 0 or np.any(np.diff(ns) <= 0) or ns[0] < 1:
        raise DomainError("ns must be strictly increasing indices >= 1")
    n_top = int(ns[-1])
    table = zeros if zeros is not None else bessel_zeros(nu, n_top)
    if table.n_max < n_top:
        raise DomainError("supplied zero table is shorter than max(ns)")
    edges = np.concatenate([[0.0], table.zeros[:n_top]])
    x, w = np.polynomial.legendre.leggauss(gl_points)
    i2 = np.empty(n_top)
    ip = np.empty(n_top)
    acc2 = 0.0
    accp = 0.0
    chunk = 4096
    for start in range(0, n_top, chunk):
        stop = min(start + chunk, n_top)
        lo = edges[start:stop]
        hi = edges[start + 1 : stop + 1]
        frac = np.linspace(0.0, 1.0, points_per_gap + 1)
        sub = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        a = sub[:, :-1].reshape(-1, 1)
        b = sub[:, 1:].reshape(-1, 1)
        t = (0.5 * (b - a) * x[None, :] + 0.5 * (b + a)).ravel()
        ww = (0.5 * (b - a) * w[None, :]).ravel()
        g = np.abs(kernel_g(d, t))
        per_panel_2 = (ww * g * g * t ** (2.0 * nu + 1.0)).reshape(
            stop - start, points_per_gap * gl_points
        )
        per_panel_p = (ww * g**p * t ** (d - 1.0)).reshape(
            stop - start, points_per_gap * gl_points
        )
        gap2 = per_panel_2.sum(axis=1)
        gapp = per_panel_p.sum(axis=1)
        i2[start:stop] = acc2 + np.cumsum(gap2)
        ip[start:stop] = accp + np.cumsum(gapp)
        acc2 = i2[stop - 1]
        accp = ip[stop - 1]
    z = table.zeros[ns - 1]
    beta = np.sqrt(i2[ns - 1]) / z
    norms = ip[ns - 1] ** (1.0 / p) * z ** (nu - d / p) / beta
    return z.copy(), beta, norms


def basis_norm_rows(basis, grid, p_list):
    """Rows (n, z_n, beta_n, sup_norm, norms at each p) for table dumps."""
    rows = []
    for n in range(1, basis.n_max + 1):
        row = [
            float(n),
            basis.zero(n),
            basis.normalizer(n),
            sup_norm_of_e(basis, n, grid),
        ]
        row.extend(lp_norm_of_e(basis, n, p, grid) for p in p_list)
        rows.append(row)
    return rows
