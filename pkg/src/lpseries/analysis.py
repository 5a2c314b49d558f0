"""Analytic machinery: moment constants, the deterministic expected-norm
functional, convergence/divergence classification over truncation ladders,
critical-exponent bracketing, the weighted-sum growth exponent, the
adversarial sparse construction, the exponential-moment probe, and the
Gibbs weight for the cubic defocusing NLS on the disc.

Classification works on the deterministic ladder

    M_N(p) = d(p) * || sum_{n<=N} c_n^2 e_n^2 ||_{p/2}^{p/2},

which equals E||F_N||_p^p under the package's complex-Gaussian convention.
Verdicts come from the pairwise log-log slopes s_j between consecutive
rungs: a flat tail (s_last < CONV_SLOPE) or geometrically collapsing slopes
(ratios <= CONV_RATIO) reads as convergent, while a persistent slope
(s_last > DIV_SLOPE with the final slope ratio >= DIV_RATIO) reads as
divergent.  Everything in between stays inconclusive and only widens
brackets.  All rules act on slopes and ratios of logs, so every verdict is
invariant under positive rescaling of the coefficient sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import (
    ConstantModulusBasis,
    RadialBasis,
    build_radial_basis,
    mode_norm_scan,
)
from .quadrature import build_grid
from .series import (
    Sparse,
    InverseZero,
    _blocks,
    _complex_block,
    field_rows,
    stream,
)
from .specfun import DomainError, bessel_zeros, order_for_dimension

CONV_SLOPE = 0.01
DIV_SLOPE = 0.05
CONV_RATIO = 0.85
DIV_RATIO = 0.90

DEFAULT_LADDER = (64, 128, 256, 512, 1024)
THEOREM_LADDER = (1024, 2048, 4096, 8192, 16384)

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

_TINY_WEIGHT = np.finfo(float).tiny


class NoSuchSequenceError(RuntimeError):
    """The norm sweep exhausted its cap without reaching the targets."""


@dataclass(frozen=True)
class MomentConstants:
    """Moment ratio C_p = Gamma(p/2+1) and d_p = 2^(p/2) C_p.

    |g|^2/2 is a unit-rate exponential under the N_C(0,1) convention, so
    E|g|^p = 2^(p/2) Gamma(p/2+1); dividing by (E|g|^2)^(p/2) = 2^(p/2)
    leaves C_p, and d_p restores the 2^(p/2) for the variance-sum form.
    """

    p: float
    c_p: float
    d_p: float


def moment_constants(p):
    if p <= 0.0:
        raise DomainError(f"p must be positive, got {p}")
    c_p = math.gamma(p / 2.0 + 1.0)
    return MomentConstants(p=float(p), c_p=c_p, d_p=2.0 ** (p / 2.0) * c_p)


def expected_lp_pth_power(c, basis, n_modes, p, grid=None):
    """Deterministic E||F_N||_p^p = d(p) ||S_N||_{p/2}^{p/2}, no sampling."""
    if p < 2.0:
        raise DomainError(f"p must be >= 2, got {p}")
    d_p = moment_constants(p).d_p
    coeffs = c.values(n_modes)
    if isinstance(basis, ConstantModulusBasis):
        return d_p * float(np.sum(coeffs**2)) ** (p / 2.0) * basis.measure_mass
    if n_modes > basis.n_max:
        raise IndexError(f"truncation {n_modes} exceeds basis n_max {basis.n_max}")
    grid.require_frequency(float(basis.zeros.zeros[n_modes - 1]), f"mode {n_modes}")
    s = np.zeros(grid.n_nodes)
    from .basis import e_squared_block

    for lo in range(1, n_modes + 1, 128):
        hi = min(lo + 127, n_modes)
        s += (coeffs[lo - 1 : hi] ** 2) @ e_squared_block(basis, lo, hi, grid.nodes)
    return d_p * float(np.sum(grid.weights * s ** (p / 2.0)))


def mc_lp_pth_power(c, basis, n_modes, p, grid, n_seeds, master_seed=0):
    """Monte Carlo (mean, standard error) of ||F_N||_p^p over n_seeds draws."""
    coeffs = c.values(n_modes)
    rows = field_rows(basis, 1, n_modes, grid)
    w = (
        np.array([basis.measure_mass])
        if isinstance(basis, ConstantModulusBasis)
        else grid.weights
    )
    total = 0.0
    total_sq = 0.0
    done = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n_modes)
        field = (g * coeffs[None, :]) @ rows
        vals = (np.abs(field) ** p) @ w
        total += float(vals.sum())
        total_sq += float((vals**2).sum())
        done += count
    mean = total / done
    var = max(total_sq / done - mean**2, 0.0)
    return mean, math.sqrt(var / done)


@dataclass(frozen=True)
class DivergenceVerdict:
    p: float
    verdict: str
    fitted_growth_exponent: float
    ladder: tuple
    pair_slopes: tuple
    slope_ratios: tuple


def _ladder_verdict(rungs, values):
    rungs = np.asarray(rungs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(rungs) < 5:
        raise DomainError("classification needs at least 5 ladder rungs")
    if np.any(values <= 0.0):
        raise DomainError("ladder values must be positive")
    ln = np.log(rungs)
    lv = np.log(values)
    slopes = np.diff(lv) / np.diff(ln)
    design = np.vstack([np.ones_like(ln), ln]).T
    fitted = float(np.linalg.lstsq(design, lv, rcond=None)[0][1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = slopes[1:] / slopes[:-1]
    verdict = INCONCLUSIVE
    if slopes[-1] < CONV_SLOPE:
        verdict = CONVERGENT
    elif np.all(slopes > 0.0) and np.all(np.isfinite(ratios)) and np.max(
        ratios
    ) <= CONV_RATIO:
        verdict = CONVERGENT
    elif (
        slopes[-1] > DIV_SLOPE
        and np.isfinite(ratios[-1])
        and ratios[-1] >= DIV_RATIO
        and np.all(np.diff(values) > 0.0)
    ):
        verdict = DIVERGENT
    return verdict, fitted, tuple(slopes), tuple(ratios)


class RadialFamily:
    """Builds radial bases/grids at ladder resolution for dimension d."""

    def __init__(self, d, points_per_panel=10):
        self.d = int(d)
        self.nu = order_for_dimension(d)
        self.points_per_panel = int(points_per_panel)
        self._norm_zeros = None

    def label(self):
        return f"radial(d={self.d})"

    def ladder_table(self, c, rungs):
        """S_N snapshots on one grid resolving the deepest rung.

        One Bessel matrix per mode block feeds both the normalizer
        quadrature (weight r dr) and the mode-square accumulation.
        """
        rungs = tuple(int(n) for n in rungs)
        n_max = rungs[-1]
        zeros = bessel_zeros(self.nu, n_max)
        grid = build_grid(self.d, float(zeros.zeros[-1]), self.points_per_panel)
        coeffs = c.values(n_max)
        from .specfun import bessel_j

        w_rdr = grid.raw_weights * grid.nodes
        r_pow = grid.nodes ** (2.0 * self.nu) if self.nu != 0.0 else None
        s = np.zeros(grid.n_nodes)
        snapshots = []
        bounds = (0,) + rungs
        for lo_rung, hi_rung in zip(bounds[:-1], bounds[1:]):
            for lo in range(lo_rung + 1, hi_rung + 1, 128):
                hi = min(lo + 127, hi_rung)
                j2 = bessel_j(self.nu, np.outer(zeros.zeros[lo - 1 : hi], grid.nodes))
                np.square(j2, out=j2)
                beta2 = j2 @ w_rdr
                contrib = (coeffs[lo - 1 : hi] ** 2 / beta2) @ j2
                if r_pow is not None:
                    contrib /= r_pow
                s += contrib
            snapshots.append(s.copy())
        return LadderTable(rungs=rungs, snapshots=snapshots, weights=grid.weights)

    @staticmethod
    def _normalizers(zeros, grid):
        from .specfun import bessel_j

        w_rdr = grid.raw_weights * grid.nodes
        beta = np.empty(zeros.n_max)
        for lo in range(0, zeros.n_max, 128):
            hi = min(lo + 128, zeros.n_max)
            j = bessel_j(zeros.nu, np.outer(zeros.zeros[lo:hi], grid.nodes))
            beta[lo:hi] = np.sqrt((j * j) @ w_rdr)
        return beta

    def mode_norms(self, p, n_top):
        """||e_n||_p for every n <= n_top via the substitution scan."""
        if self._norm_zeros is None or self._norm_zeros.n_max < n_top:
            self._norm_zeros = bessel_zeros(self.nu, n_top)
        ns = np.arange(1, n_top + 1)
        _, _, norms = mode_norm_scan(self.d, p, ns, zeros=self._norm_zeros)
        return norms

    def sweep_norms(self, p, candidates):
        """||e_n||_p at an increasing candidate index list (may be huge)."""
        candidates = np.asarray(candidates, dtype=int)
        zeros = bessel_zeros(self.nu, int(candidates[-1]))
        _, _, norms = mode_norm_scan(self.d, p, candidates, zeros=zeros)
        return norms


class ConstantModulusFamily:
    """Flat baseline: |e_n| = 1 on a unit-mass measure."""

    def __init__(self):
        self.basis = ConstantModulusBasis()

    def label(self):
        return "constant-modulus"

    def ladder_table(self, c, rungs):
        rungs = tuple(int(n) for n in rungs)
        coeffs = c.values(rungs[-1])
        energy = np.cumsum(coeffs**2)
        snapshots = [np.array([energy[n - 1]]) for n in rungs]
        return LadderTable(
            rungs=rungs,
            snapshots=snapshots,
            weights=np.array([self.basis.measure_mass]),
        )

    def mode_norms(self, p, n_top):
        return np.full(n_top, self.basis.measure_mass ** (1.0 / p))

    def sweep_norms(self, p, candidates):
        return np.full(len(candidates), self.basis.measure_mass ** (1.0 / p))


@dataclass
class LadderTable:
    rungs: tuple
    snapshots: list
    weights: np.ndarray

    def values(self, p):
        d_p = moment_constants(p).d_p
        return np.array(
            [d_p * float(np.sum(self.weights * s ** (p / 2.0))) for s in self.snapshots]
        )


def classify_divergence(c, family, p, rungs=DEFAULT_LADDER, table=None):
    """Verdict for (c, family, p) from the deterministic expected-norm ladder."""
    if table is None:
        table = family.ladder_table(c, rungs)
    values = table.values(p)
    verdict, fitted, slopes, ratios = _ladder_verdict(table.rungs, values)
    return DivergenceVerdict(
        p=float(p),
        verdict=verdict,
        fitted_growth_exponent=fitted,
        ladder=tuple(zip(table.rungs, values)),
        pair_slopes=slopes,
        slope_ratios=ratios,
    )


@dataclass(frozen=True)
class PcrBracket:
    lower: float
    upper: float
    theorem_lower: float
    theorem_upper: float
    probes: tuple

    @property
    def theorem_bracket(self):
        return (self.theorem_lower, self.theorem_upper)


def _largest_with(probe, p_lo, p_hi, tol, predicate):
    """Largest p in [p_lo, p_hi] satisfying predicate; assumes p_lo does."""
    lo, hi = p_lo, p_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(probe(mid)):
            lo = mid
        else:
            hi = mid
    return lo


def _smallest_with(probe, p_lo, p_hi, tol, predicate):
    """Smallest p in [p_lo, p_hi] satisfying predicate; assumes p_hi does."""
    lo, hi = p_lo, p_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(probe(mid)):
            hi = mid
        else:
            lo = mid
    return hi


def bracket_pcr(
    c,
    family,
    p_min=2.0,
    p_max=20.0,
    tol=0.25,
    rungs=DEFAULT_LADDER,
    theorem_rungs=THEOREM_LADDER,
):
    """Empirical and partial-sum brackets for the critical exponent.

    The empirical bracket bisects the classifier between the largest
    convergent p and the smallest divergent p; inconclusive probes widen
    the bracket instead of forcing a side.  The theorem bracket applies the
    same ladder rules to the partial sums sum c_n^2 ||e_n||_p^2 (whose
    convergence forces a.s. finiteness) and sum c_n^p ||e_n||_p^p (whose
    divergence forces a.s. blow-up).  Exponents above p_max are reported
    as +inf.
    """
    if tol < 0.1:
        raise DomainError(f"tol must be >= 0.1, got {tol}")
    table = family.ladder_table(c, rungs)
    cache = {}

    def probe(p):
        key = round(p, 10)
        if key not in cache:
            cache[key] = classify_divergence(c, family, p, table=table).verdict
        return cache[key]

    v_lo = probe(p_min)
    v_hi = probe(p_max)
    if v_hi == DIVERGENT:
        upper = _smallest_with(probe, p_min, p_max, tol, lambda v: v == DIVERGENT)
    else:
        upper = math.inf
    if v_lo != CONVERGENT:
        lower = p_min
    elif v_hi == CONVERGENT:
        lower = p_max
    else:
        lower = _largest_with(probe, p_min, p_max, tol, lambda v: v == CONVERGENT)

    theorem_lower, theorem_upper = _theorem_bracket(
        c, family, p_min, p_max, tol, theorem_rungs
    )
    return PcrBracket(
        lower=float(lower),
        upper=float(upper),
        theorem_lower=float(theorem_lower),
        theorem_upper=float(theorem_upper),
        probes=tuple(sorted(cache.items())),
    )


def theorem_series_values(c, family, p, rungs=THEOREM_LADDER, which=1):
    """Partial sums at the rungs of the two theorem series."""
    n_top = int(rungs[-1])
    norms = family.mode_norms(p, n_top)
    coeffs = c.values(n_top)
    if which == 1:
        terms = coeffs**2 * norms**2
    else:
        terms = coeffs**p * norms**p
    sums = np.cumsum(terms)
    return np.array([sums[n - 1] for n in rungs])


def _theorem_bracket(c, family, p_min, p_max, tol, rungs):
    cache = {}

    def verdict_of(p, which):
        key = (round(p, 10), which)
        if key not in cache:
            values = theorem_series_values(c, family, p, rungs, which)
            if np.all(values > 0.0):
                cache[key] = _ladder_verdict(rungs, values)[0]
            else:
                cache[key] = CONVERGENT if values[-1] == 0.0 else INCONCLUSIVE
        return cache[key]

    if verdict_of(p_max, 1) == CONVERGENT:
        theorem_lower = math.inf
    elif verdict_of(p_min, 1) != CONVERGENT:
        theorem_lower = p_min
    else:
        theorem_lower = _largest_with(
            lambda p: verdict_of(p, 1), p_min, p_max, tol, lambda v: v == CONVERGENT
        )
    if verdict_of(p_max, 2) == DIVERGENT:
        theorem_upper = _smallest_with(
            lambda p: verdict_of(p, 2), p_min, p_max, tol, lambda v: v == DIVERGENT
        )
    else:
        theorem_upper = math.inf
    return theorem_lower, theorem_upper


def alpha_star(c, d, rungs=DEFAULT_LADDER):
    """Growth exponent of sum_{n<=N} n^(d-1) c_n^2, clamped into [0, d-1]."""
    if len(rungs) < 5:
        raise DomainError("alpha_star needs at least 5 ladder rungs")
    n_top = int(rungs[-1])
    coeffs = c.values(n_top)
    n = np.arange(1, n_top + 1, dtype=float)
    sums = np.cumsum(n ** (d - 1) * coeffs**2)
    t = np.array([sums[k - 1] for k in rungs])
    if np.any(t <= 0.0):
        return 0.0
    ln = np.log(np.asarray(rungs, dtype=float))
    design = np.vstack([np.ones_like(ln), ln]).T
    slope = float(np.linalg.lstsq(design, np.log(t), rcond=None)[0][1])
    return min(max(slope, 0.0), float(d - 1))


def divergence_exponent_bound(alpha, d):
    """2d / alpha*; divergence is guaranteed for exponents above it."""
    if alpha < 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0.0:
        return math.inf
    return 2.0 * d / alpha


def construct_diverging_sequence(family, p, k_targets, n_cap=1 << 20):
    """Sparse adversarial sequence with ||e_{n_k}||_p >= 2^k, c_{n_k} = 2^-k.

    Sweeps a geometric index ladder; each stage doubles the cap until all
    targets are hit or n_cap is exhausted, in which case the basis is
    uniformly bounded as far as the sweep can see and NoSuchSequenceError
    is raised.
    """
    if k_targets < 1:
        raise DomainError(f"need at least one target, got {k_targets}")
    indices = []
    stage_cap = 1024
    while True:
        stage_cap = min(stage_cap, n_cap)
        candidates = _geometric_candidates(stage_cap)
        norms = family.sweep_norms(p, candidates)
        indices = []
        k = 1
        for idx, norm in zip(candidates, norms):
            if indices and idx <= indices[-1]:
                continue
            if norm >= 2.0**k:
                indices.append(int(idx))
                k += 1
                if k > k_targets:
                    break
        if k > k_targets:
            break
        if stage_cap >= n_cap:
            raise NoSuchSequenceError(
                f"no index below {n_cap} reaches norm 2^{k} at p={p}; "
                f"the mode norms appear uniformly bounded"
            )
        stage_cap *= 8
    amplitudes = [2.0**-k for k in range(1, k_targets + 1)]
    return Sparse(indices=tuple(indices), amplitudes=tuple(amplitudes))


def _geometric_candidates(cap):
    out = [1]
    while out[-1] * 2 <= cap:
        out.append(out[-1] * 2)
    if out[-1] != cap:
        out.append(cap)
    return np.asarray(out, dtype=int)


def fernique_probe(c, basis, p, n_modes, eps_ladder, n_seeds, grid, master_seed=0):
    """Empirical exponential moments E exp(eps ||F_N||_p^2) across eps.

    Overflowing averages are reported as +inf rather than raised; in
    divergent regimes the estimator is heavy-tailed and makes no claim.
    """
    coeffs = c.values(n_modes)
    rows = field_rows(basis, 1, n_modes, grid)
    w = (
        np.array([basis.measure_mass])
        if isinstance(basis, ConstantModulusBasis)
        else grid.weights
    )
    norms_sq = np.empty(n_seeds)
    pos = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n_modes)
        field = (g * coeffs[None, :]) @ rows
        norms_sq[pos : pos + count] = ((np.abs(field) ** p) @ w) ** (2.0 / p)
        pos += count
    out = []
    for eps in eps_ladder:
        if eps == 0.0:
            out.append((0.0, 1.0))
            continue
        with np.errstate(over="ignore"):
            vals = np.exp(eps * norms_sq)
        mean = float(np.mean(vals))
        out.append((float(eps), mean if math.isfinite(mean) else math.inf))
    return out


def _gibbs_l4_fourth(field, grid):
    # Disc L4 norm to the fourth: angular mass 2*pi times the radial integral.
    return 2.0 * np.pi * float(np.sum(grid.weights * np.abs(field) ** 4))


def _require_gibbs_sequence(c):
    if not isinstance(c, InverseZero) or c.d != 2 or abs(c.scale - math.sqrt(2.0)) > 1e-12:
        raise DomainError(
            "the Gibbs weight is defined for the InverseZero(d=2, scale=sqrt(2)) sequence"
        )


def gibbs_weight(draw, grid):
    """exp(-1/2 ||F||_{L4(disc)}^4) for a draw of the Gibbs sequence.

    The result is clamped into (0,1]: underflow of the exponential maps to
    the smallest positive normal float rather than 0.
    """
    _require_gibbs_sequence(draw.coeffs)
    half_l4 = 0.5 * _gibbs_l4_fourth(draw.field_values, grid)
    val = math.exp(-half_l4) if half_l4 < 745.0 else 0.0
    return max(val, _TINY_WEIGHT)


def sample_gibbs_weights(n_modes, n_seeds, master_seed=0, points_per_panel=10):
    """Vectorized Monte Carlo sample of Gibbs weights at truncation N."""
    c = InverseZero(d=2, scale=math.sqrt(2.0))
    zeros = bessel_zeros(0.0, n_modes)
    grid = build_grid(2, float(zeros.zeros[-1]), points_per_panel)
    from .basis import RadialBasis

    basis = RadialBasis(
        d=2,
        nu=0.0,
        zeros=zeros,
        normalizers=RadialFamily._normalizers(zeros, grid),
        n_max=n_modes,
    )
    coeffs = c.values(n_modes)
    rows = field_rows(basis, 1, n_modes, grid)
    out = np.empty(n_seeds)
    pos = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n_modes)
        field = (g * coeffs[None, :]) @ rows
        l4 = 2.0 * np.pi * ((np.abs(field) ** 4) @ grid.weights)
        with np.errstate(over="ignore", under="ignore"):
            out[pos : pos + count] = np.exp(-0.5 * l4)
        pos += count
    return np.maximum(out, _TINY_WEIGHT)


def h_half_partial_energy(n_modes, n_seeds=0, master_seed=0):
    """(analytic, Monte Carlo) partial sums of E|g_n|^2 / n up to N.

    The analytic value is twice the harmonic number; its logarithmic growth
    is what defeats the half-derivative route to the Gibbs weight.
    """
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    inv = 1.0 / np.arange(1, n_modes + 1)
    analytic = 2.0 * float(np.sum(inv))
    if n_seeds <= 0:
        return analytic, None
    total = 0.0
    done = 0
    for b_idx, count in _blocks(n_seeds):
        g = _complex_block(stream(master_seed, b_idx), count, n_modes)
        total += float(np.sum((np.abs(g) ** 2) @ inv))
        done += count
    return analytic, total / done
