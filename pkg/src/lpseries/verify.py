"""Acceptance checks: quantitative desk-scale reproductions of the
convergence/divergence laws, each with a pinned tolerance.

Each check returns a CheckResult with the measured values; run_checks
executes a selection and report_dict serializes them deterministically
(runtimes live in a separate timings dict so reports are byte-stable
across reruns with the same master seed).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, basis as basis_mod, quadrature, series, specfun

_SEED_STRIDE = 1000003


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    expected: str
    measured: dict
    runtime_s: float


def _gamma_by_quadrature(x):
    """Defining integral of Gamma via t = u^2 substitution and panel GL."""
    nodes, weights = np.polynomial.legendre.leggauss(24)
    total = 0.0
    edges = np.linspace(0.0, 14.0, 57)
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (b - a) * nodes + 0.5 * (b + a)
        w = 0.5 * (b - a) * weights
        total += float(np.sum(w * 2.0 * u ** (2.0 * x - 1.0) * np.exp(-(u**2))))
    return total


def _j0_series_plain(r):
    """Truncated ascending series for J_0 in plain scalar arithmetic."""
    term = 1.0
    total = 1.0
    q = (r / 2.0) ** 2
    for k in range(200):
        term = -term * q / ((k + 1.0) ** 2)
        total += term
        if abs(term) < 1e-18:
            break
    return total


def _first_j0_zero_by_bisection():
    lo, hi = 2.0, 3.0
    flo = _j0_series_plain(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = _j0_series_plain(mid)
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _ls_slope(x, y):
    design = np.vstack([np.ones_like(x), x]).T
    return float(np.linalg.lstsq(design, y, rcond=None)[0][1])


def check_zero_accuracy(master_seed):
    oracle = _first_j0_zero_by_bisection()
    z1 = specfun.bessel_zeros(0.0, 1).zero(1)
    err_first = abs(z1 - oracle)
    half = specfun.bessel_zeros(0.5, 100)
    n = np.arange(1, 101)
    rel = np.max(np.abs(half.zeros - n * np.pi) / (n * np.pi))
    passed = err_first <= 1e-10 and rel <= 1e-10
    return passed, "first J0 zero within 1e-10 of bisection; J_1/2 zeros = n*pi to 1e-10 rel", {
        "first_zero": z1,
        "bisection_oracle": oracle,
        "first_zero_abs_err": err_first,
        "half_order_max_rel_err": float(rel),
    }


def check_orthonormality(master_seed, basis_override=None):
    worst = {}
    for d in (2, 3, 4):
        zt = specfun.bessel_zeros(specfun.order_for_dimension(d), 30)
        grid = quadrature.build_grid(d, float(zt.zeros[-1]))
        b = (
            basis_override
            if basis_override is not None and basis_override.d == d
            else basis_mod.build_radial_basis(d, 30, grid)
        )
        rows = series.field_rows(b, 1, 30, grid)
        gram = (rows * grid.weights[None, :]) @ rows.T
        worst[f"d{d}_max_offdiag"] = float(
            np.max(np.abs(gram - np.eye(30)))
        )
    passed = all(v <= 1e-6 for v in worst.values())
    return passed, "max |<e_m,e_n> - delta_mn| <= 1e-6 for m,n <= 30, d in {2,3,4}", worst


def check_beta_scaling(master_seed):
    measured = {}
    ok = True
    for d in (2, 3, 4):
        zt = specfun.bessel_zeros(specfun.order_for_dimension(d), 500)
        grid = quadrature.build_grid(d, float(zt.zeros[-1]))
        b = basis_mod.build_radial_basis(d, 500, grid)
        n = np.arange(20, 501)
        v = np.sqrt(n) * b.normalizers[19:]
        ratio = float(np.max(v) / np.min(v))
        measured[f"d{d}_sqrt_n_beta_ratio"] = ratio
        ok &= ratio <= 2.0
        if d == 2:
            val = b.normalizer(200) * math.sqrt(math.pi * b.zero(200))
            measured["beta200_times_sqrt_pi_z"] = val
            ok &= 0.98 <= val <= 1.02
    return ok, "max/min sqrt(n) beta_n <= 2 on [20,500]; beta_200 sqrt(pi z) in [0.98,1.02]", measured


def check_lp_growth(master_seed):
    measured = {}
    n_lo, n_hi = 32, 512
    n = np.arange(n_lo, n_hi + 1)

    def norms(d, p):
        zt = specfun.bessel_zeros(specfun.order_for_dimension(d), n_hi)
        grid = quadrature.build_grid(d, float(zt.zeros[-1]))
        b = basis_mod.build_radial_basis(d, n_hi, grid)
        return np.array(
            [basis_mod.lp_norm_of_e(b, k, p, grid) for k in range(n_lo, n_hi + 1)]
        )

    slope_26 = _ls_slope(np.log(n.astype(float)), np.log(norms(2, 6.0)))
    slope_38 = _ls_slope(np.log(n.astype(float)), np.log(norms(3, 8.0)))
    log_case = norms(2, 4.0) / np.log(2.0 + n) ** 0.25
    log_ratio = float(np.max(log_case) / np.min(log_case))
    measured.update(
        slope_d2_p6=slope_26, slope_d3_p8=slope_38, log_case_ratio_d2_p4=log_ratio
    )
    passed = (
        abs(slope_26 - 1.0 / 6.0) <= 0.05
        and abs(slope_38 - 0.625) <= 0.05
        and log_ratio <= 2.0
    )
    return passed, "norm growth slopes 1/6 (d=2,p=6), 0.625 (d=3,p=8) +-0.05; log case ratio <= 2", measured


def check_gaussian_moments(master_seed):
    g = series.sample_complex_gaussian(series.stream(master_seed, 0), 1_000_000)
    m4 = float(np.mean(np.abs(g) ** 4))
    m6 = float(np.mean(np.abs(g) ** 6))
    gamma_ok = True
    worst_gamma = 0.0
    for p in (2.0, 4.0, 6.0, 7.5):
        ref = _gamma_by_quadrature(p / 2.0 + 1.0)
        rel = abs(analysis.moment_constants(p).c_p - ref) / ref
        worst_gamma = max(worst_gamma, rel)
        gamma_ok &= rel <= 1e-10
    passed = abs(m4 - 8.0) <= 0.08 and abs(m6 - 48.0) <= 0.96 and gamma_ok
    return passed, "E|g|^4 = 8 +-1%, E|g|^6 = 48 +-2% at 1e6 draws; C_p = Gamma(p/2+1) to 1e-10", {
        "m4": m4,
        "m6": m6,
        "max_gamma_rel_err": worst_gamma,
    }


def check_nice_identity(master_seed):
    c = series.PowerLaw(1.0, 1.0)
    zt = specfun.bessel_zeros(0.0, 50)
    grid = quadrature.build_grid(2, float(zt.zeros[-1]))
    b = basis_mod.build_radial_basis(2, 50, grid)
    det = analysis.expected_lp_pth_power(c, b, 50, 4.0, grid)
    mc, se = analysis.mc_lp_pth_power(c, b, 50, 4.0, grid, 10_000, master_seed)
    z = abs(mc - det) / se
    return z <= 3.0, "MC mean of ||F||_4^4 within 3 SE of the deterministic functional", {
        "deterministic": det,
        "monte_carlo": mc,
        "standard_error": se,
        "z_score": z,
    }


def check_critical_exponent(master_seed):
    c = series.PowerLaw(1.0, 1.0)
    br3 = analysis.bracket_pcr(c, analysis.RadialFamily(3))
    br4 = analysis.bracket_pcr(c, analysis.RadialFamily(4))
    ok3 = br3.lower <= 6.0 <= br3.upper and (br3.upper - br3.lower) <= 1.0
    ok4 = br4.lower <= 4.0 <= br4.upper and (br4.upper - br4.lower) <= 1.0
    thm_ok = abs(br4.theorem_lower - 4.0) <= 0.5 and abs(br4.theorem_upper - 6.0) <= 0.5
    return ok3 and ok4 and thm_ok, "brackets contain 2d/(d-2) with width <= 1; d=4 theorem bracket within 0.5 of [4,6]", {
        "d3_lower": br3.lower,
        "d3_upper": br3.upper,
        "d4_lower": br4.lower,
        "d4_upper": br4.upper,
        "d4_theorem_lower": br4.theorem_lower,
        "d4_theorem_upper": br4.theorem_upper,
    }


def check_torus_contrast(master_seed):
    c = series.PowerLaw(1.0, 1.0)
    fam = analysis.ConstantModulusFamily()
    table = fam.ladder_table(c, analysis.DEFAULT_LADDER)
    verdicts = {
        f"p{int(p)}": analysis.classify_divergence(c, fam, p, table=table).verdict
        for p in (4.0, 8.0, 12.0, 20.0)
    }
    passed = all(v == analysis.CONVERGENT for v in verdicts.values())
    return passed, "constant-modulus basis convergent at p in {4,8,12,20}", verdicts


def check_alpha_star(master_seed):
    c = series.PowerLaw(1.0, 1.0)
    measured = {}
    ok = True
    for d in (3, 4, 5):
        a = analysis.alpha_star(c, d)
        bound = analysis.divergence_exponent_bound(a, d)
        target = 2.0 * d / (d - 2.0)
        tol_bound = 2.0 * d * 0.05 / ((d - 2.0) * (d - 2.0 - 0.05))
        measured[f"d{d}_alpha"] = a
        measured[f"d{d}_bound"] = bound
        ok &= abs(a - (d - 2.0)) <= 0.05 and abs(bound - target) <= tol_bound
    return ok, "alpha* = d-2 +-0.05 for d in {3,4,5}; 2d/alpha* matches 2d/(d-2)", measured


def check_adversarial(master_seed):
    fam = analysis.RadialFamily(2)
    seq = analysis.construct_diverging_sequence(fam, 6.0, 4)
    zt = specfun.bessel_zeros(0.0, seq.indices[-1])
    grid = quadrature.build_grid(2, float(zt.zeros[-1]), points_per_panel=10)
    measured = {"indices": list(seq.indices)}
    ok = True
    for k, idx in enumerate(seq.indices, start=1):
        z = float(zt.zeros[idx - 1])
        beta_sq = 0.0
        norm6 = 0.0
        for lo in range(0, grid.n_nodes, 1 << 20):
            hi = min(lo + (1 << 20), grid.n_nodes)
            j = specfun.bessel_j(0.0, z * grid.nodes[lo:hi])
            beta_sq += float(np.sum(grid.raw_weights[lo:hi] * grid.nodes[lo:hi] * j * j))
            norm6 += float(np.sum(grid.weights[lo:hi] * np.abs(j) ** 6))
        norm = norm6 ** (1.0 / 6.0) / math.sqrt(beta_sq)
        measured[f"norm_{k}"] = norm
        ok &= norm >= 2.0**k
    try:
        analysis.construct_diverging_sequence(fam, 3.0, 1, n_cap=2000)
        no_seq = False
    except analysis.NoSuchSequenceError:
        no_seq = True
    measured["p3_no_sequence"] = no_seq
    return ok and no_seq, "||e_nk||_6 >= 2^k for k<=4 at d=2; p=3 finds no sequence below 2000", measured


def check_appendix_laws(master_seed):
    c = series.PowerLaw(1.0, 1.0)
    zt = specfun.bessel_zeros(0.0, 50)
    grid = quadrature.build_grid(2, float(zt.zeros[-1]))
    b = basis_mod.build_radial_basis(2, 50, grid)

    est = series.l2_cauchy_increment(c, b, 10, 20, grid, 10_000, master_seed)
    coeffs = c.values(20)[10:]
    analytic = 2.0 * float(np.sum(coeffs**2))
    se = math.sqrt(4.0 * float(np.sum(coeffs**4)) / 10_000)
    z_cauchy = abs(est - analytic) / se

    samples = series.pointwise_field_samples(c, b, 0.5, 50, 100_000, master_seed + 1)
    var_emp = float(np.mean(np.abs(samples) ** 2))
    var_true = 2.0 * series.pointwise_sigma2(c, b, 0.5, 50)
    var_rel = abs(var_emp - var_true) / var_true

    re = samples.real
    re = (re - re.mean()) / re.std()
    kurt = float(np.mean(re**4))

    passed = z_cauchy <= 3.0 and var_rel <= 0.03 and abs(kurt - 3.0) <= 0.15
    return passed, "L2 Cauchy increment within 3 SE; pointwise variance within 3%; kurtosis 3 +-0.15", {
        "cauchy_estimate": est,
        "cauchy_analytic": analytic,
        "cauchy_z": z_cauchy,
        "variance_rel_err": var_rel,
        "kurtosis": kurt,
    }


def check_gibbs(master_seed):
    w128 = analysis.sample_gibbs_weights(128, 10_000, master_seed)
    w256 = analysis.sample_gibbs_weights(256, 10_000, master_seed + 1)
    mean128 = float(np.mean(w128))
    mean256 = float(np.mean(w256))
    se_diff = math.sqrt(np.var(w128) / w128.size + np.var(w256) / w256.size)
    z = abs(mean256 - mean128) / se_diff
    in_range = bool(np.all(w128 > 0.0) and np.all(w128 <= 1.0))
    away = 0.01 <= mean128 <= 0.99
    analytic, mc = analysis.h_half_partial_energy(10_000, 10_000, master_seed + 2)
    se_h = math.sqrt(4.0 * float(np.sum(np.arange(1, 10_001, dtype=float) ** -2.0)) / 10_000)
    z_h = abs(mc - analytic) / se_h
    passed = in_range and away and z <= 3.0 and z_h <= 3.0
    return passed, "weights in (0,1], mean in [0.01,0.99], stable N=128->256; half-energy = 2 H_N", {
        "mean_n128": mean128,
        "mean_n256": mean256,
        "stability_z": z,
        "weights_in_range": in_range,
        "h_half_analytic": analytic,
        "h_half_mc": mc,
        "h_half_z": z_h,
    }


_REPRO_SUBSET = ("c05_gaussian_moments", "c08_torus_contrast", "c09_alpha_star")


def check_reproducibility(master_seed):
    first = run_checks(_REPRO_SUBSET, master_seed)
    second = run_checks(_REPRO_SUBSET, master_seed)
    b1 = json.dumps(report_dict(first, master_seed), sort_keys=True).encode()
    b2 = json.dumps(report_dict(second, master_seed), sort_keys=True).encode()
    identical = b1 == b2
    return identical, "re-running seeded checks yields byte-identical reports", {
        "byte_identical": identical,
        "report_bytes": len(b1),
    }


CHECKS = (
    ("c01_zero_accuracy", check_zero_accuracy, 1.0),
    ("c02_orthonormality", check_orthonormality, 30.0),
    ("c03_beta_scaling", check_beta_scaling, None),
    ("c04_lp_growth", check_lp_growth, None),
    ("c05_gaussian_moments", check_gaussian_moments, None),
    ("c06_nice_identity", check_nice_identity, 120.0),
    ("c07_critical_exponent", check_critical_exponent, 600.0),
    ("c08_torus_contrast", check_torus_contrast, None),
    ("c09_alpha_star", check_alpha_star, None),
    ("c10_adversarial", check_adversarial, None),
    ("c11_appendix_laws", check_appendix_laws, None),
    ("c12_gibbs", check_gibbs, None),
    ("c13_reproducibility", check_reproducibility, None),
)


def check_ids():
    return [cid for cid, _, _ in CHECKS]


def run_checks(ids=None, master_seed=20260101):
    wanted = set(ids) if ids is not None else None
    results = []
    for index, (cid, fn, cap) in enumerate(CHECKS):
        if wanted is not None and cid not in wanted:
            continue
        seed = master_seed + _SEED_STRIDE * index
        start = time.perf_counter()
        passed, expected, measured = fn(seed)
        runtime = time.perf_counter() - start
        if cap is not None:
            measured = dict(measured, runtime_cap_s=cap)
            passed = passed and runtime <= cap
        results.append(
            CheckResult(
                check_id=cid,
                passed=bool(passed),
                expected=expected,
                measured=measured,
                runtime_s=runtime,
            )
        )
    return results


def report_dict(results, master_seed):
    """Deterministic report payload; runtimes are kept out on purpose."""
    from . import __version__

    return {
        "version": __version__,
        "master_seed": int(master_seed),
        "all_passed": all(r.passed for r in results),
        "checks": [
            {
                "check_id": r.check_id,
                "passed": r.passed,
                "expected": r.expected,
                "measured": r.measured,
            }
            for r in results
        ],
    }


def timings_dict(results):
    return {r.check_id: round(r.runtime_s, 3) for r in results}
