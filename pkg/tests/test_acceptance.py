"""Acceptance gate: every criterion at its pinned tolerance, one line each.

Run with `pytest -s tests/test_acceptance.py` to see the PASS/FAIL lines, or
through the CLI as `lpseries verify --out <dir>`.
"""

import pytest

from lpseries import verify

MASTER_SEED = 20260101

CRITERIA = {
    "c01_zero_accuracy": "1. zero accuracy (J0 first zero, J_1/2 zeros)",
    "c02_orthonormality": "2. orthonormality to 1e-6, d in {2,3,4}",
    "c03_beta_scaling": "3. normalizer scaling sqrt(n) beta_n",
    "c04_lp_growth": "4. Lp growth exponents of the modes",
    "c05_gaussian_moments": "5. complex Gaussian moment constants",
    "c06_nice_identity": "6. expected-norm identity vs Monte Carlo",
    "c07_critical_exponent": "7. critical exponent brackets (d=3, d=4)",
    "c08_torus_contrast": "8. constant-modulus contrast convergent",
    "c09_alpha_star": "9. weighted-sum growth exponent alpha*",
    "c10_adversarial": "10. adversarial sparse construction",
    "c11_appendix_laws": "11. distributional laws of truncations",
    "c12_gibbs": "12. Gibbs weight nontriviality and stability",
    "c13_reproducibility": "13. byte-identical seeded reports",
}


@pytest.fixture(scope="module")
def results():
    out = {r.check_id: r for r in verify.run_checks(master_seed=MASTER_SEED)}
    assert set(out) == set(CRITERIA)
    return out


@pytest.mark.parametrize("check_id", sorted(CRITERIA))
def test_criterion(results, check_id):
    r = results[check_id]
    status = "PASS" if r.passed else "FAIL"
    print(f"{status} {CRITERIA[check_id]} [{r.runtime_s:.2f}s] {r.measured}")
    assert r.passed, f"{check_id}: expected {r.expected}, measured {r.measured}"
