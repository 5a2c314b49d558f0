import math

import numpy as np
import pytest

from lpseries.basis import ConstantModulusBasis, build_radial_basis
from lpseries.quadrature import build_grid
from lpseries.series import (
    Explicit,
    InverseZero,
    PowerLaw,
    Sparse,
    draw_series,
    l2_cauchy_increment,
    pointwise_field_samples,
    pointwise_sigma2,
    sample_complex_gaussian,
    stream,
)
from lpseries.specfun import DomainError, bessel_zeros


@pytest.fixture(scope="module")
def radial_50():
    zt = bessel_zeros(0.0, 50)
    grid = build_grid(2, float(zt.zeros[-1]))
    return build_radial_basis(2, 50, grid), grid


class TestComplexGaussian:
    def test_moments_match_convention(self):
        g = sample_complex_gaussian(stream(1234, 0), 1_000_000)
        assert abs(np.mean(g)) <= 0.005
        assert np.mean(np.abs(g) ** 2) == pytest.approx(2.0, rel=0.01)
        assert np.mean(np.abs(g) ** 4) == pytest.approx(8.0, rel=0.02)

    def test_empty(self):
        assert sample_complex_gaussian(stream(1, 0), 0).size == 0
        with pytest.raises(DomainError):
            sample_complex_gaussian(stream(1, 0), -1)

    def test_stream_reproducibility(self):
        a = sample_complex_gaussian(stream(99, 7), 64)
        b = sample_complex_gaussian(stream(99, 7), 64)
        assert np.array_equal(a, b)

    def test_stream_independence(self):
        n = 200_000
        a = sample_complex_gaussian(stream(99, 0), n).real
        b = sample_complex_gaussian(stream(99, 1), n).real
        corr = float(np.mean(a * b) / (np.std(a) * np.std(b)))
        assert abs(corr) <= 3.0 / math.sqrt(n)


class TestSequences:
    def test_powerlaw_values(self):
        c = PowerLaw(2.0, 1.0)
        np.testing.assert_allclose(c.values(3), [2.0, 1.0, 2.0 / 3.0])

    def test_powerlaw_needs_square_summable(self):
        with pytest.raises(DomainError):
            PowerLaw(1.0, 0.5)
        with pytest.raises(DomainError):
            PowerLaw(-1.0, 1.0)

    def test_inverse_zero_values(self):
        c = InverseZero(2, math.sqrt(2.0))
        zt = bessel_zeros(0.0, 5)
        np.testing.assert_allclose(c.values(5), math.sqrt(2.0) / zt.zeros)

    def test_sparse(self):
        c = Sparse((2, 5), (0.5, 0.25))
        np.testing.assert_allclose(c.values(6), [0, 0.5, 0, 0, 0.25, 0])
        with pytest.raises(DomainError):
            Sparse((5, 2), (1.0, 1.0))
        with pytest.raises(DomainError):
            Sparse((1,), (-1.0,))

    def test_explicit_pads_and_truncates(self):
        c = Explicit((1.0, 0.5))
        np.testing.assert_allclose(c.values(4), [1.0, 0.5, 0.0, 0.0])
        np.testing.assert_allclose(c.values(1), [1.0])


class TestDraws:
    def test_zero_sequence_gives_zero_field(self, radial_50):
        basis, grid = radial_50
        draw = draw_series(Explicit(()), basis, 10, grid, seed=5)
        assert np.all(draw.field_values == 0.0)

    def test_single_term_draw(self, radial_50):
        basis, grid = radial_50
        from lpseries.series import field_rows

        draw = draw_series(Explicit((1.0,)), basis, 1, grid, seed=42)
        g1 = sample_complex_gaussian(stream(42, 0), 1)[0]
        e1 = field_rows(basis, 1, 1, grid)[0]
        np.testing.assert_allclose(np.abs(draw.field_values), np.abs(g1) * np.abs(e1))

    def test_reproducible_and_seed_sensitive(self, radial_50):
        basis, grid = radial_50
        c = PowerLaw(1.0, 1.0)
        a = draw_series(c, basis, 50, grid, seed=7)
        b = draw_series(c, basis, 50, grid, seed=7)
        other = draw_series(c, basis, 50, grid, seed=8)
        assert np.array_equal(a.field_values, b.field_values)
        assert not np.array_equal(a.field_values, other.field_values)
        with pytest.raises(ValueError):
            a.field_values[0] = 0.0

    def test_pointwise_variance_law(self, radial_50):
        basis, grid = radial_50
        c = PowerLaw(1.0, 1.0)
        samples = pointwise_field_samples(c, basis, 0.5, 50, 100_000, master_seed=3)
        var_emp = float(np.mean(np.abs(samples) ** 2))
        var_true = 2.0 * pointwise_sigma2(c, basis, 0.5, 50)
        assert var_emp == pytest.approx(var_true, rel=0.03)

    def test_pointwise_gaussianity_kurtosis(self, radial_50):
        basis, grid = radial_50
        c = PowerLaw(1.0, 1.0)
        samples = pointwise_field_samples(c, basis, 0.5, 50, 100_000, master_seed=4)
        re = samples.real
        re = (re - re.mean()) / re.std()
        assert float(np.mean(re**4)) == pytest.approx(3.0, abs=0.15)


class TestSigma2:
    def test_zero_sequence(self, radial_50):
        basis, _ = radial_50
        assert pointwise_sigma2(Explicit(()), basis, 0.3, 10) == 0.0

    def test_constant_modulus(self):
        c = PowerLaw(1.0, 1.0)
        basis = ConstantModulusBasis()
        expected = float(np.sum(c.values(40) ** 2))
        for r in (0.1, 0.9):
            assert pointwise_sigma2(c, basis, r, 40) == pytest.approx(expected)

    def test_against_fsum_oracle(self, radial_50):
        basis, _ = radial_50
        c = PowerLaw(1.0, 1.0)
        got = pointwise_sigma2(c, basis, 0.0, 50)
        from lpseries.specfun import kernel_g

        terms = [
            (n**-1.0) ** 2
            * (
                kernel_g(2, basis.zero(n) * 0.0)
                / basis.normalizer(n)
            )
            ** 2
            for n in range(1, 51)
        ]
        assert got == pytest.approx(math.fsum(terms), rel=1e-12)


class TestCauchyIncrement:
    def test_coincident_truncations(self, radial_50):
        basis, grid = radial_50
        assert l2_cauchy_increment(PowerLaw(1, 1), basis, 8, 8, grid, 10) == 0.0

    def test_matches_analytic_tail(self, radial_50):
        basis, grid = radial_50
        c = PowerLaw(1.0, 1.0)
        est = l2_cauchy_increment(c, basis, 10, 20, grid, 10_000, master_seed=17)
        analytic = 2.0 * sum(n**-2.0 for n in range(11, 21))
        se = math.sqrt(4.0 * sum(n**-4.0 for n in range(11, 21)) / 10_000)
        assert abs(est - analytic) <= 3.0 * se

    def test_constant_modulus_same_value(self):
        c = PowerLaw(1.0, 1.0)
        basis = ConstantModulusBasis()
        est = l2_cauchy_increment(c, basis, 10, 20, None, 20_000, master_seed=23)
        analytic = 2.0 * sum(n**-2.0 for n in range(11, 21))
        se = math.sqrt(4.0 * sum(n**-4.0 for n in range(11, 21)) / 20_000)
        assert abs(est - analytic) <= 3.0 * se

    def test_l2_energy_identity(self, radial_50):
        basis, grid = radial_50
        c = PowerLaw(1.0, 1.0)
        est = l2_cauchy_increment(c, basis, 0, 50, grid, 10_000, master_seed=29)
        analytic = 2.0 * sum(n**-2.0 for n in range(1, 51))
        se = math.sqrt(4.0 * sum(n**-4.0 for n in range(1, 51)) / 10_000)
        assert abs(est - analytic) <= 3.0 * se
