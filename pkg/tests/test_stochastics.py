import math

import numpy as np
import pytest

from zenn import (
    Constant,
    InitSpec,
    Normal,
    ShallowArch,
    Uniform,
    charfn_mc,
    charfn_relu_uniform,
    convergence_tail,
    excess_kurtosis,
    init_model,
    k_statistics,
    mlp_cumulant_scaling,
    network_cumulant_mc,
    perceptron_cumulant,
    perceptron_cumulant_mc,
    relu_uniform_family,
    sample_outputs,
    zenn_cumulant_series,
)
from zenn.charfn import relu_uniform_factor
from zenn.initialization import CHUNK

TRAP = InitSpec(w1=Normal(), b1=Constant(0.0), w2=Constant(0.0), b2=Uniform(-1, 1), seed=3)

CHARFN_ORACLE = {
    (0.5, 1.0, 1.0, 1.0, 1.0, 4): 0.6704055558948583 + 0.5650783072417251j,
    (0.25, -2.0, 1.0, 1.0, 1.0, 4): 0.33514475471332184 - 0.6136213997022835j,
    (1.0, 0.5, 1.0, 1.0, 1.0, 4): 0.7906326758231305 + 0.4884305604427499j,
    (1.0, 3.0, 1.0, 1.0, 1.0, 4): -0.03735538183552384 + 0.1078819187901887j,
    (0.3, 1.7, 2.0, 0.5, 1.5, 6): 0.4644642757350089 + 0.6908430558686333j,
}


class TestInit:
    def test_constant_distributions_are_exact(self):
        spec = InitSpec(Constant(0.5), Constant(-1.0), Constant(2.0), Constant(0.25))
        model = init_model(ShallowArch("zenn", 5), spec)
        assert np.all(model.w1 == 0.5) and np.all(model.b1 == -1.0)
        assert np.all(model.w2 == 2.0) and np.all(model.b2 == 0.25)

    def test_same_seed_is_bit_identical(self):
        arch = ShallowArch("mlp", 17, "relu", beta=0.5)
        spec = InitSpec(Uniform(-2, 3), Normal(1, 2), Normal(), Uniform(), seed=99)
        assert init_model(arch, spec) == init_model(arch, spec)
        assert init_model(arch, spec) != init_model(arch, InitSpec(seed=100))

    def test_defaults(self):
        model = init_model(ShallowArch("zenn", 8))
        assert np.all(model.b1 == 0) and np.all(model.b2 == 0)
        assert np.any(model.w1 != 0)

    def test_normal_sample_mean(self):
        x = InitSpec(seed=7).sample_roles(10 ** 5)["w1"]
        assert abs(x.mean()) < 4 / math.sqrt(x.size)

    @pytest.mark.parametrize("bad", [lambda: Normal(0, 0), lambda: Normal(0, -1), lambda: Uniform(1, 1)])
    def test_invalid_distributions(self, bad):
        with pytest.raises(ValueError):
            bad()

    def test_sampling_is_chunk_stable(self):
        arch = ShallowArch("zenn", 3)
        spec = InitSpec(seed=4)
        long = sample_outputs(arch, spec, 0.3, CHUNK + 10)
        assert np.array_equal(sample_outputs(arch, spec, 0.3, CHUNK + 10), long)
        assert np.array_equal(sample_outputs(arch, spec, 0.3, CHUNK), long[:CHUNK])


class TestKStatistics:
    def test_constant_sample(self):
        k = k_statistics(np.full(50, 2.5))
        assert np.allclose(k.estimates, [2.5, 0, 0, 0], atol=1e-14)

    def test_two_point_sample(self):
        k = k_statistics([0.0, 1.0], max_order=1)
        assert k[1][0] == 0.5
        k = k_statistics([0.0, 1.0, 0.0, 1.0], max_order=2)
        assert k[1][0] == 0.5
        assert k.estimates[1] == pytest.approx(1 / 3)

    def test_pair_variance(self):
        k = k_statistics([0.0, 1.0, 1.0, 0.0, 0.5], max_order=2)
        assert k[2][0] == pytest.approx(np.var([0, 1, 1, 0, 0.5], ddof=1))

    def test_matches_scipy_kstat(self):
        from scipy import stats

        x = np.random.default_rng(0).gamma(2.0, size=1000)
        k = k_statistics(x)
        for r in range(1, 5):
            assert k[r][0] == pytest.approx(stats.kstat(x, r), rel=1e-10)

    def test_gaussian_higher_cumulants_vanish(self):
        x = np.random.default_rng(1).standard_normal(10 ** 6)
        k = k_statistics(x)
        for r in (3, 4):
            est, err = k[r]
            assert err > 0
            assert abs(est) < 3 * err

    def test_too_short(self):
        with pytest.raises(ValueError):
            k_statistics([1.0, 2.0, 3.0], max_order=3)
        with pytest.raises(ValueError):
            k_statistics(np.ones(10), max_order=5)


class TestPerceptronCumulants:
    def test_uniform_bias_variance(self):
        est, err = perceptron_cumulant_mc(TRAP, "sine", 0.9, 2, 2 * 10 ** 5)
        assert abs(est - 1 / 3) < 3 * err

    def test_uniform_bias_fourth_cumulant(self):
        est, err = perceptron_cumulant_mc(TRAP, "sine", -0.4, 4, 2 * 10 ** 5)
        assert abs(est + 2 / 15) < 3 * err

    def test_symmetric_third_cumulant(self):
        spec = InitSpec(w1=Normal(), b1=Constant(0), w2=Normal(), b2=Uniform(-1, 1), seed=11)
        est, err = perceptron_cumulant_mc(spec, "sine", 0.8, 3, 2 * 10 ** 5)
        assert abs(est) < 3 * err

    def test_quadrature_against_closed_forms(self):
        assert perceptron_cumulant(TRAP, "sine", 0.3, 2) == pytest.approx(1 / 3, abs=1e-14)
        assert perceptron_cumulant(TRAP, "sine", 0.3, 4) == pytest.approx(-2 / 15, abs=1e-14)
        # Var[W2 sin(W1 x)] = E[sin^2(W1 x)] = (1 - exp(-2 x^2)) / 2 for unit-normal W1, W2
        spec = InitSpec()
        for x in (0.2, 0.7, 1.5):
            assert perceptron_cumulant(spec, "sine", x, 2) == pytest.approx((1 - math.exp(-2 * x * x)) / 2, rel=1e-12)

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError):
            perceptron_cumulant_mc(TRAP, "sine", 0.0, 2, 100)


class TestCumulantSeries:
    def test_zero_input_partial_sum(self):
        assert zenn_cumulant_series(1.0, 2, 1.0, 0.0, 3) == pytest.approx(49 / 36, rel=1e-15)

    def test_zero_cumulant(self):
        assert zenn_cumulant_series(lambda z: np.zeros_like(z), 3, 1.2, 0.7, 10) == 0.0
        assert zenn_cumulant_series(0.0, 2, 1.0, 0.0, math.inf) == 0.0

    def test_infinite_width_is_zeta_sum(self):
        # truncation stops at the first term below 1e-12; the remaining tail is ~ N**(1 - r alpha)
        assert zenn_cumulant_series(1.0, 2, 1.0, 0.0, math.inf) == pytest.approx(math.pi ** 2 / 6, abs=1e-5)
        assert zenn_cumulant_series(1.0, 4, 1.0, 0.0, math.inf) == pytest.approx(math.pi ** 4 / 90, abs=1e-9)

    def test_divergent_series_rejected(self):
        with pytest.raises(ValueError):
            zenn_cumulant_series(1.0, 1, 1.0, 0.0, math.inf)
        with pytest.raises(ValueError):
            zenn_cumulant_series(1.0, 2, 0.5, 0.0, math.inf)

    def test_sine_partial_sum_matches_monte_carlo(self):
        spec = InitSpec(seed=21)

        def lam(z):
            return (1 - np.exp(-2 * np.asarray(z) ** 2)) / 2

        analytic = zenn_cumulant_series(lam, 2, 1.5, 0.7, 8)
        est, err = network_cumulant_mc(ShallowArch("zenn", 8, "sine", alpha=1.5), spec, 0.7, 2, 10 ** 6)
        assert abs(est - analytic) < 3 * err


class TestGaussianTrap:
    def test_variance_is_width_invariant(self):
        for n in (1, 7, 1000):
            assert mlp_cumulant_scaling(0.3, 2, n) == 0.3

    def test_fourth_order_scaling(self):
        assert mlp_cumulant_scaling(2.0, 4, 4) == 0.5

    def test_mlp_kurtosis_decays_like_inverse_width(self):
        widths = [8, 32, 128]
        spec = InitSpec(w1=Normal(), b1=Constant(0), w2=Normal(), b2=Uniform(-1, 1), seed=2)
        kurt = [excess_kurtosis(sample_outputs(ShallowArch("mlp", n, "sine", beta=0.5), spec, 0.0, 10 ** 6))[0]
                for n in widths]
        assert all(k < 0 for k in kurt)
        slope = np.polyfit(np.log(widths), np.log(np.abs(kurt)), 1)[0]
        assert abs(slope + 1) <= 0.3


    def test_zenn_kurtosis_matches_exact_partial_sums(self):
        # at x = 0 the ZeNN output is sum_j b2_j / j, with b2 uniform on (-1, 1)
        j = np.arange(1, 65)
        exact = (-2 / 15 * np.sum(j ** -4.0)) / (1 / 3 * np.sum(j ** -2.0)) ** 2
        assert exact == pytest.approx(-0.48917701849565082039, rel=1e-14)
        spec = InitSpec(w1=Normal(), b1=Constant(0), w2=Normal(), b2=Uniform(-1, 1), seed=8)
        k, err = excess_kurtosis(sample_outputs(ShallowArch("zenn", 64, "sine", alpha=1.0), spec, 0.0, 4 * 10 ** 5))
        assert abs(k - exact) < 3 * err


class TestCharacteristicFunction:
    def test_zero_frequency(self):
        assert charfn_relu_uniform(0.7, 0.0, 1.0, 2.0, 1.0, 5) == 1.0
        arch, spec = relu_uniform_family(5, 1.0, 1.0, 2.0)
        assert charfn_mc(arch, spec, 0.7, 0.0, 10 ** 4)[0] == 1.0

    @pytest.mark.parametrize("key", sorted(CHARFN_ORACLE))
    def test_quadrature_oracle(self, key):
        value = charfn_relu_uniform(*key)
        assert abs(value - CHARFN_ORACLE[key]) < 1e-8

    def test_modulus_and_conjugate_symmetry(self, rng):
        for _ in range(200):
            x, L, B = rng.uniform(0.01, 3, 3)
            t = rng.normal(scale=5)
            alpha, n = rng.uniform(0.2, 2), int(rng.integers(1, 12))
            v = charfn_relu_uniform(x, t, L, B, alpha, n)
            assert abs(v) <= 1 + 1e-14
            assert charfn_relu_uniform(x, -t, L, B, alpha, n) == pytest.approx(v.conjugate(), abs=1e-15)

    def test_branches_agree_on_boundary(self):
        # j L x == B exactly for j = 2: compare against the neighbouring regimes
        for j, x, L, B in [(2, 0.5, 1.0, 1.0), (4, 0.25, 2.0, 2.0)]:
            at = relu_uniform_factor(j, x, 1.3, L, B, 1.0)
            below = relu_uniform_factor(j, x * (1 - 1e-9), 1.3, L, B, 1.0)
            above = relu_uniform_factor(j, x * (1 + 1e-9), 1.3, L, B, 1.0)
            assert abs(at - below) < 1e-8 and abs(at - above) < 1e-8

    def test_small_frequency_limit(self):
        assert relu_uniform_factor(1, 0.5, 1e-12, 1.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-11)

    def test_monte_carlo_agrees(self):
        arch, spec = relu_uniform_family(4, 1.0, 1.0, 1.0, seed=5)
        t = np.array([-2.0, 0.5, 1.0, 3.0])
        est, err = charfn_mc(arch, spec, 0.5, t, 2 * 10 ** 5)
        for ti, e, s in zip(t, est, err):
            assert abs(e - charfn_relu_uniform(0.5, ti, 1.0, 1.0, 1.0, 4)) < 3 * s

    def test_deterministic_model(self):
        arch = ShallowArch("zenn", 3, "sine", alpha=1.2)
        spec = InitSpec(Constant(0.4), Constant(0.1), Constant(-0.7), Constant(0.3))
        f = float(init_model(arch, spec)(0.9))
        est, err = charfn_mc(arch, spec, 0.9, 1.7, 10 ** 4)
        assert est == pytest.approx(np.exp(1.7j * f), abs=1e-14)
        assert err == pytest.approx(0.0, abs=1e-14)

    def test_nonpositive_input_rejected(self):
        with pytest.raises(ValueError):
            charfn_relu_uniform(0.0, 1.0, 1.0, 1.0, 1.0, 3)


class TestConvergenceTail:
    def test_fast_decay_is_negligible(self):
        report = convergence_tail(ShallowArch("zenn", 1, "sine", alpha=8.0), [16, 32, 64],
                                  np.linspace(-1, 1, 201), [0, 1, 2])
        assert np.all(report.sup_diff[:, -1] < 1e-10)

    def test_nested_widths_share_neurons(self):
        arch = ShallowArch("zenn", 1, "sine", alpha=2.0)
        grid = np.linspace(-1, 1, 51)
        report = convergence_tail(arch, [4, 8], grid, [3])
        draws = InitSpec().sample_roles(16, seed=3)
        full = arch.build(**draws)
        d4 = np.max(np.abs(full.truncate(8)(grid) - full.truncate(4)(grid)))
        assert report.sup_diff[0, 0] == pytest.approx(d4, rel=1e-12)

    def test_csv_is_deterministic(self):
        arch = ShallowArch("mlp", 1, "sine", beta=0.5)
        a = convergence_tail(arch, [8, 16, 32], np.linspace(-1, 1, 11), [0, 1]).to_csv()
        b = convergence_tail(arch, [8, 16, 32], np.linspace(-1, 1, 11), [0, 1]).to_csv()
        assert a == b and a.splitlines()[0] == "N,mean_sup_diff,mean_log2_sup_diff,max_sup_diff"

    def test_widths_must_increase(self):
        with pytest.raises(ValueError):
            convergence_tail(ShallowArch(), [8, 8], [0.0], [0])
