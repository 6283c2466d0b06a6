import numpy as np
import pytest

from rfflab.datagen import PredictorProcessSpec, simulate_panel
from rfflab.errors import DegenerateOracle, ParameterError
from rfflab.oracle import (
    h_value,
    limit_kernel_mc,
    radial_g,
    scaling_dependence_probe,
    small_ball_curve,
)
from rfflab.rff import (
    ScaleMode,
    compute_scales,
    gaussian_kernel,
    sample_features,
    standardized_empirical_kernel,
)


def make_window(seed, T=12, K=15):
    panel = simulate_panel(PredictorProcessSpec(dim=K), T, 10, np.random.default_rng(seed))
    return panel.train, panel.queries


class TestHValue:
    def test_zero_frequency_zero_phase(self):
        X = np.random.default_rng(0).standard_normal((5, 3))
        value, degenerate = h_value(np.zeros(3), 0.0, np.ones(3), -np.ones(3), X)
        assert not degenerate
        assert value == pytest.approx(1.0)

    def test_quarter_phase_denominator_vanishes(self):
        # at b = pi/2 with zero frequency both numerator and denominator are 0;
        # the degenerate flag wins over the 0/0 ratio
        X = np.random.default_rng(0).standard_normal((5, 3))
        _, degenerate = h_value(np.zeros(3), np.pi / 2, np.ones(3), np.zeros(3), X)
        assert degenerate

    def test_single_point_window_small_ball_hit(self):
        # choose (omega, b) so that 2*omega'x + 2b = pi exactly
        x1 = 0.5
        omega = np.array([1.0])
        b = np.pi / 2 - x1
        _, degenerate = h_value(omega, b, np.array([0.1]), np.array([0.2]), np.array([[x1]]))
        assert degenerate

    def test_samplestd_denominator(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((6, 2))
        omega, b = rng.standard_normal(2), 1.3
        theta = X @ omega + b
        z = np.sqrt(2.0) * np.cos(theta)
        expected = (np.mean(z**2) - np.mean(z) ** 2)
        x, xp = rng.standard_normal(2), rng.standard_normal(2)
        value, degenerate = h_value(omega, b, x, xp, X, ScaleMode.SAMPLE_STD)
        numerator = 2.0 * np.cos(omega @ x + b) * np.cos(omega @ xp + b)
        assert not degenerate
        assert value == pytest.approx(numerator / expected, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            h_value(np.zeros(2), 0.0, np.zeros(3), np.zeros(3), np.zeros((4, 3)))


class TestLimitKernelMc:
    def test_determinism(self):
        X, queries = make_window(1)
        a = limit_kernel_mc(queries[0], queries[1], X, 2.0, 5000, ScaleMode.RMS, np.random.default_rng(9))
        b = limit_kernel_mc(queries[0], queries[1], X, 2.0, 5000, ScaleMode.RMS, np.random.default_rng(9))
        assert a.mean == b.mean
        assert a.standard_error == b.standard_error

    def test_small_gamma_limit_is_one(self):
        # gamma -> 0 collapses every cosine to cos(b); the RMS ratio tends to 1
        X, queries = make_window(2, T=40)
        x = queries[0]
        est = limit_kernel_mc(x, x, X, 1e-8, 20_000, ScaleMode.RMS, np.random.default_rng(3))
        assert abs(est.mean - 1.0) <= 3 * max(est.standard_error, 1e-12)

    def test_minimum_sample_count_enforced(self):
        X, queries = make_window(3)
        with pytest.raises(ParameterError):
            limit_kernel_mc(queries[0], queries[1], X, 2.0, 500, ScaleMode.RMS, np.random.default_rng(0))

    def test_oracle_consistency_across_sample_sizes(self):
        X, queries = make_window(4)
        x, xp = queries[0], queries[1]
        small = limit_kernel_mc(x, xp, X, 2.0, 20_000, ScaleMode.RMS, np.random.default_rng(10))
        large = limit_kernel_mc(x, xp, X, 2.0, 80_000, ScaleMode.RMS, np.random.default_rng(11))
        pooled = np.hypot(small.standard_error, large.standard_error)
        assert abs(small.mean - large.mean) <= 3 * pooled

    def test_degenerate_window_raises(self):
        # a single-row window makes the mean-subtracted variance identically zero
        X = np.array([[0.3, -1.2, 0.8]])
        with pytest.raises(DegenerateOracle):
            limit_kernel_mc(
                np.zeros(3), np.ones(3), X, 1.0, 1000, ScaleMode.SAMPLE_STD, np.random.default_rng(0)
            )

    def test_empirical_kernel_matches_oracle_within_joint_error(self):
        # the oracle is ground truth for the standardized kernel at large P
        hits = 0
        trials = 40
        for trial in range(trials):
            rng = np.random.default_rng([51, trial])
            panel = simulate_panel(PredictorProcessSpec(dim=15), 12, 10, rng)
            bank = sample_features(15, 12000, 2.0, rng)
            sbank = compute_scales(bank, panel.train, ScaleMode.RMS)
            x, xp = panel.queries[0], panel.queries[1]
            k_std = standardized_empirical_kernel(sbank, x, xp).value
            # own Monte Carlo error of the P-feature average
            zx = np.sqrt(2.0) * np.cos(bank.frequencies @ x + bank.phases)
            zxp = np.sqrt(2.0) * np.cos(bank.frequencies @ xp + bank.phases)
            terms = zx * zxp / sbank.scales**2
            own_se = float(np.std(terms, ddof=1) / np.sqrt(terms.size))
            est = limit_kernel_mc(x, xp, panel.train, 2.0, 20_000, ScaleMode.RMS, np.random.default_rng([52, trial]))
            hits += abs(k_std - est.mean) <= 4 * (own_se + est.standard_error)
        assert hits / trials >= 0.95


class TestSmallBall:
    def test_probabilities_nest_exactly(self):
        X, _ = make_window(5, T=4)
        curve = small_ball_curve(X, 2.0, [0.02, 0.05, 0.1, 0.2, 0.5], 50_000, np.random.default_rng(0))
        probs = [pt.probability for pt in curve]
        assert probs == sorted(probs)

    def test_boundary_probability_near_half(self):
        # P(denominator <= 1) is the chance the cosine average is nonpositive
        X, _ = make_window(6, T=12)
        curve = small_ball_curve(X, 2.0, [1.0], 100_000, np.random.default_rng(1))
        assert curve[0].probability == pytest.approx(0.5, abs=0.02)

    def test_exponent_bound_for_tiny_window(self):
        X, _ = make_window(7, T=3)
        eps = [0.02, 0.05, 0.1, 0.2]
        curve = small_ball_curve(X, 2.0, eps, 1_000_000, np.random.default_rng(2))
        probs = np.array([pt.probability for pt in curve])
        slope = np.polyfit(np.log(eps), np.log(probs), 1)[0]
        assert slope >= 1.2

    def test_sparse_points_flagged(self):
        X, _ = make_window(8, T=6)
        curve = small_ball_curve(X, 2.0, [0.01], 500, np.random.default_rng(3))
        assert curve[0].sparse

    def test_epsilon_domain(self):
        X, _ = make_window(9, T=4)
        with pytest.raises(ParameterError):
            small_ball_curve(X, 2.0, [0.0, 0.5], 1000, np.random.default_rng(0))
        with pytest.raises(ParameterError):
            small_ball_curve(X, 2.0, [1.5], 1000, np.random.default_rng(0))


class TestRadialG:
    def test_zero_radius(self):
        assert radial_g(0.0, 2.0) == 1.0

    def test_analytic_point(self):
        assert radial_g(np.sqrt(2.0), 1.0) == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_strictly_decreasing(self):
        r = np.linspace(0.01, 5.0, 200)
        vals = radial_g(r, 1.7)
        assert np.all(np.diff(vals) < 0)
        assert np.all((vals > 0) & (vals <= 1))

    def test_negative_radius_rejected(self):
        with pytest.raises(ParameterError):
            radial_g(-0.1, 1.0)


class TestScalingProbe:
    def test_alpha_one_difference_exactly_zero(self):
        X, queries = make_window(10)
        probe = scaling_dependence_probe(
            queries[0], queries[1], X, 2.0, 1.0, 5000, np.random.default_rng(0)
        )
        assert probe.abs_difference == 0.0
        assert not probe.resolvable

    def test_gaussian_kernel_ignores_window_scaling(self):
        X, queries = make_window(11)
        before = gaussian_kernel(queries[0], queries[1], 2.0).value
        X_scaled = 2.0 * X  # the target kernel never sees the window
        after = gaussian_kernel(queries[0], queries[1], 2.0).value
        assert before == after and X_scaled.shape == X.shape

    def test_dependence_resolvable_at_wide_bandwidth(self):
        # at gamma=0.25 the window scale shifts the limit kernel decisively
        panel = simulate_panel(PredictorProcessSpec(dim=15), 12, 10, np.random.default_rng(21))
        resolved = 0
        for j in range(5):
            probe = scaling_dependence_probe(
                panel.queries[2 * j], panel.queries[2 * j + 1], panel.train,
                0.25, 2.0, 200_000, np.random.default_rng([22, j]),
            )
            resolved += probe.resolvable
        assert resolved >= 1

    def test_alpha_below_one_rejected(self):
        X, queries = make_window(12)
        with pytest.raises(ParameterError):
            scaling_dependence_probe(queries[0], queries[1], X, 2.0, 0.5, 5000, np.random.default_rng(0))
