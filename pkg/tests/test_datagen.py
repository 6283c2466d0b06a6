import numpy as np
import pytest

from rfflab.datagen import PredictorProcessSpec, build_sigma_u, simulate_panel
from rfflab.errors import ParameterError


class TestBuildSigmaU:
    def test_zero_rho_is_identity(self):
        assert np.array_equal(build_sigma_u(3, 0.0), np.eye(3))

    def test_cross_correlation_structure(self):
        expected = np.array([[1.0, 0.1], [0.1, 1.0]])
        assert np.allclose(build_sigma_u(2, 0.1), expected)

    def test_rho_below_pd_range_rejected(self):
        with pytest.raises(ParameterError):
            build_sigma_u(3, -0.6)

    def test_rho_one_rejected(self):
        with pytest.raises(ParameterError):
            build_sigma_u(4, 1.0)

    def test_positive_definite_inside_range(self):
        sigma = build_sigma_u(5, -0.2)
        assert np.all(np.linalg.eigvalsh(sigma) > 0)


class TestSimulatePanel:
    def test_white_noise_case(self):
        spec = PredictorProcessSpec(dim=2, phi_low=0.0, phi_high=0.0, rho=0.0, burn_in=10)
        panel = simulate_panel(spec, 10_000, 2, np.random.default_rng(0))
        x = panel.train[:, 0]
        lag1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(lag1) <= 0.05
        assert np.var(x) == pytest.approx(1.0, rel=0.05)

    def test_ar1_autocorrelation(self):
        spec = PredictorProcessSpec(dim=1, phi_low=0.9, phi_high=0.9, rho=0.0)
        panel = simulate_panel(spec, 100_000, 2, np.random.default_rng(1))
        x = panel.train[:, 0]
        lag1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert lag1 == pytest.approx(0.9, abs=0.01)

    def test_ar1_stationary_variance(self):
        spec = PredictorProcessSpec(dim=1, phi_low=0.9, phi_high=0.9, rho=0.0)
        panel = simulate_panel(spec, 100_000, 2, np.random.default_rng(2))
        # stationary variance 1 / (1 - 0.81)
        assert np.var(panel.train[:, 0]) == pytest.approx(1.0 / 0.19, rel=0.05)

    def test_determinism(self):
        spec = PredictorProcessSpec(dim=4)
        a = simulate_panel(spec, 12, 10, np.random.default_rng(7))
        b = simulate_panel(spec, 12, 10, np.random.default_rng(7))
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.queries, b.queries)
        assert np.array_equal(a.phi_diag, b.phi_diag)

    def test_phi_within_declared_range(self):
        spec = PredictorProcessSpec(dim=8, phi_low=0.82, phi_high=0.98)
        panel = simulate_panel(spec, 12, 4, np.random.default_rng(3))
        assert np.all(panel.phi_diag >= 0.82)
        assert np.all(panel.phi_diag <= 0.98)

    def test_shapes_and_contiguity_of_chain(self):
        spec = PredictorProcessSpec(dim=3, burn_in=0, phi_low=0.5, phi_high=0.5, rho=0.0)
        panel = simulate_panel(spec, 6, 4, np.random.default_rng(5))
        assert panel.train.shape == (6, 3)
        assert panel.queries.shape == (4, 3)

    def test_affine_independence_holds_for_generated_windows(self):
        # T <= K + 1, so the augmented training matrix must reach rank T
        spec = PredictorProcessSpec(dim=15)
        for seed in range(5):
            panel = simulate_panel(spec, 12, 2, np.random.default_rng(seed))
            A = np.vstack([2.0 * panel.train.T, 2.0 * np.ones(12)])
            assert np.linalg.matrix_rank(A) == 12

    def test_too_short_window_rejected(self):
        with pytest.raises(ParameterError):
            simulate_panel(PredictorProcessSpec(dim=2), 1, 2, np.random.default_rng(0))

    def test_no_queries_rejected(self):
        with pytest.raises(ParameterError):
            simulate_panel(PredictorProcessSpec(dim=2), 6, 0, np.random.default_rng(0))


class TestSpecValidation:
    def test_phi_order_enforced(self):
        with pytest.raises(ParameterError):
            PredictorProcessSpec(dim=2, phi_low=0.9, phi_high=0.5)

    def test_phi_must_stay_below_one(self):
        with pytest.raises(ParameterError):
            PredictorProcessSpec(dim=2, phi_low=0.5, phi_high=1.0)

    def test_rho_pd_range_enforced(self):
        with pytest.raises(ParameterError):
            PredictorProcessSpec(dim=3, rho=-0.6)
