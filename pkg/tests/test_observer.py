import numpy as np
import pytest

from kernelobs.errors import DesignError, DimensionError
from kernelobs.kernels import Gaussian, KernelModel, SobolevMatern, assemble_grammian, lattice_centers
from kernelobs.linalg import design_lure
from kernelobs.observer import (
    AdaptiveObserverState,
    DeadZone,
    ObserverDesign,
    adaptive_law_rhs,
    compute_E0,
    compute_min_deadzone,
    evaluate_coeffs,
    lyapunov_value,
    mu_step,
    observer_rhs,
    sigma0,
    sigma0_derivative,
)

RNG = np.random.default_rng(11)


class TestSigma0:
    def test_zero_inside_deadzone(self):
        assert sigma0(0.01, 0.01, 0.01) == 0.0
        assert sigma0(0.0, 0.01, 0.01) == 0.0

    def test_buffer_edge(self):
        # quadratic branch at e = d + eps evaluates to eps/2
        assert sigma0(0.02, 0.01, 0.01) == pytest.approx(0.005)

    def test_linear_branch_production_values(self):
        # d = 0.01, eps = 0.01 as in the translational scenario
        assert sigma0(0.05, 0.01, 0.01) == pytest.approx(0.03)

    def test_nonnegative_and_nondecreasing(self):
        xs = np.linspace(0, 0.2, 400)
        vals = [sigma0(x, 0.03, 0.02) for x in xs]
        assert min(vals) >= 0
        assert np.all(np.diff(vals) >= 0)

    def test_continuity_at_knots(self):
        d, eps = 0.03, 0.02
        for knot in (d, d + eps):
            below = sigma0(knot - 1e-12, d, eps)
            above = sigma0(knot + 1e-12, d, eps)
            assert abs(above - below) < 1e-10


class TestSigma0Derivative:
    def test_branch_values(self):
        assert sigma0_derivative(0.005, 0.01, 0.01) == 0.0
        assert sigma0_derivative(0.015, 0.01, 0.01) == pytest.approx(0.5)
        assert sigma0_derivative(0.5, 0.01, 0.01) == 1.0

    def test_bounded_in_unit_interval(self):
        for x in np.linspace(0, 1, 300):
            v = sigma0_derivative(x, 0.1, 0.05)
            assert 0.0 <= v <= 1.0

    def test_matches_central_finite_difference(self):
        # 1000 random points plus both knots
        d, eps = 0.01, 0.01
        rng = np.random.default_rng(3)
        pts = np.concatenate([rng.uniform(0, 0.1, size=1000), [d, d + eps]])
        h = 1e-7
        for x in pts:
            fd = (sigma0(x + h, d, eps) - sigma0(max(x - h, 0.0), d, eps)) / (h + min(x, h))
            assert sigma0_derivative(x, d, eps) == pytest.approx(fd, abs=1e-6)


class TestMuStep:
    def test_inside_ball(self):
        assert mu_step(np.zeros(3), 0.5) == 0

    def test_boundary_counts_as_outside(self):
        assert mu_step(np.array([0.5, 0.0, 0.0]), 0.5) == 1

    def test_zero_radius_always_on(self):
        assert mu_step(np.array([1e-12]), 0.0) == 1
        assert mu_step(np.array([5.0, 1.0]), 0.0) == 1


def make_design(d=0.01, eps_buf=0.01, mode="smooth", gamma=2.0, delta_bar=0.1,
                l_gain=1.0, m=1, n_centers=1):
    if m == 1:
        model = KernelModel(Gaussian(1.0), 1)
        centers = assemble_grammian(model, [[float(i)] for i in range(n_centers)])
    else:
        model = KernelModel(SobolevMatern(3, m, 1.0), m)
        centers = assemble_grammian(model, lattice_centers([[-1, 1]] * m, 2))
    A = -np.eye(m)
    B = np.eye(m)
    C = np.eye(m)
    L = l_gain * np.eye(m)
    lure = design_lure(A - L @ C, B, C, 1.0, np.eye(m), pb_tol=np.inf)
    dz = DeadZone(d=d, eps_buffer=eps_buf, mode=mode, step_radius=0.0)
    return ObserverDesign(A=A, B=B, C=C, L=L, gamma_f=gamma * np.eye(m), lure=lure,
                          deadzone=dz, delta_bar=delta_bar, kernel=model, centers=centers)


class TestDesignRadii:
    def test_e0_zero_without_measurement_error(self):
        design = make_design(delta_bar=0.0)
        assert compute_E0(design) == 0.0

    def test_e0_scalar_hand_value(self):
        # A_e = -1, P = W = L = 1, eps = 1, delta_bar = 0.1 -> 0.05
        model = KernelModel(Gaussian(1.0), 1)
        centers = assemble_grammian(model, [[0.0]])
        lure = design_lure(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]),
                          1.0, np.array([[1.0]]))
        design = ObserverDesign(A=np.array([[0.0]]), B=np.array([[1.0]]), C=np.array([[1.0]]),
                                L=np.array([[1.0]]), gamma_f=np.array([[1.0]]), lure=lure,
                                deadzone=DeadZone(0.0, 1e-3), delta_bar=0.1,
                                kernel=model, centers=centers)
        assert compute_E0(design) == pytest.approx(0.05, abs=1e-12)
        assert compute_min_deadzone(design, 0.1, 1.0) == pytest.approx(0.2, abs=1e-12)

    def test_e0_linear_in_delta_bar(self):
        d1 = make_design(delta_bar=0.1)
        d3 = make_design(delta_bar=0.3)
        assert compute_E0(d3) == pytest.approx(3.0 * compute_E0(d1), rel=1e-12)

    def test_min_deadzone_zero_when_perfect(self):
        design = make_design(delta_bar=0.0)
        assert compute_min_deadzone(design, 0.5, 0.0) == 0.0

    def test_min_deadzone_affine_in_delta_bar(self):
        lo = make_design(delta_bar=0.1)
        hi = make_design(delta_bar=0.2)
        base = compute_min_deadzone(lo, 0.1, 1.0)
        doubled = compute_min_deadzone(hi, 0.1, 1.0)
        diff = doubled - base
        again = compute_min_deadzone(make_design(delta_bar=0.3), 0.1, 1.0)
        assert again == pytest.approx(doubled + diff, rel=1e-10)


class TestAdaptiveLaw:
    def test_zero_output_error_gives_zero(self):
        design = make_design()
        state = AdaptiveObserverState(x_hat=[0.7], alpha_hat=np.zeros(1))
        rate = adaptive_law_rhs(design, state, [0.7], e_norm_signal=1.0)
        assert np.allclose(rate, 0.0)

    def test_inside_deadzone_exactly_zero(self):
        design = make_design(d=0.5)
        state = AdaptiveObserverState(x_hat=[0.0], alpha_hat=np.zeros(1))
        rate = adaptive_law_rhs(design, state, [1.0], e_norm_signal=0.49)
        assert np.all(rate == 0.0)

    def test_single_center_scalar_formula(self):
        # N = m = 1: rate = sigma0 * gamma * k(xi, y) / k(xi, xi) * (y - C xhat)
        design = make_design(gamma=2.5)
        state = AdaptiveObserverState(x_hat=[0.2], alpha_hat=np.zeros(1))
        y, e_sig = 0.9, 0.08
        rate = adaptive_law_rhs(design, state, [y], e_norm_signal=e_sig)
        kyx = float(design.kernel.family.profile(abs(y - 0.0)))
        expect = sigma0(e_sig, 0.01, 0.01) * 2.5 * kyx / 1.0 * (y - 0.2)
        assert rate[0] == pytest.approx(expect, rel=1e-12)

    def test_linear_in_output_error_with_gate_frozen(self):
        design = make_design(m=3)
        n_alpha = design.coeff_dim
        state1 = AdaptiveObserverState(x_hat=np.zeros(3), alpha_hat=np.zeros(n_alpha))
        y = np.array([0.3, -0.1, 0.2])
        e_sig = 0.5
        r1 = adaptive_law_rhs(design, state1, y, e_sig)
        r2 = adaptive_law_rhs(design, AdaptiveObserverState(np.zeros(3), np.zeros(n_alpha)), 2.0 * y, e_sig)
        # doubling y doubles the innovation (x_hat = 0) but also moves the
        # kernel row; check linearity by scaling the innovation directly
        state3 = AdaptiveObserverState(x_hat=-y, alpha_hat=np.zeros(n_alpha))
        r3 = adaptive_law_rhs(design, state3, y, e_sig)
        assert np.allclose(r3, 2.0 * r1, rtol=1e-12)
        assert r2.shape == r1.shape

    def test_step_mode_uses_e0_radius(self):
        design = make_design(mode="step")
        dz = DeadZone(d=0.01, eps_buffer=0.01, mode="step", step_radius=0.2)
        design2 = ObserverDesign(A=design.A, B=design.B, C=design.C, L=design.L,
                                 gamma_f=design.gamma_f, lure=design.lure, deadzone=dz,
                                 delta_bar=design.delta_bar, kernel=design.kernel,
                                 centers=design.centers)
        state = AdaptiveObserverState(x_hat=[0.0], alpha_hat=np.zeros(1))
        assert np.all(adaptive_law_rhs(design2, state, [1.0], e_norm_signal=0.1) == 0.0)
        assert np.any(adaptive_law_rhs(design2, state, [1.0], e_norm_signal=0.2) != 0.0)

    def test_blockwise_gamma_matches_dense_kron(self):
        # oracle: alpha_dot = gate * (I_N kron Gamma) K^-1 K_row(y)^T innov
        from kernelobs.kernels import kernel_matrix

        design = make_design(m=3, gamma=1.7)
        n = design.centers.n_centers
        state = AdaptiveObserverState(x_hat=RNG.normal(size=3),
                                      alpha_hat=RNG.normal(size=design.coeff_dim))
        y = RNG.uniform(-1, 1, size=3)
        e_sig = 0.4
        rate = adaptive_law_rhs(design, state, y, e_sig)
        kmat = kernel_matrix(design.kernel, design.centers, y)
        innov = y - design.C @ state.x_hat
        dense = np.kron(np.eye(n), design.gamma_f) @ np.linalg.solve(
            design.centers.grammian, kmat.T @ innov)
        gate = sigma0(e_sig, design.deadzone.d, design.deadzone.eps_buffer)
        assert np.allclose(rate, gate * dense, rtol=1e-9, atol=1e-12)

    def test_dimension_errors(self):
        design = make_design()
        state = AdaptiveObserverState(x_hat=[0.0], alpha_hat=np.zeros(1))
        with pytest.raises(DimensionError):
            adaptive_law_rhs(design, state, [1.0, 2.0], 0.1)


class TestObserverRhs:
    def test_reduces_to_model_dynamics(self):
        design = make_design()
        state = AdaptiveObserverState(x_hat=[0.5], alpha_hat=np.zeros(1))
        rate = observer_rhs(design, state, y=[0.5], u=[0.0])
        assert rate == pytest.approx(design.A @ np.array([0.5]))

    def test_exact_estimate_replicates_plant(self):
        # alpha reproducing f at y and x_hat = x: observer derivative equals
        # the plant derivative A x + B (u + f(y))
        design = make_design()
        alpha = np.array([0.8])
        x = np.array([0.3])
        y = x.copy()
        u = np.array([0.25])
        state = AdaptiveObserverState(x_hat=x, alpha_hat=alpha)
        f_val = evaluate_coeffs(design, alpha, y)
        plant = design.A @ x + design.B @ (u + f_val)
        assert np.allclose(observer_rhs(design, state, y, u), plant, rtol=1e-14)

    def test_zero_gain_open_loop(self):
        design = make_design()
        no_l = ObserverDesign(A=design.A, B=design.B, C=design.C,
                              L=np.zeros((1, 1)), gamma_f=design.gamma_f, lure=design.lure,
                              deadzone=design.deadzone, delta_bar=design.delta_bar,
                              kernel=design.kernel, centers=design.centers)
        state = AdaptiveObserverState(x_hat=[1.0], alpha_hat=np.zeros(1))
        rate = no_l.A @ np.array([1.0]) + no_l.B @ (np.array([0.5]) + evaluate_coeffs(no_l, np.zeros(1), [9.0]))
        assert np.allclose(observer_rhs(no_l, state, [9.0], [0.5]), rate)


class TestLyapunovValue:
    def test_zero_at_origin(self):
        design = make_design()
        assert lyapunov_value(design, np.zeros(1), np.zeros(1)) == 0.0

    def test_pure_state_error_term(self):
        design = make_design()
        e = np.array([0.4])
        assert lyapunov_value(design, e, np.zeros(1)) == pytest.approx(float(e @ design.lure.P @ e))

    def test_matches_dense_quadratic_form(self):
        design = make_design(m=3, gamma=2.0)
        e = RNG.normal(size=3)
        a = RNG.normal(size=design.coeff_dim)
        n = design.centers.n_centers
        dense = (e @ design.lure.P @ e
                 + a @ np.kron(np.eye(n), np.linalg.inv(design.gamma_f)) @ design.centers.grammian @ a)
        assert lyapunov_value(design, e, a) == pytest.approx(dense, rel=1e-10)

    def test_positive_for_nonzero_error(self):
        design = make_design(m=3)
        assert lyapunov_value(design, np.ones(3) * 0.1, np.zeros(design.coeff_dim)) > 0


class TestObserverDesignValidation:
    def test_unstable_gain_rejected(self):
        model = KernelModel(Gaussian(1.0), 1)
        centers = assemble_grammian(model, [[0.0]])
        lure = design_lure(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]),
                          1.0, np.array([[1.0]]))
        with pytest.raises(DesignError, match="not Hurwitz"):
            ObserverDesign(A=np.array([[1.0]]), B=np.array([[1.0]]), C=np.array([[1.0]]),
                           L=np.array([[0.5]]), gamma_f=np.array([[1.0]]), lure=lure,
                           deadzone=DeadZone(0.01, 0.01), delta_bar=0.0,
                           kernel=model, centers=centers)

    def test_gamma_must_be_spd(self):
        model = KernelModel(Gaussian(1.0), 1)
        centers = assemble_grammian(model, [[0.0]])
        lure = design_lure(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]),
                          1.0, np.array([[1.0]]))
        with pytest.raises(DesignError, match="positive-definite"):
            ObserverDesign(A=np.array([[0.0]]), B=np.array([[1.0]]), C=np.array([[1.0]]),
                           L=np.array([[1.0]]), gamma_f=np.array([[-1.0]]), lure=lure,
                           deadzone=DeadZone(0.01, 0.01), delta_bar=0.0,
                           kernel=model, centers=centers)

    def test_deadzone_validation(self):
        with pytest.raises(DesignError):
            DeadZone(d=-0.1, eps_buffer=0.01)
        with pytest.raises(DesignError):
            DeadZone(d=0.1, eps_buffer=0.0)
        with pytest.raises(DesignError):
            DeadZone(d=0.1, eps_buffer=0.01, mode="other")
