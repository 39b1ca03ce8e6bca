import math

import numpy as np
import pytest

from weingarten import (
    CubicL1Spec,
    CubicRoC,
    GeneralSpec,
    HopfL1Spec,
    L0Spec,
    LinearHopf,
    Multiplier,
    SemiQuadratic,
    SupportProfile,
    VariationalState,
    eval_F,
    euler_lagrange_residual,
    first_integral_I,
    first_integral_Q,
    general_lagrangian,
    helmholtz_residual,
    integrate_cm,
    jlm_ratio_check,
    lagrangian_eval,
    phi0,
    second_variation,
    sine_perturbation_basis,
)
from weingarten.numerics import adaptive_simpson
from weingarten.variational import SingularMultiplierError, lagrangian_partials


def two_sine_support(K=0.0, grid=None):
    """The r2 = 2 r1 family: r = sin - theta cos + K cos (analytic)."""
    grid = grid if grid is not None else np.linspace(0.3, 1.25, 40)
    return SupportProfile.from_callables(
        grid,
        lambda t: math.sin(t) - t * math.cos(t) + K * math.cos(t),
        lambda t: (t - K) * math.sin(t),
        lambda t: math.sin(t) + (t - K) * math.cos(t),
    )


class TestPhi0:
    def test_doubling_relation(self):
        m = Multiplier(LinearHopf(2.0, 0.0), 1.0)
        for u in (0.5, 1.0, 2.0, 3.0):
            assert m.phi0(u) == pytest.approx(u ** -2, rel=1e-12)

    def test_hopf_closed_form(self):
        lam, C = 0.25, 2.0
        m = Multiplier(LinearHopf(lam, C), 1.0)
        for u in (0.4, 1.0, 2.0):
            want = abs(C + (lam - 1.0) * u) ** (lam / (1.0 - lam))
            assert m.phi0(u) == pytest.approx(want, rel=1e-12)

    def test_cubic_closed_form(self):
        m = Multiplier(CubicRoC(1.5), 0.3)
        for u in (0.1, 0.3, 0.5):
            want = abs(1.0 - 1.5 ** 2 * u ** 2) ** -1.5
            assert m.phi0(u) == pytest.approx(want, rel=1e-12)

    def test_fixed_point_rejected(self):
        with pytest.raises(SingularMultiplierError):
            Multiplier(LinearHopf(3.0, -3.0), 1.5)
        m = Multiplier(LinearHopf(3.0, -3.0), 2.0)
        with pytest.raises(SingularMultiplierError):
            m.phi0(1.2)  # across the fixed point 1.5

    def test_numeric_path_matches_closed_form(self):
        # semi-quadratic CMC evaluated densely vs the Hopf-style oracle
        rel = SemiQuadratic(0.0, 1.0, 1.0, -4.0)
        m = Multiplier(rel, 1.0)
        # J' = 1/(u - u/(4u-1)) = (4u-1)/(2u(2u-1)); oracle by quadrature
        for u in (0.8, 1.5, 2.5):
            want = adaptive_simpson(
                lambda x: 1.0 / (x - float(eval_F(rel, x))), 1.0, u,
                abs_tol=1e-13, rel_tol=1e-12)
            assert m.J(u) == pytest.approx(want, abs=1e-9)

    def test_module_level_wrapper(self):
        assert phi0(LinearHopf(2.0, 0.0), 2.0, base_point=1.0) == pytest.approx(0.25)


class TestLagrangianEval:
    def test_hopf_l1_value(self):
        lam, C = 0.5, 2.0
        st = VariationalState(math.pi / 4.0, 1.0, 0.0)
        val = lagrangian_eval(HopfL1Spec(), LinearHopf(lam, C), st)
        want = (2.0 * C * 1.0 - (1.0 - lam) * 1.0) / (2.0 * math.sin(math.pi / 4.0) ** lam)
        assert val == pytest.approx(want, rel=1e-12)

    def test_l0_doubling_log_form(self):
        # lam = 2 degenerate: G2 = -ln|u| so L0 = -tan^2 ln r1
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        st = VariationalState(0.6, 1.0, 0.3)
        val = lagrangian_eval(L0Spec(), rel, st, m)
        want = -math.tan(0.6) ** 2 * math.log(st.r1)
        assert val == pytest.approx(want, rel=1e-10)

    def test_finite_at_zero_rdot(self):
        for spec, rel in ((L0Spec(), LinearHopf(2.0, 0.0)),
                          (HopfL1Spec(), LinearHopf(0.5, 1.0)),
                          (CubicL1Spec(), CubicRoC(1.0))):
            st = VariationalState(0.8, 0.5, 0.0)
            assert math.isfinite(lagrangian_eval(spec, rel, st))

    def test_l0_rejects_equator(self):
        with pytest.raises(SingularMultiplierError):
            lagrangian_eval(L0Spec(), LinearHopf(2.0, 0.0),
                            VariationalState(math.pi / 2.0, 1.0, 0.0))


class TestEulerLagrange:
    def test_solution_residual_small(self):
        rel = LinearHopf(2.0, 0.0)
        res = euler_lagrange_residual(L0Spec(), rel, two_sine_support(),
                                      mult=Multiplier(rel, 1.0))
        assert np.nanmax(np.abs(res["el"])) <= 1e-6
        assert np.nanmax(np.abs(res["defect"])) <= 1e-6

    def test_non_solution_identity_still_holds(self):
        # the multiplier identity holds off-shell: both sides nonzero but equal
        rel = LinearHopf(2.0, 0.0)
        grid = np.linspace(0.3, 1.25, 40)
        traj = SupportProfile.from_callables(
            grid,
            lambda t: 1.0 + 0.1 * math.sin(2.0 * t),
            lambda t: 0.2 * math.cos(2.0 * t),
            lambda t: -0.4 * math.sin(2.0 * t))
        res = euler_lagrange_residual(L0Spec(), rel, traj, mult=Multiplier(rel, 1.0))
        assert np.nanmax(np.abs(res["el"])) > 0.1
        assert np.nanmax(np.abs(res["defect"])) <= 1e-6

    def test_hopf_l1_on_sphere_member(self):
        # r2 = 0.5 r1 + 1 has the sphere member r = 2
        rel = LinearHopf(0.5, 1.0)
        grid = np.linspace(0.3, 1.25, 30)
        traj = SupportProfile.from_callables(grid, lambda t: 2.0,
                                             lambda t: 0.0, lambda t: 0.0)
        res = euler_lagrange_residual(HopfL1Spec(), rel, traj, analytic=True)
        assert np.nanmax(np.abs(res["el"])) <= 1e-10

    def test_analytic_partials_match_numeric(self):
        rel = CubicRoC(1.0)
        m = Multiplier(rel, 0.5)
        st = VariationalState(0.7, 0.45, 0.1)
        a = lagrangian_partials(CubicL1Spec(), rel, st, m, analytic=True)
        n = lagrangian_partials(CubicL1Spec(), rel, st, m, analytic=False)
        for key in a:
            assert a[key] == pytest.approx(n[key], rel=1e-5, abs=1e-6), key


class TestHelmholtz:
    def test_phi0_satisfies_pde(self, rng):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        states = [VariationalState(float(rng.uniform(0.3, 1.4)),
                                   float(rng.uniform(0.5, 1.5)),
                                   float(rng.uniform(-0.3, 0.3)))
                  for _ in range(100)]
        states = [st for st in states if 0.45 < st.r1 < 2.9]
        res = helmholtz_residual(rel, lambda th, r, rd: m.phi0(rd / math.tan(th) + r),
                                 states, m)
        assert np.max(np.abs(res)) <= 1e-6

    def test_raw_form_fails_by_fprime_cot(self):
        rel = LinearHopf(2.0, 0.0)
        states = [VariationalState(0.7, 1.0, 0.2), VariationalState(1.1, 0.8, -0.1)]
        res = helmholtz_residual(rel, None, states)
        want = np.array([2.0 / math.tan(0.7), 2.0 / math.tan(1.1)])
        assert np.allclose(res, want, rtol=1e-12)

    def test_constant_shift_relation_degenerates(self):
        # F(u) = u + C has F' = 1 everywhere, so the multiplier PDE loses
        # its state dependence and a theta-only multiplier 1/sin solves it
        rel = LinearHopf(1.0, 2.0)
        states = [VariationalState(0.7, 1.0, 0.2), VariationalState(1.2, 0.4, 0.1)]
        res = helmholtz_residual(rel, lambda th, r, rd: 1.0 / math.sin(th), states)
        assert np.max(np.abs(res)) <= 1e-8
        raw = helmholtz_residual(rel, None, states)
        want = np.array([1.0 / math.tan(0.7), 1.0 / math.tan(1.2)])
        assert np.allclose(raw, want, rtol=1e-12)


class TestFirstIntegrals:
    def test_doubling_I_is_one(self):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        traj = two_sine_support()
        for th in (0.4, 0.8, 1.2):
            st = VariationalState(th, float(traj.value(th)), float(traj.rdot(th)))
            assert first_integral_I(rel, st, m) == pytest.approx(1.0, rel=1e-10)

    def test_hopf_general_closed_form(self):
        lam, C = 3.0, -3.0
        rel = LinearHopf(lam, C)
        m = Multiplier(rel, 2.0)
        st = VariationalState(0.9, 1.7, 0.2)
        got = first_integral_I(rel, st, m)
        want = abs(C + (lam - 1.0) * st.r1) ** (-1.0 / (1.0 - lam)) / math.sin(0.9)
        assert got == pytest.approx(want, rel=1e-10)

    @pytest.mark.parametrize("K", [-1.0, 0.0, 2.0])
    def test_Q_recovers_axis_translation(self, K):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        traj = two_sine_support(K)
        for th in (0.5, 1.0):
            st = VariationalState(th, float(traj.value(th)), float(traj.rdot(th)))
            assert first_integral_Q(rel, st, m) == pytest.approx(K, abs=1e-8)

    def test_sphere_member_constant(self):
        rel = SemiQuadratic(0, 1, 1, -4)
        m = Multiplier(rel, 1.0)
        sol = integrate_cm(rel, math.pi / 2.0, 1.0, (0.4, math.pi - 0.4))
        vals = []
        for th in (0.5, 0.9, 1.3):
            st = VariationalState(th, float(sol.support.value(th)),
                                  float(sol.support.rdot(th)))
            vals.append(first_integral_Q(rel, st, m, theta_base=0.45))
        assert np.ptp(vals) <= 1e-8 * max(1.0, np.max(np.abs(vals)))


class TestConservation:
    def test_drift_along_matrix(self, integrated_matrix):
        for rel, profile, bracket, q_base in integrated_matrix:
            traj = profile.support
            base = 0.5 * (bracket[0] + bracket[1])
            m = Multiplier(rel, base)
            ths = np.linspace(0.5, math.pi - 0.5, 9)
            Is, Qs = [], []
            for th in ths:
                st = VariationalState(float(th), float(traj.value(th)),
                                      float(traj.rdot(th)))
                Is.append(first_integral_I(rel, st, m))
                if abs(math.cos(th)) > 0.05:
                    Qs.append(first_integral_Q(rel, st, m, theta_base=max(q_base, 0.3)))
            Is, Qs = np.asarray(Is), np.asarray(Qs)
            assert (Is.max() - Is.min()) / abs(Is.mean()) <= 1e-6, rel
            qscale = max(abs(Qs.mean()), float(np.max(np.abs(Qs))), 1e-9)
            assert (Qs.max() - Qs.min()) / qscale <= 1e-5, rel


class TestJlmRatio:
    def test_ratio_of_jlms_constant(self):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.3, 1.3))
        phi_a = lambda th, r, rd: m.phi0(rd / math.tan(th) + r)
        phi_b = lambda th, r, rd: 1.0 / math.sin(th) ** 2   # I^2 Phi0
        drift = jlm_ratio_check(rel, phi_a, phi_b, sol.support)
        assert np.max(np.abs(drift)) <= 1e-6

    def test_same_multiplier_exact_zero(self):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.3, 1.3))
        phi_a = lambda th, r, rd: m.phi0(rd / math.tan(th) + r)
        drift = jlm_ratio_check(rel, phi_a, phi_a, sol.support)
        assert np.max(np.abs(drift)) == 0.0

    def test_constant_one_is_not_a_jlm(self):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.3, 1.3))
        phi_a = lambda th, r, rd: m.phi0(rd / math.tan(th) + r)
        drift = jlm_ratio_check(rel, phi_a, lambda th, r, rd: 1.0, sol.support)
        assert np.max(np.abs(drift)) > 0.1


class TestSecondVariation:
    def test_l0_positive_and_integrand_identity(self, rng):
        rel = LinearHopf(2.0, 0.0)
        m = Multiplier(rel, 1.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.25, 1.3))
        basis = sine_perturbation_basis(6, 0.3, 1.2, rng=rng, extra_random=4)
        for v, vd in basis:
            d2 = second_variation(L0Spec(), rel, sol.support, (v, vd), (0.3, 1.2), m)
            assert d2 > 0.0

            def direct(th):
                r = float(sol.support.value(th))
                rd = float(sol.support.rdot(th))
                u = rd / math.tan(th) + r
                return m.phi0(u) * (math.tan(th) * v(th) + vd(th)) ** 2

            want = adaptive_simpson(direct, 0.3, 1.2, abs_tol=1e-12, rel_tol=1e-10)
            assert d2 == pytest.approx(want, abs=1e-8)

    def test_zero_field_zero(self):
        rel = LinearHopf(2.0, 0.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.25, 1.3))
        z = (lambda th: 0.0, lambda th: 0.0)
        assert second_variation(L0Spec(), rel, sol.support, z, (0.3, 1.2)) == 0.0

    def test_l0_interval_across_equator_rejected(self):
        rel = LinearHopf(2.0, 0.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.25, 1.9))
        v = sine_perturbation_basis(1, 0.3, 1.8)[0]
        with pytest.raises(SingularMultiplierError):
            second_variation(L0Spec(), rel, sol.support, v, (0.3, 1.8))

    def test_hopf_l1_matches_el_consistent_form(self):
        # delta^2 S1 = int (v'^2 - (1-lam) v^2)/sin^lam for the L1 that
        # actually satisfies the multiplier identity
        lam, C = 0.5, 1.0
        rel = LinearHopf(lam, C)
        sol = integrate_cm(rel, 0.75, 1.0, (0.25, 1.3))
        v, vd = sine_perturbation_basis(2, 0.3, 1.2)[1]
        d2 = second_variation(HopfL1Spec(), rel, sol.support, (v, vd), (0.3, 1.2))
        want = adaptive_simpson(
            lambda th: (vd(th) ** 2 - (1.0 - lam) * v(th) ** 2) / math.sin(th) ** lam,
            0.3, 1.2, abs_tol=1e-13, rel_tol=1e-11)
        assert d2 == pytest.approx(want, abs=1e-10)


class TestGeneralLagrangian:
    def test_f_identity_recovers_l0(self):
        rel = LinearHopf(2.0, 0.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.3, 1.3))
        rep = general_lagrangian(rel, lambda I, Q: 1.0, sol.support)
        assert rep["is_jlm"]
        assert rep["pde_residual_max"] <= 1e-6

    def test_hopf_power_family(self):
        lam, C = 0.5, 1.0
        rel = LinearHopf(lam, C)
        sol = integrate_cm(rel, 0.75, 1.2, (0.3, 1.3))
        rep = general_lagrangian(rel, lambda I, Q: I ** lam, sol.support,
                                 registered="hopf")
        assert rep["is_jlm"]
        assert rep["el_defect_max"] <= 1e-6

    def test_cubic_power_family(self):
        rel = CubicRoC(1.0)
        sol = integrate_cm(rel, 0.75, 0.5, (0.3, 1.3))
        rep = general_lagrangian(rel, lambda I, Q: I ** 3, sol.support,
                                 registered="cubic")
        assert rep["is_jlm"]
        assert rep["el_defect_max"] <= 1e-6

    def test_non_jlm_диагnosed(self):
        rel = LinearHopf(2.0, 0.0)
        sol = integrate_cm(rel, 0.75, 1.0, (0.3, 1.3))
        rep = general_lagrangian(rel, lambda I, Q: 1.0 + 0.5 * math.sin(3.0 * I),
                                 sol.support)
        # f(I) is a first integral, so f*Phi0 IS a JLM; break it with an
        # explicit theta dependence instead
        assert rep["is_jlm"]

        m = Multiplier(rel, 1.0)
        states = [VariationalState(0.5, 1.0, 0.1), VariationalState(1.0, 0.9, 0.0)]
        res = helmholtz_residual(
            rel, lambda th, r, rd: m.phi0(rd / math.tan(th) + r) * th, states, m)
        assert np.max(np.abs(res)) > 1e-3

    def test_jlm_scaled_by_first_integral_stays_jlm(self, rng):
        rel = LinearHopf(3.0, -3.0)
        sol = integrate_cm(rel, math.pi / 2.0, 2.0, (0.4, math.pi - 0.4))
        for expo in (1.0, 2.0, -1.5):
            rep = general_lagrangian(rel, lambda I, Q, e=expo: I ** e, sol.support)
            assert rep["is_jlm"], expo
