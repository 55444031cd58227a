import math

import numpy as np
import pytest

from axiflight import ctrl, geom
from axiflight.ctrl import (
    Controller,
    CtrlEstimates,
    CtrlGains,
    CtrlState,
    ReferenceSample,
    alignment_energy,
    apparent_force_aero,
    apparent_force_drag,
    direction_gain,
    omega_cmd,
    reference_direction,
    reference_feedforward,
    smooth_sat,
    thrust_command,
    update_iv,
    velocity_feedback,
)
from axiflight.errors import AntipodalAttitude, SingularReference
from axiflight.plant import MACH

G = 9.81
EST = CtrlEstimates(m_hat=80.0, ka_hat=0.24, c0_hat=0.1, c1_hat=11.55)
GAINS = CtrlGains()


def make_controller(mode="fp", gains=GAINS):
    return Controller(EST, gains, G, mode)


class TestVelocityFeedback:
    def test_zero(self):
        assert velocity_feedback(GAINS, (0, 0, 0), (0, 0, 0)) == (0, 0, 0)

    def test_benchmark_gains(self):
        out = velocity_feedback(GAINS, (0, 0, 0), (1.0, 0.0, 0.0))
        assert out == (-5.0, 0.0, 0.0)

    def test_linearity(self):
        rng = np.random.default_rng(1)
        a_iv, a_err = tuple(rng.uniform(-2, 2, 3)), tuple(rng.uniform(-5, 5, 3))
        b_iv, b_err = tuple(rng.uniform(-2, 2, 3)), tuple(rng.uniform(-5, 5, 3))
        left = velocity_feedback(GAINS, geom.add(a_iv, b_iv), geom.add(a_err, b_err))
        right = geom.add(
            velocity_feedback(GAINS, a_iv, a_err), velocity_feedback(GAINS, b_iv, b_err)
        )
        assert all(abs(x - y) < 1e-12 for x, y in zip(left, right))


class TestSaturatedIntegrator:
    def test_origin_is_equilibrium(self):
        iv = (0.0, 0.0, 0.0)
        for _ in range(100):
            iv = update_iv(GAINS, iv, (0.0, 0.0, 0.0), 1e-3)
        assert iv == (0.0, 0.0, 0.0)

    def test_small_regime_integrates_error(self):
        # far from saturation the integral tracks the error: dIv/dt ~ v_err
        v_err = (0.4, -0.2, 0.1)
        d = ctrl.iv_derivative(GAINS, (0.05, 0.02, -0.01), v_err)
        assert all(abs(a - b) < 1e-3 for a, b in zip(d, v_err))

    def test_matches_fine_ode_solution(self):
        # oracle: the same law integrated at 100x finer steps
        v_err = (3.0, -1.0, 2.0)
        coarse = (0.2, 0.1, -0.3)
        fine = coarse
        for _ in range(100):
            fine = update_iv(GAINS, fine, v_err, 1e-5)
        coarse = update_iv(GAINS, coarse, v_err, 1e-3)
        assert all(abs(a - b) < 1e-10 for a, b in zip(coarse, fine))

    def test_huge_error_stays_bounded(self):
        v_err = (1e6, 0.0, 0.0)
        iv = (0.0, 0.0, 0.0)
        limit = GAINS.delta_sat * (1.0 + 1e-9)
        for _ in range(1_000_000):
            iv = update_iv(GAINS, iv, v_err, 1e-3)
            assert iv[0] <= limit
        assert geom.norm(iv) <= limit

    def test_smooth_sat_limits(self):
        small = smooth_sat((1e-3, 0, 0), 2.0)
        assert small[0] == pytest.approx(1e-3, rel=1e-9)
        big = smooth_sat((1e9, 0, 0), 2.0)
        assert big[0] == pytest.approx(2.0, rel=1e-6)


class TestApparentForces:
    def test_hover_drag_form(self):
        f = apparent_force_drag(EST, (0, 0, 0), (0, 0, 0), (0, 0, 0), G)
        assert f == (0.0, 0.0, EST.m_hat * G)
        assert geom.norm(f) == pytest.approx(784.8)

    def test_zero_ka_reduces_to_kinematics(self):
        est = CtrlEstimates(m_hat=80.0, ka_hat=1e-300, c0_hat=0.1, c1_hat=11.55)
        ar, xi = (1.0, 2.0, 3.0), (0.1, 0.2, 0.3)
        f = apparent_force_drag(est, (100, 0, 0), ar, xi, G)
        want = (80 * (-1.0 - 0.1), 80 * (-2.0 - 0.2), 80 * (G - 3.0 - 0.3))
        assert all(abs(a - b) < 1e-6 for a, b in zip(f, want))

    def test_cruise_magnitude(self):
        # equivalent drag dominates at cruise speed
        v = (0.7 * MACH, 0.0, 0.0)
        f = apparent_force_drag(EST, v, (0, 0, 0), (0, 0, 0), G)
        drag = EST.ka_hat * EST.cd0_hat * (0.7 * MACH) ** 2
        assert f[0] == pytest.approx(-drag, rel=1e-12)
        assert geom.norm(f) == pytest.approx(math.hypot(drag, 784.8), rel=1e-12)

    def test_aero_vs_drag_differ_by_lift_term(self):
        # the two apparent forces differ along the axis by 2*c1*ka*|v|^2*cos(a)
        rng = np.random.default_rng(3)
        for _ in range(100):
            att = geom.rot_exp(tuple(rng.uniform(-2, 2, 3)))
            v_air = tuple(rng.uniform(-250, 250, 3))
            if geom.norm(v_air) < 1.0:
                continue
            ar = tuple(rng.uniform(-20, 20, 3))
            xi = tuple(rng.uniform(-30, 30, 3))
            fa = apparent_force_aero(EST, att, v_air, ar, xi, G)
            fp = apparent_force_drag(EST, v_air, ar, xi, G)
            k = geom.body_axis(att)
            va = geom.norm(v_air)
            cos_a = -geom.dot(v_air, k) / va
            lift_term = 2.0 * EST.c1_hat * EST.ka_hat * va * va * cos_a
            diff = geom.sub(fa, fp)
            # difference is purely axial
            assert geom.norm(geom.cross(diff, k)) < 1e-6 * (1 + geom.norm(diff))
            assert geom.dot(fp, k) - geom.dot(fa, k) == pytest.approx(
                lift_term, abs=1e-6 * (1 + abs(lift_term))
            )


class TestReferenceDirection:
    def test_points_along_force(self):
        kr = reference_direction((0.0, 0.0, 981.0), 1e-3)
        assert kr == (0.0, 0.0, 1.0)

    def test_vanished_force_aborts(self):
        with pytest.raises(SingularReference):
            reference_direction((0.0, 0.0, 0.0), 1e-3)
        with pytest.raises(SingularReference):
            reference_direction((1e-4, 0.0, 0.0), 1e-3)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            f = tuple(rng.uniform(-1, 1, 3) * 1e4)
            if geom.norm(f) < 1.0:
                continue
            a = reference_direction(f, 1e-3)
            b = reference_direction(geom.scale(f, 37.5), 1e-3)
            assert all(abs(x - y) < 1e-12 for x, y in zip(a, b))


class TestThrustCommand:
    def test_hover(self):
        c = make_controller()
        thrust, sat = thrust_command((0.0, 0.0, 784.8), (0.0, 0.0, 1.0), c.t_min, c.t_max)
        assert thrust == pytest.approx(784.8)
        assert not sat

    def test_ceiling(self):
        c = make_controller()
        thrust, sat = thrust_command((0.0, 0.0, 1e9), (0.0, 0.0, 1.0), c.t_min, c.t_max)
        assert sat
        assert thrust == pytest.approx(10 * 784.8, rel=1e-6)
        assert thrust < 10 * 784.8

    def test_floor_keeps_thrust_positive(self):
        c = make_controller()
        thrust, sat = thrust_command((0.0, 0.0, -500.0), (0.0, 0.0, 1.0), c.t_min, c.t_max)
        assert sat
        assert 0.0 < thrust <= 1e-6 * 784.8 * 1.01


class TestDirectionGain:
    def test_zero_force(self):
        gamma, gdot = direction_gain((0, 0, 0), (0, 0, 0), 100.0)
        assert gamma == 10.0
        assert gdot == 0.0

    def test_static_force(self):
        gamma, gdot = direction_gain((300.0, 0, 0), (0, 0, 0), 100.0)
        assert gamma == pytest.approx(math.sqrt(100.0 + 9e4))
        assert gdot == 0.0

    def test_chain_rule_against_finite_difference(self):
        # gamma(t) along a synthetic force trajectory
        c2 = 50.0

        def force(t):
            return (100 * math.sin(t), 80 * math.cos(2 * t), 30 + 10 * t)

        def force_dot(t):
            return (100 * math.cos(t), -160 * math.sin(2 * t), 10.0)

        h = 1e-4
        for t in (0.1, 0.7, 2.0):
            gamma, gdot = direction_gain(force(t), force_dot(t), c2)
            gp = math.sqrt(c2 + geom.norm(force(t + h)) ** 2)
            gm = math.sqrt(c2 + geom.norm(force(t - h)) ** 2)
            fd = (gp - gm) / (2 * h)
            assert gdot == pytest.approx(fd, rel=1e-6)


class TestOmegaCommand:
    def test_aligned_equilibrium(self):
        k = (0.0, 0.0, 1.0)
        w = omega_cmd(GAINS, k, k, (0, 0, 0), 10.0, 0.0)
        assert geom.norm(w) < 1e-15

    def test_perpendicular_magnitude(self):
        k = (1.0, 0.0, 0.0)
        kr = (0.0, 0.0, 1.0)
        w = omega_cmd(GAINS, k, kr, (0, 0, 0), 5.0, 0.0)
        k1 = GAINS.k10 / (1.0 + 0.0 + GAINS.eps1) ** 2
        assert geom.norm(w) == pytest.approx(k1)
        assert geom.norm(w) == pytest.approx(9.80296049406921, rel=1e-12)

    def test_no_axial_component(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            k = geom.unit(tuple(rng.normal(size=3)))
            kr = geom.unit(tuple(rng.normal(size=3)))
            if geom.dot(k, kr) < -0.9:
                continue
            kr_dot_raw = tuple(rng.uniform(-2, 2, 3))
            # make kr_dot tangent to kr
            kr_dot = geom.sub(kr_dot_raw, geom.scale(kr, geom.dot(kr, kr_dot_raw)))
            w = omega_cmd(GAINS, k, kr, kr_dot, 3.0, 0.4)
            assert abs(geom.dot(w, k)) <= 1e-12 * (1 + geom.norm(w))

    def test_antipodal_domain_boundary(self):
        with pytest.raises(AntipodalAttitude):
            omega_cmd(GAINS, (0.0, 0.0, 1.0), (0.0, 0.0, -1.0), (0, 0, 0), 1.0, 0.0)


class TestReferenceFeedforward:
    def sample_c701_sinusoid(self, t):
        m = MACH
        w1, w2 = math.pi / 5, math.pi / 10
        vr = (-0.5 * m * math.sin(w1 * t), 0.6 * m * math.sin(w2 * t), 0.6 * m * math.cos(w2 * t))
        ar = (-0.5 * m * w1 * math.cos(w1 * t), 0.6 * m * w2 * math.cos(w2 * t),
              -0.6 * m * w2 * math.sin(w2 * t))
        jr = (0.5 * m * w1 * w1 * math.sin(w1 * t), -0.6 * m * w2 * w2 * math.sin(w2 * t),
              -0.6 * m * w2 * w2 * math.cos(w2 * t))
        return ReferenceSample(vr=vr, ar=ar, jr=jr)

    def test_constant_reference_is_static(self):
        s = ReferenceSample(vr=(200.0, 0.0, 0.0))
        ff = reference_feedforward(EST, GAINS, s, (0, 0, 0), (0, 0, 0), G)
        assert geom.norm(ff.kr_dot) == 0.0
        assert geom.norm(ff.omega_r) == 0.0
        assert ff.gamma_dot == 0.0

    def test_direction_rate_orthogonal_to_direction(self):
        for t in (41.0, 44.5, 52.3, 58.0):
            ff = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t), (0, 0, 0), (0, 0, 0), G
            )
            assert abs(geom.dot(ff.kr_dot, ff.kr)) <= 1e-12 * (1 + geom.norm(ff.kr_dot))

    def test_direction_rate_matches_finite_difference(self):
        h = 1e-4
        for t in (41.0, 45.7, 53.2):
            ff = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t), (0, 0, 0), (0, 0, 0), G
            )
            kp = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t + h), (0, 0, 0), (0, 0, 0), G
            ).kr
            km = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t - h), (0, 0, 0), (0, 0, 0), G
            ).kr
            fd = geom.scale(geom.sub(kp, km), 1.0 / (2 * h))
            scale = geom.norm(ff.kr_dot)
            assert all(abs(a - b) <= 1e-5 * (1 + scale) for a, b in zip(ff.kr_dot, fd))
            # gamma rate against the same difference
            gp = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t + h), (0, 0, 0), (0, 0, 0), G
            ).gamma
            gm = reference_feedforward(
                EST, GAINS, self.sample_c701_sinusoid(t - h), (0, 0, 0), (0, 0, 0), G
            ).gamma
            assert ff.gamma_dot == pytest.approx((gp - gm) / (2 * h), rel=1e-5)

    def test_non_smooth_sample_zeroes_rates(self):
        s = self.sample_c701_sinusoid(41.0)
        frozen = ReferenceSample(vr=s.vr, ar=s.ar, jr=s.jr, smooth=False)
        ff = reference_feedforward(EST, GAINS, frozen, (0, 0, 0), (0, 0, 0), G)
        assert ff.kr_dot == (0.0, 0.0, 0.0)
        assert ff.omega_r == (0.0, 0.0, 0.0)
        assert ff.gamma_dot == 0.0

    def test_infeasible_reference_aborts(self):
        # hand the loop a reference acceleration that cancels gravity exactly
        s = ReferenceSample(vr=(0.0, 0.0, 0.0), ar=(0.0, 0.0, G))
        with pytest.raises(SingularReference):
            reference_feedforward(EST, GAINS, s, (0, 0, 0), (0, 0, 0), G)

    def test_fast_path_agrees_with_rich_form(self):
        c = make_controller()
        rng = np.random.default_rng(8)
        for t in (0.0, 41.2, 47.9, 55.5):
            s = self.sample_c701_sinusoid(t)
            vw = tuple(rng.uniform(-5, 5, 3))
            vwr = tuple(rng.uniform(-1, 1, 3))
            rich = reference_feedforward(EST, GAINS, s, vw, vwr, G)
            omega_r, ratio = c.feedforward_fast(s, vw, vwr)
            assert all(abs(a - b) <= 1e-12 * (1 + geom.norm(rich.omega_r))
                       for a, b in zip(omega_r, rich.omega_r))
            assert ratio == pytest.approx(rich.gamma_dot / rich.gamma, rel=1e-12)


class TestController:
    def test_hover_equilibrium_command(self):
        c = make_controller()
        thrust, wb, diag = c.command(
            0.0, (0, 0, 0), geom.ROT_IDENTITY, (0, 0, 0), ReferenceSample(vr=(0, 0, 0))
        )
        assert thrust == pytest.approx(784.8, rel=1e-12)
        assert geom.norm(wb) < 1e-12
        assert diag.theta_tilde < 1e-12
        assert not diag.sat_thrust and not diag.sat_omega

    def test_benchmark_initial_state(self):
        # 0.5 Mach level flight, 40 deg nose-up mispointing: incidence is 50 deg
        c = make_controller()
        att = geom.rot_from_euler_zyx(0.0, math.radians(-40.0), 0.0)
        v = (0.5 * MACH, 0.0, 0.0)
        sample = ReferenceSample(vr=(0.7 * MACH, 0.0, 0.0))
        thrust, wb, diag = c.command(0.0, v, att, (0, 0, 0), sample)
        assert math.degrees(diag.alpha) == pytest.approx(50.0, abs=1e-9)
        assert math.degrees(diag.theta_tilde) == pytest.approx(50.0, abs=1.0)
        assert diag.sat_thrust  # the initial velocity error pins the thrust

    def test_step_updates_integral_then_commands(self):
        c = make_controller()
        state = CtrlState()
        sample = ReferenceSample(vr=(0, 0, 0))
        thrust, wb, new_state, diag = c.step(
            state, 0.0, (1.0, 0.0, 0.0), geom.ROT_IDENTITY, sample, 1e-3
        )
        assert new_state.Iv != (0.0, 0.0, 0.0)
        assert new_state.Iv[0] == pytest.approx(1e-3, rel=1e-3)

    def test_composition_matches_helpers(self):
        # the inlined command agrees with the op-by-op composition
        c = make_controller()
        rng = np.random.default_rng(12)
        for _ in range(25):
            att = geom.rot_exp(tuple(rng.uniform(-1.5, 1.5, 3)))
            v = tuple(rng.uniform(-250, 250, 3))
            iv = tuple(rng.uniform(-2, 2, 3))
            sample = ReferenceSample(
                vr=tuple(rng.uniform(-200, 200, 3)), ar=tuple(rng.uniform(-30, 30, 3)),
                jr=tuple(rng.uniform(-20, 20, 3)),
            )
            try:
                thrust, wb, diag = c.command(0.0, v, att, iv, sample)
            except (SingularReference, AntipodalAttitude):
                continue
            v_err = geom.sub(v, sample.vr)
            xi = velocity_feedback(GAINS, iv, v_err)
            f_dir = apparent_force_drag(EST, v, sample.ar, xi, G)
            kr = reference_direction(f_dir, GAINS.eps_singular)
            ff = reference_feedforward(EST, GAINS, sample, (0, 0, 0), (0, 0, 0), G)
            w = ctrl.omega_feedback(
                GAINS, geom.unit(geom.body_axis(att)), kr, ff.omega_r,
                ff.gamma_dot / ff.gamma,
            )
            wb_ref, _ = ctrl.clamp_body_rates(att, w, GAINS.omega_max)
            fa_bar = apparent_force_aero(EST, att, v, sample.ar, xi, G)
            t_ref, _ = thrust_command(
                fa_bar, geom.unit(geom.body_axis(att)), c.t_min, c.t_max
            )
            assert thrust == pytest.approx(t_ref, rel=1e-9)
            assert all(abs(a - b) <= 1e-9 * (1 + abs(b)) for a, b in zip(wb, wb_ref))
            assert diag.f_dir_norm == pytest.approx(geom.norm(f_dir), rel=1e-12)

    def test_baseline_mode_uses_aero_force_for_direction(self):
        cfa = make_controller("fa")
        cfp = make_controller("fp")
        att = geom.rot_from_euler_zyx(0.0, math.radians(-80.0), 0.0)
        v = (0.6 * MACH, 0.0, 0.0)
        sample = ReferenceSample(vr=(0.7 * MACH, 0.0, 0.0))
        _, _, dfa = cfa.command(0.0, v, att, (0, 0, 0), sample)
        _, _, dfp = cfp.command(0.0, v, att, (0, 0, 0), sample)
        xi = velocity_feedback(GAINS, (0, 0, 0), geom.sub(v, sample.vr))
        fa_bar = apparent_force_aero(EST, att, v, sample.ar, xi, G)
        fp_bar = apparent_force_drag(EST, v, sample.ar, xi, G)
        assert dfa.f_dir_norm == pytest.approx(geom.norm(fa_bar), rel=1e-12)
        assert dfp.f_dir_norm == pytest.approx(geom.norm(fp_bar), rel=1e-12)
        assert dfa.f_dir_norm != pytest.approx(dfp.f_dir_norm, rel=1e-3)

    def test_perturbation_bound_is_algebraic(self):
        # |F| sin(theta) <= sqrt(8 V1) on any commanded state
        c = make_controller()
        rng = np.random.default_rng(15)
        for _ in range(200):
            att = geom.rot_exp(tuple(rng.uniform(-2, 2, 3)))
            v = tuple(rng.uniform(-250, 250, 3))
            sample = ReferenceSample(vr=tuple(rng.uniform(-200, 200, 3)))
            try:
                _, _, diag = c.command(0.0, v, att, (0, 0, 0), sample)
            except (SingularReference, AntipodalAttitude):
                continue
            lhs = diag.f_dir_norm * math.sin(diag.theta_tilde)
            rhs = math.sqrt(8.0 * diag.V1)
            assert lhs <= rhs * (1.0 + 1e-9)

    def test_alignment_energy_small_angle_stability(self):
        k = (0.0, 0.0, 1.0)
        theta = 1e-9
        kr = (math.sin(theta), 0.0, math.cos(theta))
        v1 = alignment_energy(2.0, k, kr)
        assert v1 == pytest.approx(0.5 * 4.0 * (theta / 2) ** 2, rel=1e-6)
