import math

import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose
from scipy.stats import ortho_group, special_ortho_group

from conftest import make_exp_state
from localent.core import MeasurementRegion, epsilon_joint
from localent.derivatives import fd_derivative
from localent.errors import DomainError, ValidationError
from localent.states import (ConfigPoint, GaussianPacketSpec, MultiIndex,
                             PlaneWaveSpec, coupled_oscillator_from_lengths,
                             coupled_oscillator_state, hydrogen_state)
from localent.transforms import (ComRelSplit, LocalTransform, SeparableSystem,
                                 com_rel_epsilon, com_rel_epsilon_general,
                                 orthogonal_pullback_epsilon,
                                 separable_epsilon, spherical_cartesian_jet)

TWO_BY_ONE = {
    ((2, 0), (0,)): "-1/2", ((0, 2), (0,)): "-1/3", ((0, 0), (2,)): "-2/5",
    ((1, 0), (1,)): "3/10", ((0, 1), (1,)): "-1/5", ((1, 1), (0,)): "1/10",
    ((1, 0), (0,)): "1/9",
}


class TestOrthogonalPullback:
    def test_identity_exact(self):
        st = make_exp_state(TWO_BY_ONE, dim_a=2, dim_b=1)
        pt = ConfigPoint([0.3, -0.2], [0.4])
        reg = MeasurementRegion(pt, [0.05, 0.07], [0.06])
        tr = LocalTransform("A", np.eye(2), reg.half_widths_a, reg.half_widths_a)
        assert orthogonal_pullback_epsilon(st, reg, tr) == epsilon_joint(st, reg)

    def test_rotation_30_degrees_cubic_widths(self):
        st = make_exp_state(TWO_BY_ONE, dim_a=2, dim_b=1)
        pt = ConfigPoint([0.3, -0.2], [0.4])
        a = 0.05
        reg = MeasurementRegion(pt, [a, a], [0.06])
        th = math.pi / 6.0
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        tr = LocalTransform("A", rot, reg.half_widths_a, reg.half_widths_a)
        eps0 = epsilon_joint(st, reg)
        assert_allclose(orthogonal_pullback_epsilon(st, reg, tr), eps0, rtol=1e-10)

    @pytest.mark.parametrize("party", ["A", "B"])
    def test_random_transforms_hydrogen(self, party, rng):
        st = hydrogen_state(1, 0, 0)
        pt = ConfigPoint([1.1, -0.5, 0.9], [0.2, 0.3, -0.1])
        reg = MeasurementRegion(pt, [0.05, 0.03, 0.07], [0.04, 0.06, 0.05])
        eps0 = epsilon_joint(st, reg)
        for k in range(6):
            o = ortho_group.rvs(3, random_state=100 + k)
            widths = rng.uniform(0.02, 0.1, 3)
            old = reg.half_widths_a if party == "A" else reg.half_widths_b
            tr = LocalTransform(party, o, old, widths)
            assert_allclose(orthogonal_pullback_epsilon(st, reg, tr), eps0, rtol=1e-9)

    def test_one_dimensional_sign_flip(self):
        st = coupled_oscillator_from_lengths(1, 3, 4.0, 2.0)
        pt = ConfigPoint([0.7], [-0.3])
        reg = MeasurementRegion(pt, [0.06], [0.09])
        tr = LocalTransform("A", np.array([[-1.0]]), reg.half_widths_a, [0.02])
        assert_allclose(orthogonal_pullback_epsilon(st, reg, tr),
                        epsilon_joint(st, reg), rtol=1e-11)

    def test_non_orthogonal_rejected(self):
        with pytest.raises(ValidationError):
            LocalTransform("A", np.array([[1.0, 0.1], [0.0, 1.0]]),
                           [0.1, 0.1], [0.1, 0.1])


class TestSeparableSystem:
    def test_unmixed_blocks_give_zero(self):
        t = np.eye(2)
        sys_ = SeparableSystem(1, 1, t, (lambda x: 0.7, lambda x: 1.3))
        eps = separable_epsilon(sys_, [0.1], [0.1], ConfigPoint([0.4], [0.2]))
        assert eps == 0.0

    def test_ho_normal_modes_match_direct(self):
        st = coupled_oscillator_state(0, 0, mass_a=1.4, mass_b=0.6,
                                      omega=0.8, coupling=0.5)
        mass_total, mu = 2.0, 1.4 * 0.6 / 2.0
        # mass-weighted normal coordinates: X1 = sqrt(M) R, X2 = sqrt(mu) r,
        # i.e. T_ik = sqrt(m_i) O_ik with O the mass-weighted eigenbasis
        t = np.array([[1.4 / math.sqrt(mass_total), math.sqrt(mu)],
                      [0.6 / math.sqrt(mass_total), -math.sqrt(mu)]])
        com_f = st.com_part.factors[0]
        rel_f = st.rel_part.factors[0]
        sys_ = SeparableSystem(
            1, 1, t,
            (lambda x: com_f.log_second_derivative(x / math.sqrt(mass_total)) / mass_total,
             lambda x: rel_f.log_second_derivative(x / math.sqrt(mu)) / mu))
        pt = ConfigPoint([0.8], [-0.5])
        eps_modes = separable_epsilon(sys_, [0.07], [0.12], pt)
        eps_direct = epsilon_joint(st, MeasurementRegion(pt, [0.07], [0.12]))
        assert_allclose(eps_modes, eps_direct, rtol=1e-10)

    def test_two_mode_ho_via_com_rel_columns(self):
        st = coupled_oscillator_from_lengths(1, 2, 4.0, 2.0)
        mass_total = 2.0
        # X1 = R, X2 = r directly
        t = np.array([[0.5, 1.0], [0.5, -1.0]])
        com_f = st.com_part.factors[0]
        rel_f = st.rel_part.factors[0]
        sys_ = SeparableSystem(1, 1, t, (com_f.log_second_derivative,
                                         rel_f.log_second_derivative))
        pt = ConfigPoint([1.1], [0.3])
        eps_modes = separable_epsilon(sys_, [0.04], [0.09], pt)
        eps_direct = epsilon_joint(st, MeasurementRegion(pt, [0.04], [0.09]))
        assert_allclose(eps_modes, eps_direct, rtol=1e-10)


class TestComRel:
    def test_plane_wave_com_contributes_nothing(self):
        base = hydrogen_state(1, 0, 0, com=None)
        moving = hydrogen_state(1, 0, 0, com=PlaneWaveSpec((0.7, -0.2, 1.1)))
        pt = ConfigPoint([1.5, 0.2, -0.3], [0.1, -0.2, 0.4])
        reg = MeasurementRegion(pt, [0.05] * 3, [0.05] * 3)
        assert_allclose(epsilon_joint(moving, reg), epsilon_joint(base, reg),
                        rtol=1e-12)

    def test_gaussian_packet_term(self):
        # COM log-Hessian is exactly (2/R0^2) delta_ij inside the modulus
        mass_a, mass_b, width = 1.0, 2.5, 3.0
        st = hydrogen_state(1, 0, 0, com=GaussianPacketSpec(width=width),
                            mass_a=mass_a, mass_b=mass_b)
        mu = mass_a * mass_b / (mass_a + mass_b)
        rel = np.array([2.0, 0.0, 0.0])
        split = ComRelSplit.from_state(st)
        s_chi = np.asarray(split.com_log_hessian(np.zeros(3)))
        assert_allclose(s_chi, (2.0 / width ** 2) * np.eye(3), rtol=1e-12)
        s_phi = np.asarray(split.rel_log_hessian(rel))
        shift = mu ** 2 / (mass_a * mass_b) * s_chi
        expect = float(np.sum(np.abs(s_phi - shift) ** 2)) * (0.05 * 0.05) ** 2 / 9.0
        pt = st.point_from_com_rel(np.zeros(3), rel)
        reg = MeasurementRegion(pt, [0.05] * 3, [0.05] * 3)
        assert_allclose(epsilon_joint(st, reg), expect, rtol=1e-9)

    def test_three_path_equality(self, rng):
        st = coupled_oscillator_state(1, 2, mass_a=1.2, mass_b=0.9,
                                      omega=0.7, coupling=0.3)
        split = ComRelSplit.from_state(st)
        for _ in range(5):
            pt = ConfigPoint(rng.uniform(-1.5, 1.5, 1), rng.uniform(-1.5, 1.5, 1))
            if abs(st.evaluate(pt)) < 1e-3:
                continue
            reg = MeasurementRegion(pt, [0.06], [0.04])
            direct = epsilon_joint(st, reg)
            via_split = com_rel_epsilon(split, [0.06], [0.04], pt)
            via_general = com_rel_epsilon_general(st, reg)
            assert_allclose(via_split, direct, rtol=1e-9)
            assert_allclose(via_general, direct, rtol=1e-9)

    def test_hydrogen_com_closed_form(self):
        mass_a, mass_b, width = 1.0, 1836.15267343, 5.0
        st = hydrogen_state(1, 0, 0, com=GaussianPacketSpec(width=width),
                            mass_a=mass_a, mass_b=mass_b)
        a = b = 0.04
        r = 3.0
        mass_total = mass_a + mass_b
        pt = st.point_from_com_rel(np.zeros(3), [r, 0.0, 0.0])
        eps = epsilon_joint(st, MeasurementRegion(pt, [a] * 3, [b] * 3))
        expect = (2.0 * a * a * b * b / (9.0 * width ** 4 * mass_total ** 4 * r * r)
                  * (width ** 4 * mass_total ** 4
                     - 4.0 * width ** 2 * mass_a * mass_b * mass_total ** 2 * r
                     + 6.0 * mass_a ** 2 * mass_b ** 2 * r * r))
        assert_allclose(eps, expect, rtol=1e-11)


class TestSphericalChain:
    @staticmethod
    def spherical_jet(expr, symbols, at):
        r, th, ph = symbols
        jet = {}
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    if a + b + c <= 2:
                        fn = sp.lambdify((r, th, ph), sp.diff(expr, r, a, th, b, ph, c))
                        jet[(a, b, c)] = complex(fn(*at))
        return jet

    def test_radial_function_z_derivative_near_axis(self):
        r, th, ph = sp.symbols("r th ph", positive=True)
        jet = self.spherical_jet(sp.exp(-r), (r, th, ph), (2.0, 1e-6, 0.3))
        cart = spherical_cartesian_jet(jet, 2.0, 1e-6, 0.3)
        assert_allclose(cart[(0, 0, 1)], -math.exp(-2.0), rtol=1e-9)

    def test_210_equator_only_theta_term(self):
        # phi_210 ~ r cos(theta) exp(-r/2): at theta = pi/2 the radial part of
        # d/dz vanishes, leaving -sin(theta)/r * d/dtheta
        r, th, ph = sp.symbols("r th ph", positive=True)
        expr = r * sp.cos(th) * sp.exp(-r / 2)
        at = (2.5, math.pi / 2.0, 0.7)
        jet = self.spherical_jet(expr, (r, th, ph), at)
        cart = spherical_cartesian_jet(jet, *at)
        expect = -(1.0 / at[0]) * jet[(0, 1, 0)]
        assert_allclose(cart[(0, 0, 1)], expect, rtol=1e-12)
        assert_allclose(cart[(0, 0, 1)], math.exp(-at[0] / 2.0), rtol=1e-12)

    def test_full_hessian_matches_finite_differences(self):
        from localent.states import UserState
        r, th, ph = sp.symbols("r th ph", positive=True)
        at = (2.0, 1.0, 0.5)
        jet = self.spherical_jet(sp.exp(-r) / sp.sqrt(sp.pi), (r, th, ph), at)
        cart = spherical_cartesian_jet(jet, *at)
        xyz = (at[0] * math.sin(at[1]) * math.cos(at[2]),
               at[0] * math.sin(at[1]) * math.sin(at[2]),
               at[0] * math.cos(at[1]))

        def amp(qa, qb):
            rr = np.sqrt(np.sum(np.square(qa), axis=-1))
            return np.exp(-rr) / math.sqrt(math.pi) + 0.0 * qb[..., 0]

        st = UserState(amp, 3, 1, use_finite_differences=True)
        for key in [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)]:
            fd = fd_derivative(st, ConfigPoint(xyz, [0.0]), MultiIndex(key, (0,)))
            assert abs(cart[key] - fd) <= 1e-7 * max(abs(fd), 1e-4)

    def test_origin_and_pole_excluded(self):
        jet = {(a, b, c): 0.0 for a in range(3) for b in range(3) for c in range(3)
               if a + b + c <= 2}
        with pytest.raises(DomainError):
            spherical_cartesian_jet(jet, 1e-10, 1.0, 0.0)
        with pytest.raises(DomainError):
            spherical_cartesian_jet(jet, 1.0, 1e-10, 0.0)


class TestRegionAttribution:
    def test_widths_refer_to_original_coordinates(self):
        # the split path consumes the original (a_i, b_j): rescaling them
        # rescales eps exactly as the direct path does
        st = coupled_oscillator_from_lengths(0, 0, 4.0, 2.0)
        split = ComRelSplit.from_state(st)
        pt = ConfigPoint([0.4], [0.1])
        base = com_rel_epsilon(split, [0.05], [0.05], pt)
        assert_allclose(com_rel_epsilon(split, [0.10], [0.05], pt), 4.0 * base,
                        rtol=1e-14)
