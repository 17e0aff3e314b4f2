import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import brentq

from localent.core import MeasurementRegion, Validity, binary_entropy, epsilon_joint, report
from localent.errors import DomainError, UnsupportedOrderError, ValidationError
from localent.states import ConfigPoint, MultiIndex
from localent.wkb import (CustomPotential, HarmonicPotential, MorsePotential,
                          TabulatedPotential, TanhWellPotential, WkbProblem,
                          action_integral, bohr_sommerfeld_energy,
                          classical_momentum, node_count, normalization, phase,
                          turning_point_exclusion, turning_points,
                          wkb_concurrence, wkb_state, wkb_wavefunction,
                          wkb_wavefunction_derivs)


def harmonic_problem(level, mass=1.0, omega=1.0):
    pot = HarmonicPotential.from_omega(omega, mass)
    energy = (level + 0.5) * omega
    span = 2.0 * math.sqrt(2.0 * energy / (mass * omega * omega))
    return WkbProblem(pot, energy, mass, 1.0, (-span, span))


class TestMomentumAndTurningPoints:
    def test_harmonic_ground(self):
        pr = harmonic_problem(0)
        r1, r2 = turning_points(pr)
        assert_allclose((r1, r2), (-1.0, 1.0), atol=1e-10)
        assert_allclose(classical_momentum(pr, 0.0), 1.0, rtol=1e-14)
        assert classical_momentum(pr, 1.0) < 1e-6

    def test_flat_bottom_momentum_constant(self):
        pot = TanhWellPotential(depth=10.0, half_width=6.0, steepness=0.3)
        pr = WkbProblem(pot, -5.0, 2.0, 1.0, (-20.0, 20.0))
        p_center = classical_momentum(pr, 0.0)
        assert abs(classical_momentum(pr, 1.0) - p_center) < 1e-8 * p_center

    def test_tanh_walls_near_half_width(self):
        pot = TanhWellPotential(depth=10.0, half_width=6.0, steepness=0.3)
        pr = WkbProblem(pot, -5.0, 2.0, 1.0, (-20.0, 20.0))
        r1, r2 = turning_points(pr)
        assert abs(r1 + 6.0) < 0.5 and abs(r2 - 6.0) < 0.5
        # dense-scan oracle agrees with the bisection result
        grid = np.linspace(5.0, 7.0, 20001)
        diff = pr.energy - pot.value(grid)
        k = np.argmin(np.abs(diff))
        assert abs(grid[k] - r2) < 2e-4

    def test_tabulated_matches_source(self):
        src = TanhWellPotential(depth=8.0, half_width=4.0, steepness=0.5)
        grid = np.linspace(-15.0, 15.0, 1200)
        tab = TabulatedPotential(grid, src.value(grid))
        pr_src = WkbProblem(src, -4.0, 1.0, 1.0, (-12.0, 12.0))
        pr_tab = WkbProblem(tab, -4.0, 1.0, 1.0, (-12.0, 12.0))
        assert_allclose(turning_points(pr_tab), turning_points(pr_src), atol=1e-6)

    def test_energy_below_minimum_rejected(self):
        pr = WkbProblem(HarmonicPotential(1.0), -0.5, 1.0, 1.0, (-4.0, 4.0))
        with pytest.raises(ValidationError):
            turning_points(pr)


class TestActionIntegral:
    def test_harmonic_half_quantum(self):
        pr = harmonic_problem(0)
        r1, r2 = turning_points(pr)
        assert_allclose(action_integral(pr, r1, r2, singular="both"),
                        math.pi / 2.0, rtol=1e-10)

    def test_empty_interval(self):
        pr = harmonic_problem(0)
        _, r2 = turning_points(pr)
        assert action_integral(pr, r2, r2) == 0.0

    def test_linear_well_closed_form(self):
        slope, mass, energy = 0.8, 1.3, 2.0
        pot = CustomPotential(lambda r: slope * np.abs(r),
                              lambda r: slope * np.sign(r),
                              lambda r: np.zeros_like(np.asarray(r, dtype=float)))
        pr = WkbProblem(pot, energy, mass, 1.0, (-5.0, 5.0))
        r1, r2 = turning_points(pr)
        assert_allclose(r2, energy / slope, rtol=1e-10)
        for r in (0.5, 1.2, 2.0):
            expect = (2.0 / 3.0) * math.sqrt(2.0 * mass) * (energy - slope * r) ** 1.5 / slope
            assert_allclose(action_integral(pr, r, r2, singular="hi"), expect,
                            rtol=1e-9)

    def test_bohr_sommerfeld_recovers_harmonic_levels(self):
        pot = HarmonicPotential.from_omega(1.0, 1.0)
        for n in (0, 3, 10):
            e = bohr_sommerfeld_energy(pot, 1.0, n, bracket=(0.1, 20.0),
                                       domain=(-30.0, 30.0))
            assert_allclose(e, n + 0.5, rtol=1e-9)


class TestWavefunction:
    def test_phase_at_outer_turning_point(self):
        pr = harmonic_problem(400)
        _, r2 = turning_points(pr)
        assert_allclose(phase(pr, r2), math.pi / 4.0, rtol=1e-12)

    def test_node_count_matches_level(self):
        for n in (0, 3, 25):
            assert node_count(harmonic_problem(n)) == n

    def test_exclusion_zone_enforced(self):
        pr = harmonic_problem(400)
        r1, r2 = turning_points(pr)
        with pytest.raises(DomainError):
            wkb_wavefunction(pr, r2 - 0.5 * turning_point_exclusion(pr, r2))

    def test_deep_forbidden_tail_monotone(self):
        pr = harmonic_problem(400)
        _, r2 = turning_points(pr)
        rs = r2 + turning_point_exclusion(pr, r2) + np.array([1.0, 2.0, 4.0, 6.0])
        vals = [abs(wkb_wavefunction(pr, r)[0]) for r in rs]
        assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
        assert wkb_wavefunction(pr, rs[0])[1] == 3

    def test_nodes_sit_at_quantized_phase(self):
        pr = harmonic_problem(400)
        r1, r2 = turning_points(pr)
        lo = r1 + 1.5 * turning_point_exclusion(pr, r1)
        hi = r2 - 1.5 * turning_point_exclusion(pr, r2)
        k_vals = sorted({int(round(phase(pr, r) / math.pi))
                         for r in np.linspace(lo + 0.3, hi - 0.3, 7)})
        for k in k_vals[:4]:
            node = brentq(lambda r: phase(pr, r) - k * math.pi, lo, hi, xtol=1e-12)
            amp_node = abs(wkb_wavefunction(pr, node)[0])
            amp_near = abs(wkb_wavefunction(pr, node + 0.02)[0])
            assert amp_node < 1e-7 * amp_near

    def test_region1_sign_prefactor(self):
        # odd level: (-1)^n flips the inner-tail sign relative to even levels
        pr_even = harmonic_problem(400)
        pr_odd = harmonic_problem(401)
        r1e, _ = turning_points(pr_even)
        r1o, _ = turning_points(pr_odd)
        d_e = 1.2 * turning_point_exclusion(pr_even, r1e)
        d_o = 1.2 * turning_point_exclusion(pr_odd, r1o)
        ve = wkb_wavefunction(pr_even, r1e - d_e)[0]
        vo = wkb_wavefunction(pr_odd, r1o - d_o)[0]
        assert ve > 0 > vo


class TestConcurrence:
    def test_matches_generic_path(self):
        pr = harmonic_problem(400)
        st = wkb_state(pr)
        a, b = 0.01, 0.015
        for r in (3.3, 11.07, 20.2):
            c_formula = wkb_concurrence(pr, r, a, b)
            pt = st.point_from_com_rel([0.0], [r])
            eps = epsilon_joint(st, MeasurementRegion(pt, [a], [b]))
            assert_allclose(c_formula, 2.0 * math.sqrt(eps), rtol=1e-6)

    def test_flat_bottom_nonzero_despite_no_force(self):
        pot = TanhWellPotential(depth=400.0, half_width=6.0, steepness=0.25)
        pr = WkbProblem(pot, -200.0, 50.0, 1.0, (-15.0, 15.0))
        p0 = classical_momentum(pr, 0.0)
        th = phase(pr, 0.0)
        c2 = wkb_concurrence(pr, 0.0, 0.05, 0.05)
        expect = (0.05 * 0.05 / 3.0) * 2.0 / math.sin(th) ** 2 * p0 * p0
        assert c2 > 0
        assert_allclose(c2, expect, rtol=1e-4)

    def test_constant_potential_region3_zero(self):
        pot = TanhWellPotential(depth=10.0, half_width=4.0, steepness=0.25)
        pr = WkbProblem(pot, -5.0, 20.0, 1.0, (-15.0, 15.0))
        _, r2 = turning_points(pr)
        assert wkb_concurrence(pr, r2 + 8.0, 0.05, 0.05) < 1e-12

    def test_mirror_symmetry(self):
        pot = TanhWellPotential(depth=10.0, half_width=4.0, steepness=0.25)
        pr = WkbProblem(pot, -5.0, 20.0, 1.0, (-15.0, 15.0))
        r1, r2 = turning_points(pr)
        d = 1.8
        assert_allclose(wkb_concurrence(pr, r1 - d, 0.05, 0.05),
                        wkb_concurrence(pr, r2 + d, 0.05, 0.05), rtol=1e-9)

    def test_divergence_exponent_at_node(self):
        pr = harmonic_problem(400)
        r1, r2 = turning_points(pr)
        lo = r1 + 1.5 * turning_point_exclusion(pr, r1)
        hi = r2 - 1.5 * turning_point_exclusion(pr, r2)
        k = int(round(phase(pr, 0.5 * (lo + hi)) / math.pi))
        node = brentq(lambda r: phase(pr, r) - k * math.pi, lo, hi, xtol=1e-13)
        ds = node + np.geomspace(1e-4, 1e-2, 6)
        cs = [wkb_concurrence(pr, r, 0.01, 0.01) for r in ds]
        slope = np.polyfit(np.log(ds - node), np.log(cs), 1)[0]
        assert abs(slope + 2.0) < 0.1

    def test_capped_report_near_node(self):
        pr = harmonic_problem(400)
        st = wkb_state(pr)
        r1, r2 = turning_points(pr)
        lo = r1 + 1.5 * turning_point_exclusion(pr, r1)
        hi = r2 - 1.5 * turning_point_exclusion(pr, r2)
        k = int(round(phase(pr, 0.5 * (lo + hi)) / math.pi))
        node = brentq(lambda r: phase(pr, r) - k * math.pi, lo, hi, xtol=1e-13)
        pt = st.point_from_com_rel([0.0], [node + 1e-5])
        rep = report(st, MeasurementRegion(pt, [0.01], [0.01]), sigma=0.1,
                     compute_lambda3=False)
        assert rep.validity is Validity.NEAR_NODE_CUTOFF
        assert rep.entropy_d <= binary_entropy(0.1 ** 4 / 9.0) * (1.0 + 1e-12)

    def test_morse_concurrence_consistency(self):
        pot = MorsePotential(depth=300.0, alpha=0.5, r_e=4.0)
        pr = WkbProblem(pot, 150.0, 30.0, 1.0, (0.5, 40.0))
        st = wkb_state(pr)
        r1, r2 = turning_points(pr)
        r = 4.6
        assert r1 + turning_point_exclusion(pr, r1) < r < r2 - turning_point_exclusion(pr, r2)
        assert abs(math.sin(phase(pr, r))) > 0.2
        for rr in (r, r2 + 1.5):  # allowed region and forbidden tail
            c_formula = wkb_concurrence(pr, rr, 0.01, 0.01)
            pt = st.point_from_com_rel([0.0], [rr])
            eps = epsilon_joint(st, MeasurementRegion(pt, [0.01], [0.01]))
            assert_allclose(c_formula, 2.0 * math.sqrt(eps), rtol=1e-6)


class TestWrappedState:
    def test_derivative_order_limit(self):
        pr = harmonic_problem(400)
        st = wkb_state(pr)
        pt = st.point_from_com_rel([0.0], [3.3])
        with pytest.raises(UnsupportedOrderError):
            st.derivative(pt, MultiIndex((2,), (1,)))

    def test_derivs_match_finite_differences(self):
        # d2 by central differences is limited by the quadrature noise in the
        # phase integral, so it only certifies the leading digits
        pr = harmonic_problem(400)
        r = 7.7
        phi, d1, d2 = wkb_wavefunction_derivs(pr, r)
        h = 1e-5
        fm, f0, fp = (wkb_wavefunction(pr, r + s)[0] for s in (-h, 0.0, h))
        assert_allclose(d1, (fp - fm) / (2 * h), rtol=1e-7)
        assert_allclose(d2, (fp - 2 * f0 + fm) / (h * h), rtol=5e-3)

    def test_region2_curvature_identity(self):
        # exact identity: phi''/phi = 3/4 (p'/p)^2 - p''/(2p) - p^2/hbar^2
        pr = harmonic_problem(400)
        for r in (3.3, 7.7, 20.2):
            phi, d1, d2 = wkb_wavefunction_derivs(pr, r)
            p = classical_momentum(pr, r)
            vp = float(pr.potential.deriv(r))
            vpp = float(pr.potential.deriv2(r))
            p1 = -pr.mass * vp / p
            p2 = -pr.mass * vpp / p - (pr.mass * vp) ** 2 / p ** 3
            expect = 0.75 * (p1 / p) ** 2 - 0.5 * p2 / p - p * p
            # csc^2 cancellation near nodes costs a few digits
            assert_allclose(d2 / phi, expect, rtol=1e-9)

    def test_mass_consistency_enforced(self):
        pr = harmonic_problem(4)
        with pytest.raises(ValidationError):
            wkb_state(pr, 1.0, 1.0)
