import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvlab.control import (
    ControlledStabilityReport,
    characteristic_cubic,
    classify_controlled,
    controlled_equilibrium,
    simulate_controlled,
)
from hvlab.equilibrium import classify_local, interior_equilibrium
from hvlab.exceptions import NoEquilibriumError, ParameterError
from hvlab.integrator import IntegratorConfig
from hvlab.model import ControlParams, Params, extended_vector_field

from conftest import CONTROL, CYCLE, STABLE

OFF = ControlParams(b=0.0, b1=0.3, b2=0.2, b3=0.7)


class TestEquilibrium:
    def test_oracle(self):
        eq = controlled_equilibrium(CYCLE, CONTROL)
        # mpmath findroot, 30 digits
        want = (0.185647757191183209239213033613, 0.887418864777029293931999175069,
                0.333111571589658316511662492997)
        np.testing.assert_allclose(eq, want, rtol=1e-12)
        assert max(abs(v) for v in extended_vector_field(CYCLE, CONTROL, eq)) < 1e-12

    def test_shifts_away_from_uncontrolled(self):
        eq = controlled_equilibrium(CYCLE, CONTROL)
        assert abs(eq.x - interior_equilibrium(CYCLE).x) > 1e-3

    def test_decoupled(self):
        eq = controlled_equilibrium(CYCLE, OFF)
        xs, ys = interior_equilibrium(CYCLE)
        assert eq.x == pytest.approx(xs, abs=1e-14)
        assert eq.y == pytest.approx(ys, rel=1e-13)
        assert eq.xi == pytest.approx((OFF.b1 * xs + OFF.b2 * ys) / OFF.b3, rel=1e-13)

    def test_no_positive_equilibrium(self):
        # the shift x* = e/d - a + b xi leaves (0, 1)
        with pytest.raises(NoEquilibriumError):
            controlled_equilibrium(CYCLE, ControlParams(b=50.0, b1=1.0, b2=1.0, b3=0.1))


class TestClassification:
    def test_control_stabilises(self):
        t0 = time.perf_counter()
        on = classify_controlled(CYCLE, CONTROL)
        off = classify_controlled(CYCLE, OFF)
        assert time.perf_counter() - t0 < 1.0
        assert on.stable and not off.stable
        assert classify_local(CYCLE).P1 > 0

    def test_decoupled_spectrum(self):
        off = classify_controlled(CYCLE, OFF)
        want = sorted(list(classify_local(CYCLE).eigenvalues) + [complex(-OFF.b3)], key=lambda z: (z.real, z.imag))
        got = sorted(off.eigenvalues, key=lambda z: (z.real, z.imag))
        for g, w in zip(got, want):
            assert abs(g - w) < 1e-10

    def test_cubic_matches_numpy(self):
        rep = classify_controlled(CYCLE, CONTROL)
        np.testing.assert_allclose(characteristic_cubic(rep.jacobian3), np.poly(rep.jacobian3), atol=1e-13)

    def test_nonlinear_slope(self):
        rep = classify_controlled(CYCLE, CONTROL, phi_slope=2.0)
        np.testing.assert_allclose(rep.jacobian3[2], 2.0 * np.array([0.3, 0.2, -0.7]))
        with pytest.raises(ParameterError):
            classify_controlled(CYCLE, CONTROL, phi_slope=0.0)

    def test_json_round_trip(self):
        rep = classify_controlled(CYCLE, CONTROL)
        back = ControlledStabilityReport.from_dict(json.loads(json.dumps(rep.to_dict())))
        assert back.eigenvalues == rep.eigenvalues and back.stable == rep.stable
        np.testing.assert_array_equal(back.jacobian3, rep.jacobian3)

    def test_report_rejects_inconsistent_flag(self):
        rep = classify_controlled(CYCLE, CONTROL)
        with pytest.raises(ParameterError):
            ControlledStabilityReport(rep.equilibrium, rep.jacobian3, rep.eigenvalues, False, rep.char_poly, rep.sigma)

    @settings(max_examples=50, deadline=None)
    @given(b=st.floats(0.0, 0.5), b1=st.floats(0.0, 1.0), b2=st.floats(0.0, 1.0), b3=st.floats(0.2, 2.0),
           which=st.sampled_from([STABLE, CYCLE]))
    def test_invariants(self, b, b1, b2, b3, which):
        cp = ControlParams(b=b, b1=b1, b2=b2, b3=b3)
        try:
            rep = classify_controlled(which, cp)
        except NoEquilibriumError:
            return
        coeffs = np.array(rep.char_poly)
        for lam in rep.eigenvalues:
            assert abs(np.polyval(coeffs, lam)) < 1e-10 * max(1.0, np.abs(coeffs).max())
        assert abs(rep.sigma) <= 1e-12


class TestTimeDomain:
    def test_controlled_returns(self):
        rep = classify_controlled(CYCLE, CONTROL)
        eq = np.array(rep.equilibrium)
        traj = simulate_controlled(CYCLE, CONTROL, eq * [1.05, 0.95, 1.0], IntegratorConfig(t_end=500.0))
        assert traj.completed
        assert np.linalg.norm(traj.final_state - eq) < 1e-4
        x, y, xi = traj.final_state
        assert abs(CONTROL.b1 * x + CONTROL.b2 * y - CONTROL.b3 * xi) < 1e-4

    def test_uncontrolled_departs(self):
        rep = classify_controlled(CYCLE, OFF)
        eq = np.array(rep.equilibrium)
        traj = simulate_controlled(CYCLE, OFF, eq * [1.05, 0.95, 1.0], IntegratorConfig(t_end=1000.0))
        dist = np.linalg.norm(traj.states[:, :2] - eq[:2], axis=1)
        assert dist[-len(dist) // 4 :].max() > 10 * dist[0]

    def test_tanh_characteristic(self):
        rep = classify_controlled(CYCLE, CONTROL)
        eq = np.array(rep.equilibrium)
        traj = simulate_controlled(CYCLE, CONTROL, eq * [1.05, 0.95, 1.0], IntegratorConfig(t_end=500.0), phi=np.tanh)
        assert np.linalg.norm(traj.final_state - eq) < 1e-4
