import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvlab.equilibrium import interior_equilibrium
from hvlab.exceptions import DomainError, ParameterError
from hvlab.integrator import integrate_fixed
from hvlab.model import (
    ControlParams,
    DimensionalParams,
    Params,
    check_admissible,
    dimensional_vector_field,
    extended_jacobian,
    extended_vector_field,
    jacobian,
    make_rhs,
    nondimensionalize,
    vector_field,
)

from conftest import central_diff_jacobian

pos = st.floats(min_value=0.05, max_value=3.0)
expo = st.floats(min_value=0.0, max_value=1.0)
params_st = st.builds(Params, m=pos, c=pos, d=pos, e=pos, a=pos, p=expo)
interior = st.floats(min_value=0.02, max_value=2.0)


class TestNondimensionalize:
    def test_unit_scales(self):
        dp = DimensionalParams(R=1, K=1, M=1, C=1, D=1, E=1, A=1, p=0.5)
        assert nondimensionalize(dp) == Params(m=1, c=1, d=1, e=1, a=1, p=0.5)

    def test_unit_capacity(self):
        dp = DimensionalParams(R=2, K=1, M=2.4, C=0.3, D=0.8, E=0.5, A=0.2, p=0.7)
        got = nondimensionalize(dp)
        for name, want in dict(m=1.2, c=0.3, d=0.4, e=0.25, a=0.2, p=0.7).items():
            assert getattr(got, name) == pytest.approx(want, rel=1e-15)

    def test_capacity_four(self):
        dp = DimensionalParams(R=1, K=4, M=1, C=1, D=1, E=1, A=1, p=0.5)
        got = nondimensionalize(dp)
        assert (got.m, got.c, got.d, got.e, got.a) == pytest.approx((2.0, 0.5, 4.0, 1.0, 0.25), rel=1e-15)

    @pytest.mark.parametrize("bad", [dict(R=0), dict(K=-1), dict(p=1.5), dict(p=-0.1), dict(A=float("nan"))])
    def test_rejects_invalid(self, bad):
        base = dict(R=1, K=1, M=1, C=1, D=1, E=1, A=1, p=0.5)
        base.update(bad)
        with pytest.raises(ParameterError):
            DimensionalParams(**base)

    @settings(max_examples=60, deadline=None)
    @given(
        R=pos, K=st.floats(0.2, 5.0), M=pos, C=pos, D=pos, E=pos, A=pos, p=expo,
        X=st.floats(0.01, 5.0), Y=st.floats(0.01, 5.0),
    )
    def test_rescaled_field_matches_dimensional(self, R, K, M, C, D, E, A, p, X, Y):
        dp = DimensionalParams(R, K, M, C, D, E, A, p)
        dX, dY = dimensional_vector_field(dp, X, Y)
        dx, dy = vector_field(nondimensionalize(dp), (X / K, Y / K))
        assert R * K * dx == pytest.approx(dX, rel=1e-12, abs=1e-12 * (abs(R * X) + abs(M * X * Y) + 1e-300))
        assert R * K * dy == pytest.approx(dY, rel=1e-12, abs=1e-12 * (D + E / A) * Y * Y)


class TestVectorField:
    def test_prey_axis(self, stable):
        dx, dy = vector_field(stable, (0.0, 0.7))
        assert dx == 0.0
        assert dy == (stable.d - stable.e / stable.a) * 0.49

    def test_zero_at_equilibrium(self, stable):
        dx, dy = vector_field(stable, interior_equilibrium(stable))
        assert abs(dx) < 1e-15 and abs(dy) < 1e-15

    def test_reference_point(self, stable):
        # mpmath, 30 digits
        dx, dy = vector_field(stable, (0.5, 0.5))
        assert dx == pytest.approx(-0.077663943721397450462689071148, rel=1e-14)
        assert dy == pytest.approx(0.0107142857142857142857142857143, rel=1e-14)

    def test_matches_integral_form_derivative(self, stable):
        # central difference of the flow through (0.5, 0.5)
        f = make_rhs(stable)
        h = 1e-4
        fwd = integrate_fixed(f, (0.5, 0.5), h, 4)
        bwd = integrate_fixed(lambda t, s: -f(t, s), (0.5, 0.5), h, 4)
        fd = (fwd - bwd) / (2 * h)
        np.testing.assert_allclose(fd, vector_field(stable, (0.5, 0.5)), rtol=1e-7)

    def test_p_zero_at_origin(self):
        params = Params(m=1, c=0.5, d=1, e=0.5, a=0.2, p=0.0)
        # x^0 taken as 1 at x = 0
        assert vector_field(params, (0.0, 0.3))[0] == 0.0
        dx, _ = vector_field(params, (1e-300, 0.3))
        assert math.isfinite(dx)

    def test_rejects_negative(self, stable):
        with pytest.raises(DomainError):
            vector_field(stable, (-0.1, 0.2))

    @settings(max_examples=50, deadline=None)
    @given(params=params_st, x=interior, y=interior, k=st.floats(0.1, 10.0))
    def test_predator_rate_quadratic_in_y(self, params, x, y, k):
        _, dy1 = vector_field(params, (x, y))
        _, dyk = vector_field(params, (x, k * y))
        assert dyk == pytest.approx(k * k * dy1, rel=1e-12, abs=1e-300)


class TestJacobian:
    def test_equilibrium_entries(self, stable):
        xs, ys = interior_equilibrium(stable)
        J = jacobian(stable, (xs, ys))
        m, c, d, e, p = stable.m, stable.c, stable.d, stable.e, stable.p
        assert J[1, 1] == pytest.approx(0.0, abs=1e-16)
        assert J[0, 0] == pytest.approx(m * p * xs**p * ys / (xs**p + c) ** 2 - xs, rel=1e-12)
        assert J[0, 1] == pytest.approx(-m * xs / (xs**p + c), rel=1e-14)
        assert J[1, 0] == pytest.approx(d * d * ys * ys / e, rel=1e-12)
        assert J[0, 0] < 0

    def test_rejects_nonpositive_x(self, stable):
        with pytest.raises(DomainError):
            jacobian(stable, (0.0, 0.5))

    @settings(max_examples=100, deadline=None)
    @given(params=params_st, x=interior, y=interior)
    def test_matches_finite_differences(self, params, x, y):
        J = jacobian(params, (x, y))
        fd = central_diff_jacobian(lambda s: vector_field(params, s), (x, y))
        scale = np.max(np.abs(J)) + 1e-12
        assert np.max(np.abs(J - fd)) / scale < 1e-6


class TestExtended:
    @settings(max_examples=50, deadline=None)
    @given(params=params_st, x=interior, y=interior, xi=st.floats(-2, 2),
           b1=st.floats(0, 2), b2=st.floats(0, 2), b3=st.floats(0.1, 2))
    def test_no_coupling_reduces_to_plain_field(self, params, x, y, xi, b1, b2, b3):
        cp = ControlParams(b=0.0, b1=b1, b2=b2, b3=b3)
        ext = extended_vector_field(params, cp, (x, y, xi))
        assert ext[:2] == vector_field(params, (x, y))

    def test_sigma_zero_gives_zero_control_rate(self, stable):
        cp = ControlParams(b=0.3, b1=0.3, b2=0.2, b3=0.7)
        xi = (0.3 * 0.4 + 0.2 * 0.6) / 0.7
        for phi in (lambda s: s, np.tanh, lambda s: s**3):
            assert extended_vector_field(stable, cp, (0.4, 0.6, xi), phi)[2] == pytest.approx(0.0, abs=1e-16)

    def test_domain_violation(self, stable):
        cp = ControlParams(b=1.0, b1=0, b2=0, b3=1)
        with pytest.raises(DomainError):
            extended_vector_field(stable, cp, (0.1, 0.5, 1.0))

    @settings(max_examples=100, deadline=None)
    @given(params=params_st, x=interior, y=interior, xi=st.floats(-1, 1),
           b=st.floats(0, 0.5), b1=st.floats(0, 2), b2=st.floats(0, 2), b3=st.floats(0.1, 2))
    def test_jacobian_matches_finite_differences(self, params, x, y, xi, b, b1, b2, b3):
        cp = ControlParams(b=b, b1=b1, b2=b2, b3=b3)
        if x + params.a - b * xi <= 0.05:
            return
        J = extended_jacobian(params, cp, (x, y, xi))
        fd = central_diff_jacobian(lambda s: extended_vector_field(params, cp, s), (x, y, xi))
        scale = np.max(np.abs(J)) + 1e-12
        assert np.max(np.abs(J - fd)) / scale < 1e-6

    def test_control_params_validation(self):
        with pytest.raises(ParameterError):
            ControlParams(b=-0.1, b1=0, b2=0, b3=1)
        with pytest.raises(ParameterError):
            ControlParams(b=0.1, b1=0, b2=0, b3=0)


class TestAdmissibility:
    grid = np.linspace(-10, 10, 201)

    def test_identity(self):
        rep = check_admissible(lambda s: s, self.grid)
        assert rep.continuous and rep.zero_at_origin and rep.sign_preserving and rep.divergent
        assert rep.admissible
        assert rep.divergence_verdict == "heuristic"

    def test_square_fails_sign(self):
        rep = check_admissible(lambda s: s * s, self.grid)
        assert rep.zero_at_origin
        assert not rep.sign_preserving
        assert not rep.admissible

    def test_tanh(self):
        rep = check_admissible(np.tanh, self.grid)
        assert rep.continuous and rep.zero_at_origin and rep.sign_preserving
        # integral of tanh grows like |sigma|, so the proxy passes
        assert rep.divergent

    def test_saturating_integral_flagged(self):
        rep = check_admissible(lambda s: s * math.exp(-s * s), self.grid)
        assert rep.sign_preserving
        assert not rep.divergent

    def test_offset_fails_origin(self):
        rep = check_admissible(lambda s: s + 0.1, self.grid)
        assert not rep.zero_at_origin

    def test_grid_must_straddle_zero(self):
        with pytest.raises(ParameterError):
            check_admissible(lambda s: s, [0.0, 1.0, 2.0])
