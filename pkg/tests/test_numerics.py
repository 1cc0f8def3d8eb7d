import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bohmwell.errors import DensityFloor, MaxIterations, NoSignChange, StepUnderflow
from bohmwell.numerics import (
    Bracket,
    Tolerance,
    crossings,
    find_root,
    integrate_1d,
    integrate_ode,
)
from bohmwell.spectrum import WellGeometry, even_residual, scan_bracket, Parity

from oracles import REF, even_residual_np, scan_roots


class TestTypes:
    def test_tolerance_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Tolerance(abs_tol=0.0)
        with pytest.raises(ValueError):
            Tolerance(rel_tol=-1.0)
        with pytest.raises(ValueError):
            Tolerance(max_iterations=0)

    def test_bracket_order(self):
        with pytest.raises(ValueError):
            Bracket(1.0, 1.0)
        assert Bracket(0.0, 2.0).width == 2.0


class TestFindRoot:
    def test_quadratic(self):
        assert find_root(lambda x: x * x - 4.0, Bracket(0.0, 10.0)) == pytest.approx(2.0, abs=1e-13)

    def test_cosine(self):
        assert find_root(math.cos, (1.0, 2.0)) == pytest.approx(math.pi / 2, abs=1e-14)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root(lambda x: x * x + 1.0, (-1.0, 1.0))

    def test_budget(self):
        with pytest.raises(MaxIterations):
            find_root(lambda x: math.copysign(abs(x - 0.3) ** 0.1, x - 0.3), (0.0, 1.0), Tolerance(1e-300, 1e-300, 3))

    def test_deterministic(self):
        f = lambda x: math.exp(x) - 3.0  # noqa: E731
        first = find_root(f, (0.0, 2.0))
        assert all(find_root(f, (0.0, 2.0)) == first for _ in range(5))

    def test_even_residual_against_scan(self):
        geom = WellGeometry(**REF)
        oracle = scan_roots(even_residual_np, **REF)
        assert len(oracle) == 1
        E = find_root(lambda e: even_residual(e, geom), scan_bracket(Parity.EVEN, 1, geom))
        assert E == pytest.approx(oracle[0], abs=1e-11)

    @given(st.floats(-50, 50), st.floats(0.1, 10))
    @settings(max_examples=60, deadline=None)
    def test_result_inside_bracket(self, root, width):
        lo, hi = root - width, root + 0.5 * width
        x = find_root(lambda x: math.atan(x - root), (lo, hi))
        assert lo <= x <= hi
        assert abs(x - root) <= 1e-12 * max(1.0, abs(root))


class TestIntegrate1d:
    def test_linear(self):
        assert integrate_1d(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_sine(self):
        assert integrate_1d(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)

    def test_breakpoints_handle_kinks(self):
        f = lambda x: abs(x - 0.3) + (1.0 if x > 0.7 else 0.0)  # noqa: E731
        exact = (0.3**2 + 0.7**2) / 2 + 0.3
        assert integrate_1d(f, 0.0, 1.0, breakpoints=(0.3, 0.7)) == pytest.approx(exact, abs=1e-12)

    def test_budget(self):
        with pytest.raises(MaxIterations):
            integrate_1d(lambda x: math.sin(1.0 / x), 1e-6, 1.0, Tolerance(1e-15, 1e-15, 50))

    @given(
        st.lists(st.floats(-5, 5), min_size=1, max_size=7),
        st.floats(-2, 0),
        st.floats(0.1, 2),
    )
    @settings(max_examples=60, deadline=None)
    def test_halving_tolerance_never_hurts(self, coeffs, lo, width):
        hi = lo + width
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(hi) - poly.integ()(lo)
        f = lambda x: float(poly(x))  # noqa: E731
        prev = None
        for abs_tol in (1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6):
            err = abs(integrate_1d(f, lo, hi, Tolerance(abs_tol, 1e-300, 10_000)) - exact)
            assert err <= abs_tol + 1e-13 * max(1.0, abs(exact))
            if prev is not None:
                # roundoff-level slack only
                assert err <= prev + 1e-13 * max(1.0, abs(exact))
            prev = err


class TestIntegrateOde:
    def test_unit_velocity(self):
        path = integrate_ode(lambda x, t: 1.0, 0.0, 0.0, 2.0)
        assert path.t[0] == 0.0 and path.t[-1] == 2.0
        assert path.x[-1] == pytest.approx(2.0, abs=1e-14)
        assert np.all(np.diff(path.t) > 0)

    def test_zero_velocity_exact(self):
        path = integrate_ode(lambda x, t: 0.0, 0.3, 0.0, 5.0)
        assert np.all(path.x == 0.3)
        assert path(np.linspace(0, 5, 11)).tolist() == [0.3] * 11

    def test_exponential(self):
        tol = Tolerance(1e-11, 1e-11, 100_000)
        path = integrate_ode(lambda x, t: x, 1.0, 0.0, 1.0, tol)
        assert path.x[-1] == pytest.approx(math.e, rel=1e-9)

    def test_dense_output_accuracy(self):
        path = integrate_ode(lambda x, t: math.cos(t), 0.0, 0.0, 6.0)
        ts = np.linspace(0, 6, 101)
        assert np.max(np.abs(path(ts) - np.sin(ts))) < 1e-6

    def test_errors_from_velocity_propagate(self):
        def v(x, t):
            if t > 0.5:
                raise DensityFloor(x, t, 0.0, 1e-12)
            return 1.0

        with pytest.raises(DensityFloor):
            integrate_ode(v, 0.0, 0.0, 1.0)

    def test_step_underflow(self):
        # blow-up at t = 1 forces the step to collapse
        with pytest.raises((StepUnderflow, MaxIterations)):
            integrate_ode(lambda x, t: x * x, 1.0, 0.0, 2.0)

    def test_crossing_detection(self):
        path = integrate_ode(lambda x, t: math.cos(t), 0.0, 0.0, 7.0)
        found = crossings(path, 0.5)
        expected = [(math.asin(0.5), +1), (math.pi - math.asin(0.5), -1), (2 * math.pi + math.asin(0.5), +1)]
        assert [d for _, d in found] == [d for _, d in expected]
        for (t, _), (te, _) in zip(found, expected):
            assert t == pytest.approx(te, abs=1e-6)
