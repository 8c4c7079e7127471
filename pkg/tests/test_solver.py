"""Tests for the convolution-quadrature solver and its inversion helpers."""

import numpy as np
import pytest

from hfrac import (
    EquilibriumError,
    GridFunction,
    HGrid,
    OperatorKind,
    ShiftedGridFunction,
    SolverDivergenceError,
    SystemDef,
    binomial_weights,
    caputo_difference,
    caputo_solve,
    get_builtin,
    reconstruct_from_difference,
    residual_check,
    rl_difference,
    rl_solve,
    solve,
    write_step_csv,
)


def bisect_root(fn, lo, hi, tol=1e-12):
    """Plain bisection; independent of the solver's inner iterations."""
    flo = fn(lo)
    assert flo * fn(hi) < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * fn(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = fn(lo)
    return 0.5 * (lo + hi)


def scalar_system(kind, nu, fn, x0=1.0, h=1.0, a=0.0):
    return SystemDef(
        dim=1, kind=kind, nu=nu, a=a, h=h, x0=np.array([x0]),
        rhs=lambda t, x: np.array([fn(t, x[0])]),
    )


class TestFirstSteps:
    def test_linear_first_step(self):
        # componentwise x1 = x0 - x1, solved by hand
        traj = caputo_solve(get_builtin("ex5.1").system, 3)
        assert abs(traj.state(1)[0] - 0.05) <= 1e-12
        assert abs(traj.state(1)[1] - 0.10) <= 1e-12

    def test_cubic_first_step_vs_bisection(self):
        traj = caputo_solve(get_builtin("ex5.3").system, 2)
        root = bisect_root(lambda u: u**3 + u - 0.4, 0.0, 1.0, tol=1e-14)
        assert abs(traj.state(1)[0] - root) <= 1e-10

    def test_coupled_first_step_vs_damped_fixed_point(self):
        traj = rl_solve(get_builtin("ex5.2").system, 2)
        u, v = 0.05, 0.10
        for _ in range(400):
            u = 0.5 * u + 0.5 * (0.05 - 0.5 * v**16 * u)
            v = 0.5 * v + 0.5 * (0.10 - 0.5 * u**2 * v)
        assert np.max(np.abs(traj.state(1) - [u, v])) <= 1e-12

    def test_initial_state_never_recomputed(self):
        sys = get_builtin("ex5.4").system
        traj = solve(sys, 5)
        np.testing.assert_array_equal(traj.state(0), sys.x0)


class TestDegenerateOrders:
    def test_order_one_is_implicit_euler(self):
        # x_{n+1} = x_n + h f(x_{n+1}); for f = -x that is x_n / (1 + h)
        sys = scalar_system(OperatorKind.CAPUTO, 1.0, lambda t, x: -x, x0=1.0, h=0.5)
        traj = solve(sys, 10)
        expected = (1.0 / 1.5) ** np.arange(11)
        np.testing.assert_allclose(traj.states.values[:, 0], expected, atol=1e-12)

    def test_rl_order_one_zero_rhs_constant(self):
        sys = scalar_system(
            OperatorKind.RIEMANN_LIOUVILLE, 1.0, lambda t, x: 0.0, x0=2.0
        )
        traj = solve(sys, 8)
        np.testing.assert_array_equal(traj.states.values[:, 0], np.full(9, 2.0))

    def test_rl_zero_rhs_follows_weights(self):
        for nu in (0.3, 0.5, 0.8):
            sys = scalar_system(
                OperatorKind.RIEMANN_LIOUVILLE, nu, lambda t, x: 0.0, x0=1.5
            )
            traj = solve(sys, 12)
            expected = 1.5 * binomial_weights(nu, 12).values
            assert np.max(np.abs(traj.states.values[:, 0] - expected)) <= 1e-12


class TestResidualCheck:
    @pytest.mark.parametrize("key", ["ex5.1", "ex5.2", "ex5.3", "ex5.4"])
    def test_examples_within_tolerance(self, key):
        traj = solve(get_builtin(key).system, 64)
        assert residual_check(traj) <= 1e-8

    def test_zero_trajectory(self):
        sys = scalar_system(OperatorKind.CAPUTO, 0.5, lambda t, x: -x, x0=0.0)
        traj = solve(sys, 16)
        assert residual_check(traj) <= 1e-14

    def test_perturbation_detected(self):
        traj = solve(get_builtin("ex5.1").system, 16)
        values = traj.states.values.copy()
        values[8, 0] += 0.1
        tampered = type(traj)(
            system=traj.system,
            states=GridFunction(traj.states.grid, values),
            steps=traj.steps,
        )
        assert residual_check(tampered) > 1e-3

    def test_step_records(self):
        traj = solve(get_builtin("ex5.2").system, 12)
        assert len(traj.steps) == 12
        assert all(rec.residual <= 1e-12 for rec in traj.steps)


class TestReconstruction:
    @pytest.mark.parametrize(
        "kind,op",
        [(OperatorKind.CAPUTO, caputo_difference),
         (OperatorKind.RIEMANN_LIOUVILLE, rl_difference)],
        ids=["caputo", "rl"],
    )
    def test_round_trip(self, kind, op):
        rng = np.random.default_rng(17)
        for _ in range(100):
            grid = HGrid(0.0, float(rng.choice([0.5, 1.0])), 16)
            x = GridFunction(grid, rng.uniform(-1.0, 1.0, 16))
            nu = float(rng.uniform(0.05, 1.0))
            g = op(x, nu)
            rebuilt = reconstruct_from_difference(g, x.values[0], kind, nu)
            assert np.max(np.abs(rebuilt.values - x.values)) <= 1e-9

    def test_zero_difference_caputo_constant(self):
        g = ShiftedGridFunction(HGrid(0.0, 1.0, 9), 0.5, np.zeros(8))
        x = reconstruct_from_difference(g, [0.7], OperatorKind.CAPUTO, 0.5)
        np.testing.assert_array_equal(x.values[:, 0], np.full(9, 0.7))

    def test_zero_difference_rl_weights(self):
        g = ShiftedGridFunction(HGrid(0.0, 1.0, 9), 0.5, np.zeros(8))
        x = reconstruct_from_difference(g, [0.7], OperatorKind.RIEMANN_LIOUVILLE, 0.5)
        np.testing.assert_allclose(
            x.values[:, 0], 0.7 * binomial_weights(0.5, 8).values, atol=1e-14
        )


class TestComparisonOrdering:
    def test_caputo_ordering(self):
        # a trajectory driven by a nonnegative forcing stays above the
        # unforced one by at least the gap of the initial states
        rng = np.random.default_rng(23)
        for _ in range(100):
            nu = float(rng.uniform(0.05, 1.0))
            m = rng.uniform(0.0, 1.0, size=12)
            x0 = float(rng.uniform(-1, 1))
            y0 = float(rng.uniform(-1, 1))
            g = ShiftedGridFunction(HGrid(0.0, 1.0, 13), (1 - nu), m)
            zero = ShiftedGridFunction(HGrid(0.0, 1.0, 13), (1 - nu), np.zeros(12))
            x = reconstruct_from_difference(g, [x0], OperatorKind.CAPUTO, nu)
            y = reconstruct_from_difference(zero, [y0], OperatorKind.CAPUTO, nu)
            gap = (x.values - y.values) - (x0 - y0)
            assert np.min(gap) >= -1e-12

    def test_rl_ordering_needs_initial_order(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            nu = float(rng.uniform(0.05, 1.0))
            m = rng.uniform(0.0, 1.0, size=12)
            y0 = float(rng.uniform(-1, 1))
            x0 = y0 - float(rng.uniform(0.0, 1.0))
            g = ShiftedGridFunction(HGrid(0.0, 1.0, 13), (1 - nu), m)
            zero = ShiftedGridFunction(HGrid(0.0, 1.0, 13), (1 - nu), np.zeros(12))
            x = reconstruct_from_difference(g, [x0], OperatorKind.RIEMANN_LIOUVILLE, nu)
            y = reconstruct_from_difference(zero, [y0], OperatorKind.RIEMANN_LIOUVILLE, nu)
            gap = (x.values - y.values) - (x0 - y0)
            assert np.min(gap) >= -1e-12

    def test_weights_stay_at_most_one(self):
        # the RL ordering argument leans on this bound
        for nu in np.linspace(0.05, 1.0, 20):
            assert np.max(binomial_weights(float(nu), 256).values) <= 1.0


class TestValidationAndFailure:
    def test_equilibrium_enforced(self):
        with pytest.raises(EquilibriumError):
            scalar_system(OperatorKind.CAPUTO, 0.5, lambda t, x: x + 1.0)

    def test_kind_mismatch(self):
        sys = scalar_system(OperatorKind.CAPUTO, 0.5, lambda t, x: -x)
        with pytest.raises(ValueError):
            rl_solve(sys, 4)

    def test_divergence_reported_with_step(self):
        # x = 1 + x + x^2 has no real solution, so the first step must fail
        sys = scalar_system(OperatorKind.CAPUTO, 1.0, lambda t, x: x + x * x, x0=1.0)
        with pytest.raises(SolverDivergenceError) as err:
            solve(sys, 4)
        assert err.value.step == 1

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            scalar_system(OperatorKind.CAPUTO, 1.5, lambda t, x: -x)
        with pytest.raises(ValueError):
            scalar_system(OperatorKind.CAPUTO, 0.5, lambda t, x: -x, h=-1.0)
        with pytest.raises(ValueError):
            SystemDef(
                dim=2, kind=OperatorKind.CAPUTO, nu=0.5, a=0.0, h=1.0,
                x0=np.array([1.0]), rhs=lambda t, x: -x,
            )


class TestStepCsv:
    def test_sidecar_schema(self, tmp_path):
        traj = solve(get_builtin("ex5.1").system, 6)
        path = tmp_path / "meta.csv"
        write_step_csv(traj, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,iters,residual"
        assert len(lines) == 7
        step, iters, residual = lines[1].split(",")
        assert int(step) == 1 and int(iters) >= 1 and float(residual) <= 1e-12
