import numpy as np
import pytest

from primeq.dynamics import apply_semigroup
from primeq.grid import Grid, HVectorField, PhysParams, ScalarField
from primeq.hydrostatic import helmholtz_project
from primeq.norms import lp_norm
from primeq.solver import (Caches, Forcing, State, Trajectory, estimate_Tstar,
                           imex_step, picard_solve, run_simulation)
from primeq.testfields import random_smooth_scalar, random_smooth_state

GRID = Grid(16, 16, 8)


@pytest.fixture(scope="module")
def caches():
    return Caches.build(GRID, PhysParams())


def test_tstar_cap_oracle():
    # with zero data only the C-branches remain:
    # min(1/2C^2, (1/2C^2)^{1/(1-gamma)}) = 0.125^4 at C=2, p=2
    assert estimate_Tstar(0.0, 0.0, 0.0, 0.0) == pytest.approx(
        2.44140625e-4, rel=1e-12)


def test_tstar_monotone_in_data():
    small = estimate_Tstar(1e-3, 1e-3, 0.0, 0.0)
    large = estimate_Tstar(10.0, 10.0, 0.0, 0.0)
    assert large <= small


def test_tstar_validation():
    with pytest.raises(ValueError):
        estimate_Tstar(1.0, 1.0, 0.0, 0.0, C=0.5)
    with pytest.raises(ValueError):
        estimate_Tstar(1.0, 1.0, 0.0, 0.0, eps=0.9)
    with pytest.raises(ValueError):
        estimate_Tstar(-1.0, 1.0, 0.0, 0.0)


def test_imex_linear_step_is_exact(caches):
    # without nonlinearity and forcing one IMEX step equals the semigroup
    rng = np.random.default_rng(0)
    v, tau, sigma = random_smooth_state(GRID, rng)
    state = State.initial(v, tau, sigma)
    out = imex_step(state, Forcing.zero(), 0.02, caches, nonlinearity=False)
    exact = apply_semigroup(caches.temperature, state.tau, 0.02)
    assert lp_norm(out.tau - exact, 2) <= 1e-12 * lp_norm(tau, 2)
    exact_v = apply_semigroup(caches.velocity, state.v, 0.02)
    assert lp_norm(out.v - exact_v, 2) <= 1e-11 * lp_norm(v, 2)


def test_imex_rejects_bad_dt(caches):
    rng = np.random.default_rng(1)
    v, tau, sigma = random_smooth_state(GRID, rng)
    state = State.initial(v, tau, sigma)
    with pytest.raises(ValueError):
        imex_step(state, Forcing.zero(), 0.0, caches)


def test_run_simulation_emits_monotone_records(caches):
    rng = np.random.default_rng(2)
    v, tau, sigma = random_smooth_state(GRID, rng, amplitude=0.1)
    state = State.initial(v, tau, sigma)
    final, records = run_simulation(state, Forcing.zero(), 0.02, 1e-3,
                                    emit_every=4, caches=caches)
    ts = [r.t for r in records]
    assert ts == sorted(ts)
    assert final.t == pytest.approx(0.02)
    assert all(np.isfinite(r.E_v) for r in records)


def test_trajectory_rejects_nonincreasing_times():
    zero = ScalarField.zeros(GRID)
    from primeq.grid import SurfaceScalarField
    mk = lambda t: State(t, HVectorField.zeros(GRID), zero, zero,
                         SurfaceScalarField.zeros(GRID))
    with pytest.raises(ValueError):
        Trajectory([mk(0.0), mk(0.0)])


def test_picard_linear_matches_semigroup(caches):
    # with the nonlinearity off the first sweep is already exact
    rng = np.random.default_rng(3)
    tau = random_smooth_scalar(GRID, rng)
    a = HVectorField.zeros(GRID)
    traj, report = picard_solve(a, tau, ScalarField.zeros(GRID),
                                Forcing.zero(), 0.05, M=4, caches=caches,
                                nonlinearity=False)
    exact = apply_semigroup(caches.temperature, tau, 0.05)
    assert lp_norm(traj.states[-1].tau - exact, 2) <= 1e-12 * lp_norm(tau, 2)
    assert report.converged


def test_picard_contracts_on_small_data(caches):
    rng = np.random.default_rng(4)
    v, tau, sigma = random_smooth_state(GRID, rng, amplitude=1e-2)
    v = helmholtz_project(v).projected
    _, report = picard_solve(v, tau, sigma, Forcing.zero(), 0.005, M=4,
                             caches=caches)
    assert report.converged
    assert all(r < 1 for r in report.contraction_ratios)


def test_picard_validation(caches):
    zero = ScalarField.zeros(GRID)
    with pytest.raises(ValueError):
        picard_solve(HVectorField.zeros(GRID), zero, zero, Forcing.zero(),
                     0.0, M=4, caches=caches)
    with pytest.raises(ValueError):
        picard_solve(HVectorField.zeros(GRID), zero, zero, Forcing.zero(),
                     0.01, M=1, caches=caches)


def test_state_validation_catches_divergence():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: np.sin(2 * np.pi * X) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    state = State.initial(v, ScalarField.zeros(GRID), ScalarField.zeros(GRID),
                          project=False)
    with pytest.raises(ValueError, match="solenoidal"):
        state.validate()
    # projecting a generic field makes it valid
    rng = np.random.default_rng(5)
    v2, tau, sigma = random_smooth_state(GRID, rng)
    State.initial(v2, tau, sigma).validate()
