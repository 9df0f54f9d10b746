"""Implicit Euler flow: semigroup, contraction, Lyapunov and weak form."""

import numpy as np
import pytest

from padicpme.evolve import (
    SolverConfig,
    bump_profile,
    contraction_gap,
    linear_exact,
    run,
    step,
    weak_residual,
)
from padicpme.grid import BallGrid
from padicpme.harmonic import GridFunction, constant_function, forward, l2_norm, random_function
from padicpme.monotone import PowerLawNonlinearity, psi_functional
from padicpme.sobolev import hminus1_norm
from padicpme.vladimirov import VladimirovParams, eigenfunction_psi0


def make_params(p=2, N=1, K=3, alpha=0.5):
    return VladimirovParams(BallGrid(p, N, K), alpha)


def test_step_zero_is_equilibrium():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=1.0)
    zero = constant_function(params.grid, 0.0)
    out = step(zero, cfg, params, PowerLawNonlinearity(2.0))
    assert np.max(np.abs(out.values)) == 0.0


def test_step_linear_constant_mode_closed_form():
    params = make_params()
    tau = 0.25
    cfg = SolverConfig(tau=tau, T=1.0)
    nl = PowerLawNonlinearity(1.0)
    state = eigenfunction_psi0(params.grid)
    for n in range(1, 4):
        state = step(state, cfg, params, nl)
        expected = (1 + tau * params.lambda0) ** (-n) * eigenfunction_psi0(params.grid).values
        assert np.max(np.abs(state.values - expected)) < 1e-10


def test_step_entropy_descent():
    params = make_params()
    cfg = SolverConfig(tau=0.2, T=1.0)
    nl = PowerLawNonlinearity(2.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = random_function(params.grid, rng, real=True)
        assert psi_functional(step(u, cfg, params, nl), nl) <= psi_functional(u, nl) + 1e-12


def test_run_zero_trajectory():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=0.5)
    traj = run(constant_function(params.grid, 0.0), cfg, params, PowerLawNonlinearity(2.0))
    assert traj.ok
    assert np.all(traj.l2 == 0.0)
    assert np.all(traj.psi == 0.0)
    assert len(traj.times) == 6


def test_run_diagnostics_monotone_for_m2():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=1.0)
    traj = run(
        random_function(params.grid, np.random.default_rng(1), real=True),
        cfg,
        params,
        PowerLawNonlinearity(2.0),
    )
    assert traj.ok
    assert np.all(np.diff(traj.hminus1) <= 1e-10)
    assert np.all(np.diff(traj.psi) <= 1e-10)


def test_run_partial_final_step_documented():
    params = make_params()
    cfg = SolverConfig(tau=0.4, T=1.0)
    traj = run(eigenfunction_psi0(params.grid), cfg, params, PowerLawNonlinearity(1.0))
    assert traj.times[-1] == pytest.approx(1.0, rel=1e-12)
    assert traj.step_sizes.tolist() == pytest.approx([0.4, 0.4, 0.2])


def test_linear_exact_examples():
    params = make_params(3, 0, 3, 1.0)
    u0 = random_function(params.grid, np.random.default_rng(2))
    assert np.max(np.abs(linear_exact(u0, 0.0, params).values - u0.values)) < 1e-14
    psi0 = eigenfunction_psi0(params.grid)
    t = 0.7
    expected = np.exp(-params.lambda0 * t) * psi0.values
    assert np.max(np.abs(linear_exact(psi0, t, params).values - expected)) < 1e-14
    norms = [l2_norm(linear_exact(u0, t, params)) for t in (0.0, 0.5, 1.0, 2.0)]
    assert all(norms[i + 1] <= norms[i] + 1e-14 for i in range(3))
    with pytest.raises(ValueError):
        linear_exact(u0, -1.0, params)


def test_linear_flow_first_order_convergence():
    params = make_params()
    u0 = random_function(params.grid, np.random.default_rng(3), real=True)
    nl = PowerLawNonlinearity(1.0)
    errors = []
    taus = [0.1, 0.05, 0.025, 0.0125]
    exact = linear_exact(u0, 1.0, params)
    for tau in taus:
        traj = run(u0, SolverConfig(tau=tau, T=1.0), params, nl)
        errors.append(float(np.max(np.abs(traj.states[-1].values - exact.values))))
    slope = np.polyfit(np.log(taus), np.log(errors), 1)[0]
    assert 0.8 <= slope <= 1.2


def test_contraction_gap_same_start_is_zero():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=0.5)
    u0 = random_function(params.grid, np.random.default_rng(4), real=True)
    assert contraction_gap(u0, u0, cfg, params, PowerLawNonlinearity(2.0)) <= 1e-10


@pytest.mark.parametrize("m", [0.5, 2.0])
def test_contraction_gap_random_pairs(m):
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=0.5)
    rng = np.random.default_rng(5)
    nl = PowerLawNonlinearity(m)
    for _ in range(5):
        u0 = random_function(params.grid, rng, real=True)
        v0 = random_function(params.grid, rng, real=True)
        assert contraction_gap(u0, v0, cfg, params, nl) <= 1e-8


def test_distance_sequence_nonincreasing():
    params = make_params()
    cfg = SolverConfig(tau=0.2, T=1.0)
    rng = np.random.default_rng(6)
    nl = PowerLawNonlinearity(2.0)
    u0 = random_function(params.grid, rng, real=True)
    v0 = random_function(params.grid, rng, real=True)
    tu, tv = run(u0, cfg, params, nl), run(v0, cfg, params, nl)
    d = [hminus1_norm(a - b, params) for a, b in zip(tu.states, tv.states)]
    assert all(d[i + 1] <= d[i] + 1e-10 for i in range(len(d) - 1))


def test_discrete_semigroup_composition_bitwise():
    params = make_params()
    nl = PowerLawNonlinearity(2.0)
    u0 = random_function(params.grid, np.random.default_rng(7), real=True)
    full = run(u0, SolverConfig(tau=0.1, T=0.6), params, nl)
    first = run(u0, SolverConfig(tau=0.1, T=0.3), params, nl)
    second = run(first.states[-1], SolverConfig(tau=0.1, T=0.3), params, nl)
    assert np.array_equal(full.states[-1].values, second.states[-1].values)


def test_zero_mode_step_law_exact():
    params = make_params()
    tau = 0.2
    cfg = SolverConfig(tau=tau, T=1.0)
    nl = PowerLawNonlinearity(2.0)
    traj = run(random_function(params.grid, np.random.default_rng(8), real=True), cfg, params, nl)
    for n in range(len(traj.times) - 1):
        u_next = traj.states[n + 1]
        phi_hat0 = forward(
            GridFunction(params.grid, nl.phi(u_next.real_values()))
        ).coeffs[0]
        lhs = traj.zero_mode[n + 1] - traj.zero_mode[n]
        rhs = -tau * params.lambda0 * phi_hat0
        assert abs(lhs - rhs) < 1e-12


def test_weak_residual_zero_trajectory():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=1.0)
    nl = PowerLawNonlinearity(2.0)
    traj = run(constant_function(params.grid, 0.0), cfg, params, nl)
    zeta = random_function(params.grid, np.random.default_rng(9), real=True)
    assert weak_residual(traj, bump_profile(1.0), zeta, params, nl) == 0.0


def test_weak_residual_endpoint_validation():
    params = make_params()
    cfg = SolverConfig(tau=0.1, T=1.0)
    nl = PowerLawNonlinearity(2.0)
    traj = run(eigenfunction_psi0(params.grid), cfg, params, nl)
    zeta = random_function(params.grid, np.random.default_rng(10), real=True)
    from padicpme.evolve import TimeProfile

    bad = TimeProfile(value=lambda t: 1.0, derivative=lambda t: 0.0)
    with pytest.raises(ValueError):
        weak_residual(traj, bad, zeta, params, nl)


@pytest.mark.parametrize("m", [1.0, 2.0])
def test_weak_residual_decreases_under_refinement(m):
    params = make_params()
    nl = PowerLawNonlinearity(m)
    rng = np.random.default_rng(11)
    u0 = random_function(params.grid, rng, real=True)
    zeta = random_function(params.grid, rng, real=True)
    residuals = []
    for tau in (0.1, 0.05, 0.025):
        traj = run(u0, SolverConfig(tau=tau, T=1.0), params, nl)
        residuals.append(weak_residual(traj, bump_profile(1.0), zeta, params, nl))
    assert residuals[1] < residuals[0]
    assert residuals[2] < residuals[1]
