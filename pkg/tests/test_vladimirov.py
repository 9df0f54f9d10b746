"""Kernel and spectral forms of the operator, its spectrum and oracle."""

import numpy as np
import pytest

from padicpme.grid import BallGrid, dual_norm, dual_norm_vector, point_abs, valuation
from padicpme.harmonic import (
    character_function,
    constant_function,
    forward,
    l2_inner,
    l2_norm,
    random_function,
)
from padicpme.vladimirov import (
    VladimirovParams,
    apply_kernel,
    apply_spectral,
    arbitrate_symbols,
    brute_symbol,
    brute_symbols,
    eigenfunction_first_layer,
    eigenfunction_psi0,
    kernel_constant,
    lambda0,
    symbol,
    symbol_candidates,
)

GRIDS = [(2, 1, 2), (2, -1, 4), (3, 0, 2), (3, 1, 2), (5, 1, 1)]


def kernel_oracle(params, values):
    """Literal double sum of the hypersingular kernel; the reference path."""
    g = params.grid
    out = np.zeros(g.M, dtype=complex)
    for a in range(g.M):
        acc = 0.0
        for d in range(1, g.M):
            acc += (values[(a - d) % g.M] - values[a]) / point_abs(g, d) ** (params.alpha + 1)
        out[a] = params.lambda0 * values[a] + params.a_p * g.haar_weight * acc
    return out


def test_lambda0_frozen_cases():
    assert lambda0(2, 1.0, 0) == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert lambda0(3, 1.0, 1) == pytest.approx(0.25, rel=1e-15)


def test_lambda0_below_first_eigenvalue():
    for p in (2, 3, 5):
        for alpha in (0.3, 0.5, 1.0):
            for N in (-1, 0, 1, 2):
                assert 0 < lambda0(p, alpha, N) < float(p) ** (alpha * (1 - N))


def test_lambda0_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        lambda0(2, 0.0, 1)


def test_kernel_constant_negative():
    for p in (2, 3, 5):
        for alpha in (0.3, 1.0, 2.0):
            assert kernel_constant(p, alpha) < 0


def test_symbol_frozen_cases():
    params = VladimirovParams(BallGrid(2, 0, 2), 1.0)
    assert symbol(params, 0) == pytest.approx(params.lambda0, rel=1e-15)
    assert symbol(params, 1) == pytest.approx(4.0, rel=1e-15)


def test_symbol_table_shape():
    params = VladimirovParams(BallGrid(3, 1, 2), 0.7)
    table = params.symbols()
    assert table.min() == pytest.approx(params.lambda0)
    order = np.argsort(dual_norm_vector(params.grid), kind="stable")
    assert np.all(np.diff(table[order]) >= -1e-15)  # non-decreasing in dual norm


@pytest.mark.parametrize("p,N,K", GRIDS)
def test_apply_kernel_matches_double_loop(p, N, K):
    params = VladimirovParams(BallGrid(p, N, K), 0.7)
    f = random_function(params.grid, np.random.default_rng(0))
    expected = kernel_oracle(params, f.values)
    assert np.max(np.abs(apply_kernel(params, f).values - expected)) < 1e-12


def test_apply_kernel_constant_and_characters():
    params = VladimirovParams(BallGrid(2, 1, 3), 0.5)
    g = params.grid
    c = constant_function(g, 1.7)
    assert np.max(np.abs(apply_kernel(params, c).values - params.lambda0 * 1.7)) < 1e-13
    for b in (1, 3, 8):
        e = character_function(g, b)
        got = apply_kernel(params, e).values
        assert np.max(np.abs(got - symbol(params, b) * e.values)) < 1e-10


@pytest.mark.parametrize("p,N,K", GRIDS)
def test_kernel_equals_spectral_on_randoms(p, N, K):
    params = VladimirovParams(BallGrid(p, N, K), 0.5)
    rng = np.random.default_rng(1)
    for _ in range(25):
        f = random_function(params.grid, rng)
        gap = np.max(np.abs(apply_kernel(params, f).values - apply_spectral(params, f).values))
        assert gap < 1e-10


def test_apply_spectral_examples():
    params = VladimirovParams(BallGrid(3, 0, 2), 1.0)
    one = constant_function(params.grid, 1.0)
    assert np.max(np.abs(apply_spectral(params, one).values - params.lambda0)) < 1e-13
    f = random_function(params.grid, np.random.default_rng(2))
    twice = apply_spectral(params, apply_spectral(params, f))
    from padicpme.harmonic import SpectralFunction, inverse

    squared = inverse(
        SpectralFunction(params.grid, forward(f).coeffs * params.symbols() ** 2)
    )
    assert np.max(np.abs(twice.values - squared.values)) < 1e-12


def test_brute_symbol_trivial_class():
    params = VladimirovParams(BallGrid(2, 0, 2), 1.0)
    assert brute_symbol(params, 0) == pytest.approx(params.lambda0, abs=1e-12)
    assert brute_symbol(params, 1) == pytest.approx(4.0, abs=1e-10)


def test_brute_symbol_sweep_shell_constancy():
    for p in (2, 3, 5):
        for N in (-1, 0, 1, 2):
            K = 3 - N if p == 2 else 2 - N
            K = max(K, 1 - N + 1)
            grid = BallGrid(p, N, K)
            for alpha in (0.3, 0.5, 1.0):
                params = VladimirovParams(grid, alpha)
                brute = brute_symbols(params)
                dn = dual_norm_vector(grid)
                for norm in np.unique(dn):
                    members = brute[dn == norm]
                    assert members.max() - members.min() < 1e-10
                assert np.max(np.abs(brute - params.symbols())) < 1e-10


def test_eigenfunction_psi0():
    g = BallGrid(2, 1, 2)
    params = VladimirovParams(g, 0.5)
    psi0 = eigenfunction_psi0(g)
    assert psi0.values[0] == pytest.approx(2.0 ** (-0.5))
    assert l2_norm(psi0) == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(apply_kernel(params, psi0).values - params.lambda0 * psi0.values)) < 1e-12


def test_eigenfunction_first_layer():
    for p, N, K in [(2, 1, 2), (3, 0, 2), (5, -1, 3)]:
        g = BallGrid(p, N, K)
        params = VladimirovParams(g, 0.5)
        lam1 = float(p) ** (params.alpha * (1 - N))
        psi0 = eigenfunction_psi0(g)
        for j in range(1, p):
            f = eigenfunction_first_layer(g, j)
            assert l2_norm(f) == pytest.approx(1.0, abs=1e-12)
            assert np.max(np.abs(apply_kernel(params, f).values - lam1 * f.values)) < 1e-10
            assert abs(l2_inner(f, psi0)) < 1e-12


def test_first_layer_multiplicity_bounds():
    g = BallGrid(2, 1, 2)
    eigenfunction_first_layer(g, 1)  # the only member for p = 2
    with pytest.raises(ValueError):
        eigenfunction_first_layer(g, 2)
    with pytest.raises(ValueError):
        eigenfunction_first_layer(g, 0)


def test_self_adjoint_and_positive():
    params = VladimirovParams(BallGrid(3, 1, 2), 0.7)
    g = params.grid
    rng = np.random.default_rng(3)
    for _ in range(10):
        f, h = random_function(g, rng), random_function(g, rng)
        lhs = l2_inner(apply_kernel(params, f), h)
        rhs = l2_inner(f, apply_kernel(params, h))
        assert abs(lhs - rhs) < 1e-11
        quad = l2_inner(apply_kernel(params, f), f).real
        assert quad >= params.lambda0 * l2_norm(f) ** 2 * (1 - 1e-12)
    c = constant_function(g, 2.0)
    quad = l2_inner(apply_kernel(params, c), c).real
    assert quad == pytest.approx(params.lambda0 * l2_norm(c) ** 2, rel=1e-13)


def test_diagonalization_of_kernel():
    params = VladimirovParams(BallGrid(2, 1, 3), 0.5)
    f = random_function(params.grid, np.random.default_rng(4))
    lhs = forward(apply_kernel(params, f)).coeffs
    rhs = params.symbols() * forward(f).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-10


@pytest.mark.parametrize("p,N,K,alpha", [(2, 1, 3, 0.5), (3, 0, 2, 1.0), (5, 1, 1, 0.3), (2, -1, 4, 0.7)])
def test_arbitration_unique_winner(p, N, K, alpha):
    params = VladimirovParams(BallGrid(p, N, K), alpha)
    report = arbitrate_symbols(params)
    assert report.unique
    assert report.winner == "norm_power"
    assert report.gaps["norm_power"] < 1e-10
    # the other closed forms genuinely differ on these grids
    assert report.gaps["norm_power_shifted"] > 1e-3
    assert report.gaps["norm_power_scaled"] > 1e-3


def test_candidates_disagree_by_lambda0():
    params = VladimirovParams(BallGrid(2, 0, 3), 0.5)
    cands = symbol_candidates(params)
    gap = cands["norm_power_shifted"][1:] - cands["norm_power"][1:]
    assert np.max(np.abs(gap - params.lambda0)) < 1e-15


def test_with_symbols_only_affects_spectral_path():
    params = VladimirovParams(BallGrid(2, 1, 3), 0.5)
    bad_table = params.symbols().copy()
    bad_table[1:] *= 1.01
    bad = params.with_symbols(bad_table)
    f = random_function(params.grid, np.random.default_rng(5))
    assert np.max(np.abs(apply_kernel(bad, f).values - apply_kernel(params, f).values)) == 0.0
    gap = np.max(np.abs(apply_spectral(bad, f).values - apply_spectral(params, f).values))
    assert gap > 1e-3
