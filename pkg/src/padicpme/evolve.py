"""Implicit Euler integration of the fractional porous-medium flow.

Each step is exactly one resolvent of the monotone operator u -> D phi(u)
in the dual geometry, so the discrete flow inherits nonexpansiveness in
the dual norm for any step size, and the entropy functional decreases
along every trajectory.  The m = 1 flow has an exact spectral solution,
used as the convergence oracle.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .harmonic import GridFunction, SpectralFunction, forward, inverse, l2_inner, l2_norm
from .monotone import PowerLawNonlinearity, ProxConvergenceError, prox_step, psi_functional
from .sobolev import hminus1_norm
from .vladimirov import VladimirovParams, apply_kernel

__all__ = [
    "SolverConfig",
    "Trajectory",
    "step",
    "run",
    "linear_exact",
    "contraction_gap",
    "TimeProfile",
    "bump_profile",
    "weak_residual",
]


@dataclass(frozen=True)
class SolverConfig:
    """Time grid and solver tolerances for one experiment."""

    tau: float
    T: float
    prox_tol: float = 1e-10
    newton_tol: float = 1e-13
    mu_min: float = 1e-12
    max_newton: int = 60
    store_states: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tau <= 0 or self.T <= 0:
            raise ValueError("tau and T must be positive")

    def step_sizes(self) -> list[float]:
        """Uniform steps of size tau; a final partial step is appended
        (and recorded) whenever T is not an integer multiple of tau."""
        n_full = int(np.floor(self.T / self.tau + 1e-12))
        sizes = [self.tau] * n_full
        rem = self.T - n_full * self.tau
        if rem > 1e-12 * self.T:
            sizes.append(rem)
        return sizes


@dataclass
class Trajectory:
    """Solver states with per-step diagnostics; index 0 is the initial state."""

    times: np.ndarray
    states: list[GridFunction] | None
    l2: np.ndarray
    hminus1: np.ndarray
    psi: np.ndarray
    zero_mode: np.ndarray
    residuals: np.ndarray
    newton_iterations: np.ndarray
    constraint_gaps: np.ndarray
    step_sizes: np.ndarray
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def step(
    state: GridFunction,
    cfg: SolverConfig,
    params: VladimirovParams,
    nl: PowerLawNonlinearity,
    tau: float | None = None,
) -> GridFunction:
    """One implicit Euler step of size cfg.tau (or an explicit override)."""
    return prox_step(
        params,
        nl,
        cfg.tau if tau is None else tau,
        state,
        tol=cfg.prox_tol,
        newton_tol=cfg.newton_tol,
        mu_min=cfg.mu_min,
        max_newton=cfg.max_newton,
    ).u


def run(
    u0: GridFunction,
    cfg: SolverConfig,
    params: VladimirovParams,
    nl: PowerLawNonlinearity,
) -> Trajectory:
    """Integrate over [0, T]; deterministic given its inputs.

    On a step failure the partial trajectory is returned with the
    failure recorded instead of raising.
    """
    times = [0.0]
    states = [u0]
    diag = {
        "l2": [l2_norm(u0)],
        "hminus1": [hminus1_norm(u0, params)],
        "psi": [psi_functional(u0, nl)],
        "zero_mode": [complex(forward(u0).coeffs[0])],
        "residuals": [0.0],
        "newton_iterations": [0],
        "constraint_gaps": [0.0],
    }
    failure = None
    sizes = cfg.step_sizes()
    used_sizes = []
    u = u0
    for n, tau in enumerate(sizes):
        try:
            result = prox_step(
                params,
                nl,
                tau,
                u,
                tol=cfg.prox_tol,
                newton_tol=cfg.newton_tol,
                mu_min=cfg.mu_min,
                max_newton=cfg.max_newton,
            )
        except ProxConvergenceError as exc:
            failure = {
                "step": n,
                "time": times[-1],
                "message": str(exc),
                "history": exc.history,
            }
            break
        u = result.u
        used_sizes.append(tau)
        times.append(times[-1] + tau)
        states.append(u)
        diag["l2"].append(l2_norm(u))
        diag["hminus1"].append(hminus1_norm(u, params))
        diag["psi"].append(psi_functional(u, nl))
        diag["zero_mode"].append(complex(forward(u).coeffs[0]))
        diag["residuals"].append(result.residual_hminus1)
        diag["newton_iterations"].append(result.newton_iterations)
        diag["constraint_gaps"].append(result.constraint_gap)
    return Trajectory(
        times=np.array(times),
        states=states if cfg.store_states else None,
        l2=np.array(diag["l2"]),
        hminus1=np.array(diag["hminus1"]),
        psi=np.array(diag["psi"]),
        zero_mode=np.array(diag["zero_mode"]),
        residuals=np.array(diag["residuals"]),
        newton_iterations=np.array(diag["newton_iterations"], dtype=np.int64),
        constraint_gaps=np.array(diag["constraint_gaps"]),
        step_sizes=np.array(used_sizes),
        failure=failure,
    )


def linear_exact(u0: GridFunction, t: float, params: VladimirovParams) -> GridFunction:
    """Exact solution of the linear flow (m = 1) via the spectral exponential."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got t={t}")
    coeffs = forward(u0).coeffs * np.exp(-params.symbols() * t)
    return inverse(SpectralFunction(u0.grid, coeffs))


def contraction_gap(
    u0: GridFunction,
    v0: GridFunction,
    cfg: SolverConfig,
    params: VladimirovParams,
    nl: PowerLawNonlinearity,
) -> float:
    """Largest one-step increase of the dual-norm distance between the two
    trajectories; at most solver error for an exactly nonexpansive step."""
    tu = run(u0, cfg, params, nl)
    tv = run(v0, cfg, params, nl)
    if not (tu.ok and tv.ok):
        raise ProxConvergenceError("trajectory failed during contraction test", [])
    d = np.array(
        [hminus1_norm(a - b, params) for a, b in zip(tu.states, tv.states)]
    )
    if len(d) < 2:
        return 0.0
    return float(np.max(np.diff(d)))


@dataclass(frozen=True)
class TimeProfile:
    """Smooth scalar profile theta(t) with its derivative, used to build
    separable space-time test functions theta(t) * zeta(x)."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]


def bump_profile(T: float) -> TimeProfile:
    """The polynomial bump t (T - t), vanishing at both endpoints."""
    return TimeProfile(value=lambda t: t * (T - t), derivative=lambda t: T - 2.0 * t)


def weak_residual(
    traj: Trajectory,
    profile: TimeProfile,
    zeta: GridFunction,
    params: VladimirovParams,
    nl: PowerLawNonlinearity,
) -> float:
    """Defect in the integrated weak form of the flow.

    Tests the identity  int u theta'(t) zeta dx dt = int phi(u) theta(t)
    (D zeta) dx dt  with trapezoidal time quadrature and exact Haar sums
    in space; decays at first order in the step size along refinements.
    """
    if traj.states is None:
        raise ValueError("weak form needs stored states (set store_states=True)")
    T = float(traj.times[-1])
    scale = max(abs(profile.value(0.5 * T)), 1.0)
    if abs(profile.value(0.0)) > 1e-12 * scale or abs(profile.value(T)) > 1e-12 * scale:
        raise ValueError("time profile must vanish at both endpoints")
    d_zeta = apply_kernel(params, zeta)
    lhs_vals = []
    rhs_vals = []
    for t, u in zip(traj.times, traj.states):
        lhs_vals.append(profile.derivative(float(t)) * l2_inner(u, zeta).real)
        phi_u = GridFunction(u.grid, nl.phi(u.real_values()))
        rhs_vals.append(profile.value(float(t)) * l2_inner(phi_u, d_zeta).real)
    lhs = np.trapezoid(lhs_vals, traj.times)
    rhs = np.trapezoid(rhs_vals, traj.times)
    return float(abs(lhs - rhs))
