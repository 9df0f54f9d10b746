"""Verification battery: every identity the library asserts, as suites.

Each suite returns named checks carrying the pinned tolerance next to
the measured value, so reports never contain silent passes.  The
negative-control helpers corrupt the symbol table or the Haar weight by
one percent; a healthy battery must then fail in the advertised suites,
which guards the whole enterprise against vacuous tests.
"""

from dataclasses import dataclass, field

import numpy as np

from .evolve import SolverConfig, bump_profile, contraction_gap, linear_exact, run, weak_residual
from .grid import BallGrid, dual_norm_vector
from .harmonic import (
    GridFunction,
    forward,
    inverse,
    l2_norm,
    plancherel_deficit,
    random_function,
)
from .monotone import (
    PowerLawNonlinearity,
    ProxConvergenceError,
    prox_step,
    psi_functional,
    spectral_resolve,
)
from .sobolev import (
    ags_multiplier_bruteforce,
    ags_multipliers,
    ags_seminorm,
    ags_via_multiplier,
    equivalence_constants,
    h1_norm,
    h_alpha_norm,
    hminus1_norm,
    norm_equivalence_envelope,
)
from .vladimirov import (
    VladimirovParams,
    apply_kernel,
    apply_spectral,
    arbitrate_symbols,
    brute_symbols,
    eigenfunction_first_layer,
    eigenfunction_psi0,
)

__all__ = [
    "Check",
    "SuiteResult",
    "TOLERANCES",
    "DESK_GRIDS",
    "SOLVER_GRIDS",
    "fourier_suite",
    "diagonalization_suite",
    "arbitration_suite",
    "eigenpair_suite",
    "ags_suite",
    "equivalence_suite",
    "resolvent_suite",
    "contraction_suite",
    "lyapunov_suite",
    "convergence_suite",
    "corrupted_grid",
    "corrupted_params",
    "run_battery",
]

TOLERANCES = {
    "roundtrip": 1e-12,
    "plancherel": 1e-12,
    "kernel_vs_spectral": 1e-10,
    "shell_constancy": 1e-10,
    "arbitration": 1e-10,
    "eigen_residual": 1e-10,
    "eigen_norm": 1e-12,
    "eigen_orthogonality": 1e-12,
    "ags_identity_rel": 1e-9,
    "ags_c2_rel": 1e-10,
    "ags_sandwich_rel": 1e-10,
    "ags_gridsum_rel": 1e-10,
    "envelope_slack_rel": 1e-9,
    "prox_residual": 1e-10,
    "prox_gap": 1e-8,
    "prox_linear_match": 1e-10,
    "contraction": 1e-8,
    "lyapunov_step": 1e-10,
    "order_low": 0.8,
    "order_high": 1.2,
}

# Desk-scale grids (p, N, K): small enough for exhaustive double sums.
DESK_GRIDS = [(2, 1, 3), (2, -1, 4), (2, 2, 5), (3, 0, 2), (3, 1, 3), (5, 1, 1), (5, -1, 3)]
# Grids used for the nonlinear solver suites.
SOLVER_GRIDS = [(2, 1, 3), (3, 0, 2)]


@dataclass
class Check:
    name: str
    tolerance: float
    measured: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "measured": self.measured,
            "passed": self.passed,
        }


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, tolerance: float, measured: float, ok: bool | None = None) -> None:
        if ok is None:
            ok = measured <= tolerance
        self.checks.append(Check(name, float(tolerance), float(measured), bool(ok)))

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "info": self.info,
        }


def fourier_suite(grid: BallGrid, n_random: int = 100, seed: int = 0) -> SuiteResult:
    """Round-trip exactness and the Plancherel identity on random data."""
    res = SuiteResult("fourier-roundtrip-plancherel")
    rng = np.random.default_rng(seed)
    worst_rt, worst_pl = 0.0, 0.0
    for _ in range(n_random):
        f = random_function(grid, rng)
        worst_rt = max(worst_rt, float(np.max(np.abs(inverse(forward(f)).values - f.values))))
        worst_pl = max(worst_pl, plancherel_deficit(f) / (1.0 + l2_norm(f) ** 2))
    res.add("roundtrip_componentwise", TOLERANCES["roundtrip"], worst_rt)
    res.add("plancherel_deficit_rel", TOLERANCES["plancherel"], worst_pl)
    return res


def diagonalization_suite(params: VladimirovParams, n_random: int = 100, seed: int = 0) -> SuiteResult:
    """Kernel form versus spectral form, and shell constancy of the oracle."""
    res = SuiteResult("diagonalization")
    rng = np.random.default_rng(seed)
    grid = params.grid
    worst = 0.0
    for _ in range(n_random):
        f = random_function(grid, rng)
        gap = float(np.max(np.abs(apply_kernel(params, f).values - apply_spectral(params, f).values)))
        worst = max(worst, gap)
    res.add("kernel_vs_spectral_componentwise", TOLERANCES["kernel_vs_spectral"], worst)

    brute = brute_symbols(params)
    dn = dual_norm_vector(grid)
    spread = 0.0
    for norm in np.unique(dn):
        members = brute[dn == norm]
        spread = max(spread, float(members.max() - members.min()))
    res.add("oracle_shell_constancy", TOLERANCES["shell_constancy"], spread)
    return res


def arbitration_suite(params: VladimirovParams) -> SuiteResult:
    """Which closed form does the kernel actually implement?  Exactly one
    candidate must match the Rayleigh oracle uniformly."""
    res = SuiteResult("symbol-arbitration")
    report = arbitrate_symbols(params, tol=TOLERANCES["arbitration"])
    res.add(
        "exactly_one_match",
        TOLERANCES["arbitration"],
        min(report.gaps.values()),
        ok=report.unique,
    )
    res.info["winner"] = report.winner
    res.info["matches"] = report.matches
    res.info["gaps"] = report.gaps
    return res


def eigenpair_suite(params: VladimirovParams) -> SuiteResult:
    """Constant eigenfunction and the first nontrivial layer."""
    res = SuiteResult("eigenpairs")
    grid = params.grid
    lam1 = float(grid.p) ** (params.alpha * (1 - grid.N))
    funcs = [(eigenfunction_psi0(grid), params.lambda0)]
    funcs += [(eigenfunction_first_layer(grid, j), lam1) for j in range(1, grid.p)]
    worst_eig, worst_norm, worst_orth = 0.0, 0.0, 0.0
    from .harmonic import l2_inner

    for i, (f, lam) in enumerate(funcs):
        img = apply_kernel(params, f)
        worst_eig = max(worst_eig, float(np.max(np.abs(img.values - lam * f.values))))
        worst_norm = max(worst_norm, abs(l2_norm(f) - 1.0))
        for g, _ in funcs[i + 1 :]:
            worst_orth = max(worst_orth, abs(l2_inner(f, g)))
    res.add("eigen_residual", TOLERANCES["eigen_residual"], worst_eig)
    res.add("unit_norms", TOLERANCES["eigen_norm"], worst_norm)
    res.add("pairwise_orthogonality", TOLERANCES["eigen_orthogonality"], worst_orth)
    res.info["multiplicity_first_layer"] = grid.p - 1
    return res


def ags_suite(
    grid: BallGrid,
    s_values: tuple[float, ...] = (0.3, 0.5, 0.9),
    n_random: int = 100,
    seed: int = 0,
) -> SuiteResult:
    """Double-sum seminorm vs its multiplier form, the sharp sandwich for
    the multiplier, and the shell formula vs the literal grid sum."""
    res = SuiteResult("ags")
    rng = np.random.default_rng(seed)
    dn = dual_norm_vector(grid)
    for s in s_values:
        worst_id = 0.0
        for _ in range(n_random):
            f = random_function(grid, rng)
            direct = ags_seminorm(f, s)
            mult = ags_via_multiplier(f, s)
            worst_id = max(worst_id, abs(direct - mult) / max(direct, 1e-30))
        res.add(f"identity_rel_s={s}", TOLERANCES["ags_identity_rel"], worst_id)

        mults = ags_multipliers(grid, s)
        ratios = mults[1:] / dn[1:] ** (2 * s)
        c1, c2 = equivalence_constants(grid, s)
        res.add(
            f"sandwich_lower_s={s}",
            TOLERANCES["ags_sandwich_rel"],
            max(0.0, (c2 - float(np.min(ratios))) / c2),
        )
        res.add(
            f"c2_sharp_s={s}",
            TOLERANCES["ags_c2_rel"],
            abs(float(np.min(ratios)) - c2) / c2,
        )
        res.add(
            f"sandwich_upper_s={s}",
            TOLERANCES["ags_sandwich_rel"],
            max(0.0, (float(np.max(ratios)) - c1) / c1),
        )
        worst_grid = 0.0
        for b in range(1, grid.M):
            brute = ags_multiplier_bruteforce(grid, s, b)
            worst_grid = max(worst_grid, abs(brute - mults[b]) / mults[b])
        res.add(f"shell_vs_gridsum_rel_s={s}", TOLERANCES["ags_gridsum_rel"], worst_grid)
    return res


def equivalence_suite(
    grid: BallGrid,
    alphas: tuple[float, ...] = (0.3, 0.5, 0.9),
    n_random: int = 100,
    seed: int = 0,
) -> SuiteResult:
    """Random-function norm ratios against the certified multiplier envelopes."""
    res = SuiteResult("norm-equivalence")
    rng = np.random.default_rng(seed)
    slack = TOLERANCES["envelope_slack_rel"]
    for alpha in alphas:
        params = VladimirovParams(grid, alpha)
        env = norm_equivalence_envelope(params, alpha)
        worst = 0.0
        for _ in range(n_random):
            f = random_function(grid, rng)
            ha2 = h_alpha_norm(f, alpha) ** 2
            ags2 = l2_norm(f) ** 2 + ags_seminorm(f, alpha) ** 2
            h12 = h1_norm(f, params) ** 2
            for name, value in {
                "h_alpha_vs_h1": ha2 / h12,
                "ags_l2_vs_h1": ags2 / h12,
                "h_alpha_vs_ags_l2": ha2 / ags2,
            }.items():
                lo, hi = env[name]
                excess = max(lo - value, value - hi, 0.0) / hi
                worst = max(worst, excess)
        res.add(f"ratios_within_envelope_alpha={alpha}", slack, worst)
        res.info[f"envelope_alpha={alpha}"] = {k: list(v) for k, v in env.items()}
    return res


def resolvent_suite(
    params: VladimirovParams,
    m_values: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0),
    tau_values: tuple[float, ...] = (0.01, 0.1, 1.0),
    n_random: int = 3,
    seed: int = 0,
) -> SuiteResult:
    """Residual and constraint contracts of the proximal step; the linear
    case is matched against the exact spectral solve."""
    res = SuiteResult("resolvent")
    rng = np.random.default_rng(seed)
    grid = params.grid
    worst_resid, worst_gap, worst_lin = 0.0, 0.0, 0.0
    failures = []
    for m in m_values:
        nl = PowerLawNonlinearity(m)
        for tau in tau_values:
            for _ in range(n_random):
                f = random_function(grid, rng, real=True)
                try:
                    out = prox_step(params, nl, tau, f)
                except ProxConvergenceError as exc:
                    failures.append(f"m={m}, tau={tau}: {exc}")
                    continue
                worst_resid = max(worst_resid, out.residual_hminus1)
                worst_gap = max(worst_gap, out.constraint_gap)
                if m == 1.0:
                    exact = spectral_resolve(params, f, tau)
                    worst_lin = max(
                        worst_lin, float(np.max(np.abs(out.u.values - exact.values)))
                    )
    res.add("prox_residual_hminus1", TOLERANCES["prox_residual"], worst_resid)
    res.add("constraint_gap", TOLERANCES["prox_gap"], worst_gap)
    res.add("linear_case_vs_spectral", TOLERANCES["prox_linear_match"], worst_lin)
    if failures:
        res.add("prox_failures", 0.0, float(len(failures)), ok=False)
        res.info["failures"] = failures
    return res


def contraction_suite(
    params: VladimirovParams,
    cfg: SolverConfig,
    m_values: tuple[float, ...] = (0.5, 2.0),
    n_pairs: int = 20,
    seed: int = 0,
) -> SuiteResult:
    """Dual-norm distances between random trajectory pairs never increase."""
    res = SuiteResult("contraction")
    rng = np.random.default_rng(seed)
    grid = params.grid
    for m in m_values:
        nl = PowerLawNonlinearity(m)
        worst = -np.inf
        n_failed = 0
        for _ in range(n_pairs):
            u0 = random_function(grid, rng, real=True)
            v0 = random_function(grid, rng, real=True)
            try:
                worst = max(worst, contraction_gap(u0, v0, cfg, params, nl))
            except ProxConvergenceError:
                n_failed += 1
        if n_failed:
            res.add(f"trajectories_failed_m={m}", 0.0, float(n_failed), ok=False)
        if np.isfinite(worst):
            res.add(f"max_step_increase_m={m}", TOLERANCES["contraction"], worst)
    return res


def lyapunov_suite(
    params: VladimirovParams,
    cfg: SolverConfig,
    m_values: tuple[float, ...] = (0.5, 2.0, 3.0),
    n_traj: int = 3,
    seed: int = 0,
) -> SuiteResult:
    """Entropy and dual norm are non-increasing along every trajectory."""
    res = SuiteResult("lyapunov")
    rng = np.random.default_rng(seed)
    grid = params.grid
    for m in m_values:
        nl = PowerLawNonlinearity(m)
        worst_psi, worst_dual = -np.inf, -np.inf
        n_ok = 0
        for _ in range(n_traj):
            traj = run(random_function(grid, rng, real=True), cfg, params, nl)
            if not traj.ok:
                res.add(f"trajectory_failed_m={m}", 0.0, 1.0, ok=False)
                continue
            n_ok += 1
            worst_psi = max(worst_psi, float(np.max(np.diff(traj.psi))))
            worst_dual = max(worst_dual, float(np.max(np.diff(traj.hminus1))))
        if n_ok:
            res.add(f"psi_step_increase_m={m}", TOLERANCES["lyapunov_step"], worst_psi)
            res.add(f"hminus1_step_increase_m={m}", TOLERANCES["lyapunov_step"], worst_dual)
    return res


def convergence_suite(params: VladimirovParams, seed: int = 0) -> SuiteResult:
    """First-order accuracy against the exact linear flow, and decay of the
    weak-form defect under step refinement."""
    res = SuiteResult("convergence-order")
    rng = np.random.default_rng(seed)
    grid = params.grid
    u0 = random_function(grid, rng, real=True)
    taus = (0.1, 0.05, 0.025, 0.0125)
    nl1 = PowerLawNonlinearity(1.0)
    errors = []
    for tau in taus:
        cfg = SolverConfig(tau=tau, T=1.0)
        traj = run(u0, cfg, params, nl1)
        exact = linear_exact(u0, 1.0, params)
        errors.append(float(np.max(np.abs(traj.states[-1].values - exact.values))))
    slope, _ = np.polyfit(np.log(taus), np.log(errors), 1)
    res.add("order_m=1_lower", TOLERANCES["order_low"], float(slope), ok=slope >= TOLERANCES["order_low"])
    res.add("order_m=1_upper", TOLERANCES["order_high"], float(slope), ok=slope <= TOLERANCES["order_high"])
    res.info["errors_m=1"] = errors

    zeta = random_function(grid, rng, real=True)
    for m in (1.0, 2.0):
        nl = PowerLawNonlinearity(m)
        residuals = []
        for tau in (0.1, 0.05, 0.025):
            cfg = SolverConfig(tau=tau, T=1.0)
            traj = run(u0, cfg, params, nl)
            residuals.append(weak_residual(traj, bump_profile(1.0), zeta, params, nl))
        monotone = all(residuals[i + 1] < residuals[i] for i in range(len(residuals) - 1))
        res.add(f"weak_residual_decreasing_m={m}", 0.0, 0.0 if monotone else 1.0, ok=monotone)
        res.info[f"weak_residuals_m={m}"] = residuals
    return res


def corrupted_grid(grid: BallGrid, factor: float = 1.01) -> BallGrid:
    """Copy of the grid with its Haar weight scaled (negative control)."""
    bad = BallGrid(grid.p, grid.N, grid.K)
    object.__setattr__(bad, "haar_weight", bad.haar_weight * factor)
    return bad


def corrupted_params(params: VladimirovParams, factor: float = 1.01) -> VladimirovParams:
    """Copy of the parameters whose nonzero-shell symbols are scaled
    (negative control)."""
    table = params.symbols().copy()
    table[1:] *= factor
    return params.with_symbols(table)


def run_battery(
    p: int,
    N: int,
    K: int,
    alpha: float,
    m: float,
    tau: float,
    T: float,
    seed: int = 0,
    corruption: str | None = None,
    suites: list[str] | None = None,
) -> dict:
    """Run the verification battery at one configuration.

    ``corruption`` may be None, "symbol" or "haar"; a corrupted run is
    expected to fail and exists to prove the checks have teeth.
    """
    grid = BallGrid(p, N, K)
    if corruption == "haar":
        grid = corrupted_grid(grid)
    elif corruption not in (None, "symbol"):
        raise ValueError(f"unknown corruption mode {corruption!r}")
    params = VladimirovParams(grid, alpha)
    if corruption == "symbol":
        params = corrupted_params(params)
    cfg = SolverConfig(tau=tau, T=T)

    available = {
        "fourier": lambda: fourier_suite(grid, seed=seed),
        "diagonalization": lambda: diagonalization_suite(params, seed=seed),
        "arbitration": lambda: arbitration_suite(params),
        "eigenpairs": lambda: eigenpair_suite(params),
        "ags": lambda: ags_suite(grid, seed=seed),
        "equivalence": lambda: equivalence_suite(grid, seed=seed),
        "resolvent": lambda: resolvent_suite(params, seed=seed),
        "contraction": lambda: contraction_suite(params, cfg, seed=seed),
        "lyapunov": lambda: lyapunov_suite(params, cfg, seed=seed),
        "convergence": lambda: convergence_suite(params, seed=seed),
    }
    names = suites if suites is not None else list(available)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise ValueError(f"unknown suites: {unknown}")
    results = [available[name]() for name in names]
    return {
        "config": {
            "p": p,
            "N": N,
            "K": K,
            "alpha": alpha,
            "m": m,
            "tau": tau,
            "T": T,
            "seed": seed,
            "corruption": corruption,
        },
        "suites": [r.as_dict() for r in results],
        "all_passed": all(r.passed for r in results),
    }
