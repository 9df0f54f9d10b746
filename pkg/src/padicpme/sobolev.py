"""Fractional Sobolev norm families on the ball grid.

Four equivalent scales of smoothness for the same function: the Fourier
form with weight (1+||xi||^2)^alpha, the Gagliardo (AGS) double-sum
seminorm with its multiplier representation, and the operator form
domain H_1 with its dual H_-1.  All four are diagonal in the character
basis, so equivalence constants on a fixed grid can be certified by
extremizing ratios of multiplier sequences rather than estimated.

Note on normalization: with the transform scaled so that Plancherel
reads p^-N ||f||^2 = sum |coeffs|^2, the multiplier form of the squared
Gagliardo seminorm carries the total ball measure,
[f]_s^2 = p^N sum_b |coeffs(b)|^2 A_s(xi_b).
"""

from dataclasses import dataclass

import numpy as np

from .grid import BallGrid, dual_norm_vector, point_abs_vector
from .harmonic import GridFunction, forward, l2_norm
from .vladimirov import VladimirovParams

__all__ = [
    "h_alpha_norm",
    "ags_seminorm",
    "ags_multiplier",
    "ags_multipliers",
    "ags_multiplier_bruteforce",
    "ags_via_multiplier",
    "equivalence_constants",
    "h1_norm",
    "hminus1_norm",
    "h1_full_norm",
    "hminus1_full_norm",
    "hminus1_inner",
    "norm_equivalence_envelope",
    "NormReport",
    "norm_report",
]


def _check_s(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError(f"seminorm order must lie in (0, 1), got s={s}")


def h_alpha_norm(f: GridFunction, alpha: float) -> float:
    """Fourier-weighted Sobolev norm with weight (1 + ||xi||^2)^alpha."""
    if alpha <= 0:
        raise ValueError(f"order must be positive, got alpha={alpha}")
    dn = dual_norm_vector(f.grid)
    coeffs = forward(f).coeffs
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2 * (1.0 + dn**2) ** alpha)))


def ags_seminorm(f: GridFunction, s: float) -> float:
    """Gagliardo seminorm by the direct double sum over cell pairs.

    Exact for resolution-K functions: same-cell pairs contribute nothing
    and |x - y|_p is constant on every cross-cell pair.
    """
    _check_s(s)
    g = f.grid
    pa = point_abs_vector(g)
    vals = f.values
    total = 0.0
    for d in range(1, g.M):
        diff = vals - np.roll(vals, d)  # pairs at cell-difference d
        total += float(np.sum(np.abs(diff) ** 2)) / pa[d] ** (2 * s + 1)
    return float(np.sqrt(total * g.haar_weight**2))


def ags_multipliers(grid: BallGrid, s: float) -> np.ndarray:
    """A_s(xi) for every dual index, by exact shell summation.

    The integrand vanishes on shells where the character is trivial; the
    shell at p^k ||xi|| = p contributes 2 p^k (1 - 1/p) + 2 p^(k-1) and
    every larger shell contributes 2 p^k (1 - 1/p).
    """
    _check_s(s)
    p = float(grid.p)
    out = np.zeros(grid.M)
    for ell in range(1 - grid.N, grid.K + 1):  # dual norm p^ell
        k0 = 1 - ell
        total = p ** (-k0 * (2 * s + 1)) * (2 * p**k0 * (1 - 1 / p) + 2 * p ** (k0 - 1))
        for k in range(k0 + 1, grid.N + 1):
            total += p ** (-k * (2 * s + 1)) * 2 * p**k * (1 - 1 / p)
        out[_dual_shell_mask(grid, ell)] = total
    return out


def _dual_shell_mask(grid: BallGrid, ell: int) -> np.ndarray:
    dn = dual_norm_vector(grid)
    return np.isclose(dn, float(grid.p) ** ell, rtol=1e-12)


def ags_multiplier(grid: BallGrid, s: float, b: int) -> float:
    """A_s(xi) for one dual index; 0 for the trivial class."""
    grid.check_index(b)
    if b == 0:
        return 0.0
    return float(ags_multipliers(grid, s)[b])


def ags_multiplier_bruteforce(grid: BallGrid, s: float, b: int) -> float:
    """A_s(xi) recomputed as the literal Haar sum of |chi(z xi)-1|^2 / |z|^(2s+1)
    over the grid cells; the independent oracle for the shell formula."""
    _check_s(s)
    grid.check_index(b)
    if b == 0:
        return 0.0
    a = np.arange(1, grid.M)
    chi = np.exp(2j * np.pi * ((a * b) % grid.M) / grid.M)
    pa = point_abs_vector(grid)[1:]
    return float(np.sum(np.abs(chi - 1.0) ** 2 / pa ** (2 * s + 1)) * grid.haar_weight)


def ags_via_multiplier(f: GridFunction, s: float) -> float:
    """Gagliardo seminorm through the spectral side (see module note on
    the ball-measure factor)."""
    _check_s(s)
    g = f.grid
    coeffs = forward(f).coeffs
    total = float(g.p) ** g.N * np.sum(np.abs(coeffs) ** 2 * ags_multipliers(g, s))
    return float(np.sqrt(total))


def equivalence_constants(grid: BallGrid, s: float) -> tuple[float, float]:
    """(C1, C2) with C2 ||xi||^2s <= A_s(xi) <= C1 ||xi||^2s on all duals.

    C2 = 2 p^-2s in closed form (only the shell at norm p survives in the
    defining integral); C1 is the certified maximum of the ratio over the
    finitely many dual norms of the grid.
    """
    _check_s(s)
    dn = dual_norm_vector(grid)
    ratios = ags_multipliers(grid, s)[1:] / dn[1:] ** (2 * s)
    c2 = 2.0 * float(grid.p) ** (-2 * s)
    return float(np.max(ratios)), c2


def h1_norm(f: GridFunction, params: VladimirovParams) -> float:
    """Operator form norm: sum of eigenvalue-weighted squared coefficients
    in the orthonormal character basis."""
    coeffs = forward(f).coeffs
    scale = float(f.grid.p) ** f.grid.N
    return float(np.sqrt(scale * np.sum(params.symbols() * np.abs(coeffs) ** 2)))


def hminus1_norm(f: GridFunction, params: VladimirovParams) -> float:
    """Dual norm: inverse-eigenvalue weights in the same basis."""
    coeffs = forward(f).coeffs
    scale = float(f.grid.p) ** f.grid.N
    return float(np.sqrt(scale * np.sum(np.abs(coeffs) ** 2 / params.symbols())))


def h1_full_norm(f: GridFunction, params: VladimirovParams) -> float:
    """Variant from the scalar product (u, v) + (Du, v); equivalent to
    h1_norm with per-mode ratio 1 + 1/symbol in (1, 1 + 1/lambda0]."""
    return float(np.sqrt(l2_norm(f) ** 2 + h1_norm(f, params) ** 2))


def hminus1_full_norm(f: GridFunction, params: VladimirovParams) -> float:
    """Variant from the scalar product (f, g) + (D^-1 f, g)."""
    return float(np.sqrt(l2_norm(f) ** 2 + hminus1_norm(f, params) ** 2))


def hminus1_inner(f: GridFunction, g: GridFunction, params: VladimirovParams) -> complex:
    """Dual-space inner product, equal to (D^-1 f, g) in L2."""
    cf = forward(f).coeffs
    cg = forward(g).coeffs
    scale = float(f.grid.p) ** f.grid.N
    return complex(scale * np.sum(cf * np.conj(cg) / params.symbols()))


def norm_equivalence_envelope(
    params: VladimirovParams, s: float
) -> dict[str, tuple[float, float]]:
    """Certified squared-ratio envelopes between the three norm scales.

    In coordinates where the L2 norm is the plain coefficient sum, the
    squared norms act diagonally with multipliers p^-N (1+||xi||^2)^s,
    1 + A_s(xi) and symbol(xi); the extreme ratios of those sequences
    bound the ratio of squared norms for every function on the grid.
    """
    _check_s(s)
    g = params.grid
    mu_halpha = float(g.p) ** (-g.N) * (1.0 + dual_norm_vector(g) ** 2) ** s
    mu_ags = 1.0 + ags_multipliers(g, s)
    mu_h1 = params.symbols()
    out = {}
    for name, (x, y) in {
        "h_alpha_vs_h1": (mu_halpha, mu_h1),
        "ags_l2_vs_h1": (mu_ags, mu_h1),
        "h_alpha_vs_ags_l2": (mu_halpha, mu_ags),
    }.items():
        r = x / y
        out[name] = (float(np.min(r)), float(np.max(r)))
    return out


@dataclass
class NormReport:
    """All norm families evaluated on one function, with the certified
    constants for the grid they live on."""

    l2: float
    h_alpha: float
    ags: float
    ags_multiplier_form: float
    h1: float
    hminus1: float
    h1_full: float
    hminus1_full: float
    C1_bound: float
    C2_exact: float
    envelope: dict[str, tuple[float, float]]


def norm_report(f: GridFunction, params: VladimirovParams, s: float) -> NormReport:
    c1, c2 = equivalence_constants(f.grid, s)
    return NormReport(
        l2=l2_norm(f),
        h_alpha=h_alpha_norm(f, s),
        ags=ags_seminorm(f, s),
        ags_multiplier_form=ags_via_multiplier(f, s),
        h1=h1_norm(f, params),
        hminus1=hminus1_norm(f, params),
        h1_full=h1_full_norm(f, params),
        hminus1_full=hminus1_full_norm(f, params),
        C1_bound=c1,
        C2_exact=c2,
        envelope=norm_equivalence_envelope(params, s),
    )
