"""Exact indexing and arithmetic on the finite quotient of a p-adic ball.

The ball {|x|_p <= p^N} modulo the subgroup {|x|_p <= p^-K} is a cyclic
group of order M = p^(N+K).  The cell with index a in [0, M) stands for
the coset p^-N * a + B_-K, so group operations are integer arithmetic
mod M, and norms, characters and Haar weights are all exact.
"""

import math
from dataclasses import InitVar, dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DEFAULT_CELL_CAP",
    "ConfigError",
    "BallGrid",
    "is_prime",
    "valuation",
    "point_abs",
    "dual_norm",
    "group_sub",
    "character",
    "shell",
    "attainable_radii",
    "valuation_vector",
    "point_abs_vector",
    "dual_norm_vector",
]

DEFAULT_CELL_CAP = 2**20


class ConfigError(ValueError):
    """Invalid grid or experiment configuration."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class BallGrid:
    """Finite model of the ball of radius p^N at resolution p^-K.

    Cells are cosets of the subgroup of norm <= p^-K; there are
    M = p^(N+K) of them and each carries Haar measure p^-K.
    """

    p: int
    N: int
    K: int
    haar_weight: float = field(init=False, compare=False)
    max_cells: InitVar[int] = DEFAULT_CELL_CAP

    def __post_init__(self, max_cells: int) -> None:
        if not is_prime(self.p):
            raise ConfigError(f"p must be prime, got p={self.p}")
        if self.N + self.K < 1:
            raise ConfigError(
                f"need N + K >= 1 for a nontrivial grid, got N={self.N}, K={self.K}"
            )
        if self.p ** (self.N + self.K) > max_cells:
            raise ConfigError(
                f"cell count p^(N+K) = {self.p}^{self.N + self.K} exceeds the "
                f"cap {max_cells}"
            )
        object.__setattr__(self, "haar_weight", float(self.p) ** (-self.K))

    @property
    def M(self) -> int:
        return self.p ** (self.N + self.K)

    @property
    def measure(self) -> float:
        """Total Haar measure of the ball, p^N."""
        return float(self.p) ** self.N

    def check_index(self, a: int) -> None:
        if not 0 <= a < self.M:
            raise ValueError(f"index {a} outside [0, {self.M})")


def valuation(n: int, p: int) -> int:
    """Largest v with p^v dividing n.  Rejects n = 0 (infinite valuation)."""
    if n < 1:
        raise ValueError("valuation requires a positive integer")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def point_abs(grid: BallGrid, a: int) -> float:
    """p-adic norm of the cell a; the zero cell reports 0."""
    grid.check_index(a)
    if a == 0:
        return 0.0
    return float(grid.p) ** (grid.N - valuation(a, grid.p))


def dual_norm(grid: BallGrid, b: int) -> float:
    """Norm of the dual class indexed by b; 0 for the trivial character."""
    grid.check_index(b)
    if b == 0:
        return 0.0
    return float(grid.p) ** (grid.K - valuation(b, grid.p))


def group_sub(grid: BallGrid, a1: int, a2: int) -> int:
    """Cell index of x - y; exact because cosets subtract coset-wise."""
    grid.check_index(a1)
    grid.check_index(a2)
    return (a1 - a2) % grid.M


def character(grid: BallGrid, a: int, b: int) -> complex:
    """Value exp(2*pi*i*{x xi}_p) of the additive character pairing cell a
    with dual class b; reduces to a unit root of order dividing M."""
    grid.check_index(a)
    grid.check_index(b)
    return complex(np.exp(2j * np.pi * ((a * b) % grid.M) / grid.M))


def attainable_radii(grid: BallGrid) -> list[float]:
    """All norms a cell can have: 0 and p^(N-v) for v = 0..N+K-1."""
    return [0.0] + [float(grid.p) ** (grid.N - v) for v in range(grid.N + grid.K)]


def shell(grid: BallGrid, radius: float) -> np.ndarray:
    """Indices of all cells with the given norm; {0} for radius 0."""
    if radius == 0:
        return np.array([0], dtype=np.int64)
    for v in range(grid.N + grid.K):
        r = float(grid.p) ** (grid.N - v)
        if math.isclose(radius, r, rel_tol=1e-12):
            pv = grid.p**v
            members = np.arange(pv, grid.M, pv, dtype=np.int64)
            return members[members % (pv * grid.p) != 0]
    raise ValueError(f"radius {radius} is not attainable on this grid")


@lru_cache(maxsize=64)
def valuation_vector(grid: BallGrid) -> np.ndarray:
    """v_p(a) for a = 1..M-1; the entry for a = 0 is the sentinel N+K."""
    nk = grid.N + grid.K
    v = np.zeros(grid.M, dtype=np.int64)
    v[0] = nk
    rem = np.arange(grid.M, dtype=np.int64)
    for _ in range(nk):
        mask = (rem != 0) & (rem % grid.p == 0)
        v[mask] += 1
        rem[mask] //= grid.p
    v.flags.writeable = False
    return v


@lru_cache(maxsize=64)
def point_abs_vector(grid: BallGrid) -> np.ndarray:
    """point_abs for every cell at once (0 at index 0)."""
    v = valuation_vector(grid)
    out = float(grid.p) ** (grid.N - v.astype(np.float64))
    out[0] = 0.0
    out.flags.writeable = False
    return out


@lru_cache(maxsize=64)
def dual_norm_vector(grid: BallGrid) -> np.ndarray:
    """dual_norm for every dual index at once (0 at index 0)."""
    v = valuation_vector(grid)
    out = float(grid.p) ** (grid.K - v.astype(np.float64))
    out[0] = 0.0
    out.flags.writeable = False
    return out
