"""Backward recursion for the batched bandit on the invariant scale.

States live on the lattice (k1, k2, u): k_l batches processed on arm l,
u on a uniform grid.  The value r(u, t1, t2) of the optimally controlled
remainder satisfies

    r = min_l [ eps * g_l(u, t1, t2) + E r(u - x, ..t_l + eps..) ],

with g_l the prior-weighted one-step loss and x a centered Gaussian of
variance eps*t_other^2/(t*(t+eps)).  Terminal diagonal t1 + t2 = 1 is zero.
The sweep walks anti-diagonals k1 + k2 = K from 1/eps down to 2 keeping two
slices in memory; the first two batches are forced turn-by-turn, so the
Bayes risk assembles from the slice (eps, eps):

    risk = 2*eps*sum_i pi_i w_i + E_{N(0, eps/2)} r(u, eps, eps).

Convolutions use discrete Gaussian weights at grid offsets (no interpolation)
with Dirichlet-0 reads beyond +-u_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConfigurationError,
    InternalError,
    SymmetricPrior,
    UGrid,
    centered_gaussian_expectation,
    convolve_zero_padded,
    gaussian_kernel,
    loss_profile,
)


@dataclass(frozen=True)
class DpConfig:
    """Solver configuration: batch fraction, prior and u-grid."""

    epsilon: float
    prior: SymmetricPrior
    grid: UGrid = field(default_factory=UGrid)

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 0.5):
            raise ConfigurationError(f"epsilon must lie in (0, 0.5], got {self.epsilon}")
        n = round(1.0 / self.epsilon)
        if abs(n * self.epsilon - 1.0) > 1e-9:
            raise ConfigurationError(f"1/epsilon must be an integer, got 1/{self.epsilon}")
        if self.n_packets > 2 and not self._grid_resolves_some_kernel():
            raise ConfigurationError(
                f"du={self.grid.du} exceeds 3x the largest transition sigma at every "
                "interior stage; the grid cannot resolve any kernel"
            )

    @property
    def n_packets(self) -> int:
        return round(1.0 / self.epsilon)

    def _grid_resolves_some_kernel(self) -> bool:
        eps = self.epsilon
        for K in range(2, self.n_packets):
            t = K * eps
            var_max = eps * t * t / (t * (t + eps))
            if self.grid.du <= 3.0 * math.sqrt(var_max):
                return True
        return False


@dataclass
class ValueTable:
    """Value slices over the (k1, k2) lattice.

    slices maps (k1, k2) to the value row over the u-grid.  A full solve
    with keep_values=True retains every diagonal from 2 to n_packets; the
    memory-lean default keeps only (1, 1), which is all the risk assembly
    needs.  The prior the table was built under travels with it so that
    strategies can be re-derived.
    """

    epsilon: float
    grid: UGrid
    n_packets: int
    prior: SymmetricPrior
    slices: dict[tuple[int, int], np.ndarray]

    def value_at(self, u: float, k1: int, k2: int) -> float:
        """Linear interpolation in u; reads beyond +-u_max return 0."""
        row = self.slices.get((k1, k2))
        if row is None:
            raise ValueError(f"value table does not retain the slice ({k1}, {k2})")
        return float(np.interp(u, self.grid.points, row, left=0.0, right=0.0))


@dataclass
class StrategyTable:
    """argmin actions on the decision lattice 2 <= k1 + k2 <= n_packets - 1.

    actions[k1, k2, i] is 1 or 2 (0 marks states outside the lattice).
    Value ties resolve to action 1.  The two initial batches are forced
    turn-by-turn: arm 1 first, then the unplayed arm.
    """

    epsilon: float
    grid: UGrid
    n_packets: int
    actions: np.ndarray

    def action_at(self, k1: int, k2: int, u: float) -> int:
        n = k1 + k2
        if n == 0:
            return 1
        if n == 1:
            return 2 if k2 == 0 else 1
        if not (2 <= n <= self.n_packets - 1):
            raise ValueError(f"({k1}, {k2}) is not a decision state")
        a = int(self.actions[k1, k2, self.grid.nearest_index(u)])
        if a == 0:
            raise ValueError(f"strategy is undefined at state ({k1}, {k2})")
        return a


@dataclass
class SolveOutput:
    value: ValueTable
    strategy: StrategyTable | None
    bayes_risk: float
    bayes_risk_no_initial: float


def _diagonal_step(
    prior: SymmetricPrior,
    eps: float,
    grid: UGrid,
    K: int,
    successor: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """One backward step: values and argmin actions on diagonal k1 + k2 = K
    from the successor diagonal K + 1 (rows indexed by k1)."""
    u = grid.points
    t = K * eps
    # kernel for a j-batch opposite arm; the same set serves both actions
    kernels = [gaussian_kernel(eps * (j * eps) ** 2 / (t * (t + eps)), grid) for j in range(K + 1)]
    cur = np.empty((K + 1, u.size))
    act = np.empty((K + 1, u.size), dtype=np.int8)
    for k1 in range(K + 1):
        k2 = K - k1
        g1 = loss_profile(prior, 1, u, k1 * eps, k2 * eps)
        g2 = g1[::-1]  # sign flip in u swaps the actions
        r1 = eps * g1 + convolve_zero_padded(successor[k1 + 1], kernels[k2])
        r2 = eps * g2 + convolve_zero_padded(successor[k1], kernels[k1])
        take1 = r1 <= r2
        cur[k1] = np.where(take1, r1, r2)
        act[k1] = np.where(take1, 1, 2)
    if np.isnan(cur).any():
        raise InternalError(f"NaN in value slice at diagonal {K}")
    return cur, act


def solve_invariant(
    config: DpConfig, *, keep_values: bool = False, keep_strategy: bool = True
) -> SolveOutput:
    """Backward sweep over all anti-diagonals; returns value, strategy and
    the assembled Bayes risk.

    keep_values retains every slice (needed by extract_strategy and
    table-level diagnostics); the default keeps only (1, 1).  keep_strategy
    drops the action table for memory-lean risk sweeps.
    """
    P = config.n_packets
    grid, prior, eps = config.grid, config.prior, config.epsilon
    n_u = grid.n_points

    slices: dict[tuple[int, int], np.ndarray] = {}
    actions = np.zeros((P + 1, P + 1, n_u), dtype=np.int8) if keep_strategy else None

    succ = np.zeros((P + 1, n_u))
    if keep_values:
        for k1 in range(P + 1):
            slices[(k1, P - k1)] = succ[k1]
    for K in range(P - 1, 1, -1):
        cur, act = _diagonal_step(prior, eps, grid, K, succ)
        if keep_values:
            for k1 in range(K + 1):
                slices[(k1, K - k1)] = cur[k1]
        if keep_strategy:
            for k1 in range(K + 1):
                actions[k1, K - k1] = act[k1]
        succ = cur
    # after the loop succ is diagonal 2 (or the terminal one when P == 2);
    # its row 1 is the (eps, eps) slice the risk assembly needs
    slices.setdefault((1, 1), succ[1])
    value = ValueTable(epsilon=eps, grid=grid, n_packets=P, prior=prior, slices=slices)
    total, no_initial = assemble_bayes_risk(value, prior)
    strategy = (
        StrategyTable(epsilon=eps, grid=grid, n_packets=P, actions=actions)
        if keep_strategy
        else None
    )
    return SolveOutput(
        value=value, strategy=strategy, bayes_risk=total, bayes_risk_no_initial=no_initial
    )


def assemble_bayes_risk(value: ValueTable, prior: SymmetricPrior) -> tuple[float, float]:
    """(total, no_initial): quadrature of the (eps, eps) slice against the
    variance-eps/2 Gaussian, plus the closed-form turn-by-turn term
    2*eps*sum_i pi_i w_i for the total."""
    row = value.slices.get((1, 1))
    if row is None:
        raise ValueError("value table must contain the slice (1, 1)")
    no_initial = centered_gaussian_expectation(row, value.grid, 0.5 * value.epsilon)
    total = no_initial + 2.0 * value.epsilon * prior.mean_w
    if not (math.isfinite(total) and total >= 0.0):
        raise InternalError(f"assembled risk is not a nonnegative number: {total}")
    return total, no_initial


def extract_strategy(value: ValueTable) -> StrategyTable:
    """Re-derive the argmin actions from a fully retained value table by
    replaying the diagonal step against the stored successor slices."""
    P = value.n_packets
    missing = [
        (k1, K - k1)
        for K in range(2, P + 1)
        for k1 in range(K + 1)
        if (k1, K - k1) not in value.slices
    ]
    if missing:
        raise ValueError(
            f"value table is missing {len(missing)} slices (solve with keep_values=True)"
        )
    actions = np.zeros((P + 1, P + 1, value.grid.n_points), dtype=np.int8)
    for K in range(P - 1, 1, -1):
        succ = np.stack([value.slices[(k1, K + 1 - k1)] for k1 in range(K + 2)])
        _, act = _diagonal_step(value.prior, value.epsilon, value.grid, K, succ)
        for k1 in range(K + 1):
            actions[k1, K - k1] = act[k1]
    return StrategyTable(
        epsilon=value.epsilon, grid=value.grid, n_packets=P, actions=actions
    )


def solve_dimensional(
    horizon: int,
    batch: int,
    prior: SymmetricPrior,
    grid: UGrid | None = None,
    *,
    keep_values: bool = False,
    keep_strategy: bool = True,
) -> "DimensionalSolution":
    """Solve the dimensional problem (item horizon, batch size, prior on the
    half-gap v with support C) through the invariant recursion.

    Risks and values scale by sqrt(horizon); the lattice maps via
    k_l = n_l / batch and u = U / sqrt(horizon).
    """
    if batch < 1 or horizon < 2 * batch:
        raise ConfigurationError("need batch >= 1 and horizon >= 2 * batch")
    if horizon % batch != 0:
        raise ConfigurationError("horizon must be a multiple of the batch size")
    root = math.sqrt(horizon)
    inv_prior = SymmetricPrior(
        tuple((w * root, p) for w, p in prior.atoms),
        c=prior.c * root if math.isfinite(prior.c) else math.inf,
    )
    cfg = DpConfig(batch / horizon, inv_prior, grid if grid is not None else UGrid())
    out = solve_invariant(cfg, keep_values=keep_values, keep_strategy=keep_strategy)
    return DimensionalSolution(
        horizon=horizon,
        batch=batch,
        bayes_risk=root * out.bayes_risk,
        bayes_risk_no_initial=root * out.bayes_risk_no_initial,
        invariant=out,
    )


@dataclass
class DimensionalSolution:
    """Invariant solve rescaled to item units."""

    horizon: int
    batch: int
    bayes_risk: float
    bayes_risk_no_initial: float
    invariant: SolveOutput

    def action_at(self, U: float, n1: int, n2: int) -> int:
        self._check_counts(n1, n2)
        root = math.sqrt(self.horizon)
        return self.invariant.strategy.action_at(n1 // self.batch, n2 // self.batch, U / root)

    def value_at(self, U: float, n1: int, n2: int) -> float:
        self._check_counts(n1, n2)
        root = math.sqrt(self.horizon)
        return root * self.invariant.value.value_at(U / root, n1 // self.batch, n2 // self.batch)

    def _check_counts(self, n1: int, n2: int) -> None:
        for n in (n1, n2):
            if n % self.batch != 0:
                raise ValueError(f"item count {n} is not a multiple of the batch size")
