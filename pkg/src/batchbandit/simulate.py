"""Monte-Carlo validation of strategy tables.

Two data models share one lockstep driver: batched Bernoulli processing
(packet income = a binomial count scaled by (D*M)**-0.5, D = p*(1-p)) and
the direct Gaussian bandit (unit-variance packet incomes, mean gap
2*d*N**-0.5).  Common mean shifts cancel in the history statistic
U = (X1*k2 - X2*k1)/(k1 + k2), so neither model centers its incomes.
Losses are normalized so both models estimate the same quantity as
strategy-eval: (D*T)**-0.5 * (T*p_best - total successes), respectively
N**-0.5 * (N*m_best - total income).

Replications run in fixed-size lockstep batches, one spawned SeedSequence
child per batch, so results are reproducible bit for bit per seed and
streams stay independent across batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, InternalError
from .dp import StrategyTable

# replications per lockstep batch; fixed so a seed pins every draw
BATCH_REPS = 4096


@dataclass(frozen=True)
class BatchTrialConfig:
    """Bernoulli batch-processing trial.

    n_items plays T, batch_size plays M; the success probabilities are
    p +- d*sqrt(D/n_items) with D = p*(1-p).  orientation fixes which arm
    is better (+1: arm 1, -1: arm 2); None draws it per replication with
    probability 1/2, so the loss mean estimates the Bayes loss under the
    symmetric two-point prior.  per_item draws every Bernoulli item instead
    of one binomial count per packet (parity demonstrations only).
    force_initial=False skips the forced turn-by-turn stage and consults
    the table from the first packet (diagnostics with injected tables).
    """

    n_items: int
    batch_size: int
    p: float
    d: float
    replications: int
    seed: int
    per_item: bool = False
    orientation: int | None = None
    force_initial: bool = True

    def __post_init__(self):
        if self.batch_size < 1 or self.n_items % self.batch_size != 0:
            raise ConfigurationError(
                f"n_items={self.n_items} must be a positive multiple of "
                f"batch_size={self.batch_size}"
            )
        if self.n_packets < 2:
            raise ConfigurationError("need at least two packets")
        if not (0.0 < self.p < 1.0):
            raise ConfigurationError(f"p must lie in (0, 1), got {self.p}")
        if self.d < 0.0:
            raise ConfigurationError(f"d must be nonnegative, got {self.d}")
        for q in (self.p + self.delta, self.p - self.delta):
            if not (0.0 < q < 1.0):
                raise ConfigurationError(
                    f"arm probability {q} leaves (0, 1); shrink d or move p"
                )
        if self.replications < 1:
            raise ConfigurationError("need at least one replication")
        if self.orientation not in (None, 1, -1):
            raise ConfigurationError("orientation must be None, +1 or -1")

    @property
    def n_packets(self) -> int:
        return self.n_items // self.batch_size

    @property
    def D(self) -> float:
        return self.p * (1.0 - self.p)

    @property
    def delta(self) -> float:
        """Half the success-probability gap, d*sqrt(D/n_items)."""
        return self.d * math.sqrt(self.D / self.n_items)


@dataclass(frozen=True)
class TrialResult:
    normalized_loss_mean: float
    standard_error: float
    replications: int
    raw_losses: np.ndarray | None = None


def _check_lattice(strategy: StrategyTable, n_packets: int) -> None:
    if strategy.n_packets != n_packets:
        raise ConfigurationError(
            f"strategy lattice has {strategy.n_packets} packets, the trial has {n_packets}"
        )


def _batch_sizes(replications: int):
    full, rest = divmod(replications, BATCH_REPS)
    return [BATCH_REPS] * full + ([rest] if rest else [])


def _step_actions(strategy, k1, k2, X1, X2, step, root_n, force_initial):
    """Vector of actions for one lockstep step across a replication batch."""
    n = k1.size
    if force_initial and step == 0:
        return np.ones(n, dtype=np.int8)
    if force_initial and step == 1:
        return np.full(n, 2, dtype=np.int8)
    if step == 0:
        u = np.zeros(n)
    else:
        u = (X1 * k2 - X2 * k1) / (step * root_n)
    iu = strategy.grid.nearest_index(u)
    a = strategy.actions[k1, k2, iu]
    if (a == 0).any():
        raise ConfigurationError(
            f"strategy table is undefined at a state reached in step {step}"
        )
    return a


def _reduce(losses: np.ndarray, keep: bool) -> TrialResult:
    mean = float(np.mean(losses))
    se = float(np.std(losses, ddof=1) / math.sqrt(losses.size)) if losses.size > 1 else 0.0
    if not math.isfinite(mean):
        raise InternalError("simulation produced a non-finite loss mean")
    return TrialResult(
        normalized_loss_mean=mean,
        standard_error=se,
        replications=losses.size,
        raw_losses=losses if keep else None,
    )


def simulate_bernoulli(
    cfg: BatchTrialConfig, strategy: StrategyTable, *, keep_losses: bool = False
) -> TrialResult:
    """Batched Bernoulli trial driven by a strategy table; see BatchTrialConfig."""
    N, M = cfg.n_packets, cfg.batch_size
    _check_lattice(strategy, N)
    root_n = math.sqrt(N)
    xi_scale = 1.0 / math.sqrt(cfg.D * M)
    loss_scale = 1.0 / math.sqrt(cfg.D * cfg.n_items)
    p_best = cfg.p + cfg.delta

    losses = np.empty(cfg.replications)
    offset = 0
    children = np.random.SeedSequence(cfg.seed).spawn(len(_batch_sizes(cfg.replications)))
    for n, child in zip(_batch_sizes(cfg.replications), children):
        rng = np.random.default_rng(child)
        if cfg.orientation is None:
            v = rng.integers(0, 2, size=n) * 2.0 - 1.0
        else:
            v = np.full(n, float(cfg.orientation))
        p1 = cfg.p + v * cfg.delta
        p2 = cfg.p - v * cfg.delta
        X1 = np.zeros(n)
        X2 = np.zeros(n)
        k1 = np.zeros(n, dtype=np.int64)
        k2 = np.zeros(n, dtype=np.int64)
        successes = np.zeros(n, dtype=np.int64)
        for step in range(N):
            a = _step_actions(strategy, k1, k2, X1, X2, step, root_n, cfg.force_initial)
            pk = np.where(a == 1, p1, p2)
            if cfg.per_item:
                counts = rng.binomial(1, pk, size=(M, n)).sum(axis=0)
            else:
                counts = rng.binomial(M, pk)
            xi = counts * xi_scale
            on1 = a == 1
            X1 += np.where(on1, xi, 0.0)
            X2 += np.where(on1, 0.0, xi)
            k1 += on1
            k2 += ~on1
            successes += counts
        losses[offset : offset + n] = loss_scale * (cfg.n_items * p_best - successes)
        offset += n
    return _reduce(losses, keep_losses)


def simulate_gaussian(
    n_packets: int,
    d: float,
    strategy: StrategyTable,
    replications: int,
    seed: int,
    *,
    orientation: int | None = None,
    force_initial: bool = True,
    keep_losses: bool = False,
) -> TrialResult:
    """Direct Gaussian bandit: unit-variance packet incomes with means
    +-d/sqrt(n_packets), same normalization and lockstep driver."""
    if n_packets < 2:
        raise ConfigurationError("need at least two packets")
    if d < 0.0:
        raise ConfigurationError(f"d must be nonnegative, got {d}")
    if replications < 1:
        raise ConfigurationError("need at least one replication")
    if orientation not in (None, 1, -1):
        raise ConfigurationError("orientation must be None, +1 or -1")
    _check_lattice(strategy, n_packets)
    root_n = math.sqrt(n_packets)
    m_gap_half = d / root_n
    losses = np.empty(replications)
    offset = 0
    children = np.random.SeedSequence(seed).spawn(len(_batch_sizes(replications)))
    for n, child in zip(_batch_sizes(replications), children):
        rng = np.random.default_rng(child)
        if orientation is None:
            v = rng.integers(0, 2, size=n) * 2.0 - 1.0
        else:
            v = np.full(n, float(orientation))
        m1 = v * m_gap_half
        m2 = -v * m_gap_half
        X1 = np.zeros(n)
        X2 = np.zeros(n)
        k1 = np.zeros(n, dtype=np.int64)
        k2 = np.zeros(n, dtype=np.int64)
        income = np.zeros(n)
        for step in range(n_packets):
            a = _step_actions(strategy, k1, k2, X1, X2, step, root_n, force_initial)
            xi = rng.normal(np.where(a == 1, m1, m2), 1.0)
            on1 = a == 1
            X1 += np.where(on1, xi, 0.0)
            X2 += np.where(on1, 0.0, xi)
            k1 += on1
            k2 += ~on1
            income += xi
        losses[offset : offset + n] = (n_packets * m_gap_half - income) / root_n
        offset += n
    return _reduce(losses, keep_losses)
