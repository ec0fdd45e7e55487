"""Core types and primitives for the batched Gaussian two-armed bandit.

Two arms produce unit-variance normal packet incomes whose means differ by an
unknown gap.  After n1 + n2 processed fractions the whole history is
compressed into the sufficient statistic

    u  = (X1*n2 - X2*n1) / (n1 + n2) * N**-0.5,   t_l = n_l / N,

where X_l is the cumulative income on arm l and N the item horizon.  Priors
on the scaled half-gap w are symmetric and discrete: mass pi_i/2 at +-w_i.
All solvers in this package operate on the invariant scale (u, t1, t2) with
batch fraction epsilon = M/N and map back to item units by a sqrt(N) factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# exp() arguments are clipped here; the clipped branch is never the minimum
# of the two actions, so the clip cannot flip a decision
EXP_CLIP = 700.0


class ConfigurationError(ValueError):
    """Invalid configuration or input file (CLI exit code 2)."""


class InternalError(RuntimeError):
    """Numerical corruption on valid input, e.g. NaN (CLI exit code 1)."""


@dataclass(frozen=True)
class DimensionalParams:
    """Arm means and the half-gap bound C of the dimensional problem."""

    m1: float
    m2: float
    C: float

    def __post_init__(self):
        if not (math.isfinite(self.m1) and math.isfinite(self.m2)):
            raise ConfigurationError("arm means must be finite")
        if not (self.C > 0.0):
            raise ConfigurationError("support bound C must be positive")
        if abs(self.m1 - self.m2) > 2.0 * self.C + 1e-12:
            raise ConfigurationError(
                f"|m1 - m2| = {abs(self.m1 - self.m2)} exceeds 2*C = {2.0 * self.C}"
            )

    @property
    def mid(self) -> float:
        return 0.5 * (self.m1 + self.m2)

    @property
    def half_gap(self) -> float:
        return 0.5 * (self.m1 - self.m2)


@dataclass(frozen=True)
class SymmetricPrior:
    """Symmetric discrete prior on the scaled half-gap.

    atoms: tuple of (w_i, pi_i) with w_i > 0 distinct and sum(pi_i) = 1,
    meaning mass pi_i/2 at +w_i and pi_i/2 at -w_i.  c bounds the support
    (may be +inf; atoms only need w_i <= c).
    """

    atoms: tuple[tuple[float, float], ...]
    c: float = math.inf

    def __post_init__(self):
        atoms = tuple((float(w), float(p)) for w, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ConfigurationError("prior needs at least one atom")
        ws = [w for w, _ in atoms]
        if any(not math.isfinite(w) or w <= 0.0 for w in ws):
            raise ConfigurationError("atom positions must be positive and finite")
        if len(set(ws)) != len(ws):
            raise ConfigurationError("atom positions must be distinct")
        if any(p <= 0.0 for _, p in atoms):
            raise ConfigurationError("atom weights must be positive")
        if not (self.c > 0.0):
            raise ConfigurationError("support bound c must be positive")
        if max(ws) > self.c + 1e-12:
            raise ConfigurationError(f"atom position {max(ws)} exceeds support bound c={self.c}")
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"atom weights must sum to 1, got {total}")

    @classmethod
    def two_point(cls, d: float, c: float = math.inf) -> "SymmetricPrior":
        """Prior concentrated at +-d with equal mass."""
        return cls(((float(d), 1.0),), c=c)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def mean_w(self) -> float:
        """sum_i pi_i w_i; the initial turn-by-turn stage costs 2*eps times this."""
        return float(np.dot(self.positions, self.weights))


@dataclass(frozen=True)
class UGrid:
    """Uniform symmetric grid on the history statistic u.

    u_max snaps up to the nearest multiple of du, so the grid always contains
    0 and the requested range.  Reads beyond +-u_max are treated as 0 by the
    solvers (Dirichlet truncation).
    """

    u_max: float = 4.0
    du: float = 0.01

    def __post_init__(self):
        if not (self.du > 0.0 and math.isfinite(self.du)):
            raise ConfigurationError("du must be positive and finite")
        if not (self.u_max > 0.0 and math.isfinite(self.u_max)):
            raise ConfigurationError("u_max must be positive and finite")
        n_half = int(round(self.u_max / self.du))
        if abs(n_half * self.du - self.u_max) > 1e-9 * max(1.0, self.u_max):
            n_half = int(math.ceil(self.u_max / self.du - 1e-12))
        if n_half < 1:
            n_half = 1
        object.__setattr__(self, "u_max", n_half * self.du)

    @property
    def n_half(self) -> int:
        return int(round(self.u_max / self.du))

    @property
    def n_points(self) -> int:
        return 2 * self.n_half + 1

    @cached_property
    def points(self) -> np.ndarray:
        return self.du * np.arange(-self.n_half, self.n_half + 1)

    def nearest_index(self, u):
        """Nearest grid index; ties at midpoints round toward u = 0, values
        beyond the range clamp to the edge."""
        x = np.asarray(u, dtype=float) / self.du
        rel = np.where(x >= 0.0, np.ceil(x - 0.5), np.floor(x + 0.5))
        rel = np.clip(rel, -self.n_half, self.n_half)
        idx = (rel + self.n_half).astype(np.int64)
        if np.ndim(u) == 0:
            return int(idx)
        return idx


@dataclass(frozen=True)
class InvariantState:
    """(u, t1, t2) on the invariant scale; t_l is the processed fraction."""

    u: float
    t1: float
    t2: float

    def __post_init__(self):
        if not math.isfinite(self.u):
            raise ValueError("u must be finite")
        if self.t1 < 0.0 or self.t2 < 0.0:
            raise ValueError("processed fractions must be nonnegative")
        if self.t1 + self.t2 > 1.0 + 1e-12:
            raise ValueError(f"t1 + t2 = {self.t1 + self.t2} exceeds the horizon")


@dataclass(frozen=True)
class DimensionalState:
    """Cumulative incomes and item counts of the dimensional problem.

    n_l counts processed items on arm l (a multiple of the batch size);
    x_l is the cumulative income, fixed to 0 while the arm is unobserved.
    """

    x1: float
    x2: float
    n1: int
    n2: int
    horizon: int
    batch: int

    def __post_init__(self):
        if self.batch < 1 or self.horizon < self.batch:
            raise ValueError("need batch >= 1 and horizon >= batch")
        if self.horizon % self.batch != 0:
            raise ValueError("horizon must be a multiple of the batch size")
        for n in (self.n1, self.n2):
            if n < 0 or n % self.batch != 0:
                raise ValueError("item counts must be nonnegative multiples of the batch size")
        if self.n1 + self.n2 > self.horizon:
            raise ValueError("processed items exceed the horizon")
        if self.n1 == 0 and self.x1 != 0.0:
            raise ValueError("x1 must be 0 while arm 1 is unobserved")
        if self.n2 == 0 and self.x2 != 0.0:
            raise ValueError("x2 must be 0 while arm 2 is unobserved")

    @property
    def U(self) -> float:
        """Cross-weighted income difference (X1*n2 - X2*n1)/n; 0 before any data."""
        n = self.n1 + self.n2
        if n == 0:
            return 0.0
        return (self.x1 * self.n2 - self.x2 * self.n1) / n


def to_invariant(state: DimensionalState) -> InvariantState:
    """Map a dimensional state to the invariant scale (u = U/sqrt(N))."""
    root = math.sqrt(state.horizon)
    return InvariantState(
        u=state.U / root,
        t1=state.n1 / state.horizon,
        t2=state.n2 / state.horizon,
    )


def from_invariant(state: InvariantState, horizon: int, batch: int) -> DimensionalState:
    """Canonical dimensional representative of an invariant state.

    The income split behind u is not unique; the representative puts the
    whole statistic on arm 1 (x2 = 0).  Fractions must land on the item
    lattice of the given horizon and batch size.
    """
    counts = []
    for t in (state.t1, state.t2):
        n = int(round(t * horizon))
        if abs(n - t * horizon) > 1e-6:
            raise ValueError(f"fraction {t} is not on the item lattice of horizon {horizon}")
        counts.append(n)
    n1, n2 = counts
    U = state.u * math.sqrt(horizon)
    if n2 > 0:
        x1, x2 = U * (n1 + n2) / n2, 0.0
    else:
        if abs(U) > 1e-12:
            raise ValueError("u must be 0 while an arm is unobserved")
        x1, x2 = 0.0, 0.0
    return DimensionalState(x1=x1, x2=x2, n1=n1, n2=n2, horizon=horizon, batch=batch)


def loss_profile(prior: SymmetricPrior, ell: int, u, t1: float, t2: float) -> np.ndarray:
    """Prior-weighted one-step loss of action ell over a row of u values.

    g_ell(u, t1, t2) = sum_i pi_i w_i exp((-1)^ell*2*u*w_i - 2*w_i^2*t1*t2/t)
    with t = t1 + t2.  Exponents are clipped at EXP_CLIP to keep the losing
    branch finite for extreme u*w products.
    """
    if ell not in (1, 2):
        raise ValueError(f"action must be 1 or 2, got {ell}")
    t = t1 + t2
    if t <= 0.0:
        raise ValueError("state precedes any observation (t1 + t2 = 0)")
    sign = -2.0 if ell == 1 else 2.0
    tau = t1 * t2 / t
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for w, p in prior.atoms:
        out += (p * w) * np.exp(np.minimum(sign * w * u - 2.0 * w * w * tau, EXP_CLIP))
    return out


def one_step_loss(prior: SymmetricPrior, ell: int, state: InvariantState) -> float:
    """Scalar one-step loss of playing action ell in an invariant state."""
    return float(loss_profile(prior, ell, np.array([state.u]), state.t1, state.t2)[0])


def transition_variance(epsilon: float, t1: float, t2: float, action: int) -> float:
    """Variance of the u increment when `action` processes one more batch.

    Action 1 moves u by a centered Gaussian of variance eps*t2^2/(t*(t+eps));
    action 2 swaps in t1^2.
    """
    if action not in (1, 2):
        raise ValueError(f"action must be 1 or 2, got {action}")
    t = t1 + t2
    if t <= 0.0:
        raise ValueError("state precedes any observation (t1 + t2 = 0)")
    other = t2 if action == 1 else t1
    return epsilon * other * other / (t * (t + epsilon))


def gaussian_kernel(variance: float, grid: UGrid) -> np.ndarray:
    """Discrete centered Gaussian weights at grid offsets, truncated at 6 sigma
    and renormalized to sum 1.

    A standard deviation below du/2 cannot be resolved by the grid and
    degenerates to the delta kernel [1.0]; convolution is then an identity.
    """
    if not (variance >= 0.0 and math.isfinite(variance)):
        raise ValueError(f"variance must be nonnegative and finite, got {variance}")
    sigma = math.sqrt(variance)
    if sigma < 0.5 * grid.du:
        return np.ones(1)
    half = int(math.ceil(6.0 * sigma / grid.du))
    offsets = grid.du * np.arange(-half, half + 1)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    return w / w.sum()


def convolve_zero_padded(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Convolution against a centered kernel with Dirichlet-0 reads beyond the
    ends of `values`; offsets are grid-aligned so no interpolation happens."""
    if kernel.size == 1:
        return values * kernel[0]
    full = np.convolve(values, kernel)
    half = kernel.size // 2
    return full[half : half + values.size]


def centered_gaussian_expectation(row: np.ndarray, grid: UGrid, variance: float) -> float:
    """Quadrature of a grid row against the centered Gaussian of the given
    variance; mass falling beyond the grid reads the row as 0."""
    kern = gaussian_kernel(variance, grid)
    half = kern.size // 2
    idx = grid.n_half + np.arange(-half, half + 1)
    valid = (idx >= 0) & (idx < row.size)
    return float(np.dot(kern[valid], row[idx[valid]]))
