"""Rescaled Polya urn dynamics.

The urn holds ``b_i + B_{n,i}`` balls of color ``i``; drawing color ``i``
scales the variable part by ``beta`` and adds ``alpha`` balls of that color:

    B_{n+1} = beta * B_n + alpha * xi_{n+1}

with ``xi_{n+1}`` the one-hot draw indicator.  The predictive mean
``psi_n = (b + B_n) / r*_n`` is the conditional law of the next draw, and
the centered increment obeys

    psi_{n+1} - psi_n = -eps_n (psi_n - p) + delta_n (xi_{n+1} - psi_n)

with eps_n = |b|(1-beta)/r*_{n+1} and delta_n = alpha/r*_{n+1}.  All ball
counts are real-valued; ``beta = 1`` (the classical Polya urn) is allowed
here, while the diffusion scaling family requires ``beta < 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .rng import StreamKey

__all__ = [
    "UrnParams",
    "UrnState",
    "DrawOutcome",
    "UrnTrajectory",
    "new_urn",
    "predictive_mean",
    "step",
    "sample_color",
    "closed_form_B",
    "psi_closed_form",
    "total_balls",
    "increment_decomposition",
    "simulate_urn",
    "simulate_urn_ensemble",
]


@dataclass(frozen=True)
class UrnParams:
    """Fixed urn parameters: reinforcement alpha, scaling beta, ball vectors."""

    alpha: float
    beta: float
    b: np.ndarray
    B0: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        B0 = np.array(self.B0, dtype=float)
        b.setflags(write=False)
        B0.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "B0", B0)
        if not self.alpha > 0:
            raise ValidationError("alpha", f"must be > 0, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValidationError("beta", f"must lie in [0, 1], got {self.beta}")
        if b.ndim != 1 or b.size < 2 or b.shape != B0.shape:
            raise ValidationError("b", "b and B0 must be equal-length vectors, k >= 2")
        if np.any(b < 0):
            raise ValidationError("b", "fixed ball counts must be nonnegative")
        if not b.sum() > 0:
            raise ValidationError("b", "|b| must be positive")
        bad = np.nonzero(b + B0 <= 0)[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError("B0", f"b_{i+1} + B0_{i+1} = {b[i] + B0[i]} must be > 0")

    @property
    def k(self) -> int:
        return self.b.size

    @property
    def b_total(self) -> float:
        return float(self.b.sum())

    @property
    def p(self) -> np.ndarray:
        return self.b / self.b.sum()

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "b": self.b.tolist(),
            "B0": self.B0.tolist(),
        }


@dataclass(frozen=True)
class UrnState:
    """Urn contents after n steps; r_star is the total ball count."""

    n: int
    B: np.ndarray
    r_star: float

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        B.setflags(write=False)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class DrawOutcome:
    """A single draw; colors are numbered 1..k."""

    color: int

    @property
    def index(self) -> int:
        return self.color - 1

    def one_hot(self, k: int) -> np.ndarray:
        xi = np.zeros(k)
        xi[self.index] = 1.0
        return xi


@dataclass(frozen=True)
class UrnTrajectory:
    """A simulated path: draws (length n) and predictive means (length n+1).

    ``psi[n]`` is the predictive mean after n draws; ``draws[n-1]`` is the
    color extracted at step n.
    """

    params: UrnParams
    draws: np.ndarray  # int colors in 1..k, shape (n,)
    psi: np.ndarray  # shape (n+1, k)
    seed: StreamKey

    def __post_init__(self):
        draws = np.array(self.draws, dtype=np.int64)
        psi = np.array(self.psi, dtype=float)
        draws.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "psi", psi)
        if psi.shape != (draws.size + 1, self.params.k):
            raise ValidationError("psi", "psi must have one more row than draws")

    @property
    def n_steps(self) -> int:
        return self.draws.size


def new_urn(params: UrnParams) -> UrnState:
    """Initial state: n = 0, B = B0, r* = |b| + |B0|."""
    return UrnState(n=0, B=params.B0.copy(), r_star=float(params.b.sum() + params.B0.sum()))


def predictive_mean(params: UrnParams, state: UrnState) -> np.ndarray:
    """Conditional law of the next draw, (b + B_n) / r*_n."""
    return (params.b + state.B) / state.r_star


def sample_color(psi: np.ndarray, u: float) -> int:
    """Inverse-CDF draw on psi with fixed left-to-right color order.

    Returns a 0-based index; cumulative-sum ties resolve to the smallest
    index, and u >= 1 (possible only through rounding) maps to the last color.
    """
    cum = np.cumsum(psi)
    return min(int(np.searchsorted(cum, u, side="right")), psi.size - 1)


def step(params: UrnParams, state: UrnState, rng: np.random.Generator):
    """Draw one ball and update: B' = beta*B + alpha*xi.

    Returns ``(new_state, outcome)``.  The total r* is recomputed from the
    new contents, which keeps the state invariant r* = |b| + |B| exact.
    """
    psi = predictive_mean(params, state)
    idx = sample_color(psi, rng.random())
    B = params.beta * state.B
    B[idx] += params.alpha
    new = UrnState(n=state.n + 1, B=B, r_star=float(params.b.sum() + B.sum()))
    return new, DrawOutcome(color=idx + 1)


def closed_form_B(params: UrnParams, draws: Sequence[DrawOutcome] | np.ndarray, n: int) -> np.ndarray:
    """Evaluate B_n = beta^n B_0 + alpha * sum_h beta^(n-h) xi_h directly.

    Powers are accumulated forward (beta^(n-h), largest h first in weight)
    so that nothing overflows for beta near 0; the summation order differs
    from the step recursion, making this an independent floating-point path.
    """
    draws = _draw_indices(draws)
    if n > draws.size:
        raise ValidationError("n", f"need {n} draws, trajectory has {draws.size}")
    if n < 0:
        raise ValidationError("n", "n must be >= 0")
    k = params.k
    if n == 0:
        return params.B0.copy()
    powers = params.beta ** np.arange(n - 1, -1, -1, dtype=float)  # beta^(n-h), h=1..n
    onehot = np.zeros((n, k))
    onehot[np.arange(n), draws[:n]] = 1.0
    return params.beta**n * params.B0 + params.alpha * (powers @ onehot)


def total_balls(params: UrnParams, n: int) -> float:
    """Total ball count r*_n in closed form (geometric for beta<1, linear at beta=1)."""
    if n < 0:
        raise ValidationError("n", "n must be >= 0")
    s0 = float(params.B0.sum())
    if params.beta == 1.0:
        return params.b_total + s0 + n * params.alpha
    r = params.alpha / (1.0 - params.beta)
    return params.b_total + r + params.beta**n * (s0 - r)


def psi_closed_form(params: UrnParams, draws, n: int) -> np.ndarray:
    """psi_n evaluated from the closed forms for B_n and r*_n."""
    return (params.b + closed_form_B(params, draws, n)) / total_balls(params, n)


def increment_decomposition(params: UrnParams, state: UrnState, draw: DrawOutcome):
    """Coefficients of the centered one-step identity at this state/draw.

    Returns ``(eps_n, delta_n, delta_M)`` with delta_M = xi_{n+1} - psi_n,
    such that psi_{n+1} - psi_n = -eps_n (psi_n - p) + delta_n delta_M.
    """
    psi = predictive_mean(params, state)
    xi = draw.one_hot(params.k)
    B_next = params.beta * state.B + params.alpha * xi
    r_next = params.b.sum() + B_next.sum()
    eps_n = params.b_total * (1.0 - params.beta) / r_next
    delta_n = params.alpha / r_next
    return eps_n, delta_n, xi - psi


def simulate_urn(params: UrnParams, n_steps: int, seed: StreamKey | int, label: str = "urn") -> UrnTrajectory:
    """Simulate one trajectory; deterministic in the stream key."""
    key = seed if isinstance(seed, StreamKey) else StreamKey(int(seed), label)
    rng = key.generator()
    state = new_urn(params)
    k = params.k
    psi = np.empty((n_steps + 1, k))
    draws = np.empty(n_steps, dtype=np.int64)
    psi[0] = predictive_mean(params, state)
    for n in range(n_steps):
        state, outcome = step(params, state, rng)
        draws[n] = outcome.color
        psi[n + 1] = predictive_mean(params, state)
    return UrnTrajectory(params=params, draws=draws, psi=psi, seed=key)


def simulate_urn_ensemble(
    params: UrnParams,
    n_steps: int,
    n_replicas: int,
    seed: int,
    label: str = "urn",
    checkpoints: Sequence[int] | None = None,
    replica_offset: int = 0,
    chunk: int = 2048,
) -> np.ndarray:
    """Predictive means of independent replicas at the given step indices.

    Replica ``i`` consumes exactly the stream ``StreamKey(seed, label,
    replica_offset + i)``, so each row reproduces ``simulate_urn`` run with
    that key.  Stepping is vectorized across replicas; uniforms are drawn
    per replica in blocks of ``chunk`` steps to bound memory.

    Returns an array of shape ``(len(checkpoints), n_replicas, k)``; the
    default checkpoint list is ``[n_steps]``.
    """
    if checkpoints is None:
        checkpoints = [n_steps]
    cp_list = [int(c) for c in checkpoints]
    if cp_list and (min(cp_list) < 0 or max(cp_list) > n_steps):
        raise ValidationError("checkpoints", "checkpoint indices must lie in [0, n_steps]")
    cp: dict[int, list[int]] = {}
    for j, c in enumerate(cp_list):
        cp.setdefault(c, []).append(j)
    k = params.k
    gens = [StreamKey(seed, label, replica_offset + i).generator() for i in range(n_replicas)]
    B = np.tile(params.B0, (n_replicas, 1))
    b = params.b
    out = np.empty((len(cp_list), n_replicas, k))
    for j in cp.get(0, []):
        out[j] = (b + B) / (b.sum() + B.sum(axis=1, keepdims=True))
    n = 0
    while n < n_steps:
        m = min(chunk, n_steps - n)
        u = np.stack([g.random(m) for g in gens], axis=0)  # (n_replicas, m)
        for j in range(m):
            psi = (b + B) / (b.sum() + B.sum(axis=1, keepdims=True))
            cum = np.cumsum(psi, axis=1)
            idx = np.minimum((u[:, j : j + 1] >= cum).sum(axis=1), k - 1)
            B *= params.beta
            B[np.arange(n_replicas), idx] += params.alpha
            n += 1
            for row in cp.get(n, []):
                out[row] = (b + B) / (b.sum() + B.sum(axis=1, keepdims=True))
    return out


def _draw_indices(draws) -> np.ndarray:
    """Normalize a draw sequence to a 0-based index array."""
    if isinstance(draws, np.ndarray):
        return np.asarray(draws, dtype=np.int64) - 1
    if len(draws) and isinstance(draws[0], DrawOutcome):
        return np.array([d.index for d in draws], dtype=np.int64)
    return np.asarray(draws, dtype=np.int64) - 1
