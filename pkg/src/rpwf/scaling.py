"""The beta-indexed scaling family and its diffusion time change.

A family member is an urn with the balanced start ``|B_0| = alpha/(1-beta)``,
which keeps the total ball count constant at ``r* = |b| + alpha/(1-beta)``.
Its predictive mean then follows

    psi_n - psi_{n-1} = -eps(beta) (psi_{n-1} - p) + delta(beta) dM_n,

    eps(beta)   = b (1-beta)^2 / (alpha + b (1-beta)),
    delta(beta) = alpha (1-beta) / (alpha + b (1-beta)),

and the piecewise-constant process ``X_t = psi_{floor(t / (1-beta)^2)}``
converges weakly, as beta -> 1, to the Wright-Fisher diffusion with
mutation kernel ``p = b/|b|`` and drift scale ``b/alpha``.

Grouping colors through a partition commutes with everything here: the
grouped process is itself a (lower-dimensional) urn of the same family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .urn import UrnParams, UrnTrajectory

__all__ = [
    "ScaledFamilyParams",
    "RescaledPath",
    "Partition",
    "eps_delta",
    "build_family_member",
    "family_member_for_start",
    "rescale_time",
    "native_step_count",
    "project_group",
]


def eps_delta(alpha: float, b_scalar: float, beta: float) -> tuple[float, float]:
    """Per-step reversion and noise coefficients of a balanced family member."""
    if not alpha > 0:
        raise ValidationError("alpha", f"must be > 0, got {alpha}")
    if not b_scalar > 0:
        raise ValidationError("b", f"|b| must be > 0, got {b_scalar}")
    if not 0.0 <= beta < 1.0:
        raise ValidationError("beta", f"scaling family requires 0 <= beta < 1, got {beta}")
    denom = alpha + b_scalar * (1.0 - beta)
    return b_scalar * (1.0 - beta) ** 2 / denom, alpha * (1.0 - beta) / denom


@dataclass(frozen=True)
class ScaledFamilyParams:
    """Family member specification: alpha, fixed vector b, beta, start direction.

    ``B0_direction`` is a simplex point; the balanced start is
    ``B0 = (alpha/(1-beta)) * B0_direction``.  The default direction ``p``
    pins psi_0 = p, a concrete convergent initial law.
    """

    alpha: float
    b: np.ndarray
    beta: float
    B0_direction: np.ndarray | None = None

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        if not 0.0 <= self.beta < 1.0:
            raise ValidationError("beta", f"scaling family requires beta in [0, 1), got {self.beta}")
        if self.B0_direction is not None:
            d = np.array(self.B0_direction, dtype=float)
            if d.shape != b.shape or np.any(d < 0) or abs(d.sum() - 1.0) > 1e-10:
                raise ValidationError("b0-direction", "must be a simplex point matching b")
            d.setflags(write=False)
            object.__setattr__(self, "B0_direction", d)

    @property
    def b_scalar(self) -> float:
        return float(self.b.sum())

    @property
    def p(self) -> np.ndarray:
        return self.b / self.b.sum()

    @property
    def B0_norm(self) -> float:
        return self.alpha / (1.0 - self.beta)

    @property
    def r_star(self) -> float:
        return self.b_scalar + self.B0_norm


def build_family_member(fp: ScaledFamilyParams) -> UrnParams:
    """Urn parameters of the balanced member (constant total ball count)."""
    direction = fp.B0_direction if fp.B0_direction is not None else fp.p
    return UrnParams(alpha=fp.alpha, beta=fp.beta, b=fp.b, B0=fp.B0_norm * direction)


def family_member_for_start(fp: ScaledFamilyParams, x0) -> UrnParams:
    """Balanced member whose psi_0 equals the interior simplex point x0.

    Solves B0 = r* x0 - b; valid whenever every component r* x0_i is
    positive, i.e. for strictly interior x0.
    """
    x0 = np.asarray(x0, dtype=float)
    B0 = fp.r_star * x0 - fp.b
    return UrnParams(alpha=fp.alpha, beta=fp.beta, b=fp.b, B0=B0)


@dataclass(frozen=True)
class RescaledPath:
    """Piecewise-constant sampling of an urn path in diffusion time."""

    t_grid: np.ndarray
    X: np.ndarray  # shape (len(t_grid), k)
    beta: float

    def __post_init__(self):
        t = np.array(self.t_grid, dtype=float)
        X = np.array(self.X, dtype=float)
        t.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "X", X)


def native_step_count(beta: float, t_max: float) -> int:
    """Urn steps needed to cover rescaled time t_max at this beta."""
    return int(math.ceil(t_max / (1.0 - beta) ** 2))


def step_index(beta: float, t: float) -> int:
    """Urn step index holding the rescaled process at time t."""
    return int(math.floor(t / (1.0 - beta) ** 2))


def rescale_time(traj: UrnTrajectory, t_max: float, dt_out: float) -> RescaledPath:
    """Sample psi at indices floor(t/(1-beta)^2) on the grid {0, dt_out, ...}.

    No interpolation is performed; the process is constant on each native
    step of length (1-beta)^2 in rescaled time.
    """
    beta = traj.params.beta
    if beta >= 1.0:
        raise ValidationError("beta", "time rescaling requires beta < 1")
    if dt_out <= 0 or t_max < 0:
        raise ValidationError("t-max", "need t_max >= 0 and dt_out > 0")
    required = native_step_count(beta, t_max)
    if traj.n_steps < required:
        raise ValidationError(
            "steps",
            f"trajectory has {traj.n_steps} steps but t_max={t_max} at beta={beta} "
            f"requires {required}",
        )
    t_grid = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)
    idx = np.minimum(np.floor(t_grid / (1.0 - beta) ** 2).astype(np.int64), traj.n_steps)
    return RescaledPath(t_grid=t_grid, X=traj.psi[idx], beta=beta)


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty groups of colors 1..k covering all of them."""

    groups: tuple[tuple[int, ...], ...]
    k: int

    def __init__(self, groups: Sequence[Sequence[int]], k: int):
        norm = tuple(tuple(sorted(int(c) for c in g)) for g in groups)
        seen: set[int] = set()
        for g in norm:
            if not g:
                raise ValidationError("partition", "groups must be nonempty")
            for c in g:
                if not 1 <= c <= k:
                    raise ValidationError("partition", f"color {c} outside 1..{k}")
                if c in seen:
                    raise ValidationError("partition", f"color {c} appears twice")
                seen.add(c)
        if len(seen) != k:
            raise ValidationError("partition", f"groups cover {len(seen)} of {k} colors")
        object.__setattr__(self, "groups", norm)
        object.__setattr__(self, "k", k)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def matrix(self) -> np.ndarray:
        """(n_groups, k) aggregation matrix A with A[g, c-1] = 1 for c in group g."""
        A = np.zeros((len(self.groups), self.k))
        for g, cols in enumerate(self.groups):
            for c in cols:
                A[g, c - 1] = 1.0
        return A

    def group_of(self) -> np.ndarray:
        """Map 0-based color index -> 0-based group index."""
        out = np.empty(self.k, dtype=np.int64)
        for g, cols in enumerate(self.groups):
            for c in cols:
                out[c - 1] = g
        return out


def project_group(obj: UrnTrajectory | RescaledPath, partition: Partition):
    """Aggregate colors over the partition.

    For a trajectory the result is again an ``UrnTrajectory``: the grouped
    urn has summed b and B0, the same alpha and beta, grouped draws, and
    grouped predictive means, and it satisfies the grouped one-step
    recursion pathwise on the same draw stream.
    """
    if isinstance(obj, RescaledPath):
        if partition.k != obj.X.shape[1]:
            raise ValidationError("partition", "partition size does not match path dimension")
        A = partition.matrix()
        return RescaledPath(t_grid=obj.t_grid, X=obj.X @ A.T, beta=obj.beta)
    if partition.k != obj.params.k:
        raise ValidationError("partition", "partition size does not match urn dimension")
    A = partition.matrix()
    grouped = UrnParams(
        alpha=obj.params.alpha,
        beta=obj.params.beta,
        b=A @ obj.params.b,
        B0=A @ obj.params.B0,
    )
    gof = partition.group_of()
    return UrnTrajectory(
        params=grouped,
        draws=gof[obj.draws - 1] + 1,
        psi=obj.psi @ A.T,
        seed=obj.seed,
    )
