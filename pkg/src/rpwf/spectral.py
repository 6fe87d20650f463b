"""Stationary density and spectral transition density of the diffusion.

The stationary law of the Wright-Fisher diffusion with mutation is the
Dirichlet density pi_gamma with gamma_i = 2 (b/alpha) p_i - 1.  The
transition density expands as

    p(y0, y; t) = pi_gamma(y) * sum_n e^{-nu_n t} sum_{|n| = n}
                  f_n(y) f_n(y0) / <f_n, f_n>_gamma,

with nu_n = n (n + 2 b/alpha - 1)/2 and f_n ranging over any basis of the
degree-n eigenspace; the kernel is basis-independent.  Evaluation uses the
product-Jacobi basis in stick-breaking form with univariate three-term
recurrences, which stays numerically stable far beyond the degrees where
monomial expansion collapses.

The series converges spectrally for t bounded away from 0; values at
t < 0.05 are flagged unreliable rather than silently returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .polynomials import (
    GammaWeights,
    jacobi_product_norm_sq_log,
    multi_indices,
    supported_degree_cap,
)
from .quadrature import log_dirichlet_constant
from .simplex import check_reduced
from .wright_fisher import WfParams

__all__ = [
    "dirichlet_density",
    "TransitionDensity",
    "SpectralTransitionDensity",
    "transition_density",
    "forward_equation_residual",
    "SMALL_T_THRESHOLD",
    "default_max_degree",
]

SMALL_T_THRESHOLD = 0.05
_DEFAULT_DEGREE = {2: 30, 3: 10, 4: 6, 5: 6}


def default_max_degree(k: int) -> int:
    if k not in _DEFAULT_DEGREE:
        raise ValidationError("k", f"spectral layer supports 2 <= k <= 5, got {k}")
    return _DEFAULT_DEGREE[k]


def dirichlet_density(gw: GammaWeights, y, log: bool = False) -> float:
    """pi_gamma at the reduced point y; +inf at a boundary hit by a negative exponent."""
    y = check_reduced(y, "y")
    if y.size != gw.nvars:
        raise ValidationError("y", f"expected {gw.nvars} coordinates")
    coords = np.concatenate([y, [1.0 - y.sum()]])
    g = np.array([float(v) for v in gw.gamma])
    zero = coords <= 0.0
    if np.any(zero):
        if np.any(g[zero] < 0.0):
            return math.inf
        if np.any(g[zero] > 0.0):
            return -math.inf if log else 0.0
        # exponent exactly zero at the boundary: factor is 1
        coords = np.where(zero, 1.0, coords)
        g = np.where(zero, 0.0, g)
    logpdf = float(g @ np.log(coords)) - log_dirichlet_constant(gw)
    return logpdf if log else math.exp(logpdf)


@dataclass(frozen=True)
class TransitionDensity:
    """Truncated series value plus truncation diagnostics."""

    value: float
    tail_term: float
    n_terms: int
    max_degree: int
    tail_warning: bool
    small_t: bool

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "tail_term": self.tail_term,
            "n_terms": self.n_terms,
            "max_degree": self.max_degree,
            "tail_warning": self.tail_warning,
            "small_t": self.small_t,
        }


def _jacobi_values(mmax: int, a: float, b: float, t: float) -> np.ndarray:
    """p_0..p_mmax^{(a,b)}(t) by the three-term recurrence."""
    out = np.empty(mmax + 1)
    out[0] = 1.0
    if mmax == 0:
        return out
    out[1] = 0.5 * (a + b + 2.0) * t + 0.5 * (a - b)
    for m in range(2, mmax + 1):
        c1 = 2.0 * m * (m + a + b) * (2.0 * m + a + b - 2.0)
        c2 = (2.0 * m + a + b - 1.0) * (a * a - b * b)
        c3 = (2.0 * m + a + b - 2.0) * (2.0 * m + a + b - 1.0) * (2.0 * m + a + b)
        c4 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * (2.0 * m + a + b)
        out[m] = ((c2 + c3 * t) * out[m - 1] - c4 * out[m - 2]) / c1
    return out


class SpectralTransitionDensity:
    """Transition density evaluator for fixed diffusion parameters.

    Basis values are computed per point through the stick-breaking product
    representation; norms are cached per multi-index.
    """

    def __init__(self, params: WfParams, max_degree: int | None = None):
        self.params = params
        self.gw = GammaWeights.from_wf(params)
        k = params.k
        cap = supported_degree_cap(k)
        self.max_degree = default_max_degree(k) if max_degree is None else int(max_degree)
        if not 0 <= self.max_degree <= cap:
            raise ValidationError("max-degree", f"must lie in [0, {cap}] for k={k}")
        self._indices = [multi_indices(k - 1, n) for n in range(self.max_degree + 1)]
        self._inv_norm = [
            np.array([math.exp(-0.5 * jacobi_product_norm_sq_log(n, self.gw)) for n in idx])
            for idx in self._indices
        ]
        rate = params.rate
        self._nu = np.array([0.5 * n * (n + 2.0 * rate - 1.0) for n in range(self.max_degree + 1)])

    def _point_tables(self, y: np.ndarray) -> list[np.ndarray]:
        """tables[i][N, m] = R_i^m * p_m^{(a_i(N), gamma_i)}(2 y_i / R_i - 1),
        indexed by the trailing degree N that fixes the Jacobi parameter."""
        d = self.gw.nvars
        g = [float(v) for v in self.gw.gamma]
        tables = []
        remaining = 1.0
        for i in range(d):
            if remaining <= 0.0:
                raise ValidationError("y", "point must be interior for the spectral series")
            t_i = 2.0 * y[i] / remaining - 1.0
            c_i = sum(g[i + 1 :]) + (self.gw.k - 1 - i)
            tab = np.zeros((self.max_degree + 1, self.max_degree + 1))
            rpow = np.power(remaining, np.arange(self.max_degree + 1))
            for N in range(self.max_degree + 1):
                a_i = 2.0 * N + c_i - 1.0
                mmax = self.max_degree - N
                vals = _jacobi_values(mmax, a_i, g[i], t_i)
                tab[N, : mmax + 1] = vals * rpow[: mmax + 1]
            tables.append(tab)
            remaining -= y[i]
        return tables

    def _normalized_values(self, y: np.ndarray) -> list[np.ndarray]:
        """Unit-norm basis values at y, grouped by total degree."""
        tables = self._point_tables(np.asarray(y, dtype=float))
        out = []
        for deg, idx in enumerate(self._indices):
            vals = np.empty(len(idx))
            for j, n in enumerate(idx):
                v = 1.0
                trailing = deg
                for i, ni in enumerate(n):
                    trailing -= ni
                    v *= tables[i][trailing, ni]
                vals[j] = v
            out.append(vals * self._inv_norm[deg])
        return out

    def evaluate(self, y0, y, t: float) -> TransitionDensity:
        if not t > 0:
            raise ValidationError("t", f"transition density requires t > 0, got {t}")
        y0 = check_reduced(y0, "y0")
        y = check_reduced(y, "y")
        f_y = self._normalized_values(y)
        f_y0 = self._normalized_values(y0)
        stat = dirichlet_density(self.gw, y)
        kernel_terms = np.array(
            [float(f_y[n] @ f_y0[n]) * math.exp(-self._nu[n] * t) for n in range(self.max_degree + 1)]
        )
        total = stat * kernel_terms.sum()
        tail = abs(stat * kernel_terms[-1]) if self.max_degree >= 1 else 0.0
        warn = bool(tail > 1e-6 * max(abs(total), 1e-300))
        return TransitionDensity(
            value=total,
            tail_term=tail,
            n_terms=self.max_degree + 1,
            max_degree=self.max_degree,
            tail_warning=warn,
            small_t=bool(t < SMALL_T_THRESHOLD),
        )

    def __call__(self, y0, y, t: float) -> float:
        return self.evaluate(y0, y, t).value

    def density_fn(self, y0):
        """p(y, t) as a plain callable with y0 frozen."""
        y0 = np.asarray(y0, dtype=float)
        return lambda y, t: self.evaluate(y0, y, t).value


def transition_density(y0, y, t: float, params: WfParams, max_degree: int | None = None) -> TransitionDensity:
    """One-shot spectral transition density evaluation."""
    return SpectralTransitionDensity(params, max_degree).evaluate(y0, y, t)


def _d1_5pt(f, x: float, h: float) -> float:
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2_5pt(f, x: float, h: float) -> float:
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def forward_equation_residual(
    density,
    y_grid: np.ndarray,
    t: float,
    params: WfParams,
    h: float = 1e-2,
    ht: float | None = None,
) -> np.ndarray:
    """Residual of the Kolmogorov forward equation at interior grid points.

    ``density(y, t)`` is any evaluable density on reduced coordinates
    (shape (k-1,)); both the time derivative and the spatial operator are
    applied by finite differences, so the check is independent of how the
    density was produced.  Supports k = 2 and k = 3.
    """
    k = params.k
    rate = params.rate
    p = params.p
    y_grid = np.atleast_2d(np.asarray(y_grid, dtype=float))
    if y_grid.shape[1] != k - 1:
        raise ValidationError("y_grid", f"expected points with {k - 1} coordinates")
    if ht is None:
        ht = min(0.2 * t, 1e-3 * max(t, 1.0)) if t > 0 else 1e-3
    out = np.empty(y_grid.shape[0])
    if k == 2:
        for row, (y,) in enumerate(y_grid):
            hy = min(h, 0.4 * y, 0.4 * (1.0 - y))
            dt_term = _d1_5pt(lambda tt: density(np.array([y]), tt), t, ht)
            flux = _d1_5pt(lambda s: (s - p[0]) * density(np.array([s]), t), y, hy)
            diff = _d2_5pt(lambda s: s * (1.0 - s) * density(np.array([s]), t), y, hy)
            out[row] = dt_term - (rate * flux + 0.5 * diff)
        return out
    if k == 3:
        for row, y in enumerate(y_grid):
            y1, y2 = y
            y3 = 1.0 - y1 - y2
            hy = min(h, 0.4 * y1, 0.4 * y2, 0.2 * y3)
            dt_term = _d1_5pt(lambda tt: density(y, tt), t, ht)
            flux = 0.0
            diff = 0.0
            for i in range(2):
                def along(s, i=i):
                    q = y.copy()
                    q[i] = s
                    return q

                flux += _d1_5pt(lambda s: (s - p[i]) * density(along(s), t), y[i], hy)
                diff += _d2_5pt(lambda s: s * (1.0 - s) * density(along(s), t), y[i], hy)

            def cross(u, v):
                return u * v * density(np.array([u, v]), t)

            def d2_cross(u):
                return _d1_5pt(lambda v: cross(u, v), y2, hy)

            mixed = _d1_5pt(d2_cross, y1, hy)
            out[row] = dt_term - (rate * flux + 0.5 * (diff - 2.0 * mixed))
        return out
    raise ValidationError("k", "forward-equation residual supports k = 2 and k = 3")
