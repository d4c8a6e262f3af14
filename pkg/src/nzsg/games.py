"""Network zero-sum game model: players, edges, and payoff families.

A game lives on a graph.  Each node is a player with a strategy slice of a
joint vector in R^d; each edge [i, j] carries a pair of payoff functions
(p_ij to player i, p_ji to player j).  Player i's payoff is the sum over her
incident edges, and the payoffs of all players sum to zero at every profile.

Three concrete payoff families are provided, all pairwise zero-sum by
construction (p_ji(v, u) = -p_ij(u, v)):

* bilinear            p(u, v) =  u' C v
* quadratic-sc        p(u, v) = -|u|^2/2 + u' C v + |v|^2/2
* lipschitz-sc        quadratic-sc with all fields radially saturated
                      outside a ball, so gradient norms are globally bounded
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, GameConstructionError

BILINEAR = "bilinear"
QUADRATIC_SC = "quadratic-sc"
LIPSCHITZ_SC = "lipschitz-sc"
CUSTOM = "custom"


# ---------------------------------------------------------------------------
# payoff models
# ---------------------------------------------------------------------------

class PayoffModel:
    """Edge payoff p(u, v): value, both gradients, and second derivatives.

    ``value``, ``grad_own`` and ``grad_other`` broadcast over leading batch
    axes; the Hessian blocks are single-point.  ``reverse()`` returns the
    paired payoff q with q(v, u) = -p(u, v).

    ``alpha`` is the strong-concavity modulus in the own argument, ``beta``
    the gradient-smoothness modulus, ``lip`` a global own-gradient norm
    bound; each may be ``None`` when the family does not certify it.
    """

    kind: str = "abstract"
    alpha: float | None = None
    beta: float | None = None
    lip: float | None = None

    def value(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_own(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_other(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess_own_own(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess_other_own(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """d^2 p / dv du, shape (dim_u, dim_v)."""
        raise NotImplementedError

    def reverse(self) -> "PayoffModel":
        raise NotImplementedError

    # sufficient statistics for sums of p(u, v_s) over a history of v_s;
    # used by the regret solver to avoid rescanning the history per iterate
    def history_stats(self, v_batch: np.ndarray) -> tuple[np.ndarray, float]:
        """Return (stat, const) with sum_s p(u, v_s) recoverable from them."""
        raise NotImplementedError

    def cumulative_value_own(self, u, stat, const, count: int) -> float:
        raise NotImplementedError

    def cumulative_grad_own(self, u, stat, count: int) -> np.ndarray:
        raise NotImplementedError


class BilinearPayoff(PayoffModel):
    kind = BILINEAR
    alpha = 0.0

    def __init__(self, coupling: np.ndarray):
        self.coupling = np.ascontiguousarray(coupling, dtype=np.float64)
        if self.coupling.ndim != 2:
            raise GameConstructionError("coupling must be a matrix")
        self.beta = float(np.linalg.norm(self.coupling, 2))

    def value(self, u, v):
        return np.einsum("...i,ij,...j->...", u, self.coupling, v)

    def grad_own(self, u, v):
        return np.einsum("ij,...j->...i", self.coupling, v)

    def grad_other(self, u, v):
        return np.einsum("...i,ij->...j", u, self.coupling)

    def hess_own_own(self, u, v):
        return np.zeros((self.coupling.shape[0], self.coupling.shape[0]))

    def hess_other_own(self, u, v):
        return self.coupling.copy()

    def reverse(self):
        return BilinearPayoff(-self.coupling.T)

    def history_stats(self, v_batch):
        return v_batch.sum(axis=0), 0.0

    def cumulative_value_own(self, u, stat, const, count):
        return float(u @ (self.coupling @ stat)) + const

    def cumulative_grad_own(self, u, stat, count):
        return self.coupling @ stat


class QuadraticPayoff(PayoffModel):
    """-|u|^2/2 + u'Cv + |v|^2/2; strongly concave in u, convex gift in v."""

    kind = QUADRATIC_SC
    alpha = 1.0

    def __init__(self, coupling: np.ndarray):
        self.coupling = np.ascontiguousarray(coupling, dtype=np.float64)
        if self.coupling.ndim != 2:
            raise GameConstructionError("coupling must be a matrix")
        self.beta = float(max(1.0, np.linalg.norm(self.coupling, 2)))

    def value(self, u, v):
        cross = np.einsum("...i,ij,...j->...", u, self.coupling, v)
        return -0.5 * (u * u).sum(axis=-1) + cross + 0.5 * (v * v).sum(axis=-1)

    def grad_own(self, u, v):
        return -u + np.einsum("ij,...j->...i", self.coupling, v)

    def grad_other(self, u, v):
        return np.einsum("...i,ij->...j", u, self.coupling) + v

    def hess_own_own(self, u, v):
        return -np.eye(self.coupling.shape[0])

    def hess_other_own(self, u, v):
        return self.coupling.copy()

    def reverse(self):
        return QuadraticPayoff(-self.coupling.T)

    def history_stats(self, v_batch):
        return v_batch.sum(axis=0), float(0.5 * (v_batch * v_batch).sum())

    def cumulative_value_own(self, u, stat, const, count):
        return float(-0.5 * count * (u @ u) + u @ (self.coupling @ stat)) + const

    def cumulative_grad_own(self, u, stat, count):
        return -count * u + self.coupling @ stat


def _logcosh(z: np.ndarray) -> np.ndarray:
    az = np.abs(z)
    return az - np.log(2.0) + np.log1p(np.exp(-2.0 * az))


class ClippedQuadraticPayoff(PayoffModel):
    """Quadratic payoff with radially saturated fields outside a ball.

    Let sigma(r) = r for r <= radius and radius + soft * tanh((r - radius) /
    soft) beyond it, phi(u) = sigma(|u|) u / |u|, and q the radial
    antiderivative of sigma.  The payoff is

        p(u, v) = -q(|u|) + phi(u)' C phi(v) + q(|v|).

    Inside the ball this is exactly the quadratic family; everywhere the own
    gradient norm is at most (radius + soft) * (1 + |C|_2), which is the
    certified ``lip``.  Strong concavity (alpha = 1 per edge) is certified
    inside the ball only.
    """

    kind = LIPSCHITZ_SC
    alpha = 1.0

    def __init__(self, coupling: np.ndarray, radius: float, soft: float | None = None):
        self.coupling = np.ascontiguousarray(coupling, dtype=np.float64)
        if self.coupling.ndim != 2:
            raise GameConstructionError("coupling must be a matrix")
        if radius <= 0:
            raise GameConstructionError("clip radius must be positive")
        self.radius = float(radius)
        self.soft = float(soft) if soft is not None else float(radius)
        if self.soft <= 0:
            raise GameConstructionError("soft range must be positive")
        sigma_max = self.radius + self.soft
        self.lip = float(sigma_max * (1.0 + np.linalg.norm(self.coupling, 2)))

    # radial profile ------------------------------------------------------
    def _sigma(self, r):
        ex = np.maximum(r - self.radius, 0.0)
        return np.where(r <= self.radius, r,
                        self.radius + self.soft * np.tanh(ex / self.soft))

    def _sigma_prime(self, r):
        ex = np.maximum(r - self.radius, 0.0)
        th = np.tanh(ex / self.soft)
        return np.where(r <= self.radius, 1.0, 1.0 - th * th)

    def _sigma_second(self, r):
        ex = np.maximum(r - self.radius, 0.0)
        th = np.tanh(ex / self.soft)
        return np.where(r <= self.radius, 0.0, -2.0 * th * (1 - th * th) / self.soft)

    def _q(self, r):
        ex = np.maximum(r - self.radius, 0.0)
        outer = (0.5 * self.radius ** 2 + self.radius * ex
                 + self.soft ** 2 * _logcosh(ex / self.soft))
        return np.where(r <= self.radius, 0.5 * r * r, outer)

    def _phi(self, u):
        r = np.linalg.norm(u, axis=-1, keepdims=True)
        scale = np.where(r > 0, self._sigma(r) / np.where(r > 0, r, 1.0), 1.0)
        return scale * u

    def _jphi_apply(self, u, w):
        # Jphi(u) @ w with Jphi = a I + (sigma' - a)/r^2 uu', a = sigma(r)/r
        r = np.linalg.norm(u, axis=-1, keepdims=True)
        inside = r <= self.radius
        safe_r = np.where(r > 0, r, 1.0)
        a = self._sigma(r) / safe_r
        coef = (self._sigma_prime(r) - a) / (safe_r * safe_r)
        dot = (u * w).sum(axis=-1, keepdims=True)
        return np.where(inside, w, a * w + coef * dot * u)

    def _jphi_matrix(self, u):
        du = u.shape[-1]
        r = float(np.linalg.norm(u))
        if r <= self.radius:
            return np.eye(du)
        a = float(self._sigma(r)) / r
        coef = (float(self._sigma_prime(r)) - a) / (r * r)
        return a * np.eye(du) + coef * np.outer(u, u)

    # payoff surface ------------------------------------------------------
    def value(self, u, v):
        ru = np.linalg.norm(u, axis=-1)
        rv = np.linalg.norm(v, axis=-1)
        cross = np.einsum("...i,ij,...j->...", self._phi(u), self.coupling,
                          self._phi(v))
        return -self._q(ru) + cross + self._q(rv)

    def grad_own(self, u, v):
        w = np.einsum("ij,...j->...i", self.coupling, self._phi(v))
        return -self._phi(u) + self._jphi_apply(u, w)

    def grad_other(self, u, v):
        w = np.einsum("...i,ij->...j", self._phi(u), self.coupling)
        return self._phi(v) + self._jphi_apply(v, w)

    def hess_own_own(self, u, v):
        du = u.shape[-1]
        r = float(np.linalg.norm(u))
        w = self.coupling @ self._phi(v)
        if r <= self.radius:
            return -np.eye(du)
        sig = float(self._sigma(r))
        sp = float(self._sigma_prime(r))
        spp = float(self._sigma_second(r))
        a = sig / r
        ap = (sp * r - sig) / r ** 2
        app = spp / r - 2.0 * (sp * r - sig) / r ** 3
        uw = float(u @ w)
        cross = ((ap / r) * (np.outer(w, u) + np.outer(u, w))
                 + (ap * uw / r) * np.eye(du)
                 + uw * ((app * r - ap) / r ** 3) * np.outer(u, u))
        return -self._jphi_matrix(u) + cross

    def hess_other_own(self, u, v):
        return self._jphi_matrix(u) @ self.coupling @ self._jphi_matrix(v)

    def reverse(self):
        return ClippedQuadraticPayoff(-self.coupling.T, self.radius, self.soft)

    def history_stats(self, v_batch):
        stat = self._phi(v_batch).sum(axis=0)
        const = float(self._q(np.linalg.norm(v_batch, axis=-1)).sum())
        return stat, const

    def cumulative_value_own(self, u, stat, const, count):
        cross = float(self._phi(u) @ (self.coupling @ stat))
        return float(-count * self._q(np.linalg.norm(u))) + cross + const

    def cumulative_grad_own(self, u, stat, count):
        return -count * self._phi(u) + self._jphi_apply(u, self.coupling @ stat)


# ---------------------------------------------------------------------------
# game graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    forward: PayoffModel   # payoff to i, arguments (x_i, x_j)
    backward: PayoffModel  # payoff to j, arguments (x_j, x_i)


@dataclass
class StrategyProfile:
    """Joint strategy vector with per-player slicing."""

    data: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_game(cls, game: "GameGraph", values: np.ndarray) -> "StrategyProfile":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.shape[0] != game.d:
            raise DimensionMismatch(
                f"profile has length {values.shape[0]}, game needs {game.d}")
        return cls(values, game.offsets)

    def player(self, i: int) -> np.ndarray:
        return self.data[self.offsets[i]:self.offsets[i + 1]]

    @property
    def n(self) -> int:
        return len(self.offsets) - 1


@dataclass(frozen=True)
class GameGraph:
    """Immutable player/edge structure of a network zero-sum game."""

    dims: tuple[int, ...]
    edges: tuple[Edge, ...]
    kind: str = CUSTOM
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.dims) < 2:
            raise GameConstructionError("need at least two players")
        if any(int(di) < 1 for di in self.dims):
            raise GameConstructionError("player dimensions must be >= 1")
        seen = set()
        for e in self.edges:
            if e.i == e.j:
                raise GameConstructionError(f"self loop on player {e.i}")
            if not (0 <= e.i < len(self.dims) and 0 <= e.j < len(self.dims)):
                raise GameConstructionError(f"edge ({e.i},{e.j}) out of range")
            key = (min(e.i, e.j), max(e.i, e.j))
            if key in seen:
                raise GameConstructionError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def n(self) -> int:
        return len(self.dims)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.dims))).astype(np.int64)

    @property
    def d(self) -> int:
        return int(self.offsets[-1])

    def slice_of(self, i: int) -> slice:
        if not 0 <= i < self.n:
            raise IndexError(f"player index {i} out of range")
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.float64)
        for e in self.edges:
            deg[e.i] += 1
            deg[e.j] += 1
        return deg

    def incident(self, i: int) -> list[tuple[int, PayoffModel]]:
        """(other player, payoff-to-i model) for every edge at player i."""
        out = []
        for e in self.edges:
            if e.i == i:
                out.append((e.j, e.forward))
            elif e.j == i:
                out.append((e.i, e.backward))
        return out

    # evaluation -----------------------------------------------------------
    def as_vector(self, x) -> np.ndarray:
        if isinstance(x, StrategyProfile):
            x = x.data
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.d:
            raise DimensionMismatch(
                f"profile has length {x.shape[0]}, game needs {self.d}")
        return x

    def payoff(self, x, i: int) -> float:
        """p_i(x): sum of edge payoffs incident to player i."""
        x = self.as_vector(x)
        xi = x[self.slice_of(i)]
        total = 0.0
        for j, model in self.incident(i):
            total += float(model.value(xi, x[self.slice_of(j)]))
        return total

    def payoffs(self, x) -> np.ndarray:
        x = self.as_vector(x)
        out = np.zeros(self.n)
        for e in self.edges:
            xi = x[self.slice_of(e.i)]
            xj = x[self.slice_of(e.j)]
            out[e.i] += float(e.forward.value(xi, xj))
            out[e.j] += float(e.backward.value(xj, xi))
        return out

    def batch_payoffs(self, profiles: np.ndarray) -> np.ndarray:
        """Payoffs of all players at a (batch, d) stack of profiles."""
        profiles = np.asarray(profiles, dtype=np.float64)
        if profiles.ndim != 2 or profiles.shape[1] != self.d:
            raise DimensionMismatch("profiles must be (batch, d)")
        out = np.zeros((profiles.shape[0], self.n))
        for e in self.edges:
            xi = profiles[:, self.slice_of(e.i)]
            xj = profiles[:, self.slice_of(e.j)]
            out[:, e.i] += e.forward.value(xi, xj)
            out[:, e.j] += e.backward.value(xj, xi)
        return out

    def gradient(self, x, i: int) -> np.ndarray:
        """Gradient of p_i in player i's own strategy."""
        x = self.as_vector(x)
        xi = x[self.slice_of(i)]
        g = np.zeros(self.dims[i])
        for j, model in self.incident(i):
            g += model.grad_own(xi, x[self.slice_of(j)])
        return g

    def stacked_gradient(self, x) -> np.ndarray:
        """All own-payoff gradients, concatenated in player order."""
        x = self.as_vector(x)
        g = np.zeros(self.d)
        for e in self.edges:
            xi = x[self.slice_of(e.i)]
            xj = x[self.slice_of(e.j)]
            g[self.slice_of(e.i)] += e.forward.grad_own(xi, xj)
            g[self.slice_of(e.j)] += e.backward.grad_own(xj, xi)
        return g

    def random_profile(self, rng, low: float = -1.0, high: float = 1.0) -> np.ndarray:
        return rng.uniform(low, high, size=self.d)

    # structure ------------------------------------------------------------
    @cached_property
    def coupling_matrix(self) -> np.ndarray | None:
        """Block matrix of edge couplings (zero diagonal), when defined."""
        if not all(hasattr(e.forward, "coupling") for e in self.edges):
            return None
        m = np.zeros((self.d, self.d))
        for e in self.edges:
            m[self.slice_of(e.i), self.slice_of(e.j)] = e.forward.coupling
            m[self.slice_of(e.j), self.slice_of(e.i)] = e.backward.coupling
        return m

    @property
    def has_linear_gradient(self) -> bool:
        return self.kind in (BILINEAR, QUADRATIC_SC)

    # certified moduli -----------------------------------------------------
    def alpha(self) -> float | None:
        """Per-player strong concavity: min over players of summed edge alphas."""
        per_player = np.zeros(self.n)
        for e in self.edges:
            if e.forward.alpha is None or e.backward.alpha is None:
                return None
            per_player[e.i] += e.forward.alpha
            per_player[e.j] += e.backward.alpha
        return float(per_player.min())

    def beta(self) -> float | None:
        vals = []
        for e in self.edges:
            if e.forward.beta is None or e.backward.beta is None:
                return None
            vals.append(max(e.forward.beta, e.backward.beta))
        return float(max(vals)) if vals else None

    def lip(self) -> float | None:
        per_player = np.zeros(self.n)
        for e in self.edges:
            if e.forward.lip is None or e.backward.lip is None:
                return None
            per_player[e.i] += e.forward.lip
            per_player[e.j] += e.backward.lip
        return float(per_player.max())

    def clip_radius(self) -> float | None:
        radii = [e.forward.radius for e in self.edges
                 if isinstance(e.forward, ClippedQuadraticPayoff)]
        return float(min(radii)) if radii else None


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _as_dims(n: int, dims) -> tuple[int, ...]:
    if n < 2:
        raise GameConstructionError("need at least two players")
    if np.isscalar(dims):
        dims = [int(dims)] * n
    dims = tuple(int(v) for v in dims)
    if len(dims) != n:
        raise GameConstructionError(f"got {len(dims)} dims for {n} players")
    if any(v < 1 for v in dims):
        raise GameConstructionError("player dimensions must be >= 1")
    return dims


def _sample_couplings(dims, rng, low: float, high: float) -> dict:
    n = len(dims)
    return {(i, j): rng.uniform(low, high, size=(dims[i], dims[j]))
            for i in range(n) for j in range(i + 1, n)}


def _pairwise_edges(couplings: dict, factory) -> tuple[Edge, ...]:
    edges = []
    for (i, j), c in sorted(couplings.items()):
        fwd = factory(c)
        edges.append(Edge(i, j, fwd, fwd.reverse()))
    return tuple(edges)


def make_linear_game(n: int, dims=10, seed: int = 0,
                     low: float = 0.0, high: float = 1.0) -> GameGraph:
    """Complete-graph bilinear game, couplings sampled i.i.d. uniform."""
    dims = _as_dims(n, dims)
    rng = np.random.default_rng(seed)
    couplings = _sample_couplings(dims, rng, low, high)
    return GameGraph(dims, _pairwise_edges(couplings, BilinearPayoff),
                     kind=BILINEAR,
                     meta={"seed": int(seed), "low": low, "high": high})


def make_quadratic_sc_game(n: int, dims=10, seed: int = 0,
                           low: float = 0.0, high: float = 1.0) -> GameGraph:
    """Complete-graph quadratic game; p_i is (n-1)-strongly concave in x_i."""
    dims = _as_dims(n, dims)
    rng = np.random.default_rng(seed)
    couplings = _sample_couplings(dims, rng, low, high)
    return GameGraph(dims, _pairwise_edges(couplings, QuadraticPayoff),
                     kind=QUADRATIC_SC,
                     meta={"seed": int(seed), "low": low, "high": high})


def make_lipschitz_sc_game(n: int, dims=10, seed: int = 0,
                           clip_radius: float = 4.0, soft: float | None = None,
                           low: float = 0.0, high: float = 1.0) -> GameGraph:
    """Clipped quadratic game with certified global gradient bound.

    Strongly concave inside the clip radius and gradient-saturated outside;
    initialize trajectories inside the ball to stay in the certified region.
    """
    dims = _as_dims(n, dims)
    rng = np.random.default_rng(seed)
    couplings = _sample_couplings(dims, rng, low, high)
    factory = lambda c: ClippedQuadraticPayoff(c, clip_radius, soft)
    return GameGraph(dims, _pairwise_edges(couplings, factory),
                     kind=LIPSCHITZ_SC,
                     meta={"seed": int(seed), "low": low, "high": high,
                           "clip_radius": float(clip_radius),
                           "soft": float(soft if soft is not None else clip_radius)})


def game_from_edges(dims: Sequence[int], edge_models, kind: str = CUSTOM,
                    meta: dict | None = None, zero_sum_samples: int = 256,
                    zero_sum_seed: int = 0, tol: float = 1e-9) -> GameGraph:
    """General constructor for possibly non-pairwise edge payoffs.

    ``edge_models`` is an iterable of (i, j, payoff_to_i, payoff_to_j).
    Because nothing enforces cancellation structurally, the result is gated
    behind a sampled global zero-sum check and construction fails if the
    payoffs do not sum to zero.
    """
    dims = tuple(int(v) for v in dims)
    edges = tuple(Edge(i, j, f, b) for i, j, f, b in edge_models)
    game = GameGraph(dims, edges, kind=kind, meta=dict(meta or {}))
    if zero_sum_samples > 0:
        report = check_zero_sum(game, samples=zero_sum_samples,
                                seed=zero_sum_seed, tol=tol)
        if not report.passed:
            raise GameConstructionError(
                f"payoffs do not sum to zero: max relative violation "
                f"{report.max_violation:.3e} over {zero_sum_samples} samples")
    return game


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSumReport:
    max_abs_sum: float
    max_violation: float  # |sum_i p_i| / (1 + max_i |p_i|), worst profile
    samples: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def check_zero_sum(game: GameGraph, samples: int = 1000, seed: int = 0,
                   low: float = -10.0, high: float = 10.0,
                   tol: float = 1e-9) -> ZeroSumReport:
    """Evaluate sum_i p_i at random profiles and report the worst violation."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    profiles = rng.uniform(low, high, size=(samples, game.d))
    p = game.batch_payoffs(profiles)
    totals = np.abs(p.sum(axis=1))
    scales = 1.0 + np.abs(p).max(axis=1)
    return ZeroSumReport(float(totals.max()), float((totals / scales).max()),
                         samples, int(seed), tol)


def finite_difference_gradient(game: GameGraph, x, i: int,
                               step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of p_i in x_i; independent oracle for tests."""
    x = game.as_vector(x).copy()
    sl = game.slice_of(i)
    g = np.zeros(game.dims[i])
    for k in range(game.dims[i]):
        idx = sl.start + k
        orig = x[idx]
        x[idx] = orig + step
        up = game.payoff(x, i)
        x[idx] = orig - step
        down = game.payoff(x, i)
        x[idx] = orig
        g[k] = (up - down) / (2 * step)
    return g


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    gap: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tol * self.scale


def check_payoff_sum_identity(game: GameGraph, x, x_star,
                              tol: float = 1e-9) -> IdentityReport:
    """Check sum_i p_i(x_i, x*_{-i}) = -sum_i p_i(x*_i, x_{-i}).

    The identity holds for every pair of profiles in any game whose payoffs
    sum to zero, and is the workhorse behind the time-average and
    last-iterate convergence arguments.
    """
    x = game.as_vector(x)
    xs = game.as_vector(x_star)
    lhs = 0.0
    rhs = 0.0
    for i in range(game.n):
        mixed = xs.copy()
        mixed[game.slice_of(i)] = x[game.slice_of(i)]
        lhs += game.payoff(mixed, i)
        mixed = x.copy()
        mixed[game.slice_of(i)] = xs[game.slice_of(i)]
        rhs += game.payoff(mixed, i)
    gap = abs(lhs + rhs)
    scale = 1.0 + max(abs(lhs), abs(rhs))
    return IdentityReport(lhs, -rhs, gap, scale, tol)
