"""Simultaneous gradient-ascent dynamics over a game.

All players update at once from the same current profile (Jacobi semantics).
Three update rules are provided:

* ``ga``            x_i <- x_i + eta_s * grad_i
* ``oga``           x_i <- x_i + (eta_s + eta_{s-1}) grad_i - eta_{s-1} grad_i_prev
* ``oga-two-step``  the algebraically equivalent half-iterate form, kept as a
                    separate rule for bookkeeping

The optimistic rule needs a previous gradient at t = 0.  By default it
bootstraps with grad(x^0), making the first step a plain ascent step; an
explicit second iterate can be supplied instead.  Distances are measured to
a fixed reference profile, or, for bilinear games, to the Nash set (the
kernel of the game Hessian).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels, spectral
from .errors import ConfigurationError
from .games import BILINEAR, LIPSCHITZ_SC, QUADRATIC_SC, GameGraph

RULE_GA = "ga"
RULE_OGA = "oga"
RULE_OGA_TWO_STEP = "oga-two-step"
_RULES = (RULE_GA, RULE_OGA, RULE_OGA_TWO_STEP)


# ---------------------------------------------------------------------------
# step schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Step-size sequence: constant, horizon power law, or explicit values."""

    kind: str
    eta: float | None = None
    epsilon: float | None = None
    explicit: tuple[float, ...] | None = None

    @staticmethod
    def constant(eta: float) -> "Schedule":
        if eta <= 0:
            raise ConfigurationError("step size must be positive")
        return Schedule("constant", eta=float(eta))

    @staticmethod
    def power_law(epsilon: float) -> "Schedule":
        """eta_s = T^-(0.5 + epsilon) for the whole horizon T."""
        if not 0.0 < epsilon < 0.5:
            raise ConfigurationError("power-law exponent must lie in (0, 0.5)")
        return Schedule("power-law", epsilon=float(epsilon))

    @staticmethod
    def from_values(values) -> "Schedule":
        values = tuple(float(v) for v in values)
        if not values or any(v <= 0 for v in values):
            raise ConfigurationError("explicit schedule must be positive")
        return Schedule("explicit", explicit=values)

    def values(self, horizon: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(horizon, self.eta)
        if self.kind == "power-law":
            return np.full(horizon, float(horizon) ** -(0.5 + self.epsilon))
        if len(self.explicit) < horizon:
            raise ConfigurationError(
                f"explicit schedule has {len(self.explicit)} values, "
                f"horizon is {horizon}")
        return np.asarray(self.explicit[:horizon], dtype=np.float64)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "eta": self.eta, "epsilon": self.epsilon,
                "explicit": list(self.explicit) if self.explicit else None}


@dataclass(frozen=True)
class DynamicsConfig:
    rule: str
    horizon: int
    schedule: Schedule
    record_every: int = 1
    seed: int | None = None
    store_iterates: bool = False

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ConfigurationError(f"unknown rule {self.rule!r}")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")

    def to_json_dict(self) -> dict:
        return {"rule": self.rule, "horizon": self.horizon,
                "schedule": self.schedule.to_json_dict(),
                "record_every": self.record_every, "seed": self.seed}


@dataclass
class DynamicsState:
    """One point of the dynamics; ``grad_prev``/``half`` only for optimistic rules."""

    x: np.ndarray
    t: int = 0
    grad_prev: Optional[np.ndarray] = None
    half: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# single steps (reference implementations, also used for custom games)
# ---------------------------------------------------------------------------

def step_ga(game: GameGraph, state: DynamicsState, eta: float) -> DynamicsState:
    g = game.stacked_gradient(state.x)
    return DynamicsState(state.x + eta * g, state.t + 1)


def step_oga(game: GameGraph, state: DynamicsState, eta: float,
             eta_prev: float | None = None) -> DynamicsState:
    g = game.stacked_gradient(state.x)
    g_prev = state.grad_prev if state.grad_prev is not None else g
    ep = eta if eta_prev is None else eta_prev
    x = state.x + (eta + ep) * g - ep * g_prev
    return DynamicsState(x, state.t + 1, grad_prev=g)


def step_oga_two_step(game: GameGraph, state: DynamicsState, eta: float,
                      eta_prev: float | None = None) -> DynamicsState:
    """Half-iterate form: w <- w + eta g(x); x <- w + eta_prev g(x).

    With ``half`` unset the half-iterate starts at x itself, so a single step
    from x^0 gives x^1 = x^0 + 2 eta grad(x^0).
    """
    g = game.stacked_gradient(state.x)
    w_prev = state.half if state.half is not None else state.x
    ep = eta if eta_prev is None else eta_prev
    w = w_prev + eta * g
    x = w + ep * g
    return DynamicsState(x, state.t + 1, half=w)


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Recorded metric series of one run.

    ``dist_sq`` is the squared distance to the Nash reference: the projection
    residual onto the Hessian kernel for bilinear games, otherwise the offset
    from a fixed Nash point.  ``avg_dist_sq`` applies the same metric to the
    running average (1/t) sum_{s<=t} x^s.  The eta column holds the step size
    that produced the row's iterate (0 for the initial row).
    """

    ts: np.ndarray
    dist_sq: np.ndarray
    player_dist_sq: np.ndarray
    avg_dist_sq: np.ndarray
    etas: np.ndarray
    overflow: bool
    last_t: int
    config: DynamicsConfig
    nash_mode: str
    metadata: dict = field(default_factory=dict)
    iterates: np.ndarray | None = None
    avg_iterates: np.ndarray | None = None

    @property
    def final_dist_sq(self) -> float:
        return float(self.dist_sq[-1])

    @property
    def time_average(self) -> np.ndarray | None:
        return self.avg_iterates[-1] if self.avg_iterates is not None else None

    def run_header(self) -> dict:
        return {"config": self.config.to_json_dict(),
                "nash_mode": self.nash_mode,
                "overflow": self.overflow,
                "last_t": self.last_t,
                "kernel_mode": kernels.jit_mode(),
                **self.metadata}

    def to_csv(self, path, extra_header: dict | None = None) -> None:
        n = self.player_dist_sq.shape[1]
        header = {**(extra_header or {})}
        with open(path, "w") as fh:
            for key in sorted(header):
                fh.write(f"# {key}={header[key]}\n")
            cols = (["t", "dist_sq_total"]
                    + [f"dist_sq_player_{i + 1}" for i in range(n)]
                    + ["avg_iterate_dist_sq", "eta_s", "overflow_flag"])
            fh.write(",".join(cols) + "\n")
            flags = np.zeros(len(self.ts), dtype=int)
            if self.overflow and len(flags):
                flags[-1] = 1
            for k in range(len(self.ts)):
                row = [str(int(self.ts[k])), repr(float(self.dist_sq[k]))]
                row += [repr(float(v)) for v in self.player_dist_sq[k]]
                row += [repr(float(self.avg_dist_sq[k])),
                        repr(float(self.etas[k])), str(flags[k])]
                fh.write(",".join(row) + "\n")


def _record_count(t_start: int, t_final: int, every: int) -> int:
    count = 1  # initial row
    count += t_final // every - t_start // every
    if t_final % every != 0:
        count += 1
    return count


def _nash_reference(game: GameGraph, x_star) -> tuple[np.ndarray, np.ndarray, str]:
    d = game.d
    if x_star is not None:
        return np.zeros((d, 0)), game.as_vector(x_star).copy(), "fixed-point"
    if game.kind == BILINEAR:
        h = spectral.assemble_hessian(game, np.zeros(d))
        basis = spectral.null_space_basis(h.matrix)
        return basis, np.zeros(d), "kernel-basis"
    return np.zeros((d, 0)), np.zeros(d), "fixed-point"


def run(game: GameGraph, config: DynamicsConfig, x0, x1=None, x_star=None,
        engine: str = "auto") -> Trajectory:
    """Run the configured dynamics from x0 and record distance metrics.

    ``x1`` (optimistic rules only) replaces the bootstrap first step.
    ``engine="python"`` forces the per-step reference implementation; by
    default the compiled kernels handle the built-in payoff families.
    """
    x0 = game.as_vector(x0).copy()
    if x1 is not None and config.rule == RULE_GA:
        raise ConfigurationError("an explicit second iterate only applies to "
                                 "the optimistic rules")
    etas = config.schedule.values(config.horizon)
    if np.any(etas <= 0):
        raise ConfigurationError("all step sizes must be positive")
    basis, ref, nash_mode = _nash_reference(game, x_star)

    use_kernel = (engine == "auto"
                  and config.rule in (RULE_GA, RULE_OGA)
                  and game.kind in (BILINEAR, QUADRATIC_SC, LIPSCHITZ_SC))
    if engine not in ("auto", "python"):
        raise ConfigurationError(f"unknown engine {engine!r}")

    d = game.d
    if x1 is not None:
        x_init = game.as_vector(x1).copy()
        g_prev = game.stacked_gradient(x0)
        t_start = 1
        avg_init = x_init.copy()
        consumed = etas[1:]
        eta_prev0 = etas[0]
        first_row_eta = etas[0]
    else:
        x_init = x0
        g_prev = (game.stacked_gradient(x0)
                  if config.rule != RULE_GA else np.zeros(d))
        t_start = 0
        avg_init = np.zeros(d)
        consumed = etas
        eta_prev0 = etas[0] if config.rule != RULE_GA else 0.0
        first_row_eta = 0.0

    t_final = t_start + len(consumed)
    rows = _record_count(t_start, t_final, config.record_every)
    n = game.n
    rec_t = np.zeros(rows, dtype=np.int64)
    rec_total = np.zeros(rows)
    rec_player = np.zeros((rows, n))
    rec_avg = np.zeros(rows)
    rec_eta = np.zeros(rows)
    store = 1 if config.store_iterates else 0
    path_x = np.zeros((rows if store else 0, d))
    path_avg = np.zeros((rows if store else 0, d))

    if use_kernel:
        if game.kind == LIPSCHITZ_SC:
            family = kernels.FAMILY_CLIPPED
            matrix = np.ascontiguousarray(game.coupling_matrix)
            delta = game.edges[0].forward.radius
            kappa = game.edges[0].forward.soft
        else:
            family = kernels.FAMILY_DENSE
            matrix = np.ascontiguousarray(
                spectral.assemble_hessian(game, np.zeros(d)).matrix)
            delta = kappa = 0.0
        rule_flag = kernels.RULE_GA if config.rule == RULE_GA else kernels.RULE_OGA
        k, last_t, overflow = kernels.run_path(
            family, matrix, game.offsets, game.degrees, delta, kappa,
            rule_flag, x_init, g_prev, np.ascontiguousarray(consumed),
            float(eta_prev0), np.ascontiguousarray(basis), ref,
            config.record_every, t_start, avg_init, float(first_row_eta),
            rec_t, rec_total, rec_player, rec_avg, rec_eta,
            store, path_x, path_avg)
    else:
        k, last_t, overflow = _python_path(
            game, config.rule, x_init, g_prev, consumed, eta_prev0,
            basis, ref, config.record_every, t_start, avg_init,
            first_row_eta, rec_t, rec_total, rec_player, rec_avg, rec_eta,
            store, path_x, path_avg, etas)

    meta = {"bootstrap": "explicit-x1" if x1 is not None else "grad-at-x0",
            "game_kind": game.kind, "game_meta": dict(game.meta)}
    return Trajectory(
        ts=rec_t[:k], dist_sq=rec_total[:k], player_dist_sq=rec_player[:k],
        avg_dist_sq=rec_avg[:k], etas=rec_eta[:k], overflow=bool(overflow),
        last_t=int(last_t), config=config, nash_mode=nash_mode, metadata=meta,
        iterates=path_x[:k] if store else None,
        avg_iterates=path_avg[:k] if store else None)


def _python_path(game, rule, x_init, g_prev_init, consumed, eta_prev0,
                 basis, ref, record_every, t_start, avg_init, first_row_eta,
                 rec_t, rec_total, rec_player, rec_avg, rec_eta,
                 store, path_x, path_avg, full_etas):
    """Per-step reference engine mirroring kernels.run_path exactly."""
    def metrics(v):
        if basis.shape[1] > 0:
            resid = v - basis @ (basis.T @ v)
        else:
            resid = v - ref
        per = np.add.reduceat(resid * resid, game.offsets[:-1])
        return float(per.sum()), per

    state = DynamicsState(x_init.copy(), t_start, grad_prev=g_prev_init.copy())
    if rule == RULE_OGA_TWO_STEP:
        # seed the half iterate so the run matches the bootstrap convention
        state.half = x_init - full_etas[0] * g_prev_init
    avg_sum = avg_init.copy()
    eta_prev = eta_prev0
    t_final = t_start + len(consumed)
    k = 0
    overflow = 0

    total, per = metrics(state.x)
    rec_t[k] = state.t
    rec_total[k], rec_player[k] = total, per
    rec_avg[k] = metrics(avg_sum / state.t)[0] if state.t > 0 else total
    rec_eta[k] = first_row_eta
    if store:
        path_x[k] = state.x
        path_avg[k] = avg_sum / state.t if state.t > 0 else state.x
    k += 1

    for s, eta in enumerate(consumed):
        if rule == RULE_GA:
            state = step_ga(game, state, eta)
        elif rule == RULE_OGA:
            state = step_oga(game, state, eta, eta_prev)
            eta_prev = eta
        else:
            state = step_oga_two_step(game, state, eta, eta_prev)
            eta_prev = eta
        tot = float(state.x @ state.x)
        if not np.isfinite(tot) or tot > kernels.OVERFLOW_LIMIT:
            overflow = 1
            state.t -= 1
            break
        avg_sum += state.x
        if state.t % record_every == 0 or state.t == t_final:
            total, per = metrics(state.x)
            rec_t[k] = state.t
            rec_total[k], rec_player[k] = total, per
            rec_avg[k] = metrics(avg_sum / state.t)[0]
            rec_eta[k] = eta
            if store:
                path_x[k] = state.x
                path_avg[k] = avg_sum / state.t
            k += 1
    return k, state.t, overflow
