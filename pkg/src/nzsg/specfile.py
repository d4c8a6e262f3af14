"""Game specification files: a small JSON schema for constructing games.

Schema (all games are complete-graph and pairwise zero-sum)::

    {
      "players": 3,
      "dims": 10 | [10, 10, 10],
      "kind": "bilinear" | "quadratic-sc" | "lipschitz-sc",
      "matrix_source": {
        "type": "seeded-uniform", "seed": 0, "low": 0.0, "high": 1.0
      } | {
        "type": "inline",
        "couplings": {"0-1": [[...]], "0-2": [[...]], ...}
      },
      "clip_radius": 4.0,        # lipschitz-sc only
      "soft": 4.0                # optional, defaults to clip_radius
    }

Inline couplings give C_ij for i < j; the reverse payoff is always derived
as its negated transpose, which keeps the game zero-sum by construction.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ConfigurationError
from .games import (BILINEAR, LIPSCHITZ_SC, QUADRATIC_SC, BilinearPayoff,
                    ClippedQuadraticPayoff, Edge, GameGraph, QuadraticPayoff,
                    make_linear_game, make_lipschitz_sc_game,
                    make_quadratic_sc_game)

_KINDS = (BILINEAR, QUADRATIC_SC, LIPSCHITZ_SC)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_hash(spec: dict) -> str:
    return hashlib.sha256(canonical_json(spec).encode()).hexdigest()[:16]


def load_game_spec(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_game_spec(spec: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dims_from_spec(spec: dict) -> tuple[int, ...]:
    n = int(spec.get("players", 0))
    if n < 2:
        raise ConfigurationError("spec needs 'players' >= 2")
    dims = spec.get("dims", 10)
    if isinstance(dims, (int, float)):
        return (int(dims),) * n
    dims = tuple(int(v) for v in dims)
    if len(dims) != n:
        raise ConfigurationError("'dims' length must equal 'players'")
    return dims


def build_game(spec: dict) -> GameGraph:
    """Construct the game described by a spec dictionary."""
    kind = spec.get("kind")
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown game kind {kind!r}")
    dims = _dims_from_spec(spec)
    n = len(dims)
    source = spec.get("matrix_source", {"type": "seeded-uniform", "seed": 0})
    stype = source.get("type")

    if stype == "seeded-uniform":
        seed = int(source.get("seed", 0))
        low = float(source.get("low", 0.0))
        high = float(source.get("high", 1.0))
        if kind == BILINEAR:
            return make_linear_game(n, dims, seed, low, high)
        if kind == QUADRATIC_SC:
            return make_quadratic_sc_game(n, dims, seed, low, high)
        return make_lipschitz_sc_game(
            n, dims, seed, clip_radius=float(spec.get("clip_radius", 4.0)),
            soft=spec.get("soft"), low=low, high=high)

    if stype == "inline":
        couplings = source.get("couplings", {})
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                key = f"{i}-{j}"
                if key not in couplings:
                    raise ConfigurationError(f"missing coupling {key!r}")
                c = np.asarray(couplings[key], dtype=np.float64)
                if c.shape != (dims[i], dims[j]):
                    raise ConfigurationError(
                        f"coupling {key!r} has shape {c.shape}, expected "
                        f"{(dims[i], dims[j])}")
                if kind == BILINEAR:
                    fwd = BilinearPayoff(c)
                elif kind == QUADRATIC_SC:
                    fwd = QuadraticPayoff(c)
                else:
                    fwd = ClippedQuadraticPayoff(
                        c, float(spec.get("clip_radius", 4.0)),
                        spec.get("soft"))
                edges.append(Edge(i, j, fwd, fwd.reverse()))
        meta = {"source": "inline"}
        if kind == LIPSCHITZ_SC:
            meta["clip_radius"] = float(spec.get("clip_radius", 4.0))
        return GameGraph(dims, tuple(edges), kind=kind, meta=meta)

    raise ConfigurationError(f"unknown matrix source type {stype!r}")


def game_to_spec(game: GameGraph) -> dict:
    """Serialize a built game back to the spec schema (inline couplings)."""
    if game.kind not in _KINDS:
        raise ConfigurationError(f"cannot serialize game kind {game.kind!r}")
    couplings = {}
    for e in game.edges:
        i, j = (e.i, e.j) if e.i < e.j else (e.j, e.i)
        model = e.forward if e.i < e.j else e.backward
        couplings[f"{i}-{j}"] = np.asarray(model.coupling).tolist()
    spec = {
        "players": game.n,
        "dims": list(game.dims),
        "kind": game.kind,
        "matrix_source": {"type": "inline", "couplings": couplings},
    }
    if game.kind == LIPSCHITZ_SC:
        spec["clip_radius"] = game.edges[0].forward.radius
        spec["soft"] = game.edges[0].forward.soft
    return spec
