"""Benchmark domains and the name-based registry used by experiment configs."""
from __future__ import annotations

import dataclasses
from importlib import resources
from typing import Any, Callable

from ..mdp import Domain, InvalidSpec, UnknownDomain
from .boardgames import Connect4, TicTacToe
from .game_of_life import GameOfLife, GameOfLifeSpec
from .layered import LayeredDomain
from .navigation import FIG2_BLACK_CELLS, Navigation, NavigationSpec, fig2_spec
from .racetrack import Racetrack, RacetrackSpec
from .sailing import SailingSpec, SailingWind
from .sysadmin import SysAdmin, SysAdminSpec


def _spec(cls, params: dict[str, Any], name: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(params) - set(fields))
    if unknown:
        raise InvalidSpec(f"{name}: unknown parameter(s) {', '.join(unknown)}; allowed: {', '.join(fields)}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
    try:
        return cls(**clean)
    except TypeError as exc:
        raise InvalidSpec(f"{name}: {exc}") from None


def _navigation(params: dict) -> Domain:
    params = dict(params)
    black = params.pop("black_cells", None)
    black_prob = params.pop("black_prob", 0.5)
    if black is not None:
        if "reset_prob" in params:
            raise InvalidSpec("navigation: give either black_cells or reset_prob")
        extra = set(params) - {"width", "height", "start_cell", "goal_cell", "horizon"}
        if extra:
            raise InvalidSpec(f"navigation: unknown parameter(s) {', '.join(sorted(extra))}")
        try:
            spec = NavigationSpec.from_black_cells(black_cells=black, black_prob=black_prob, **params)
        except TypeError as exc:
            raise InvalidSpec(f"navigation: {exc}") from None
    else:
        spec = _spec(NavigationSpec, params, "navigation")
    return Navigation(spec)


def _navigation_fig2(params: dict) -> Domain:
    extra = set(params) - {"horizon"}
    if extra:
        raise InvalidSpec(f"navigation_fig2: only 'horizon' may be set, got {', '.join(sorted(extra))}")
    return Navigation(fig2_spec(**params), "navigation_fig2")


def _board(cls):
    def build(params: dict) -> Domain:
        extra = set(params) - {"horizon"}
        if extra:
            raise InvalidSpec(f"{cls.__name__}: only 'horizon' may be set")
        return cls(**params)
    return build


def _layered(params: dict) -> Domain:
    from ..oracle.layered import parse_layered

    params = dict(params)
    path = params.pop("path", None)
    preset = params.pop("preset", None)
    if params or (path is None) == (preset is None):
        raise InvalidSpec("layered: give exactly one of 'path' or 'preset'")
    if preset is not None:
        text = resources.files("mcts_lab.data").joinpath(f"{preset}.lmdp").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return LayeredDomain(parse_layered(text), f"layered:{preset or path}")


REGISTRY: dict[str, Callable[[dict], Domain]] = {
    "navigation": _navigation,
    "navigation_fig2": _navigation_fig2,
    "sysadmin": lambda p: SysAdmin(_spec(SysAdminSpec, p, "sysadmin")),
    "game_of_life": lambda p: GameOfLife(_spec(GameOfLifeSpec, p, "game_of_life")),
    "racetrack": lambda p: Racetrack(_spec(RacetrackSpec, p, "racetrack")),
    "sailing_wind": lambda p: SailingWind(_spec(SailingSpec, p, "sailing_wind")),
    "tictactoe": _board(TicTacToe),
    "connect4": _board(Connect4),
    "layered": _layered,
}


def build_domain(name: str, params: dict[str, Any] | None = None) -> Domain:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise UnknownDomain(f"unknown domain {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return factory(dict(params or {}))


__all__ = [
    "Connect4", "FIG2_BLACK_CELLS", "GameOfLife", "GameOfLifeSpec", "LayeredDomain",
    "Navigation", "NavigationSpec", "REGISTRY", "Racetrack", "RacetrackSpec",
    "SailingSpec", "SailingWind", "SysAdmin", "SysAdminSpec", "TicTacToe",
    "build_domain", "fig2_spec",
]
