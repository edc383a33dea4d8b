"""Experiment configuration files (TOML).

Schema::

    [experiment]
    episodes = 2000          # required, >= 1
    base_seed = 0            # episode i uses seed base_seed + i
    output = "out.csv"       # optional, relative to the config file
    workers = 4              # optional; MCTS_LAB_THREADS overrides it
    backend = "compiled"     # optional: "compiled" or "python"
    agent_player = "alternate"   # two-player only: 0, 1 or "alternate"

    [domain]
    name = "navigation_fig2"
    [domain.params]          # optional, domain specific
    horizon = 50

    [[agents]]               # one table per agent, labels unique
    label = "IPA-0"
    variant = "IPA"          # UCT, OGA, IPA, RSTATE, CONF, TOPN
    iterations = 500
    lambda_p = 0.0           # plus any SearchConfig / AbstractionPolicy field

    [opponent]               # required for two-player domains, forbidden otherwise
    variant = "UCT"
    iterations = 500

    [telemetry]
    abstraction_rate = false
    runtime = true
    per_move_log = false

Unknown keys are errors; messages carry the line of the offending key.
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..domains import build_domain
from ..mdp import Domain, MdpError
from ..search.config import AbstractionPolicy, ConfigError, SearchConfig

SEARCH_KEYS = {f.name for f in dataclasses.fields(SearchConfig)} - {"abstraction_policy", "rng_seed"}
POLICY_KEYS = {f.name for f in dataclasses.fields(AbstractionPolicy)}
AGENT_KEYS = SEARCH_KEYS | POLICY_KEYS | {"label"}
SECTION_KEYS = {
    "experiment": {"episodes", "base_seed", "output", "workers", "backend", "agent_player"},
    "domain": {"name", "params"},
    "telemetry": {"abstraction_rate", "runtime", "per_move_log"},
}
TOP_KEYS = set(SECTION_KEYS) | {"agents", "opponent"}


class ConfigValidationError(ConfigError):
    """Invalid experiment file; ``line`` is 1-based or None when unknown."""

    def __init__(self, msg: str, field: str | None = None, line: int | None = None, path: str | None = None):
        where = ":".join(str(x) for x in (path, line) if x is not None)
        prefix = f"{where}: " if where else ""
        what = f"[{field}] " if field else ""
        super().__init__(f"{prefix}{what}{msg}")
        self.field = field
        self.line = line
        self.path = path


@dataclass(frozen=True)
class Telemetry:
    abstraction_rate: bool = False
    runtime: bool = True
    per_move_log: bool = False


@dataclass(frozen=True)
class AgentSpec:
    label: str
    config: SearchConfig


@dataclass(frozen=True)
class ExperimentConfig:
    domain_name: str
    agents: tuple[AgentSpec, ...]
    episodes: int
    base_seed: int = 0
    domain_params: dict = field(default_factory=dict)
    opponent: SearchConfig | None = None
    telemetry: Telemetry = Telemetry()
    output: str | None = None
    workers: int | None = None
    backend: str | None = None
    agent_player: int | str = "alternate"
    source: str | None = None

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigValidationError("episodes must be >= 1", "experiment.episodes")
        labels = [a.label for a in self.agents]
        if not labels:
            raise ConfigValidationError("at least one agent is required", "agents")
        if len(set(labels)) != len(labels):
            raise ConfigValidationError("agent labels must be unique", "agents.label")
        if self.agent_player not in (0, 1, "alternate"):
            raise ConfigValidationError("agent_player must be 0, 1 or 'alternate'", "experiment.agent_player")

    def build_domain(self) -> Domain:
        return build_domain(self.domain_name, self.domain_params)

    def seed(self, episode_index: int) -> int:
        return self.base_seed + episode_index

    def player_for(self, episode_index: int) -> int:
        if self.agent_player == "alternate":
            return episode_index % 2
        return int(self.agent_player)


# -- line lookup ---------------------------------------------------------------------

_HEADER = re.compile(r"^\s*(\[\[?)\s*([^\]]+?)\s*\]\]?")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-\"']+)\s*=")


def _locate(text: str, table: str, key: str | None, index: int | None = None) -> int | None:
    """Line of ``key`` inside ``[table]`` (the ``index``-th ``[[table]]``), or of the header."""
    current, count, header_line = None, -1, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        m = _HEADER.match(raw)
        if m:
            current = m.group(2).strip()
            if current == table:
                count += 1
                if index is None or count == index:
                    header_line = lineno
            continue
        in_table = current == table and (index is None or count == index)
        if table == "" and current is None:
            in_table = True
        if in_table and key is not None:
            k = _KEY.match(raw)
            if k and k.group(1).strip("\"'") == key:
                return lineno
    return header_line


# -- parsing -------------------------------------------------------------------------

def _search_config(raw: dict, where: str, locate, default_variant: str) -> SearchConfig:
    search = {k: raw[k] for k in SEARCH_KEYS if k in raw}
    policy = {k: raw[k] for k in POLICY_KEYS if k in raw}
    policy.setdefault("variant", default_variant)
    for key in ("lambda_p", "eps_a"):
        if isinstance(policy.get(key), str):
            if policy[key].strip().lower() not in ("inf", "infinity"):
                raise ConfigValidationError(f"expected a number or 'inf', got {policy[key]!r}",
                                            f"{where}.{key}", locate(key))
            policy[key] = math.inf
    try:
        return SearchConfig(abstraction_policy=AbstractionPolicy(**policy), **search)
    except (ConfigError, TypeError) as exc:
        name = next((k for k in list(search) + list(policy) if k in str(exc)), None)
        raise ConfigValidationError(str(exc), f"{where}.{name}" if name else where,
                                    locate(name) if name else locate(None)) from None


def parse_config(text: str, path: str | None = None) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigValidationError(f"TOML syntax error: {exc}", None, int(m.group(1)) if m else None, path) from None

    def fail(msg, table, key=None, index=None, field_name=None):
        raise ConfigValidationError(msg, field_name or ".".join(x for x in (table, key) if x),
                                    _locate(text, table, key, index), path)

    for key, value in data.items():
        if key not in TOP_KEYS:
            msg = f"unknown section {key!r}; allowed: {', '.join(sorted(TOP_KEYS))}"
            if isinstance(value, (dict, list)):
                fail(msg, key)
            raise ConfigValidationError(msg, key, _locate(text, "", key), path)
    for section, allowed in SECTION_KEYS.items():
        body = data.get(section, {})
        if not isinstance(body, dict):
            fail("expected a table", section)
        for key in body:
            if key not in allowed:
                fail(f"unknown key {key!r}; allowed: {', '.join(sorted(allowed))}", section, key)

    exp = data.get("experiment")
    if exp is None:
        fail("missing [experiment] section", "experiment")
    if "episodes" not in exp:
        fail("missing key 'episodes'", "experiment")
    episodes = exp["episodes"]
    if not isinstance(episodes, int) or episodes < 1:
        fail("episodes must be an integer >= 1", "experiment", "episodes")
    base_seed = exp.get("base_seed", 0)
    if not isinstance(base_seed, int) or not 0 <= base_seed < 2**64:
        fail("base_seed must be a 64-bit non-negative integer", "experiment", "base_seed")
    workers = exp.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        fail("workers must be an integer >= 1", "experiment", "workers")
    backend = exp.get("backend")
    if backend is not None and backend not in ("compiled", "python"):
        fail("backend must be 'compiled' or 'python'", "experiment", "backend")
    agent_player = exp.get("agent_player", "alternate")
    if agent_player not in (0, 1, "alternate"):
        fail("agent_player must be 0, 1 or 'alternate'", "experiment", "agent_player")
    output = exp.get("output")
    if output is not None and path is not None:
        output = str(Path(path).parent / output)

    dom = data.get("domain")
    if dom is None or "name" not in dom:
        fail("missing [domain] name", "domain")
    params = dom.get("params", {})
    if not isinstance(params, dict):
        fail("params must be a table", "domain", "params")
    try:
        domain = build_domain(dom["name"], params)
    except MdpError as exc:
        bad = next((k for k in params if repr(k) in str(exc) or k in str(exc)), None)
        if bad is not None:
            fail(str(exc), "domain.params", bad, field_name=f"domain.params.{bad}")
        fail(str(exc), "domain", "name")

    agents_raw = data.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        fail("at least one [[agents]] table is required", "agents")
    agents = []
    seen = set()
    for i, raw in enumerate(agents_raw):
        loc = lambda key, i=i: _locate(text, "agents", key, i)
        for key in raw:
            if key not in AGENT_KEYS:
                raise ConfigValidationError(f"unknown key {key!r}", f"agents[{i}].{key}", loc(key), path)
        label = raw.get("label")
        if not isinstance(label, str) or not label:
            raise ConfigValidationError("every agent needs a non-empty label", f"agents[{i}].label", loc("label"), path)
        if label in seen:
            raise ConfigValidationError(f"duplicate agent label {label!r}", f"agents[{i}].label", loc("label"), path)
        seen.add(label)
        cfg = _search_config(raw, f"agents[{i}]", loc, "OGA")
        agents.append(AgentSpec(label, cfg))

    opponent = None
    if "opponent" in data:
        raw = data["opponent"]
        for key in raw:
            if key not in SEARCH_KEYS | POLICY_KEYS:
                fail(f"unknown key {key!r}", "opponent", key)
        opponent = _search_config(raw, "opponent", lambda key: _locate(text, "opponent", key), "UCT")
    if domain.num_players == 2 and opponent is None:
        fail("two-player domains need an [opponent] table", "domain", "name")
    if domain.num_players == 1 and opponent is not None:
        fail("[opponent] is only allowed for two-player domains", "opponent")

    tele_raw = data.get("telemetry", {})
    for key, value in tele_raw.items():
        if not isinstance(value, bool):
            fail("telemetry flags must be true or false", "telemetry", key)
    return ExperimentConfig(
        domain_name=dom["name"], domain_params=dict(params), agents=tuple(agents), episodes=episodes,
        base_seed=base_seed, opponent=opponent, telemetry=Telemetry(**tele_raw), output=output,
        workers=workers, backend=backend, agent_player=agent_player, source=path,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


def dump_agent(cfg: SearchConfig) -> dict[str, Any]:
    """Flat key/value view of a search configuration (the inverse of the agent schema)."""
    out = {k: getattr(cfg, k) for k in sorted(SEARCH_KEYS) if getattr(cfg, k) is not None}
    out.update(dataclasses.asdict(cfg.abstraction_policy))
    return out
