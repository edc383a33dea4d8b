"""Batch execution of experiments: seeded episodes, result files, timing and scores.

Episode ``i`` of every agent uses seed ``base_seed + i`` for the environment
stream; each agent's search stream additionally hashes its label, so all
agents face the same environment randomness while searching independently.
Results are written in (agent, episode) order whatever the worker count.
"""
from __future__ import annotations

import csv
import json
import math
import os
import statistics
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..domains import build_domain
from ..eval import SCORERS, NoEligibleGroups, PerfMatrix, ScoreReport, TooFewAgents, abstraction_rate
from ..mdp import Domain
from ..search import ModelCache, SearchConfig, make_engine, play_episode, search_rng
from .config import ExperimentConfig

SCHEMA_VERSION = 1
COLUMNS = (
    "schema_version", "agent_label", "domain", "iterations", "episode_index", "seed", "return",
    "decision_time_ms_mean", "abstraction_rate_mean",
)
TIMING_COLUMNS = ("decision_time_ms_mean",)
MOVE_COLUMNS = ("agent_label", "episode_index", "step", "action", "decision_time_ms")


class HarnessError(RuntimeError):
    pass


class PartialResults(HarnessError):
    def __init__(self, path: Path, done: int, total: int):
        super().__init__(f"interrupted after {done} of {total} episodes; rows kept in {path}")
        self.path = path
        self.done = done
        self.total = total


class GridMismatch(HarnessError):
    pass


@dataclass
class ResultRow:
    agent_label: str
    domain: str
    iterations: int
    episode_index: int
    seed: int
    ret: float
    decision_time_ms_mean: float
    abstraction_rate_mean: float | None = None

    def cells(self) -> list[str]:
        rate = "" if self.abstraction_rate_mean is None else repr(self.abstraction_rate_mean)
        return [str(SCHEMA_VERSION), self.agent_label, self.domain, str(self.iterations),
                str(self.episode_index), str(self.seed), repr(self.ret),
                repr(self.decision_time_ms_mean), rate]


def worker_count(config: ExperimentConfig | None = None, override: int | None = None) -> int:
    env = os.environ.get("MCTS_LAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise HarnessError(f"MCTS_LAB_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    if override:
        return override
    if config is not None and config.workers:
        return config.workers
    return os.cpu_count() or 1


# -- episodes --------------------------------------------------------------------------

_CACHE: dict[str, tuple[Domain, ModelCache]] = {}
_CONFIG: ExperimentConfig | None = None


def _model_for(config: ExperimentConfig) -> tuple[Domain, ModelCache]:
    key = json.dumps([config.domain_name, config.domain_params], sort_keys=True, default=str)
    hit = _CACHE.get(key)
    if hit is None:
        domain = config.build_domain()
        hit = _CACHE[key] = (domain, ModelCache(domain))
    return hit


def run_episode(config: ExperimentConfig, agent_index: int, episode_index: int) -> tuple[ResultRow, list]:
    domain, model = _model_for(config)
    agent = config.agents[agent_index]
    seed = config.seed(episode_index)
    rates: list[float] = []
    callback = None
    if config.telemetry.abstraction_rate:
        def callback(engine, step, state):
            try:
                rates.append(abstraction_rate(engine.snapshot()))
            except NoEligibleGroups:
                pass
    res = play_episode(
        domain, agent.config, config.opponent, seed=seed,
        agent_player=config.player_for(episode_index) if config.opponent is not None else 0,
        stream_label=agent.label, backend=config.backend, model=model, on_decision=callback,
    )
    times = [1000.0 * t for t in res.decision_times]
    row = ResultRow(
        agent.label, config.domain_name, agent.config.iterations, episode_index, seed, res.ret,
        statistics.fmean(times) if times else 0.0,
        statistics.fmean(rates) if rates else None,
    )
    moves = []
    if config.telemetry.per_move_log:
        moves = [(agent.label, episode_index, i, a, t) for i, (a, t) in enumerate(zip(res.actions, times))]
    return row, moves


def _init_worker(config: ExperimentConfig) -> None:
    global _CONFIG
    _CONFIG = config


def _job(job: tuple[int, int]):
    return run_episode(_CONFIG, *job)


def _iter_results(config: ExperimentConfig, jobs: list[tuple[int, int]], workers: int):
    if workers <= 1:
        for a, e in jobs:
            yield run_episode(config, a, e)
        return
    chunk = max(1, len(jobs) // (8 * workers))
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(config,)) as pool:
        yield from pool.map(_job, jobs, chunksize=chunk)


def default_output(config: ExperimentConfig) -> Path:
    if config.output:
        return Path(config.output)
    stem = Path(config.source).stem if config.source else config.domain_name
    return Path(f"{stem}.results.csv")


def partial_path(path: Path) -> Path:
    return path.with_name(path.name + ".partial")


def run_experiment(config: ExperimentConfig, output: str | Path | None = None, workers: int | None = None) -> Path:
    """Run every (agent, episode) pair once and write the CSV atomically; returns its path.

    Rows are appended to ``<output>.partial`` as they complete; the file is
    renamed into place only when all episodes finished.
    """
    out = Path(output) if output is not None else default_output(config)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = partial_path(out)
    moves_out = out.with_name(out.stem + ".moves.csv")
    jobs = [(a, e) for a in range(len(config.agents)) for e in range(config.episodes)]
    n = worker_count(config, workers)
    done = 0
    moves: list = []
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        try:
            for row, mv in _iter_results(config, jobs, n):
                w.writerow(row.cells())
                fh.flush()
                moves.extend(mv)
                done += 1
        except (KeyboardInterrupt, Exception) as exc:
            fh.flush()
            raise PartialResults(tmp, done, len(jobs)) from exc
    if config.telemetry.per_move_log:
        mtmp = partial_path(moves_out)
        with open(mtmp, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MOVE_COLUMNS)
            for label, ep, step, a, t in moves:
                w.writerow([label, ep, step, a, repr(t)])
        os.replace(mtmp, moves_out)
    os.replace(tmp, out)
    return out


def read_results(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.name.endswith(".partial"):
        raise HarnessError(f"{path} holds partial results and is never scored")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        if r.get("schema_version") != str(SCHEMA_VERSION):
            raise HarnessError(f"{path}: unsupported schema_version {r.get('schema_version')!r}")
    return rows


# -- timing ------------------------------------------------------------------------------

def measure_runtime(config: ExperimentConfig, warmup: bool = True) -> dict[str, float]:
    """Mean wall-clock milliseconds per agent decision, single-threaded.

    States come from each agent's own episodes.  With ``warmup`` every episode
    is first played once untimed so the transition cache is filled; the timed
    pass replays the same seeds and therefore the same states, so the numbers
    measure search work rather than model construction.
    """
    domain, model = _model_for(config)
    passes = (False, True) if warmup else (True,)
    times: dict[str, list[float]] = {}
    for timed in passes:
        times = {agent.label: [] for agent in config.agents}
        # agents alternate within each episode so slow drift of the machine hits all of them alike
        for e in range(config.episodes):
            for agent in config.agents:
                res = play_episode(
                    domain, agent.config, config.opponent, seed=config.seed(e),
                    agent_player=config.player_for(e) if config.opponent is not None else 0,
                    stream_label=agent.label, backend=config.backend, model=model,
                )
                times[agent.label].extend(res.decision_times)
    return {label: 1000.0 * statistics.fmean(t) if t else math.nan for label, t in times.items()}


# -- scores --------------------------------------------------------------------------------

def perf_matrix(files: Sequence[str | Path]) -> PerfMatrix:
    """Agents x tasks of mean returns; a task is a (domain, iteration budget) cell."""
    returns: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for f in files:
        for r in read_results(f):
            task = f"{r['domain']}@{r['iterations']}"
            returns[r["agent_label"]][task].append(float(r["return"]))
    agents = sorted(returns)
    if len(agents) < 2:
        raise TooFewAgents(f"scores need at least 2 agents, got {len(agents)}")
    grid = sorted(returns[agents[0]])
    for a in agents[1:]:
        if sorted(returns[a]) != grid:
            raise GridMismatch(f"agent {a!r} covers tasks {sorted(returns[a])}, expected {grid}")
    perf = [[statistics.fmean(returns[a][t]) for t in grid] for a in agents]
    return PerfMatrix(agents, grid, perf)


def score_results(files: Sequence[str | Path], kind: str, out_prefix: str | Path | None = None) -> ScoreReport:
    """Score result files; with ``out_prefix`` writes ``<prefix>.<kind>.csv`` and ``.json``."""
    if kind not in SCORERS:
        raise HarnessError(f"unknown score kind {kind!r}; choose from {', '.join(SCORERS)}")
    report = SCORERS[kind](perf_matrix(files))
    if out_prefix is not None:
        base = Path(out_prefix)
        base.parent.mkdir(parents=True, exist_ok=True)
        for ext, text in (("csv", report.to_csv()), ("json", report.to_json())):
            target = base.with_name(f"{base.name}.{kind}.{ext}")
            tmp = partial_path(target)
            tmp.write_text(text, encoding="utf-8")
            os.replace(tmp, target)
    return report


# -- abstraction-rate protocol ---------------------------------------------------------------

def abstraction_rate_study(
    domain: Domain | str,
    measured: dict[str, SearchConfig],
    driver: SearchConfig,
    episodes: int = 100,
    base_seed: int = 0,
    backend: str | None = None,
    params: dict | None = None,
    opponent: SearchConfig | None = None,
) -> dict[str, tuple[float, int]]:
    """Mean abstraction rate of each measured configuration over the driver's states.

    The driver (OGA-UCT in the reference protocol) plays the episodes; at
    every decision state each measured configuration runs its own search and
    the rate of that graph is recorded.  Graphs without eligible groups are
    skipped.  Returns ``{label: (mean rate, graphs counted)}``.
    """
    if isinstance(domain, str):
        domain = build_domain(domain, params)
    model = ModelCache(domain)
    rates: dict[str, list[float]] = {label: [] for label in measured}
    for e in range(episodes):
        seed = base_seed + e
        streams = {label: search_rng(seed, f"rate:{label}") for label in measured}

        def measure(engine, step, state):
            h = domain.horizon - step
            for label, cfg in measured.items():
                depth = h if cfg.planning_horizon is None else min(h, cfg.planning_horizon)
                eng = make_engine(model, cfg, streams[label], model.intern(state), depth, backend)
                eng.run()
                try:
                    rates[label].append(abstraction_rate(eng.snapshot()))
                except NoEligibleGroups:
                    pass

        play_episode(domain, driver, opponent, seed=seed, agent_player=e % 2 if opponent else 0,
                     stream_label="driver", backend=backend, model=model, on_decision=measure)
    return {label: (statistics.fmean(v) if v else math.nan, len(v)) for label, v in rates.items()}


def load_rows(files: Iterable[str | Path]) -> list[dict]:
    rows: list[dict] = []
    for f in files:
        rows.extend(read_results(f))
    return rows
