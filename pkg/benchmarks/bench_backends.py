"""Compare the compiled search core against the pure-Python engine.

For each domain and policy both backends search the same root with the same
seed; the script checks that the graphs are identical and reports the time
per iteration.  The transition cache is filled by an untimed run first, so
the numbers measure search work only.

    python3 benchmarks/bench_backends.py --iterations 2000 --repeat 3
"""
from __future__ import annotations

import argparse
import statistics
import time

from mcts_lab.domains import build_domain
from mcts_lab.search import ModelCache, available_backends, ipa, make_engine, oga, search_rng, uct

DOMAINS = {
    "navigation_fig2": {},
    "sysadmin": {},
    "racetrack": {},
    "sailing_wind": {},
    "tictactoe": {"horizon": 12},
}
POLICIES = {"UCT": uct, "OGA": oga, "IPA-0": lambda **kw: ipa(0.0, **kw)}


def time_search(model, cfg, root, horizon, backend, seed):
    eng = make_engine(model, cfg, search_rng(seed, "bench"), root, horizon, backend)
    start = time.perf_counter()
    eng.run()
    return time.perf_counter() - start, eng


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--depth", type=int, default=20, help="cap on the search horizon")
    args = ap.parse_args(argv)
    if "compiled" not in available_backends():
        raise SystemExit("the compiled core is not built; run `pip install -e . --no-build-isolation`")

    print(f"{'domain':<16} {'policy':<6} {'python us/it':>13} {'compiled us/it':>15} {'speedup':>8}  same")
    for name, params in DOMAINS.items():
        domain = build_domain(name, params)
        model = ModelCache(domain)
        root = model.intern(domain.initial_state())
        horizon = min(domain.horizon, args.depth)
        for label, make in POLICIES.items():
            cfg = make(iterations=args.iterations)
            time_search(model, cfg, root, horizon, "python", 0)  # warm the transition cache
            per = {}
            same = True
            for backend in ("python", "compiled"):
                runs = [time_search(model, cfg, root, horizon, backend, r) for r in range(args.repeat)]
                per[backend] = statistics.median(t for t, _ in runs) / args.iterations * 1e6
                if backend == "python":
                    ref = [e.snapshot() for _, e in runs]
                else:
                    same = all(e.snapshot() == s for (_, e), s in zip(runs, ref))
            print(f"{name:<16} {label:<6} {per['python']:>13.1f} {per['compiled']:>15.2f} "
                  f"{per['python'] / per['compiled']:>7.1f}x  {same}")


if __name__ == "__main__":
    main()
