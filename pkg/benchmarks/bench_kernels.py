"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--rounds N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qigrav import kernels
from qigrav.causal import game


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rounds", type=int, default=1_000_000)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    print(f"{'kernel':<34}" + "".join(f"{b:>12}" for b in backends))

    for k in (2, 3, 4):
        for alice_first in (True, False):
            label = f"enumerate k={k} {'A<B' if alice_first else 'B<A'}"
            cells = []
            for b in backends:
                impl = kernels.get_backend(b)
                cells.append(best_of(lambda: impl.enumerate_sequential(k, alice_first), args.repeat))
            print(f"{label:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in cells))

    strat = game.random_strategy(np.random.default_rng(0), alphabet=2)
    for b in backends:
        game.causal_game_simulate(strat, 1000, seed=0, backend=b)  # warm up
    label = f"simulate {args.rounds} rounds"
    cells = [
        best_of(lambda: game.causal_game_simulate(strat, args.rounds, seed=1, backend=b), args.repeat)
        for b in backends
    ]
    print(f"{label:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in cells))
    results = {b: game.causal_game_simulate(strat, args.rounds, seed=1, backend=b) for b in backends}
    same = len({(r.wins_b0, r.n_b0, r.wins_b1, r.n_b1) for r in results.values()}) == 1
    print(f"identical simulation counts across backends: {same}")


if __name__ == "__main__":
    main()
