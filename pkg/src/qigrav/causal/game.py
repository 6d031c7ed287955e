"""Two-party causal-order game and its definite-order bound.

Alice tosses ``a``; Bob tosses ``b`` and ``b'``. Alice guesses ``x`` for
``b`` and Bob guesses ``y`` for ``a``; the score is
``p_suc = (P(x = b | b' = 0) + P(y = a | b' = 1)) / 2``.

In a definite order only the agent acting second receives a message (one
symbol from an alphabet of size ``k``). The message the second agent emits
leaves the game, so its encoder does not affect the score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import kernels
from ..core import make_rng
from ..errors import CapacityError, ContractError

A_BEFORE_B = "A<B"
B_BEFORE_A = "B<A"
MAX_ALPHABET = 4


@dataclass(frozen=True)
class CausalGameStrategy:
    """Strategy tables for both orders.

    ``alice_guess[r, a]`` is the probability that Alice guesses ``x = 1``
    after receiving symbol ``r`` with coin ``a``; row ``r = k`` is used when
    she acts first and receives nothing. ``bob_guess[r, 2 b + b']`` likewise.
    ``p_alice_first`` is the probability of the order ``A<B`` in a round.
    """

    alphabet: int
    p_alice_first: float
    alice_encode: tuple[int, int]
    bob_encode: tuple[int, int, int, int]
    alice_guess: np.ndarray
    bob_guess: np.ndarray

    def __post_init__(self):
        k = self.alphabet
        if k < 1:
            raise ContractError("alphabet size must be at least 1")
        if not 0.0 <= self.p_alice_first <= 1.0:
            raise ContractError("p_alice_first must be a probability")
        enc_a = tuple(int(m) for m in self.alice_encode)
        enc_b = tuple(int(m) for m in self.bob_encode)
        if len(enc_a) != 2 or len(enc_b) != 4:
            raise ContractError("encoders need 2 (Alice) and 4 (Bob) entries")
        if any(not 0 <= m < k for m in enc_a + enc_b):
            raise ContractError(f"encoded messages must lie in [0, {k})")
        ga = np.array(self.alice_guess, dtype=float)
        gb = np.array(self.bob_guess, dtype=float)
        if ga.shape != (k + 1, 2) or gb.shape != (k + 1, 4):
            raise ContractError(f"guess tables must have shapes {(k + 1, 2)} and {(k + 1, 4)}")
        if np.any((ga < 0) | (ga > 1)) or np.any((gb < 0) | (gb > 1)):
            raise ContractError("guess tables hold probabilities in [0, 1]")
        ga.setflags(write=False)
        gb.setflags(write=False)
        object.__setattr__(self, "alice_encode", enc_a)
        object.__setattr__(self, "bob_encode", enc_b)
        object.__setattr__(self, "alice_guess", ga)
        object.__setattr__(self, "bob_guess", gb)

    @property
    def order(self) -> str:
        if self.p_alice_first == 1.0:
            return A_BEFORE_B
        if self.p_alice_first == 0.0:
            return B_BEFORE_A
        return "mixed"

    @property
    def deterministic(self) -> bool:
        tables = np.concatenate([self.alice_guess.ravel(), self.bob_guess.ravel()])
        return bool(np.all((tables == 0) | (tables == 1))) and self.p_alice_first in (0.0, 1.0)


def _blank(k: int):
    return np.zeros((k + 1, 2)), np.zeros((k + 1, 4))


def optimal_strategy(alphabet: int = 2, order: str = A_BEFORE_B) -> CausalGameStrategy:
    """The second agent reads the first agent's coin; the first guesses at random."""
    if alphabet < 2:
        raise ContractError("passing a coin needs an alphabet of at least 2 symbols")
    k = alphabet
    ga, gb = _blank(k)
    if order == A_BEFORE_B:
        ga[k, :] = 0.5
        for m in (0, 1):
            gb[m, :] = m  # y = received a
        return CausalGameStrategy(k, 1.0, (0, 1), (0, 0, 0, 0), ga, gb)
    if order == B_BEFORE_A:
        gb[k, :] = 0.5
        for m in (0, 1):
            ga[m, :] = m  # x = received b
        return CausalGameStrategy(k, 0.0, (0, 0), (0, 0, 1, 1), ga, gb)
    raise ValueError(f"order must be {A_BEFORE_B!r} or {B_BEFORE_A!r}")


def random_guess_strategy(alphabet: int = 2, p_alice_first: float = 1.0) -> CausalGameStrategy:
    ga, gb = _blank(alphabet)
    return CausalGameStrategy(alphabet, p_alice_first, (0, 0), (0, 0, 0, 0), ga + 0.5, gb + 0.5)


def random_strategy(rng: np.random.Generator, alphabet: int = 2, deterministic: bool = False) -> CausalGameStrategy:
    k = alphabet
    if deterministic:
        ga = rng.integers(0, 2, size=(k + 1, 2)).astype(float)
        gb = rng.integers(0, 2, size=(k + 1, 4)).astype(float)
        p = float(rng.integers(0, 2))
    else:
        ga, gb, p = rng.random((k + 1, 2)), rng.random((k + 1, 4)), float(rng.random())
    return CausalGameStrategy(
        k, p, tuple(rng.integers(0, k, size=2)), tuple(rng.integers(0, k, size=4)), ga, gb
    )


def success_components(strategy: CausalGameStrategy) -> tuple[Fraction, Fraction]:
    """Exact ``(P(x = b | b' = 0), P(y = a | b' = 1))`` with fair coins."""
    k = strategy.alphabet
    ga = [[Fraction(float(v)) for v in row] for row in strategy.alice_guess]
    gb = [[Fraction(float(v)) for v in row] for row in strategy.bob_guess]
    p_first = Fraction(strategy.p_alice_first)
    hit = [Fraction(0), Fraction(0)]
    for alice_first, weight in ((True, p_first), (False, 1 - p_first)):
        if weight == 0:
            continue
        for a in (0, 1):
            for b in (0, 1):
                for bp in (0, 1):
                    ib = 2 * b + bp
                    if alice_first:
                        m = strategy.alice_encode[a]
                        px, py = ga[k][a], gb[m][ib]
                    else:
                        m = strategy.bob_encode[ib]
                        px, py = ga[m][a], gb[k][ib]
                    if bp == 0:
                        hit[0] += weight * (px if b == 1 else 1 - px)
                    else:
                        hit[1] += weight * (py if a == 1 else 1 - py)
    # each b' value covers 4 equally likely (a, b) pairs
    return hit[0] / 4, hit[1] / 4


def success_probability(strategy: CausalGameStrategy) -> Fraction:
    p0, p1 = success_components(strategy)
    return (p0 + p1) / 2


def _decode(k: int, alice_first: bool, enc: int, g1: int, g2: int) -> CausalGameStrategy:
    ga, gb = _blank(k)
    if alice_first:
        alice_encode = tuple((enc // k**a) % k for a in (0, 1))
        bob_encode = (0, 0, 0, 0)
        for a in (0, 1):
            ga[k, a] = (g1 >> a) & 1
        for m in range(k):
            for ib in range(4):
                gb[m, ib] = (g2 >> (m * 4 + ib)) & 1
        return CausalGameStrategy(k, 1.0, alice_encode, bob_encode, ga, gb)
    alice_encode = (0, 0)
    bob_encode = tuple((enc // k**ib) % k for ib in range(4))
    for ib in range(4):
        gb[k, ib] = (g1 >> ib) & 1
    for m in range(k):
        for a in (0, 1):
            ga[m, a] = (g2 >> (m * 2 + a)) & 1
    return CausalGameStrategy(k, 0.0, alice_encode, bob_encode, ga, gb)


@dataclass(frozen=True)
class OrderOptimum:
    order: str
    p_suc: Fraction
    strategy: CausalGameStrategy
    n_strategies: int
    n_optimal: int


@dataclass(frozen=True)
class CausalGameMax:
    p_suc: Fraction
    strategy: CausalGameStrategy
    per_order: dict
    n_strategies: int


def causal_game_classical_max(alphabet: int, backend: str | None = None) -> CausalGameMax:
    """Definite-order optimum by exhausting deterministic strategies per order.

    Randomized strategies and random orders are convex mixtures of the
    deterministic fixed-order ones and ``p_suc`` is linear in the mixture,
    so the largest per-order value is the overall bound.
    """
    if alphabet < 1:
        raise ContractError("alphabet size must be at least 1")
    if alphabet > MAX_ALPHABET:
        raise CapacityError(f"exhaustive search is limited to alphabet sizes <= {MAX_ALPHABET}")
    impl = kernels if backend is None else kernels.get_backend(backend)
    per_order = {}
    for order, alice_first in ((A_BEFORE_B, True), (B_BEFORE_A, False)):
        wins, n_opt, n_total, enc, g1, g2 = impl.enumerate_sequential(alphabet, alice_first)
        strat = _decode(alphabet, alice_first, int(enc), int(g1), int(g2))
        per_order[order] = OrderOptimum(order, Fraction(int(wins), 8), strat, int(n_total), int(n_opt))
    best = max(per_order.values(), key=lambda o: o.p_suc)
    return CausalGameMax(best.p_suc, best.strategy, per_order, sum(o.n_strategies for o in per_order.values()))


@dataclass(frozen=True)
class GameSimulation:
    p_suc: float
    wins_b0: int
    n_b0: int
    wins_b1: int
    n_b1: int

    @property
    def n_rounds(self) -> int:
        return self.n_b0 + self.n_b1


def standard_error(p_b0: float, p_b1: float, n_rounds: int) -> float:
    """Standard error of the simulated ``p_suc`` (each b' branch gets n/2 rounds)."""
    half = n_rounds / 2
    return 0.5 * math.sqrt(p_b0 * (1 - p_b0) / half + p_b1 * (1 - p_b1) / half)


def _play(strategy: CausalGameStrategy, n: int, rng: np.random.Generator, impl) -> tuple[int, int, int, int]:
    order = (rng.random(n) < strategy.p_alice_first).astype(np.uint8)
    coins = rng.integers(0, 2, size=(3, n), dtype=np.uint8)
    u = rng.random((2, n))
    return impl.play_rounds(
        order,
        coins[0],
        coins[1],
        coins[2],
        u[0],
        u[1],
        strategy.alphabet,
        np.asarray(strategy.alice_encode, dtype=np.int64),
        np.asarray(strategy.bob_encode, dtype=np.int64),
        np.ascontiguousarray(strategy.alice_guess.ravel()),
        np.ascontiguousarray(strategy.bob_guess.ravel()),
    )


def causal_game_simulate(
    strategy: CausalGameStrategy,
    n_rounds: int,
    seed: int = 0,
    workers: int = 1,
    backend: str | None = None,
) -> GameSimulation:
    """Monte Carlo rounds with fair independent coins.

    Rounds are split across ``workers`` batches, batch ``w`` drawing from
    ``make_rng(seed, w)``; the totals depend only on ``(seed, workers)``.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    impl = kernels if backend is None else kernels.get_backend(backend)
    totals = [0, 0, 0, 0]
    for w in range(workers):
        share = n_rounds // workers + (1 if w < n_rounds % workers else 0)
        if share == 0:
            continue
        for i, v in enumerate(_play(strategy, share, make_rng(seed, w), impl)):
            totals[i] += int(v)
    w0, n0, w1, n1 = totals
    if n0 and n1:
        p = 0.5 * (w0 / n0 + w1 / n1)
    else:  # a tiny run may never see one of the b' values
        p = (w0 + w1) / (n0 + n1)
    return GameSimulation(p, w0, n0, w1, n1)
