"""Pure-Python (numpy) versions of the compiled kernels, same signatures."""

from __future__ import annotations

import numpy as np

_C = np.arange(8)
_A, _B, _BP = _C >> 2, (_C >> 1) & 1, _C & 1
_TARGET = np.where(_BP == 0, _B, _A)


def _configs(alice_first: bool):
    if alice_first:
        return _A, 2 * _B + _BP, _BP == 0
    return 2 * _B + _BP, _A, _BP == 1


def enumerate_sequential(k: int, alice_first: bool):
    n1 = 2 if alice_first else 4
    n2 = 4 if alice_first else 2
    i1, i2, by_first = _configs(alice_first)
    g2_all = np.arange(1 << (k * n2), dtype=np.int64)
    best, n_opt = -1, 0
    best_enc = best_g1 = best_g2 = 0
    for enc in range(k**n1):
        msg = [(enc // k**j) % k for j in range(n1)]
        shift = np.array([msg[i1[c]] * n2 + i2[c] for c in range(8)])
        # wins contributed by the second agent, for every g2 at once
        second = np.zeros(g2_all.size, dtype=np.int64)
        for c in np.flatnonzero(~by_first):
            second += ((g2_all >> shift[c]) & 1) == _TARGET[c]
        top = int(second.max())
        n_top = int(np.count_nonzero(second == top))
        first_top = int(np.argmax(second))
        for g1 in range(1 << n1):
            wins = top + sum(int(((g1 >> i1[c]) & 1) == _TARGET[c]) for c in np.flatnonzero(by_first))
            if wins > best:
                best, n_opt = wins, n_top
                best_enc, best_g1, best_g2 = enc, g1, first_top
            elif wins == best:
                n_opt += n_top
    return best, n_opt, k**n1 * (1 << n1) * g2_all.size, best_enc, best_g1, best_g2


def play_rounds(alice_first, a, b, bp, ux, uy, k, alice_encode, bob_encode, alice_guess, bob_guess):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    bp = np.asarray(bp, dtype=np.int64)
    first = np.asarray(alice_first, dtype=bool)
    ib = 2 * b + bp
    alice_encode = np.asarray(alice_encode)
    bob_encode = np.asarray(bob_encode)
    alice_guess = np.asarray(alice_guess)
    bob_guess = np.asarray(bob_guess)
    m = np.where(first, alice_encode[a], bob_encode[ib])
    px = np.where(first, alice_guess[k * 2 + a], alice_guess[m * 2 + a])
    py = np.where(first, bob_guess[m * 4 + ib], bob_guess[k * 4 + ib])
    x = np.asarray(ux) < px
    y = np.asarray(uy) < py
    mask0 = bp == 0
    w0 = int(np.count_nonzero(x[mask0] == b[mask0]))
    w1 = int(np.count_nonzero(y[~mask0] == a[~mask0]))
    n0 = int(np.count_nonzero(mask0))
    return w0, n0, w1, a.size - n0
