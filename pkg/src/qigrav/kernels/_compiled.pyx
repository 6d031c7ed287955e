# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for the causal-order game.

Coin configurations are indexed ``c = 4 a + 2 b + b'``; Alice's input is
``a`` and Bob's is ``2 b + b'``. A round is won when ``b' = 0`` and Alice's
guess equals ``b``, or ``b' = 1`` and Bob's guess equals ``a``.
"""

cdef void _configs(bint alice_first, int* i1, int* i2, int* by_first, int* target):
    cdef int c, a, b, bp
    for c in range(8):
        a = c >> 2
        b = (c >> 1) & 1
        bp = c & 1
        if alice_first:
            i1[c] = a
            i2[c] = 2 * b + bp
            by_first[c] = bp == 0
        else:
            i1[c] = 2 * b + bp
            i2[c] = a
            by_first[c] = bp == 1
        target[c] = b if bp == 0 else a


def enumerate_sequential(int k, bint alice_first):
    """Exhaust deterministic strategies for a fixed order.

    Returns ``(best_wins, n_optimal, n_total, enc, g1, g2)`` where the last
    three encode the first optimal strategy met in ``(enc, g1, g2)`` order:
    ``enc`` holds the first agent's message per input as base-``k`` digits,
    ``g1`` the first agent's guess bits, ``g2`` the second agent's guess bit
    at ``m * n2 + input``. The score splits into a ``g1`` part and a ``g2``
    part, so each is scored once per ``enc`` and the pairs are combined.
    """
    cdef int n1 = 2 if alice_first else 4
    cdef int n2 = 4 if alice_first else 2
    cdef long long n_enc = 1, n_g1 = 1 << n1, n_g2 = 1LL << (k * n2)
    cdef long long enc, g1, g2, e, n_opt = 0, best_enc = 0, best_g1 = 0, best_g2 = 0
    cdef long long n_top, first_top
    cdef int i1[8]
    cdef int i2[8]
    cdef int by_first[8]
    cdef int target[8]
    cdef int shift[8]
    cdef int msg[4]
    cdef int late_shift[8]
    cdef int late_target[8]
    cdef int c, j, wins, score, top, best = -1, bit, n_late
    for j in range(n1):
        n_enc *= k
    _configs(alice_first, i1, i2, by_first, target)
    for enc in range(n_enc):
        e = enc
        for j in range(n1):
            msg[j] = e % k
            e //= k
        n_late = 0
        for c in range(8):
            shift[c] = msg[i1[c]] * n2 + i2[c]
            if not by_first[c]:
                late_shift[n_late] = shift[c]
                late_target[n_late] = target[c]
                n_late += 1
        top = -1
        n_top = 0
        first_top = 0
        for g2 in range(n_g2):
            score = 0
            for c in range(n_late):
                score += ((g2 >> late_shift[c]) & 1) == late_target[c]
            if score > top:
                top = score
                n_top = 1
                first_top = g2
            elif score == top:
                n_top += 1
        for g1 in range(n_g1):
            wins = top
            for c in range(8):
                if by_first[c]:
                    bit = (g1 >> i1[c]) & 1
                    wins += bit == target[c]
            if wins > best:
                best = wins
                n_opt = n_top
                best_enc = enc
                best_g1 = g1
                best_g2 = first_top
            elif wins == best:
                n_opt += n_top
    return best, n_opt, n_enc * n_g1 * n_g2, best_enc, best_g1, best_g2


def play_rounds(
    const unsigned char[:] alice_first,
    const unsigned char[:] a,
    const unsigned char[:] b,
    const unsigned char[:] bp,
    const double[:] ux,
    const double[:] uy,
    int k,
    const long long[:] alice_encode,
    const long long[:] bob_encode,
    const double[:] alice_guess,
    const double[:] bob_guess,
):
    """Score pre-drawn rounds; returns ``(wins_b0, n_b0, wins_b1, n_b1)``.

    Guess tables hold ``P(guess = 1)`` indexed by ``received * n_inputs +
    input``; ``received = k`` means the agent acted first.
    """
    cdef Py_ssize_t r, n = a.shape[0]
    cdef long long m, w0 = 0, n0 = 0, w1 = 0, n1 = 0
    cdef int x, y, ib
    cdef double px, py
    for r in range(n):
        ib = 2 * b[r] + bp[r]
        if alice_first[r]:
            m = alice_encode[a[r]]
            px = alice_guess[k * 2 + a[r]]
            py = bob_guess[m * 4 + ib]
        else:
            m = bob_encode[ib]
            py = bob_guess[k * 4 + ib]
            px = alice_guess[m * 2 + a[r]]
        if bp[r] == 0:
            x = ux[r] < px
            n0 += 1
            w0 += x == b[r]
        else:
            y = uy[r] < py
            n1 += 1
            w1 += y == a[r]
    return w0, n0, w1, n1
