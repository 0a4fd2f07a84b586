"""Integer-order Bessel functions of the first kind.

Small arguments use the ascending series, everything else Miller's
downward recurrence normalised with J0 + 2*sum(J_2k) = 1.
"""

import math

MAX_ORDER = 200
MAX_ARG = 200.0

_RESCALE = 1e200


def _series(n, x):
    # n >= 0, (x/2)**2 <= n + 1: terms decrease monotonically, no cancellation
    half = 0.5 * x
    q = -half * half
    term = 1.0
    for k in range(1, n + 1):
        term *= half / k
        if term == 0.0:
            return 0.0
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def _miller(n, x):
    # n >= 0, x > 0
    top = max(n, x)
    start = 2 * ((int(top) + 20 + int(math.sqrt(60.0 * max(top, 1.0)))) // 2)
    two_over_x = 2.0 / x
    j_next = 0.0
    j_cur = 1e-30
    norm = 0.0
    picked = 0.0
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            picked /= _RESCALE
        # j_cur now holds J_{k-1}
        if k - 1 == n:
            picked = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return picked / norm


def bessel_j(n, x):
    """J_n(x) for integer ``n`` and real ``x`` with |n| <= 200, |x| <= 200.

    Relative accuracy is about 1e-13 away from zeros of J_n and absolute
    accuracy about 1e-15 near them.
    """
    if int(n) != n:
        raise ValueError(f"order must be an integer, got {n!r}")
    n = int(n)
    x = float(x)
    if abs(n) > MAX_ORDER or not abs(x) <= MAX_ARG:
        raise ValueError(f"bessel_j({n}, {x}) outside |n|<={MAX_ORDER}, |x|<={MAX_ARG}")

    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0.0:
        x = -x
        if n % 2:
            sign = -sign

    if x == 0.0:
        return sign if n == 0 else 0.0
    if 0.25 * x * x <= n + 1:
        return sign * _series(n, x)
    return sign * _miller(n, x)
