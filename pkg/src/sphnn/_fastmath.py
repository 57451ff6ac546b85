"""Distance arithmetic shared by the Python relation tests and the compiled
loops, so both sides classify boundary cases identically."""
import math

from numba import njit


@njit(cache=True)
def dist(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        d = a[i] - b[i]
        acc += d * d
    return math.sqrt(acc)
