"""
Integrand families of the first-order averaged function.

With r0 = ff(theta) z, the contribution of a^±_{i,j-1} x^i y^(j-1) and of
b^±_{i-1,j} x^(i-1) y^j to the coefficient of z^(i+2j) in h(z) = z^3 h1(z)
is the half-period integral of

    phi_{i,j} = (1 + sin^2) N cos^i sin^(j-1) ff^(i+2j-4) / g^2
    psi_{i,j} = (1 + sin^2) M cos^(i-1) sin^j  ff^(i+2j-4) / g^2
"""
import numpy as np

from ..blowup.weighted_polar import eval_M, eval_N, eval_g
from ..core.errors import IndexOutOfRange

MAX_INDEX_SUM = 4


def check_index_pair(i, j):
    if i < 0 or j < 0 or not (1 <= i + j <= MAX_INDEX_SUM):
        raise IndexOutOfRange(f"index pair ({i}, {j}) outside 1 <= i+j <= {MAX_INDEX_SUM}")


def _weight(params, ff, n, theta):
    s = np.sin(theta)
    return (1.0 + s * s) * ff.value(theta) ** (n - 4) / eval_g(params, theta) ** 2


def integrand_phi(problem, ff, i, j, theta):
    check_index_pair(i, j)
    if j < 1:
        raise IndexOutOfRange(f"phi_{{{i},{j}}} needs j >= 1")
    params = problem.params
    return (_weight(params, ff, i + 2 * j, theta) * eval_N(params, theta)
            * np.cos(theta) ** i * np.sin(theta) ** (j - 1))


def integrand_psi(problem, ff, i, j, theta):
    check_index_pair(i, j)
    if i < 1:
        raise IndexOutOfRange(f"psi_{{{i},{j}}} needs i >= 1")
    params = problem.params
    return (_weight(params, ff, i + 2 * j, theta) * eval_M(params, theta)
            * np.cos(theta) ** (i - 1) * np.sin(theta) ** j)


def coefficient_pairs():
    """All (i, j) with i, j >= 0 and 1 <= i+j <= 4, ordered by (i+2j, i)."""
    pairs = [(i, s - i) for s in range(1, MAX_INDEX_SUM + 1) for i in range(s + 1)]
    return sorted(pairs, key=lambda p: (p[0] + 2 * p[1], p[0]))
