from ..averaging.polynomial import MAX_EXPONENT, AveragedPolynomial
from ..core.errors import IndexOutOfRange, ZeroPolynomial


def descartes_bound(poly):
    """Sign variations of the nonzero coefficients taken by ascending exponent."""
    signs = [c > 0 for _, c in poly.nonzero()]
    if not signs:
        raise ZeroPolynomial("Descartes bound of the zero polynomial is undefined")
    return sum(1 for prev, cur in zip(signs, signs[1:]) if prev != cur)


# -- Exact integer polynomial arithmetic (coefficient lists, lowest degree first) --
def poly_strip(a):
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a, b):
    res = [0] * (len(a) + len(b) - 1)
    for i in range(len(a)):
        for j in range(len(b)):
            res[i + j] += a[i] * b[j]
    return poly_strip(res)


def expand_roots(roots, leading=1):
    """Integer coefficients of leading * prod (z - root), lowest degree first."""
    out = [leading]
    for root in roots:
        out = poly_mul(out, [-root, 1])
    return out


def planted_polynomial(roots, leading=1, shift=1, extra_factor=(1,)):
    """z^shift * leading * prod (z - root) * extra_factor as an AveragedPolynomial."""
    coeffs = poly_mul(expand_roots(roots, leading), list(extra_factor))
    if shift + len(coeffs) - 1 > MAX_EXPONENT:
        raise IndexOutOfRange(f"planted polynomial has degree {shift + len(coeffs) - 1} > {MAX_EXPONENT}")
    return AveragedPolynomial({shift + k: float(c) for k, c in enumerate(coeffs) if c != 0})


def max_positive_roots_witness(r):
    """z (z-1)(z-2)...(z-(r-1)): r-1 positive roots with r-1 sign variations."""
    if not (1 <= r <= MAX_EXPONENT):
        raise IndexOutOfRange(f"r must lie in 1..{MAX_EXPONENT}, got {r}")
    return planted_polynomial(range(1, r))
