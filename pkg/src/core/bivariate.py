import numpy as np

from .errors import DegreeExceeded, DuplicateTerm

MAX_DEGREE = 3


def _check_pair(i, j):
    if int(i) != i or int(j) != j or i < 0 or j < 0:
        raise DegreeExceeded(f"exponent pair ({i}, {j}) must be nonnegative integers")
    if i + j > MAX_DEGREE:
        raise DegreeExceeded(f"term x^{i} y^{j} has total degree {i + j} > {MAX_DEGREE}")


class BivarPoly:
    """
    Sparse real polynomial in (x, y) of total degree at most 3.

    Stored as an exponent map (i, j) -> coefficient; zero coefficients are
    never kept, so two polynomials are equal iff their maps are equal.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for (i, j), coef in dict(terms or {}).items():
            _check_pair(i, j)
            coef = float(coef)
            if coef != 0.0:
                clean[(int(i), int(j))] = coef
        self._terms = clean

    @classmethod
    def from_triples(cls, triples):
        terms = {}
        for i, j, coef in triples:
            if (i, j) in terms:
                raise DuplicateTerm(f"exponent pair ({i}, {j}) listed twice")
            terms[(i, j)] = coef
        return cls(terms)

    @classmethod
    def monomial(cls, i, j, coef=1.0):
        return cls({(i, j): coef})

    @property
    def terms(self):
        return dict(self._terms)

    def coefficient(self, i, j):
        return self._terms.get((i, j), 0.0)

    def is_zero(self):
        return not self._terms

    def items(self):
        return sorted(self._terms.items())

    def as_triples(self):
        return [[i, j, c] for (i, j), c in self.items()]

    def with_term(self, i, j, coef):
        terms = dict(self._terms)
        terms[(i, j)] = coef
        return BivarPoly(terms)

    def __add__(self, other):
        terms = dict(self._terms)
        for key, coef in other._terms.items():
            terms[key] = terms.get(key, 0.0) + coef
        return BivarPoly(terms)

    def scale(self, factor):
        return BivarPoly({k: factor * c for k, c in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, BivarPoly) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self.items()))

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        body = ", ".join(f"({i},{j}): {c!r}" for (i, j), c in self.items())
        return f"BivarPoly({{{body}}})"

    def __call__(self, x, y):
        return eval_bipoly(self, x, y)

    def eval_weighted_polar(self, r, theta):
        """Value at x = r cos(theta), y = r^2 sin(theta)."""
        c, s = np.cos(theta), np.sin(theta)
        total = 0.0
        for (i, j), coef in self._terms.items():
            total = total + coef * r ** (i + 2 * j) * c ** i * s ** j
        return total


def eval_bipoly(p, x, y):
    total = 0.0
    for (i, j), coef in p._terms.items():
        total = total + coef * x ** i * y ** j
    return total


ZERO = BivarPoly()
