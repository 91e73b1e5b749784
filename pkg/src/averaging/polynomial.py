from dataclasses import dataclass, field

import numpy as np

MIN_EXPONENT, MAX_EXPONENT = 1, 8


@dataclass(frozen=True)
class AveragedPolynomial:
    """
    h(z) = z^3 h1(z) as a sparse map exponent -> coefficient, 1 <= n <= 8.

    provenance[n] lists the (i, j) entries with i + 2j = n that were summed
    into coeffs[n]; errors[n] is the summed quadrature error of those entries.
    """
    coeffs: dict
    provenance: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def __post_init__(self):
        for n in self.coeffs:
            if not (MIN_EXPONENT <= n <= MAX_EXPONENT):
                raise ValueError(f"exponent {n} outside {MIN_EXPONENT}..{MAX_EXPONENT}")

    @classmethod
    def from_sequence(cls, values, start=1):
        return cls({start + k: float(v) for k, v in enumerate(values)})

    def nonzero(self):
        return [(n, c) for n, c in sorted(self.coeffs.items()) if c != 0.0]

    def is_zero(self):
        return not self.nonzero()

    def coefficient(self, n):
        return self.coeffs.get(n, 0.0)

    def as_vector(self):
        return [self.coefficient(n) for n in range(MIN_EXPONENT, MAX_EXPONENT + 1)]

    def degree(self):
        terms = self.nonzero()
        return terms[-1][0] if terms else 0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for n, c in self.nonzero():
            total = total + c * z ** n
        return total if total.ndim else float(total)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for n, c in self.nonzero():
            total = total + n * c * z ** (n - 1)
        return total if total.ndim else float(total)

    def h1(self, z):
        return self(z) / np.asarray(z, dtype=float) ** 3

    def rows(self):
        return [{"n": n, "coefficient": self.coefficient(n)} for n in sorted(self.coeffs)]
