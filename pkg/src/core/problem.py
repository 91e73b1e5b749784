import enum
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .bivariate import ZERO, BivarPoly
from .errors import CenterConditionViolated, ParseError

POLY_NAMES = ("p_plus", "p_minus", "q_plus", "q_minus")


# ─────────────────────────────────────────────────────────────────────────────
# Unperturbed centre x' = a x^2 + b y,  y' = c x^3 + d x y
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class CenterParams:
    a: float
    b: float
    c: float
    d: float
    discriminant: float = field(compare=False, default=float("nan"))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


def center_discriminant(a, b, c, d):
    return (d - 2.0 * a) ** 2 + 8.0 * b * c


def validate_center(a, b, c, d):
    values = [float(v) for v in (a, b, c, d)]
    if not all(math.isfinite(v) for v in values):
        raise ParseError(f"centre parameters must be finite, got {values}")
    disc = center_discriminant(*values)
    if not disc < 0.0:
        raise CenterConditionViolated(disc)
    return CenterParams(*values, discriminant=disc)


# ─────────────────────────────────────────────────────────────────────────────
# Switching line
# ─────────────────────────────────────────────────────────────────────────────
class SwitchingLine(enum.Enum):
    VERTICAL_X0 = "x=0"
    HORIZONTAL_Y0 = "y=0"

    @property
    def base_angle(self):
        return -math.pi / 2 if self is SwitchingLine.VERTICAL_X0 else 0.0

    @property
    def split_angles(self):
        alpha = self.base_angle
        return (alpha, alpha + math.pi, alpha + 2 * math.pi)

    @classmethod
    def from_tag(cls, tag):
        for member in cls:
            if member.value == str(tag).replace(" ", ""):
                return member
        raise ParseError(f"switching_line must be 'x=0' or 'y=0', got {tag!r}")


def on_plus_side(line, theta):
    """True on the closed half-plane x >= 0 (or y >= 0) in the blown-up angle."""
    if line is SwitchingLine.VERTICAL_X0:
        return np.cos(theta) >= 0.0
    return np.sin(theta) >= 0.0


@dataclass(frozen=True)
class Problem:
    params: CenterParams
    line: SwitchingLine
    p_plus: BivarPoly = ZERO
    p_minus: BivarPoly = ZERO
    q_plus: BivarPoly = ZERO
    q_minus: BivarPoly = ZERO
    name: str = ""

    def poly(self, poly_name):
        if poly_name not in POLY_NAMES:
            raise KeyError(poly_name)
        return getattr(self, poly_name)

    def with_coefficient(self, poly_name, i, j, coef):
        return replace(self, **{poly_name: self.poly(poly_name).with_term(i, j, coef)})

    def is_unperturbed(self):
        return all(self.poly(n).is_zero() for n in POLY_NAMES)


def branch_polys(problem, theta, side=None):
    """
    (p, q) active at angle theta; the + pair applies on the switching set.
    side ("+" or "-") overrides the angle test for one-sided limits.
    """
    plus = on_plus_side(problem.line, theta) if side is None else side == "+"
    if plus:
        return problem.p_plus, problem.q_plus
    return problem.p_minus, problem.q_minus


# ─────────────────────────────────────────────────────────────────────────────
# Configuration documents
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Target:
    """Target coefficient of z^n in h(z), reached by solving for one perturbation coefficient."""
    poly_name: str
    i: int
    j: int
    coefficient: float


@dataclass(frozen=True)
class ProblemDocument:
    problem: Problem
    verification: dict = field(default_factory=dict)
    targets: tuple = ()


def parse_coefficient(value):
    if isinstance(value, bool):
        raise ParseError(f"coefficient must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        text = value.strip().replace("−", "-")
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                exact = Fraction(num.strip()) / Fraction(den.strip())
            else:
                exact = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot read coefficient {value!r}: {exc}") from exc
        out = float(exact)
    else:
        raise ParseError(f"coefficient must be a number or 'n/d' string, got {value!r}")
    if not math.isfinite(out):
        raise ParseError(f"coefficient {value!r} is not finite")
    return out


def _parse_poly(raw, name):
    if raw is None:
        return ZERO
    if not isinstance(raw, list):
        raise ParseError(f"perturbation.{name} must be a list of [i, j, coefficient] triples")
    triples = []
    for item in raw:
        if not isinstance(item, list) or len(item) != 3:
            raise ParseError(f"perturbation.{name}: bad term {item!r}")
        i, j, coef = item
        if isinstance(i, bool) or isinstance(j, bool) or not isinstance(i, int) or not isinstance(j, int):
            raise ParseError(f"perturbation.{name}: exponents must be integers, got {item!r}")
        triples.append((i, j, parse_coefficient(coef)))
    return BivarPoly.from_triples(triples)


def _load_json(config_text):
    if isinstance(config_text, (bytes, bytearray)):
        try:
            config_text = config_text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"configuration is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed configuration: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a JSON object")
    return doc


def _problem_from_doc(doc):
    center = doc.get("center")
    if not isinstance(center, dict) or any(k not in center for k in "abcd"):
        raise ParseError("center must be an object with keys a, b, c, d")
    params = validate_center(*(parse_coefficient(center[k]) for k in "abcd"))
    if "switching_line" not in doc:
        raise ParseError("missing switching_line")
    line = SwitchingLine.from_tag(doc["switching_line"])
    pert = doc.get("perturbation", {}) or {}
    if not isinstance(pert, dict):
        raise ParseError("perturbation must be an object")
    unknown = set(pert) - set(POLY_NAMES)
    if unknown:
        raise ParseError(f"unknown perturbation blocks: {sorted(unknown)}")
    polys = {name: _parse_poly(pert.get(name), name) for name in POLY_NAMES}
    return Problem(params=params, line=line, name=str(doc.get("name", "")), **polys)


def parse_problem(config_text):
    return _problem_from_doc(_load_json(config_text))


def parse_document(config_text):
    doc = _load_json(config_text)
    problem = _problem_from_doc(doc)
    verification = doc.get("verification", {}) or {}
    if not isinstance(verification, dict):
        raise ParseError("verification must be an object")
    targets = []
    for item in doc.get("targets", []) or []:
        try:
            i, j = item["term"]
            target = Target(item["poly"], int(i), int(j), parse_coefficient(item["coefficient"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad target entry {item!r}") from exc
        if target.poly_name not in POLY_NAMES:
            raise ParseError(f"target names unknown polynomial {target.poly_name!r}")
        targets.append(target)
    return ProblemDocument(problem, verification, tuple(targets))


def serialize_problem(problem):
    p = problem.params
    doc = {
        "center": {"a": p.a, "b": p.b, "c": p.c, "d": p.d},
        "switching_line": problem.line.value,
        "perturbation": {name: problem.poly(name).as_triples() for name in POLY_NAMES},
    }
    if problem.name:
        doc["name"] = problem.name
    return json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")
