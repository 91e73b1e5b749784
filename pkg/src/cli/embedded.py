"""
Built-in reproduction documents.

Both use the centre x' = x^2 + y, y' = -x^3/4 + 3xy. Each target names the
perturbation coefficient that is solved for so that z^n in h(z) gets the
listed integer coefficient; h then has its roots at 1..7 (x = 0 line) or at
1, sqrt 2, sqrt 3 (y = 0 line).
"""
import json
import math

CENTER = {"a": 1, "b": 1, "c": "-1/4", "d": 3}


def _targets(items):
    return [{"poly": poly, "term": [i, j], "coefficient": coef} for poly, i, j, coef in items]


THM11 = {
    "name": "thm11",
    "center": CENTER,
    "switching_line": "x=0",
    "perturbation": {},
    "targets": _targets([
        ("q_plus", 0, 0, -5040),
        ("p_plus", 0, 0, 13068),
        ("p_plus", 1, 0, -13132),
        ("p_plus", 2, 0, 6769),
        ("p_plus", 3, 0, -1960),
        ("p_plus", 2, 1, 322),
        ("p_plus", 1, 2, -28),
        ("p_plus", 0, 3, 1),
    ]),
    # The solved coefficients are large, so the fixed points drift by up to
    # about 2.4e7 eps: a low ladder and a wide capture window.
    "verification": {"epsilons": [1e-9, 1e-10], "capture_window": 1e8},
}

THM12 = {
    "name": "thm12",
    "center": CENTER,
    "switching_line": "y=0",
    "perturbation": {},
    "targets": _targets([
        ("q_plus", 0, 0, -6),
        ("p_plus", 1, 0, 11),
        ("p_plus", 1, 1, -6),
        ("p_plus", 1, 2, 1),
    ]),
    # Default ladder and window; drift is about 1e-2 eps at eps = 1e-3.
    "verification": {"epsilons": [1e-3, 1e-4]},
}

DOCUMENTS = {"thm11": THM11, "thm12": THM12}

EXPECTED = {
    "thm11": {
        "coefficients": {1: -5040, 2: 13068, 3: -13132, 4: 6769, 5: -1960, 6: 322, 7: -28, 8: 1},
        "roots": [float(k) for k in range(1, 8)],
        "descartes": 7,
        "cycles": 7,
    },
    "thm12": {
        "coefficients": {1: -6, 3: 11, 5: -6, 7: 1},
        "roots": [1.0, math.sqrt(2.0), math.sqrt(3.0)],
        "descartes": 3,
        "cycles": 3,
    },
}

# Published unit responses. Only 4 pi is matched exactly; the rest lie within
# a few percent of the principal-arctan closed form and are reported, not checked.
PUBLISHED_CONSTANTS = {
    "thm11": {
        ("q_plus", 0, 0): -15489718.20,
        ("p_plus", 0, 0): 82848.95524,
        ("p_plus", 1, 0): 740.4727979,
        ("p_plus", 2, 0): 12.56637060,
        ("p_plus", 3, 0): 24.91789286,
        ("p_plus", 2, 1): 114.4398363,
        ("p_plus", 1, 2): 540.9497062,
        ("p_plus", 0, 3): 2670.453320,
    },
    "thm12": {
        ("q_plus", 0, 0): -407552.3744,
        ("p_plus", 1, 0): 351.8642184,
        ("p_plus", 1, 1): 138.4955380,
        ("p_plus", 1, 2): 82260.86314,
    },
}


def document_bytes(which):
    if which not in DOCUMENTS:
        raise KeyError(f"unknown reproduction {which!r}; choose from {sorted(DOCUMENTS)}")
    return json.dumps(DOCUMENTS[which], sort_keys=True).encode("utf-8")
