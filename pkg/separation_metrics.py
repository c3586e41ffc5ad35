"""
Statistical separation and modular quasi-distance

The separation of events E1..En is the probability that an odd number of them
occur (for two events P(A)+P(B)-2P(A and B)). Event k occurs when its party
reports outcome 1, so a term only makes sense for d=2 behaviors.

The quasi-distance P([A+B]<C) sums p(a,b,c) over c > (a+b mod d), strictly. It is
not symmetric, so every QuasiTerm carries an explicit direction.
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from errors import BehaviorValidationError, InputError, UnsupportedScenarioError
from prob_core import NUMERIC_TOL, SETTING_OFFSET

logger = logging.getLogger(__name__)

LHS_LESS = "lhs<rhs"
RHS_LESS = "rhs<lhs"
DIRECTIONS = (LHS_LESS, RHS_LESS)

_ATOM = re.compile(r"([A-Z])([12])")


def _check_factors(factors, what):
    parties = [p for p, _ in factors]
    if len(set(parties)) != len(parties):
        raise InputError(f"{what} repeats a party: {factors}")
    for party, setting in factors:
        if setting not in (1, 2):
            raise InputError(f"{what} uses setting {setting} for party {party}; settings are 1 or 2")


def parse_atoms(text):
    """'A1B2' -> (('A', 1), ('B', 2)); also accepts 'A1+B2'"""
    cleaned = text.replace("+", "").replace(" ", "")
    atoms = _ATOM.findall(cleaned)
    if not atoms or "".join(p + s for p, s in atoms) != cleaned:
        raise InputError(f"Cannot read {text!r} as party/setting atoms such as A1B2")
    return tuple((p, int(s)) for p, s in atoms)


def format_atoms(factors, joiner=""):
    return joiner.join(f"{p}{s}" for p, s in factors)


@dataclass(frozen=True)
class SeparationTerm:
    """P(X1 + X2 + ... ) over distinct (party, setting) atoms, written A1B2C2"""

    factors: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(p), int(s)) for p, s in self.factors)
        if len(factors) < 2:
            raise InputError(f"A separation term needs at least 2 events, got {factors}")
        _check_factors(factors, "Separation term")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, label):
        return cls(parse_atoms(label))

    @property
    def parties(self):
        return tuple(p for p, _ in self.factors)

    @property
    def label(self):
        return format_atoms(sorted(self.factors))

    kind = "separation"


@dataclass(frozen=True)
class QuasiTerm:
    """P([lhs] < rhs) or, with direction RHS_LESS, P(rhs < [lhs])"""

    lhs: Tuple[Tuple[str, int], ...]
    rhs: Tuple[str, int]
    direction: str = LHS_LESS

    def __post_init__(self):
        lhs = tuple((str(p), int(s)) for p, s in self.lhs)
        rhs = (str(self.rhs[0]), int(self.rhs[1]))
        if not lhs:
            raise InputError("A quasi term needs at least one summed event")
        if self.direction not in DIRECTIONS:
            raise InputError(f"Quasi direction must be one of {DIRECTIONS}, got {self.direction!r}")
        _check_factors(lhs + (rhs,), "Quasi term")
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)

    @classmethod
    def parse(cls, label):
        """'[A1+B2]<C2' or 'C2<[A2+B1]'"""
        left, sep, right = label.replace(" ", "").partition("<")
        if not sep or not left or not right:
            raise InputError(f"Cannot read quasi term {label!r}")
        if left.startswith("[") or "+" in left:
            lhs, rhs_text, direction = left, right, LHS_LESS
        else:
            lhs, rhs_text, direction = right, left, RHS_LESS
        rhs = parse_atoms(rhs_text)
        if len(rhs) != 1:
            raise InputError(f"Quasi term {label!r} must compare against a single event")
        return cls(parse_atoms(lhs.strip("[]")), rhs[0], direction)

    @property
    def parties(self):
        return tuple(p for p, _ in self.lhs) + (self.rhs[0],)

    @property
    def lhs_label(self):
        text = format_atoms(self.lhs, "+")
        return f"[{text}]" if len(self.lhs) > 1 else text

    @property
    def label(self):
        rhs = format_atoms((self.rhs,))
        if self.direction == LHS_LESS:
            return f"{self.lhs_label}<{rhs}"
        return f"{rhs}<{self.lhs_label}"

    def swapped(self):
        return QuasiTerm(self.lhs, self.rhs, RHS_LESS if self.direction == LHS_LESS else LHS_LESS)

    kind = "quasi"


def parse_term(label):
    return QuasiTerm.parse(label) if "<" in label else SeparationTerm.parse(label)


@lru_cache(maxsize=64)
def outcome_grid(n_parties, d):
    grid = np.indices((d,) * n_parties)
    grid.setflags(write=False)
    return grid


def term_indicator(term, scenario):
    """0/1 array over the outcome tuples counted by the term"""
    grid = outcome_grid(scenario.n_parties, scenario.n_outcomes)
    d = scenario.n_outcomes
    if term.kind == "separation":
        if d != 2:
            raise UnsupportedScenarioError(f"Separation terms need binary outcomes, scenario has d={d}")
        count = sum(grid[scenario.party_index(p)] for p in term.parties)
        return (count % 2 == 1).astype(np.int64)
    summed = sum(grid[scenario.party_index(p)] for p, _ in term.lhs) % d
    other = grid[scenario.party_index(term.rhs[0])]
    hits = other > summed if term.direction == LHS_LESS else other < summed
    return hits.astype(np.int64)


def term_settings(term, scenario, fill_setting=1):
    """0-based setting index tuple at which the term is read"""
    if fill_setting not in (1, 2):
        raise InputError(f"Fill setting must be 1 or 2, got {fill_setting}")
    settings = [fill_setting - SETTING_OFFSET] * scenario.n_parties
    factors = term.factors if term.kind == "separation" else term.lhs + (term.rhs,)
    for party, setting in factors:
        settings[scenario.party_index(party)] = setting - SETTING_OFFSET
    return tuple(settings)


def term_coefficients(term, scenario, fill_setting=1):
    """Indicator tensor of the term over the full behavior table"""
    coefficients = np.zeros(scenario.table_shape, dtype=np.int64)
    coefficients[term_settings(term, scenario, fill_setting)] = term_indicator(term, scenario)
    return coefficients


def _term_value(behavior, term, fill_setting):
    scenario = behavior.scenario
    block = behavior.table[term_settings(term, scenario, fill_setting)]
    return float((block * term_indicator(term, scenario)).sum())


def separation_value(behavior, term, fill_setting=1):
    if behavior.scenario.n_outcomes != 2:
        raise UnsupportedScenarioError(
            f"Separation needs binary outcomes, behavior has d={behavior.scenario.n_outcomes}")
    return _term_value(behavior, term, fill_setting)


def quasi_value(behavior, term, fill_setting=1):
    return _term_value(behavior, term, fill_setting)


def term_value(behavior, term, fill_setting=1):
    if term.kind == "separation":
        return separation_value(behavior, term, fill_setting)
    return quasi_value(behavior, term, fill_setting)


# --- raw event spaces ----------------------------------------------------------

def _check_distribution(dist, tol):
    dist = np.asarray(dist, dtype=float)
    if dist.min() < -tol:
        raise BehaviorValidationError(f"Distribution has negative entry {dist.min():.3e}")
    total = float(dist.sum())
    if abs(total - 1.0) > tol:
        raise BehaviorValidationError(f"Distribution sums to {total!r}, not 1")
    return dist


def event_space_separation(dist, events=None, tol=NUMERIC_TOL):
    """P(odd number of the chosen events occur) for a joint table over {0,1}^n

    events lists axes and may repeat one; a repeated event cancels itself.
    """
    dist = _check_distribution(dist, tol)
    if any(size != 2 for size in dist.shape):
        raise UnsupportedScenarioError(f"Event space must be binary, got shape {dist.shape}")
    axes = range(dist.ndim) if events is None else events
    grid = outcome_grid(dist.ndim, 2)
    parity = sum((grid[axis] for axis in axes), np.zeros(dist.shape, dtype=np.int64)) % 2
    return float(dist[parity == 1].sum())


def event_space_quasi(dist, lhs, rhs, tol=NUMERIC_TOL):
    """P([sum of lhs events mod d] < [sum of rhs events mod d]) for a joint table over {0..d-1}^n"""
    dist = _check_distribution(dist, tol)
    d = dist.shape[0]
    if any(size != d for size in dist.shape):
        raise UnsupportedScenarioError(f"Event space must be uniform in d, got shape {dist.shape}")
    grid = outcome_grid(dist.ndim, d)
    left = sum(grid[axis] for axis in lhs) % d
    right = sum(grid[axis] for axis in rhs) % d
    return float(dist[left < right].sum())
