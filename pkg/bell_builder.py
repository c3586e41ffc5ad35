"""
Separation and quasi-distance Bell expressions and their monogamy sums

An expression is a signed list of terms; coefficient tables over (s, o) are
derived on demand for the bound oracles.
"""

import logging
from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import InputError, ScenarioMismatchError, UnsupportedScenarioError
from prob_core import PARTY_NAMES, Scenario
from separation_metrics import (LHS_LESS, RHS_LESS, QuasiTerm, SeparationTerm, parse_term,
                                term_coefficients, term_value)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignedTerm:
    sign: int
    term: object

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputError(f"Term signs are +1 or -1, got {self.sign}")

    @property
    def text(self):
        return f"{'+' if self.sign > 0 else '-'}{self.term.label}"


def _scenario_for(parties, n_outcomes):
    return Scenario(len(parties), n_outcomes, labels=tuple(parties))


def _union_parties(terms):
    seen = []
    for signed in terms:
        for party in signed.term.parties:
            if party not in seen:
                seen.append(party)
    return tuple(sorted(seen))


def _coefficient_table(terms, scenario, fill_setting=1):
    table = np.zeros(scenario.table_shape, dtype=np.int64)
    for signed in terms:
        table += signed.sign * term_coefficients(signed.term, scenario, fill_setting)
    return table


def _covers(expression, behavior):
    scenario = behavior.scenario
    if scenario.n_outcomes != expression.scenario.n_outcomes:
        raise ScenarioMismatchError(
            f"{expression.label} has d={expression.scenario.n_outcomes}, behavior has d={scenario.n_outcomes}")
    missing = [p for p in expression.scenario.labels if p not in scenario.labels]
    if missing:
        raise ScenarioMismatchError(f"Behavior has no parties {missing} needed by {expression.label}")


@dataclass(frozen=True)
class BellExpression:
    scenario: Scenario
    terms: Tuple[SignedTerm, ...]
    label: str

    @property
    def parties(self):
        return self.scenario.labels

    @property
    def summands(self):
        return (self,)

    def minus_terms(self):
        return tuple(s.term for s in self.terms if s.sign < 0)

    def coefficient_table(self, scenario=None, fill_setting=1):
        return _coefficient_table(self.terms, scenario or self.scenario, fill_setting)

    def flip_settings(self, parties, label=None):
        """Same expression with settings 1 and 2 exchanged for the given parties"""
        flipped = set(parties)
        unknown = flipped.difference(self.parties)
        if unknown:
            raise InputError(f"Cannot flip settings of parties {sorted(unknown)} absent from {self.label}")

        def flip(atom):
            party, setting = atom
            return (party, 3 - setting) if party in flipped else atom

        terms = []
        for signed in self.terms:
            term = signed.term
            if term.kind == "separation":
                new_term = SeparationTerm(tuple(flip(a) for a in term.factors))
            else:
                new_term = QuasiTerm(tuple(flip(a) for a in term.lhs), flip(term.rhs), term.direction)
            terms.append(SignedTerm(signed.sign, new_term))
        return BellExpression(self.scenario, tuple(terms), label or self.label)

    def __str__(self):
        return f"{self.label} = " + " ".join(s.text for s in self.terms)


@dataclass(frozen=True)
class MonogamyExpression:
    summands: Tuple[BellExpression, ...]
    label: str

    def __post_init__(self):
        if not self.summands:
            raise InputError("A monogamy needs at least one summand")
        outcomes = {s.scenario.n_outcomes for s in self.summands}
        if len(outcomes) != 1:
            raise ScenarioMismatchError(f"Monogamy summands mix outcome counts {sorted(outcomes)}")

    @property
    def terms(self):
        return tuple(t for summand in self.summands for t in summand.terms)

    @property
    def scenario(self):
        return _scenario_for(_union_parties(self.terms), self.summands[0].scenario.n_outcomes)

    @property
    def parties(self):
        return self.scenario.labels

    def coefficient_table(self, scenario=None, fill_setting=1):
        return _coefficient_table(self.terms, scenario or self.scenario, fill_setting)

    def pair(self, i, j):
        first, second = self.summands[i], self.summands[j]
        return MonogamyExpression((first, second), f"{first.label}+{second.label}")

    def pairs(self):
        return [((i, j), self.pair(i, j)) for i, j in combinations(range(len(self.summands)), 2)]

    def __str__(self):
        return f"{self.label} = " + " + ".join(s.label for s in self.summands)


# --- builders --------------------------------------------------------------------

def _settings_term(parties, settings):
    return SeparationTerm(tuple(zip(parties, settings)))


def build_separation_bell(parties, minus_position=None, label=None):
    """N-party separation inequality: X-terms plus one negative Y-term

    X holds (1,2,...,2) and its cyclic shifts, plus (2,...,2) for even N; Y is
    (1,...,1). minus_position picks an X-term to carry the minus sign instead of Y.
    """
    parties = tuple(parties)
    n = len(parties)
    if n < 3:
        raise UnsupportedScenarioError(f"Separation Bell inequalities need at least 3 parties, got {n}")
    if len(set(parties)) != n:
        raise InputError(f"Parties must be distinct: {parties}")
    x_settings = []
    for k in range(n):
        settings = [2] * n
        settings[k] = 1
        x_settings.append(tuple(settings))
    if n % 2 == 0:
        x_settings.append((2,) * n)
    y_position = len(x_settings)
    if minus_position is None:
        minus_position = y_position
    if not 0 <= minus_position <= y_position:
        raise InputError(f"minus_position {minus_position} out of range 0..{y_position}")

    terms = [SignedTerm(-1 if i == minus_position else 1, _settings_term(parties, s))
             for i, s in enumerate(x_settings)]
    terms.append(SignedTerm(1 if minus_position != y_position else -1, _settings_term(parties, (1,) * n)))
    return BellExpression(_scenario_for(parties, 2), tuple(terms), label or "B_" + "".join(parties))


# (sign, lhs settings for A and B, C setting, direction) of the d-outcome inequality
ZG_LAYOUT = (
    (1, (1, 2), 2, LHS_LESS),
    (1, (2, 1), 2, RHS_LESS),
    (1, (2, 1), 1, LHS_LESS),
    (-1, (1, 2), 1, LHS_LESS),
    (1, (1, 1), 2, LHS_LESS),
    (1, (2, 2), 2, RHS_LESS),
    (1, (2, 2), 1, LHS_LESS),
    (-1, (1, 1), 1, LHS_LESS),
)

# Partner summand for the quasi monogamy, read off the chain that cancels D<C bridges
ZG_PARTNER_LAYOUT = (
    (1, (1, 2), 2, RHS_LESS),
    (-1, (2, 1), 2, RHS_LESS),
    (1, (2, 1), 1, RHS_LESS),
    (1, (1, 2), 1, LHS_LESS),
    (1, (1, 1), 2, RHS_LESS),
    (-1, (2, 2), 2, RHS_LESS),
    (1, (2, 2), 1, RHS_LESS),
    (1, (1, 1), 1, LHS_LESS),
)


def _build_quasi(layout, d, parties, direction_swapped, label):
    if d < 2:
        raise UnsupportedScenarioError(f"Quasi-distance inequalities need d >= 2, got {d}")
    parties = tuple(parties)
    if len(parties) != 3 or len(set(parties)) != 3:
        raise InputError(f"Quasi-distance inequalities take 3 distinct parties, got {parties}")
    a, b, c = parties
    terms = []
    for sign, (i, j), k, direction in layout:
        term = QuasiTerm(((a, i), (b, j)), (c, k), direction)
        terms.append(SignedTerm(sign, term.swapped() if direction_swapped else term))
    return BellExpression(_scenario_for(parties, d), tuple(terms), label)


def build_zg_svetlichny(d, direction_swapped=False, parties=("A", "B", "C")):
    label = "B_" + "".join(parties) + ("_swapped" if direction_swapped else "")
    return _build_quasi(ZG_LAYOUT, d, parties, direction_swapped, label)


def build_zg_partner(d, parties=("A", "B", "D")):
    """The summand that pairs with build_zg_svetlichny into a no-signaling monogamy"""
    return _build_quasi(ZG_PARTNER_LAYOUT, d, parties, False, "B_" + "".join(parties))


# --- presets ----------------------------------------------------------------------

PRESET_SIZES = {
    "primary_ABC_ABD": 4,
    "strong3_4party": 4,
    "full4_4party": 4,
    "division_N5_AB": 6,
    "division_N5_AB_swap": 6,
    "primary_quasi": 4,
}

PRESETS = tuple(PRESET_SIZES)


def _tripartite_presets(pool, name):
    a, b, c, d = pool
    bells = [
        build_separation_bell((a, b, c)),
        build_separation_bell((a, b, d), minus_position=1),
    ]
    if name == "primary_ABC_ABD":
        return bells
    bells[1] = build_separation_bell((a, b, d), minus_position=0)
    bells.append(build_separation_bell((a, c, d), minus_position=1))
    if name == "full4_4party":
        bells.append(build_separation_bell((b, c, d), minus_position=0))
    return bells


def _division_n5(pool, name):
    a, b, c, d, e, f = pool
    if name == "division_N5_AB_swap":
        return [
            build_separation_bell((a, b, c, d, e)),
            build_separation_bell((a, b, c, d, f), minus_position=2),
            build_separation_bell((a, b, c, e, f), minus_position=3),
            build_separation_bell((a, b, d, e, f), minus_position=2),
        ]
    # -A2B2C1D2F1 is not an X/Y term; flipping A, B and D relabels the Y-term onto it
    flipped = build_separation_bell((a, b, c, d, f)).flip_settings((a, b, d))
    return [
        build_separation_bell((a, b, c, d, e)),
        flipped,
        build_separation_bell((a, b, c, e, f), minus_position=3),
        build_separation_bell((a, b, d, e, f), minus_position=2),
    ]


def compose_monogamy(preset, pool=None, d=2):
    """Named monogamy sums over a party pool (default: the first letters)"""
    if preset not in PRESET_SIZES:
        raise InputError(f"Unknown preset {preset!r}; known presets: {', '.join(PRESETS)}")
    size = PRESET_SIZES[preset]
    pool = tuple(pool) if pool is not None else tuple(PARTY_NAMES[:size])
    if len(pool) != size:
        raise InputError(f"Preset {preset} needs {size} parties, got {len(pool)}: {pool}")
    if len(set(pool)) != size:
        raise InputError(f"Preset {preset} needs distinct parties, got {pool}")
    if preset == "primary_quasi":
        a, b, c, dd = pool
        summands = [build_zg_svetlichny(d, parties=(a, b, c)), build_zg_partner(d, parties=(a, b, dd))]
    elif d != 2:
        raise UnsupportedScenarioError(f"Preset {preset} is a binary-outcome monogamy, got d={d}")
    elif preset.startswith("division"):
        summands = _division_n5(pool, preset)
    else:
        summands = _tripartite_presets(pool, preset)
    return MonogamyExpression(tuple(summands), preset)


def evaluate(expression, behavior, fill_setting=1):
    _covers(expression, behavior)
    return float(sum(s.sign * term_value(behavior, s.term, fill_setting) for s in expression.terms))


# --- sign search -------------------------------------------------------------------

@dataclass(frozen=True)
class SignPlacement:
    minus_positions: Tuple[int, ...]
    pair_minima: Tuple[float, ...]
    valid: bool


def search_monogamy_signs(party_sets: Sequence[Sequence[str]], tol=1e-7, fix_first=True):
    """Try every minus position per summand; valid when every pairwise NS minimum >= -tol"""
    from bounds_oracles import pairwise_monogamy_certificates

    party_sets = [tuple(p) for p in party_sets]
    if len(party_sets) < 2:
        raise InputError("Sign search needs at least two summands")
    options = []
    for i, parties in enumerate(party_sets):
        count = len(build_separation_bell(parties).terms)
        options.append([count - 1] if (fix_first and i == 0) else list(range(count)))

    placements = []
    for positions in product(*options):
        summands = tuple(build_separation_bell(p, minus_position=m) for p, m in zip(party_sets, positions))
        results = pairwise_monogamy_certificates(MonogamyExpression(summands, "search"))
        minima = tuple(r.value for r in results)
        placements.append(SignPlacement(tuple(positions), minima, min(minima) >= -tol))
        logger.debug("Minus positions %s -> pairwise minima %s", positions, minima)
    return placements


# --- JSON ---------------------------------------------------------------------------

def _term_to_json(signed):
    term = signed.term
    if term.kind == "separation":
        return {"sign": signed.sign, "kind": "separation", "parties": [[p, s] for p, s in term.factors]}
    return {
        "sign": signed.sign,
        "kind": "quasi",
        "parties": [[p, s] for p, s in term.lhs] + [list(term.rhs)],
        "direction": term.direction,
    }


def _term_from_json(item):
    try:
        sign = int(item["sign"])
        atoms = tuple((str(p), int(s)) for p, s in item["parties"])
        if item["kind"] == "separation":
            return SignedTerm(sign, SeparationTerm(atoms))
        if item["kind"] == "quasi":
            return SignedTerm(sign, QuasiTerm(atoms[:-1], atoms[-1], item["direction"]))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"Malformed term {item!r}: {e}")
    raise InputError(f"Unknown term kind {item.get('kind')!r}")


def expression_to_json(expression):
    if isinstance(expression, MonogamyExpression):
        return {"label": expression.label,
                "scenario": expression.scenario.to_dict(),
                "summands": [expression_to_json(s) for s in expression.summands]}
    return {"label": expression.label,
            "scenario": {**expression.scenario.to_dict(), "labels": list(expression.parties)},
            "terms": [_term_to_json(t) for t in expression.terms]}


def expression_from_json(payload):
    try:
        label = payload["label"]
        outcomes = int(payload["scenario"]["outcomes"])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"Malformed expression JSON: {e}")
    if "summands" in payload:
        return MonogamyExpression(tuple(expression_from_json(s) for s in payload["summands"]), label)
    terms = tuple(_term_from_json(item) for item in payload.get("terms", []))
    if not terms:
        raise InputError(f"Expression {label!r} has no terms")
    labels = payload["scenario"].get("labels") or _union_parties(terms)
    return BellExpression(_scenario_for(tuple(labels), outcomes), terms, label)


def parse_expression(text, d=2, label="custom"):
    """'+A1B2C2 +A2B1C2 -A1B1C1' -> BellExpression"""
    terms = []
    for token in text.split():
        if token[0] not in "+-" or len(token) < 2:
            raise InputError(f"Each term needs a leading sign, got {token!r}")
        terms.append(SignedTerm(1 if token[0] == "+" else -1, parse_term(token[1:])))
    if not terms:
        raise InputError("Empty expression")
    return BellExpression(_scenario_for(_union_parties(terms), d), tuple(terms), label)
