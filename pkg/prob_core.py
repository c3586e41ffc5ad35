"""
Multiparty behaviors: conditional outcome tables p(o|s)

Tables are dense numpy arrays of shape (2,)*N + (d,)*N, the N setting axes first
and the N outcome axes after them. Settings are written 1 and 2 everywhere the
user sees them and stored 0-based (setting 1 -> index 0). Outcomes are 0..d-1;
for d=2 outcome 1 is the physical +1, i.e. "the event occurs".
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import BehaviorValidationError, EnumerationCapError, InputError, ScenarioMismatchError
from run_config import DEFAULT_CONFIG, enumeration_cap

logger = logging.getLogger(__name__)

ANALYTIC_TOL = DEFAULT_CONFIG["tolerances"]["analytic"]
NUMERIC_TOL = DEFAULT_CONFIG["tolerances"]["numeric"]

PARTY_NAMES = "ABCDEFGHIJKL"
SETTING_OFFSET = 1


@dataclass(frozen=True)
class Scenario:
    """Index space: party labels, two settings per party, d outcomes per setting"""

    n_parties: int
    n_outcomes: int = 2
    n_settings: int = 2
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n_parties < 2:
            raise InputError(f"A scenario needs at least 2 parties, got {self.n_parties}")
        if self.n_settings != 2:
            raise InputError(f"Only 2 settings per party are supported, got {self.n_settings}")
        if self.n_outcomes < 2:
            raise InputError(f"A scenario needs at least 2 outcomes, got {self.n_outcomes}")
        labels = tuple(self.labels)
        if not labels:
            if self.n_parties > len(PARTY_NAMES):
                raise InputError(f"At most {len(PARTY_NAMES)} default party labels are available")
            labels = tuple(PARTY_NAMES[:self.n_parties])
        if len(labels) != self.n_parties or len(set(labels)) != len(labels):
            raise InputError(f"Party labels {labels} do not name {self.n_parties} distinct parties")
        object.__setattr__(self, "labels", labels)

    @property
    def table_shape(self):
        return (self.n_settings,) * self.n_parties + (self.n_outcomes,) * self.n_parties

    @property
    def table_size(self):
        return (self.n_settings * self.n_outcomes) ** self.n_parties

    @property
    def strategy_count(self):
        return (self.n_outcomes ** self.n_settings) ** self.n_parties

    def party_index(self, name):
        try:
            return self.labels.index(name)
        except ValueError:
            raise InputError(f"Unknown party {name!r}; scenario parties are {''.join(self.labels)}")

    def setting_tuples(self):
        """All setting tuples, 1-based, in lexicographic order"""
        return itertools.product((1, 2), repeat=self.n_parties)

    def to_dict(self):
        return {"parties": self.n_parties, "settings": self.n_settings, "outcomes": self.n_outcomes}


@dataclass(frozen=True)
class DeterministicStrategy:
    """outcomes[k][s] is party k's fixed outcome for 0-based setting s"""

    outcomes: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_array(cls, array):
        return cls(tuple(tuple(int(v) for v in row) for row in np.asarray(array)))


class Behavior:
    """Immutable conditional distribution table over a Scenario"""

    def __init__(self, scenario, table, tol=NUMERIC_TOL, check=True):
        arr = np.array(table, dtype=float)
        if arr.shape != scenario.table_shape:
            raise BehaviorValidationError(
                f"Table shape {arr.shape} does not match scenario shape {scenario.table_shape}")
        arr.setflags(write=False)
        self.scenario = scenario
        self.table = arr
        self.tol = tol
        if check:
            self.validate()

    def validate(self, tol=None):
        """Nonnegativity and per-setting normalization"""
        tol = self.tol if tol is None else tol
        n = self.scenario.n_parties
        lowest = float(self.table.min())
        if lowest < -tol:
            raise BehaviorValidationError(f"Negative probability {lowest:.3e} in behavior table")
        sums = self.table.sum(axis=tuple(range(n, 2 * n)))
        worst = float(np.abs(sums - 1.0).max())
        if worst > tol:
            raise BehaviorValidationError(
                f"Behavior is not normalized: worst setting sum deviates by {worst:.3e} (tol {tol:.1e})")

    def block(self, settings):
        """Outcome table for one 1-based setting tuple"""
        return self.table[tuple(s - SETTING_OFFSET for s in settings)]

    def probability(self, settings, outcomes):
        return float(self.block(settings)[tuple(outcomes)])

    def is_deterministic(self):
        return bool(np.all((self.table == 0.0) | (self.table == 1.0)))

    def __repr__(self):
        return f"Behavior(parties={''.join(self.scenario.labels)}, outcomes={self.scenario.n_outcomes})"


@dataclass(frozen=True)
class NoSignalingReport:
    max_violation: float
    per_party: Tuple[float, ...]
    passed: bool
    tol: float


def validate_no_signaling(behavior, tol=NUMERIC_TOL):
    """Largest change of any party-removed marginal when that party switches setting"""
    behavior.validate()
    n = behavior.scenario.n_parties
    per_party = []
    for k in range(n):
        marginal = behavior.table.sum(axis=n + k)
        per_party.append(float(np.ptp(marginal, axis=k).max()))
    max_violation = max(per_party)
    return NoSignalingReport(max_violation, tuple(per_party), max_violation <= tol, tol)


def behavior_from_strategy(strategy, scenario):
    outcomes = np.asarray(strategy.outcomes, dtype=int)
    if outcomes.shape != (scenario.n_parties, scenario.n_settings):
        raise InputError(
            f"Strategy shape {outcomes.shape} does not match {scenario.n_parties} parties x 2 settings")
    if outcomes.min() < 0 or outcomes.max() >= scenario.n_outcomes:
        raise InputError(f"Strategy outcome out of range 0..{scenario.n_outcomes - 1}")
    n = scenario.n_parties
    table = np.zeros(scenario.table_shape)
    for settings in itertools.product(range(scenario.n_settings), repeat=n):
        table[settings + tuple(outcomes[k, settings[k]] for k in range(n))] = 1.0
    return Behavior(scenario, table, tol=ANALYTIC_TOL)


def check_enumeration_cap(scenario, cap):
    cap = enumeration_cap() if cap is None else cap
    count = scenario.strategy_count
    if count > cap:
        raise EnumerationCapError(
            f"{count} deterministic strategies exceed the enumeration cap of {cap}",
            count=count, cap=cap)
    return count


def strategy_block(scenario, start, stop):
    """Strategies start..stop-1 as an int array of shape (m, N, 2)

    Strategy index i is the mixed-radix number whose base-d digits, most
    significant first, are (party 0 setting 1, party 0 setting 2, party 1 ...).
    This is the lexicographic order used everywhere.
    """
    d = scenario.n_outcomes
    width = scenario.n_parties * scenario.n_settings
    indices = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((indices.size, width), dtype=np.int64)
    for pos in range(width - 1, -1, -1):
        digits[:, pos] = indices % d
        indices = indices // d
    return digits.reshape(-1, scenario.n_parties, scenario.n_settings)


def enumerate_strategies(scenario, cap=None, chunk_size=None, config=None):
    """Yield every deterministic strategy exactly once, lexicographically

    An explicit cap wins over config["enumeration"]["cap"]; without either the
    default cap and its environment override apply.
    """
    if config is not None:
        cap = config["enumeration"]["cap"] if cap is None else cap
        chunk_size = chunk_size or config["enumeration"]["chunk_size"]
    chunk_size = chunk_size or DEFAULT_CONFIG["enumeration"]["chunk_size"]
    count = check_enumeration_cap(scenario, cap)
    for start in range(0, count, chunk_size):
        for row in strategy_block(scenario, start, min(start + chunk_size, count)):
            yield DeterministicStrategy.from_array(row)


def uniform_behavior(scenario):
    table = np.full(scenario.table_shape, 1.0 / scenario.n_outcomes ** scenario.n_parties)
    return Behavior(scenario, table, tol=ANALYTIC_TOL)


def mix_behaviors(behaviors: Sequence[Behavior], weights: Sequence[float]):
    if len(behaviors) == 0 or len(behaviors) != len(weights):
        raise InputError("Mixture needs one weight per behavior")
    weights = np.asarray(weights, dtype=float)
    if weights.min() < 0 or abs(weights.sum() - 1.0) > ANALYTIC_TOL:
        raise InputError(f"Mixture weights must be nonnegative and sum to 1, got {weights.tolist()}")
    scenario = behaviors[0].scenario
    for behavior in behaviors[1:]:
        if behavior.scenario != scenario:
            raise ScenarioMismatchError("Cannot mix behaviors over different scenarios")
    table = sum(w * b.table for w, b in zip(weights, behaviors))
    return Behavior(scenario, table)


def permute_parties(behavior, order):
    """Behavior whose party i is the input's party order[i]"""
    n = behavior.scenario.n_parties
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InputError(f"{order} is not a permutation of {n} parties")
    axes = order + [n + k for k in order]
    return Behavior(behavior.scenario, np.transpose(behavior.table, axes), tol=behavior.tol)


# --- JSON --------------------------------------------------------------------

def _encode_digits(values, wide):
    return ",".join(str(v) for v in values) if wide else "".join(str(v) for v in values)


def _decode_digits(key, n):
    parts = key.split(",") if "," in key else list(key)
    if len(parts) != n:
        raise InputError(f"Key {key!r} does not have {n} entries")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise InputError(f"Key {key!r} is not made of digits")


def behavior_to_json(behavior):
    scenario = behavior.scenario
    n = scenario.n_parties
    wide = scenario.n_outcomes > 10
    table = {}
    for settings in scenario.setting_tuples():
        block = behavior.block(settings)
        table[_encode_digits(settings, False)] = {
            _encode_digits(outcomes, wide): float(block[outcomes])
            for outcomes in itertools.product(range(scenario.n_outcomes), repeat=n)
        }
    payload = {"scenario": scenario.to_dict(), "table": table}
    if scenario.labels != tuple(PARTY_NAMES[:n]):
        payload["scenario"]["labels"] = list(scenario.labels)
    return payload


def behavior_from_json(payload, tol=NUMERIC_TOL):
    try:
        fields = payload["scenario"]
        scenario = Scenario(int(fields["parties"]), int(fields["outcomes"]), int(fields.get("settings", 2)),
                            tuple(fields.get("labels", ())))
        entries = payload["table"]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"Malformed behavior JSON: {e}")
    n = scenario.n_parties
    table = np.zeros(scenario.table_shape)
    for setting_key, block in entries.items():
        settings = _decode_digits(setting_key, n)
        if any(s not in (1, 2) for s in settings):
            raise InputError(f"Setting key {setting_key!r} must use digits 1 and 2")
        index = tuple(s - SETTING_OFFSET for s in settings)
        for outcome_key, value in block.items():
            outcomes = _decode_digits(outcome_key, n)
            if any(not 0 <= o < scenario.n_outcomes for o in outcomes):
                raise InputError(f"Outcome key {outcome_key!r} out of range")
            table[index + outcomes] = float(value)
    return Behavior(scenario, table, tol=tol)


def save_behavior(behavior, path):
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(behavior_to_json(behavior), f, indent=1)
    except OSError as e:
        raise InputError(f"Cannot write behavior {path}: {e}")
    logger.info("Behavior written to %s", path)
    return path


def load_behavior(path, tol: Optional[float] = None):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read behavior {path}: {e}")
    return behavior_from_json(payload, tol=NUMERIC_TOL if tol is None else tol)
