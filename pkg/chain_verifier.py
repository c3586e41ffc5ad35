"""
Chains of triangle inequalities and their bridge cancellation

A proof is a list of triangle steps over composite events. Summing every step
as (left-hand distances, +1 each) and (right-hand distance, -1 each) leaves a
signed multiset of distance labels; the proof holds when that multiset is
exactly the target expression. Labels are opaque here: a bridge such as C2D2
only cancels when two steps name it identically.

Separation steps are symmetric: d(x, y) is the canonical label of the atoms
appearing an odd number of times in x and y together. Quasi steps are directed
and d(x -> y) is written "x<y".
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from bell_builder import (MonogamyExpression, build_separation_bell, build_zg_partner,
                          build_zg_svetlichny, compose_monogamy)
from errors import InputError, ProofSyntaxError, StructuralProofError
from separation_metrics import format_atoms, outcome_grid, parse_atoms

logger = logging.getLogger(__name__)

SEPARATION_POINT = "separation_point"
QUASI_POINT = "quasi_point"
SYMMETRIC = "symmetric"
DIRECTED = "directed"

_MODE_KIND = {SYMMETRIC: SEPARATION_POINT, DIRECTED: QUASI_POINT}
_MARGIN = 1e-12


def _canonical_point(text, kind):
    text = text.strip()
    if kind == SEPARATION_POINT:
        if "[" in text or "+" in text:
            raise InputError(f"Separation point {text!r} must be written as plain atoms, e.g. A1B2")
        return format_atoms(sorted(parse_atoms(text)))
    if kind != QUASI_POINT:
        raise InputError(f"Unknown point kind {kind!r}")
    atoms = parse_atoms(text.strip("[]"))
    parties = [p for p, _ in atoms]
    if len(set(parties)) != len(parties):
        raise InputError(f"Quasi point {text!r} repeats a party")
    joined = format_atoms(atoms, "+")
    return f"[{joined}]" if len(atoms) > 1 else joined


@dataclass(frozen=True)
class MetricPoint:
    """A composite event; separation labels are sorted, quasi sums keep their order"""

    label: str
    kind: str = SEPARATION_POINT

    def __post_init__(self):
        object.__setattr__(self, "label", _canonical_point(self.label, self.kind))

    @property
    def atoms(self):
        return parse_atoms(self.label.strip("[]"))

    def flipped(self, position):
        """Same point with the setting of atom `position` exchanged"""
        atoms = list(self.atoms)
        party, setting = atoms[position]
        atoms[position] = (party, 3 - setting)
        text = format_atoms(atoms, "+" if self.kind == QUASI_POINT else "")
        return MetricPoint(text, self.kind)

    def __str__(self):
        return self.label


def separation_distance(x, y):
    """Label of the symmetric difference of two points, None when it is empty"""
    counts = Counter(x.atoms) + Counter(y.atoms)
    odd = sorted(atom for atom, count in counts.items() if count % 2)
    return format_atoms(odd) if odd else None


def directed_distance(x, y):
    return None if x.label == y.label else f"{x.label}<{y.label}"


@dataclass(frozen=True)
class TriangleStep:
    """d(x, y) + d(y, z) >= d(x, z), or its directed form with the order kept"""

    x: MetricPoint
    y: MetricPoint
    z: MetricPoint
    mode: str = SYMMETRIC

    def __post_init__(self):
        self.check()

    def check(self):
        if self.mode not in _MODE_KIND:
            raise StructuralProofError(f"Unknown step mode {self.mode!r}")
        expected = _MODE_KIND[self.mode]
        for point in self.points:
            if not isinstance(point, MetricPoint) or point.kind != expected:
                raise StructuralProofError(
                    f"A {self.mode} step needs {expected}s, got {point!r}", step=str(self))

    @property
    def points(self):
        return (self.x, self.y, self.z)

    def distance(self, first, second):
        if self.mode == SYMMETRIC:
            return separation_distance(first, second)
        return directed_distance(first, second)

    def lhs_labels(self):
        return [label for label in (self.distance(self.x, self.y), self.distance(self.y, self.z)) if label]

    def rhs_labels(self):
        label = self.distance(self.x, self.z)
        return [label] if label else []

    def replace(self, index, point):
        points = list(self.points)
        points[index] = point
        return TriangleStep(*points, mode=self.mode)

    def __str__(self):
        if self.mode == SYMMETRIC:
            return "SEP " + " ; ".join(p.label for p in self.points)
        return "QUASI " + " -> ".join(p.label for p in self.points)


def _normalize_target(target):
    counts = Counter()
    for label, coefficient in dict(target).items():
        counts[label] += int(coefficient)
    return tuple(sorted((label, c) for label, c in counts.items() if c))


@dataclass(frozen=True)
class ChainProof:
    steps: Tuple[TriangleStep, ...]
    target: Tuple[Tuple[str, int], ...] = ()
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "target", _normalize_target(self.target))

    def target_counts(self):
        return Counter(dict(self.target))

    def with_steps(self, steps):
        return ChainProof(tuple(steps), self.target, self.name)

    @classmethod
    def for_expression(cls, steps, expression, name):
        """Proof whose target is every signed term of a Bell or monogamy expression"""
        counts = Counter()
        for signed in expression.terms:
            counts[signed.term.label] += signed.sign
        return cls(tuple(steps), tuple(counts.items()), name)


@dataclass(frozen=True)
class ChainVerdict:
    valid: bool
    residual: Dict[str, int]
    difference: Dict[str, int] = field(default_factory=dict)


def chain_residual(steps):
    residual = Counter()
    for step in steps:
        if not isinstance(step, TriangleStep):
            raise StructuralProofError(f"Not a triangle step: {step!r}")
        step.check()
        for label in step.lhs_labels():
            residual[label] += 1
        for label in step.rhs_labels():
            residual[label] -= 1
    return {label: count for label, count in residual.items() if count}


def verify_chain(proof):
    """Sum the steps, cancel equal labels, compare with the target"""
    residual = chain_residual(proof.steps)
    target = proof.target_counts()
    labels = set(residual) | set(target)
    difference = {label: residual.get(label, 0) - target.get(label, 0) for label in sorted(labels)}
    difference = {label: count for label, count in difference.items() if count}
    valid = not difference
    logger.info("Chain %s: %d steps, %s", proof.name, len(proof.steps), "valid" if valid else "invalid")
    return ChainVerdict(valid, dict(sorted(residual.items())), difference)


# --- built-in chains ----------------------------------------------------------------

def _sep(x, y, z):
    return TriangleStep(MetricPoint(x), MetricPoint(y), MetricPoint(z), SYMMETRIC)


def _quasi(x, y, z):
    return TriangleStep(MetricPoint(x, QUASI_POINT), MetricPoint(y, QUASI_POINT), MetricPoint(z, QUASI_POINT),
                        DIRECTED)


def _quasi_monogamy_steps(left, right):
    """Four directed steps of the quasi monogamy for one pair of A/B sums"""
    return [
        _quasi("D2", left, "C2"),
        _quasi("D2", "C2", right),
        _quasi("D1", right, "C1"),
        _quasi(left, "D1", "C1"),
    ]


def builtin_proofs():
    """The six reference chains, each paired with the expression it proves"""
    tripartite = ChainProof.for_expression(
        [_sep("A1B2", "C2", "A2B1"), _sep("A1B1", "A2B2", "C1")],
        build_separation_bell(("A", "B", "C")), "tripartite_separation")

    primary = ChainProof.for_expression(
        [_sep("C2", "A1B2", "D2"), _sep("D2", "C2", "A2B1"),
         _sep("C1", "A2B2", "D1"), _sep("C1", "D1", "A1B1")],
        compose_monogamy("primary_ABC_ABD"), "primary_monogamy")

    abc = build_separation_bell(("A", "B", "C"))
    with_acd = ChainProof.for_expression(
        [_sep("B2", "A1C2", "D2"), _sep("D2", "B2", "A2C1"),
         _sep("B1", "A2C2", "D1"), _sep("B1", "D1", "A1C1")],
        _joined(abc, build_separation_bell(("A", "C", "D"), minus_position=1)), "monogamy_ABC_ACD")

    with_bcd = ChainProof.for_expression(
        [_sep("A1", "B2C2", "D1"), _sep("A1", "D1", "B1C1"),
         _sep("A2", "B2C1", "D2"), _sep("D2", "A2", "B1C2")],
        _joined(abc, build_separation_bell(("B", "C", "D"), minus_position=0)), "monogamy_ABC_BCD")

    quasi = ChainProof.for_expression(
        [_quasi("[A1+B2]", "C2", "[A2+B1]"), _quasi("[A1+B2]", "[A2+B1]", "C1"),
         _quasi("[A1+B1]", "C2", "[A2+B2]"), _quasi("[A1+B1]", "[A2+B2]", "C1")],
        build_zg_svetlichny(2), "quasi_tripartite")

    quasi_monogamy = ChainProof.for_expression(
        _quasi_monogamy_steps("[A1+B2]", "[A2+B1]") + _quasi_monogamy_steps("[A1+B1]", "[A2+B2]"),
        _joined(build_zg_svetlichny(2), build_zg_partner(2)), "quasi_monogamy")

    return [tripartite, primary, with_acd, with_bcd, quasi, quasi_monogamy]


def _joined(*expressions):
    return MonogamyExpression(tuple(expressions), "+".join(e.label for e in expressions))


# --- text form ----------------------------------------------------------------------

def canonical_label(text):
    """Canonical form of a target label: 'x<y' for directed terms, sorted atoms otherwise"""
    text = text.strip()
    if "<" in text:
        left, _, right = text.partition("<")
        return f"{_canonical_point(left, QUASI_POINT)}<{_canonical_point(right, QUASI_POINT)}"
    return _canonical_point(text, SEPARATION_POINT)


def _parse_step(body, mode, lineno):
    separator = ";" if mode == SYMMETRIC else "->"
    parts = [p.strip() for p in body.split(separator)]
    if len(parts) != 3 or not all(parts):
        raise ProofSyntaxError(f"Line {lineno}: a step names exactly three points separated by {separator!r}",
                               line=lineno)
    kind = _MODE_KIND[mode]
    try:
        return TriangleStep(*(MetricPoint(p, kind) for p in parts), mode=mode)
    except InputError as e:
        raise ProofSyntaxError(f"Line {lineno}: {e.message}", line=lineno)


def parse_proof(text, name="custom"):
    """Read the proof DSL: SEP x ; y ; z / QUASI x -> y -> z / TARGET +t -t"""
    steps = []
    target = Counter()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta = line.lstrip("#").strip()
            if meta.lower().startswith("name:"):
                name = meta[5:].strip() or name
            continue
        keyword, _, body = line.partition(" ")
        keyword = keyword.upper()
        if keyword == "SEP":
            steps.append(_parse_step(body, SYMMETRIC, lineno))
        elif keyword == "QUASI":
            steps.append(_parse_step(body, DIRECTED, lineno))
        elif keyword == "TARGET":
            for token in body.split():
                if token[0] not in "+-" or len(token) < 2:
                    raise ProofSyntaxError(f"Line {lineno}: target terms need a sign, got {token!r}", line=lineno)
                try:
                    target[canonical_label(token[1:])] += 1 if token[0] == "+" else -1
                except InputError as e:
                    raise ProofSyntaxError(f"Line {lineno}: {e.message}", line=lineno)
        else:
            raise ProofSyntaxError(f"Line {lineno}: unknown keyword {keyword!r}", line=lineno)
    if not steps:
        raise ProofSyntaxError("Proof has no steps")
    return ChainProof(tuple(steps), tuple(target.items()), name)


def format_proof(proof):
    lines = [f"# name: {proof.name}"]
    lines += [str(step) for step in proof.steps]
    tokens = []
    for label, coefficient in proof.target:
        tokens += [("+" if coefficient > 0 else "-") + label] * abs(coefficient)
    if tokens:
        lines.append("TARGET " + " ".join(tokens))
    return "\n".join(lines) + "\n"


# --- robustness checks --------------------------------------------------------------

def mutations(proof):
    """Every proof obtained by flipping one atom's setting in one point of one step"""
    result = []
    for i, step in enumerate(proof.steps):
        for j, point in enumerate(step.points):
            for k in range(len(point.atoms)):
                steps = list(proof.steps)
                steps[i] = step.replace(j, point.flipped(k))
                result.append(proof.with_steps(steps))
    return result


@dataclass(frozen=True)
class SoundnessReport:
    trials: int
    step_failures: int
    target_failures: int
    min_target_value: float

    @property
    def passed(self):
        return self.step_failures == 0 and self.target_failures == 0


def sample_soundness(proof, trials=10000, rng=None, d=None, batch_size=256):
    """Evaluate a valid proof on random joint distributions of all its atomic events

    Every atom is one random variable over d outcomes (2 for separation chains,
    3 by default for directed chains). Each step and the target are checked
    per sample.
    """
    if not verify_chain(proof).valid:
        raise StructuralProofError(f"Chain {proof.name} does not verify; nothing to sample")
    rng = rng if rng is not None else np.random.default_rng()
    directed = proof.steps[0].mode == DIRECTED
    d = d or (3 if directed else 2)
    atoms = sorted({atom for step in proof.steps for point in step.points for atom in point.atoms})
    axis = {atom: i for i, atom in enumerate(atoms)}
    grid = outcome_grid(len(atoms), d).reshape(len(atoms), -1)

    def point_value(point):
        return sum(grid[axis[atom]] for atom in point.atoms) % d

    masks, columns = [], {}

    def column(first, second, mode):
        label = separation_distance(first, second) if mode == SYMMETRIC else directed_distance(first, second)
        if label is None:
            return None
        if label not in columns:
            if mode == SYMMETRIC:
                hit = (point_value(first) + point_value(second)) % 2 == 1
            else:
                hit = point_value(first) < point_value(second)
            columns[label] = len(masks)
            masks.append(hit.astype(float))
        return columns[label]

    layout = []
    for step in proof.steps:
        x, y, z = step.points
        layout.append((column(x, y, step.mode), column(y, z, step.mode), column(x, z, step.mode)))
    matrix = np.stack(masks, axis=1)
    target = np.zeros(len(masks))
    for label, coefficient in proof.target:
        target[columns[label]] = coefficient

    step_failures = target_failures = 0
    lowest = np.inf
    done = 0
    while done < trials:
        size = min(batch_size, trials - done)
        # alternate flat and peaked draws so near-deterministic corners are covered
        alpha = 1.0 if (done // batch_size) % 2 == 0 else 0.3
        dist = rng.dirichlet(np.full(matrix.shape[0], alpha), size=size)
        values = dist @ matrix
        for xy, yz, xz in layout:
            lhs = sum(values[:, c] for c in (xy, yz) if c is not None)
            rhs = values[:, xz] if xz is not None else 0.0
            step_failures += int(np.count_nonzero(lhs - rhs < -_MARGIN))
        totals = values @ target
        target_failures += int(np.count_nonzero(totals < -_MARGIN))
        lowest = min(lowest, float(totals.min()))
        done += size
    logger.info("Sampled %d distributions for %s: %d step / %d target failures",
                trials, proof.name, step_failures, target_failures)
    return SoundnessReport(trials, step_failures, target_failures, lowest)
