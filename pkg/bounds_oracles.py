"""
Local-realistic and no-signaling minima of Bell and monogamy expressions

The LR minimum is taken over all deterministic strategies with integer
arithmetic. The NS minimum is a linear program over the full behavior table:
normalization per setting tuple plus, for every party, marginal equalities
against that party's setting 1. Every LP solution is double-checked through its
equality duals before it is returned.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.optimize import linprog

from errors import CertificateError, EnumerationCapError, InputError, LPFormulationError, LPSizeError
from exact_simplex import solve_standard_form
from prob_core import (Behavior, DeterministicStrategy, behavior_from_strategy,
                       check_enumeration_cap, strategy_block, validate_no_signaling)
from run_config import DEFAULT_CONFIG

logger = logging.getLogger(__name__)

HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass
class BoundResult:
    value: float
    optimizer: Behavior
    method: str
    tolerance: float
    label: str = ""
    exact_value: Optional[Fraction] = None
    dual_residual: Optional[float] = None
    strategy: Optional[DeterministicStrategy] = None
    certificate: Optional["ExactCertificate"] = None

    def to_dict(self):
        payload = {"label": self.label, "value": self.value, "method": self.method, "tolerance": self.tolerance}
        if self.exact_value is not None:
            payload["exact_value"] = str(self.exact_value)
        if self.dual_residual is not None:
            payload["dual_residual"] = self.dual_residual
        return payload


@dataclass
class ExactCertificate:
    """lower: a dual bound checked in rationals; upper: a rational feasible point's value"""

    lower: Fraction
    upper: Optional[Fraction]
    source: str

    @property
    def closed(self):
        return self.upper is not None and self.upper == self.lower


@dataclass
class LinearProgramInstance:
    scenario: object
    c: np.ndarray
    A_eq: sparse.csr_matrix
    b_eq: np.ndarray
    n_normalization_rows: int
    label: str = ""
    block_size: int = field(init=False)

    def __post_init__(self):
        self.block_size = self.scenario.n_outcomes ** self.scenario.n_parties

    @property
    def n_variables(self):
        return self.c.size


# --- local realism -------------------------------------------------------------

def lr_minimum(expression, config=None, workers=None):
    """Minimum over deterministic strategies; ties go to the first strategy in order"""
    config = config or DEFAULT_CONFIG
    scenario = expression.scenario
    n = scenario.n_parties
    party_cap = config["enumeration"]["binary_party_cap"]
    if scenario.n_outcomes == 2 and n > party_cap:
        raise EnumerationCapError(f"{n} binary parties exceed the brute-force cap of {party_cap}")
    count = check_enumeration_cap(scenario, config["enumeration"]["cap"])
    chunk = config["enumeration"]["chunk_size"]
    workers = workers or config["enumeration"]["workers"]

    coefficients = expression.coefficient_table()
    active = [s for s in itertools.product(range(scenario.n_settings), repeat=n) if coefficients[s].any()]

    def evaluate_chunk(start):
        block = strategy_block(scenario, start, min(start + chunk, count))
        values = np.zeros(len(block), dtype=np.int64)
        for settings in active:
            values += coefficients[settings][tuple(block[:, k, settings[k]] for k in range(n))]
        best = int(np.argmin(values))
        return int(values[best]), start + best

    starts = range(0, count, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate_chunk, starts))
    else:
        results = [evaluate_chunk(start) for start in starts]
    value, index = min(results)

    strategy = DeterministicStrategy.from_array(strategy_block(scenario, index, index + 1)[0])
    logger.info("LR minimum of %s is %d over %d strategies", expression.label, value, count)
    return BoundResult(float(value), behavior_from_strategy(strategy, scenario), "brute_force", 0.0,
                       label=expression.label, exact_value=Fraction(value), strategy=strategy)


# --- no-signaling ------------------------------------------------------------------

def build_ns_lp(expression, config=None):
    config = config or DEFAULT_CONFIG
    scenario = expression.scenario
    n, d = scenario.n_parties, scenario.n_outcomes
    n_variables = scenario.table_size
    cap = config["lp"]["max_variables"]
    if n_variables > cap:
        raise LPSizeError(f"LP for {expression.label} needs {n_variables} variables, cap is {cap}",
                          variables=n_variables, cap=cap)

    index = np.arange(n_variables).reshape(scenario.table_shape)
    n_blocks = scenario.n_settings ** n
    block = d ** n
    rows = [np.repeat(np.arange(n_blocks), block)]
    cols = [np.arange(n_variables)]
    data = [np.ones(n_variables)]
    offset = n_blocks
    for k in range(n):
        # rows: (other settings, other outcomes); columns: party k's outcomes
        ref = np.moveaxis(np.take(index, 0, axis=k), n - 1 + k, -1).reshape(-1, d)
        alt = np.moveaxis(np.take(index, 1, axis=k), n - 1 + k, -1).reshape(-1, d)
        row_ids = np.repeat(offset + np.arange(ref.shape[0]), d)
        rows += [row_ids, row_ids]
        cols += [alt.ravel(), ref.ravel()]
        data += [np.ones(alt.size), -np.ones(ref.size)]
        offset += ref.shape[0]

    A_eq = sparse.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(offset, n_variables)).tocsr()
    b_eq = np.zeros(offset)
    b_eq[:n_blocks] = 1.0
    c = expression.coefficient_table().ravel().astype(float)
    return LinearProgramInstance(scenario, c, A_eq, b_eq, n_blocks, expression.label)


def _solve_float(lp, config):
    res = linprog(lp.c, A_eq=lp.A_eq, b_eq=lp.b_eq, bounds=(0, None),
                  method=config["lp"]["method"], options=HIGHS_OPTIONS)
    if res.status == 2:
        raise LPFormulationError(f"No-signaling LP for {lp.label} is infeasible")
    if res.status == 3:
        raise LPFormulationError(f"No-signaling LP for {lp.label} is unbounded")
    if not res.success:
        raise LPFormulationError(f"No-signaling LP for {lp.label} failed: {res.message}")
    return res


def _dual_residual(lp, x, y):
    """Worst of dual infeasibility, complementary slackness, duality gap and primal residual"""
    reduced = lp.c - lp.A_eq.T @ y
    dual_infeasibility = max(0.0, -float(reduced.min()))
    slackness = float(np.abs(x * reduced).max())
    gap = abs(float(lp.c @ x) - float(lp.b_eq @ y))
    primal = float(np.abs(lp.A_eq @ x - lp.b_eq).max())
    return max(dual_infeasibility, slackness, gap, primal)


def _rational_certificate(lp, x, y, max_denominator):
    """Exact dual bound from rounded duals, plus the exact value of the rounded primal if feasible"""
    coo = lp.A_eq.tocoo()
    entries = list(zip(coo.row.tolist(), coo.col.tolist(), [int(v) for v in coo.data]))
    y_q = [Fraction(float(v)).limit_denominator(max_denominator) for v in y]
    reduced = [Fraction(int(v)) for v in lp.c]
    for row, col, value in entries:
        reduced[col] -= value * y_q[row]

    # every variable sits in exactly one normalization row; shifting that dual repairs its block
    for row in range(lp.n_normalization_rows):
        start = row * lp.block_size
        deficit = max(-min(reduced[start:start + lp.block_size]), Fraction(0))
        if deficit:
            y_q[row] -= deficit
    lower = sum(y_q[:lp.n_normalization_rows], Fraction(0))

    x_q = [Fraction(float(v)).limit_denominator(max_denominator) if v > 0 else Fraction(0) for v in x]
    residual = [Fraction(int(v)) for v in -lp.b_eq]
    for row, col, value in entries:
        residual[row] += value * x_q[col]
    upper = None
    if not any(residual):
        upper = sum((Fraction(int(cj)) * xj for cj, xj in zip(lp.c, x_q) if cj), Fraction(0))
        if upper < lower:
            raise CertificateError(f"Rational certificate for {lp.label} is inconsistent: {upper} < {lower}")
    return ExactCertificate(lower, upper, "rational"), x_q


def _exact_solve(lp):
    dense = lp.A_eq.toarray().astype(int).tolist()
    solution = solve_standard_form(dense, [int(v) for v in lp.b_eq], [int(v) for v in lp.c])
    return ExactCertificate(solution.value, solution.value, "simplex"), solution.x


def ns_minimum(expression, exact=False, config=None):
    """Global minimum over the no-signaling polytope"""
    config = config or DEFAULT_CONFIG
    tolerances = config["tolerances"]
    lp = build_ns_lp(expression, config)
    res = _solve_float(lp, config)
    x = np.clip(res.x, 0.0, None)
    y = np.asarray(res.eqlin.marginals, dtype=float)
    residual = _dual_residual(lp, x, y)
    if residual > tolerances["dual_residual"]:
        raise CertificateError(
            f"Optimality check for {lp.label} failed: residual {residual:.3e} exceeds {tolerances['dual_residual']:.1e}",
            residual=residual)

    optimizer = Behavior(lp.scenario, x.reshape(lp.scenario.table_shape), tol=tolerances["numeric"])
    report = validate_no_signaling(optimizer, tolerances["numeric"])
    if not report.passed:
        raise CertificateError(f"LP optimizer for {lp.label} signals by {report.max_violation:.3e}")

    result = BoundResult(float(res.fun), optimizer, "lp", tolerances["lp"], label=lp.label, dual_residual=residual)
    if exact:
        certificate, x_exact = _rational_certificate(lp, res.x, y, config["exact"]["max_denominator"])
        if not certificate.closed:
            if lp.n_variables > config["exact"]["max_variables"]:
                raise CertificateError(
                    f"Rational certificate for {lp.label} did not close and {lp.n_variables} variables "
                    f"exceed the exact simplex cap", lower=str(certificate.lower))
            logger.info("Rational certificate for %s open, running exact simplex", lp.label)
            certificate, x_exact = _exact_solve(lp)
            table = np.array([float(v) for v in x_exact]).reshape(lp.scenario.table_shape)
            result.optimizer = Behavior(lp.scenario, table, tol=tolerances["numeric"])
        result.method = "lp_exact"
        result.exact_value = certificate.lower
        result.value = float(certificate.lower)
        result.tolerance = 0.0
        result.certificate = certificate
    logger.info("NS minimum of %s is %.12g (%s)", lp.label, result.value, result.method)
    return result


def pairwise_monogamy_certificates(monogamy, exact=False, config=None):
    """NS minimum of every pairwise sum of summands"""
    if len(monogamy.summands) < 2:
        raise InputError(f"{monogamy.label} has {len(monogamy.summands)} summand(s); pairwise checks need 2")
    return [ns_minimum(pair, exact=exact, config=config) for _, pair in monogamy.pairs()]


def certificates_hold(results, tol=DEFAULT_CONFIG["tolerances"]["lp"]):
    return all(result.value >= -tol for result in results)


def certificate_report(results, tol=DEFAULT_CONFIG["tolerances"]["lp"]):
    """One row per bound: label, value, method, residual, verdict"""
    rows = [{
        "label": r.label,
        "value": r.value,
        "exact_value": str(r.exact_value) if r.exact_value is not None else "",
        "method": r.method,
        "dual_residual": r.dual_residual if r.dual_residual is not None else np.nan,
        "nonnegative": r.value >= -tol,
    } for r in results]
    return pd.DataFrame(rows, columns=["label", "value", "exact_value", "method", "dual_residual", "nonnegative"])
