"""
GHZ-state behaviors for the separation and quasi-distance inequalities

Qubits are measured in equatorial bases: for angle theta, outcome 1 (the +1
event) is (|0> + e^{i theta}|1>)/sqrt2 and outcome 0 is (|0> - e^{i theta}|1>)/sqrt2.
The N-party separation at total angle theta is then (1 + (-1)^{N+1} cos theta)/2.
For even N the default plan turns party A by pi so the inequality is still
violated under this one event convention.

Qudits are measured in Fourier bases with per-party phases (alpha_i, beta_j,
gamma_k); party C uses the conjugate basis so that p(a,b,c|i,j,k) =
|sum_n w^{n(a+b-c+phi_ijk)}|^2 / d^4 with phi_ijk = alpha_i + beta_j - gamma_k.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from bell_builder import ZG_LAYOUT, build_separation_bell, build_zg_svetlichny, evaluate
from errors import InputError, UnsupportedScenarioError
from prob_core import ANALYTIC_TOL, Behavior, Scenario
from separation_metrics import LHS_LESS, RHS_LESS
from run_config import DEFAULT_CONFIG

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class QubitPlan:
    """angles[k] = (theta for setting 1, theta for setting 2) of party k"""

    angles: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        angles = tuple((float(a), float(b)) for a, b in self.angles)
        if not np.all(np.isfinite(angles)):
            raise InputError("Qubit plan angles must be finite")
        object.__setattr__(self, "angles", angles)

    @property
    def n_parties(self):
        return len(self.angles)

    def total_angle(self, settings):
        return sum(self.angles[k][s - 1] for k, s in enumerate(settings))


@dataclass(frozen=True)
class QuditPlan:
    d: int
    alpha: Tuple[float, float]
    beta: Tuple[float, float]
    gamma: Tuple[float, float]

    def __post_init__(self):
        if self.d < 2:
            raise UnsupportedScenarioError(f"Qudit plans need d >= 2, got {self.d}")
        for name in ("alpha", "beta", "gamma"):
            phases = tuple(float(v) for v in getattr(self, name))
            if len(phases) != 2:
                raise InputError(f"{name} must hold one phase per setting")
            object.__setattr__(self, name, phases)

    def phase_table(self):
        """phi[i, j, k] with 0-based setting indices"""
        a, b, g = (np.asarray(v) for v in (self.alpha, self.beta, self.gamma))
        return a[:, None, None] + b[None, :, None] - g[None, None, :]

    def with_dimension(self, d):
        return QuditPlan(d, self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > ANALYTIC_TOL:
            raise InputError(f"State vector norm is {norm!r}, not 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def n_parties(self):
        return self.amplitudes.ndim

    @property
    def d(self):
        return self.amplitudes.shape[0]


def ghz_state(n_parties, d=2):
    amplitudes = np.zeros((d,) * n_parties, dtype=complex)
    for n in range(d):
        amplitudes[(n,) * n_parties] = 1.0 / np.sqrt(d)
    return StateVector(amplitudes)


def qubit_basis(theta):
    """Rows are the outcome-0 and outcome-1 vectors"""
    phase = np.exp(1j * theta)
    return np.array([[1.0, -phase], [1.0, phase]]) / np.sqrt(2.0)


def fourier_basis(d, phase, conjugate=False):
    n = np.arange(d)
    sign = -1.0 if conjugate else 1.0
    return np.exp(sign * 2j * np.pi * np.outer(n + phase, n) / d) / np.sqrt(d)


def default_qubit_plan(n_parties):
    """Setting 1 along x, setting 2 turned by pi/(N-1); party A offset by pi for even N"""
    if n_parties < 2:
        raise UnsupportedScenarioError(f"GHZ plans need at least 2 parties, got {n_parties}")
    step = np.pi / (n_parties - 1)
    angles = [[0.0, step] for _ in range(n_parties)]
    if n_parties % 2 == 0:
        angles[0] = [np.pi, np.pi + step]
    return QubitPlan(tuple(tuple(a) for a in angles))


def canonical_qudit_plan(d):
    return QuditPlan(d, (1.0, 1.0 / 3.0), (0.0, 0.0), (0.0, 2.0 / 3.0))


def conjugate_plan(plan):
    return QuditPlan(plan.d, tuple(-v for v in plan.alpha), tuple(-v for v in plan.beta),
                     tuple(-v for v in plan.gamma))


def statevector_behavior(state, bases, labels=()):
    """p(o|s) = |<o_1,s_1| x ... x <o_N,s_N| state>|^2

    bases[k][s] is a (d, d) array whose row o is party k's vector for outcome o
    under 0-based setting s.
    """
    n, d = state.n_parties, state.d
    if len(bases) != n:
        raise InputError(f"Need bases for {n} parties, got {len(bases)}")
    identity = np.eye(d)
    for k, party_bases in enumerate(bases):
        for s, basis in enumerate(party_bases):
            basis = np.asarray(basis)
            if basis.shape != (d, d) or np.abs(basis @ basis.conj().T - identity).max() > ORTHONORMAL_TOL:
                raise InputError(f"Basis for party {k} setting {s + 1} is not orthonormal")

    scenario = Scenario(n, d, labels=tuple(labels))
    table = np.zeros(scenario.table_shape)
    for settings in itertools.product(range(2), repeat=n):
        amplitudes = state.amplitudes
        for k in range(n):
            amplitudes = np.moveaxis(np.tensordot(np.conj(bases[k][settings[k]]), amplitudes, axes=(1, k)), 0, k)
        table[settings] = np.abs(amplitudes) ** 2
    return Behavior(scenario, table)


def ghz_qubit_behavior(n_parties, plan):
    if n_parties < 2:
        raise UnsupportedScenarioError(f"GHZ behaviors need at least 2 parties, got {n_parties}")
    if plan.n_parties != n_parties:
        raise InputError(f"Plan covers {plan.n_parties} parties, expected {n_parties}")
    bases = [[qubit_basis(theta) for theta in party] for party in plan.angles]
    return statevector_behavior(ghz_state(n_parties, 2), bases)


def separation_closed_form(n_parties, total_angle):
    return (1.0 + (-1) ** (n_parties + 1) * np.cos(total_angle)) / 2.0


def ghz_qubit_closed_form_table(n_parties, plan):
    """p(o|s) = (1 + (-1)^{#zeros} cos theta_s) / 2^N"""
    scenario = Scenario(n_parties, 2)
    grid = np.indices((2,) * n_parties)
    zeros = n_parties - grid.sum(axis=0)
    parity = np.where(zeros % 2 == 0, 1.0, -1.0)
    table = np.zeros(scenario.table_shape)
    for settings in itertools.product((1, 2), repeat=n_parties):
        theta = plan.total_angle(settings)
        table[tuple(s - 1 for s in settings)] = (1.0 + parity * np.cos(theta)) / 2 ** n_parties
    return table


def quantum_separation_value(n_parties, plan=None):
    """Value of the default N-party separation inequality on the GHZ state"""
    plan = plan or default_qubit_plan(n_parties)
    return evaluate(build_separation_bell(tuple(Scenario(n_parties).labels)), ghz_qubit_behavior(n_parties, plan))


def _residue_weights(d, phases):
    """q(m) = |sum_n w^{n(m + phase)}|^2 / d^4 for m = 0..d-1, one row per phase"""
    n = np.arange(d)
    m = np.arange(d)
    exponent = np.add.outer(np.asarray(phases, dtype=float), m)[..., None] * n
    sums = np.exp(2j * np.pi * exponent / d).sum(axis=-1)
    return np.abs(sums) ** 2 / d ** 4


def ghz_qudit_behavior(d, plan):
    if d < 2:
        raise UnsupportedScenarioError(f"Qudit behaviors need d >= 2, got {d}")
    plan = plan.with_dimension(d)
    phases = plan.phase_table()
    weights = _residue_weights(d, phases.ravel()).reshape(2, 2, 2, d)
    a, b, c = np.indices((d, d, d))
    residue = (a + b - c) % d
    table = np.zeros((2, 2, 2, d, d, d))
    for i, j, k in itertools.product(range(2), repeat=3):
        table[i, j, k] = weights[i, j, k][residue]
    return Behavior(Scenario(3, d), table)


def qudit_statevector_behavior(d, plan):
    """Same behavior through explicit Fourier measurements on the GHZ vector"""
    plan = plan.with_dimension(d)
    bases = [
        [fourier_basis(d, p) for p in plan.alpha],
        [fourier_basis(d, p) for p in plan.beta],
        [fourier_basis(d, p, conjugate=True) for p in plan.gamma],
    ]
    return statevector_behavior(ghz_state(3, d), bases)


def zg_value_reduced(d, plan, direction_swapped=False):
    """Quasi-distance inequality value in O(d^2): each (s, c) residue pair has d preimages (a, b)"""
    plan = plan.with_dimension(d)
    phases = plan.phase_table()
    s, c = np.indices((d, d))
    shift = (s - c) % d
    value = 0.0
    for sign, (i, j), k, direction in ZG_LAYOUT:
        if direction_swapped:
            direction = RHS_LESS if direction == LHS_LESS else LHS_LESS
        mask = c > s if direction == LHS_LESS else c < s
        weights = _residue_weights(d, [phases[i - 1, j - 1, k - 1]])[0]
        value += sign * d * float(weights[shift][mask].sum())
    return value


def zg_value_direct(d, plan, direction_swapped=False):
    return evaluate(build_zg_svetlichny(d, direction_swapped), ghz_qudit_behavior(d, plan))


def figure3_sweep(d_min, d_max, plan_factory=canonical_qudit_plan, workers=1, config=None):
    """Quantum value of the d-outcome inequality for every d in [d_min, d_max]"""
    cap = (config or DEFAULT_CONFIG)["quantum"]["d_max"]
    if not 2 <= d_min <= d_max <= cap:
        raise InputError(f"Need 2 <= d_min <= d_max <= {cap}, got {d_min}..{d_max}")
    dims = list(range(d_min, d_max + 1))

    def row(d):
        return {"d": d, "value": zg_value_reduced(d, plan_factory(d))}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, dims))
    else:
        rows = [row(d) for d in dims]
    logger.info("Swept d=%d..%d", d_min, d_max)
    return pd.DataFrame(rows, columns=["d", "value"])
