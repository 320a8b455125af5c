"""Brute-force simulation of sequential bilocal tests.

Bob measures his two qubits first. The Alice chain then acts on qubit 0
of the swapped state and the Charu chain on qubit 1. Every intermediate
observer applies the outcome-averaged unsharp map for the setting it
drew; the last pair applies the outcome-resolved maps. Probabilities are
averaged over all earlier settings with a uniform prior.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import qmath, states
from .errors import ConfigError, DimensionError, WrongScenario
from .measurements import (
    JointBasis,
    JointKind,
    Party,
    RoundSpec,
    joint_basis,
    observable,
    pauli_observable,
    weak_map_conditional,
    weak_map_unconditional,
)
from .states import SourceSpec

VIOLATION_MARGIN = 1e-9
_SIGN = np.array([1.0, -1.0])


@dataclass(frozen=True)
class ScenarioConfig:
    source1: SourceSpec
    source2: SourceSpec
    alice_rounds: Sequence[RoundSpec]
    charu_rounds: Sequence[RoundSpec]
    joint: JointKind = JointKind.BSM
    ejm_theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alice_rounds", tuple(self.alice_rounds))
        object.__setattr__(self, "charu_rounds", tuple(self.charu_rounds))
        object.__setattr__(self, "joint", JointKind(self.joint))
        if not self.alice_rounds or not self.charu_rounds:
            raise ConfigError("each chain needs at least one round")
        for r in self.alice_rounds + self.charu_rounds:
            if not isinstance(r, RoundSpec):
                raise ConfigError(f"expected RoundSpec, got {type(r).__name__}")

    @property
    def m(self) -> int:
        return len(self.alice_rounds)

    @property
    def n(self) -> int:
        return len(self.charu_rounds)

    @property
    def settings(self) -> int:
        return 2 if self.joint is JointKind.BSM else 3

    @cached_property
    def basis(self) -> JointBasis:
        return joint_basis(self.joint, self.ejm_theta)

    @cached_property
    def network_state(self) -> np.ndarray:
        return states.network_state(self.source1, self.source2)

    def direction(self, party: Party, round_index: int, setting: int) -> np.ndarray:
        if self.joint is JointKind.EJM:
            return pauli_observable(setting)
        rounds = self.alice_rounds if party is Party.ALICE else self.charu_rounds
        return observable(rounds[round_index].angle, setting, party)


def condition_on_bob(rho4: np.ndarray, basis: JointBasis, outcome: int) -> tuple[np.ndarray, float]:
    """Project Bob's qubits onto one basis element; returns the unnormalized A-C state and its weight."""
    if rho4.shape != (16, 16):
        raise DimensionError(f"expected a 16x16 four-qubit state, got {rho4.shape}")
    proj = np.kron(np.kron(qmath.I2, basis.projectors[outcome]), qmath.I2)
    ac = qmath.partial_trace(proj @ rho4 @ proj, keep=[0, 3], dims=[2, 2, 2, 2])
    return ac, float(np.trace(ac).real)


def _check_history(name: str, history: Sequence[int], length: int, settings: int) -> tuple[int, ...]:
    history = tuple(int(h) for h in history)
    if len(history) != length:
        raise ConfigError(f"{name} has length {len(history)}, expected {length}")
    if any(not 0 <= h < settings for h in history):
        raise ConfigError(f"{name} {history} has settings outside 0..{settings - 1}")
    return history


def _chain(config: ScenarioConfig, state: np.ndarray, alice_history, charu_history) -> np.ndarray:
    for i, x in enumerate(alice_history):
        d = config.direction(Party.ALICE, i, x)
        state = weak_map_unconditional(state, 0, d, config.alice_rounds[i].F)
    for j, z in enumerate(charu_history):
        d = config.direction(Party.CHARU, j, z)
        state = weak_map_unconditional(state, 1, d, config.charu_rounds[j].F)
    return state


def run_chain(
    config: ScenarioConfig,
    bob_outcome: int,
    alice_history: Sequence[int] = (),
    charu_history: Sequence[int] = (),
) -> np.ndarray:
    """Unnormalized A^m-C^n state just before the last pair measures."""
    alice_history = _check_history("alice_history", alice_history, config.m - 1, config.settings)
    charu_history = _check_history("charu_history", charu_history, config.n - 1, config.settings)
    state, _ = condition_on_bob(config.network_state, config.basis, bob_outcome)
    return _chain(config, state, alice_history, charu_history)


def _final_probs(config: ScenarioConfig, state: np.ndarray) -> np.ndarray:
    """P[x, z, a, c] from the last Alice and Charu applying outcome-resolved maps."""
    s = config.settings
    ga, gc = config.alice_rounds[-1].G, config.charu_rounds[-1].G
    out = np.empty((s, s, 2, 2))
    for x in range(s):
        da = config.direction(Party.ALICE, config.m - 1, x)
        for a in range(2):
            ra = weak_map_conditional(state, 0, da, ga, a)
            for z in range(s):
                dc = config.direction(Party.CHARU, config.n - 1, z)
                for c in range(2):
                    out[x, z, a, c] = np.trace(weak_map_conditional(ra, 1, dc, gc, c)).real
    return out


def joint_probability(
    config: ScenarioConfig,
    bob_outcome: int,
    alice_settings: Sequence[int],
    alice_outcome: int,
    charu_settings: Sequence[int],
    charu_outcome: int,
) -> float:
    """P(a_m, b, c_n | x_1..x_m, z_1..z_n) for one full setting history."""
    alice_settings = _check_history("alice_settings", alice_settings, config.m, config.settings)
    charu_settings = _check_history("charu_settings", charu_settings, config.n, config.settings)
    state = run_chain(config, bob_outcome, alice_settings[:-1], charu_settings[:-1])
    da = config.direction(Party.ALICE, config.m - 1, alice_settings[-1])
    dc = config.direction(Party.CHARU, config.n - 1, charu_settings[-1])
    state = weak_map_conditional(state, 0, da, config.alice_rounds[-1].G, alice_outcome)
    state = weak_map_conditional(state, 1, dc, config.charu_rounds[-1].G, charu_outcome)
    return float(np.trace(state).real)


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """History-averaged P(a, b, c | x, z), stored as ``probs[x, z, a, b, c]``."""

    probs: np.ndarray
    basis: JointBasis = field(repr=False)

    @property
    def kind(self) -> JointKind:
        return self.basis.kind

    @property
    def settings(self) -> int:
        return self.probs.shape[0]

    def normalization_error(self) -> float:
        return float(np.max(np.abs(self.probs.sum(axis=(2, 3, 4)) - 1.0)))

    def rows(self):
        labels = self.basis.label_strings
        for x, z, a, b, c in itertools.product(
            range(self.settings), range(self.settings), range(2), range(4), range(2)
        ):
            yield x, z, a, labels[b], c, float(self.probs[x, z, a, b, c])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "z", "a", "bob_label", "c", "p"])
        for x, z, a, lab, c, p in self.rows():
            w.writerow([x, z, a, lab, c, repr(p)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "ejm_theta": self.basis.theta,
            "settings": self.settings,
            "bob_labels": self.basis.label_strings,
            "entries": [
                {"x": x, "z": z, "a": a, "bob_label": lab, "c": c, "p": p}
                for x, z, a, lab, c, p in self.rows()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ProbabilityTable":
        basis = joint_basis(data["kind"], data.get("ejm_theta") or 0.0)
        s = int(data["settings"])
        index = {lab: i for i, lab in enumerate(basis.label_strings)}
        probs = np.zeros((s, s, 2, 4, 2))
        for e in data["entries"]:
            probs[e["x"], e["z"], e["a"], index[e["bob_label"]], e["c"]] = e["p"]
        return cls(probs, basis)


def averaged_table(config: ScenarioConfig) -> ProbabilityTable:
    s = config.settings
    probs = np.zeros((s, s, 2, 4, 2))
    alice_hists = list(itertools.product(range(s), repeat=config.m - 1))
    charu_hists = list(itertools.product(range(s), repeat=config.n - 1))
    weight = 1.0 / s ** (config.m + config.n - 2)
    for b in range(4):
        start, _ = condition_on_bob(config.network_state, config.basis, b)
        for xs in alice_hists:
            after_alice = _chain(config, start, xs, ())
            for zs in charu_hists:
                state = _chain(config, after_alice, (), zs)
                probs[:, :, :, b, :] += weight * _final_probs(config, state)
    return ProbabilityTable(probs, config.basis)


def correlator(table: ProbabilityTable, alice: bool, y: int | None, charu: bool) -> np.ndarray:
    """Expectation of the chosen product of +/-1 variables, indexed [x, z]."""
    sa = _SIGN if alice else np.ones(2)
    sc = _SIGN if charu else np.ones(2)
    sb = np.ones(4) if y is None else np.array([table.basis.sign(b, y) for b in range(4)], float)
    return np.einsum("xzabc,a,b,c->xz", table.probs, sa, sb, sc)


@dataclass(frozen=True)
class BilocalReport:
    kind: str
    violated: bool
    I: float | None = None
    J: float | None = None
    B: float | None = None
    BE: float | None = None
    Z: float | None = None

    @property
    def value(self) -> float:
        return self.B if self.kind == JointKind.BSM.value else self.BE

    @property
    def bound(self) -> float:
        return 1.0 if self.kind == JointKind.BSM.value else 3.0 + 5.0 * self.Z

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def brgp_from_table(table: ProbabilityTable) -> BilocalReport:
    if table.kind is not JointKind.BSM:
        raise WrongScenario("BRGP needs a Bell-state-measurement table")
    par = np.array([[1, -1], [-1, 1]])
    I = float(np.mean(correlator(table, True, 0, True)))
    J = float(np.mean(par * correlator(table, True, 1, True)))
    B = float(np.sqrt(abs(I)) + np.sqrt(abs(J)))
    return BilocalReport(JointKind.BSM.value, B > 1.0 + VIOLATION_MARGIN, I=I, J=J, B=B)


def brgp_by_outcome(table: ProbabilityTable) -> list[float]:
    """BRGP value computed within each of Bob's four outcome branches."""
    if table.kind is not JointKind.BSM:
        raise WrongScenario("BRGP needs a Bell-state-measurement table")
    par = np.array([[1, -1], [-1, 1]])
    out = []
    for b in range(4):
        pb = float(np.mean(table.probs[:, :, :, b, :].sum(axis=(2, 3))))
        e = np.einsum("xzac,a,c->xz", table.probs[:, :, :, b, :], _SIGN, _SIGN) / pb
        I = np.mean(table.basis.sign(b, 0) * e)
        J = np.mean(par * table.basis.sign(b, 1) * e)
        out.append(float(np.sqrt(abs(I)) + np.sqrt(abs(J))))
    return out


def tgb_terms(table: ProbabilityTable) -> tuple[float, float, dict[str, np.ndarray]]:
    """(BE, Z, correlators) for a three-setting EJM table."""
    if table.kind is not JointKind.EJM or table.settings != 3:
        raise WrongScenario("TGB needs an EJM table with three settings per party")
    # one-sided marginals are averaged over the other party's setting
    A = correlator(table, True, None, False).mean(axis=1)
    C = correlator(table, False, None, True).mean(axis=0)
    Bm = np.array([correlator(table, False, y, False).mean() for y in range(3)])
    AB = np.array([correlator(table, True, y, False).mean(axis=1) for y in range(3)]).T  # [x, y]
    BC = np.array([correlator(table, False, y, True).mean(axis=0) for y in range(3)])  # [y, z]
    AC = correlator(table, True, None, True)
    ABC = np.array([correlator(table, True, y, True) for y in range(3)]).transpose(1, 0, 2)  # [x, y, z]

    perms = list(itertools.permutations(range(3)))
    BE = (np.trace(BC) - np.trace(AB)) / 3.0 - sum(ABC[p] for p in perms)
    others = [A, C, Bm, AC.ravel()]
    off = ~np.eye(3, dtype=bool)
    others += [AB[off], BC[off]]
    others.append(np.array([ABC[i] for i in itertools.product(range(3), repeat=3) if i not in perms]))
    Z = float(max(np.max(np.abs(o)) for o in others))
    corrs = {"A": A, "B": Bm, "C": C, "AB": AB, "BC": BC, "AC": AC, "ABC": ABC}
    return float(BE), Z, corrs


def tgb_from_table(table: ProbabilityTable) -> BilocalReport:
    BE, Z, _ = tgb_terms(table)
    return BilocalReport(JointKind.EJM.value, BE > 3.0 + 5.0 * Z + VIOLATION_MARGIN, BE=BE, Z=Z)


def report(table: ProbabilityTable) -> BilocalReport:
    return brgp_from_table(table) if table.kind is JointKind.BSM else tgb_from_table(table)


def simulate(config: ScenarioConfig) -> BilocalReport:
    return report(averaged_table(config))
