"""Randomized agreement checks between the simulator and the closed forms."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import analytic, protocol, solver
from .measurements import JointKind, RoundSpec
from .states import Base, SourceSpec

VALUE_TOL = 1e-9
NORM_TOL = 1e-10
_QUARTER = np.pi / 4


def closed_form_value(config: protocol.ScenarioConfig) -> float | None:
    """Closed-form B (or BE) for configs that have one; None otherwise."""
    s1, s2 = config.source1, config.source2
    alice_G = [r.G for r in config.alice_rounds]
    charu_G = [r.G for r in config.charu_rounds]
    if config.joint is JointKind.BSM:
        res = dict(v1=s1.visibility, v2=s2.visibility, alpha=s1.eta, beta=s2.eta)
        angles = [r.angle for r in config.alice_rounds + config.charu_rounds]
        if all(abs(a - _QUARTER) < 1e-15 for a in angles):
            return analytic.brgp_noisy_nme(alice_G, charu_G, **res)
        if config.m == 1:
            thetas = [r.angle for r in config.charu_rounds]
            return analytic.brgp_uni_general(charu_G, thetas, config.alice_rounds[0].angle, alice_G[0], **res)[2]
        return None
    if solver._closed_form_ejm(s1, s2) and config.m == 1 and alice_G[0] == 1.0:
        Fs = [analytic.quality(g) for g in charu_G[:-1]]
        return analytic.tgb_closed_form(s1.visibility, s2.visibility, config.ejm_theta, charu_G[-1], Fs)
    return None


def random_config(rng: np.random.Generator) -> protocol.ScenarioConfig:
    family = rng.integers(3)
    G = lambda: float(rng.uniform(0.05, 1.0))
    if family == 2:
        n = int(rng.integers(1, 4))
        s1 = SourceSpec(0.5, float(rng.uniform()), Base.PSI_MINUS)
        s2 = SourceSpec(0.5, float(rng.uniform()), Base.PSI_MINUS)
        return protocol.ScenarioConfig(
            s1, s2, [RoundSpec(1.0)], [RoundSpec(G()) for _ in range(n)],
            JointKind.EJM, float(rng.uniform(0, np.pi / 2)),
        )
    s1 = SourceSpec(float(rng.uniform()), float(rng.uniform()))
    s2 = SourceSpec(float(rng.uniform()), float(rng.uniform()))
    if family == 0:
        n = int(rng.integers(1, 4))
        angle = lambda: float(rng.uniform(0, np.pi / 2))
        alice = [RoundSpec(G(), angle())]
        charu = [RoundSpec(G(), angle()) for _ in range(n)]
    else:
        m, n = (int(k) for k in rng.integers(1, 4, size=2))
        alice = [RoundSpec(G()) for _ in range(m)]
        charu = [RoundSpec(G()) for _ in range(n)]
    return protocol.ScenarioConfig(s1, s2, alice, charu)


@dataclass
class CaseResult:
    index: int
    kind: str
    m: int
    n: int
    simulated: float
    closed_form: float
    difference: float
    normalization_error: float
    Z: float | None
    passed: bool


def check_config(index: int, config: protocol.ScenarioConfig) -> CaseResult:
    table = protocol.averaged_table(config)
    rep = protocol.report(table)
    expected = closed_form_value(config)
    diff = abs(rep.value - expected)
    norm = table.normalization_error()
    ok = diff <= VALUE_TOL and norm <= NORM_TOL and float(table.probs.min()) >= -1e-12
    if rep.Z is not None:
        ok = ok and rep.Z <= VALUE_TOL
    return CaseResult(index, rep.kind, config.m, config.n, rep.value, expected, diff, norm, rep.Z, ok)


def configs(samples: int, seed: int) -> list[protocol.ScenarioConfig]:
    rng = np.random.default_rng(seed)
    return [random_config(rng) for _ in range(samples)]


def run_suite(samples: int = 100, seed: int = 7, mapper=map) -> list[CaseResult]:
    cfgs = configs(samples, seed)
    return list(mapper(check_config, range(len(cfgs)), cfgs))


def summarize(results: list[CaseResult]) -> dict:
    return {
        "samples": len(results),
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "max_difference": max((r.difference for r in results), default=0.0),
        "max_normalization_error": max((r.normalization_error for r in results), default=0.0),
        "cases": [asdict(r) for r in results],
    }
