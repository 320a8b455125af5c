import itertools

import numpy as np
import pytest
from scipy import optimize

from binet import analytic, protocol, qmath, solver, states
from binet.errors import NoViolation, ParamError, Unreachable
from binet.measurements import JointKind, RoundSpec
from binet.protocol import ScenarioConfig
from binet.solver import Family, Scenario
from binet.states import Base, SourceSpec

ME = SourceSpec()
SINGLET = SourceSpec(0.5, 1.0, Base.PSI_MINUS)


def nme_with_entropy(e):
    eta = optimize.brentq(lambda a: qmath.binary_entropy(a) - e, 1e-12, 0.5)
    return SourceSpec.nme(eta)


def werner_with_eof(e):
    v = optimize.brentq(lambda v: states.entanglement(SourceSpec.werner(v)) - e, 1 / 3 + 1e-9, 1.0)
    return SourceSpec.werner(v)


# --- schedules --------------------------------------------------------------


def test_uni_brgp_schedule():
    res = solver.critical_schedule(Scenario.UNI_BRGP, ME)
    assert res.max_rounds == 6
    assert res.schedule[:6] == pytest.approx([0.5, 0.536, 0.581, 0.641, 0.725, 0.859], abs=1e-3)
    assert res.schedule[6] == pytest.approx(1.135, abs=1e-3)


def test_uni_brgp_exact_recursion():
    sched = solver.critical_schedule(Scenario.UNI_BRGP, ME).schedule
    for g, nxt in zip(sched, sched[1:]):
        assert abs(nxt - 2 * g / (1 + np.sqrt(1 - g * g))) < 1e-12


def test_bi_equal_schedule():
    res = solver.critical_schedule(Scenario.BI_EQUAL_BRGP, ME)
    assert res.max_rounds == 2
    assert res.schedule[:2] == pytest.approx([1 / np.sqrt(2), 0.828], abs=1e-3)
    assert round(res.schedule[2], 2) == 1.06
    g = res.schedule[0]
    assert abs(res.schedule[1] - 2 * g / (1 + np.sqrt(1 - g * g))) < 1e-12


def test_uni_ejm_schedule():
    res = solver.critical_schedule(Scenario.UNI_EJM, SINGLET)
    assert res.max_rounds == 2
    assert res.schedule[:2] == pytest.approx([5 / 7, 0.893], abs=1e-3)
    assert res.schedule[2] > 1


def test_schedule_entries_hit_boundary_in_engine():
    sched = solver.critical_schedule(Scenario.UNI_BRGP, ME).schedule
    for k in range(1, 4):
        cfg = ScenarioConfig(ME, ME, [RoundSpec()], [RoundSpec(g) for g in sched[:k]])
        assert protocol.simulate(cfg).B == pytest.approx(1.0, abs=1e-6)
    sched = solver.critical_schedule(Scenario.BI_EQUAL_BRGP, ME).schedule
    for k in range(1, 3):
        rounds = [RoundSpec(g) for g in sched[:k]]
        assert protocol.simulate(ScenarioConfig(ME, ME, rounds, rounds)).B == pytest.approx(1.0, abs=1e-6)
    sched = solver.critical_schedule(Scenario.UNI_EJM, SINGLET).schedule
    for k in range(1, 3):
        cfg = ScenarioConfig(SINGLET, SINGLET, [RoundSpec()], [RoundSpec(g) for g in sched[:k]], JointKind.EJM)
        rep = protocol.simulate(cfg)
        assert rep.BE == pytest.approx(rep.bound, abs=1e-6)


def test_schedule_strictly_increasing():
    for scenario, s in [(Scenario.UNI_BRGP, SourceSpec(0.4, 0.95)), (Scenario.UNI_EJM, SINGLET)]:
        sched = solver.critical_schedule(scenario, s).schedule
        assert all(b > a for a, b in zip(sched, sched[1:]))


def test_nme_ejm_schedule_uses_engine():
    s = SourceSpec.nme(0.45, Base.PSI_MINUS)
    res = solver.critical_schedule(Scenario.UNI_EJM, s, limit=2)
    cfg = ScenarioConfig(s, s, [RoundSpec()], [RoundSpec(res.schedule[0])], JointKind.EJM)
    rep = protocol.simulate(cfg)
    assert rep.BE == pytest.approx(rep.bound, abs=1e-9)


def test_no_violation_raises():
    with pytest.raises(NoViolation):
        solver.critical_schedule(Scenario.UNI_BRGP, SourceSpec.werner(0.6))


# --- max rounds -------------------------------------------------------------


def test_max_rounds_examples():
    assert solver.max_rounds(nme_with_entropy(0.96)) == 6
    assert solver.max_rounds(werner_with_eof(0.40)) == 0
    assert solver.max_rounds(werner_with_eof(0.60)) >= 2


@pytest.mark.parametrize("family,scenario", [
    (Family.NME, Scenario.UNI_BRGP), (Family.WERNER, Scenario.UNI_BRGP), (Family.WERNER, Scenario.UNI_EJM),
])
def test_max_rounds_is_monotone_step(family, scenario):
    lo, hi = solver.family_range(family)
    rows = solver.max_rounds_curve(family, scenario, np.linspace(lo, hi, 200))
    ents = [r[1] for r in rows]
    rounds = [r[2] for r in rows]
    assert all(b >= a for a, b in zip(ents, ents[1:]))
    assert all(b >= a for a, b in zip(rounds, rounds[1:]))
    assert rounds[0] == 0 and rounds[-1] >= 2


# --- thresholds ---------------------------------------------------------------


def test_single_round_werner_threshold_is_inverse_sqrt2():
    th = solver.threshold_point(1, Family.WERNER, Scenario.UNI_BRGP)
    assert th.parameter == pytest.approx(1 / np.sqrt(2), abs=1e-9)


def test_threshold_is_edge_of_step():
    th = solver.threshold_point(2, Family.NME, Scenario.UNI_BRGP)
    assert solver.max_rounds(SourceSpec.nme(th.parameter)) >= 2
    assert solver.max_rounds(SourceSpec.nme(th.parameter - 1e-6)) < 2


def test_threshold_unreachable():
    with pytest.raises(Unreachable):
        solver.threshold_point(7, Family.NME, Scenario.UNI_BRGP)
    with pytest.raises(ParamError):
        solver.threshold_point(0, Family.NME)


# --- bidirectional --------------------------------------------------------------


def test_chain_capacity_values():
    assert solver.chain_capacity(1) == 1.0
    assert solver.chain_capacity(2) == pytest.approx(0.8)
    assert solver.chain_capacity(3) == pytest.approx(0.68966, abs=1e-5)
    assert solver.chain_capacity(6) == pytest.approx(0.52159, abs=1e-5)


@pytest.mark.parametrize("length", [2, 3])
def test_chain_capacity_grid_agrees(length):
    # No chain on a 1e-3 grid beats the equalized construction.
    grid = solver.chain_capacity_grid(length)
    exact = solver.chain_capacity(length)
    assert grid <= exact + 1e-12
    assert grid == pytest.approx(exact, abs=2e-3)


def test_frontier_unequal_precision():
    front = solver.bidirectional_frontier(ME)
    assert (2, 3) in front and (3, 2) in front
    assert front == sorted(front)
    assert all((n, m) in front for m, n in front)
    assert solver.pair_feasible(2, 3, ME) and not solver.pair_feasible(2, 4, ME)
    assert solver.pair_feasible(4, 1, ME)


def test_frontier_equal_precision():
    assert solver.bidirectional_frontier(ME, allow_unequal_precision=False) == [(2, 2)]


def test_equal_frontier_dominated():
    unequal = solver.bidirectional_frontier(ME)
    for m, n in solver.bidirectional_frontier(ME, allow_unequal_precision=False):
        assert any(p >= m and q >= n for p, q in unequal)


def test_frontier_empty_for_product_states():
    assert solver.bidirectional_frontier(SourceSpec.nme(1.0)) == []


def test_anchored_schedule_violates_for_every_pair():
    alice, charu = solver.anchored_schedules(2, 3, ME)
    assert alice == pytest.approx([0.8, 1.0])
    assert charu == pytest.approx([0.625, 0.702, 0.820], abs=1e-3)
    for i, j in itertools.product(range(1, 3), range(1, 4)):
        B = analytic.brgp_noisy_nme(alice[:i], charu[:j])
        assert B >= 1.0 - 1e-12
    cfg = ScenarioConfig(ME, ME, [RoundSpec(g) for g in alice], [RoundSpec(g) for g in charu])
    assert protocol.simulate(cfg).B == pytest.approx(analytic.brgp_noisy_nme(alice, charu), abs=1e-12)


# --- angles -------------------------------------------------------------------


@pytest.mark.parametrize("source", [ME, SourceSpec.werner(0.8)])
def test_quarter_pi_is_optimal(source):
    for cert in solver.optimal_angle_search(source, 2):
        assert cert.max_deviation < 1e-3


def test_nme_angle_search_reports_argmax():
    s = SourceSpec.nme(0.3)
    (cert,) = solver.optimal_angle_search(s, 1)
    at_quarter = analytic.brgp_uni_general([0.5], [np.pi / 4], np.pi / 4, alpha=0.3, beta=0.3)[2]
    assert cert.B >= at_quarter - 1e-12
    assert 0 <= cert.phi <= np.pi / 2


def test_angle_search_limits():
    with pytest.raises(ParamError):
        solver.optimal_angle_search(ME, 4)


def test_sharing_result_serializes():
    d = solver.critical_schedule(Scenario.BI_EQUAL_BRGP, ME).to_dict()
    assert d["max_rounds"] == 2 and len(d["schedule"]) == 3
