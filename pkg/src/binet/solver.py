"""Critical precision schedules, round counts, entanglement edges and frontiers."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import analytic, protocol, states
from .errors import NoViolation, ParamError, Unreachable
from .measurements import JointKind, RoundSpec
from .states import Base, SourceSpec

ROOT_XTOL = 1e-15
MAX_DEPTH = 16
FRONTIER_LIMIT = 8
_G_CEILING = 1e6


class Scenario(str, enum.Enum):
    UNI_BRGP = "uni-brgp"
    BI_EQUAL_BRGP = "bi-equal-brgp"
    UNI_EJM = "uni-ejm"


class Family(str, enum.Enum):
    NME = "nme"
    WERNER = "werner"


@dataclass
class SharingResult:
    schedule: list[float]
    max_rounds: int
    frontier: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"schedule": self.schedule, "max_rounds": self.max_rounds, "frontier": [list(p) for p in self.frontier]}


def _bisect_root(f: Callable[[float], float], lo: float = 0.0) -> float | None:
    """Smallest-bracket bisection root of an increasing margin on (lo, ceiling]; None if never positive."""
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > _G_CEILING:
            return None
    if f(lo) > 0.0:
        return lo
    return float(optimize.bisect(f, lo, hi, xtol=ROOT_XTOL, maxiter=500))


def _closed_form_ejm(s1: SourceSpec, s2: SourceSpec) -> bool:
    return s1.base is Base.PSI_MINUS and s2.base is Base.PSI_MINUS and s1.eta == 0.5 and s2.eta == 0.5


def _ejm_margin_bruteforce(s1: SourceSpec, s2: SourceSpec, ejm_theta: float, earlier: Sequence[float]):
    """BE - 3 - 5Z as a function of the last Charu precision, from two simulated tables.

    Outcome probabilities are affine in the last precision, so tables at
    G = 1/2 and G = 1 determine the table at any G.
    """
    def table(G):
        cfg = protocol.ScenarioConfig(
            s1, s2, [RoundSpec(1.0)], [RoundSpec(g) for g in earlier] + [RoundSpec(G)],
            JointKind.EJM, ejm_theta,
        )
        return protocol.averaged_table(cfg)

    t_half, t_one = table(0.5), table(1.0)
    slope = 2.0 * (t_one.probs - t_half.probs)

    def margin(G):
        probs = t_half.probs + (G - 0.5) * slope
        BE, Z, _ = protocol.tgb_terms(protocol.ProbabilityTable(probs, t_one.basis))
        return BE - 3.0 - 5.0 * Z

    return margin


def round_margin(
    scenario: Scenario, s1: SourceSpec, s2: SourceSpec, earlier: Sequence[float], ejm_theta: float = 0.0
) -> Callable[[float], float]:
    """Bilocal value minus its bound for the next round, as a function of that round's precision."""
    scenario = Scenario(scenario)
    earlier = list(earlier)
    res = dict(v1=s1.visibility, v2=s2.visibility, alpha=s1.eta, beta=s2.eta)
    if scenario is Scenario.UNI_BRGP:
        return lambda G: analytic.brgp_noisy_nme([1.0], earlier + [G], **res) - 1.0
    if scenario is Scenario.BI_EQUAL_BRGP:
        return lambda G: analytic.brgp_noisy_nme(earlier + [G], earlier + [G], **res) - 1.0
    if _closed_form_ejm(s1, s2):
        Fs = [analytic.quality(g) for g in earlier]
        return lambda G: analytic.tgb_closed_form(s1.visibility, s2.visibility, ejm_theta, G, Fs) - 3.0
    return _ejm_margin_bruteforce(s1, s2, ejm_theta, earlier)


def _schedule(scenario, s1, s2, ejm_theta, limit):
    schedule: list[float] = []
    while len(schedule) < limit:
        root = _bisect_root(round_margin(scenario, s1, s2, schedule, ejm_theta))
        if root is None:
            break
        schedule.append(root)
        if root > 1.0:
            break
    return schedule


def critical_schedule(
    scenario: Scenario | str,
    source1: SourceSpec,
    source2: SourceSpec | None = None,
    ejm_theta: float = 0.0,
    limit: int = MAX_DEPTH,
) -> SharingResult:
    """Per-round critical precisions, each solved with all earlier rounds at their critical values.

    The list ends with the first root above 1 when one exists.
    """
    source2 = source1 if source2 is None else source2
    schedule = _schedule(Scenario(scenario), source1, source2, ejm_theta, limit)
    if not schedule or schedule[0] > 1.0:
        raise NoViolation("the first round cannot violate the bilocal bound")
    return SharingResult(schedule, sum(1 for g in schedule if g <= 1.0))


def max_rounds(
    source1: SourceSpec,
    source2: SourceSpec | None = None,
    scenario: Scenario | str = Scenario.UNI_BRGP,
    ejm_theta: float = 0.0,
    limit: int = MAX_DEPTH,
) -> int:
    source2 = source1 if source2 is None else source2
    schedule = _schedule(Scenario(scenario), source1, source2, ejm_theta, limit)
    return sum(1 for g in schedule if g <= 1.0)


def family_source(family: Family | str, param: float, scenario: Scenario | str) -> SourceSpec:
    """Source for a one-parameter family; EJM scenarios use the singlet-based states."""
    base = Base.PSI_MINUS if Scenario(scenario) is Scenario.UNI_EJM else Base.PHI_PLUS
    if Family(family) is Family.NME:
        return SourceSpec.nme(param, base)
    return SourceSpec.werner(param, base)


def family_range(family: Family | str) -> tuple[float, float]:
    """Parameter interval over which entanglement grows monotonically."""
    return (0.0, 0.5) if Family(family) is Family.NME else (0.0, 1.0)


@dataclass(frozen=True)
class Threshold:
    parameter: float
    entanglement: float


def threshold_point(
    target_rounds: int,
    family: Family | str,
    scenario: Scenario | str = Scenario.UNI_BRGP,
    ejm_theta: float = 0.0,
    tol: float = 1e-9,
) -> Threshold:
    """Least-entangled family member whose critical schedule reaches ``target_rounds``."""
    if target_rounds < 1:
        raise ParamError("target_rounds must be at least 1")

    def enough(p):
        s = family_source(family, p, scenario)
        return max_rounds(s, s, scenario, ejm_theta, limit=target_rounds) >= target_rounds

    lo, hi = family_range(family)
    if not enough(hi):
        raise Unreachable(f"{target_rounds} rounds unreachable for the {Family(family).value} family")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if enough(mid):
            hi = mid
        else:
            lo = mid
    return Threshold(hi, states.entanglement(family_source(family, hi, scenario)))


def entanglement_threshold(
    target_rounds: int,
    family: Family | str,
    scenario: Scenario | str = Scenario.UNI_BRGP,
    ejm_theta: float = 0.0,
    tol: float = 1e-9,
) -> float:
    return threshold_point(target_rounds, family, scenario, ejm_theta, tol).entanglement


# --- bidirectional sharing -------------------------------------------------


def _equalized_chain(t: float, length: int) -> list[float]:
    """Precisions keeping 2^-(i-1) prod(1+F) G_i equal to ``t`` along the chain."""
    out = [t]
    while len(out) < length:
        g = out[-1]
        if g > 1.0:
            out.append(np.inf)
            continue
        out.append(2.0 * g / (1.0 + np.sqrt(1.0 - g * g)))
    return out


def chain_capacity(length: int) -> float:
    """Largest t such that an equalized chain of ``length`` rounds stays within G <= 1."""
    if length == 1:
        return 1.0
    f = lambda t: _equalized_chain(t, length)[-1] - 1.0
    return float(optimize.bisect(f, 1e-9, 1.0, xtol=ROOT_XTOL, maxiter=500))


def chain_capacity_grid(length: int, step: float = 1e-3) -> float:
    """Grid estimate of max over chains of min_i 2^-(i-1) prod(1+F) G_i, last precision fixed to 1."""
    if length == 1:
        return 1.0
    if length > 3:
        raise ParamError("grid verification is limited to chains of three rounds")
    axis = np.arange(step, 1.0 + step / 2, step)
    grids = np.meshgrid(*([axis] * (length - 1)), indexing="ij")
    Gs = list(grids) + [np.ones_like(grids[0])]
    level = np.full_like(grids[0], np.inf)
    prefix = np.ones_like(grids[0])
    for i, G in enumerate(Gs):
        level = np.minimum(level, 2.0 ** -i * prefix * G)
        prefix = prefix * (1.0 + np.sqrt(np.clip(1.0 - G * G, 0.0, None)))
    return float(level.max())


def _pair_strength(source1: SourceSpec, source2: SourceSpec) -> float:
    R = analytic.resource_factor(source1.visibility, source2.visibility, source1.eta, source2.eta)
    return R * R / 2.0


def pair_feasible(m: int, n: int, source1: SourceSpec, source2: SourceSpec | None = None, equal: bool = False) -> bool:
    """Whether m Alices and n Charus can all pairwise violate BRGP with some precision assignment."""
    source2 = source1 if source2 is None else source2
    if equal and m != n:
        return False
    cap = _pair_strength(source1, source2) * chain_capacity(m) * chain_capacity(n)
    return cap > (1.0 + protocol.VIOLATION_MARGIN) ** 2


def anchored_schedules(m: int, n: int, source1: SourceSpec, source2: SourceSpec | None = None):
    """Explicit (alice_G, charu_G) for a pair: last Alice sharp, Alices equalized, Charus at their critical values."""
    source2 = source1 if source2 is None else source2
    t = chain_capacity(m)
    alice = _equalized_chain(t, m)
    alice[-1] = 1.0 if m > 1 else alice[-1]
    charu = _equalized_chain(1.0 / (_pair_strength(source1, source2) * t), n)
    return alice, charu


def bidirectional_frontier(
    source1: SourceSpec,
    source2: SourceSpec | None = None,
    allow_unequal_precision: bool = True,
    limit: int = FRONTIER_LIMIT,
) -> list[tuple[int, int]]:
    """Pareto-maximal (m, n) pairs with every (A^i, C^j) pair violating BRGP at pi/4 angles."""
    source2 = source1 if source2 is None else source2
    feasible = [
        (m, n)
        for m, n in itertools.product(range(1, limit + 1), repeat=2)
        if pair_feasible(m, n, source1, source2, equal=not allow_unequal_precision)
    ]
    return [
        p for p in feasible
        if not any(q != p and q[0] >= p[0] and q[1] >= p[1] for q in feasible)
    ]


# --- measurement-angle optimality --------------------------------------------


@dataclass
class AngleCertificate:
    phi: float
    thetas: list[float]
    B: float
    free: tuple[str, str]
    max_deviation: float  # largest |angle - pi/4| among the optimized angles


DEFAULT_CHARU_G = (0.5, 0.5358983848622454, 0.5811456629674868)


def optimal_angle_search(
    source1: SourceSpec,
    round_count: int,
    source2: SourceSpec | None = None,
    charu_G: Sequence[float] | None = None,
    step: float = 0.01,
) -> list[AngleCertificate]:
    """Round-by-round angle optimization for one sharp Alice against a Charu chain.

    Round 1 frees (theta_1, phi). Round k > 1 keeps phi and theta_1..theta_(k-2)
    from earlier rounds and frees (theta_(k-1), theta_k). Each round is a grid
    search over [0, pi/2]^2 refined by Nelder-Mead.
    """
    if not 1 <= round_count <= 3:
        raise ParamError("angle search supports 1 to 3 rounds")
    source2 = source1 if source2 is None else source2
    charu_G = list(charu_G or DEFAULT_CHARU_G)[:round_count]
    res = dict(v1=source1.visibility, v2=source2.visibility, alpha=source1.eta, beta=source2.eta)
    axis = np.arange(0.0, np.pi / 2 + step / 2, step)
    phi, thetas = np.pi / 4, []
    certs = []
    for k in range(1, round_count + 1):
        fixed = list(thetas[: max(0, k - 2)])

        if k == 1:
            def B(u, w):
                return analytic.brgp_uni_general(charu_G[:1], [u], w, **res)[2]
            names = ("theta_1", "phi")
        else:
            def B(u, w, fixed=fixed, k=k):
                return analytic.brgp_uni_general(charu_G[:k], fixed + [u, w], phi, **res)[2]
            names = (f"theta_{k - 1}", f"theta_{k}")

        values = np.array([[B(u, w) for w in axis] for u in axis])
        i, j = np.unravel_index(np.argmax(values), values.shape)
        refined = optimize.minimize(
            lambda p: -B(*np.clip(p, 0.0, np.pi / 2)), [axis[i], axis[j]],
            method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000},
        )
        u, w = np.clip(refined.x, 0.0, np.pi / 2)
        if k == 1:
            thetas, phi = [float(u)], float(w)
        else:
            thetas = fixed + [float(u), float(w)]
        certs.append(AngleCertificate(
            phi, list(thetas), float(B(u, w)), names,
            float(max(abs(u - np.pi / 4), abs(w - np.pi / 4))),
        ))
    return certs


def max_rounds_curve(family: Family | str, scenario: Scenario | str, params: Sequence[float], ejm_theta: float = 0.0):
    """Rows of (parameter, entanglement, max_rounds) for figure data."""
    rows = []
    for p in params:
        s = family_source(family, p, scenario)
        rows.append((float(p), states.entanglement(s), max_rounds(s, s, scenario, ejm_theta)))
    return rows
