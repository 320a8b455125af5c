"""Command-line driver: simulate, critical, max-rounds, threshold, frontier, sweep, figures, verify."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import oracle, protocol, solver, states
from .errors import BinetError, ParseError, ValidationError
from .measurements import JointKind, RoundSpec
from .states import Base, SourceSpec

COMMANDS = ("simulate", "critical", "max-rounds", "threshold", "frontier", "sweep", "figures", "verify")
SIMULATE_TOL = 1e-6


@dataclass
class Grid:
    param: str
    start: float
    stop: float
    steps: int

    def points(self) -> list[float]:
        return [float(p) for p in np.linspace(self.start, self.stop, self.steps)]


@dataclass
class RunConfig:
    command: str
    eta: float = 0.5
    v: float = 1.0
    eta2: float | None = None
    v2: float | None = None
    base: str | None = None
    joint: str = "bsm"
    ejm_theta: float = 0.0
    alice_G: list[float] = field(default_factory=lambda: [1.0])
    charu_G: list[float] = field(default_factory=lambda: [1.0])
    alice_angle: list[float] | None = None
    charu_angle: list[float] | None = None
    scenario: str = "uni-brgp"
    rounds: int = 1
    family: str = "werner"
    equal_precision: bool = False
    grid: Grid | None = None
    quantity: str = "max-rounds"
    steps: int = 201
    suite: str = "oracle"
    samples: int = 100
    seed: int = 7
    tol: float = 1e-9
    jobs: int = 1
    out: str | None = None
    table_csv: str | None = None

    @property
    def source1(self) -> SourceSpec:
        return SourceSpec(self.eta, self.v, self._base())

    @property
    def source2(self) -> SourceSpec:
        eta = self.eta if self.eta2 is None else self.eta2
        v = self.v if self.v2 is None else self.v2
        return SourceSpec(eta, v, self._base())

    def _base(self) -> Base:
        if self.base is not None:
            return Base(self.base)
        ejm = self.joint == "ejm" or self.scenario == "uni-ejm"
        return Base.PSI_MINUS if ejm else Base.PHI_PLUS

    def scenario_config(self) -> protocol.ScenarioConfig:
        alice_angle = self.alice_angle or [np.pi / 4] * len(self.alice_G)
        charu_angle = self.charu_angle or [np.pi / 4] * len(self.charu_G)
        return protocol.ScenarioConfig(
            self.source1, self.source2,
            [RoundSpec(g, a) for g, a in zip(self.alice_G, alice_angle)],
            [RoundSpec(g, a) for g, a in zip(self.charu_G, charu_angle)],
            JointKind(self.joint), self.ejm_theta,
        )


def _default_jobs() -> int:
    env = os.environ.get("BINET_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError("BINET_JOBS", f"not an integer: {env!r}")
    return os.cpu_count() or 1


def _floats(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="binet", description="Sequential sharing of bilocal nonlocality.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with one top-level object; flags override it")
    add = p.add_argument
    add("--eta", type=_floats)
    add("--v", type=_floats)
    add("--eta2", type=_floats)
    add("--v2", type=_floats)
    add("--base", choices=[b.value for b in Base])
    add("--joint", choices=["bsm", "ejm"])
    add("--ejm-theta", type=_floats)
    add("--alice-G", nargs="+", type=_floats)
    add("--charu-G", nargs="+", type=_floats)
    add("--alice-angle", nargs="+", type=_floats)
    add("--charu-angle", nargs="+", type=_floats)
    add("--scenario", choices=[s.value for s in solver.Scenario])
    add("--rounds", type=int)
    add("--family", choices=[f.value for f in solver.Family])
    add("--equal-precision", action="store_true", default=None)
    add("--param", choices=["eta", "v"], help="sweep parameter")
    add("--start", type=_floats)
    add("--stop", type=_floats)
    add("--steps", type=int)
    add("--quantity", choices=["max-rounds", "B"])
    add("--suite", choices=["oracle"])
    add("--samples", type=int)
    add("--seed", type=int)
    add("--tol", type=_floats)
    add("--jobs", type=int)
    add("--out")
    add("--table-csv")
    return p


def _load_file(path: str) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    known = {f.name for f in fields(RunConfig)} | {"sweep"}
    for key in data:
        if key.replace("-", "_") not in known:
            raise ParseError(f"{path}: unknown field {key!r}")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _validate(cfg: RunConfig) -> RunConfig:
    def unit(name, value):
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValidationError(name, f"{value} outside [0, 1]")

    for name in ("eta", "v", "eta2", "v2"):
        unit(name, getattr(cfg, name))
    for name in ("alice_G", "charu_G"):
        values = getattr(cfg, name)
        if not values:
            raise ValidationError(name, "needs at least one round")
        for g in values:
            if not 0.0 < g <= 1.0:
                raise ValidationError(name, f"precision {g} outside (0, 1]")
    for name, ref in (("alice_angle", "alice_G"), ("charu_angle", "charu_G")):
        angles = getattr(cfg, name)
        if angles is not None and len(angles) != len(getattr(cfg, ref)):
            raise ValidationError(name, f"needs one angle per entry of {ref}")
    if not 0.0 <= cfg.ejm_theta <= np.pi / 2:
        raise ValidationError("ejm_theta", f"{cfg.ejm_theta} outside [0, pi/2]")
    if cfg.rounds < 1:
        raise ValidationError("rounds", "must be at least 1")
    if cfg.samples < 1:
        raise ValidationError("samples", "must be at least 1")
    if cfg.steps < 1:
        raise ValidationError("steps", "must be at least 1")
    if cfg.jobs < 1:
        raise ValidationError("jobs", "must be at least 1")
    if cfg.grid is not None:
        if cfg.grid.steps < 1:
            raise ValidationError("grid.steps", "must be at least 1")
        lo, hi = solver.family_range(solver.Family.NME if cfg.grid.param == "eta" else solver.Family.WERNER)
        for name in ("start", "stop"):
            value = getattr(cfg.grid, name)
            if not lo <= value <= hi:
                raise ValidationError(f"grid.{name}", f"{value} outside [{lo}, {hi}]")
    if cfg.out is not None:
        out = Path(cfg.out)
        parent = out if out.exists() else out.parent
        if not os.access(parent if str(parent) else ".", os.W_OK):
            raise ValidationError("out", f"{cfg.out} is not writable")
    return cfg


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    values: dict[str, Any] = _load_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    sweep = dict(values.pop("sweep", {}) or {})
    for key in ("param", "start", "stop"):
        if key in flags:
            sweep[key] = flags.pop(key)
    values.update(flags)
    values.pop("command", None)
    if args.command == "sweep":
        if "steps" in values:
            sweep.setdefault("steps", values["steps"])
        sweep.setdefault("param", "v" if values.get("family", "werner") == "werner" else "eta")
        missing = [k for k in ("start", "stop", "steps") if k not in sweep]
        if missing:
            raise ParseError(f"sweep needs {', '.join(missing)}")
        try:
            values["grid"] = Grid(str(sweep["param"]), float(sweep["start"]), float(sweep["stop"]), int(sweep["steps"]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"sweep: {exc}") from exc
    values.setdefault("jobs", _default_jobs())
    for key in ("alice_G", "charu_G", "alice_angle", "charu_angle"):
        if key in values and values[key] is not None and not isinstance(values[key], list):
            values[key] = [values[key]]
    try:
        cfg = RunConfig(command=args.command, **values)
    except TypeError as exc:
        raise ParseError(str(exc)) from exc
    return _validate(cfg)


# --- commands -------------------------------------------------------------


def _mapper(jobs: int):
    if jobs <= 1:
        return map, None
    pool = ProcessPoolExecutor(max_workers=jobs)
    return pool.map, pool


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def _write_json(out, payload) -> None:
    _write(out, "results.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: RunConfig) -> int:
    config = cfg.scenario_config()
    table = protocol.averaged_table(config)
    rep = protocol.report(table)
    closed = oracle.closed_form_value(config)
    name = "B" if rep.kind == "bsm" else "BE"
    print(f"brute-force {name} = {rep.value:.12f}")
    if rep.kind == "bsm":
        print(f"I = {rep.I:.12f}  J = {rep.J:.12f}")
    else:
        print(f"Z = {rep.Z:.3e}  bound = {rep.bound:.12f}")
    status = 0
    if closed is None:
        print(f"closed-form {name} = n/a (no closed form for this configuration)")
        diff = None
    else:
        diff = abs(closed - rep.value)
        print(f"closed-form {name} = {closed:.12f}")
        print(f"|difference| = {diff:.3e}")
        if diff > SIMULATE_TOL:
            print("error: brute force and closed form disagree", file=sys.stderr)
            status = 1
    print(f"violated: {rep.violated}")
    if cfg.table_csv:
        Path(cfg.table_csv).write_text(table.to_csv())
    _write_json(cfg.out, {"command": "simulate", "report": rep.to_dict(), "closed_form": closed, "difference": diff})
    return status


def cmd_critical(cfg: RunConfig) -> int:
    res = solver.critical_schedule(cfg.scenario, cfg.source1, cfg.source2, cfg.ejm_theta)
    print(" ".join(f"{g:.3f}" for g in res.schedule[: res.max_rounds]))
    if len(res.schedule) > res.max_rounds:
        print(f"next root: {res.schedule[res.max_rounds]:.3f}")
    print(f"max rounds: {res.max_rounds}")
    _write_json(cfg.out, {"command": "critical", "scenario": cfg.scenario, **res.to_dict()})
    return 0


def cmd_max_rounds(cfg: RunConfig) -> int:
    n = solver.max_rounds(cfg.source1, cfg.source2, cfg.scenario, cfg.ejm_theta)
    print(f"max rounds: {n}")
    _write_json(cfg.out, {"command": "max-rounds", "scenario": cfg.scenario, "max_rounds": n})
    return 0


def cmd_threshold(cfg: RunConfig) -> int:
    th = solver.threshold_point(cfg.rounds, cfg.family, cfg.scenario, cfg.ejm_theta, cfg.tol)
    measure = "EoF" if cfg.family == "werner" else "E_in"
    param = "v" if cfg.family == "werner" else "eta"
    print(f"{measure} = {th.entanglement:.3f}  ({param} = {th.parameter:.9f})")
    _write_json(cfg.out, {"command": "threshold", "rounds": cfg.rounds, "family": cfg.family,
                          "scenario": cfg.scenario, "parameter": th.parameter, "entanglement": th.entanglement})
    return 0


def cmd_frontier(cfg: RunConfig) -> int:
    front = solver.bidirectional_frontier(cfg.source1, cfg.source2, not cfg.equal_precision)
    print("frontier: " + (" ".join(f"({m},{n})" for m, n in front) or "empty"))
    _write_json(cfg.out, {"command": "frontier", "equal_precision": cfg.equal_precision,
                          "frontier": [list(p) for p in front]})
    return 0


def _max_rounds_cell(args):
    family, scenario, ejm_theta, p = args
    return solver.max_rounds_curve(family, scenario, [p], ejm_theta)[0]


def _value_cell(args):
    cfg, p = args
    config = cfg.scenario_config()
    patch = {"eta": p} if cfg.grid.param == "eta" else {"visibility": p}
    s1 = SourceSpec(**{**asdict(config.source1), **patch})
    s2 = SourceSpec(**{**asdict(config.source2), **patch})
    config = protocol.ScenarioConfig(s1, s2, config.alice_rounds, config.charu_rounds, config.joint, config.ejm_theta)
    return p, states.entanglement(s1), protocol.simulate(config).value


def cmd_sweep(cfg: RunConfig) -> int:
    grid = cfg.grid
    points = grid.points()
    mapper, pool = _mapper(cfg.jobs)
    try:
        if cfg.quantity == "max-rounds":
            family = "nme" if grid.param == "eta" else "werner"
            rows = list(mapper(_max_rounds_cell, [(family, cfg.scenario, cfg.ejm_theta, p) for p in points]))
            header = [grid.param, "entanglement", "max_rounds"]
        else:
            rows = list(mapper(_value_cell, [(cfg, p) for p in points]))
            header = [grid.param, "entanglement", "value"]
    finally:
        if pool is not None:
            pool.shutdown()
    text = _csv_text(header, rows)
    _write(cfg.out, "sweep.csv", text)
    if cfg.out is None:
        sys.stdout.write(text)
    print(f"{len(rows)} points", file=sys.stderr)
    return 0


def figure_tables(steps: int, jobs: int = 1) -> dict[str, str]:
    """CSV text for the critical-schedule table and the two round-count step plots."""
    me = SourceSpec()
    singlet = SourceSpec(0.5, 1.0, Base.PSI_MINUS)
    sched = {
        "uni_brgp": solver.critical_schedule("uni-brgp", me).schedule,
        "bi_equal_brgp": solver.critical_schedule("bi-equal-brgp", me).schedule,
        "uni_ejm": solver.critical_schedule("uni-ejm", singlet).schedule,
    }
    depth = max(len(s) for s in sched.values())
    fig1 = [[k + 1] + [s[k] if k < len(s) else "" for s in sched.values()] for k in range(depth)]
    out = {"figure1.csv": _csv_text(["round", *sched], fig1)}

    mapper, pool = _mapper(jobs)
    try:
        for name, family, lo, hi in (("figure2.csv", "nme", 0.0, 0.5), ("figure3.csv", "werner", 0.0, 1.0)):
            params = [float(p) for p in np.linspace(lo, hi, steps)]
            bsm = list(mapper(_max_rounds_cell, [(family, "uni-brgp", 0.0, p) for p in params]))
            ejm = list(mapper(_max_rounds_cell, [(family, "uni-ejm", 0.0, p) for p in params]))
            rows = [(p, b[1], b[2], e[2]) for p, b, e in zip(params, bsm, ejm)]
            pname = "eta" if family == "nme" else "v"
            out[name] = _csv_text([pname, "entanglement", "max_rounds_bsm", "max_rounds_ejm"], rows)
    finally:
        if pool is not None:
            pool.shutdown()
    return out


def cmd_figures(cfg: RunConfig) -> int:
    tables = figure_tables(cfg.steps, cfg.jobs)
    for name, text in tables.items():
        if cfg.out is None:
            sys.stdout.write(f"# {name}\n{text}")
        _write(cfg.out, name, text)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    mapper, pool = _mapper(cfg.jobs)
    try:
        results = oracle.run_suite(cfg.samples, cfg.seed, mapper)
    finally:
        if pool is not None:
            pool.shutdown()
    summary = oracle.summarize(results)
    for r in results:
        if not r.passed:
            print(f"FAIL case {r.index}: {r.kind} m={r.m} n={r.n} diff={r.difference:.3e}")
    print(f"{cfg.suite}: {summary['passed']} passed, {summary['failed']} failed "
          f"(max |diff| {summary['max_difference']:.3e}, seed {cfg.seed})")
    _write_json(cfg.out, {"command": "verify", "suite": cfg.suite, "seed": cfg.seed, **summary})
    return 0 if summary["failed"] == 0 else 1


HANDLERS = {
    "simulate": cmd_simulate,
    "critical": cmd_critical,
    "max-rounds": cmd_max_rounds,
    "threshold": cmd_threshold,
    "frontier": cmd_frontier,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "verify": cmd_verify,
}


def execute(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except BinetError as exc:
        print(f"{cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except (ParseError, ValidationError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
