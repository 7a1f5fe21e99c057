"""Command-line runner for scenario files.

    qubitprobe single  --config fig1b.yaml --out-dir out/
    qubitprobe repeat  --config fig2a.yaml
    qubitprobe sweep   --config fig1_sweep.yaml --jobs 3
    qubitprobe env     --config fig6a.yaml --dt 1e-3
    qubitprobe iontrap --config iontrap_ca40.yaml

Exit status: 0 ok, 2 bad config, 3 integration failure, 4 infeasible ion-trap parameters.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .evolve import DEFAULT_SAMPLES, IntegrationError, TrajectoryRecord
from .iontrap import InfeasibleError, check_feasibility, describe, to_measurement_config
from .linalg import ValidationError
from .protocol import run_repeated, run_single
from .scenario import SCENARIOS, ConfigError, ScenarioFile, load_scenario

log = logging.getLogger("qubitprobe")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_INFEASIBLE = 4


def write_trajectory(path: Path, traj: TrajectoryRecord) -> None:
    cols = traj.columns()
    names = list(cols)
    data = np.column_stack([cols[n] for n in names])
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data:
            w.writerow([f"{x:.17g}" for x in row])


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolved(sf: ScenarioFile, samples: int, dt: float | None) -> dict:
    cfg = sf.measurement()
    probe = sf.probe_self()
    env = sf.environment()
    out = {"measurement": cfg.to_dict(), "samples": samples}
    if probe is not None:
        out["probe_self"] = dict(probe.to_dict(), counter_rotate=sf.counter_rotate())
    if env is not None:
        out["environment"] = env.to_dict()
        out["dt"] = dt if dt is not None else cfg.T / 20000
    n = sf.chain_length()
    if n is not None:
        out["chain_length"] = n
    return out


def _run(sf: ScenarioFile, samples: int, dt: float | None, chain: bool):
    cfg = sf.measurement()
    probe = sf.probe_self()
    env = sf.environment()
    kw = dict(samples=samples, dt=dt, counter_rotate=sf.counter_rotate())
    if chain:
        n = sf.chain_length()
        if n is None:
            raise sf.error("is required for a repeat scenario", "chain_length")
        return run_repeated(cfg, n, probe, env, **kw)
    return run_single(cfg, probe, env, **kw)


def _sweep_point(args):
    sf, samples, dt = args
    chain = sf.chain_length() is not None
    rep = _run(sf, samples, dt, chain)
    return _resolved(sf, samples, dt), rep.to_dict(), rep.trajectory


def run_scenario(sf: ScenarioFile, out_dir: Path, dt: float | None = None,
                 samples: int | None = None, jobs: int = 1) -> int:
    """Execute a parsed scenario and write its CSV/JSON outputs. Returns the exit status."""
    stem = Path(sf.source).stem if sf.source and sf.source != "<config>" else sf.scenario
    samples = samples or sf.sample_count() or DEFAULT_SAMPLES
    dt = dt if dt is not None else sf.dt()
    traj_name = sf.output_path("trajectory_path", f"{stem}_trajectory.csv")
    report_name = sf.output_path("report_path", f"{stem}_report.json")
    report_path = out_dir / report_name

    if sf.scenario == "iontrap":
        params = sf.iontrap()
        info = describe(params)
        print(json.dumps(info, indent=2, sort_keys=True))
        report = {"scenario": "iontrap", "iontrap": info}
        try:
            check_feasibility(params)
        except InfeasibleError as exc:
            write_json(report_path, report)
            print(f"infeasible ion-trap parameters: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        if sf.simulate_iontrap():
            cfg, probe = to_measurement_config(params)
            rep = run_single(cfg, probe, samples=samples)
            write_trajectory(out_dir / traj_name, rep.trajectory)
            report["report"] = rep.to_dict()
            report["trajectory_path"] = traj_name
        write_json(report_path, report)
        return EXIT_OK

    if sf.scenario == "sweep":
        param, values = sf.sweep()
        points = [sf.with_value(param, v) for v in values]
        for p in points:  # validate everything before running anything
            _resolved(p, samples, dt)
        tasks = [(p, samples, dt) for p in points]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_point, tasks))
        else:
            results = [_sweep_point(t) for t in tasks]
        base, ext = (traj_name.rsplit(".", 1) + ["csv"])[:2]
        rows = []
        for i, (value, (resolved, rep, traj)) in enumerate(zip(values, results)):
            name = f"{base}_{i:03d}.{ext}"
            write_trajectory(out_dir / name, traj)
            rows.append({"index": i, "value": value, "config": resolved, "report": rep,
                         "trajectory_path": name})
            print(f"[{i}] {param}={value}: " + _summary(rep))
        write_json(report_path, {"scenario": "sweep", "parameter": param, "rows": rows})
        return EXIT_OK

    if sf.scenario == "env" and sf.environment() is None:
        raise sf.error("section is required for an env scenario", "environment")
    chain = sf.scenario == "repeat"
    resolved = _resolved(sf, samples, dt)
    rep = _run(sf, samples, dt, chain)
    write_trajectory(out_dir / traj_name, rep.trajectory)
    write_json(report_path, {
        "scenario": sf.scenario,
        "config": resolved,
        "report": rep.to_dict(),
        "trajectory_path": traj_name,
    })
    print(_summary(rep.to_dict()))
    return EXIT_OK


def _summary(rep: dict) -> str:
    if "cumulative_disturbance" in rep:
        return (f"cycles={rep['cycles']} disturbance={rep['cumulative_disturbance']:.4f} "
                f"worst={rep['worst_case_deviation']:.4f} average={rep['average_deviation']:.4f} "
                f"purity_S={rep['final_system_purity']:.4f}")
    s = (f"disturbance={rep['disturbance']:.4f} pointer={rep['final_pointer']:.6f} "
         f"ideal={rep['ideal_pointer']:.6f} deviation={rep['pointer_deviation']:.4f} "
         f"purity_S={rep['final_system_purity']:.4f} purity_P={rep['final_probe_purity']:.4f}")
    if "corrected_deviation" in rep:
        s += f" corrected_deviation={rep['corrected_deviation']:.4f}"
    return s


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qubitprobe", description="Protective measurement of a qubit by a qubit probe.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run a {name} scenario file")
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out-dir", default=".", help="directory for CSV/JSON outputs")
        p.add_argument("--dt", type=float, default=None, help="max RK4 step (environment runs)")
        p.add_argument("--samples", type=int, default=None, help="output samples per cycle")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.samples is not None and args.samples < 2:
            raise ConfigError("must be >= 2", "--samples")
        if args.dt is not None and args.dt <= 0:
            raise ConfigError("must be positive", "--dt")
        sf = load_scenario(args.config, args.command)
        return run_scenario(sf, Path(args.out_dir), dt=args.dt, samples=args.samples, jobs=args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except InfeasibleError as exc:
        print(f"infeasible ion-trap parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    raise SystemExit(main())
