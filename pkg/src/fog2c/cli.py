"""Command line entry point: ``fog2c run|validate|catalog``.

Exit codes: 0 success, 1 invalid config (validate), 2 usage or config error,
3 output or runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
import time
from dataclasses import replace

from . import __version__, catalog, kernels
from .allocator import SCENARIOS, run_scenario, savings
from .aoi import capacity, optimal_rate_for_aoi, sweep_rate
from .config import ScenarioConfig, load_config
from .errors import FogError, InfeasibleError
from .plotting import line_chart
from .seeding import stream
from .workload import sample_requests

COMMANDS = {"scenario-a": "a", "scenario-b": "b", "scenario-c": "c"}


class CliError(Exception):
    def __init__(self, msg: str, code: int = 2):
        super().__init__(msg)
        self.code = code


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


class _Writer:
    """Collects artifacts under one output directory."""

    def __init__(self, out_dir: str):
        self.dir = out_dir
        self.files: list[str] = []
        try:
            os.makedirs(out_dir, exist_ok=True)
            probe = os.path.join(out_dir, ".fog2c-write-test")
            with open(probe, "w"):
                pass
            os.remove(probe)
        except OSError as e:
            raise CliError(f"output directory {out_dir!r} is not writable: {e}", 3) from None

    def csv(self, name: str, header: list[str], rows) -> None:
        path = os.path.join(self.dir, name)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_num(v) for v in r])
        self.files.append(name)

    def svg(self, name: str, text: str) -> None:
        # plots are best effort: a failure here never changes the exit code
        try:
            with open(os.path.join(self.dir, name), "w", encoding="utf-8") as fh:
                fh.write(text)
            self.files.append(name)
        except OSError as e:
            print(f"warning: could not write {name}: {e}", file=sys.stderr)


def _try_plot(writer: _Writer, name: str, build) -> None:
    try:
        writer.svg(name, build())
    except Exception as e:  # noqa: BLE001
        print(f"warning: plot {name} skipped: {e}", file=sys.stderr)


def _requests(cfg: ScenarioConfig, seed: int, dist=None):
    return sample_requests(dist or cfg.workload, cfg.n_requests, stream(seed, "workload"))


def run_a(cfg: ScenarioConfig, seed: int, w: _Writer, workers: int, plot: bool) -> dict:
    topo = cfg.topology
    # each request is sent to, and (for the nearest baselines) served at, its closest AP
    reqs = [replace(r, assigned_ap=topo.closest_ap(r.source)) for r in _requests(cfg, seed)]
    stats = run_scenario(reqs, topo, cfg.strategies, SCENARIOS["a"].scope, seed, workers=workers)
    w.csv("scenario_a_requests.csv", ["strategy", "request_id", "feasible", "energy_J", "latency_s"],
          ((name, a.request_id, a.feasible, a.energy, a.latency)
           for name, st in stats.items() for a in st.allocations))
    summary = [(name, st.success_rate, st.median) for name, st in stats.items()]
    w.csv("scenario_a_summary.csv", ["strategy", "success_rate", "median_J"], summary)
    if plot:
        _try_plot(w, "scenario_a_cdf.svg", lambda: line_chart(
            {n: st.cdf for n, st in stats.items()}, "Energy CDF per request",
            "energy [J]", "fraction of requests", step=True))
    return {"n_requests": len(reqs),
            "strategies": {n: {"success_rate": s, "median_J": m} for n, s, m in summary},
            "savings_pct_vs_full_opt": savings(stats) if "full_opt" in stats else {}}


def run_b(cfg: ScenarioConfig, seed: int, w: _Writer, workers: int, plot: bool) -> dict:
    rows = []
    table: dict[str, list] = {str(s): [] for s in cfg.strategies}
    sav = []
    for size in cfg.size_grid:
        # same seed at every grid point: only the size changes between points
        reqs = _requests(cfg, seed, cfg.workload.with_size(size))
        stats = run_scenario(reqs, cfg.topology, cfg.strategies, SCENARIOS["b"].scope, seed,
                             workers=workers)
        for name, st in stats.items():
            rows.append((float(size), name, st.median, st.success_rate))
            table[name].append((float(size), st.median))
        if "full_opt" in stats:
            sav.append({"size_bits": float(size), "savings_pct": savings(stats)})
    w.csv("scenario_b_median.csv", ["size_bits", "strategy", "median_J", "success_rate"], rows)
    if plot:
        _try_plot(w, "scenario_b_median.svg", lambda: line_chart(
            {n: [(x, y) for x, y in pts if y is not None] for n, pts in table.items()},
            "Median energy vs request size", "request size [b]", "median energy [J]"))
    return {"size_grid_bits": [float(s) for s in cfg.size_grid],
            "rows": [{"size_bits": s, "strategy": n, "median_J": m, "success_rate": r}
                     for s, n, m, r in rows],
            "savings_pct_vs_full_opt": sav}


def run_c(cfg: ScenarioConfig, seed: int, w: _Writer, workers: int, plot: bool) -> dict:
    sc = cfg.aoi
    sweep = sweep_rate(sc, cfg.rate_grid, workers=workers)
    rows = [(lam, r.mean_aoi, r.mean_power, r.tx_utilization, r.cpu_utilization, r.diverged)
            for lam, r in sweep]
    w.csv("scenario_c_sweep.csv",
          ["rate_per_s", "mean_aoi_s", "mean_power_W", "tx_util", "cpu_util", "diverged"], rows)
    if plot:
        _try_plot(w, "scenario_c_aoi.svg", lambda: line_chart(
            {"mean AoI [s]": [(r[0], r[1]) for r in rows if not r[5]]},
            "Mean AoI vs generation rate", "rate [1/s]", "mean AoI [s]"))
        _try_plot(w, "scenario_c_power.svg", lambda: line_chart(
            {"mean power [W]": [(r[0], r[2]) for r in rows]},
            "Mean power vs generation rate", "rate [1/s]", "mean power [W]"))
    best = None
    if cfg.aoi_max is not None:
        try:
            best = optimal_rate_for_aoi(sc, cfg.aoi_max, cfg.rate_grid, sweep=sweep)
        except InfeasibleError as e:
            print(f"note: {e}", file=sys.stderr)
    return {"capacity_per_s": capacity(sc), "aoi_max_s": cfg.aoi_max,
            "best_rate_per_s": best,
            "rows": [dict(zip(("rate_per_s", "mean_aoi_s", "mean_power_W", "tx_util",
                               "cpu_util", "diverged"), r)) for r in rows]}


RUNNERS = {"a": run_a, "b": run_b, "c": run_c}


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    cfg = _load(args.config)
    key = COMMANDS[args.command]
    if cfg.scenario != key:
        raise CliError(f"config describes scenario {cfg.scenario!r} but the command is "
                       f"{args.command!r}; use run scenario-{cfg.scenario}")
    seed = cfg.seed if args.seed is None else args.seed
    if not 0 <= seed < 2 ** 64:
        raise CliError("--seed must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise CliError("--workers must be >= 1")
    w = _Writer(args.out or cfg.output_dir)
    plot = args.plot or "svg" in cfg.formats
    try:
        results = RUNNERS[key](cfg, seed, w, args.workers, plot)
    except FogError as e:
        raise CliError(f"run failed: {e}", 3) from None
    report = {
        # header is the only part that varies between identical runs
        "header": {"generated_at": started,
                   "wall_clock_s": round(time.perf_counter() - t0, 3),
                   "version": __version__, "kernel_backend": kernels.BACKEND},
        "command": args.command,
        "config_digest": cfg.digest,
        "seed": seed,
        "results": results,
        "artifacts": sorted(w.files) + ["report.json"],
    }
    path = os.path.join(w.dir, "report.json")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, allow_nan=False, default=_json_default)
            fh.write("\n")
    except (OSError, ValueError) as e:
        raise CliError(f"could not write report: {e}", 3) from None
    print(f"{args.command}: wrote {', '.join(report['artifacts'])} to {w.dir}")
    return 0


def _json_default(o):
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _load(path: str) -> ScenarioConfig:
    try:
        return load_config(path)
    except OSError as e:
        raise CliError(f"cannot read config {path!r}: {e}") from None
    except FogError as e:
        errs = getattr(e, "errors", None) or [str(e)]
        raise CliError(f"{path}: invalid config\n" + "\n".join(f"  {x}" for x in errs)) from None


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except CliError as e:
        print(e, file=sys.stderr)
        return 1
    topo = cfg.topology
    print(f"{args.config}: ok (scenario {cfg.scenario}, {len(topo.nodes)} nodes, "
          f"{len(topo.by_tier('fog'))} fog, {len(topo.by_tier('cloud'))} cloud, "
          f"digest {cfg.digest})")
    return 0


def cmd_catalog(args) -> int:
    print(catalog.format_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fog2c", description="Fog communication and computing energy toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("command", choices=sorted(COMMANDS))
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None, help="overrides experiment.seed")
    r.add_argument("--out", default=None, help="overrides output.directory")
    r.add_argument("--plot", action="store_true", help="also write SVG charts")
    r.add_argument("--workers", type=int, default=1, help="worker processes")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)
    c = sub.add_parser("catalog", help="print the built-in model catalog")
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
