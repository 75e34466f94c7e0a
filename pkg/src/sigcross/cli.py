"""Command-line front end: run, compare and sweep scenarios."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from .engine import Policy, SimConfig, SimResult, run
from .scenario import BUNDLED, ScenarioError, bundled_path, config_fingerprint, dump_scenario, load_scenario
from .sweep import run_sweep

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def resolve(ref: str) -> Path:
    """A file path, or the name of a bundled scenario."""
    p = Path(ref)
    if not p.exists() and ref in BUNDLED:
        return bundled_path(ref)
    return p


def load(ref: str, dt: float | None = None, policy: str | None = None) -> SimConfig:
    config = load_scenario(resolve(ref))
    changes = {}
    if dt is not None:
        changes["dt"] = dt
    if policy is not None:
        changes["policy"] = Policy(policy)
    if changes:
        try:
            config = dataclasses.replace(config, **changes)
        except ValueError as e:
            raise ScenarioError(f"invalid override: {e}", source=ref) from None
    return config


def _fmt_time(t: float | None) -> str:
    return "-" if t is None else f"{t:.2f}"


def series_rows(result: SimResult, n: int):
    """Per-tick z and v columns for every vehicle, ready for plotting."""
    header = ["t", *(f"z{k}" for k in range(1, n + 1)), *(f"v{k}" for k in range(1, n + 1))]
    rows = []
    for start in range(0, len(result.trace), n):
        tick = result.trace[start:start + n]
        rows.append([tick[0][0], *(r[7] for r in tick), *(r[5] for r in tick)])
    return header, rows


def write_outputs(result: SimResult, config: SimConfig, out: Path, emit_plots: bool = False) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(result.trace_csv())
    (out / "events.csv").write_text(result.events_csv())
    summary = {"scenario": config.name, **result.summary()}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    header, rows = series_rows(result, len(config.vehicles))
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([f"{x:.6f}" for x in r] for r in rows)
    if emit_plots:
        render_plots(header, rows, len(config.vehicles), out, config.name)


def render_plots(header, rows, n: int, out: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = [r[0] for r in rows]
    fig, (az, av) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    for k in range(n):
        az.plot(t, [r[1 + k] for r in rows], label=f"CAV{k + 1}")
        av.plot(t, [r[1 + n + k] for r in rows], label=f"CAV{k + 1}")
    az.set_ylabel("opinion z")
    az.set_ylim(-0.05, 1.05)
    av.set_ylabel("speed (m/s)")
    av.set_xlabel("time (s)")
    az.legend(loc="best", fontsize="small")
    az.set_title(title)
    fig.tight_layout()
    fig.savefig(out / "series.png", dpi=120)
    plt.close(fig)


def _report(result: SimResult, label: str = "") -> bool:
    """Print the headline numbers; True when the run is clean."""
    prefix = f"[{label}] " if label else ""
    print(f"{prefix}last_exit_time={_fmt_time(result.last_exit_time)} "
          f"collision={result.collision} timeout={result.timeout} "
          f"go_order={','.join(map(str, result.go_order()))}")
    for t, a, b in result.colliding_pairs[:5]:
        print(f"{prefix}  contact between CAV{a} and CAV{b} at t={t:.2f}")
    return not (result.collision or result.timeout)


def cmd_run(args) -> int:
    config = load(args.scenario, args.dt, args.policy)
    result = run(config)
    write_outputs(result, config, Path(args.output), args.emit_plots)
    return EXIT_OK if _report(result) else EXIT_FAIL


def cmd_compare(args) -> int:
    base = load(args.scenario, args.dt)
    fcfs = dataclasses.replace(base, policy=Policy.FCFS_BASELINE)
    prop = dataclasses.replace(base, policy=Policy.PROPOSED)
    # the two runs may differ only in the policy
    if config_fingerprint(fcfs, ignore_policy=True) != config_fingerprint(prop, ignore_policy=True):
        raise AssertionError("compare configs differ beyond the policy")
    out = Path(args.output)
    r_f, r_p = run(fcfs), run(prop)
    write_outputs(r_f, fcfs, out / "fcfs", args.emit_plots)
    write_outputs(r_p, prop, out / "proposed", args.emit_plots)

    print(f"{'':>10} {'FCFS':>9} {'proposed':>9}")
    for k in sorted(r_f.exit_times):
        print(f"{'CAV' + str(k + 1):>10} {_fmt_time(r_f.exit_times[k]):>9} {_fmt_time(r_p.exit_times[k]):>9}")
    print(f"{'last':>10} {_fmt_time(r_f.last_exit_time):>9} {_fmt_time(r_p.last_exit_time):>9}")
    ratio = None
    if r_f.last_exit_time and r_p.last_exit_time is not None:
        ratio = r_p.last_exit_time / r_f.last_exit_time
    print(f"{'ratio':>10} {'-' if ratio is None else f'{ratio:.3f}':>9}")
    (out / "compare.json").write_text(json.dumps({
        "scenario": base.name, "fcfs": r_f.summary(), "proposed": r_p.summary(), "ratio": ratio,
    }, indent=2) + "\n")
    ok = _report(r_f, "fcfs") & _report(r_p, "proposed")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    base = load(args.scenario, args.dt)
    policies = {
        "both": (Policy.FCFS_BASELINE, Policy.PROPOSED),
        "proposed": (Policy.PROPOSED,),
        "fcfs": (Policy.FCFS_BASELINE,),
    }[args.policy]
    rows = run_sweep(base, policies, workers=args.workers)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("maneuvers", "fcfs_time", "proposed_time", "fcfs_collision", "proposed_collision",
                    "fcfs_timeout", "proposed_timeout"))
        for row in rows:
            f, p = row.fcfs, row.proposed
            w.writerow((
                row.label,
                "" if f is None or f.last_exit_time is None else f"{f.last_exit_time:.2f}",
                "" if p is None or p.last_exit_time is None else f"{p.last_exit_time:.2f}",
                "" if f is None else int(f.collision), "" if p is None else int(p.collision),
                "" if f is None else int(f.timeout), "" if p is None else int(p.timeout),
            ))
    bad = [r.label for r in rows if r.failed]
    print(f"{len(rows)} combinations, {len(bad)} with a collision or timeout")
    if bad:
        print("failed:", " ".join(bad))
    return EXIT_FAIL if bad else EXIT_OK


def cmd_list(args) -> int:
    for name in BUNDLED:
        print(name)
    return EXIT_OK


def cmd_emit(args) -> int:
    sys.stdout.write(dump_scenario(load(args.scenario)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sigcross", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("scenario", help="scenario file, or a bundled name (see 'list')")
        p.set_defaults(fn=fn)
        return p

    p = scenario_cmd("run", cmd_run, "run one scenario")
    p.add_argument("-o", "--output", default="out")
    p.add_argument("--policy", choices=[x.value for x in Policy])
    p.add_argument("--dt", type=float)
    p.add_argument("--emit-plots", action="store_true", help="also render series.png")

    p = scenario_cmd("compare", cmd_compare, "run FCFS and the proposed policy side by side")
    p.add_argument("-o", "--output", default="out")
    p.add_argument("--dt", type=float)
    p.add_argument("--emit-plots", action="store_true")

    p = scenario_cmd("sweep", cmd_sweep, "run every maneuver assignment of a base scenario")
    p.add_argument("-o", "--output", default="out")
    p.add_argument("--dt", type=float)
    p.add_argument("--policy", choices=("both", "proposed", "fcfs"), default="both")
    p.add_argument("-j", "--workers", type=int, default=1)

    scenario_cmd("emit", cmd_emit, "print the fully resolved scenario")
    sub.add_parser("list", help="list bundled scenarios").set_defaults(fn=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
