"""Benchmark command line: run scenarios, list the catalog, check time steps.

Exit codes: 0 = completed with no property violations, 2 = completed and
violations were detected (the expected outcome for most published
cases), 1 = runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as adlbm_io
from .diagnostics import critical_dt_check
from .scenarios import Case, get_scenario, run_scenario, scenario_catalog


def _parse_config_file(path):
    """Flat key = value lines; # starts a comment."""
    options = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        options[key.replace("-", "_")] = value
    return options


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adlbm",
        description="lattice Boltzmann transport benchmarks with "
                    "maximum-principle and non-negativity audits")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one scenario case")
    runp.add_argument("--scenario", required=False, help="S1..S8")
    runp.add_argument("--case", type=int, default=None,
                      help="1-based case index from the scenario table")
    runp.add_argument("--dx", type=float, default=None)
    runp.add_argument("--dt", type=float, default=None)
    runp.add_argument("--bc", choices=["standard", "weighted_split"],
                      default=None)
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--sample-every", type=int, default=None)
    runp.add_argument("--threads", type=int, default=1,
                      help="recorded for provenance; kernels are "
                           "deterministic and thread-count independent")
    runp.add_argument("--config", default=None,
                      help="flat key=value file; command line overrides it")

    sub.add_parser("list", help="print the scenario catalog")

    checkp = sub.add_parser("check", help="critical time-step test")
    checkp.add_argument("--dx", type=float, required=True)
    checkp.add_argument("--dt", type=float, required=True)
    checkp.add_argument("--D", type=float, required=True, dest="diffusivity")
    return parser


def _cmd_list():
    print("id    model  scheme  cases  title")
    for s in scenario_catalog():
        print(f"{s.id:<5} {s.model:<6} {s.scheme:<7} {len(s.cases):<6} {s.title}")
        for k, c in enumerate(s.cases, start=1):
            ref = f"  ref={c.reference}" if c.reference else ""
            print(f"      case {k}: dx={c.dx:g} dt={c.dt:g}{ref}")
    model_note = ("velocity index order: rest first, then axis directions, "
                  "then diagonals")
    print(f"# {model_note}")
    return 0


def _cmd_check(args):
    ok, threshold = critical_dt_check(args.dx, args.dt, args.diffusivity)
    print(f"threshold dx^2/(6 D) = {threshold:.6g}")
    print(f"dt = {args.dt:.6g} -> {'satisfies' if ok else 'does not satisfy'} "
          "the non-negativity criterion")
    return 0


def _cmd_run(args):
    merged = {}
    if args.config:
        merged.update(_parse_config_file(args.config))
    for key in ("scenario", "case", "dx", "dt", "bc", "out", "sample_every",
                "threads"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if "scenario" not in merged:
        print("error: --scenario is required (from flags or config file)",
              file=sys.stderr)
        return 1
    scenario = get_scenario(str(merged["scenario"]))
    case = None
    case_index = 0
    if merged.get("dx") is not None or merged.get("dt") is not None:
        if merged.get("dx") is None or merged.get("dt") is None:
            print("error: --dx and --dt must be given together", file=sys.stderr)
            return 1
        case = Case(dx=float(merged["dx"]), dt=float(merged["dt"]))
    elif merged.get("case") is not None:
        case_index = int(merged["case"]) - 1
        if not 0 <= case_index < len(scenario.cases):
            print(f"error: case must be in 1..{len(scenario.cases)}",
                  file=sys.stderr)
            return 1
    sample_every = merged.get("sample_every")
    sample_every = int(sample_every) if sample_every is not None else None
    result = run_scenario(scenario, case_index=case_index, case=case,
                          bc_method=merged.get("bc"),
                          sample_every=sample_every)
    result.meta["threads"] = int(merged.get("threads", 1))
    out_root = merged.get("out") or adlbm_io.default_output_root()
    chosen = case or scenario.cases[case_index]
    out_dir = (Path(out_root) /
               f"{scenario.id}_dx{chosen.dx:g}_dt{chosen.dt:g}_{result.bc_method}")
    summary_path = adlbm_io.write_scenario_artifacts(result, out_dir)
    summary = json.loads(Path(summary_path).read_text())
    print(f"wrote {summary_path}")
    for name, rep in summary["reports"].items():
        verdicts = ", ".join(f"{k}={v['verdict']}"
                             for k, v in rep["verdicts"].items())
        print(f"{name}: u_min={rep['u_min']:.6g} u_max={rep['u_max']:.6g} "
              f"N_neg(final)={rep['n_neg_final']} [{verdicts}]")
    if "comparisons" in result.meta:
        for pair, verdict in result.meta["comparisons"].items():
            print(f"comparison {pair}: {verdict['verdict']}")
    return 2 if result.any_violation else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_run(args)
    except (ValueError, KeyError, FloatingPointError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
