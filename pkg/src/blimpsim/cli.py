"""Command-line entry points: run scenarios, summarize logs, serve live."""

import argparse
import json
import sys

from .multibody import NonFiniteState
from .scenario import ScenarioSpec, SpecError, presets, run, summarize


def _load_spec(args):
    if args.preset:
        table = presets()
        if args.preset not in table:
            raise SpecError(
                f"unknown preset {args.preset!r}; "
                f"available: {', '.join(sorted(table))}"
            )
        spec = table[args.preset]
        doc = spec.to_dict()
    elif args.scenario:
        with open(args.scenario) as fh:
            doc = json.load(fh)
    else:
        raise SpecError("need a scenario file or --preset NAME")
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "duration", None) is not None:
        doc["duration"] = args.duration
    return ScenarioSpec.from_dict(doc)


def cmd_run(args):
    spec = _load_spec(args)
    _, summary = run(spec, out_dir=args.out)
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_summarize(args):
    summary = summarize(args.log)
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_serve(args):
    from .bridge import serve

    spec = _load_spec(args)
    serve(spec, host=args.host, port=args.port, rate=args.rate,
          timescale=args.timescale, static_dir=args.static)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blimpsim",
        description="Deformable-airship flight simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario headlessly")
    p_run.add_argument("scenario", nargs="?", help="scenario JSON file")
    p_run.add_argument("--preset", help="named built-in scenario")
    p_run.add_argument("--out", help="output directory for CSV/JSON")
    p_run.add_argument("--seed", type=int, help="override the RNG seed")
    p_run.add_argument("--duration", type=float, help="override duration, s")
    p_run.set_defaults(func=cmd_run)

    p_sum = sub.add_parser("summarize", help="summary metrics for a log")
    p_sum.add_argument("log", help="telemetry CSV file")
    p_sum.set_defaults(func=cmd_summarize)

    p_srv = sub.add_parser("serve", help="live websocket service")
    p_srv.add_argument("scenario", nargs="?", help="scenario JSON file")
    p_srv.add_argument("--preset", help="named built-in scenario")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--rate", type=float, default=20.0,
                       help="frame stream rate, Hz")
    p_srv.add_argument("--timescale", type=float, default=1.0,
                       help="sim seconds per wall second")
    p_srv.add_argument("--static", help="static console assets to serve")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, NonFiniteState, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
