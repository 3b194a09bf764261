"""Command-line interface.

Subcommands: ``generate`` (instances), ``run`` (campaign), ``diagnose``
(replay diagnostics), ``landscape`` (exact enumeration reports),
``figures`` (CSV figure source data).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .campaign import CampaignConfig, load_records, run_campaign, summarize
from .figures import FIGURE_IDS, emit_figure_data
from .landscape import analyze, write_gap_histogram
from .model import IsingInstance, make_instance
from .replay import diagnose_replay


def _cmd_generate(args) -> int:
    instance = make_instance(
        n=args.n,
        subsystem_size=args.subsystem_size,
        boundary_scale=args.boundary_scale,
        disorder=args.disorder,
        frustration=args.frustration,
        seed=args.seed,
    )
    out = Path(args.out) if args.out else None
    if out:
        instance.save(out)
        print(f"wrote {out}")
    else:
        print(instance.to_json())
    return 0


def _cmd_run(args) -> int:
    config = CampaignConfig.from_file(args.config)
    if args.backend:
        raw = json.loads(Path(args.config).read_text())
        raw["backend"] = args.backend
        config = CampaignConfig.from_dict(raw)
    out_path = Path(args.out) if args.out else None
    records = run_campaign(config, out_path=out_path, workers=args.workers, resume=args.resume)
    summary = summarize(records)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_diagnose(args) -> int:
    results = diagnose_replay(args.replay, beta=args.beta)
    text = "\n".join(json.dumps(r, sort_keys=True) for r in results)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_landscape(args) -> int:
    instance = IsingInstance.load(args.instance)
    report = analyze(instance, beta=args.beta)
    if args.out:
        report.save(args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    if args.gap_csv:
        write_gap_histogram([report.gap], args.gap_csv, n_bins=1)
        print(f"wrote {args.gap_csv}")
    return 0


def _cmd_figures(args) -> int:
    records = load_records(args.records)
    paths = emit_figure_data(records, args.figure, args.out)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annealdiag", description=__doc__)
    parser.add_argument("--version", action="version", version=f"annealdiag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random 3-regular instance")
    g.add_argument("--n", type=int, required=True, help="qubit count (even)")
    g.add_argument("--subsystem-size", type=int, required=True)
    g.add_argument("--boundary-scale", type=float, default=0.5, help="boundary coupling scale in [0,1]")
    g.add_argument("--disorder", type=float, default=0.0, help="field half-width W")
    g.add_argument("--frustration", type=float, default=0.0, help="S-coupler sign-flip probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=str, default=None)
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="run a campaign from a JSON config")
    r.add_argument("--config", type=str, required=True)
    r.add_argument("--backend", type=str, default=None, help="override the config backend")
    r.add_argument("--out", type=str, default=None, help="records NDJSON path")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--resume", action="store_true", help="skip conditions already in the output file")
    r.set_defaults(func=_cmd_run)

    d = sub.add_parser("diagnose", help="diagnostics over a replay file")
    d.add_argument("--replay", type=str, required=True)
    d.add_argument("--beta", type=float, required=True, help="reference inverse temperature")
    d.add_argument("--out", type=str, default=None)
    d.set_defaults(func=_cmd_diagnose)

    l = sub.add_parser("landscape", help="exact enumeration report for an instance file")
    l.add_argument("--instance", type=str, required=True)
    l.add_argument("--beta", type=float, default=None, help="also compute basin weights at this beta")
    l.add_argument("--out", type=str, default=None)
    l.add_argument("--gap-csv", type=str, default=None)
    l.set_defaults(func=_cmd_landscape)

    f = sub.add_parser("figures", help="emit figure source CSVs from records")
    f.add_argument("--records", type=str, required=True)
    f.add_argument("--figure", type=str, required=True, choices=FIGURE_IDS)
    f.add_argument("--out", type=str, default="figures")
    f.set_defaults(func=_cmd_figures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
