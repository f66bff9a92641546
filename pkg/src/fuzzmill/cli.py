"""Command-line entry points.

Subcommands: ``solve`` enumerates valid-and-rational API groups from a
library spec; ``classify`` buckets compiler diagnostics into the failure
taxonomy; ``campaign run/resume/report`` drive the dual-scheduler loop and
render its results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .campaign import Campaign, CampaignConfig
from .constraints import enumerate_groups
from .failures import classify_failure
from .model import SpecError, load_library_spec
from .reporting import coverage_csv, render_table, report_from_state, write_report_files


def _cmd_solve(args: argparse.Namespace) -> int:
    spec = load_library_spec(args.spec)
    stream = enumerate_groups(
        spec,
        size_range=(args.min, args.max),
        cap=args.cap,
        order_seed=args.seed,
        check_implicit=not args.no_implicit,
        loose_pointer_match=args.loose_pointers,
    )
    out = open(args.out, "w") if args.out else sys.stdout
    count = 0
    try:
        for group in stream:
            out.write(json.dumps({"members": group.sorted_members()}) + "\n")
            count += 1
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"{count} groups", file=sys.stderr)
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    sources: list[tuple[str, str]] = []
    if args.files:
        for name in args.files:
            sources.append((name, Path(name).read_text()))
    else:
        sources.append(("<stdin>", sys.stdin.read()))
    for name, text in sources:
        category = classify_failure(text, token_budget=args.token_budget)
        line = category.tag
        if args.verbose and category.matched_pattern:
            line += f"\t{category.matched_pattern}"
        if len(sources) > 1:
            line = f"{name}: {line}"
        print(line)
    return 0


def _apply_ablation_flags(config: CampaignConfig, args: argparse.Namespace) -> None:
    if args.no_implicit:
        config.check_implicit = False
    if args.random_groups:
        config.random_groups = True
    if args.round_robin_drivers:
        config.round_robin_drivers = True
    if args.state:
        config.state_path = args.state


def _cmd_campaign_run(args: argparse.Namespace) -> int:
    config = CampaignConfig.from_file(args.config)
    _apply_ablation_flags(config, args)
    campaign = Campaign(config)
    report = campaign.run()
    print(render_table(report))
    print(f"\nstate written to {campaign.save_state()}", file=sys.stderr)
    return 0


def _cmd_campaign_resume(args: argparse.Namespace) -> int:
    campaign = Campaign.resume(args.state)
    report = campaign.run()
    print(render_table(report))
    return 0


def _cmd_campaign_report(args: argparse.Namespace) -> int:
    report = report_from_state(args.state)
    if args.format == "json":
        print(report.to_json())
    elif args.format == "table":
        print(render_table(report))
    else:
        if args.out:
            for path in write_report_files(report, args.out):
                print(path, file=sys.stderr)
        else:
            sys.stdout.write(coverage_csv(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzmill",
        description="Constraint-driven API group enumeration and dual-scheduler fuzzing campaigns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="enumerate valid and rational API groups")
    solve.add_argument("--spec", required=True, help="library spec JSON file")
    solve.add_argument("--min", type=int, default=2, help="minimum group size")
    solve.add_argument("--max", type=int, default=5, help="maximum group size")
    solve.add_argument("--cap", type=int, default=None, help="stop after this many groups")
    solve.add_argument("--seed", type=int, default=0, help="enumeration order seed")
    solve.add_argument("--out", default=None, help="output path (JSON lines); stdout if omitted")
    solve.add_argument("--no-implicit", action="store_true", help="skip implicit constraints")
    solve.add_argument(
        "--loose-pointers", action="store_true", help="match types ignoring pointer depth"
    )
    solve.set_defaults(func=_cmd_solve)

    classify = sub.add_parser("classify", help="classify compiler diagnostics")
    classify.add_argument("files", nargs="*", help="diagnostic files; stdin if omitted")
    classify.add_argument(
        "--token-budget",
        type=int,
        default=None,
        help="length beyond which diagnostics count as token-limit failures",
    )
    classify.add_argument("-v", "--verbose", action="store_true", help="show matched pattern")
    classify.set_defaults(func=_cmd_classify)

    campaign = sub.add_parser("campaign", help="run, resume, or report on a campaign")
    campaign_sub = campaign.add_subparsers(dest="campaign_command", required=True)

    run = campaign_sub.add_parser("run", help="run a campaign from a config file")
    run.add_argument("--config", required=True, help="TOML or JSON campaign config")
    run.add_argument("--state", default=None, help="where to persist campaign state")
    run.add_argument("--no-implicit", action="store_true", help="ablation: skip implicit constraints")
    run.add_argument(
        "--random-groups", action="store_true", help="ablation: uniform random group selection"
    )
    run.add_argument(
        "--round-robin-drivers", action="store_true", help="ablation: round-robin driver selection"
    )
    run.set_defaults(func=_cmd_campaign_run)

    resume = campaign_sub.add_parser("resume", help="continue a persisted campaign")
    resume.add_argument("--state", required=True, help="state file from a previous run")
    resume.set_defaults(func=_cmd_campaign_resume)

    rep = campaign_sub.add_parser("report", help="render the report for a persisted campaign")
    rep.add_argument("--state", required=True, help="state file from a previous run")
    rep.add_argument("--format", choices=("json", "table", "csv"), default="table")
    rep.add_argument(
        "--out",
        default=None,
        help="CSV output path; figures are written alongside (csv format only)",
    )
    rep.set_defaults(func=_cmd_campaign_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
