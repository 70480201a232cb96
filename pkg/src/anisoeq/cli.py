"""Command-line entry point: ``anisoeq list-seeds | run CONFIG | export CONFIG``."""

from __future__ import annotations

import argparse
import logging
import sys

from anisoeq.errors import ConfigError
from anisoeq.pipeline import EXIT_ERROR, export_pipeline, load_config, run_pipeline
from anisoeq.seeds import SEEDS

log = logging.getLogger("anisoeq")


def list_seeds_text() -> str:
    lines = []
    for name in sorted(SEEDS):
        e = SEEDS[name]
        lines.append(f"{name}  [{e.kind}]")
        for k, v in e.params.items():
            lines.append(f"    {k}: {v}")
        lines.append(f"    feeds: {', '.join(e.feeds)}")
        if e.note:
            lines.append(f"    note: {e.note}")
    return "\n".join(lines) + "\n"


def _add_overrides(p):
    p.add_argument("config", help="pipeline config (YAML)")
    p.add_argument("--fd-step", type=float, default=None, help="finite-difference step")
    p.add_argument("--samples", type=int, default=None, help="number of sample points")
    p.add_argument("--tol", type=float, default=None, help="normalized L-inf tolerance (FD)")
    p.add_argument("--out-dir", default=None, help="directory for reports and exports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anisoeq",
        description="Build anisotropic plasma equilibria from isotropic seeds and verify them.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list-seeds", help="list the seed catalog")
    _add_overrides(sub.add_parser("run", help="build, verify and export a pipeline"))
    _add_overrides(sub.add_parser("export", help="build a pipeline and write its exports only"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "list-seeds":
        sys.stdout.write(list_seeds_text())
        return 0

    try:
        cfg = load_config(args.config).with_overrides(
            args.fd_step, args.samples, args.tol, args.out_dir
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    result = run_pipeline(cfg) if args.command == "run" else export_pipeline(cfg)
    for stage, rep, tol in result.reports:
        name, eq = rep.worst()
        status = "PASS" if rep.passed(tol) else "FAIL"
        print(
            f"{status} stage {stage} {rep.system.value}: linf={rep.linf:.3e} "
            f"(tol {tol:g}, worst {name} at {tuple(round(v, 6) for v in eq.worst_point)})"
        )
    for path in result.written:
        log.info("wrote %s", path)
    if result.message:
        print(f"error: {result.message}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
