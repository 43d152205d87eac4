"""Command-line entry point.

Exit status: 0 on success or a passing comparison, 1 when a comparison
fails, 2 on a configuration, model or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config, runner
from .errors import PhaseNoiseError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _element(text: str) -> tuple[int, int]:
    try:
        m, n = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'm,n', got {text!r}") from None
    return m, n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasenoise", description="Pure-dephasing dynamics of a system coupled to a bosonic bath.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the selected engines and write trajectory files")
    p.add_argument("config")
    p.add_argument("--schrodinger", action="store_true", help="write Schrodinger-picture values")

    p = sub.add_parser("compare", help="compare trajectory files on a common grid")
    p.add_argument("files", nargs="+")
    p.add_argument("--threshold", type=float, default=1e-8)
    p.add_argument("--report", help="report path (default: standard output only)")

    p = sub.add_parser("kernels", help="write the kernel integrals and dephasing functionals")
    p.add_argument("config")

    p = sub.add_parser("cumulants", help="write the cumulant expansion of one element's log-coherence")
    p.add_argument("config")
    p.add_argument("--element", type=_element, required=True)
    p.add_argument("--orders", type=int, default=4)
    return parser


def _run(args) -> int:
    cfg = config.load(args.config)
    if args.schrodinger:
        cfg.schrodinger = True
    result = runner.run(cfg)
    for name, path in result.files.items():
        print(f"{name}: {path}")
    for engine, message in result.errors.items():
        print(f"error.{engine}: {message}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_ERROR


def _compare(args) -> int:
    if len(args.files) < 2:
        print("error: compare needs at least two files", file=sys.stderr)
        return EXIT_ERROR
    report = runner.compare(args.files, args.threshold, args.report)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


def _kernels(args) -> int:
    print(f"kernels: {runner.write_kernels(config.load(args.config))}")
    return EXIT_OK


def _cumulants(args) -> int:
    cfg = config.load(args.config)
    m, n = args.element
    print(f"cumulants: {runner.write_cumulants(cfg, m, n, args.orders)}")
    return EXIT_OK


COMMANDS = {"run": _run, "compare": _compare, "kernels": _kernels, "cumulants": _cumulants}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, PhaseNoiseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
