"""``pawtime`` command line: run scenarios, list the corpus, self-check.

Exit codes: 0 success, 1 runtime failure (propagation instability, size
guard, unwritable output), 2 validation error, 3 tolerance breach under
``--verify``, 4 the event never occurs although the scenario requires it.
With several scenarios the largest code wins.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..errors import PawtimeError, ValidationError
from .config import load_scenario
from .output import emit
from .runner import run_scenario
from .scenarios import list_scenarios, resolve_scenario
from .selfcheck import run_selfcheck

log = logging.getLogger("pawtime")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_TOLERANCE, EXIT_NEVER = 0, 1, 2, 3, 4


def _thread_cap():
    raw = os.environ.get("PAWTIME_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return os.cpu_count() or 1


def _run_one(ref, out_dir, fmt, verify):
    """Run one scenario and write its result; returns ``(exit_code, line)``."""
    try:
        cfg = load_scenario(resolve_scenario(ref))
    except ValidationError as exc:
        return EXIT_INVALID, f"{ref}: invalid: {exc}"
    log.info("%s: running (hash %s)", cfg.name, cfg.config_hash[:12])
    try:
        bundle = run_scenario(cfg, verify=verify)
    except PawtimeError as exc:
        return EXIT_RUNTIME, f"{cfg.name}: failed: {exc}"
    formats = [fmt] if fmt else list(cfg.outputs)
    try:
        for f in formats:
            # a never-occurring event has no table; its JSON carries the status
            if f == "csv" and bundle.distribution is None:
                f = "json"
            path = Path(out_dir) / f"{cfg.name}.{f}"
            emit(bundle, f, path)
            log.info("%s: wrote %s", cfg.name, path)
    except PawtimeError as exc:
        return EXIT_RUNTIME, f"{cfg.name}: output failed: {exc}"

    code, note = EXIT_OK, bundle.status
    if bundle.status == "never_occurs" and cfg.options.must_occur:
        code, note = EXIT_NEVER, "never_occurs (required to occur)"
    if verify and bundle.verification:
        failed = [k for k, v in bundle.verification.items() if not v["passed"]]
        if failed:
            code = max(code, EXIT_TOLERANCE)
            note += "; verify failed: " + ", ".join(failed)
        else:
            note += f"; verify passed ({len(bundle.verification)} checks)"
    return code, f"{cfg.name}: {note}"


def cmd_run(args):
    workers = min(_thread_cap(), len(args.scenarios))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda r: _run_one(r, args.out, args.format, args.verify), args.scenarios))
    for _, line in results:
        print(line)
    return max(code for code, _ in results)


def cmd_list(args):
    for name in list_scenarios():
        print(name)
    return EXIT_OK


def cmd_selfcheck(args):
    results = run_selfcheck(args.seed)
    code = EXIT_OK
    for name, value, tol in results:
        ok = value <= tol
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (tol {tol:.0e})")
        if not ok:
            code = EXIT_TOLERANCE
    return code


def build_parser():
    parser = argparse.ArgumentParser(prog="pawtime", description="Clock-conditioned event-time distributions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one or more scenarios")
    run.add_argument("scenarios", nargs="+", help="scenario file paths or shipped scenario names")
    run.add_argument("--out", default=".", help="output directory (default: current directory)")
    run.add_argument("--format", choices=("csv", "json"), default=None,
                     help="output format (default: the scenario's outputs list)")
    run.add_argument("--verify", action="store_true",
                     help="run oracle and tolerance checks; exit 3 on breach")
    run.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-scenarios", help="list the shipped scenarios")
    ls.set_defaults(func=cmd_list)

    sc = sub.add_parser("selfcheck", help="run the quick invariant checks")
    sc.add_argument("--seed", type=int, default=0)
    sc.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
