"""Command-line surface.

Subcommands::

    oocp check MODEL                      static diagnostics (exit 3 if any)
    oocp validate MODEL INSTANCE          full-axiom validation report (JSON)
    oocp solve MODEL [--input PARTIAL] [--max-class C=N]... [--pool N]
               [--int-bound N] [--partition] [--limit K] [--seconds T]
               [--out DIR]                one canonical instance file per solution
    oocp enumerate MODEL [...]            brute-force oracle results (guarded)
    oocp expand MODEL                     explicit flattened class listing

Exit status: 0 solutions found / ok, 1 unsatisfiable / invalid, 2 time budget
exceeded, 3 input error.  Set ``OOCP_COLOR=0`` to disable ANSI colors.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

from .diagnostics import ParseFailure
from .errors import BoundWarning, LoadError, OocpError, OracleTooLarge
from .instance import Instance, load_instance, save_instance, validate
from .solver import SolveConfig, SolveResult, brute_force_enumerate, solve
from .errors import BudgetExceeded
from .dsl import expand, load_model

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3


def _color_enabled() -> bool:
    if os.environ.get("OOCP_COLOR", "") == "0":
        return False
    return sys.stderr.isatty()


def _paint(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _err(message: str):
    print(_paint("error:", "31") + " " + message, file=sys.stderr)


def _print_diagnostics(diagnostics):
    for d in diagnostics:
        print(_paint(d.code, "33") + f" {d.subject}: {d.message}" + (f" [{d.axiom}]" if d.axiom else ""))


def _load_model_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(str(exc))
        raise SystemExit(EXIT_INPUT)
    try:
        return load_model(text, filename=Path(path).name)
    except ParseFailure as exc:
        for error in exc.errors:
            _err(f"{Path(path).name}: {error.render()}")
        raise SystemExit(EXIT_INPUT)


def _load_instance_file(path: str, model):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(str(exc))
        raise SystemExit(EXIT_INPUT)
    try:
        return load_instance(text, model)
    except LoadError as exc:
        _err(f"{Path(path).name}: {exc}")
        raise SystemExit(EXIT_INPUT)


def _config_from(args) -> SolveConfig:
    max_per_class = {}
    for item in args.max_class or []:
        if "=" not in item:
            _err(f"--max-class expects CLASS=N, found {item!r}")
            raise SystemExit(EXIT_INPUT)
        name, _, value = item.partition("=")
        try:
            max_per_class[name] = int(value)
        except ValueError:
            _err(f"--max-class expects an integer bound, found {value!r}")
            raise SystemExit(EXIT_INPUT)
    return SolveConfig(
        max_per_class=max_per_class,
        pool_size=args.pool,
        default_int_bound=args.int_bound,
        partition=args.partition,
        max_solutions=getattr(args, "limit", None),
        time_budget=getattr(args, "seconds", None),
    )


def _add_solve_flags(sub, with_budget: bool):
    sub.add_argument("model")
    sub.add_argument("--input", help="partial instance file to complete")
    sub.add_argument("--max-class", action="append", metavar="CLASS=N")
    sub.add_argument("--pool", type=int, help="reference pool size")
    sub.add_argument("--int-bound", type=int, default=16, help="cap for nat/nat1 domains")
    sub.add_argument("--partition", action="store_true", help="every pool reference must be used")
    if with_budget:
        sub.add_argument("--limit", type=int, help="stop after K solutions")
        sub.add_argument("--seconds", type=float, help="wall-clock budget")
    sub.add_argument("--out", default="solutions", help="directory for solution files")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oocp",
        description="Model, validate, and solve object-oriented constraint programs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_check = commands.add_parser("check", help="static model diagnostics")
    p_check.add_argument("model")

    p_validate = commands.add_parser("validate", help="validate an instance against a model")
    p_validate.add_argument("model")
    p_validate.add_argument("instance")
    p_validate.add_argument("--pool", type=int)
    p_validate.add_argument("--partition", action="store_true")

    p_solve = commands.add_parser("solve", help="complete a partial instance within bounds")
    _add_solve_flags(p_solve, with_budget=True)

    p_enum = commands.add_parser("enumerate", help="brute-force oracle enumeration (guarded)")
    _add_solve_flags(p_enum, with_budget=False)
    p_enum.add_argument("--guard", type=int, default=10_000_000, help="assignment space cap")

    p_expand = commands.add_parser("expand", help="print the flattened class structures")
    p_expand.add_argument("model")

    args = parser.parse_args(argv)

    if args.command == "check":
        return _cmd_check(args)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "enumerate":
        return _cmd_enumerate(args)
    if args.command == "expand":
        return _cmd_expand(args)
    return EXIT_INPUT


def _cmd_check(args) -> int:
    from .model import check_discriminators

    info = _load_model_file(args.model)
    diagnostics = check_discriminators(info.model, info.lattice)
    if diagnostics:
        _print_diagnostics(diagnostics)
        return EXIT_INPUT
    print(
        f"ok: {len(info.model.classes)} classes, {len(info.model.relations)} relations, "
        f"{len(info.model.constraints)} constraints"
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    info = _load_model_file(args.model)
    loaded = _load_instance_file(args.instance, info.model)
    if not isinstance(loaded, Instance):
        _err("the instance file is partial; validation needs a complete instance")
        return EXIT_INPUT
    config = SolveConfig(pool_size=args.pool, partition=args.partition)
    report = validate(info, loaded, config)
    print(report.render())
    return EXIT_OK if report.valid else EXIT_UNSAT


def _cmd_solve(args) -> int:
    info = _load_model_file(args.model)
    partial = None
    if args.input:
        partial = _load_instance_file(args.input, info.model)
        partial = _as_partial(partial)
    config = _config_from(args)
    out_dir = Path(args.out)
    count = 0
    status = EXIT_OK
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BoundWarning)
            for solution in solve(info, partial, config):
                count += 1
                _write_solution(out_dir, count, solution)
            for w in caught:
                print(_paint("warning:", "33") + f" {w.message}", file=sys.stderr)
    except BudgetExceeded as exc:
        _err(str(exc))
        status = EXIT_BUDGET
    except OocpError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if status == EXIT_BUDGET:
        print(f"budget exceeded after {count} solution(s)")
        return EXIT_BUDGET
    if count == 0:
        print("unsatisfiable")
        return EXIT_UNSAT
    print(f"{count} solution(s) written to {out_dir}")
    return EXIT_OK


def _cmd_enumerate(args) -> int:
    info = _load_model_file(args.model)
    partial = None
    if args.input:
        partial = _as_partial(_load_instance_file(args.input, info.model))
    config = _config_from(args)
    config.oracle_guard = args.guard
    out_dir = Path(args.out)
    try:
        solutions = brute_force_enumerate(info, partial, config)
    except OracleTooLarge as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OocpError as exc:
        _err(str(exc))
        return EXIT_INPUT
    for i, solution in enumerate(solutions, start=1):
        _write_solution(out_dir, i, solution)
    if not solutions:
        print("unsatisfiable")
        return EXIT_UNSAT
    print(f"{len(solutions)} solution(s) written to {out_dir}")
    return EXIT_OK


def _cmd_expand(args) -> int:
    info = _load_model_file(args.model)
    sys.stdout.write(expand(info))
    return EXIT_OK


def _as_partial(loaded):
    from .instance import PartialInstance

    if isinstance(loaded, PartialInstance):
        return loaded
    return PartialInstance(
        objects=loaded.objects,
        tuples=loaded.tuples,
        sequences=loaded.sequences,
        reified=loaded.reified,
        pool=loaded.pool,
    )


def _write_solution(out_dir: Path, index: int, solution) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"solution-{index:04d}.json"
    path.write_text(save_instance(solution), encoding="utf-8")
    print(path)


if __name__ == "__main__":
    sys.exit(main())
