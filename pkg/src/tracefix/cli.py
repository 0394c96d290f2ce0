"""Command-line entry points: trace, repair, serve.

On-disk formats:

* Programs are ``.mj`` source files (UTF-8).
* A repair request file carries the failing input, the trace position
  being edited (``index`` or ``at: {loc, occurrence}``), the edited
  values (``"?"`` entries are unconstrained), and optional tests::

      {"input": {"x": [9, 5, 4]},
       "index": 6,
       "values": {"max": 9, "i": "?"},
       "tests": [{"input": {"x": [1, 2]}, "output": 1}]}

Exit codes: 0 success, 2 bad input, 3 no repair found.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
from importlib import resources

from .extfun import DEFAULT_REGISTRY, CegisResult, cegis_repair, external_names
from .lang import ParseError, TypecheckError, apply_patch, parse_program
from .lang.ast import Program, RESULT_VAR
from .lang.typecheck import fn_info
from .solver import RepairOptions, RepairResult, repair
from .tracer import (Manipulation, RuntimeFault, Test, Trace, UNDEF, WILDCARD,
                     execute, trace_to_json)

DEFAULT_FUEL = 100_000


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# Value decoding against declared types


def _decode_value(raw, ty, what: str):
    if ty.is_array:
        if not isinstance(raw, list):
            raise InputError(f"{what} must be an array")
        elem = ty.kind
        out = []
        for x in raw:
            if elem == "char":
                if not (isinstance(x, str) and len(x) == 1):
                    raise InputError(f"{what} elements must be single characters")
                out.append(x)
            else:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise InputError(f"{what} elements must be integers")
                out.append(x)
        return out
    if ty.kind == "bool":
        if not isinstance(raw, bool):
            raise InputError(f"{what} must be a boolean")
        return raw
    if ty.kind == "char":
        if not (isinstance(raw, str) and len(raw) == 1):
            raise InputError(f"{what} must be a single character")
        return raw
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise InputError(f"{what} must be an integer")
    return raw


def decode_input(program: Program, raw: dict) -> dict:
    info = fn_info(program)
    types = dict(program.entry_fn().params)
    initial = {}
    for name, ty in types.items():
        if name not in raw:
            raise InputError(f"missing input variable {name!r}")
        initial[name] = _decode_value(raw[name], ty, f"input {name!r}")
    for name in raw:
        if name not in types:
            raise InputError(f"{name!r} is not an input variable")
    return initial


def decode_manipulation(program: Program, doc: dict,
                        fuel: int = DEFAULT_FUEL,
                        externals=None) -> tuple[Manipulation | None, tuple[Test, ...]]:
    """Resolve a repair-request document against the program."""
    if not isinstance(doc, dict):
        raise InputError("request must be a JSON object")
    info = fn_info(program)
    tests = []
    for i, t in enumerate(doc.get("tests", [])):
        tin = decode_input(program, t.get("input", {}))
        rt = program.entry_fn().return_type
        tout = _decode_value(t.get("output"), rt, f"tests[{i}].output")
        tests.append(Test(input=tin, output=tout))
    if "values" not in doc:
        if not tests:
            raise InputError("request needs values to edit or tests")
        return None, tuple(tests)
    initial = decode_input(program, doc.get("input", {}))
    values = {}
    var_types = dict(info.var_types)
    rt = program.entry_fn().return_type
    for name, raw in doc["values"].items():
        if name in info.input_vars:
            raise InputError(f"cannot edit input variable {name!r}")
        if name == RESULT_VAR:
            ty = rt
        elif name in var_types:
            ty = var_types[name]
        else:
            raise InputError(f"unknown variable {name!r}")
        if raw == "?":
            values[name] = WILDCARD
        elif raw is None:
            values[name] = UNDEF
        else:
            values[name] = _decode_value(raw, ty, f"values[{name!r}]")
    if not any(v is not WILDCARD for v in values.values()):
        raise InputError("at least one edited value is required")
    if ("index" in doc) == ("at" in doc):
        raise InputError("give exactly one of 'index' or 'at'")
    if "index" in doc:
        index = doc["index"]
        if not isinstance(index, int) or index < 0:
            raise InputError("'index' must be a non-negative integer")
    else:
        at = doc["at"]
        loc = at.get("loc")
        occurrence = at.get("occurrence", 1)
        trace = execute(program, initial, fuel, externals=externals)
        count = 0
        index = None
        for h, c in enumerate(trace.configs):
            if c.loc == loc:
                count += 1
                if count == occurrence:
                    index = h
                    break
        if index is None:
            raise InputError(
                f"line {loc} is not visited {occurrence} time(s) on this input")
    return Manipulation(initial=initial, index=index, values=values), tuple(tests)


def options_from_args(args, tests) -> RepairOptions:
    schedule = tuple(b for b in (1, 2, 4, 8, 16) if b <= args.max_const)
    if not schedule or schedule[-1] < args.max_const:
        schedule = schedule + (args.max_const,)
    allowed = (frozenset(args.allow_lines) if args.allow_lines is not None
               else None)
    return RepairOptions(
        mode=args.mode,
        const_bound_schedule=schedule,
        fuel_factor=args.fuel_factor,
        allowed_locations=allowed,
        disallowed_locations=frozenset(args.disallow_lines or ()),
        use_slicing=not args.no_slice,
        max_candidates=args.max_candidates,
        tests=tuple(tests),
    )


def run_repair(program: Program, manipulation, options: RepairOptions):
    """Dispatch to the plain solver or the external-function loop."""
    if external_names(program):
        out = cegis_repair(program, manipulation, options,
                           registry=DEFAULT_REGISTRY)
        if isinstance(out, CegisResult):
            return out.result, out.iterations
        return out, None
    return repair(program, manipulation, options), None


def result_to_json(result, source: str | None = None,
                   iterations=None) -> dict:
    doc = result.to_json()
    if isinstance(result, RepairResult) and source is not None:
        doc["patched_source"] = apply_patch(source, result.patch)
    if iterations is not None:
        doc["cegis"] = [it.to_json() for it in iterations]
    return doc


# ---------------------------------------------------------------------------
# Subcommands


def _fail(message: str, code: int = 2) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_program(path: str, entry: str | None) -> Program:
    with open(path, encoding="utf-8") as f:
        return parse_program(f.read(), entry=entry)


def cmd_trace(args) -> int:
    try:
        program = _load_program(args.program, args.entry)
        initial = decode_input(program, json.loads(args.input))
    except (OSError, json.JSONDecodeError, ParseError, TypecheckError,
            InputError) as e:
        return _fail(str(e))
    externals = DEFAULT_REGISTRY if external_names(program) else None
    try:
        trace = execute(program, initial, args.fuel, externals=externals)
    except RuntimeFault as e:
        doc = trace_to_json(e.trace or Trace([], False))
        doc["fault"] = {"loc": e.location, "reason": e.reason}
        print(json.dumps(doc, sort_keys=True))
        return _fail(str(e))
    print(json.dumps(trace_to_json(trace), sort_keys=True))
    return 0


def cmd_repair(args) -> int:
    try:
        with open(args.program, encoding="utf-8") as f:
            source = f.read()
        program = parse_program(source, entry=args.entry)
        with open(args.manipulation, encoding="utf-8") as f:
            doc = json.load(f)
        externals = DEFAULT_REGISTRY if external_names(program) else None
        manipulation, tests = decode_manipulation(program, doc,
                                                  externals=externals)
        options = options_from_args(args, tests)
    except (OSError, json.JSONDecodeError, ParseError, TypecheckError,
            InputError) as e:
        return _fail(str(e))
    try:
        result, iterations = run_repair(program, manipulation, options)
    except (ValueError, RuntimeFault) as e:
        return _fail(str(e))
    if args.explain_slice and manipulation is not None:
        _print_slices(program, manipulation, options)
    doc = result_to_json(result, source,
                         iterations if args.explain_cegis else None)
    print(json.dumps(doc, sort_keys=True))
    if isinstance(result, RepairResult):
        patched = doc["patched_source"]
        diff = difflib.unified_diff(source.splitlines(True),
                                    patched.splitlines(True),
                                    fromfile=args.program,
                                    tofile=args.program + " (repaired)")
        sys.stderr.write("".join(diff))
        return 0
    return 3


def _print_slices(program, manipulation, options) -> None:
    from . import slicer
    from .solver import build_context
    from .lang.ast import stmt_locations
    from .lang import pretty_print

    context = build_context(program, manipulation, options)
    for loc in sorted(stmt_locations(program.entry_fn())):
        s = slicer.summarize_for_line(program, context, loc)
        if s is None:
            continue
        subs = {v: value for v, (_, value) in s.substitutions.items()}
        print(f"line {loc}: relevant={sorted(s.relevant)} "
              f"applicable={s.applicable} substitutions={subs}",
              file=sys.stderr)
        if s.applicable:
            print("\n".join("    " + ln for ln in
                            pretty_print(s.summarized).splitlines()),
                  file=sys.stderr)


def cmd_seed_corpus(args) -> int:
    """Run the bundled fixtures end to end and print one line each."""
    corpus = resources.files("tracefix") / "corpus"
    failures = 0
    for entry in sorted(corpus.iterdir()):
        if not entry.name.endswith(".repair.json"):
            continue
        doc = json.loads(entry.read_text())
        source = (corpus / doc["program"]).read_text()
        program = parse_program(source)
        externals = DEFAULT_REGISTRY if external_names(program) else None
        manipulation, tests = decode_manipulation(program, doc,
                                                  externals=externals)
        options = RepairOptions(mode=doc.get("mode", "full"),
                                tests=tuple(tests))
        result, _ = run_repair(program, manipulation, options)
        if isinstance(result, RepairResult):
            patch = "; ".join(f"line {e.location}: {e.after}"
                              for e in result.patch.entries)
            print(f"{entry.name}: repaired cost={result.cost.total} [{patch}]")
        else:
            print(f"{entry.name}: no_repair ({result.reason})")
            failures += 1
    return 3 if failures else 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=args.static_dir,
                     solver_timeout=args.solver_timeout)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as e:  # port in use and friends
        return int(e.code or 1)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracefix",
        description="Repair small imperative programs by editing values in "
                    "their execution traces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="run a program and print its trace")
    p.add_argument("program", help=".mj source file")
    p.add_argument("--input", required=True, help="JSON input valuation")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--entry", default=None)
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("repair", help="search for a minimum-cost repair")
    p.add_argument("program", nargs="?", help=".mj source file")
    p.add_argument("manipulation", nargs="?", help="repair request JSON file")
    p.add_argument("--mode", choices=["full", "single-line"], default="full")
    p.add_argument("--max-const", type=int, default=16)
    p.add_argument("--fuel-factor", type=float, default=2.0)
    p.add_argument("--allow-lines", type=_int_list, default=None)
    p.add_argument("--disallow-lines", type=_int_list, default=None)
    p.add_argument("--no-slice", action="store_true")
    p.add_argument("--max-candidates", type=int, default=2_000_000)
    p.add_argument("--tests", default=None, help="JSON file with extra tests")
    p.add_argument("--explain-cegis", action="store_true")
    p.add_argument("--explain-slice", action="store_true")
    p.add_argument("--seed-corpus", action="store_true",
                   help="run the bundled benchmark fixtures")
    p.add_argument("--entry", default=None)
    p.set_defaults(fn=cmd_repair)

    p = sub.add_parser("serve", help="start the repair HTTP service")
    p.add_argument("--port", type=int, default=7421)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", default=None,
                   help="directory with the browser UI bundle")
    p.add_argument("--solver-timeout", type=float, default=60.0)
    p.set_defaults(fn=cmd_serve)
    return parser


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "repair":
        if args.seed_corpus:
            return cmd_seed_corpus(args)
        if not args.program or not args.manipulation:
            parser.error("repair needs a program and a request file")
        if args.tests:
            try:
                with open(args.tests, encoding="utf-8") as f:
                    extra = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                return _fail(str(e))
            with open(args.manipulation, encoding="utf-8") as f:
                doc = json.load(f)
            doc.setdefault("tests", []).extend(extra)
            import tempfile

            tmp = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
            json.dump(doc, tmp)
            tmp.close()
            args.manipulation = tmp.name
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
