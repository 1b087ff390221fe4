"""Command-line entry point: ``dressedspin-figures render --spec FILE``.

The spec file uses the same INI convention as the simulator configs, with a
single ``[figure]`` section:

    [figure]
    kind = crossover                 ; ramp_sweep | spectrum | crossover
    inputs = results/crossover.csv   ; comma-separated CSV paths
    output = panels/crossover        ; base path; .png and .svg are written
    x_min = 0                        ; optional axis ranges
    x_max = 3
    title = axis-angle crossover     ; optional

Exit codes: 0 success, 2 bad spec or CSV schema (with a column diagnostic),
74 unwritable output.
"""

from __future__ import annotations

import argparse
import configparser
import sys

from .render import FigureSpec, SchemaError, render

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_IO = 74


def load_spec(path: str) -> FigureSpec:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise SchemaError(f"spec file not found: {path}")
    if not parser.has_section("figure"):
        raise SchemaError(f"{path}: missing [figure] section")
    section = parser["figure"]
    known = {"kind", "inputs", "output", "x_min", "x_max", "y_min", "y_max", "title"}
    unknown = set(section) - known
    if unknown:
        raise SchemaError(f"{path}: unknown figure key(s) {sorted(unknown)}")
    for required in ("kind", "inputs", "output"):
        if required not in section:
            raise SchemaError(f"{path}: missing figure.{required}")

    def opt_float(key):
        return float(section[key]) if key in section else None

    return FigureSpec(
        kind=section["kind"].strip(),
        inputs=tuple(p.strip() for p in section["inputs"].split(",") if p.strip()),
        output=section["output"].strip(),
        x_min=opt_float("x_min"),
        x_max=opt_float("x_max"),
        y_min=opt_float("y_min"),
        y_max=opt_float("y_max"),
        title=section.get("title"),
    )


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = argparse.ArgumentParser(prog="dressedspin-figures")
    sub = parser.add_subparsers(dest="command")
    render_p = sub.add_parser("render", help="render one panel from a spec file")
    render_p.add_argument("--spec", required=True, help="INI spec file with a [figure] section")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_SPEC
    if args.command != "render":
        parser.print_usage(sys.stderr)
        return EXIT_SPEC
    try:
        spec = load_spec(args.spec)
        paths = render(spec)
    except (SchemaError, OSError, ValueError) as e:
        kind = EXIT_IO if isinstance(e, OSError) else EXIT_SPEC
        sys.stderr.write(f"error: {e}\n")
        return kind
    for p in paths:
        sys.stdout.write(p + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
