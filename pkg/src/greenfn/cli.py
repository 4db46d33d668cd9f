"""Command line interface: ``greenfn green``, ``greenfn twoparam``, ``greenfn verify``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import greenfn as gf
from . import groupdata as gd
from . import twoparam as tp
from .symring import SymringError, cyclotomic_display

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
BLOCK_COLUMNS = 14


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


@dataclass
class RenderSpec:
    cols: list[str]
    rows: list[str]
    split: int = BLOCK_COLUMNS  # 0 keeps all columns in one block
    format: str = "ascii"
    corner: str = "class"


def render_ascii(headers: Sequence[str], rows: Sequence[str], cells: Sequence[Sequence[str]],
                 split: int = BLOCK_COLUMNS) -> str:
    """Blocks of at most ``split`` columns, right-aligned, separated by a blank line."""
    label_width = max(10, max((len(r) for r in rows), default=0))
    blocks = []
    for start in range(0, len(headers), split or len(headers) or 1):
        cols = range(start, min(start + (split or len(headers)), len(headers)))
        widths = {j: max([len(headers[j])] + [len(r[j]) for r in cells]) for j in cols}
        head = " ".join(headers[j].rjust(widths[j]) for j in cols)
        lines = [" " * (label_width + 1) + "| " + head, "_" * (label_width + 1) + "|" + "_" * (len(head) + 1)]
        for lab, r in zip(rows, cells):
            lines.append(lab.rjust(label_width) + " | " + " ".join(r[j].rjust(widths[j]) for j in cols))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_ascii(text: str) -> tuple[list[str], list[str], list[list[str]]]:
    """Inverse of render_ascii, merging the column blocks."""
    headers: list[str] = []
    rows: list[str] = []
    cells: dict[str, list[str]] = {}
    for block in [b for b in text.strip("\n").split("\n\n") if b.strip()]:
        lines = [ln for ln in block.split("\n") if ln.strip()]
        head = lines[0].split("|", 1)[1].split()
        headers += head
        for ln in lines[2:]:
            lab, rest = ln.split("|", 1)
            lab = lab.strip()
            vals = rest.split()
            if len(vals) != len(head):
                raise ValueError(f"row {lab!r} has {len(vals)} cells for {len(head)} columns")
            if lab not in cells:
                rows.append(lab)
                cells[lab] = []
            cells[lab] += vals
    return headers, rows, [cells[r] for r in rows]


def render(spec: RenderSpec, cells: Sequence[Sequence[str]]) -> str:
    if spec.format == "ascii":
        return render_ascii(spec.cols, spec.rows, cells, spec.split)
    if spec.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([spec.corner] + list(spec.cols))
        for lab, r in zip(spec.rows, cells):
            w.writerow([lab] + list(r))
        return buf.getvalue()
    raise UsageError(f"unknown format {spec.format!r}")


def twoparam_text(table: tp.TwoParamTable, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(table.to_json(), indent=1, sort_keys=True) + "\n"
    # the table is printed transposed: Levi classes as rows
    return render(RenderSpec(table.cols, table.rows, BLOCK_COLUMNS, fmt), table.display())


def green_text(table: gf.GreenTable, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(table.to_json(), indent=1, sort_keys=True) + "\n"
    headers = ["|C|"] + [c.label for c in table.cols]
    cells = [[cyclotomic_display(s)] + [cyclotomic_display(v) for v in row]
             for s, row in zip(table.sizes, table.values)]
    return render(RenderSpec(headers, table.row_labels, 0, fmt), cells)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


class Pipeline:
    """Lazily computed tables for one data directory."""

    def __init__(self, data_dir: str | None = None, group_table: gf.GreenTable | None = None):
        self.data_dir = data_dir
        self._group_table = group_table
        self._cache: dict = {}

    def setup(self, group: str, twist: str = "split") -> gd.GroupSetup:
        key = ("setup", group, twist)
        if key not in self._cache:
            self._cache[key] = gd.setup(group, twist if group.startswith("levi") else 0, self.data_dir)
        return self._cache[key]

    def green(self, group: str, twist: str = "split") -> gf.GreenTable:
        key = ("green", group, twist)
        if key not in self._cache:
            if group == "spin8" and self._group_table is not None:
                self._cache[key] = self._group_table
            elif group.startswith("levi"):
                cov = gd.covering_data(self.data_dir)
                self._cache[key] = gf.transfer_via_covering(self.green("sl2"), cov, self.setup(group, twist))
            else:
                self._cache[key] = gf.green_table(self.setup(group), check=False)
        return self._cache[key]

    def twoparam(self, twist: str) -> tp.TwoParamTable:
        key = ("twoparam", twist)
        if key not in self._cache:
            ms, gs = self.setup("levi124", twist), self.setup("spin8")
            m, g = self.green("levi124", twist), self.green("spin8")
            self._cache[key] = tp.solve(g, m, tp.identify(ms, m, gs, g))
        return self._cache[key]

    def signs(self):
        if "signs" not in self._cache:
            self._cache["signs"] = tp.resolve_signs([self.twoparam("split"), self.twoparam("twisted")])
        return self._cache["signs"]


def sl2_columns(table: gf.GreenTable, twist: str) -> gf.GreenTable:
    """The torus column of the given rational form together with the cuspidal column."""
    word = () if twist == "split" else (1,)
    keep = [j for j, c in enumerate(table.cols) if c.block != "T" or tuple(c.word) == word]
    return table.select_columns(keep, f"sl2-{twist}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _twist(args, default: str = "split") -> str:
    t = args.twist or default
    return {"nonsplit": "twisted", "twisted": "twisted", "split": "split"}[t]


def cmd_green(args, out) -> int:
    pipe = Pipeline(args.data_dir)
    group = args.group
    if args.import_table:
        table = gf.GreenTable.loads(Path(args.import_table).read_text())
    elif group == "sl2":
        table = pipe.green("sl2")
        if args.twist:
            table = sl2_columns(table, "split" if args.twist == "split" else "nonsplit")
    elif group in ("levi124", "levi"):
        table = pipe.green("levi124", _twist(args))
    else:
        if args.twist and args.twist != "split":
            raise UsageError("spin8 has no nontrivial twist here")
        table = pipe.green("spin8")
    out.write(green_text(table, args.format))
    report = gf.verify_orthogonality(table)
    total = sum(table.sizes, gf.ZERO)
    ok = not report
    err = sys.stderr if args.format == "json" else out
    err.write(f"orthogonality: {'PASS' if ok else 'FAIL'} ({len(table.cols)} functions, {len(report)} violations)\n")
    for v in report[:10]:
        err.write(f"  {v}\n")
    err.write(f"class sizes sum: {cyclotomic_display(total)}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_twoparam(args, out) -> int:
    if args.levi not in ("124", "1,2,4"):
        raise UsageError(f"unsupported Levi {args.levi!r}; only 124 is shipped")
    group_table = None
    if args.import_table:
        group_table = gf.GreenTable.loads(Path(args.import_table).read_text())
        if group_table.group != "spin8":
            raise UsageError(f"--import-table expects the spin8 table, got {group_table.group!r}")
        bad = gf.verify_orthogonality(group_table)
        if bad:
            sys.stderr.write(f"imported table fails orthogonality: {bad[0]}\n")
            return EXIT_FAIL
    pipe = Pipeline(args.data_dir, group_table)
    twist = _twist(args)
    table = pipe.twoparam(twist)
    signs = pipe.signs()
    if args.resolve:
        table = tp.apply_signs(table, signs, "resolved", args.residue)
    else:
        if args.residue is not None:
            raise UsageError("--residue needs --resolve")
        table = tp.apply_signs(table, signs, "symbolic")
    out.write(twoparam_text(table, args.format))
    return EXIT_OK


def verify_counts(pipe: Pipeline, out) -> bool:
    g, m = pipe.setup("spin8"), pipe.setup("levi124", "split")
    checks = [
        ("Spin8 algebraic classes", len(g.catalog.classes), 12),
        ("Spin8 finite classes", len(g.catalog.finite_classes()), 28),
        ("Spin8 block sizes", [len(b.chars) for b in g.blocks], [13, 5, 5, 5]),
        ("Levi finite classes", len(m.catalog.finite_classes()), 14),
        ("Levi finite classes per class", [len(c.finite) for c in m.catalog.classes], [1, 1, 1, 2, 1, 2, 2, 4]),
        ("Levi block sizes", [len(b.chars) for b in m.blocks], [8, 2, 2, 2]),
    ]
    checks.append(("data files match their SHA-256 pins", gd.manifest_mismatches(pipe.data_dir), []))
    ok = True
    for name, got, want in checks:
        good = got == want
        ok &= good
        out.write(f"{'PASS' if good else 'FAIL'} {name}: {got}\n")
    return ok


def verify_orthogonality(pipe: Pipeline, out) -> bool:
    tables = [("spin8", pipe.green("spin8")), ("levi124 split", pipe.green("levi124", "split")),
              ("levi124 twisted", pipe.green("levi124", "twisted"))]
    sl2 = pipe.green("sl2")
    tables += [(f"sl2 {t}", sl2_columns(sl2, t)) for t in ("split", "nonsplit")]
    ok = True
    for name, t in tables:
        bad = gf.verify_orthogonality(t)
        ok &= not bad
        out.write(f"{'PASS' if not bad else 'FAIL'} orthogonality {name}: {len(t.cols)} functions\n")
        for v in bad[:5]:
            out.write(f"  {v}\n")
    return ok


def verify_self_induction(pipe: Pipeline, out) -> bool:
    ok = True
    for name, t in [("sl2", pipe.green("sl2")), ("levi124", pipe.green("levi124", "split")),
                    ("spin8", pipe.green("spin8"))]:
        good = tp.self_induction_check(t)
        ok &= good
        n = len(t.rows)
        out.write(f"{'PASS' if good else 'FAIL'} self-induction {name}: identity {n}x{n}\n")
    return ok


def verify_signs(pipe: Pipeline, out) -> bool:
    try:
        s = pipe.signs()
    except tp.TwoParamError as exc:
        out.write(f"FAIL signs: {exc}\n")
        return False
    r1, r3 = s.for_residue(1), s.for_residue(3)
    for name in sorted(r1):
        if r1[name] == r3[name]:
            out.write(f"{name} = {r1[name]:+d}\n")
        else:
            out.write(f"{name} = {r1[name]:+d} for q = 1 mod 4, {r3[name]:+d} for q = 3 mod 4\n")
    out.write("PASS signs: unique surviving assignment per residue\n")
    return True


VERIFIERS = {
    "counts": verify_counts,
    "orthogonality": verify_orthogonality,
    "self-induction": verify_self_induction,
    "signs": verify_signs,
}


def cmd_verify(args, out) -> int:
    pipe = Pipeline(args.data_dir)
    names = list(VERIFIERS) if args.what == "all" else [args.what]
    ok = True
    for n in names:
        ok &= VERIFIERS[n](pipe, out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greenfn", description="Green functions and two-parameter Green functions")
    p.add_argument("--data-dir", help="directory with the JSON data files (default: packaged data, or $GREENFN_DATA)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("ascii", "csv", "json")):
        sp.add_argument("--format", choices=formats, default="ascii")
        sp.add_argument("--import-table", help="GreenTable JSON to use instead of computing the group's table")
        sp.add_argument("--data-dir", default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    g = sub.add_parser("green", help="Green function table of a group")
    g.add_argument("--group", choices=["spin8", "sl2", "levi124"], default="spin8")
    g.add_argument("--twist", choices=["split", "nonsplit", "twisted"])
    common(g)

    t = sub.add_parser("twoparam", help="two-parameter Green functions of a Levi subgroup of Spin8")
    t.add_argument("--levi", default="124")
    t.add_argument("--twist", choices=["split", "twisted", "nonsplit"], default="split")
    mode = t.add_mutually_exclusive_group()
    mode.add_argument("--resolve", action="store_true", help="substitute every sign")
    mode.add_argument("--symbolic", action="store_true", help="keep residue-dependent signs (default)")
    t.add_argument("--residue", type=int, choices=[1, 3], help="q mod 4 for --resolve")
    common(t)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("what", choices=list(VERIFIERS) + ["all"])
    v.add_argument("--data-dir", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "green":
            return cmd_green(args, out)
        if args.command == "twoparam":
            return cmd_twoparam(args, out)
        return cmd_verify(args, out)
    except UsageError as exc:
        sys.stderr.write(f"greenfn: {exc}\n")
        return EXIT_USAGE
    except (gd.DataError, json.JSONDecodeError, FileNotFoundError) as exc:
        sys.stderr.write(f"greenfn: data error: {exc}\n")
        return EXIT_DATA
    except (gf.GreenError, tp.TwoParamError, SymringError) as exc:
        sys.stderr.write(f"greenfn: validation failed: {exc}\n")
        return EXIT_FAIL


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
