"""Spec-file ingestion: one JSON document describes one base space plus
charts, bundles, forms, sections, witnesses and tasks.

Top-level keys: "version", "base", "charts", "bundles", "forms",
"sections", "witnesses", "tasks".  Expressions are infix text in the
parser's grammar; conditions are [expression, op] pairs with op in
">", ">=", "==", "<", "<=" (the last two negate the expression).

The parsed document keeps the raw JSON structure, so serializing and
reparsing reproduces an identical document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import expr as ex
from .bundles import BundleRep, MorphismField, SectionRep
from .catalog import circle_base, cylinder_base, line_base, plane_base, point_base
from .errors import (
    DimensionMismatch,
    SpecParseError,
    UnresolvedReference,
)
from .exprparse import parse_expression
from .forms import FormField
from .semialg import (
    Base,
    CircleGeometry,
    Condition,
    Cover,
    SemialgebraicSet,
    expr_to_polynomial,
)
from .errors import NotPolynomial

_CATALOG_BASES = {
    "point": point_base,
    "line": line_base,
    "plane": plane_base,
    "circle": circle_base,
    "circle-cylinder": lambda: cylinder_base(circle_base()),
    "plane-cylinder": lambda: cylinder_base(plane_base()),
    "line-cylinder": lambda: cylinder_base(line_base()),
}

_KNOWN_OPS = {
    "validate-bundle", "validate-form", "invariants", "signature",
    "decompose", "line-class", "homotopy-iso", "homotopy-isometry",
    "trivialize", "witt-zero", "roundtrip-k0", "roundtrip-witt",
    "check-witness",
}


@dataclass
class SpecDocument:
    raw: dict
    base: Base
    charts: dict = field(default_factory=dict)
    bundles: dict = field(default_factory=dict)
    forms: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=1) + "\n"


def parse_spec(text: str) -> SpecDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecParseError(f"invalid JSON: {err.msg}", line=err.lineno,
                             column=err.colno) from err
    if not isinstance(raw, dict):
        raise SpecParseError("spec document must be a JSON object")
    unknown = set(raw) - {"version", "base", "charts", "bundles", "forms",
                          "sections", "witnesses", "tasks"}
    if unknown:
        raise SpecParseError(f"unknown top-level keys: {sorted(unknown)}")
    base = _parse_base(raw.get("base", {"catalog": "line"}))
    doc = SpecDocument(raw=raw, base=base)
    dim, t_index = base.dim, base.t_index

    def compile_expr(text_expr, where):
        try:
            return parse_expression(str(text_expr), dim, t_index)
        except SpecParseError as err:
            raise SpecParseError(f"{where}: {err}", column=err.column) from err

    for name, conds in (raw.get("charts") or {}).items():
        doc.charts[name] = _parse_set(conds, dim, compile_expr,
                                      where=f"chart {name}", open_only=True)

    for name, decl in (raw.get("bundles") or {}).items():
        doc.bundles[name] = _parse_bundle(name, decl, doc, compile_expr)

    for name, decl in (raw.get("forms") or {}).items():
        doc.forms[name] = _parse_form(name, decl, doc, compile_expr)

    for name, decl in (raw.get("sections") or {}).items():
        doc.sections[name] = _parse_section(name, decl, doc, compile_expr)

    for name, decl in (raw.get("witnesses") or {}).items():
        doc.witnesses[name] = _parse_witness(name, decl, doc, compile_expr)

    for task in raw.get("tasks") or []:
        doc.tasks.append(_check_task(task, doc))
    return doc


def _parse_base(decl) -> Base:
    if "catalog" in decl:
        name = decl["catalog"]
        if name not in _CATALOG_BASES:
            raise UnresolvedReference(f"unknown catalog base {name!r}")
        return _CATALOG_BASES[name]()
    try:
        dim = int(decl["dim"])
        box = tuple(tuple(float(v) for v in pair) for pair in decl["box"])
    except KeyError as err:
        raise SpecParseError(f"base declaration missing {err}") from err
    if len(box) != dim:
        raise DimensionMismatch("box length must equal the dimension")

    def compile_expr(text_expr, where):
        return parse_expression(str(text_expr), dim, None)

    sset = _parse_set(decl.get("conditions", []), dim, compile_expr,
                      where="base", open_only=False)
    if not decl.get("conditions"):
        sset = SemialgebraicSet.whole_space(dim)
    circle = CircleGeometry(0, 1) if decl.get("circle") else None
    star = decl.get("star_center")
    return Base(
        sset, box,
        name=str(decl.get("name", "custom")),
        connected=bool(decl.get("connected", True)),
        star_center=None if star is None else tuple(float(v) for v in star),
        circle=circle,
    )


def _parse_set(conds, dim, compile_expr, where, open_only):
    # a flat list of [expr, op] pairs is one piece; a list of lists of
    # pairs is a union of pieces
    if conds and conds and isinstance(conds[0], (list, tuple)) \
            and conds[0] and isinstance(conds[0][0], (list, tuple)):
        pieces_in = conds
    else:
        pieces_in = [conds]
    pieces = []
    for piece in pieces_in:
        out = []
        for item in piece:
            if not (isinstance(item, (list, tuple)) and len(item) == 2):
                raise SpecParseError(f"{where}: conditions are [expr, op] pairs")
            text_expr, op = item
            node = compile_expr(text_expr, where)
            if op in ("<", "<="):
                node = ex.Sub(ex.Const(0.0), node)
                op = ">" if op == "<" else ">="
            if op not in (">", ">=", "=="):
                raise SpecParseError(f"{where}: unknown condition op {op!r}")
            if open_only and op != ">":
                raise SpecParseError(f"{where}: charts need strict conditions")
            try:
                poly = expr_to_polynomial(node, dim)
            except NotPolynomial:
                poly = None
            out.append(Condition(node, op, poly))
        pieces.append(out)
    return SemialgebraicSet(dim, pieces)


def _chart_list(decl, doc, where):
    names = decl.get("charts")
    if not names:
        raise SpecParseError(f"{where}: missing chart list")
    charts = []
    for n in names:
        if n not in doc.charts:
            raise UnresolvedReference(f"{where}: unknown chart {n!r}")
        charts.append(doc.charts[n])
    return list(names), charts


def _parse_matrix(rows, rank_rows, rank_cols, compile_expr, where):
    if len(rows) != rank_rows or any(len(r) != rank_cols for r in rows):
        raise DimensionMismatch(f"{where}: expected a {rank_rows}x{rank_cols} matrix")
    return tuple(tuple(compile_expr(e, where) for e in row) for row in rows)


def _parse_bundle(name, decl, doc, compile_expr) -> BundleRep:
    where = f"bundle {name}"
    rank = int(decl.get("rank", -1))
    if rank < 0:
        raise SpecParseError(f"{where}: missing rank")
    chart_names, charts = _chart_list(decl, doc, where)
    cover = Cover(doc.base, charts, name=f"{name}-cover")
    transitions = {}
    for key, rows in (decl.get("transitions") or {}).items():
        pair = [s.strip() for s in key.split(",")]
        if len(pair) != 2:
            raise SpecParseError(f"{where}: transition keys are 'A,B'")
        try:
            i, j = chart_names.index(pair[0]), chart_names.index(pair[1])
        except ValueError as err:
            raise UnresolvedReference(f"{where}: unknown chart in {key!r}") from err
        transitions[(i, j)] = _parse_matrix(rows, rank, rank, compile_expr,
                                            f"{where} transition {key}")
    bundle = BundleRep(cover, rank, transitions, name=name,
                       default_identity=not transitions)
    bundle.chart_names = chart_names
    return bundle


def _resolve_bundle(decl, doc, where) -> BundleRep:
    ref = decl.get("bundle")
    if ref not in doc.bundles:
        raise UnresolvedReference(f"{where}: unknown bundle {ref!r}")
    return doc.bundles[ref]


def _parse_form(name, decl, doc, compile_expr) -> FormField:
    where = f"form {name}"
    bundle = _resolve_bundle(decl, doc, where)
    d = bundle.rank
    n_upper = d * (d + 1) // 2
    uppers = []
    upper_decl = decl.get("upper") or {}
    for chart_name in bundle.chart_names:
        if chart_name not in upper_decl:
            raise UnresolvedReference(f"{where}: missing entries for chart "
                                      f"{chart_name!r}")
        entries = upper_decl[chart_name]
        if len(entries) != n_upper:
            raise DimensionMismatch(
                f"{where}: chart {chart_name!r} needs {n_upper} upper entries")
        uppers.append([compile_expr(e, where) for e in entries])
    form = FormField.from_upper(bundle, uppers, name=name)
    return form


def _parse_section(name, decl, doc, compile_expr) -> SectionRep:
    where = f"section {name}"
    bundle = _resolve_bundle(decl, doc, where)
    values = []
    value_decl = decl.get("values") or {}
    for chart_name in bundle.chart_names:
        if chart_name not in value_decl:
            raise UnresolvedReference(f"{where}: missing values for chart "
                                      f"{chart_name!r}")
        entries = value_decl[chart_name]
        if len(entries) != bundle.rank:
            raise DimensionMismatch(f"{where}: values must have length "
                                    f"{bundle.rank}")
        values.append(tuple((compile_expr(e, where),) for e in entries))
    return SectionRep(bundle, values)


def _parse_witness(name, decl, doc, compile_expr) -> MorphismField:
    where = f"witness {name}"
    for key in ("source", "target"):
        if decl.get(key) not in doc.bundles:
            raise UnresolvedReference(f"{where}: unknown {key} bundle")
    source = doc.bundles[decl["source"]]
    target = doc.bundles[decl["target"]]
    if source.chart_names != target.chart_names:
        raise UnresolvedReference(f"{where}: source and target must share charts")
    if source.cover is not target.cover:
        target = BundleRep(source.cover, target.rank, target.transitions,
                           name=target.name,
                           default_identity=target.default_identity)
        target.chart_names = source.chart_names
        doc.bundles[decl["target"]] = target
    fields = []
    field_decl = decl.get("fields") or {}
    for chart_name in source.chart_names:
        if chart_name not in field_decl:
            raise UnresolvedReference(f"{where}: missing field for chart "
                                      f"{chart_name!r}")
        fields.append(_parse_matrix(field_decl[chart_name], target.rank,
                                    source.rank, compile_expr, where))
    return MorphismField(source, target, fields)


def _check_task(task, doc) -> dict:
    if not isinstance(task, dict) or "op" not in task:
        raise SpecParseError("tasks are objects with an 'op' key")
    op = task["op"]
    if op not in _KNOWN_OPS:
        raise SpecParseError(f"unknown task op {op!r}")
    for key, table in (("bundle", doc.bundles), ("form", doc.forms),
                       ("section", doc.sections), ("witness", doc.witnesses)):
        if key in task and task[key] not in table:
            raise UnresolvedReference(f"task {op}: unknown {key} {task[key]!r}")
    return dict(task)
