"""Batch front end for Hochschild cohomology problem files.

A problem file is one YAML document naming a ground field, algebras,
bimodules, and the wiring between them (a Q-set or a zero-product square),
plus a requested command and degree caps.  Commands print a plain-text table
on stdout; `--report PATH` additionally writes a JSON report whose bytes
depend only on the input document and the schema version.

Exit codes: 0 success, 1 bad input, 2 computation budget exceeded,
3 internal consistency failure.
"""

import argparse
import json
import sys
from fractions import Fraction

import yaml

from .algebras import algebra_from_structure_constants, field_algebra, truncated_polynomial
from .bimodules import (
    bimodule_from_actions,
    free_corner_bimodule,
    free_rank_one_bimodule,
    regular_bimodule,
    zero_bimodule,
)
from .complexes import (
    DEFAULT_BUDGET,
    along_path_complex,
    bar_hochschild,
    cohomology,
    relative_complex,
)
from .errors import (
    BudgetExceeded,
    ConsistencyError,
    InputError,
    NotProjective,
    ParseError,
    QuiverHHError,
    TorHypothesisFails,
)
from .fields import format_rational, parse_coefficient, parse_field, parse_rational
from .homalg import along_path_via_ext, ext_bimodule, tor_vanishing
from .presentations import RewritePresentation, algebra_from_presentation
from .qset import QSet, assemble_lambda, solve_associativity
from .quiver import QPath, Quiver
from .sparse import SparseMatrix
from .structure import (
    PeirceSquareQuiver,
    connecting_agreement,
    cup_annihilation_check,
    efficient_cycles,
    five_term,
    long_exact_sequence,
    null_square,
    null_square_hh,
    square_module,
    square_qset,
    tensor_nilpotence,
)

SCHEMA_VERSION = 1
COMMANDS = ("hh", "hh-relative", "along-path", "les", "square", "peirce",
            "solve-assoc", "verify")
TOP_KEYS = {"format", "title", "field", "q", "command", "max_degree", "budget",
            "algebras", "bimodules", "qset", "square", "peirce", "path", "target"}


# -- low-level schema helpers --------------------------------------------------


def _fail(message, where):
    raise ParseError(message, position=where)


def _mapping(value, where):
    if not isinstance(value, dict):
        _fail("expected a mapping", where)
    return value


def _sequence(value, where):
    if not isinstance(value, list):
        _fail("expected a list", where)
    return value


def _label(value, where):
    if value is None or isinstance(value, (bool, float, list, dict)):
        _fail(f"expected a name, got {value!r}", where)
    return str(value)


def _int(value, where, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(f"expected an integer >= {minimum}, got {value!r}", where)
    return value


def _only(spec, allowed, required, where):
    for key in spec:
        if key not in allowed:
            _fail(f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})", where)
    for key in required:
        if key not in spec:
            _fail(f"missing required key {key!r}", where)


# -- the parsed model ----------------------------------------------------------


class Problem:
    """A fully resolved problem file plus its canonical document.

    The canonical document is a plain tree of strings and integers that
    serializes deterministically and re-parses to an equal model.
    """

    def __init__(self):
        self.document = {}
        self.title = None
        self.field = parse_field("rationals")
        self.q = None
        self.command = None
        self.max_degree = None
        self.budget = None
        self.algebras = {}
        self.algebra_quivers = {}
        self.bimodules = {}
        self.qset = None
        self.square = None
        self.square_names = None
        self.peirce = None
        self.path_labels = None
        self.target = None


def _coeff(problem, value, where):
    """Parse a scalar that may mention q; return (field element, spelling)."""
    try:
        frac = parse_coefficient(value, problem.q)
    except InputError as exc:
        _fail(str(exc), where)
    if isinstance(value, str) and "q" in value:
        return problem.field.of(frac), value.strip()
    return problem.field.of(frac), format_rational(frac)


def _coords(problem, value, index_of, where):
    """A label-keyed coordinate mapping -> (index-keyed dict, canonical dict)."""
    value = _mapping(value, where)
    vec, canon = {}, {}
    for key in value:
        lab = _label(key, where)
        if lab not in index_of:
            _fail(f"unknown basis label {lab!r}", where)
        elem, text = _coeff(problem, value[key], f"{where}[{lab}]")
        if elem != problem.field.zero:
            vec[index_of[lab]] = elem
        canon[lab] = text
    return vec, canon


def _quiver(spec, where):
    _only(spec, {"vertices", "arrows"}, {"vertices"}, where)
    vertices = [_label(v, f"{where}.vertices")
                for v in _sequence(spec["vertices"], f"{where}.vertices")]
    arrows, canon_arrows = [], []
    for item in _sequence(spec.get("arrows", []), f"{where}.arrows"):
        item = _sequence(item, f"{where}.arrows")
        if len(item) != 3:
            _fail("each arrow is a [label, source, target] triple", f"{where}.arrows")
        triple = tuple(_label(x, f"{where}.arrows") for x in item)
        arrows.append(triple)
        canon_arrows.append(list(triple))
    try:
        quiver = Quiver(vertices, arrows)
    except InputError as exc:
        _fail(str(exc), where)
    canon = {"vertices": vertices}
    if canon_arrows:
        canon["arrows"] = canon_arrows
    return quiver, canon


def _word(text, where):
    parts = tuple(_label(text, where).split())
    if not parts:
        _fail("empty word", where)
    return parts


def _build_algebra(problem, name, spec):
    where = f"algebras.{name}"
    spec = _mapping(spec, where)
    kind = _label(spec.get("kind"), f"{where}.kind")
    if kind == "field":
        _only(spec, {"kind", "label"}, set(), where)
        label = _label(spec.get("label", "1"), f"{where}.label")
        alg = field_algebra(problem.field, label)
        return alg, Quiver([name], []), {"kind": "field", "label": label}
    if kind == "truncated":
        _only(spec, {"kind", "n", "var"}, set(), where)
        n = _int(spec.get("n", 2), f"{where}.n", 1)
        var = _label(spec.get("var", "t"), f"{where}.var")
        alg = truncated_polynomial(problem.field, n, var)
        return alg, None, {"kind": "truncated", "n": n, "var": var}
    if kind == "presentation":
        _only(spec, {"kind", "vertices", "arrows", "relations", "cap"},
              {"vertices"}, where)
        quiver, qcanon = _quiver({"vertices": spec["vertices"],
                                  "arrows": spec.get("arrows", [])}, where)
        rules, canon_rules = [], []
        for i, rel in enumerate(_sequence(spec.get("relations", []),
                                          f"{where}.relations")):
            rwhere = f"{where}.relations[{i}]"
            rel = _mapping(rel, rwhere)
            _only(rel, {"reduce", "to"}, {"reduce"}, rwhere)
            lead = _word(rel["reduce"], f"{rwhere}.reduce")
            combo, canon_combo = {}, {}
            for wtext in _mapping(rel.get("to", {}), f"{rwhere}.to"):
                word = _word(wtext, f"{rwhere}.to")
                elem, text = _coeff(problem, rel["to"][wtext], f"{rwhere}.to")
                combo[word] = elem
                canon_combo[" ".join(word)] = text
            rules.append((lead, combo))
            canon_rules.append({"reduce": " ".join(lead), "to": canon_combo})
        cap = _int(spec.get("cap", 10), f"{where}.cap", 1)
        try:
            pres = RewritePresentation(quiver, rules, cap=cap, field=problem.field)
            alg = algebra_from_presentation(pres)
        except InputError as exc:
            _fail(str(exc), where)
        canon = dict(qcanon)
        canon["kind"] = "presentation"
        if canon_rules:
            canon["relations"] = canon_rules
        if cap != 10:
            canon["cap"] = cap
        return alg, quiver, canon
    if kind == "table":
        _only(spec, {"kind", "labels", "products", "unit", "system"},
              {"labels", "unit", "system"}, where)
        labels = [_label(x, f"{where}.labels")
                  for x in _sequence(spec["labels"], f"{where}.labels")]
        if len(set(labels)) != len(labels):
            _fail("duplicate basis labels", f"{where}.labels")
        index_of = {lab: i for i, lab in enumerate(labels)}
        table = [[{} for _ in labels] for _ in labels]
        canon_products = {}
        for key in _mapping(spec.get("products", {}), f"{where}.products"):
            word = _word(key, f"{where}.products")
            if len(word) != 2 or word[0] not in index_of or word[1] not in index_of:
                _fail(f"product key {key!r} must name two basis labels",
                      f"{where}.products")
            vec, canon = _coords(problem, spec["products"][key], index_of,
                                 f"{where}.products[{key}]")
            table[index_of[word[0]]][index_of[word[1]]] = vec
            canon_products[" ".join(word)] = canon
        unit, canon_unit = _coords(problem, spec["unit"], index_of, f"{where}.unit")
        system, canon_system = [], []
        for i, ent in enumerate(_sequence(spec["system"], f"{where}.system")):
            vec, canon = _coords(problem, ent, index_of, f"{where}.system[{i}]")
            system.append(vec)
            canon_system.append(canon)
        alg = algebra_from_structure_constants(problem.field, labels, table,
                                               unit, system)
        canon = {"kind": "table", "labels": labels, "unit": canon_unit,
                 "system": canon_system}
        if canon_products:
            canon["products"] = canon_products
        return alg, None, canon
    _fail(f"unknown algebra kind {kind!r}", f"{where}.kind")


def _algebra_ref(problem, spec, key, where):
    name = _label(spec.get(key), f"{where}.{key}")
    if name not in problem.algebras:
        _fail(f"unknown algebra {name!r}", f"{where}.{key}")
    return name


def _vertex_index(problem, alg_name, value, where):
    alg = problem.algebras[alg_name]
    count = len(alg.system)
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value < count:
            _fail(f"vertex index {value} out of range 0..{count - 1}", where)
        return value, value
    lab = _label(value, where)
    quiver = problem.algebra_quivers.get(alg_name)
    if quiver is None:
        _fail(f"algebra {alg_name!r} has no vertex labels; use an index", where)
    if lab not in quiver.vertices:
        _fail(f"unknown vertex {lab!r} of algebra {alg_name!r}", where)
    return quiver.vertices.index(lab), lab


def _matrix(problem, value, dim, where):
    rows = _sequence(value, where)
    if len(rows) != dim:
        _fail(f"expected {dim} rows", where)
    entries = []
    canon = []
    for r, row in enumerate(rows):
        row = _sequence(row, f"{where}[{r}]")
        if len(row) != dim:
            _fail(f"expected {dim} columns", f"{where}[{r}]")
        canon_row = []
        for c, cell in enumerate(row):
            elem, text = _coeff(problem, cell, f"{where}[{r}][{c}]")
            if elem != problem.field.zero:
                entries.append((r, c, elem))
            canon_row.append(text)
        canon.append(canon_row)
    return SparseMatrix(problem.field, dim, dim, entries), canon


def _build_bimodule(problem, name, spec):
    where = f"bimodules.{name}"
    spec = _mapping(spec, where)
    kind = _label(spec.get("kind"), f"{where}.kind")
    if kind == "free-rank-one":
        _only(spec, {"kind", "left", "right"}, {"left", "right"}, where)
        ln = _algebra_ref(problem, spec, "left", where)
        rn = _algebra_ref(problem, spec, "right", where)
        mod = free_rank_one_bimodule(problem.algebras[ln], problem.algebras[rn])
        return mod, {"kind": "free-rank-one", "left": ln, "right": rn}
    if kind == "free-corner":
        _only(spec, {"kind", "left", "right", "left_vertex", "right_vertex"},
              {"left", "right", "left_vertex", "right_vertex"}, where)
        ln = _algebra_ref(problem, spec, "left", where)
        rn = _algebra_ref(problem, spec, "right", where)
        f_idx, f_canon = _vertex_index(problem, ln, spec["left_vertex"],
                                       f"{where}.left_vertex")
        e_idx, e_canon = _vertex_index(problem, rn, spec["right_vertex"],
                                       f"{where}.right_vertex")
        mod = free_corner_bimodule(problem.algebras[ln], f_idx, e_idx,
                                   problem.algebras[rn])
        return mod, {"kind": "free-corner", "left": ln, "right": rn,
                     "left_vertex": f_canon, "right_vertex": e_canon}
    if kind == "zero":
        _only(spec, {"kind", "left", "right"}, {"left", "right"}, where)
        ln = _algebra_ref(problem, spec, "left", where)
        rn = _algebra_ref(problem, spec, "right", where)
        mod = zero_bimodule(problem.algebras[ln], problem.algebras[rn])
        return mod, {"kind": "zero", "left": ln, "right": rn}
    if kind == "regular":
        _only(spec, {"kind", "algebra"}, {"algebra"}, where)
        an = _algebra_ref(problem, spec, "algebra", where)
        return regular_bimodule(problem.algebras[an]), \
            {"kind": "regular", "algebra": an}
    if kind == "matrices":
        _only(spec, {"kind", "left", "right", "dim", "left_action", "right_action"},
              {"left", "right", "dim", "left_action", "right_action"}, where)
        ln = _algebra_ref(problem, spec, "left", where)
        rn = _algebra_ref(problem, spec, "right", where)
        dim = _int(spec["dim"], f"{where}.dim", 0)
        left_alg, right_alg = problem.algebras[ln], problem.algebras[rn]
        acts = {}
        canon = {"kind": "matrices", "left": ln, "right": rn, "dim": dim}
        for side, alg in (("left_action", left_alg), ("right_action", right_alg)):
            mats = _sequence(spec[side], f"{where}.{side}")
            if len(mats) != alg.dim:
                _fail(f"expected one {dim}x{dim} matrix per basis element "
                      f"({alg.dim} of them)", f"{where}.{side}")
            built, canon_mats = [], []
            for i, m in enumerate(mats):
                mat, cm = _matrix(problem, m, dim, f"{where}.{side}[{i}]")
                built.append(mat)
                canon_mats.append(cm)
            acts[side] = built
            canon[side] = canon_mats
        mod = bimodule_from_actions(left_alg, right_alg, dim,
                                    acts["left_action"], acts["right_action"])
        return mod, canon
    _fail(f"unknown bimodule kind {kind!r}", f"{where}.kind")


def _build_qset(problem, spec):
    where = "qset"
    spec = _mapping(spec, where)
    _only(spec, {"vertices", "arrows", "algebras", "bimodules"},
          {"vertices", "algebras"}, where)
    quiver, qcanon = _quiver({"vertices": spec["vertices"],
                              "arrows": spec.get("arrows", [])}, where)
    algebra_at, canon_algs = {}, {}
    for key in _mapping(spec["algebras"], f"{where}.algebras"):
        v = _label(key, f"{where}.algebras")
        name = _algebra_ref(problem, spec["algebras"], key, f"{where}.algebras")
        algebra_at[v] = problem.algebras[name]
        canon_algs[v] = name
    bimodule_at, canon_mods = {}, {}
    for key in _mapping(spec.get("bimodules", {}), f"{where}.bimodules"):
        a = _label(key, f"{where}.bimodules")
        name = _label(spec["bimodules"][key], f"{where}.bimodules")
        if name not in problem.bimodules:
            _fail(f"unknown bimodule {name!r}", f"{where}.bimodules")
        bimodule_at[a] = problem.bimodules[name]
        canon_mods[a] = name
    qset = QSet(quiver, algebra_at, bimodule_at)
    canon = dict(qcanon)
    canon["algebras"] = canon_algs
    if canon_mods:
        canon["bimodules"] = canon_mods
    return qset, canon


def _build_square(problem, spec):
    where = "square"
    spec = _mapping(spec, where)
    _only(spec, {"A", "B", "M", "N"}, {"A", "B", "M", "N"}, where)
    an = _algebra_ref(problem, spec, "A", where)
    bn = _algebra_ref(problem, spec, "B", where)
    names = {}
    for key in ("M", "N"):
        name = _label(spec[key], f"{where}.{key}")
        if name not in problem.bimodules:
            _fail(f"unknown bimodule {name!r}", f"{where}.{key}")
        names[key] = name
    sq = null_square(problem.algebras[an], problem.algebras[bn],
                     problem.bimodules[names["M"]], problem.bimodules[names["N"]])
    canon = {"A": an, "B": bn, "M": names["M"], "N": names["N"]}
    return sq, (an, bn, names["M"], names["N"]), canon


def _floor_quiver(problem, alg_name, explicit, where):
    if explicit is not None:
        return _quiver(_mapping(explicit, where), where)
    quiver = problem.algebra_quivers.get(alg_name)
    if quiver is None:
        _fail(f"algebra {alg_name!r} has no presentation quiver; "
              "give an explicit floor", where)
    return quiver, None


def _build_peirce(problem, spec):
    where = "peirce"
    spec = _mapping(spec, where)
    _only(spec, {"down", "up", "floor_a", "floor_b"}, set(), where)
    if problem.square is None:
        _fail("the peirce section needs a square section", where)
    an, bn = problem.square_names[0], problem.square_names[1]
    floor_a, canon_a = _floor_quiver(problem, an, spec.get("floor_a"),
                                     f"{where}.floor_a")
    floor_b, canon_b = _floor_quiver(problem, bn, spec.get("floor_b"),
                                     f"{where}.floor_b")
    canon = {}
    verticals = {}
    for side in ("down", "up"):
        pairs, canon_list = {}, []
        for item in _sequence(spec.get(side, []), f"{where}.{side}"):
            item = _sequence(item, f"{where}.{side}")
            if len(item) == 2:
                item = item + [1]
            if len(item) != 3:
                _fail("each vertical is [source, target] or "
                      "[source, target, multiplicity]", f"{where}.{side}")
            s = _label(item[0], f"{where}.{side}")
            t = _label(item[1], f"{where}.{side}")
            mult = _int(item[2], f"{where}.{side}", 0)
            pairs[(s, t)] = pairs.get((s, t), 0) + mult
            canon_list.append([s, t, mult])
        verticals[side] = pairs
        if canon_list:
            canon[side] = canon_list
    pq = PeirceSquareQuiver(floor_a, floor_b, verticals["down"], verticals["up"])
    if canon_a is not None:
        canon["floor_a"] = canon_a
    if canon_b is not None:
        canon["floor_b"] = canon_b
    return pq, canon


def problem_from_document(doc) -> Problem:
    problem = Problem()
    if doc is None:
        raise ParseError("empty problem file")
    _mapping(doc, "problem file")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        _fail(f"unknown keys {sorted(map(str, unknown))}", "problem file")
    if doc.get("format") != 1:
        raise ParseError("missing or unsupported format (expected `format: 1`)")
    canon = {"format": 1}

    field_text = _label(doc.get("field", "rationals"), "field")
    try:
        problem.field = parse_field(field_text)
    except InputError as exc:
        _fail(str(exc), "field")
    canon["field"] = problem.field.describe()
    if "q" in doc:
        value = doc["q"]
        if isinstance(value, int) and not isinstance(value, bool):
            problem.q = Fraction(value)
        else:
            try:
                problem.q = parse_rational(_label(value, "q"))
            except InputError as exc:
                _fail(str(exc), "q")
        canon["q"] = format_rational(problem.q)
    if "title" in doc:
        problem.title = _label(doc["title"], "title")
        canon["title"] = problem.title
    if "command" in doc:
        problem.command = _label(doc["command"], "command")
        if problem.command not in COMMANDS:
            _fail(f"unknown command {problem.command!r} "
                  f"(expected one of {', '.join(COMMANDS)})", "command")
        canon["command"] = problem.command
    if "max_degree" in doc:
        problem.max_degree = _int(doc["max_degree"], "max_degree", 0)
        canon["max_degree"] = problem.max_degree
    if "budget" in doc:
        problem.budget = _int(doc["budget"], "budget", 1)
        canon["budget"] = problem.budget

    if "algebras" in doc:
        canon_algs = {}
        for key in _mapping(doc["algebras"], "algebras"):
            name = _label(key, "algebras")
            if name in problem.algebras:
                _fail(f"duplicate algebra name {name!r}", "algebras")
            alg, quiver, spec_canon = _build_algebra(problem, name,
                                                     doc["algebras"][key])
            problem.algebras[name] = alg
            problem.algebra_quivers[name] = quiver
            canon_algs[name] = spec_canon
        canon["algebras"] = canon_algs
    if "bimodules" in doc:
        canon_mods = {}
        for key in _mapping(doc["bimodules"], "bimodules"):
            name = _label(key, "bimodules")
            if name in problem.bimodules:
                _fail(f"duplicate bimodule name {name!r}", "bimodules")
            mod, spec_canon = _build_bimodule(problem, name, doc["bimodules"][key])
            problem.bimodules[name] = mod
            canon_mods[name] = spec_canon
        canon["bimodules"] = canon_mods
    if "qset" in doc:
        problem.qset, canon["qset"] = _build_qset(problem, doc["qset"])
    if "square" in doc:
        problem.square, problem.square_names, canon["square"] = \
            _build_square(problem, doc["square"])
    if "peirce" in doc:
        problem.peirce, canon["peirce"] = _build_peirce(problem, doc["peirce"])
    if "path" in doc:
        problem.path_labels = [_label(x, "path")
                               for x in _sequence(doc["path"], "path")]
        if not problem.path_labels:
            _fail("path must not be empty", "path")
        canon["path"] = list(problem.path_labels)
    if "target" in doc:
        problem.target = _label(doc["target"], "target")
        canon["target"] = problem.target

    problem.document = canon
    return problem


def parse_problem(text) -> Problem:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"not valid YAML: {exc}") from None
    return problem_from_document(doc)


def canonical_text(problem) -> str:
    """Serialize the canonical document; re-parsing yields an equal model."""
    return yaml.safe_dump(problem.document, sort_keys=True,
                          default_flow_style=False)


def load_problem(path, field=None, q=None) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: not valid YAML: {exc}") from None
    if field is not None or q is not None:
        _mapping(doc, "problem file")
        doc = dict(doc)
        if field is not None:
            doc["field"] = field
        if q is not None:
            doc["q"] = q
    return problem_from_document(doc)


# -- shared command plumbing ---------------------------------------------------


def _delta_of(problem) -> QSet:
    if problem.qset is not None:
        return problem.qset
    if problem.square is not None:
        return square_qset(problem.square)
    raise InputError("this command needs a `qset` or `square` section")


def _target_of(problem):
    if problem.target is not None:
        if problem.target in problem.algebras:
            return problem.algebras[problem.target], problem.target
        if problem.target == "lambda":
            return assemble_lambda(_delta_of(problem)), "the assembled algebra"
        raise InputError(f"unknown target {problem.target!r} "
                         "(an algebra name or `lambda`)")
    if problem.square is not None or problem.qset is not None:
        return assemble_lambda(_delta_of(problem)), "the assembled algebra"
    if len(problem.algebras) == 1:
        name = next(iter(problem.algebras))
        return problem.algebras[name], name
    raise InputError("no target algebra: give `target:` or a qset/square section")


def _bar_degree_cap(dim, n_max, budget):
    """Largest degree whose bar differential fits the budget, or -1."""
    cap = -1
    for n in range(n_max + 1):
        if dim ** (n + 2) * dim ** (n + 1) > budget:
            break
        cap = n
    return cap


def _exact_dims(result, n_max):
    dims = []
    for n, (d, ok) in enumerate(zip(result.dims, result.exact)):
        if n > n_max or not ok:
            break
        dims.append(d)
    return dims


# -- commands ------------------------------------------------------------------


def run_hh(problem, n_max, budget):
    lam, label = _target_of(problem)
    res = bar_hochschild(lam, n_max, budget=budget)
    lines = [f"Hochschild cohomology of {label} (dim {lam.dim}), "
             f"bar complex, degrees 0..{n_max}"]
    lines += [f"HH^{n} = {d}" for n, d in enumerate(res.dims)]
    return lines, {"algebra": label, "dim": lam.dim, "hh": list(res.dims)}, 0


def run_hh_relative(problem, n_max, budget):
    delta = _delta_of(problem)
    lam = assemble_lambda(delta)
    cx = relative_complex(lam, delta, n_max, budget)
    rel = _exact_dims(cohomology(cx, with_representatives=False), n_max)
    lines = [f"Hochschild cohomology of the assembled algebra (dim {lam.dim}), "
             f"trajectory-decomposed complex, degrees 0..{len(rel) - 1}"]
    lines += [f"HH^{n} = {d}" for n, d in enumerate(rel)]
    cap = min(_bar_degree_cap(lam.dim, n_max, budget), len(rel) - 1)
    if cap >= 0:
        oracle = bar_hochschild(lam, cap, budget=budget)
        if list(oracle.dims) != rel[:cap + 1]:
            raise ConsistencyError(
                f"bar complex dims {oracle.dims} disagree with the relative "
                f"complex dims {rel[:cap + 1]} in degrees 0..{cap}")
        lines.append(f"agrees with the bar complex through degree {cap}")
    else:
        lines.append("bar cross-check skipped: smallest differential over budget")
    return lines, {"dim": lam.dim, "hh": rel, "bar_checked_to": cap}, 0


def run_along_path(problem, n_max, budget):
    delta = _delta_of(problem)
    if problem.path_labels is None:
        raise InputError("along-path needs a `path:` entry "
                         "(a vertex, or arrow labels in travel order)")
    quiver = delta.quiver
    labels = problem.path_labels
    if len(labels) == 1 and labels[0] in set(quiver.vertices):
        path = QPath.at_vertex(quiver, labels[0])
    else:
        known = {a[0] for a in quiver.arrows}
        for lab in labels:
            if lab not in known:
                raise InputError(f"unknown arrow {lab!r} in path")
        path = QPath.at_vertex(quiver, quiver.source(labels[0]))
        for lab in labels:
            path = path.then(lab)
    cx = along_path_complex(delta, path, n_max, budget)
    res = cohomology(cx, with_representatives=False)
    dims = _exact_dims(res, n_max)
    lines = [f"cohomology along {path.label()} (length {path.length}), "
             f"degrees 0..{len(dims) - 1}"]
    lines += [f"H^{n} = {d}" for n, d in enumerate(dims)]
    if len(dims) <= n_max:
        lines.append(f"degrees beyond {len(dims) - 1} skipped: "
                     "differential over budget")
    results = {"path": path.label(), "length": path.length, "dims": dims}
    m = path.length
    if m == 0:
        vertex_alg = delta.algebra_at[path.source]
        cap = min(_bar_degree_cap(vertex_alg.dim, n_max, budget), len(dims) - 1)
        if cap >= 0:
            oracle = bar_hochschild(vertex_alg, cap, budget=budget)
            if list(oracle.dims) != dims[:cap + 1]:
                raise ConsistencyError("cycle complex disagrees with the bar "
                                       "complex of the vertex algebra")
            lines.append(f"equals the Hochschild cohomology of the vertex "
                         f"algebra through degree {cap}")
            results["bar_checked_to"] = cap
    elif m <= len(dims) - 1:
        if m >= 2:
            ok, where = tor_vanishing(delta, path, n_max)
            if not ok:
                i, step = where
                note = (f"Ext comparison skipped: Tor_{i} at step {step} "
                        "does not vanish")
                lines.append(note)
                results["ext_note"] = note
                return lines, results, 0
        r_max = len(dims) - 1 - m
        if m == 1:
            mod = delta.bimodule_at[path.arrows[0]]
            ext = ext_bimodule(mod, mod, r_max)
        else:
            ext = along_path_via_ext(delta, path, r_max)
        computed = dims[m:]
        if list(ext) != computed:
            raise ConsistencyError(
                f"Ext formula {ext} disagrees with the complex dims {computed} "
                f"in degrees {m}..{len(dims) - 1}")
        lines.append(f"matches the Ext formula in degrees {m}..{len(dims) - 1}")
        results["ext"] = list(ext)
    return lines, results, 0


def run_les(problem, n_max, budget):
    delta = _delta_of(problem)
    rep = long_exact_sequence(delta, n_max, budget)
    lines = ["long exact sequence: "
             "non-cycle subcomplex -> whole -> cycle quotient"]
    for n in range(n_max + 1):
        s, f, q = rep.node_dims(n)
        lines.append(f"degree {n}: H(sub) = {s}, HH = {f}, H(quot) = {q}")
    bad = [(n, lab) for n, lab, ok in rep.exact_nodes if not ok]
    if bad:
        raise ConsistencyError(f"exactness fails at {bad}")
    lines.append(f"exactness verified at {len(rep.exact_nodes)} nodes")
    for title, breakdown in (("non-cycle", rep.sub_breakdown),
                             ("cycle", rep.quot_breakdown)):
        for n in range(n_max + 1):
            parts = [f"{lab}: {d}" for lab, d in breakdown[n] if d]
            if parts:
                lines.append(f"{title} H^{n} by path: " + ", ".join(parts))
    results = {
        "sub": list(rep.sub_dims), "full": list(rep.full_dims),
        "quot": list(rep.quot_dims),
        "exact_nodes": [[n, lab, bool(ok)] for n, lab, ok in rep.exact_nodes],
        "sub_breakdown": [[[lab, d] for lab, d in bd] for bd in rep.sub_breakdown],
        "quot_breakdown": [[[lab, d] for lab, d in bd] for bd in rep.quot_breakdown],
    }
    return lines, results, 0


def run_square(problem, n_max, budget):
    if problem.square is None:
        raise InputError("the square command needs a `square` section")
    sq = problem.square
    m_max = n_max // 2
    rep = null_square_hh(sq, m_max, budget=budget)
    lines = [f"null-square closed forms, degrees 0..{2 * m_max + 1}"]
    for n, (d, part) in enumerate(zip(rep.dims, rep.parts)):
        extra = "kernel" if "kernel" in part else "cokernel"
        lines.append(f"HH^{n} = {d}  "
                     f"({part['vertex']} vertex + {part[extra]} {extra})")
    for lv in rep.levels:
        lines.append(f"commutator level {lv.level}: "
                     f"{lv.source_dim} -> {lv.target_dim}, rank {lv.rank}, "
                     f"kernel {lv.kernel_dim}, cokernel {lv.cokernel_dim}")
    ft = five_term(sq, 0, max(1, n_max), budget)
    lines.append("five-term window (m = 0): " + " -> ".join(
        f"{lab} = {d}" for lab, d in zip(ft.labels, ft.dims)))
    results = {
        "dims": list(rep.dims),
        "parts": [dict(p) for p in rep.parts],
        "levels": [{"level": lv.level, "source": lv.source_dim,
                    "target": lv.target_dim, "rank": lv.rank,
                    "kernel": lv.kernel_dim, "cokernel": lv.cokernel_dim}
                   for lv in rep.levels],
        "vertex_a": list(rep.vertex_a), "vertex_b": list(rep.vertex_b),
        "five_term": {"m": 0, "labels": list(ft.labels), "dims": list(ft.dims)},
    }
    return lines, results, 0


def run_peirce(problem, n_max, budget):
    if problem.peirce is None:
        raise InputError("the peirce command needs a `peirce` section")
    pq = problem.peirce
    lines = [f"two-floor Peirce quiver: {len(pq.quiver_e.vertices)} upper and "
             f"{len(pq.quiver_f.vertices)} lower vertices, "
             f"{pq.vertical_count()} verticals"]
    found, witness = efficient_cycles(pq)
    results = {"efficient_cycle": bool(found),
               "witness": list(witness) if witness else None}
    summary = (f"efficient cycle: {' '.join(witness)}" if found
               else "no efficient cycles")
    if problem.square is not None:
        prod, mod = square_module(problem.square)
        cap = max(1, pq.vertical_count() * pq.vertex_count())
        h = tensor_nilpotence(prod, mod, cap)
        if found != (h is None):
            raise InputError(
                "peirce section contradicts the square: efficient cycles and "
                "tensor nilpotence must exclude each other")
        summary += f"; h = {h}" if h is not None else \
            f"; tensor powers nonzero through {cap}"
        results["h"] = h
        results["h_cap"] = cap
    lines.append(summary)
    return lines, results, 0


def run_solve_assoc(problem, n_max, budget):
    if problem.square is None:
        raise InputError("solve-assoc needs a `square` section naming A, B, M, N")
    sq = problem.square
    sol = solve_associativity(sq.A, sq.B, sq.M, sq.N)
    lines = ["associativity constraints on corner products "
             "(alpha, beta) for the given A, B, M, N",
             f"solution space dim = {sol.dim}"]
    return lines, {"dim": sol.dim}, 0


def run_verify(problem, n_max, budget):
    checks = []
    delta = problem.qset if problem.qset is not None else (
        square_qset(problem.square) if problem.square is not None else None)

    if delta is not None:
        lam = assemble_lambda(delta)
        cx = relative_complex(lam, delta, n_max, budget)

        def d_squared():
            for n in range(len(cx.diffs) - 1):
                if not cx.diffs[n + 1].matmul(cx.diffs[n]).is_zero():
                    raise ConsistencyError(f"d_{n + 1} d_{n} != 0")
            return True
        checks.append(("differentials compose to zero", d_squared))

        def bar_agreement():
            rel = _exact_dims(cohomology(cx, with_representatives=False), n_max)
            cap = min(_bar_degree_cap(lam.dim, n_max, budget), len(rel) - 1)
            if cap < 0:
                raise BudgetExceeded(lam.dim ** 3, lam.dim ** 2, budget,
                                     "bar differential d_1")
            oracle = bar_hochschild(lam, cap, budget=budget)
            if list(oracle.dims) != rel[:cap + 1]:
                raise ConsistencyError(f"bar {oracle.dims} != relative "
                                       f"{rel[:cap + 1]}")
            return True
        checks.append(("bar oracle agrees with the relative complex", bar_agreement))

        checks.append(("long exact sequence is exact at every node",
                       lambda: not any(
                           not ok for _, _, ok in
                           long_exact_sequence(delta, n_max, budget).exact_nodes)))
        cup_cap = max(1, min(n_max, 3))
        checks.append(("cup products: unit, annihilation, projection",
                       lambda: bool(cup_annihilation_check(delta, cup_cap, budget))))
        checks.append(("connecting map: snake matches the commutator formula",
                       lambda: connecting_agreement(delta, cup_cap, budget)))

        def arrow_ext():
            r_max = max(0, min(n_max - 1, 3))
            for label, _, _ in delta.quiver.arrows:
                path = QPath(delta.quiver, (label,))
                acx = along_path_complex(delta, path, r_max + 1, budget)
                dims = _exact_dims(cohomology(acx, with_representatives=False),
                                   r_max + 1)
                mod = delta.bimodule_at[label]
                ext = ext_bimodule(mod, mod, len(dims) - 2)
                if dims[1:] != list(ext):
                    raise ConsistencyError(
                        f"arrow {label}: H dims {dims[1:]} != Ext {ext}")
            return True
        checks.append(("arrow cohomology matches Ext of the arrow bimodule",
                       arrow_ext))
    else:
        lam, label = _target_of(problem)

        def bar_runs():
            cap = _bar_degree_cap(lam.dim, n_max, budget)
            if cap < 0:
                raise BudgetExceeded(lam.dim ** 3, lam.dim ** 2, budget,
                                     "bar differential d_1")
            bar_hochschild(lam, cap, budget=budget)
            return True
        checks.append((f"bar complex of {label} is a complex", bar_runs))

    if problem.square is not None:
        sq = problem.square
        checks.append(("five-term window is exact",
                       lambda: bool(five_term(sq, 0, max(1, n_max), budget))))

        def closed_forms():
            m_max = n_max // 2
            rep = null_square_hh(sq, m_max, budget=budget)
            les = long_exact_sequence(square_qset(sq), n_max, budget)
            upto = min(len(rep.dims), n_max + 1)
            if rep.dims[:upto] != list(les.full_dims)[:upto]:
                raise ConsistencyError(f"closed forms {rep.dims[:upto]} != "
                                       f"complex dims {list(les.full_dims)[:upto]}")
            return True
        checks.append(("closed forms match the complex dimensions", closed_forms))

    if problem.peirce is not None and problem.square is not None:
        def cycles_vs_nilpotence():
            found, _ = efficient_cycles(problem.peirce)
            prod, mod = square_module(problem.square)
            cap = max(1, problem.peirce.vertical_count()
                      * problem.peirce.vertex_count())
            h = tensor_nilpotence(prod, mod, cap)
            if found != (h is None):
                raise ConsistencyError(f"efficient cycle {found} but h = {h}")
            return True
        checks.append(("efficient cycles match tensor nilpotence",
                       cycles_vs_nilpotence))

    lines, report, failures = [], [], 0
    for name, fn in checks:
        try:
            fn()
        except BudgetExceeded as exc:
            lines.append(f"SKIP {name} ({exc})")
            report.append({"name": name, "status": "skip", "detail": str(exc)})
            continue
        except QuiverHHError as exc:
            lines.append(f"FAIL {name}: {exc}")
            report.append({"name": name, "status": "fail", "detail": str(exc)})
            failures += 1
            continue
        lines.append(f"PASS {name}")
        report.append({"name": name, "status": "pass"})
    lines.append(f"{len(checks) - failures} of {len(checks)} checks passed")
    return lines, {"checks": report, "failures": failures}, 3 if failures else 0


RUNNERS = {
    "hh": run_hh,
    "hh-relative": run_hh_relative,
    "along-path": run_along_path,
    "les": run_les,
    "square": run_square,
    "peirce": run_peirce,
    "solve-assoc": run_solve_assoc,
    "verify": run_verify,
}


# -- entry point ---------------------------------------------------------------


def _write_report(path, command, problem, n_max, budget, results):
    payload = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "field": problem.field.describe(),
        "max_degree": n_max,
        "budget": budget,
        "results": results,
    }
    if problem.title is not None:
        payload["title"] = problem.title
    if problem.q is not None:
        payload["q"] = format_rational(problem.q)
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write report {path}: {exc}") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quiverhh",
        description="Hochschild cohomology of algebras built from "
                    "quivers with zero compositions.")
    parser.add_argument("command_or_file",
                        help="a command (%s) or a problem file whose "
                             "`command:` entry decides" % ", ".join(COMMANDS))
    parser.add_argument("file", nargs="?", default=None,
                        help="problem file (when the first argument is a command)")
    parser.add_argument("--max-degree", type=int, default=None,
                        help="top cohomological degree (default 4)")
    parser.add_argument("--field", default=None,
                        help="override the ground field: rationals or fp:P")
    parser.add_argument("--q", default=None,
                        help="override the scalar parameter q")
    parser.add_argument("--report", default=None,
                        help="also write a machine-readable JSON report here")
    parser.add_argument("--budget", type=int, default=None,
                        help="densest differential allowed, in matrix entries")
    args = parser.parse_args(argv)

    try:
        if args.file is None:
            command, path = None, args.command_or_file
        else:
            command, path = args.command_or_file, args.file
            if command not in COMMANDS:
                raise InputError(f"unknown command {command!r} "
                                 f"(expected one of {', '.join(COMMANDS)})")
        problem = load_problem(path, field=args.field, q=args.q)
        if command is None:
            command = problem.command
        if command is None:
            raise InputError("no command given on the command line and the "
                             "problem file has no `command:` entry")
        n_max = args.max_degree if args.max_degree is not None else (
            problem.max_degree if problem.max_degree is not None else 4)
        if n_max < 0:
            raise InputError("--max-degree must be nonnegative")
        budget = args.budget if args.budget is not None else (
            problem.budget if problem.budget is not None else DEFAULT_BUDGET)
        if budget < 1:
            raise InputError("--budget must be positive")
        lines, results, code = RUNNERS[command](problem, n_max, budget)
        print("\n".join(lines))
        if args.report is not None:
            _write_report(args.report, command, problem, n_max, budget, results)
        return code
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (TorHypothesisFails, NotProjective, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 3
    except QuiverHHError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
