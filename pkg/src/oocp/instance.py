"""Concrete object graphs: representation, serialization, canonicalization,
and the full-axiom validator.

``validate`` is the definitive semantics of a model: an object graph is a
solution exactly when ``validate`` reports no diagnostics.  The solver is
correct precisely because everything it emits passes this validator.

Instance files are JSON (format 1)::

    {
      "format": 1,
      "objects":   [{"ref": 1, "class": "SA", "attrs": {"begin": 0}}, ...],
      "relations": {"next": [[1, 2], [2, 3]]},
      "sequences": {"builds": {"7": [1, 2, 3]}},
      "reified":   {"worksFor": [{"pair": [1, 2], "data": 3}]},
      "pool":      [1, 2, 3],
      "closed":    ["next"],
      "partial":   true
    }

Partial inputs may name abstract classes (meaning: some concrete subtype),
omit attributes, or restrict an attribute to a set (``{"in": [1, 2]}``) or an
interval (``{"min": 0, "max": 4}``).  Mentioned tuples are lower bounds unless
the relation is listed under ``closed``; a mentioned sequence pins that
source's sequence exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import expr as _E
from .diagnostics import Diagnostic
from .errors import EvalError, LoadError
from .model import Model, check_object_table, resolve_class
from .relations import Ordering, check_relations
from .semantics import InstanceContext, ModelInfo, evaluate

_TRUE = _E.BoolLit(True)

FORMAT = 1


@dataclass(frozen=True)
class ObjectRec:
    ref: int
    cls: str
    attrs: dict

    def __hash__(self):
        return hash((self.ref, self.cls))


@dataclass
class Instance:
    """A complete object graph.

    Treated as immutable after construction; every mutation produces a new
    instance, so concurrent readers are safe.
    """

    objects: list = field(default_factory=list)  # ObjectRec, duplicates representable
    tuples: dict = field(default_factory=dict)  # relation -> set of (src, tgt)
    sequences: dict = field(default_factory=dict)  # relation -> {src: tuple of tgt}
    reified: dict = field(default_factory=dict)  # relation -> {(src, tgt): data ref}
    pool: frozenset | None = None

    def __post_init__(self):
        self.by_ref = {}
        for rec in self.objects:
            self.by_ref.setdefault(rec.ref, rec)

    def refs(self) -> list:
        return sorted(self.by_ref)

    def instances_of(self, class_name: str) -> frozenset:
        return frozenset(rec.ref for rec in self.objects if rec.cls == class_name)


# Attribute value specifications inside partial inputs.


@dataclass(frozen=True)
class Restriction:
    """A restricted attribute domain in a partial input."""

    values: tuple  # allowed values, in declaration order


@dataclass
class PartialInstance:
    """An under-specified object graph for the solver to complete.

    ``objects`` may bind an abstract creation class, meaning some concrete
    subtype; ``attrs`` may omit entries or hold a :class:`Restriction`;
    ``tuples`` and ``reified`` are lower bounds unless the relation appears in
    ``closed``.
    """

    objects: list = field(default_factory=list)  # ObjectRec (attrs may be partial)
    tuples: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    reified: dict = field(default_factory=dict)
    pool: frozenset | None = None
    closed: frozenset = frozenset()

    def __post_init__(self):
        self.by_ref = {}
        for rec in self.objects:
            self.by_ref.setdefault(rec.ref, rec)


EMPTY_PARTIAL = PartialInstance()


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    diagnostics: list

    @property
    def valid(self) -> bool:
        return not self.diagnostics

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "diagnostics": [d.as_dict() for d in self.diagnostics],
        }

    def render(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def validate(model_or_info, instance: Instance, config=None) -> ValidationReport:
    """Check every axiom the model states against an object graph.

    Aggregates the object-table checks, every relation-level check, each
    class's flattened invariant per object, and every named global constraint.
    """
    from .semantics import analyze
    from .solver import SolveConfig

    info = model_or_info if isinstance(model_or_info, ModelInfo) else analyze(model_or_info)
    config = config or SolveConfig()
    diagnostics = list(check_object_table(info.model, instance, config))

    structural = _check_structure(info.model, instance)
    diagnostics += structural
    if any(d.code in ("DanglingReference", "UnknownClass", "DuplicateReference") for d in diagnostics):
        # relation and constraint checks assume a well-formed object table
        return ValidationReport(diagnostics)

    diagnostics += check_relations(instance, info.model, info.lattice)

    ctx = InstanceContext(info, instance)
    for rec in sorted(instance.objects, key=lambda r: r.ref):
        flat = info.flat(rec.cls)
        invariant = info.invariants[rec.cls]
        if invariant == _TRUE:
            continue
        if flat.attrs.keys() - rec.attrs.keys():
            continue  # already reported as MissingAttribute
        try:
            ok = evaluate(invariant, ctx, dict(rec.attrs))
        except EvalError as exc:
            diagnostics.append(
                Diagnostic(
                    "ConstraintEvalError",
                    f"object {rec.ref}",
                    str(exc),
                    axiom=f"invariant of {rec.cls}",
                )
            )
            continue
        if not ok:
            diagnostics.append(
                Diagnostic(
                    "InvariantViolation",
                    f"object {rec.ref}",
                    f"violates the invariant of {rec.cls}",
                    axiom=info.model.class_def(rec.cls).loc,
                )
            )

    for name, body, loc in info.constraints:
        try:
            ok = evaluate(body, ctx)
        except EvalError as exc:
            diagnostics.append(
                Diagnostic("ConstraintEvalError", f"constraint {name}", str(exc), axiom=loc)
            )
            continue
        if not ok:
            diagnostics.append(
                Diagnostic(
                    "ConstraintViolation",
                    f"constraint {name}",
                    "the constraint does not hold",
                    axiom=loc or name,
                )
            )
    return ValidationReport(diagnostics)


def _check_structure(model: Model, instance: Instance) -> list:
    diagnostics = []
    known = set(instance.by_ref)

    def dangling(ref, where):
        diagnostics.append(
            Diagnostic("DanglingReference", where, f"reference {ref} names no object")
        )

    for rel in sorted(instance.tuples):
        for s, t in sorted(instance.tuples[rel]):
            for ref in (s, t):
                if ref not in known:
                    dangling(ref, f"relation {rel} ({s} -> {t})")
    for rel in sorted(instance.sequences):
        for src, seq in sorted(instance.sequences[rel].items()):
            if src not in known:
                dangling(src, f"relation {rel}, source {src}")
            for ref in seq:
                if ref not in known:
                    dangling(ref, f"relation {rel}, sequence of {src}")
    for rel in sorted(instance.reified):
        for (s, t), data in sorted(instance.reified[rel].items()):
            for ref in (s, t, data):
                if ref not in known:
                    dangling(ref, f"relation {rel} ({s} -> {t})")
    return diagnostics


# ---------------------------------------------------------------------------
# Canonicalization


def canonicalize(instance: Instance) -> Instance:
    """Renumber references 1..n into a canonical form.

    Isomorphic instances (equal up to a reference permutation) share one
    canonical form, objects are numbered grouped by creation class name, and
    the operation is idempotent.  The labeling is found by color refinement
    over (class, attributes, relation signatures) with individualization of
    ties, taking the lexicographically least serialization.
    """
    refs = instance.refs()
    if not refs:
        return Instance(pool=_canonical_pool(instance, {}))

    colors = _refine(instance, {ref: _initial_color(instance, ref) for ref in refs})
    best = _search_labeling(instance, colors, {}, None)
    mapping = best[1]
    return _relabel(instance, mapping)


def canonical_key(instance: Instance) -> str:
    """A stable string key identifying the isomorphism class of an instance."""
    return save_instance(canonicalize(instance))


def _initial_color(instance: Instance, ref: int):
    rec = instance.by_ref[ref]
    return (rec.cls, tuple(sorted((k, repr(v)) for k, v in rec.attrs.items())))


def _refine(instance: Instance, colors: dict) -> dict:
    rel_names = sorted(set(instance.tuples) | set(instance.sequences) | set(instance.reified))
    while True:
        signatures = {}
        for ref in colors:
            sig = [colors[ref]]
            for rel in rel_names:
                pairs = instance.tuples.get(rel, ())
                sig.append(tuple(sorted(colors[t] for (s, t) in pairs if s == ref)))
                sig.append(tuple(sorted(colors[s] for (s, t) in pairs if t == ref)))
                seqs = instance.sequences.get(rel, {})
                sig.append(tuple(colors[t] for t in seqs.get(ref, ())))
                sig.append(
                    tuple(
                        sorted(
                            (colors[s], i)
                            for s, seq in seqs.items()
                            for i, t in enumerate(seq)
                            if t == ref
                        )
                    )
                )
                reif = instance.reified.get(rel, {})
                sig.append(
                    tuple(sorted((colors[s], colors[t]) for (s, t), d in reif.items() if d == ref))
                )
                sig.append(
                    tuple(sorted((colors[t], colors[d]) for (s, t), d in reif.items() if s == ref))
                )
                sig.append(
                    tuple(sorted((colors[s], colors[d]) for (s, t), d in reif.items() if t == ref))
                )
            signatures[ref] = tuple(sig)
        if len(set(signatures.values())) == len(set(colors.values())):
            return signatures
        colors = signatures


def _search_labeling(instance: Instance, colors: dict, fixed: dict, best):
    """Individualize tied references and keep the least serialization."""
    groups: dict = {}
    for ref, color in colors.items():
        groups.setdefault(color, []).append(ref)
    tied = sorted((color, sorted(refs)) for color, refs in groups.items() if len(refs) > 1)
    if not tied:
        order = sorted(colors, key=lambda r: (colors[r], fixed.get(r, 0)))
        mapping = {ref: i + 1 for i, ref in enumerate(order)}
        key = _serialize_relabeled(instance, mapping)
        candidate = (key, mapping)
        if best is None or candidate[0] < best[0]:
            return candidate
        return best
    _, members = tied[0]
    for ref in members:
        next_colors = dict(colors)
        next_colors[ref] = (colors[ref], "*")
        refined = _refine(instance, next_colors)
        best = _search_labeling(instance, refined, fixed, best)
    return best


def _relabel(instance: Instance, mapping: dict) -> Instance:
    objects = sorted(
        (ObjectRec(mapping[rec.ref], rec.cls, dict(rec.attrs)) for rec in instance.objects),
        key=lambda rec: rec.ref,
    )
    tuples = {
        rel: {(mapping[s], mapping[t]) for (s, t) in pairs}
        for rel, pairs in instance.tuples.items()
        if pairs
    }
    sequences = {
        rel: {mapping[s]: tuple(mapping[t] for t in seq) for s, seq in seqs.items()}
        for rel, seqs in instance.sequences.items()
        if seqs
    }
    reified = {
        rel: {(mapping[s], mapping[t]): mapping[d] for (s, t), d in data.items()}
        for rel, data in instance.reified.items()
        if data
    }
    return Instance(
        objects=objects,
        tuples=tuples,
        sequences=sequences,
        reified=reified,
        pool=_canonical_pool(instance, mapping),
    )


def _canonical_pool(instance: Instance, mapping: dict) -> frozenset | None:
    if instance.pool is None:
        return None
    used = sorted(mapping.values())
    unused = len(instance.pool) - len(used)
    return frozenset(used + list(range(len(used) + 1, len(used) + unused + 1)))


def _serialize_relabeled(instance: Instance, mapping: dict) -> str:
    return save_instance(_relabel(instance, mapping))


# ---------------------------------------------------------------------------
# Serialization


def save_instance(instance: Instance | PartialInstance) -> str:
    """Serialize to the canonical JSON text (stable key order, 2-space indent)."""
    doc: dict = {"format": FORMAT}
    doc["objects"] = [
        {"ref": rec.ref, "class": rec.cls, "attrs": _attrs_out(rec.attrs)}
        for rec in sorted(instance.objects, key=lambda r: (r.ref, r.cls))
    ]
    if instance.tuples:
        doc["relations"] = {
            rel: sorted([s, t] for (s, t) in pairs)
            for rel, pairs in sorted(instance.tuples.items())
            if pairs
        }
    if instance.sequences:
        doc["sequences"] = {
            rel: {str(src): list(seq) for src, seq in sorted(seqs.items())}
            for rel, seqs in sorted(instance.sequences.items())
            if seqs
        }
    if instance.reified:
        doc["reified"] = {
            rel: [
                {"pair": [s, t], "data": d}
                for (s, t), d in sorted(data.items())
            ]
            for rel, data in sorted(instance.reified.items())
            if data
        }
    if instance.pool is not None:
        doc["pool"] = sorted(instance.pool)
    if isinstance(instance, PartialInstance):
        doc["partial"] = True
        if instance.closed:
            doc["closed"] = sorted(instance.closed)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _attrs_out(attrs: dict) -> dict:
    out = {}
    for attr, value in attrs.items():
        if isinstance(value, Restriction):
            out[attr] = {"in": list(value.values)}
        else:
            out[attr] = value
    return out


def load_instance(text: str, model: Model) -> Instance | PartialInstance:
    """Parse an instance file against a model.

    Returns an :class:`Instance` when the file is complete, otherwise a
    :class:`PartialInstance`.  Unknown class, relation, or attribute names are
    load-time errors, not diagnostics.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"not valid JSON: {exc}", location=f"line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise LoadError("top level must be an object")
    if doc.get("format", FORMAT) != FORMAT:
        raise LoadError(f"unsupported format {doc.get('format')!r}")

    partial = bool(doc.get("partial", False))
    flats = {}
    objects = []
    for i, entry in enumerate(doc.get("objects", [])):
        where = f"objects[{i}]"
        if not isinstance(entry, dict) or "ref" not in entry or "class" not in entry:
            raise LoadError("object entries need 'ref' and 'class'", location=where)
        ref = entry["ref"]
        cls = entry["class"]
        if not isinstance(ref, int) or isinstance(ref, bool) or ref < 0:
            raise LoadError(f"reference {ref!r} is not a natural number", location=where)
        if cls not in model.classes:
            raise LoadError(f"unknown class {cls!r}", location=where)
        if cls not in flats:
            flats[cls] = resolve_class(model, cls)
        attrs = {}
        raw_attrs = entry.get("attrs", {})
        if not isinstance(raw_attrs, dict):
            raise LoadError("'attrs' must be an object", location=where)
        for attr, value in raw_attrs.items():
            if attr not in flats[cls].attrs:
                raise LoadError(f"class {cls} has no attribute {attr!r}", location=where)
            attrs[attr] = _attr_in(value, where, attr)
            if isinstance(attrs[attr], Restriction):
                partial = True
        if model.classes[cls].abstract:
            partial = True
        if flats[cls].attrs.keys() - attrs.keys():
            partial = True
        objects.append(ObjectRec(ref, cls, attrs))

    tuples: dict = {}
    for rel, raw in (doc.get("relations", {}) or {}).items():
        if rel not in model.relations:
            raise LoadError(f"unknown relation {rel!r}", location="relations")
        pairs = set()
        for pair in raw:
            if not isinstance(pair, list) or len(pair) != 2:
                raise LoadError(f"tuples of {rel} must be [src, tgt] pairs", location="relations")
            pairs.add((pair[0], pair[1]))
        tuples[rel] = pairs

    sequences: dict = {}
    for rel, raw in (doc.get("sequences", {}) or {}).items():
        if rel not in model.relations:
            raise LoadError(f"unknown relation {rel!r}", location="sequences")
        if model.relations[rel].ordered is Ordering.NONE:
            raise LoadError(f"relation {rel!r} is not ordered", location="sequences")
        sequences[rel] = {int(src): tuple(seq) for src, seq in raw.items()}

    reified: dict = {}
    for rel, raw in (doc.get("reified", {}) or {}).items():
        if rel not in model.relations:
            raise LoadError(f"unknown relation {rel!r}", location="reified")
        if model.relations[rel].reified_by is None:
            raise LoadError(f"relation {rel!r} carries no association data", location="reified")
        data = {}
        for entry in raw:
            pair = entry.get("pair")
            if not isinstance(pair, list) or len(pair) != 2 or "data" not in entry:
                raise LoadError("reified entries need 'pair' and 'data'", location="reified")
            data[(pair[0], pair[1])] = entry["data"]
        reified[rel] = data

    pool = frozenset(doc["pool"]) if "pool" in doc else None
    closed = frozenset(doc.get("closed", []))
    for rel in closed:
        if rel not in model.relations:
            raise LoadError(f"unknown relation {rel!r}", location="closed")
    if closed:
        partial = True

    if partial:
        return PartialInstance(
            objects=objects,
            tuples=tuples,
            sequences=sequences,
            reified=reified,
            pool=pool,
            closed=closed,
        )
    return Instance(objects=objects, tuples=tuples, sequences=sequences, reified=reified, pool=pool)


def _attr_in(value, where, attr):
    if isinstance(value, dict):
        if "in" in value:
            return Restriction(tuple(value["in"]))
        if "min" in value or "max" in value:
            lo = value.get("min", 0)
            hi = value.get("max")
            if hi is None:
                raise LoadError(f"attribute {attr!r}: interval restriction needs 'max'", where)
            return Restriction(tuple(range(lo, hi + 1)))
        raise LoadError(f"attribute {attr!r}: unknown restriction {value!r}", where)
    if isinstance(value, (int, bool, str)):
        return value
    raise LoadError(f"attribute {attr!r}: unsupported value {value!r}", where)
