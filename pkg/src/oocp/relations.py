"""Relations between type extents: kinds, composition, multiplicities, roles,
ordered relations, subset constraints, and reified associations.

A relation is declared between *types*, so its tuples may touch objects of any
subtype of the declared endpoints.  Kinds and flags compose conjunctively; each
contributes elementary properties over the tuple set:

    functional          every source maps to at most one target
    total               every source maps to at least one target
    inverse-functional  every target is reached by at most one source
    inverse-total       every target is reached by at least one source

A composition relation is one whose relational inverse is an injective partial
function (no part is shared between wholes, and no whole duplicates a part);
with the ``total`` flag the inverse is a full injection, so no component is
left aside.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .diagnostics import Diagnostic
from .errors import UnknownRelation
from .model import Model, TypeLattice, type_extent

if TYPE_CHECKING:
    from .instance import Instance


class RelationKind(enum.Enum):
    RELATION = "relation"
    FUNCTION = "function"
    PARTIAL_FUNCTION = "partial function"
    INJECTION = "injection"
    PARTIAL_INJECTION = "partial injection"
    SURJECTION = "surjection"
    PARTIAL_SURJECTION = "partial surjection"
    BIJECTION = "bijection"


class Ordering(enum.Enum):
    NONE = "none"
    SEQ = "seq"
    ISEQ = "iseq"


UNBOUNDED = None

_PROPS = {
    RelationKind.RELATION: frozenset(),
    RelationKind.FUNCTION: frozenset({"functional", "total"}),
    RelationKind.PARTIAL_FUNCTION: frozenset({"functional"}),
    RelationKind.INJECTION: frozenset({"functional", "total", "inverse-functional"}),
    RelationKind.PARTIAL_INJECTION: frozenset({"functional", "inverse-functional"}),
    RelationKind.SURJECTION: frozenset({"functional", "total", "inverse-total"}),
    RelationKind.PARTIAL_SURJECTION: frozenset({"functional", "inverse-total"}),
    RelationKind.BIJECTION: frozenset(
        {"functional", "total", "inverse-functional", "inverse-total"}
    ),
}


@dataclass(frozen=True)
class Multiplicity:
    """Cardinality bounds: (src_min, src_max) bound the inverse image per
    target, (tgt_min, tgt_max) bound the image per source (UML reading)."""

    src_min: int = 0
    src_max: int | None = UNBOUNDED
    tgt_min: int = 0
    tgt_max: int | None = UNBOUNDED

    def trivial(self) -> bool:
        return self == Multiplicity()


@dataclass(frozen=True)
class RelationDecl:
    name: str
    source: str
    target: str
    kind: RelationKind = RelationKind.RELATION
    composition: bool = False
    inverse_total: bool = False
    ordered: Ordering = Ordering.NONE
    multiplicity: Multiplicity = field(default_factory=Multiplicity)
    subset_of: str | None = None
    reified_by: str | None = None
    reified_total: bool = True
    aggregate: bool = False  # annotation only, no checkable semantics
    role_left: str | None = None  # names the source seen from the target
    role_right: str | None = None  # names the target seen from the source
    loc: str = field(default="", compare=False)

    def properties(self) -> frozenset:
        props = set(_PROPS[self.kind])
        if self.composition:
            props |= {"functional", "inverse-functional"}
        if self.inverse_total:
            props.add("inverse-total")
        if self.ordered is not Ordering.NONE:
            # the map source -> sequence is total by representation
            props -= {"functional", "total"}
        return frozenset(props)


def relation_pairs(instance: "Instance", decl: RelationDecl) -> frozenset:
    """The tuple set of a relation; ordered relations contribute one pair per
    sequence member."""
    if decl.ordered is Ordering.NONE:
        return frozenset(instance.tuples.get(decl.name, ()))
    pairs = set()
    for src, seq in instance.sequences.get(decl.name, {}).items():
        for tgt in seq:
            pairs.add((src, tgt))
    return frozenset(pairs)


def role_image(instance: "Instance", decl: RelationDecl, ref: int) -> frozenset:
    """Targets related to ``ref``; for ordered relations, the members of the
    sequence attached to ``ref``."""
    if decl.ordered is not Ordering.NONE:
        return frozenset(instance.sequences.get(decl.name, {}).get(ref, ()))
    return frozenset(t for (s, t) in instance.tuples.get(decl.name, ()) if s == ref)


def role_inverse_image(instance: "Instance", decl: RelationDecl, ref: int) -> frozenset:
    """Sources related to ``ref``."""
    if decl.ordered is not Ordering.NONE:
        return frozenset(
            s for s, seq in instance.sequences.get(decl.name, {}).items() if ref in seq
        )
    return frozenset(s for (s, t) in instance.tuples.get(decl.name, ()) if t == ref)


# ---------------------------------------------------------------------------
# Checks


def check_relation_kind(
    instance: "Instance", decl: RelationDecl, lattice: TypeLattice, model: Model
) -> list:
    """Diagnostics for every elementary property implied by the declared kind
    and flags, plus tuples whose endpoints fall outside the declared extents."""
    diagnostics = []
    pairs = relation_pairs(instance, decl)
    sources = type_extent(instance, lattice, decl.source)
    targets = type_extent(instance, lattice, decl.target)
    props = decl.properties()

    for s, t in sorted(pairs):
        if s not in sources:
            diagnostics.append(
                Diagnostic(
                    "TypeMismatch",
                    f"relation {decl.name} ({s} -> {t})",
                    f"source {s} is not a {decl.source}",
                    axiom=decl.loc,
                )
            )
        if t not in targets:
            diagnostics.append(
                Diagnostic(
                    "TypeMismatch",
                    f"relation {decl.name} ({s} -> {t})",
                    f"target {t} is not a {decl.target}",
                    axiom=decl.loc,
                )
            )

    image: dict = {}
    preimage: dict = {}
    for s, t in pairs:
        image.setdefault(s, set()).add(t)
        preimage.setdefault(t, set()).add(s)

    if "functional" in props:
        for s in sorted(image):
            if len(image[s]) > 1:
                diagnostics.append(
                    Diagnostic(
                        "NotFunctional",
                        f"relation {decl.name}, source {s}",
                        f"{len(image[s])} images where at most one is allowed",
                        axiom=decl.loc,
                    )
                )
    if "total" in props:
        for s in sorted(sources - image.keys()):
            diagnostics.append(
                Diagnostic(
                    "NotTotal",
                    f"relation {decl.name}, source {s}",
                    "source has no image",
                    axiom=decl.loc,
                )
            )
    if "inverse-functional" in props:
        code = "SharedComponent" if decl.composition else "NotInjective"
        for t in sorted(preimage):
            if len(preimage[t]) > 1:
                diagnostics.append(
                    Diagnostic(
                        code,
                        f"relation {decl.name}, target {t}",
                        f"target is shared by {len(preimage[t])} sources",
                        axiom=decl.loc,
                    )
                )
    if "inverse-total" in props:
        code = "InverseNotTotal" if (decl.composition or decl.inverse_total) else "NotSurjective"
        for t in sorted(targets - preimage.keys()):
            diagnostics.append(
                Diagnostic(
                    code,
                    f"relation {decl.name}, target {t}",
                    "target is reached by no source",
                    axiom=decl.loc,
                )
            )
    return diagnostics


def check_multiplicity(instance: "Instance", decl: RelationDecl, lattice: TypeLattice, model: Model) -> list:
    """Per-object cardinality bounds on role images."""
    mult = decl.multiplicity
    if mult.trivial():
        return []
    diagnostics = []
    sources = type_extent(instance, lattice, decl.source)
    targets = type_extent(instance, lattice, decl.target)

    def bad(subject, n, lo, hi):
        bound = f"{lo}..{'*' if hi is UNBOUNDED else hi}"
        diagnostics.append(
            Diagnostic(
                "MultiplicityViolation",
                subject,
                f"{n} related objects, outside {bound}",
                axiom=decl.loc,
            )
        )

    for s in sorted(sources):
        n = len(role_image(instance, decl, s)) if decl.ordered is Ordering.NONE else len(
            instance.sequences.get(decl.name, {}).get(s, ())
        )
        if n < mult.tgt_min or (mult.tgt_max is not UNBOUNDED and n > mult.tgt_max):
            bad(f"relation {decl.name}, source {s}", n, mult.tgt_min, mult.tgt_max)
    for t in sorted(targets):
        n = len(role_inverse_image(instance, decl, t))
        if n < mult.src_min or (mult.src_max is not UNBOUNDED and n > mult.src_max):
            bad(f"relation {decl.name}, target {t}", n, mult.src_min, mult.src_max)
    return diagnostics


def check_ordered(instance: "Instance", decl: RelationDecl) -> list:
    """Sequence well-formedness; injective sequences forbid repeated members."""
    diagnostics = []
    if decl.ordered is Ordering.NONE:
        return diagnostics
    for src, seq in sorted(instance.sequences.get(decl.name, {}).items()):
        if not isinstance(seq, tuple):
            diagnostics.append(
                Diagnostic(
                    "BadSequence",
                    f"relation {decl.name}, source {src}",
                    "sequence is not a contiguous list",
                    axiom=decl.loc,
                )
            )
            continue
        if decl.ordered is Ordering.ISEQ and len(set(seq)) != len(seq):
            diagnostics.append(
                Diagnostic(
                    "DuplicateInSequence",
                    f"relation {decl.name}, source {src}",
                    "a member occurs twice in an injective sequence",
                    axiom=decl.loc,
                )
            )
    return diagnostics


def check_subset(instance: "Instance", decl: RelationDecl, parent_pairs) -> list:
    """Every tuple of the relation must appear in its parent relation."""
    diagnostics = []
    parent = frozenset(parent_pairs)
    for s, t in sorted(relation_pairs(instance, decl)):
        if (s, t) not in parent:
            diagnostics.append(
                Diagnostic(
                    "SubsetViolation",
                    f"relation {decl.name} ({s} -> {t})",
                    f"tuple is absent from {decl.subset_of}",
                    axiom=decl.loc,
                )
            )
    return diagnostics


def check_reified(
    instance: "Instance", decl: RelationDecl, lattice: TypeLattice, model: Model
) -> list:
    """The association-data map must cover exactly the tuple set (when total),
    never point outside it, and carry objects of the declared class."""
    diagnostics = []
    if decl.reified_by is None:
        return diagnostics
    pairs = relation_pairs(instance, decl)
    data = instance.reified.get(decl.name, {})
    carrier = type_extent(instance, lattice, decl.reified_by)
    for pair in sorted(data):
        if pair not in pairs:
            diagnostics.append(
                Diagnostic(
                    "DanglingAssociationData",
                    f"relation {decl.name} ({pair[0]} -> {pair[1]})",
                    "association data attached to a tuple the relation does not hold",
                    axiom=decl.loc,
                )
            )
        elif data[pair] not in carrier:
            diagnostics.append(
                Diagnostic(
                    "TypeMismatch",
                    f"relation {decl.name} ({pair[0]} -> {pair[1]})",
                    f"association object {data[pair]} is not a {decl.reified_by}",
                    axiom=decl.loc,
                )
            )
    if decl.reified_total:
        for pair in sorted(pairs - data.keys()):
            diagnostics.append(
                Diagnostic(
                    "MissingAssociationData",
                    f"relation {decl.name} ({pair[0]} -> {pair[1]})",
                    "tuple carries no association data",
                    axiom=decl.loc,
                )
            )
    return diagnostics


def check_relations(instance: "Instance", model: Model, lattice: TypeLattice) -> list:
    """Run every relation-level check declared by the model."""
    diagnostics = []
    for name in sorted(model.relations):
        decl = model.relations[name]
        diagnostics += check_relation_kind(instance, decl, lattice, model)
        diagnostics += check_multiplicity(instance, decl, lattice, model)
        diagnostics += check_ordered(instance, decl)
        if decl.subset_of is not None:
            parent = model.relations.get(decl.subset_of)
            if parent is None:
                raise UnknownRelation(f"{decl.name} declared subset of unknown {decl.subset_of!r}")
            diagnostics += check_subset(instance, decl, relation_pairs(instance, parent))
        diagnostics += check_reified(instance, decl, lattice, model)
    return diagnostics


# ---------------------------------------------------------------------------
# Role resolution


@dataclass(frozen=True)
class Role:
    relation: str
    forward: bool  # True: image (source -> targets); False: inverse image


def build_role_table(model: Model) -> dict:
    """Map role names to directed relation views.

    Explicit role names win; a class name doubles as a default role only while
    it is unambiguous among every relation touching it.
    """
    table: dict = {}
    for name in sorted(model.relations):
        decl = model.relations[name]
        for role_name, role in (
            (decl.role_right, Role(name, True)),
            (decl.role_left, Role(name, False)),
        ):
            if role_name is None:
                continue
            if role_name in table:
                raise UnknownRelation(
                    f"role {role_name!r} is declared by both {table[role_name].relation} and {name}"
                )
            table[role_name] = role

    defaults: dict = {}
    for name in sorted(model.relations):
        decl = model.relations[name]
        for role_name, role in (
            (decl.target, Role(name, True)),
            (decl.source, Role(name, False)),
        ):
            if role_name in table:
                continue
            if role_name in defaults:
                defaults[role_name] = None  # ambiguous, withdrawn
            else:
                defaults[role_name] = role
    for role_name, role in defaults.items():
        if role is not None:
            table[role_name] = role
    return table
