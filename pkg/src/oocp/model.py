"""The class system: attribute domains, class definitions, inheritance
resolution, discriminator rules, type extents, and attribute access.

Inheritance is resolved by copying: a flattened class carries every attribute
reachable from every ancestor (after per-link renaming) and the conjunction of
all inherited and own invariants.  A *class* is the set of objects created
directly under one definition; a *type* is a class together with all its
subtype extents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from . import expr as E
from .diagnostics import Diagnostic
from .errors import CycleError, DanglingReference, TypeConflict, UnknownAttribute, UnknownClass

if TYPE_CHECKING:
    from .instance import Instance
    from .relations import RelationDecl
    from .solver import SolveConfig


DEFAULT_DISCRIMINATOR = "default"


# ---------------------------------------------------------------------------
# Attribute domains


@dataclass(frozen=True)
class IntInterval:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval {self.lo}..{self.hi}")

    def contains(self, value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def enumerate(self, int_bound: int) -> list:
        return list(range(self.lo, self.hi + 1))

    def render(self) -> str:
        return f"int {self.lo}..{self.hi}"


@dataclass(frozen=True)
class Nat:
    def contains(self, value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and value >= 0

    def enumerate(self, int_bound: int) -> list:
        return list(range(0, int_bound + 1))

    def render(self) -> str:
        return "nat"


@dataclass(frozen=True)
class NatPositive:
    def contains(self, value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and value >= 1

    def enumerate(self, int_bound: int) -> list:
        return list(range(1, max(int_bound, 1) + 1))

    def render(self) -> str:
        return "nat1"


@dataclass(frozen=True)
class BoolDomain:
    def contains(self, value) -> bool:
        return isinstance(value, bool)

    def enumerate(self, int_bound: int) -> list:
        return [False, True]

    def render(self) -> str:
        return "bool"


@dataclass(frozen=True)
class EnumDomain:
    values: tuple

    def __post_init__(self):
        if len(set(self.values)) != len(self.values):
            raise ValueError("enum values must be distinct")

    def contains(self, value) -> bool:
        return value in self.values

    def enumerate(self, int_bound: int) -> list:
        return list(self.values)

    def render(self) -> str:
        return "enum { " + ", ".join(self.values) + " }"


AttrDomain = IntInterval | Nat | NatPositive | BoolDomain | EnumDomain


def domain_sort(domain: AttrDomain) -> str:
    if isinstance(domain, BoolDomain):
        return "bool"
    if isinstance(domain, EnumDomain):
        return "enum"
    return "int"


def unbounded(domain: AttrDomain) -> bool:
    return isinstance(domain, (Nat, NatPositive))


# ---------------------------------------------------------------------------
# Class definitions


@dataclass(frozen=True)
class ParentLink:
    parent: str
    discriminator: str = DEFAULT_DISCRIMINATOR
    renames: tuple = ()  # pairs (old, new), applied to the parent's flat attrs

    def rename_map(self) -> dict:
        return dict(self.renames)


@dataclass(frozen=True)
class ClassDef:
    name: str
    abstract: bool = False
    discriminators: tuple = ()  # labels declared on this class
    parents: tuple = ()  # ParentLink
    own_attrs: tuple = ()  # pairs (attr name, AttrDomain)
    own_invariants: tuple = ()  # Expr over own/inherited attribute names
    loc: str = field(default="", compare=False)  # source position, e.g. "abc.oocp:3"

    def own_attr_map(self) -> dict:
        return dict(self.own_attrs)


@dataclass(frozen=True)
class FlatClass:
    """A class after inheritance resolution: the full attribute structure and
    the merged invariant, with renamed attributes under their new names."""

    name: str
    attrs: dict
    invariant: E.Expr
    ancestors: frozenset

    def attr_domain(self, attr: str) -> AttrDomain:
        try:
            return self.attrs[attr]
        except KeyError:
            raise UnknownAttribute(f"class {self.name} has no attribute {attr!r}") from None


@dataclass
class Model:
    """A complete program: class definitions, relation declarations, and
    named global constraints."""

    classes: dict = field(default_factory=dict)  # name -> ClassDef
    relations: dict = field(default_factory=dict)  # name -> RelationDecl
    constraints: list = field(default_factory=list)  # (name, Expr, loc)

    def class_def(self, name: str) -> ClassDef:
        try:
            return self.classes[name]
        except KeyError:
            raise UnknownClass(f"unknown class {name!r}") from None

    def constraint_named(self, name: str):
        for cname, body, loc in self.constraints:
            if cname == name:
                return body
        return None

    def without_constraint(self, name: str) -> "Model":
        """A copy of the model lacking the named global constraint."""
        kept = [(n, b, l) for (n, b, l) in self.constraints if n != name]
        return Model(classes=dict(self.classes), relations=dict(self.relations), constraints=kept)


# ---------------------------------------------------------------------------
# Inheritance resolution


def resolve_class(model: Model, name: str) -> FlatClass:
    """Flatten a class definition by copying every ancestor's structure.

    Renamed attributes appear only under their new name, and invariants
    inherited through a rename are rewritten accordingly.  Identically named
    attributes merge silently when their domains agree (schema conjunction);
    they conflict otherwise.
    """
    return _resolve(model, name, ())


def _resolve(model: Model, name: str, stack: tuple) -> FlatClass:
    if name in stack:
        raise CycleError(" -> ".join(stack + (name,)))
    cdef = model.class_def(name)
    attrs: dict = {}
    invariants: list = []
    ancestors: set = set()

    def merge_attr(attr: str, domain: AttrDomain, origin: str):
        if attr in attrs and attrs[attr] != domain:
            raise TypeConflict(
                f"class {name}: attribute {attr!r} from {origin} collides with a "
                f"differently typed attribute ({attrs[attr].render()} vs {domain.render()})"
            )
        attrs[attr] = domain

    for link in cdef.parents:
        parent_flat = _resolve(model, link.parent, stack + (name,))
        renames = link.rename_map()
        for attr, domain in parent_flat.attrs.items():
            merge_attr(renames.get(attr, attr), domain, f"parent {link.parent}")
        inherited = parent_flat.invariant
        if renames:
            inherited = E.rename_vars(inherited, renames)
        if inherited != E.BoolLit(True):
            invariants.append(inherited)
        ancestors.add(link.parent)
        ancestors |= parent_flat.ancestors

    for attr, domain in cdef.own_attrs:
        merge_attr(attr, domain, "own declaration")
    invariants.extend(cdef.own_invariants)

    return FlatClass(
        name=name,
        attrs=attrs,
        invariant=E.and_all(_dedup(invariants)),
        ancestors=frozenset(ancestors),
    )


def _dedup(items):
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


# ---------------------------------------------------------------------------
# The type lattice


@dataclass(frozen=True)
class TypeLattice:
    """Reflexive-transitive descendants of every class, plus the direct
    children of each class grouped by discriminator."""

    subtypes_of: dict  # name -> frozenset of names
    discriminator_partitions: dict  # name -> {label -> frozenset of children}

    def subtypes(self, name: str) -> frozenset:
        try:
            return self.subtypes_of[name]
        except KeyError:
            raise UnknownClass(f"unknown class {name!r}") from None

    def concrete_subtypes(self, model: Model, name: str) -> list:
        return sorted(c for c in self.subtypes(name) if not model.classes[c].abstract)


def build_type_lattice(model: Model) -> TypeLattice:
    children: dict = {name: {} for name in model.classes}
    for cdef in model.classes.values():
        for link in cdef.parents:
            if link.parent not in model.classes:
                raise UnknownClass(f"class {cdef.name} inherits unknown class {link.parent!r}")
            children[link.parent].setdefault(link.discriminator, set()).add(cdef.name)

    subtypes: dict = {}

    def descend(name: str, stack: tuple) -> frozenset:
        if name in stack:
            raise CycleError(" -> ".join(stack + (name,)))
        if name in subtypes:
            return subtypes[name]
        acc = {name}
        for group in children[name].values():
            for child in group:
                acc |= descend(child, stack + (name,))
        subtypes[name] = frozenset(acc)
        return subtypes[name]

    for name in model.classes:
        descend(name, ())

    partitions = {
        name: {label: frozenset(group) for label, group in by_label.items()}
        for name, by_label in children.items()
    }
    return TypeLattice(subtypes_of=subtypes, discriminator_partitions=partitions)


def type_extent(instance: "Instance", lattice: TypeLattice, name: str) -> frozenset:
    """All references whose creation class is the named class or a subtype."""
    members = lattice.subtypes(name)
    return frozenset(rec.ref for rec in instance.objects if rec.cls in members)


# ---------------------------------------------------------------------------
# Static and instance-level checks


def check_discriminators(model: Model, lattice: TypeLattice | None = None) -> list:
    """Enforce the multiple-discriminator specialization rules.

    When a class splits along two or more discriminators, the class and its
    direct children must be abstract, and every concrete descendant must
    inherit at least one class from each discriminator.
    """
    lattice = lattice or build_type_lattice(model)
    diagnostics = []
    for root_name, by_label in sorted(lattice.discriminator_partitions.items()):
        root = model.classes[root_name]
        labels = [d for d in root.discriminators if d in by_label]
        if len(labels) < 2:
            continue
        if not root.abstract:
            diagnostics.append(
                Diagnostic(
                    "PartitionRootNotAbstract",
                    f"class {root_name}",
                    f"{root_name} splits along {len(labels)} discriminators and must be abstract",
                    axiom=root.loc,
                )
            )
        for label in labels:
            for child in sorted(by_label[label]):
                if not model.classes[child].abstract:
                    diagnostics.append(
                        Diagnostic(
                            "PartitionChildNotAbstract",
                            f"class {child}",
                            f"direct child of the {root_name} split must be abstract",
                            axiom=model.classes[child].loc,
                        )
                    )
        for name in sorted(lattice.subtypes(root_name)):
            cdef = model.classes[name]
            if cdef.abstract:
                continue
            flat = resolve_class(model, name)
            lineage = flat.ancestors | {name}
            for label in labels:
                if not any(child in lineage for child in by_label[label]):
                    diagnostics.append(
                        Diagnostic(
                            "MissingDiscriminator",
                            f"class {name}",
                            f"concrete descendant of {root_name} covers no class of "
                            f"discriminator {label!r}",
                            axiom=cdef.loc,
                        )
                    )
    return diagnostics


def check_object_table(model: Model, instance: "Instance", config: "SolveConfig") -> list:
    """Well-formedness of the object table itself.

    Flags duplicate references, objects created under abstract classes,
    attribute values outside their domains, attribute sets that do not match
    the flattened class structure, and, when the partition axiom is on, pool
    references not used by any object.
    """
    diagnostics = []
    seen: set = set()
    flats: dict = {}
    for rec in instance.objects:
        subject = f"object {rec.ref}"
        if rec.ref in seen:
            diagnostics.append(
                Diagnostic("DuplicateReference", subject, f"reference {rec.ref} is used twice")
            )
            continue
        seen.add(rec.ref)
        if rec.cls not in model.classes:
            diagnostics.append(Diagnostic("UnknownClass", subject, f"unknown class {rec.cls!r}"))
            continue
        cdef = model.class_def(rec.cls)
        if cdef.abstract:
            diagnostics.append(
                Diagnostic(
                    "AbstractInstantiation",
                    subject,
                    f"{rec.cls} is abstract and cannot be instantiated",
                    axiom=cdef.loc,
                )
            )
        if rec.cls not in flats:
            flats[rec.cls] = resolve_class(model, rec.cls)
        flat = flats[rec.cls]
        for attr in sorted(flat.attrs.keys() - rec.attrs.keys()):
            diagnostics.append(
                Diagnostic("MissingAttribute", subject, f"attribute {attr!r} has no value")
            )
        for attr in sorted(rec.attrs.keys() - flat.attrs.keys()):
            diagnostics.append(
                Diagnostic("UnknownAttribute", subject, f"{rec.cls} has no attribute {attr!r}")
            )
        for attr in sorted(rec.attrs.keys() & flat.attrs.keys()):
            value = rec.attrs[attr]
            if not flat.attrs[attr].contains(value):
                diagnostics.append(
                    Diagnostic(
                        "DomainViolation",
                        f"{subject}.{attr}",
                        f"value {value!r} outside {flat.attrs[attr].render()}",
                    )
                )
    if config.partition:
        pool = instance.pool
        if pool is None and config.pool_size:
            pool = frozenset(range(1, config.pool_size + 1))
        for ref in sorted(pool or ()):
            if ref not in seen:
                diagnostics.append(
                    Diagnostic(
                        "UnusedReference",
                        f"reference {ref}",
                        "pool reference is used by no object but the partition axiom is on",
                    )
                )
    return diagnostics


def get_attr(instance: "Instance", ref: int, attr: str):
    """Dereference an attribute; inherited and own attributes behave alike."""
    rec = instance.by_ref.get(ref)
    if rec is None:
        raise DanglingReference(f"no object with reference {ref}")
    try:
        return rec.attrs[attr]
    except KeyError:
        raise UnknownAttribute(
            f"object {ref} (class {rec.cls}) has no attribute {attr!r}"
        ) from None
