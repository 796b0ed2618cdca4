"""Constraint expression trees and the aggregation toolkit.

The expression language covers quantification over type extents, boolean and
integer arithmetic, attribute access, role traversal (``~>``, ``.``, ``->``,
``=>``), relational algebra (image, inverse, transitive closure, domain/range
restriction) and bag aggregation.  Nodes are immutable; evaluation lives in
:mod:`oocp.semantics`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyAggregate


# ---------------------------------------------------------------------------
# Bags and aggregation utilities


class Bag:
    """A multiset: values mapped to strictly positive counts."""

    __slots__ = ("_counts",)

    def __init__(self, counts=None):
        self._counts = {}
        if counts:
            for value, n in (counts.items() if isinstance(counts, dict) else counts):
                if n < 0:
                    raise ValueError("bag counts must be positive")
                if n:
                    self._counts[value] = self._counts.get(value, 0) + n

    @classmethod
    def of(cls, iterable) -> "Bag":
        bag = cls()
        for value in iterable:
            bag._counts[value] = bag._counts.get(value, 0) + 1
        return bag

    def count(self, value) -> int:
        return self._counts.get(value, 0)

    def values(self):
        return self._counts.keys()

    def items(self):
        return self._counts.items()

    def size(self) -> int:
        return sum(self._counts.values())

    def union(self, other: "Bag") -> "Bag":
        merged = dict(self._counts)
        for value, n in other._counts.items():
            merged[value] = merged.get(value, 0) + n
        return Bag(merged)

    def __eq__(self, other):
        return isinstance(other, Bag) and self._counts == other._counts

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __len__(self):
        return len(self._counts)

    def __iter__(self):
        return iter(self._counts)

    def __repr__(self):
        inner = ", ".join(f"{v!r}: {n}" for v, n in sorted(self._counts.items(), key=repr))
        return f"Bag({{{inner}}})"


def bagsum(bag: Bag) -> int:
    """Sum of all members, counting multiplicity; the empty bag sums to 0."""
    return sum(value * count for value, count in bag.items())


def bagmin(bag: Bag) -> int:
    if not len(bag):
        raise EmptyAggregate("bagmin of an empty bag")
    return min(bag.values())


def bagmax(bag: Bag) -> int:
    if not len(bag):
        raise EmptyAggregate("bagmax of an empty bag")
    return max(bag.values())


def pick_first(refs) -> int:
    """The least element of a non-empty set of references (numeric order)."""
    return min(refs)


def bag_of(attr: str, refs, getter) -> Bag:
    """Collect ``getter(ref, attr)`` over ``refs`` into a bag.

    Built by repeatedly removing pick_first, which makes the recursion order
    explicit; the result is order-independent regardless.
    """
    remaining = set(refs)
    bag = Bag()
    while remaining:
        ref = pick_first(remaining)
        remaining.discard(ref)
        value = getter(ref, attr)
        bag = bag.union(Bag({value: 1}))
    return bag


def as_seq(values) -> tuple:
    """Convert a finite set of naturals to its ascending enumeration."""
    ordered = sorted(values)
    return tuple(ordered)


def transitive_closure(pairs) -> frozenset:
    """Smallest transitive superset of the given set of pairs."""
    closure = set(pairs)
    succ = {}
    for a, b in closure:
        succ.setdefault(a, set()).add(b)
    changed = True
    while changed:
        changed = False
        for a, bs in list(succ.items()):
            extra = set()
            for b in bs:
                extra |= succ.get(b, set())
            new = extra - bs
            if new:
                succ[a] = bs | new
                changed = True
    return frozenset((a, b) for a, bs in succ.items() for b in bs)


# ---------------------------------------------------------------------------
# Expression nodes


@dataclass(frozen=True)
class Node:
    pass


Expr = Node  # readability alias for annotations


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class EnumLit(Node):
    value: str


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class RefLit(Node):
    """An object reference literal; produced by quantifier expansion only."""

    ref: int


@dataclass(frozen=True)
class TypeSet(Node):
    """The extent of a type (a class together with all its subtypes)."""

    class_name: str


@dataclass(frozen=True)
class RelName(Node):
    name: str


@dataclass(frozen=True)
class Quantifier(Node):
    kind: str  # forall | exists | exists1
    var: str
    type_name: str
    body: Node


@dataclass(frozen=True)
class And(Node):
    items: tuple


@dataclass(frozen=True)
class Or(Node):
    items: tuple


@dataclass(frozen=True)
class Not(Node):
    item: Node


@dataclass(frozen=True)
class Implies(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Iff(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Compare(Node):
    op: str  # = != < <= > >=
    left: Node
    right: Node


@dataclass(frozen=True)
class Arith(Node):
    op: str  # + - * div mod
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    item: Node


@dataclass(frozen=True)
class AttrAccess(Node):
    obj: Node
    attr: str


@dataclass(frozen=True)
class LeadsTo(Node):
    """``o ~> r``: the role image of a single object."""

    obj: Node
    role: str


@dataclass(frozen=True)
class Dot(Node):
    """``s . r``: the role image of every member of a set, unioned."""

    base: Node
    role: str


@dataclass(frozen=True)
class Arrow(Node):
    """``s -> getX``: the bag of attribute values over a set of objects."""

    base: Node
    attr: str


@dataclass(frozen=True)
class Harpoon(Node):
    """``s => getX``: the single attribute value over a set of objects.

    Errors unless the collected bag holds exactly one distinct value.
    """

    base: Node
    attr: str


@dataclass(frozen=True)
class RelImage(Node):
    rel: Node
    base: Node


@dataclass(frozen=True)
class RelInverse(Node):
    rel: Node


@dataclass(frozen=True)
class RelUnion(Node):
    items: tuple


@dataclass(frozen=True)
class TransClosure(Node):
    rel: Node


@dataclass(frozen=True)
class DomRestrict(Node):
    base: Node
    rel: Node


@dataclass(frozen=True)
class RanRestrict(Node):
    rel: Node
    base: Node


@dataclass(frozen=True)
class Dom(Node):
    rel: Node


@dataclass(frozen=True)
class Ran(Node):
    rel: Node


@dataclass(frozen=True)
class Card(Node):
    item: Node


@dataclass(frozen=True)
class BagSum(Node):
    bag: Node


@dataclass(frozen=True)
class BagMin(Node):
    bag: Node


@dataclass(frozen=True)
class BagMax(Node):
    bag: Node


@dataclass(frozen=True)
class BagOf(Node):
    attr: str
    base: Node


@dataclass(frozen=True)
class SeqOf(Node):
    """The sequence attached to an object by an ordered relation."""

    rel: str
    obj: Node


@dataclass(frozen=True)
class SeqMembers(Node):
    seq: Node


@dataclass(frozen=True)
class InSet(Node):
    elem: Node
    base: Node


@dataclass(frozen=True)
class SubsetEq(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class SetLit(Node):
    items: tuple


@dataclass(frozen=True)
class SetUnion(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class SetInter(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class SetDiff(Node):
    left: Node
    right: Node


# Internal nodes introduced by the solver's ground compiler; the parser never
# produces them, but the evaluator understands them.


@dataclass(frozen=True)
class TupleTest(Node):
    rel: str
    src: int
    tgt: int


@dataclass(frozen=True)
class DomTest(Node):
    rel: str
    ref: int


@dataclass(frozen=True)
class RanTest(Node):
    rel: str
    ref: int


def and_all(items) -> Node:
    items = tuple(items)
    if not items:
        return BoolLit(True)
    if len(items) == 1:
        return items[0]
    return And(items)


def substitute(node: Node, mapping: dict) -> Node:
    """Replace free :class:`Var` occurrences per ``mapping`` (capture-aware)."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Quantifier):
        inner = {k: v for k, v in mapping.items() if k != node.var}
        if not inner:
            return node
        return Quantifier(node.kind, node.var, node.type_name, substitute(node.body, inner))
    return _rebuild(node, lambda child: substitute(child, mapping))


def rename_vars(node: Node, renames: dict) -> Node:
    """Rewrite variable names (used when inherited invariants are renamed)."""
    return substitute(node, {old: Var(new) for old, new in renames.items()})


def _rebuild(node: Node, fn):
    changed = False
    values = {}
    for f in node.__dataclass_fields__.values():
        value = getattr(node, f.name)
        if isinstance(value, Node):
            new = fn(value)
            changed |= new is not value
            values[f.name] = new
        elif isinstance(value, tuple) and value and isinstance(value[0], Node):
            new = tuple(fn(v) for v in value)
            changed |= any(a is not b for a, b in zip(new, value))
            values[f.name] = new
        else:
            values[f.name] = value
    return type(node)(**values) if changed else node


def walk(node: Node):
    """Yield every node of the tree, preorder."""
    yield node
    for f in node.__dataclass_fields__.values():
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield from walk(value)
        elif isinstance(value, tuple) and value and isinstance(value[0], Node):
            for item in value:
                yield from walk(item)
