"""Static sort checking, name resolution, and the expression evaluator.

``analyze`` turns a raw model into a :class:`ModelInfo` carrying the type
lattice, flattened classes, and the role table; resolution rewrites bare names
into typed leaves (type extents, relations, enum literals) and assigns sorts.
Sort checking happens once at model load so evaluation never re-checks.

Evaluation is denotational and pure: quantifiers range over type extents,
traversal follows declared roles, and all bag construction is independent of
iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as E
from .errors import ArithmeticEvalError, NonUniqueValue, SortError
from .model import (
    FlatClass,
    Model,
    TypeLattice,
    build_type_lattice,
    domain_sort,
    get_attr,
    resolve_class,
    type_extent,
)
from .relations import (
    Ordering,
    Role,
    build_role_table,
    relation_pairs,
    role_image,
    role_inverse_image,
)

BOOL, INT, OBJ, SET, SEQ, REL, ENUM = "bool", "int", "obj", "set", "seq", "rel", "enum"


def bag_sort(elem: str) -> tuple:
    return ("bag", elem)


@dataclass
class ModelInfo:
    """A model together with everything the static passes derive from it."""

    model: Model
    lattice: TypeLattice
    flats: dict  # class name -> FlatClass
    roles: dict  # role name -> Role
    attr_sorts: dict  # attr name -> sort (unique across classes or absent)
    invariants: dict  # class name -> resolved invariant Expr
    constraints: list  # (name, resolved Expr, loc)

    def flat(self, name: str) -> FlatClass:
        return self.flats[name]


def analyze(model: Model) -> ModelInfo:
    """Build the lattice, flatten every class, resolve names, and sort-check
    all invariants and global constraints.  Raises :class:`SortError` on any
    ill-sorted or unresolvable expression."""
    lattice = build_type_lattice(model)
    flats = {name: resolve_class(model, name) for name in model.classes}
    roles = build_role_table(model)
    attr_sorts: dict = {}
    for flat in flats.values():
        for attr, domain in flat.attrs.items():
            sorts = attr_sorts.setdefault(attr, set())
            sorts.add(domain_sort(domain))
    info = ModelInfo(
        model=model,
        lattice=lattice,
        flats=flats,
        roles=roles,
        attr_sorts={a: next(iter(s)) if len(s) == 1 else None for a, s in attr_sorts.items()},
        invariants={},
        constraints=[],
    )
    for name, flat in flats.items():
        try:
            info.invariants[name] = check_boolean(flat.invariant, info, attr_class=flat)
        except SortError as exc:
            raise SortError(f"invariant of class {name}: {exc}") from None
    for cname, body, loc in model.constraints:
        try:
            info.constraints.append((cname, check_boolean(body, info), loc))
        except SortError as exc:
            raise SortError(f"constraint {cname}: {exc}", loc=loc) from None
    return info


# ---------------------------------------------------------------------------
# Resolution and sort checking


def resolve_expr(node: E.Node, info: ModelInfo, bound: dict | None = None, attr_class: FlatClass | None = None):
    """Resolve names and check sorts; returns ``(resolved_node, sort)``.

    ``bound`` maps quantified variables to their type names.  ``attr_class``
    is set when checking a class invariant, whose free names denote the
    class's own (flattened) attributes.
    """
    return _Resolver(info, attr_class).resolve(node, dict(bound or {}))


def check_boolean(node: E.Node, info: ModelInfo, attr_class: FlatClass | None = None) -> E.Node:
    resolved, sort = resolve_expr(node, info, attr_class=attr_class)
    if sort != BOOL:
        raise SortError(f"expected a boolean expression, found {sort}")
    return resolved


class _Resolver:
    def __init__(self, info: ModelInfo, attr_class: FlatClass | None):
        self.info = info
        self.attr_class = attr_class

    def fail(self, message):
        raise SortError(message)

    def attr_sort(self, attr: str) -> str:
        sort = self.info.attr_sorts.get(attr)
        if sort is None:
            if attr in self.info.attr_sorts:
                self.fail(f"attribute {attr!r} has conflicting sorts across classes")
            self.fail(f"unknown attribute {attr!r}")
        return sort

    def role(self, name: str) -> Role:
        role = self.info.roles.get(name)
        if role is None:
            self.fail(f"unknown role {name!r}")
        return role

    def resolve(self, node: E.Node, bound: dict):
        info = self.info
        match node:
            case E.IntLit():
                return node, INT
            case E.BoolLit():
                return node, BOOL
            case E.RefLit():
                return node, OBJ
            case E.EnumLit():
                return node, ENUM
            case E.Var(name):
                if name in bound:
                    return node, OBJ
                if self.attr_class is not None and name in self.attr_class.attrs:
                    return node, domain_sort(self.attr_class.attrs[name])
                if name in info.model.classes:
                    return E.TypeSet(name), SET
                if name in info.model.relations:
                    return E.RelName(name), REL
                for flat in info.flats.values():
                    for domain in flat.attrs.values():
                        if hasattr(domain, "values") and name in domain.values:
                            return E.EnumLit(name), ENUM
                self.fail(f"unknown name {name!r}")
            case E.TypeSet(name):
                if name not in info.model.classes:
                    self.fail(f"unknown class {name!r}")
                return node, SET
            case E.RelName(name):
                if name not in info.model.relations:
                    self.fail(f"unknown relation {name!r}")
                return node, REL
            case E.Quantifier(kind, var, type_name, body):
                if type_name not in info.model.classes:
                    self.fail(f"quantifier over unknown class {type_name!r}")
                inner = dict(bound)
                inner[var] = type_name
                rbody, sort = self.resolve(body, inner)
                if sort != BOOL:
                    self.fail(f"quantifier body must be boolean, found {sort}")
                return E.Quantifier(kind, var, type_name, rbody), BOOL
            case E.And(items) | E.Or(items):
                ritems = tuple(self.expect(i, bound, BOOL, "boolean operand") for i in items)
                return type(node)(ritems), BOOL
            case E.Not(item):
                return E.Not(self.expect(item, bound, BOOL, "boolean operand")), BOOL
            case E.Implies(a, b) | E.Iff(a, b):
                ra = self.expect(a, bound, BOOL, "boolean operand")
                rb = self.expect(b, bound, BOOL, "boolean operand")
                return type(node)(ra, rb), BOOL
            case E.Compare(op, left, right):
                rl, sl = self.resolve(left, bound)
                rr, sr = self.resolve(right, bound)
                if op in ("<", "<=", ">", ">="):
                    if sl != INT or sr != INT:
                        self.fail(f"ordering {op!r} needs integers, found {sl} and {sr}")
                elif sl != sr:
                    self.fail(f"{op!r} compares unlike sorts {sl} and {sr}")
                return E.Compare(op, rl, rr), BOOL
            case E.Arith(op, left, right):
                rl = self.expect(left, bound, INT, "integer operand")
                rr = self.expect(right, bound, INT, "integer operand")
                return E.Arith(op, rl, rr), INT
            case E.Neg(item):
                return E.Neg(self.expect(item, bound, INT, "integer operand")), INT
            case E.AttrAccess(obj, attr):
                robj = self.expect(obj, bound, OBJ, "object operand of an accessor")
                return E.AttrAccess(robj, attr), self.attr_sort(attr)
            case E.LeadsTo(obj, role):
                self.role(role)
                robj = self.expect(obj, bound, OBJ, "object operand of '~>'")
                return E.LeadsTo(robj, role), SET
            case E.Dot(base, role):
                self.role(role)
                rbase = self.expect(base, bound, SET, "set operand of '.'")
                return E.Dot(rbase, role), SET
            case E.Arrow(base, attr):
                rbase = self.expect(base, bound, SET, "set operand of '->'")
                return E.Arrow(rbase, attr), bag_sort(self.attr_sort(attr))
            case E.Harpoon(base, attr):
                rbase = self.expect(base, bound, SET, "set operand of '=>'")
                return E.Harpoon(rbase, attr), self.attr_sort(attr)
            case E.BagOf(attr, base):
                rbase = self.expect(base, bound, SET, "set operand of bagof")
                return E.BagOf(attr, rbase), bag_sort(self.attr_sort(attr))
            case E.BagSum(bag) | E.BagMin(bag) | E.BagMax(bag):
                rbag, sort = self.resolve(bag, bound)
                if sort != bag_sort(INT):
                    self.fail(f"bag aggregate needs a bag of integers, found {sort}")
                return type(node)(rbag), INT
            case E.RelImage(rel, base):
                rrel = self.expect(rel, bound, REL, "relation operand of image")
                rbase = self.expect(base, bound, SET, "set operand of image")
                return E.RelImage(rrel, rbase), SET
            case E.RelInverse(rel):
                return E.RelInverse(self.expect(rel, bound, REL, "relation operand")), REL
            case E.RelUnion(items):
                ritems = tuple(self.expect(i, bound, REL, "relation operand") for i in items)
                return E.RelUnion(ritems), REL
            case E.TransClosure(rel):
                return E.TransClosure(self.expect(rel, bound, REL, "relation operand")), REL
            case E.DomRestrict(base, rel):
                rbase = self.expect(base, bound, SET, "set operand of domres")
                rrel = self.expect(rel, bound, REL, "relation operand of domres")
                return E.DomRestrict(rbase, rrel), REL
            case E.RanRestrict(rel, base):
                rrel = self.expect(rel, bound, REL, "relation operand of ranres")
                rbase = self.expect(base, bound, SET, "set operand of ranres")
                return E.RanRestrict(rrel, rbase), REL
            case E.Dom(rel) | E.Ran(rel):
                rrel = self.expect(rel, bound, REL, "relation operand")
                return type(node)(rrel), SET
            case E.Card(item):
                ritem, sort = self.resolve(item, bound)
                if sort not in (SET, SEQ):
                    self.fail(f"card needs a set or sequence, found {sort}")
                return E.Card(ritem), INT
            case E.SeqOf(rel, obj):
                decl = self.info.model.relations.get(rel)
                if decl is None:
                    self.fail(f"unknown relation {rel!r}")
                if decl.ordered is Ordering.NONE:
                    self.fail(f"relation {rel!r} is not ordered")
                robj = self.expect(obj, bound, OBJ, "object operand of members")
                return E.SeqOf(rel, robj), SEQ
            case E.SeqMembers(seq):
                return E.SeqMembers(self.expect(seq, bound, SEQ, "sequence operand")), SET
            case E.InSet(elem, base):
                relem = self.expect(elem, bound, OBJ, "element of 'in'")
                rbase = self.expect(base, bound, SET, "set operand of 'in'")
                return E.InSet(relem, rbase), BOOL
            case E.SubsetEq(left, right):
                rl, sl = self.resolve(left, bound)
                rr, sr = self.resolve(right, bound)
                if sl != sr or sl not in (SET, REL):
                    self.fail(f"subseteq needs two sets or two relations, found {sl} and {sr}")
                return E.SubsetEq(rl, rr), BOOL
            case E.SetLit(items):
                ritems = tuple(self.expect(i, bound, OBJ, "set member") for i in items)
                return E.SetLit(ritems), SET
            case E.SetUnion(a, b) | E.SetInter(a, b) | E.SetDiff(a, b):
                ra = self.expect(a, bound, SET, "set operand")
                rb = self.expect(b, bound, SET, "set operand")
                return type(node)(ra, rb), SET
            case E.TupleTest() | E.DomTest() | E.RanTest():
                return node, BOOL
        self.fail(f"cannot sort-check {type(node).__name__}")

    def expect(self, node: E.Node, bound: dict, sort, what: str) -> E.Node:
        resolved, actual = self.resolve(node, bound)
        if actual != sort:
            self.fail(f"{what} must be {sort}, found {actual}")
        return resolved


# ---------------------------------------------------------------------------
# Evaluation


class InstanceContext:
    """Evaluation context over a concrete object graph."""

    def __init__(self, info: ModelInfo, instance):
        self.info = info
        self.instance = instance
        self._extents: dict = {}
        self._pairs: dict = {}

    def extent(self, class_name: str) -> frozenset:
        if class_name not in self._extents:
            self._extents[class_name] = type_extent(self.instance, self.info.lattice, class_name)
        return self._extents[class_name]

    def attr(self, ref: int, attr: str):
        return get_attr(self.instance, ref, attr)

    def pairs(self, rel: str) -> frozenset:
        if rel not in self._pairs:
            self._pairs[rel] = relation_pairs(self.instance, self.info.model.relations[rel])
        return self._pairs[rel]

    def image(self, rel: str, ref: int) -> frozenset:
        return role_image(self.instance, self.info.model.relations[rel], ref)

    def preimage(self, rel: str, ref: int) -> frozenset:
        return role_inverse_image(self.instance, self.info.model.relations[rel], ref)

    def seq(self, rel: str, ref: int) -> tuple:
        return tuple(self.instance.sequences.get(rel, {}).get(ref, ()))

    def has_tuple(self, rel: str, src: int, tgt: int) -> bool:
        return (src, tgt) in self.pairs(rel)

    def dom_test(self, rel: str, ref: int) -> bool:
        return any(s == ref for (s, _) in self.pairs(rel))

    def ran_test(self, rel: str, ref: int) -> bool:
        return any(t == ref for (_, t) in self.pairs(rel))


def evaluate(node: E.Node, ctx, env: dict | None = None):
    """Evaluate a resolved expression to a value.

    Values are booleans, integers, enum labels, object references, frozensets
    of references, relation values (frozensets of pairs), sequences (tuples),
    or :class:`~oocp.expr.Bag` instances.
    """
    return _eval(node, ctx, env or {})


def _eval(node: E.Node, ctx, env: dict):
    match node:
        case E.IntLit(value) | E.BoolLit(value) | E.EnumLit(value):
            return value
        case E.RefLit(ref):
            return ref
        case E.Var(name):
            return env[name]
        case E.TypeSet(name):
            return ctx.extent(name)
        case E.RelName(name):
            return ctx.pairs(name)
        case E.Quantifier(kind, var, type_name, body):
            hits = 0
            for ref in sorted(ctx.extent(type_name)):
                env2 = dict(env)
                env2[var] = ref
                value = _eval(body, ctx, env2)
                if kind == "forall":
                    if not value:
                        return False
                elif value:
                    if kind == "exists":
                        return True
                    hits += 1
                    if hits > 1:
                        return False
            if kind == "forall":
                return True
            if kind == "exists":
                return False
            return hits == 1
        case E.And(items):
            return all(_eval(i, ctx, env) for i in items)
        case E.Or(items):
            return any(_eval(i, ctx, env) for i in items)
        case E.Not(item):
            return not _eval(item, ctx, env)
        case E.Implies(left, right):
            return (not _eval(left, ctx, env)) or bool(_eval(right, ctx, env))
        case E.Iff(left, right):
            return bool(_eval(left, ctx, env)) == bool(_eval(right, ctx, env))
        case E.Compare(op, left, right):
            lv = _eval(left, ctx, env)
            rv = _eval(right, ctx, env)
            match op:
                case "=":
                    return lv == rv
                case "!=":
                    return lv != rv
                case "<":
                    return lv < rv
                case "<=":
                    return lv <= rv
                case ">":
                    return lv > rv
                case ">=":
                    return lv >= rv
        case E.Arith(op, left, right):
            lv = _eval(left, ctx, env)
            rv = _eval(right, ctx, env)
            match op:
                case "+":
                    return lv + rv
                case "-":
                    return lv - rv
                case "*":
                    return lv * rv
                case "div":
                    if rv == 0:
                        raise ArithmeticEvalError("division by zero")
                    return lv // rv
                case "mod":
                    if rv == 0:
                        raise ArithmeticEvalError("modulo by zero")
                    return lv % rv
        case E.Neg(item):
            return -_eval(item, ctx, env)
        case E.AttrAccess(obj, attr):
            return ctx.attr(_eval(obj, ctx, env), attr)
        case E.LeadsTo(obj, role):
            return _role_apply(ctx, role, frozenset({_eval(obj, ctx, env)}))
        case E.Dot(base, role):
            return _role_apply(ctx, role, _eval(base, ctx, env))
        case E.Arrow(base, attr) | E.BagOf(attr, base):
            refs = _eval(base, ctx, env)
            return E.bag_of(attr, refs, ctx.attr)
        case E.Harpoon(base, attr):
            refs = _eval(base, ctx, env)
            bag = E.bag_of(attr, refs, ctx.attr)
            if len(bag) != 1:
                raise NonUniqueValue(
                    f"'=>' over attribute {attr!r} found {len(bag)} distinct values"
                )
            return next(iter(bag.values()))
        case E.BagSum(bag):
            return E.bagsum(_eval(bag, ctx, env))
        case E.BagMin(bag):
            return E.bagmin(_eval(bag, ctx, env))
        case E.BagMax(bag):
            return E.bagmax(_eval(bag, ctx, env))
        case E.RelImage(rel, base):
            pairs = _eval(rel, ctx, env)
            refs = _eval(base, ctx, env)
            return frozenset(t for (s, t) in pairs if s in refs)
        case E.RelInverse(rel):
            return frozenset((t, s) for (s, t) in _eval(rel, ctx, env))
        case E.RelUnion(items):
            out: frozenset = frozenset()
            for item in items:
                out |= _eval(item, ctx, env)
            return out
        case E.TransClosure(rel):
            return E.transitive_closure(_eval(rel, ctx, env))
        case E.DomRestrict(base, rel):
            refs = _eval(base, ctx, env)
            return frozenset((s, t) for (s, t) in _eval(rel, ctx, env) if s in refs)
        case E.RanRestrict(rel, base):
            refs = _eval(base, ctx, env)
            return frozenset((s, t) for (s, t) in _eval(rel, ctx, env) if t in refs)
        case E.Dom(rel):
            return frozenset(s for (s, _) in _eval(rel, ctx, env))
        case E.Ran(rel):
            return frozenset(t for (_, t) in _eval(rel, ctx, env))
        case E.Card(item):
            return len(_eval(item, ctx, env))
        case E.SeqOf(rel, obj):
            return ctx.seq(rel, _eval(obj, ctx, env))
        case E.SeqMembers(seq):
            return frozenset(_eval(seq, ctx, env))
        case E.InSet(elem, base):
            return _eval(elem, ctx, env) in _eval(base, ctx, env)
        case E.SubsetEq(left, right):
            return frozenset(_eval(left, ctx, env)) <= frozenset(_eval(right, ctx, env))
        case E.SetLit(items):
            return frozenset(_eval(i, ctx, env) for i in items)
        case E.SetUnion(a, b):
            return frozenset(_eval(a, ctx, env)) | frozenset(_eval(b, ctx, env))
        case E.SetInter(a, b):
            return frozenset(_eval(a, ctx, env)) & frozenset(_eval(b, ctx, env))
        case E.SetDiff(a, b):
            return frozenset(_eval(a, ctx, env)) - frozenset(_eval(b, ctx, env))
        case E.TupleTest(rel, src, tgt):
            return ctx.has_tuple(rel, src, tgt)
        case E.DomTest(rel, ref):
            return ctx.dom_test(rel, ref)
        case E.RanTest(rel, ref):
            return ctx.ran_test(rel, ref)
    raise AssertionError(f"cannot evaluate {type(node).__name__}")


def _role_apply(ctx, role_name: str, refs) -> frozenset:
    role = ctx.info.roles[role_name]
    out = set()
    for ref in refs:
        out |= ctx.image(role.relation, ref) if role.forward else ctx.preimage(role.relation, ref)
    return frozenset(out)
