"""The modeling-language front end.

Grammar (see README for the full reference)::

    model          := (classDecl | relDecl | constraintDecl)*
    classDecl      := "class" NAME ":" ("abstract"|"concrete")
                      ["discriminators" NAME ("," NAME)*]
                      ["inherits" parent ("," parent)*]
                      "{" (attrDecl | "invariant" expr ";")* "}"
    parent         := NAME ["via" NAME] ["rename" NAME "/" NAME ("," NAME "/" NAME)*]
    attrDecl       := NAME ":" ("int" INT ".." INT | "nat" | "nat1" | "bool"
                                | "enum" "{" NAME ("," NAME)* "}") ";"
    relDecl        := "relation" NAME ":" NAME "->" NAME kind* ";"
    kind           := "function" | "partial" | "injection" | "surjection"
                      | "bijection" | "composition" ["total"] | "aggregate"
                      | "seq" | "iseq" | "subset" "of" NAME
                      | "reified" "by" NAME ["partial"] | "mult" bounds
                      | "roles" NAME "," NAME
    constraintDecl := "constraint" NAME ":" expr ";"

Expressions use ASCII operators: ``~>`` (single-object role traversal), ``.``
(set role traversal), ``->`` (attribute bag), ``=>`` (unique attribute value),
``closure(R1 + R2)``, ``image(R, S)``, ``inv(R)``, ``dom``/``ran``,
``domres``/``ranres``, ``card``, ``bagsum``/``bagmin``/``bagmax``/``bagof``,
``members(R, o)``, quantifiers ``forall x : T :: body``, and the usual boolean
and integer connectives.  ``//`` starts a line comment.

Parse errors are collected, not first-only; each carries line/column and an
expected-token hint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import expr as E
from .diagnostics import ParseError, ParseFailure
from .errors import CycleError, SortError, TypeConflict, UnknownClass, UnknownRelation
from .model import (
    BoolDomain,
    ClassDef,
    EnumDomain,
    IntInterval,
    Model,
    Nat,
    NatPositive,
    ParentLink,
)
from .relations import Multiplicity, Ordering, RelationDecl, RelationKind
from .semantics import ModelInfo, analyze

KEYWORDS = {
    "class", "abstract", "concrete", "discriminators", "inherits", "via", "rename",
    "invariant", "int", "nat", "nat1", "bool", "enum", "relation", "function",
    "partial", "injection", "surjection", "bijection", "composition", "total",
    "aggregate", "seq", "iseq", "subset", "of", "reified", "by", "mult", "roles",
    "constraint", "forall", "exists", "exists1", "and", "or", "not", "implies",
    "iff", "in", "subseteq", "union", "inter", "diff", "div", "mod", "true", "false",
}

BUILTINS = {
    "closure", "image", "inv", "card", "bagsum", "bagmin", "bagmax", "bagof",
    "members", "dom", "ran", "domres", "ranres",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*)
  | (?P<ws>\s+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op>::|\.\.|~>|->|=>|!=|<=|>=|[{}():;,./+\-*=<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # name | int | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseFailure([ParseError(f"unexpected character {text[pos]!r}", line, col)])
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _PError(Exception):
    def __init__(self, error: ParseError):
        self.error = error


class _Parser:
    def __init__(self, tokens: list, filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename
        self.errors: list = []

    # -- token plumbing ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("name", "op")

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.fail(f"found {self._shown()}", expected=(text,))

    def expect_name(self, what: str = "a name") -> Token:
        token = self.peek()
        if token.kind == "name" and token.text not in KEYWORDS:
            return self.advance()
        raise self.fail(f"expected {what}, found {self._shown()}")

    def expect_int(self) -> int:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return int(token.text)
        if token.text == "-" and self.peek(1).kind == "int":
            self.advance()
            return -int(self.advance().text)
        raise self.fail(f"expected an integer, found {self._shown()}")

    def _shown(self) -> str:
        token = self.peek()
        return "end of file" if token.kind == "eof" else repr(token.text)

    def fail(self, message: str, expected: tuple = ()) -> _PError:
        token = self.peek()
        return _PError(ParseError(message, token.line, token.col, expected))

    def loc(self, token: Token) -> str:
        return f"{self.filename}:{token.line}"

    def sync(self, stops=(";", "}")):
        depth = 0
        while self.peek().kind != "eof":
            text = self.peek().text
            if text == "{":
                depth += 1
            elif text == "}" and depth > 0:
                depth -= 1
                self.advance()
                continue
            elif depth == 0 and text in stops:
                self.advance()
                return
            elif depth == 0 and text in ("class", "relation", "constraint"):
                return
            self.advance()

    # -- declarations ---------------------------------------------------------

    def parse_model(self) -> Model:
        model = Model()
        while self.peek().kind != "eof":
            try:
                if self.at("class"):
                    cdef = self.class_decl()
                    if cdef.name in model.classes or cdef.name in model.relations:
                        raise _PError(
                            ParseError(f"duplicate name {cdef.name!r}", self.peek().line, self.peek().col)
                        )
                    model.classes[cdef.name] = cdef
                elif self.at("relation"):
                    decl = self.relation_decl()
                    if decl.name in model.relations or decl.name in model.classes:
                        raise _PError(
                            ParseError(f"duplicate name {decl.name!r}", self.peek().line, self.peek().col)
                        )
                    model.relations[decl.name] = decl
                elif self.at("constraint"):
                    name, body, loc = self.constraint_decl()
                    if any(name == n for n, _, _ in model.constraints):
                        raise _PError(
                            ParseError(f"duplicate constraint {name!r}", self.peek().line, self.peek().col)
                        )
                    model.constraints.append((name, body, loc))
                else:
                    raise self.fail(
                        f"found {self._shown()}", expected=("class", "relation", "constraint")
                    )
            except _PError as exc:
                self.errors.append(exc.error)
                self.sync()
        return model

    def class_decl(self) -> ClassDef:
        start = self.expect("class")
        name = self.expect_name("a class name").text
        self.expect(":")
        if self.accept("abstract"):
            abstract = True
        elif self.accept("concrete"):
            abstract = False
        else:
            raise self.fail(f"found {self._shown()}", expected=("abstract", "concrete"))
        discriminators = []
        if self.accept("discriminators"):
            discriminators.append(self.expect_name("a discriminator label").text)
            while self.accept(","):
                discriminators.append(self.expect_name("a discriminator label").text)
        parents = []
        if self.accept("inherits"):
            parents.append(self.parent_link())
            while self.accept(","):
                parents.append(self.parent_link())
        self.expect("{")
        attrs = []
        invariants = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.fail("unterminated class body", expected=("}",))
            if self.accept("invariant"):
                invariants.append(self.expression())
                self.expect(";")
            else:
                attr = self.expect_name("an attribute name").text
                if any(attr == a for a, _ in attrs):
                    raise self.fail(f"attribute {attr!r} declared twice")
                self.expect(":")
                attrs.append((attr, self.type_expr()))
                self.expect(";")
        self.expect("}")
        return ClassDef(
            name=name,
            abstract=abstract,
            discriminators=tuple(discriminators),
            parents=tuple(parents),
            own_attrs=tuple(attrs),
            own_invariants=tuple(invariants),
            loc=self.loc(start),
        )

    def parent_link(self) -> ParentLink:
        parent = self.expect_name("a parent class name").text
        discriminator = "default"
        if self.accept("via"):
            discriminator = self.expect_name("a discriminator label").text
        renames = []
        if self.accept("rename"):
            while True:
                new = self.expect_name("the new attribute name").text
                self.expect("/")
                old = self.expect_name("the old attribute name").text
                renames.append((old, new))
                if not self.accept(","):
                    break
        return ParentLink(parent=parent, discriminator=discriminator, renames=tuple(renames))

    def type_expr(self):
        if self.accept("int"):
            lo = self.expect_int()
            self.expect("..")
            hi = self.expect_int()
            if lo > hi:
                raise self.fail(f"empty interval {lo}..{hi}")
            return IntInterval(lo, hi)
        if self.accept("nat"):
            return Nat()
        if self.accept("nat1"):
            return NatPositive()
        if self.accept("bool"):
            return BoolDomain()
        if self.accept("enum"):
            self.expect("{")
            values = [self.expect_name("an enum value").text]
            while self.accept(","):
                values.append(self.expect_name("an enum value").text)
            self.expect("}")
            if len(set(values)) != len(values):
                raise self.fail("enum values must be distinct")
            return EnumDomain(tuple(values))
        raise self.fail(
            f"found {self._shown()}", expected=("int", "nat", "nat1", "bool", "enum")
        )

    def relation_decl(self) -> RelationDecl:
        start = self.expect("relation")
        name = self.expect_name("a relation name").text
        self.expect(":")
        source = self.expect_name("the source class").text
        self.expect("->")
        target = self.expect_name("the target class").text

        function = partial = injection = surjection = bijection = False
        composition = inverse_total = aggregate = False
        ordered = Ordering.NONE
        mult = Multiplicity()
        subset_of = None
        reified_by = None
        reified_total = True
        role_left = role_right = None

        while not self.at(";"):
            if self.accept("function"):
                function = True
            elif self.accept("partial"):
                partial = True
            elif self.accept("injection"):
                injection = True
            elif self.accept("surjection"):
                surjection = True
            elif self.accept("bijection"):
                bijection = True
            elif self.accept("composition"):
                composition = True
                if self.accept("total"):
                    inverse_total = True
            elif self.accept("aggregate"):
                aggregate = True
            elif self.accept("seq"):
                ordered = Ordering.SEQ
            elif self.accept("iseq"):
                ordered = Ordering.ISEQ
            elif self.accept("subset"):
                self.expect("of")
                subset_of = self.expect_name("the parent relation").text
            elif self.accept("reified"):
                self.expect("by")
                reified_by = self.expect_name("the association class").text
                if self.accept("partial"):
                    reified_total = False
            elif self.accept("mult"):
                mult = self.mult_bounds()
            elif self.accept("roles"):
                role_left = self.expect_name("the left role name").text
                self.expect(",")
                role_right = self.expect_name("the right role name").text
            else:
                raise self.fail(
                    f"found {self._shown()}",
                    expected=("a relation kind", ";"),
                )
        self.expect(";")

        if bijection:
            if partial:
                raise self.fail("a bijection cannot be partial")
            kind = RelationKind.BIJECTION
        elif injection and surjection:
            kind = RelationKind.BIJECTION
        elif injection:
            kind = RelationKind.PARTIAL_INJECTION if partial else RelationKind.INJECTION
        elif surjection:
            kind = RelationKind.PARTIAL_SURJECTION if partial else RelationKind.SURJECTION
        elif function or partial:
            kind = RelationKind.PARTIAL_FUNCTION if partial else RelationKind.FUNCTION
        else:
            kind = RelationKind.RELATION

        if ordered is not Ordering.NONE:
            if kind not in (RelationKind.RELATION, RelationKind.FUNCTION):
                raise self.fail("an ordered relation must be a plain function")
            kind = RelationKind.FUNCTION

        return RelationDecl(
            name=name,
            source=source,
            target=target,
            kind=kind,
            composition=composition,
            inverse_total=inverse_total,
            ordered=ordered,
            multiplicity=mult,
            subset_of=subset_of,
            reified_by=reified_by,
            reified_total=reified_total,
            aggregate=aggregate,
            role_left=role_left,
            role_right=role_right,
            loc=self.loc(start),
        )

    def mult_bounds(self) -> Multiplicity:
        first = self.mult_range()
        if self.accept(","):
            second = self.mult_range()
            return Multiplicity(
                src_min=first[0], src_max=first[1], tgt_min=second[0], tgt_max=second[1]
            )
        return Multiplicity(tgt_min=first[0], tgt_max=first[1])

    def mult_range(self):
        lo = self.expect_int()
        if self.accept(".."):
            if self.accept("*"):
                return (lo, None)
            return (lo, self.expect_int())
        return (lo, lo)

    def constraint_decl(self):
        start = self.expect("constraint")
        name = self.expect_name("a constraint name").text
        self.expect(":")
        body = self.expression()
        self.expect(";")
        return name, body, self.loc(start)

    # -- expressions ----------------------------------------------------------

    def expression(self) -> E.Node:
        return self.quantified()

    def quantified(self) -> E.Node:
        for kind in ("forall", "exists", "exists1"):
            if self.at(kind):
                self.advance()
                var = self.expect_name("a bound variable").text
                self.expect(":")
                type_name = self.expect_name("a class name").text
                self.expect("::")
                return E.Quantifier(kind, var, type_name, self.quantified())
        return self.iff_expr()

    def iff_expr(self) -> E.Node:
        node = self.implies_expr()
        while self.accept("iff"):
            node = E.Iff(node, self.implies_expr())
        return node

    def implies_expr(self) -> E.Node:
        node = self.or_expr()
        if self.accept("implies"):
            return E.Implies(node, self.implies_expr())
        return node

    def or_expr(self) -> E.Node:
        node = self.and_expr()
        items = [node]
        while self.accept("or"):
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else E.Or(tuple(items))

    def and_expr(self) -> E.Node:
        items = [self.not_expr()]
        while self.accept("and"):
            items.append(self.not_expr())
        return items[0] if len(items) == 1 else E.And(tuple(items))

    def not_expr(self) -> E.Node:
        if self.accept("not"):
            return E.Not(self.not_expr())
        return self.comparison()

    def comparison(self) -> E.Node:
        node = self.set_expr()
        for op in ("=", "!=", "<=", ">=", "<", ">"):
            if self.accept(op):
                return E.Compare(op, node, self.set_expr())
        if self.accept("in"):
            return E.InSet(node, self.set_expr())
        if self.accept("subseteq"):
            return E.SubsetEq(node, self.set_expr())
        return node

    def set_expr(self) -> E.Node:
        node = self.additive()
        while True:
            if self.accept("union"):
                node = E.SetUnion(node, self.additive())
            elif self.accept("inter"):
                node = E.SetInter(node, self.additive())
            elif self.accept("diff"):
                node = E.SetDiff(node, self.additive())
            else:
                return node

    def additive(self) -> E.Node:
        node = self.multiplicative()
        while True:
            if self.accept("+"):
                node = E.Arith("+", node, self.multiplicative())
            elif self.accept("-"):
                node = E.Arith("-", node, self.multiplicative())
            else:
                return node

    def multiplicative(self) -> E.Node:
        node = self.traversal()
        while True:
            if self.accept("*"):
                node = E.Arith("*", node, self.traversal())
            elif self.accept("div"):
                node = E.Arith("div", node, self.traversal())
            elif self.accept("mod"):
                node = E.Arith("mod", node, self.traversal())
            else:
                return node

    def traversal(self) -> E.Node:
        node = self.unary()
        while True:
            if self.accept("~>"):
                node = E.LeadsTo(node, self.expect_name("a role name").text)
            elif self.accept("."):
                node = E.Dot(node, self.expect_name("a role name").text)
            elif self.accept("->"):
                node = E.Arrow(node, self.accessor_attr())
            elif self.accept("=>"):
                node = E.Harpoon(node, self.accessor_attr())
            else:
                return node

    def accessor_attr(self) -> str:
        token = self.expect_name("an accessor (getXyz)")
        attr = _accessor_to_attr(token.text)
        if attr is None:
            raise _PError(
                ParseError(f"{token.text!r} is not a get-accessor", token.line, token.col)
            )
        return attr

    def unary(self) -> E.Node:
        if self.accept("-"):
            return E.Neg(self.unary())
        return self.primary()

    def primary(self) -> E.Node:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return E.IntLit(int(token.text))
        if self.accept("true"):
            return E.BoolLit(True)
        if self.accept("false"):
            return E.BoolLit(False)
        if self.accept("("):
            node = self.expression()
            self.expect(")")
            return node
        if self.accept("{"):
            items = []
            if not self.at("}"):
                items.append(self.expression())
                while self.accept(","):
                    items.append(self.expression())
            self.expect("}")
            return E.SetLit(tuple(items))
        if token.kind == "name" and token.text not in KEYWORDS:
            if self.peek(1).text == "(" and token.text in BUILTINS:
                return self.builtin()
            if self.peek(1).text == "(":
                attr = _accessor_to_attr(token.text)
                if attr is not None:
                    self.advance()
                    self.expect("(")
                    obj = self.expression()
                    self.expect(")")
                    return E.AttrAccess(obj, attr)
                raise self.fail(f"unknown function {token.text!r}")
            self.advance()
            return E.Var(token.text)
        raise self.fail(f"found {self._shown()} where an expression was expected")

    def builtin(self) -> E.Node:
        name = self.advance().text
        self.expect("(")
        node = self._builtin_body(name)
        self.expect(")")
        return node

    def _builtin_body(self, name: str) -> E.Node:
        match name:
            case "closure":
                return E.TransClosure(self.rel_arg())
            case "inv":
                return E.RelInverse(self.rel_arg())
            case "dom":
                return E.Dom(self.rel_arg())
            case "ran":
                return E.Ran(self.rel_arg())
            case "image":
                rel = self.rel_arg()
                self.expect(",")
                return E.RelImage(rel, self.expression())
            case "domres":
                base = self.expression()
                self.expect(",")
                return E.DomRestrict(base, self.rel_arg())
            case "ranres":
                rel = self.rel_arg()
                self.expect(",")
                return E.RanRestrict(rel, self.expression())
            case "card":
                return E.Card(self.expression())
            case "bagsum":
                return E.BagSum(self.expression())
            case "bagmin":
                return E.BagMin(self.expression())
            case "bagmax":
                return E.BagMax(self.expression())
            case "bagof":
                attr = self.accessor_attr()
                self.expect(",")
                return E.BagOf(attr, self.expression())
            case "members":
                rel = self.expect_name("an ordered relation").text
                self.expect(",")
                return E.SeqMembers(E.SeqOf(rel, self.expression()))
        raise self.fail(f"unknown function {name!r}")

    def rel_arg(self) -> E.Node:
        items = [self.rel_atom()]
        while self.accept("+"):
            items.append(self.rel_atom())
        return items[0] if len(items) == 1 else E.RelUnion(tuple(items))

    def rel_atom(self) -> E.Node:
        if self.at("inv"):
            self.advance()
            self.expect("(")
            node = E.RelInverse(self.rel_arg())
            self.expect(")")
            return node
        if self.at("closure"):
            self.advance()
            self.expect("(")
            node = E.TransClosure(self.rel_arg())
            self.expect(")")
            return node
        token = self.expect_name("a relation name")
        return E.RelName(token.text)


def _accessor_to_attr(name: str) -> str | None:
    if len(name) > 3 and name.startswith("get") and not name[3].islower():
        rest = name[3:]
        return rest[0].lower() + rest[1:]
    return None


def _attr_to_accessor(attr: str) -> str:
    return "get" + attr[0].upper() + attr[1:]


# ---------------------------------------------------------------------------
# Entry points


def parse_model(text: str, filename: str = "<model>") -> Model:
    """Parse model source; raises :class:`ParseFailure` carrying every error."""
    parser = _Parser(tokenize(text), filename)
    model = parser.parse_model()
    errors = list(parser.errors)
    errors.extend(_static_resolution_errors(model, filename))
    if errors:
        raise ParseFailure(errors)
    return model


def parse_expression(text: str) -> E.Node:
    """Parse a standalone constraint expression (mainly for tests)."""
    parser = _Parser(tokenize(text), "<expr>")
    node = parser.expression()
    if parser.peek().kind != "eof":
        parser.errors.append(
            ParseError(f"trailing input {parser._shown()}", parser.peek().line, parser.peek().col)
        )
    if parser.errors:
        raise ParseFailure(parser.errors)
    return node


def load_model(text: str, filename: str = "<model>") -> ModelInfo:
    """Parse and statically check a model: cross-references, inheritance,
    role table, and constraint sorts.  Raises :class:`ParseFailure`."""
    model = parse_model(text, filename)
    try:
        return analyze(model)
    except (SortError, UnknownClass, UnknownRelation, CycleError, TypeConflict) as exc:
        loc = getattr(exc, "loc", None) or ""
        line = _loc_line(loc)
        raise ParseFailure([ParseError(str(exc), line, 1)]) from None


def _loc_line(loc: str) -> int:
    if ":" in loc:
        tail = loc.rsplit(":", 1)[1]
        if tail.isdigit():
            return int(tail)
    return 0


def _static_resolution_errors(model: Model, filename: str) -> list:
    errors = []

    def err(message, loc):
        errors.append(ParseError(message, _loc_line(loc), 1))

    for cdef in model.classes.values():
        for link in cdef.parents:
            if link.parent not in model.classes:
                err(f"class {cdef.name} inherits unknown class {link.parent!r}", cdef.loc)
                continue
            allowed = set(model.classes[link.parent].discriminators)
            seen = {link.parent}
            frontier = [link.parent]
            while frontier:
                current = frontier.pop()
                for up in model.classes[current].parents:
                    if up.parent in model.classes and up.parent not in seen:
                        seen.add(up.parent)
                        allowed |= set(model.classes[up.parent].discriminators)
                        frontier.append(up.parent)
            if not model.classes[link.parent].discriminators:
                allowed.add("default")
            if link.discriminator not in allowed:
                err(
                    f"class {cdef.name}: discriminator {link.discriminator!r} is not "
                    f"declared by {link.parent} or its ancestors",
                    cdef.loc,
                )
    for decl in model.relations.values():
        for endpoint in (decl.source, decl.target):
            if endpoint not in model.classes:
                err(f"relation {decl.name}: unknown class {endpoint!r}", decl.loc)
        if decl.subset_of is not None:
            parent = model.relations.get(decl.subset_of)
            if parent is None:
                err(f"relation {decl.name}: unknown parent relation {decl.subset_of!r}", decl.loc)
            else:
                if (parent.source, parent.target) != (decl.source, decl.target):
                    err(
                        f"relation {decl.name}: subset of {parent.name} needs identical "
                        "source and target types",
                        decl.loc,
                    )
                if parent.ordered is not Ordering.NONE or decl.ordered is not Ordering.NONE:
                    err(
                        f"relation {decl.name}: subset constraints apply to unordered relations",
                        decl.loc,
                    )
        if decl.reified_by is not None and decl.reified_by not in model.classes:
            err(f"relation {decl.name}: unknown association class {decl.reified_by!r}", decl.loc)
        if decl.reified_by is not None and decl.ordered is not Ordering.NONE:
            err(f"relation {decl.name}: ordered relations cannot carry association data", decl.loc)
    return errors


# ---------------------------------------------------------------------------
# Pretty printer


def render_model(model: Model) -> str:
    parts = []
    for cdef in model.classes.values():
        parts.append(_render_class(cdef))
    for decl in model.relations.values():
        parts.append(_render_relation(decl))
    for name, body, _ in model.constraints:
        parts.append(f"constraint {name} : {render_expr(body)};")
    return "\n\n".join(parts) + "\n"


def _render_class(cdef: ClassDef) -> str:
    head = f"class {cdef.name} : {'abstract' if cdef.abstract else 'concrete'}"
    if cdef.discriminators:
        head += " discriminators " + ", ".join(cdef.discriminators)
    if cdef.parents:
        links = []
        for link in cdef.parents:
            piece = link.parent
            if link.discriminator != "default":
                piece += f" via {link.discriminator}"
            if link.renames:
                piece += " rename " + ", ".join(f"{new}/{old}" for old, new in link.renames)
            links.append(piece)
        head += " inherits " + ", ".join(links)
    body = []
    for attr, domain in cdef.own_attrs:
        body.append(f"  {attr} : {domain.render()};")
    for inv in cdef.own_invariants:
        body.append(f"  invariant {render_expr(inv)};")
    if not body:
        return head + " { }"
    return head + " {\n" + "\n".join(body) + "\n}"


def _render_relation(decl: RelationDecl) -> str:
    parts = [f"relation {decl.name} : {decl.source} -> {decl.target}"]
    kind_words = {
        RelationKind.RELATION: "",
        RelationKind.FUNCTION: "function",
        RelationKind.PARTIAL_FUNCTION: "partial",
        RelationKind.INJECTION: "injection",
        RelationKind.PARTIAL_INJECTION: "partial injection",
        RelationKind.SURJECTION: "surjection",
        RelationKind.PARTIAL_SURJECTION: "partial surjection",
        RelationKind.BIJECTION: "bijection",
    }
    if decl.ordered is not Ordering.NONE:
        parts.append("function")
        parts.append(decl.ordered.value)
    elif kind_words[decl.kind]:
        parts.append(kind_words[decl.kind])
    if decl.composition:
        parts.append("composition total" if decl.inverse_total else "composition")
    if decl.aggregate:
        parts.append("aggregate")
    if decl.subset_of:
        parts.append(f"subset of {decl.subset_of}")
    if decl.reified_by:
        parts.append(f"reified by {decl.reified_by}" + ("" if decl.reified_total else " partial"))
    if not decl.multiplicity.trivial():
        m = decl.multiplicity
        if (m.src_min, m.src_max) == (0, None):
            parts.append(f"mult {_render_range(m.tgt_min, m.tgt_max)}")
        else:
            parts.append(
                f"mult {_render_range(m.src_min, m.src_max)}, {_render_range(m.tgt_min, m.tgt_max)}"
            )
    if decl.role_left or decl.role_right:
        parts.append(f"roles {decl.role_left}, {decl.role_right}")
    return " ".join(p for p in parts if p) + ";"


def _render_range(lo, hi) -> str:
    if hi is None:
        return f"{lo}..*"
    if lo == hi:
        return str(lo)
    return f"{lo}..{hi}"


_PREC_QUANT = 0
_PREC_IFF = 1
_PREC_IMPLIES = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_NOT = 5
_PREC_CMP = 6
_PREC_SETOP = 7
_PREC_ADD = 8
_PREC_MUL = 9
_PREC_TRAV = 10
_PREC_UNARY = 11
_PREC_ATOM = 12


def render_expr(node: E.Node, prec: int = 0) -> str:
    text, my_prec = _render(node)
    if my_prec < prec:
        return f"({text})"
    return text


def _render(node: E.Node):
    match node:
        case E.IntLit(v):
            return str(v), _PREC_ATOM
        case E.BoolLit(v):
            return ("true" if v else "false"), _PREC_ATOM
        case E.EnumLit(v) | E.Var(v):
            return v, _PREC_ATOM
        case E.RefLit(ref):
            return f"@{ref}", _PREC_ATOM
        case E.TypeSet(name) | E.RelName(name):
            return name, _PREC_ATOM
        case E.Quantifier(kind, var, type_name, body):
            return f"{kind} {var} : {type_name} :: {render_expr(body, _PREC_QUANT)}", _PREC_QUANT
        case E.Iff(a, b):
            return (
                f"{render_expr(a, _PREC_IMPLIES)} iff {render_expr(b, _PREC_IMPLIES)}",
                _PREC_IFF,
            )
        case E.Implies(a, b):
            return (
                f"{render_expr(a, _PREC_OR)} implies {render_expr(b, _PREC_IMPLIES)}",
                _PREC_IMPLIES,
            )
        case E.Or(items):
            return " or ".join(render_expr(i, _PREC_AND) for i in items), _PREC_OR
        case E.And(items):
            return " and ".join(render_expr(i, _PREC_NOT) for i in items), _PREC_AND
        case E.Not(item):
            return f"not {render_expr(item, _PREC_NOT)}", _PREC_NOT
        case E.Compare(op, a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} {op} {render_expr(b, _PREC_SETOP)}",
                _PREC_CMP,
            )
        case E.InSet(a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} in {render_expr(b, _PREC_SETOP)}",
                _PREC_CMP,
            )
        case E.SubsetEq(a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} subseteq {render_expr(b, _PREC_SETOP)}",
                _PREC_CMP,
            )
        case E.SetUnion(a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} union {render_expr(b, _PREC_ADD)}",
                _PREC_SETOP,
            )
        case E.SetInter(a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} inter {render_expr(b, _PREC_ADD)}",
                _PREC_SETOP,
            )
        case E.SetDiff(a, b):
            return (
                f"{render_expr(a, _PREC_SETOP)} diff {render_expr(b, _PREC_ADD)}",
                _PREC_SETOP,
            )
        case E.Arith(op, a, b):
            if op in ("+", "-"):
                return (
                    f"{render_expr(a, _PREC_ADD)} {op} {render_expr(b, _PREC_MUL)}",
                    _PREC_ADD,
                )
            return (
                f"{render_expr(a, _PREC_MUL)} {op} {render_expr(b, _PREC_TRAV)}",
                _PREC_MUL,
            )
        case E.Neg(item):
            return f"-{render_expr(item, _PREC_UNARY)}", _PREC_UNARY
        case E.LeadsTo(obj, role):
            return f"{render_expr(obj, _PREC_TRAV)} ~> {role}", _PREC_TRAV
        case E.Dot(base, role):
            return f"{render_expr(base, _PREC_TRAV)} . {role}", _PREC_TRAV
        case E.Arrow(base, attr):
            return f"{render_expr(base, _PREC_TRAV)} -> {_attr_to_accessor(attr)}", _PREC_TRAV
        case E.Harpoon(base, attr):
            return f"{render_expr(base, _PREC_TRAV)} => {_attr_to_accessor(attr)}", _PREC_TRAV
        case E.AttrAccess(obj, attr):
            return f"{_attr_to_accessor(attr)}({render_expr(obj)})", _PREC_ATOM
        case E.TransClosure(rel):
            return f"closure({_render_rel(rel)})", _PREC_ATOM
        case E.RelInverse(rel):
            return f"inv({_render_rel(rel)})", _PREC_ATOM
        case E.RelUnion(_):
            return _render_rel(node), _PREC_ATOM
        case E.RelImage(rel, base):
            return f"image({_render_rel(rel)}, {render_expr(base)})", _PREC_ATOM
        case E.Dom(rel):
            return f"dom({_render_rel(rel)})", _PREC_ATOM
        case E.Ran(rel):
            return f"ran({_render_rel(rel)})", _PREC_ATOM
        case E.DomRestrict(base, rel):
            return f"domres({render_expr(base)}, {_render_rel(rel)})", _PREC_ATOM
        case E.RanRestrict(rel, base):
            return f"ranres({_render_rel(rel)}, {render_expr(base)})", _PREC_ATOM
        case E.Card(item):
            return f"card({render_expr(item)})", _PREC_ATOM
        case E.BagSum(bag):
            return f"bagsum({render_expr(bag)})", _PREC_ATOM
        case E.BagMin(bag):
            return f"bagmin({render_expr(bag)})", _PREC_ATOM
        case E.BagMax(bag):
            return f"bagmax({render_expr(bag)})", _PREC_ATOM
        case E.BagOf(attr, base):
            return f"bagof({_attr_to_accessor(attr)}, {render_expr(base)})", _PREC_ATOM
        case E.SeqMembers(E.SeqOf(rel, obj)):
            return f"members({rel}, {render_expr(obj)})", _PREC_ATOM
        case E.SetLit(items):
            return "{" + ", ".join(render_expr(i) for i in items) + "}", _PREC_ATOM
    raise ValueError(f"cannot render {type(node).__name__}")


def _render_rel(node: E.Node) -> str:
    match node:
        case E.RelName(name):
            return name
        case E.RelUnion(items):
            return " + ".join(_render_rel(i) for i in items)
        case E.RelInverse(rel):
            return f"inv({_render_rel(rel)})"
        case E.TransClosure(rel):
            return f"closure({_render_rel(rel)})"
        case E.Var(name):
            return name
    return render_expr(node)


# ---------------------------------------------------------------------------
# Expansion listing


def expand(info: ModelInfo) -> str:
    """List every class in its explicit, flattened form: the full attribute
    structure, the merged invariant, and the type extent equations."""
    model = info.model
    lines = []
    for name in sorted(model.classes):
        cdef = model.classes[name]
        flat = info.flat(name)
        lines.append(f"class {name} ({'abstract' if cdef.abstract else 'concrete'})")
        if flat.ancestors:
            lines.append("  ancestors: " + ", ".join(sorted(flat.ancestors)))
        if cdef.discriminators:
            lines.append("  discriminators: " + ", ".join(cdef.discriminators))
        if flat.attrs:
            lines.append("  attrs:")
            for attr in sorted(flat.attrs):
                lines.append(f"    {attr} : {flat.attrs[attr].render()}")
        lines.append(f"  invariant: {render_expr(flat.invariant)}")
        lines.append("")
    names = sorted(model.classes)
    lines.append(
        "instance sets are pairwise disjoint: "
        + ", ".join(f"instances({n})" for n in names)
    )
    lines.append("type extents:")
    for name in names:
        children = set()
        for group in info.lattice.discriminator_partitions.get(name, {}).values():
            children |= group
        terms = [f"instances({name})"] + sorted(children)
        lines.append(f"  {name} = " + " ∪ ".join(terms))
    return "\n".join(lines) + "\n"
