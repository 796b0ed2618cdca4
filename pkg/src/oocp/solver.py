"""Bounded finite model generation: complete a partial object graph into every
valid instance within configured bounds.

The search runs in two phases.  A *skeleton* fixes the object table: concrete
classes for input objects declared under open (possibly abstract) types, and a
count of fresh objects per concrete class, with symmetry broken by allocating
references in ascending order.  Each skeleton then becomes a finite CSP over
attribute values, relation tuples, sequences, and association data; the CSP is
solved by chronological backtracking with forward checking (a constraint whose
variables are all assigned is checked; with one unassigned variable left it
filters that variable's domain).

Variable order is fixed for reproducibility: attribute variables first (more
derived classes first, then by reference), then relation tuples source-major,
then sequences, then association data.  Value order is ascending.  Candidate
solutions are validated against the definitive validator, canonicalized, and
deduplicated, so no two emitted instances share a canonical form.

``brute_force_enumerate`` is the reference semantics: it walks the same
variable space exhaustively, keeps whatever the validator accepts, and ignores
every inference mechanism above, which makes it a fair oracle for ``solve``.
"""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, field

from . import expr as E
from .errors import BoundWarning, BudgetExceeded, EvalError, OocpError, OracleTooLarge
from .instance import Instance, ObjectRec, PartialInstance, Restriction, canonical_key, canonicalize, validate
from .model import Model, unbounded
from .relations import Ordering, RelationKind
from .semantics import ModelInfo, analyze, evaluate

EMPTY = PartialInstance()


@dataclass
class SolveConfig:
    """Search bounds and policies.

    ``max_per_class`` caps object counts by class name: a concrete name caps
    its creation class, an abstract name caps the whole type extent (the union
    of its concrete descendants).  Classes it does not mention get
    ``default_max_per_class``.  Objects of the partial input are always kept,
    caps notwithstanding.  Unbounded integer attribute domains are clipped to
    ``0..default_int_bound`` during search only; validation never clips.  The
    partition policy forces every pool reference to be used by an object.
    """

    max_per_class: dict = field(default_factory=dict)
    default_max_per_class: int = 3
    pool_size: int | None = None
    default_int_bound: int = 16
    partition: bool = False
    max_solutions: int | None = None
    time_budget: float | None = None
    oracle_guard: int = 10_000_000


@dataclass
class SolveResult:
    status: int  # 0 solutions found, 1 unsatisfiable, 2 budget exceeded
    solutions: list

    STATUS_SAT = 0
    STATUS_UNSAT = 1
    STATUS_BUDGET = 2
    STATUS_INPUT_ERROR = 3


def solve(model_or_info, partial: PartialInstance | None = None, config: SolveConfig | None = None):
    """Yield every valid completion of ``partial`` within bounds, one canonical
    instance per isomorphism class, in a deterministic order."""
    info = model_or_info if isinstance(model_or_info, ModelInfo) else analyze(model_or_info)
    partial = partial if partial is not None else EMPTY
    config = config or SolveConfig()
    _check_inputs(info, partial, config)

    deadline = time.monotonic() + config.time_budget if config.time_budget else None
    seen: set = set()
    emitted = 0
    hit_bound = False
    for skeleton in _skeletons(info, partial, config):
        problem = _Problem(info, skeleton, partial, config)
        if not problem.feasible:
            continue
        for assignment in problem.search(deadline):
            candidate = problem.build_instance(assignment)
            report = validate(info, candidate, config)
            if not report.valid:
                raise AssertionError(
                    "solver emitted an invalid instance: "
                    + "; ".join(d.render() for d in report.diagnostics)
                )
            if problem.touches_int_bound(assignment):
                hit_bound = True
            canonical = canonicalize(candidate)
            key = _key(canonical)
            if key in seen:
                continue
            seen.add(key)
            yield canonical
            emitted += 1
            if config.max_solutions is not None and emitted >= config.max_solutions:
                if hit_bound:
                    _warn_bound(config)
                return
    if hit_bound:
        _warn_bound(config)


def solve_collect(model_or_info, partial=None, config: SolveConfig | None = None) -> SolveResult:
    """Run ``solve`` to completion and report a status code."""
    solutions = []
    try:
        for solution in solve(model_or_info, partial, config):
            solutions.append(solution)
    except BudgetExceeded:
        return SolveResult(SolveResult.STATUS_BUDGET, solutions)
    status = SolveResult.STATUS_SAT if solutions else SolveResult.STATUS_UNSAT
    return SolveResult(status, solutions)


def brute_force_enumerate(model_or_info, partial=None, config: SolveConfig | None = None) -> list:
    """Naive generate-and-test reference semantics for :func:`solve`.

    Enumerates every assignment of every search variable, keeps the ones the
    validator accepts, and returns the deduplicated canonical forms.  Guarded:
    raises :class:`OracleTooLarge` when the assignment space exceeds
    ``config.oracle_guard``.
    """
    info = model_or_info if isinstance(model_or_info, ModelInfo) else analyze(model_or_info)
    partial = partial if partial is not None else EMPTY
    config = config or SolveConfig()
    _check_inputs(info, partial, config)

    problems = []
    space = 0
    for skeleton in _skeletons(info, partial, config):
        problem = _Problem(info, skeleton, partial, config, compile_constraints=False)
        if not problem.feasible:
            continue
        size = 1
        for var in problem.order:
            size *= len(problem.domains[var])
            if size > config.oracle_guard:
                raise OracleTooLarge(f"assignment space exceeds {config.oracle_guard}")
        space += size
        if space > config.oracle_guard:
            raise OracleTooLarge(f"assignment space exceeds {config.oracle_guard}")
        problems.append(problem)

    out: dict = {}
    for problem in problems:
        names = problem.order
        for values in itertools.product(*(problem.domains[v] for v in names)):
            assignment = dict(problem.fixed)
            assignment.update(zip(names, values))
            candidate = problem.build_instance(assignment)
            if validate(info, candidate, config).valid:
                canonical = canonicalize(candidate)
                out.setdefault(_key(canonical), canonical)
    return [out[k] for k in sorted(out)]


def _key(canonical: Instance) -> str:
    from .instance import save_instance

    return save_instance(canonical)


def _warn_bound(config: SolveConfig):
    warnings.warn(
        f"a solution touched the integer search bound {config.default_int_bound}; "
        "solutions beyond the bound may exist",
        BoundWarning,
        stacklevel=3,
    )


def _check_inputs(info: ModelInfo, partial: PartialInstance, config: SolveConfig):
    refs = [rec.ref for rec in partial.objects]
    if len(set(refs)) != len(refs):
        raise OocpError("partial input binds a reference twice")
    if config.partition:
        if not config.pool_size:
            raise OocpError("the partition policy needs a pool size")
        pool = set(range(1, config.pool_size + 1))
        if not set(refs) <= pool:
            raise OocpError("partial input references fall outside the pool")
    for name in config.max_per_class:
        if name not in info.model.classes:
            raise OocpError(f"max-per-class names unknown class {name!r}")
    for rel, pairs in partial.tuples.items():
        if rel not in info.model.relations:
            raise OocpError(f"partial input names unknown relation {rel!r}")


# ---------------------------------------------------------------------------
# Phase 1: skeletons


@dataclass
class _Skeleton:
    recs: list  # (ref, class name, {attr: fixed value | Restriction})
    extents: dict  # class name -> frozenset of refs
    pool: frozenset | None


def _skeletons(info: ModelInfo, partial: PartialInstance, config: SolveConfig):
    model = info.model
    concrete = sorted(name for name, c in model.classes.items() if not c.abstract)
    floaters = []  # (rec, concrete choices)
    fixed_by_class: dict = {name: [] for name in concrete}
    for rec in sorted(partial.objects, key=lambda r: r.ref):
        choices = info.lattice.concrete_subtypes(model, rec.cls)
        if not choices:
            return  # an object of a type with no concrete subtype: unsatisfiable
        if len(choices) == 1 and choices[0] == rec.cls:
            fixed_by_class[rec.cls].append(rec)
        else:
            floaters.append((rec, choices))

    input_refs = {rec.ref for rec in partial.objects}

    for chosen in itertools.product(*(choices for _, choices in floaters)):
        by_class = {name: list(fixed_by_class[name]) for name in concrete}
        for (rec, _), cls in zip(floaters, chosen):
            by_class[cls].append(rec)
        base = {name: len(by_class[name]) for name in concrete}
        budgets = []
        for name in concrete:
            cap = config.max_per_class.get(name, config.default_max_per_class)
            budgets.append(range(0, max(cap - base[name], 0) + 1))
        for extras in itertools.product(*budgets):
            counts = {name: base[name] + extras[i] for i, name in enumerate(concrete)}
            if not _counts_ok(info, counts, config, input_refs):
                continue
            skeleton = _build_skeleton(info, by_class, extras, counts, config, input_refs)
            if skeleton is not None:
                yield skeleton


def _counts_ok(info: ModelInfo, counts: dict, config: SolveConfig, input_refs) -> bool:
    # a bound on a concrete class caps that creation class; a bound on an
    # abstract class caps the whole type extent (its concrete descendants)
    for name, cap in config.max_per_class.items():
        if not info.model.classes[name].abstract:
            continue
        extent = sum(
            counts.get(member, 0)
            for member in info.lattice.subtypes(name)
            if member in counts
        )
        if extent > cap:
            return False
    total = sum(counts.values())
    if config.partition and total != config.pool_size:
        return False
    return _relation_cardinalities_ok(info, counts)


def _relation_cardinalities_ok(info: ModelInfo, counts: dict) -> bool:
    """Cheap tuple-count feasibility: the properties of each relation pin a
    window on how many tuples can exist between extents of the given sizes."""

    def extent_size(name: str) -> int:
        return sum(counts.get(m, 0) for m in info.lattice.subtypes(name) if m in counts)

    for decl in info.model.relations.values():
        src_n = extent_size(decl.source)
        tgt_n = extent_size(decl.target)
        props = decl.properties()
        mult = decl.multiplicity
        ordered = decl.ordered is not Ordering.NONE
        if ordered:
            per_source = mult.tgt_max if mult.tgt_max is not None else tgt_n
            hi = src_n * per_source
        else:
            hi = src_n * tgt_n
            if "functional" in props:
                hi = min(hi, src_n)
            if mult.tgt_max is not None:
                hi = min(hi, src_n * mult.tgt_max)
        if "inverse-functional" in props:
            hi = min(hi, tgt_n)
        if mult.src_max is not None:
            hi = min(hi, tgt_n * mult.src_max)
        lo = 0
        if "total" in props and not ordered:
            lo = max(lo, src_n)
        if "inverse-total" in props:
            lo = max(lo, tgt_n)
        lo = max(lo, src_n * mult.tgt_min, tgt_n * mult.src_min)
        if lo > hi:
            return False
    return True


def _build_skeleton(info, by_class, extras, counts, config, input_refs):
    recs = []
    for name in sorted(by_class):
        for rec in sorted(by_class[name], key=lambda r: r.ref):
            recs.append((rec.ref, name, dict(rec.attrs)))
    if config.partition:
        available = [r for r in range(1, config.pool_size + 1) if r not in input_refs]
        pool = frozenset(range(1, config.pool_size + 1))
    else:
        start = max(input_refs, default=0) + 1
        available = list(range(start, start + sum(extras)))
        pool = None
    cursor = 0
    for i, name in enumerate(sorted(by_class)):
        for _ in range(extras[i]):
            if cursor >= len(available):
                return None
            recs.append((available[cursor], name, {}))
            cursor += 1
    extents: dict = {}
    for cls_name in info.model.classes:
        members = info.lattice.subtypes(cls_name)
        extents[cls_name] = frozenset(ref for ref, cls, _ in recs if cls in members)
    return _Skeleton(recs=recs, extents=extents, pool=pool)


# ---------------------------------------------------------------------------
# Phase 2: the per-skeleton CSP


class _Constraint:
    __slots__ = ("vars", "fn", "tag")

    def __init__(self, vars, fn, tag=""):
        self.vars = tuple(vars)
        self.fn = fn
        self.tag = tag

    def holds(self, ctx) -> bool:
        try:
            return bool(self.fn(ctx))
        except EvalError:
            # the validator reports evaluation errors as diagnostics, so a
            # candidate triggering one can never validate
            return False


class _SolverContext:
    """Evaluation context reading the current (partial) assignment."""

    def __init__(self, info: ModelInfo, problem: "_Problem"):
        self.info = info
        self.problem = problem
        self.assignment: dict = {}

    def extent(self, class_name: str) -> frozenset:
        return self.problem.skeleton.extents[class_name]

    def attr(self, ref: int, attr: str):
        return self.assignment[("attr", ref, attr)]

    def pairs(self, rel: str) -> frozenset:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            out = set()
            for src in sorted(self.extent(decl.source)):
                for tgt in self.assignment[("seq", rel, src)]:
                    out.add((src, tgt))
            return frozenset(out)
        return frozenset(
            (s, t)
            for (s, t) in self.problem.grids[rel]
            if self.assignment[("tuple", rel, s, t)]
        )

    def image(self, rel: str, ref: int) -> frozenset:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            return frozenset(self.assignment.get(("seq", rel, ref), ()))
        return frozenset(
            t
            for t in sorted(self.extent(decl.target))
            if self.assignment[("tuple", rel, ref, t)]
        )

    def preimage(self, rel: str, ref: int) -> frozenset:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            return frozenset(
                s
                for s in sorted(self.extent(decl.source))
                if ref in self.assignment.get(("seq", rel, s), ())
            )
        return frozenset(
            s
            for s in sorted(self.extent(decl.source))
            if self.assignment[("tuple", rel, s, ref)]
        )

    def seq(self, rel: str, ref: int) -> tuple:
        return tuple(self.assignment.get(("seq", rel, ref), ()))

    def has_tuple(self, rel: str, src: int, tgt: int) -> bool:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            return tgt in self.assignment.get(("seq", rel, src), ())
        return bool(self.assignment[("tuple", rel, src, tgt)])

    def dom_test(self, rel: str, ref: int) -> bool:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            return bool(self.assignment.get(("seq", rel, ref), ()))
        return any(
            self.assignment[("tuple", rel, ref, t)]
            for t in sorted(self.extent(decl.target))
        )

    def ran_test(self, rel: str, ref: int) -> bool:
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            return any(
                ref in self.assignment.get(("seq", rel, s), ())
                for s in sorted(self.extent(decl.source))
            )
        return any(
            self.assignment[("tuple", rel, s, ref)]
            for s in sorted(self.extent(decl.source))
        )


class _Problem:
    def __init__(self, info: ModelInfo, skeleton: _Skeleton, partial: PartialInstance,
                 config: SolveConfig, compile_constraints: bool = True):
        self.info = info
        self.skeleton = skeleton
        self.partial = partial
        self.config = config
        self.feasible = True
        self.domains: dict = {}
        self.fixed: dict = {}
        self.grids: dict = {}
        self.order: list = []
        self.constraints: list = []
        self.by_var: dict = {}
        self._unbounded_attr_vars: list = []
        self.ctx = _SolverContext(info, self)
        try:
            self._build_vars()
        except _Infeasible:
            self.feasible = False
            return
        if compile_constraints:
            self._compile()
            if not self._initial_check():
                self.feasible = False

    # -- variables ---------------------------------------------------------

    def _build_vars(self):
        info, config = self.info, self.config
        depth = _class_depths(info.model)
        attr_vars = []
        for ref, cls, given in self.skeleton.recs:
            flat = info.flat(cls)
            for attr in sorted(flat.attrs):
                domain = flat.attrs[attr]
                var = ("attr", ref, attr)
                if attr in given and not isinstance(given[attr], Restriction):
                    value = given[attr]
                    if not domain.contains(value):
                        raise _Infeasible
                    self.fixed[var] = value
                    continue
                if isinstance(given.get(attr), Restriction):
                    values = [v for v in given[attr].values if domain.contains(v)]
                else:
                    values = domain.enumerate(config.default_int_bound)
                if not values:
                    raise _Infeasible
                self.domains[var] = values
                attr_vars.append((-depth[cls], ref, attr, var))
                if unbounded(domain) and not isinstance(given.get(attr), Restriction):
                    self._unbounded_attr_vars.append(var)
        attr_vars.sort(key=lambda item: item[:3])
        self.order = [item[3] for item in attr_vars]

        closed = self.partial.closed
        for rel in sorted(info.model.relations):
            decl = info.model.relations[rel]
            sources = sorted(self.skeleton.extents[decl.source])
            targets = sorted(self.skeleton.extents[decl.target])
            if decl.ordered is not Ordering.NONE:
                given_seqs = self.partial.sequences.get(rel, {})
                for src, seq in given_seqs.items():
                    if src not in sources or not set(seq) <= set(targets):
                        raise _Infeasible
                max_len = decl.multiplicity.tgt_max
                if max_len is None or decl.ordered is Ordering.ISEQ:
                    limit = len(targets)
                    max_len = limit if max_len is None else min(max_len, limit)
                for src in sources:
                    var = ("seq", rel, src)
                    if src in given_seqs:
                        self.fixed[var] = tuple(given_seqs[src])
                    elif rel in closed:
                        self.fixed[var] = ()
                    else:
                        self.domains[var] = _sequences(
                            targets, decl.multiplicity.tgt_min, max_len,
                            decl.ordered is Ordering.ISEQ,
                        )
                        self.order.append(var)
                continue
            grid = [(s, t) for s in sources for t in targets]
            self.grids[rel] = grid
            given = self.partial.tuples.get(rel, set())
            if not set(given) <= set(grid):
                raise _Infeasible
            for s, t in grid:
                var = ("tuple", rel, s, t)
                if (s, t) in given:
                    self.fixed[var] = True
                elif rel in closed:
                    self.fixed[var] = False
                else:
                    self.domains[var] = [False, True]
                    self.order.append(var)
            if decl.reified_by is not None:
                carrier = sorted(self.skeleton.extents[decl.reified_by])
                given_data = self.partial.reified.get(rel, {})
                if not set(given_data) <= set(grid):
                    raise _Infeasible
                for s, t in grid:
                    var = ("reif", rel, s, t)
                    if (s, t) in given_data:
                        if given_data[(s, t)] not in carrier:
                            raise _Infeasible
                        self.fixed[var] = given_data[(s, t)]
                    else:
                        self.domains[var] = [None] + carrier
                        self.order.append(var)

    # -- constraints --------------------------------------------------------

    def _add(self, vars, fn, tag=""):
        constraint = _Constraint(vars, fn, tag)
        self.constraints.append(constraint)
        for var in constraint.vars:
            self.by_var.setdefault(var, []).append(constraint)

    def _compile(self):
        info = self.info
        for rel in sorted(info.model.relations):
            decl = info.model.relations[rel]
            if decl.ordered is not Ordering.NONE:
                self._compile_ordered(decl)
                continue
            sources = sorted(self.skeleton.extents[decl.source])
            targets = sorted(self.skeleton.extents[decl.target])
            props = decl.properties()
            if "functional" in props:
                for s in sources:
                    for t1, t2 in itertools.combinations(targets, 2):
                        a, b = ("tuple", rel, s, t1), ("tuple", rel, s, t2)
                        self._add((a, b), _not_both(a, b), f"{rel} functional")
            if "inverse-functional" in props:
                for t in targets:
                    for s1, s2 in itertools.combinations(sources, 2):
                        a, b = ("tuple", rel, s1, t), ("tuple", rel, s2, t)
                        self._add((a, b), _not_both(a, b), f"{rel} inverse-functional")
            if "total" in props:
                for s in sources:
                    row = tuple(("tuple", rel, s, t) for t in targets)
                    self._add(row, _any_true(row), f"{rel} total")
            if "inverse-total" in props:
                for t in targets:
                    col = tuple(("tuple", rel, s, t) for s in sources)
                    self._add(col, _any_true(col), f"{rel} inverse-total")
            mult = decl.multiplicity
            if not mult.trivial():
                for s in sources:
                    row = tuple(("tuple", rel, s, t) for t in targets)
                    self._add(row, _count_between(row, mult.tgt_min, mult.tgt_max), f"{rel} mult")
                for t in targets:
                    col = tuple(("tuple", rel, s, t) for s in sources)
                    self._add(col, _count_between(col, mult.src_min, mult.src_max), f"{rel} mult")
            if decl.subset_of is not None:
                for s, t in self.grids[rel]:
                    a, b = ("tuple", rel, s, t), ("tuple", decl.subset_of, s, t)
                    self._add((a, b), _implies_var(a, b), f"{rel} subset")
            if decl.reified_by is not None:
                total = decl.reified_total
                for s, t in self.grids[rel]:
                    tv, rv = ("tuple", rel, s, t), ("reif", rel, s, t)
                    self._add((tv, rv), _reified_link(tv, rv, total), f"{rel} reified")

        for ref, cls, _ in self.skeleton.recs:
            flat = info.flat(cls)
            invariant = info.invariants[cls]
            if invariant == E.BoolLit(True):
                continue
            attrs = tuple(sorted(flat.attrs))
            vars = tuple(("attr", ref, a) for a in attrs)
            self._add(vars, _invariant_check(invariant, ref, attrs), f"invariant {cls}")

        for name, body, _ in info.constraints:
            for ground in _expand(body, self.skeleton.extents):
                vars = tuple(sorted(set(self._collect_vars(ground)), key=repr))
                node = ground
                self._add(vars, lambda ctx, node=node: evaluate(node, ctx), f"constraint {name}")

    def _compile_ordered(self, decl):
        rel = decl.name
        sources = sorted(self.skeleton.extents[decl.source])
        targets = sorted(self.skeleton.extents[decl.target])
        props = decl.properties()
        mult = decl.multiplicity
        if "inverse-functional" in props:
            for t in targets:
                vars = tuple(("seq", rel, s) for s in sources)
                self._add(vars, _seq_at_most_one_source(vars, t), f"{rel} inverse-functional")
        if "inverse-total" in props:
            for t in targets:
                vars = tuple(("seq", rel, s) for s in sources)
                self._add(vars, _seq_some_source(vars, t), f"{rel} inverse-total")
        if mult.src_min > 0 or mult.src_max is not None:
            for t in targets:
                vars = tuple(("seq", rel, s) for s in sources)
                self._add(
                    vars, _seq_source_count(vars, t, mult.src_min, mult.src_max), f"{rel} mult"
                )

    def _collect_vars(self, node: E.Node):
        info = self.info
        for n in E.walk(node):
            match n:
                case E.TupleTest(rel, src, tgt):
                    decl = info.model.relations[rel]
                    if decl.ordered is not Ordering.NONE:
                        yield ("seq", rel, src)
                    else:
                        yield ("tuple", rel, src, tgt)
                case E.DomTest(rel, ref):
                    yield from self._rel_row(rel, src=ref)
                case E.RanTest(rel, ref):
                    yield from self._rel_row(rel, tgt=ref)
                case E.RelName(rel) | E.SeqOf(rel, _):
                    yield from self._rel_row(rel)
                case E.LeadsTo(obj, role_name):
                    role = info.roles[role_name]
                    if isinstance(obj, E.RefLit):
                        if role.forward:
                            yield from self._rel_row(role.relation, src=obj.ref)
                        else:
                            yield from self._rel_row(role.relation, tgt=obj.ref)
                    else:
                        yield from self._rel_row(role.relation)
                case E.Dot(_, role_name):
                    yield from self._rel_row(info.roles[role_name].relation)
                case E.AttrAccess(obj, attr):
                    if isinstance(obj, E.RefLit):
                        var = ("attr", obj.ref, attr)
                        if var in self.domains or var in self.fixed:
                            yield var
                    else:
                        yield from self._attr_vars(attr)
                case E.Arrow(_, attr) | E.Harpoon(_, attr) | E.BagOf(attr, _):
                    yield from self._attr_vars(attr)

    def _rel_row(self, rel, src=None, tgt=None):
        decl = self.info.model.relations[rel]
        if decl.ordered is not Ordering.NONE:
            for s in sorted(self.skeleton.extents[decl.source]):
                if src is None or s == src:
                    yield ("seq", rel, s)
            return
        for s, t in self.grids[rel]:
            if (src is None or s == src) and (tgt is None or t == tgt):
                yield ("tuple", rel, s, t)

    def _attr_vars(self, attr):
        for ref, cls, _ in self.skeleton.recs:
            if attr in self.info.flat(cls).attrs:
                yield ("attr", ref, attr)

    # -- search -------------------------------------------------------------

    def _initial_check(self) -> bool:
        self.ctx.assignment = dict(self.fixed)
        for constraint in self.constraints:
            unassigned = [v for v in constraint.vars if v not in self.ctx.assignment]
            if not unassigned:
                if not constraint.holds(self.ctx):
                    return False
            elif len(unassigned) == 1:
                var = unassigned[0]
                self.domains[var] = self._filter(var, self.domains[var], constraint)
                if not self.domains[var]:
                    return False
        return True

    def _filter(self, var, values, constraint):
        assignment = self.ctx.assignment
        kept = []
        for value in values:
            assignment[var] = value
            if constraint.holds(self.ctx):
                kept.append(value)
            del assignment[var]
        return kept

    def search(self, deadline=None):
        """Depth-first search; yields complete assignments."""
        order = self.order
        domains = {var: list(vals) for var, vals in self.domains.items()}
        assignment = self.ctx.assignment
        assignment.clear()
        assignment.update(self.fixed)
        n = len(order)

        def propagate(var, trail) -> bool:
            for constraint in self.by_var.get(var, ()):
                unassigned = [v for v in constraint.vars if v not in assignment]
                if not unassigned:
                    if not constraint.holds(self.ctx):
                        return False
                elif len(unassigned) == 1:
                    u = unassigned[0]
                    kept = self._filter(u, domains[u], constraint)
                    if len(kept) != len(domains[u]):
                        trail.append((u, domains[u]))
                        domains[u] = kept
                        if not kept:
                            return False
            return True

        def undo(trail):
            for var, values in reversed(trail):
                domains[var] = values

        def descend(i):
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded("solve ran past its time budget")
            if i == n:
                yield dict(assignment)
                return
            var = order[i]
            for value in list(domains[var]):
                assignment[var] = value
                trail: list = []
                if propagate(var, trail):
                    yield from descend(i + 1)
                undo(trail)
                del assignment[var]

        yield from descend(0)

    # -- output -------------------------------------------------------------

    def build_instance(self, assignment: dict) -> Instance:
        info = self.info
        objects = []
        for ref, cls, _ in self.skeleton.recs:
            attrs = {
                attr: assignment[("attr", ref, attr)]
                for attr in sorted(info.flat(cls).attrs)
            }
            objects.append(ObjectRec(ref, cls, attrs))
        objects.sort(key=lambda rec: rec.ref)
        tuples: dict = {}
        sequences: dict = {}
        reified: dict = {}
        for rel in sorted(info.model.relations):
            decl = info.model.relations[rel]
            if decl.ordered is not Ordering.NONE:
                seqs = {}
                for src in sorted(self.skeleton.extents[decl.source]):
                    seq = assignment.get(("seq", rel, src), ())
                    if seq:
                        seqs[src] = tuple(seq)
                if seqs:
                    sequences[rel] = seqs
                continue
            pairs = {(s, t) for (s, t) in self.grids[rel] if assignment[("tuple", rel, s, t)]}
            if pairs:
                tuples[rel] = pairs
            if decl.reified_by is not None:
                data = {
                    (s, t): assignment[("reif", rel, s, t)]
                    for (s, t) in self.grids[rel]
                    if assignment.get(("reif", rel, s, t)) is not None
                }
                if data:
                    reified[rel] = data
        return Instance(
            objects=objects,
            tuples=tuples,
            sequences=sequences,
            reified=reified,
            pool=self.skeleton.pool,
        )

    def touches_int_bound(self, assignment: dict) -> bool:
        bound = self.config.default_int_bound
        return any(assignment[var] == bound for var in self._unbounded_attr_vars)


class _Infeasible(Exception):
    pass


# ---------------------------------------------------------------------------
# Constraint predicates


def _not_both(a, b):
    def fn(ctx):
        return not (ctx.assignment[a] and ctx.assignment[b])

    return fn


def _any_true(vars):
    def fn(ctx):
        return any(ctx.assignment[v] for v in vars)

    return fn


def _count_between(vars, lo, hi):
    def fn(ctx):
        n = sum(1 for v in vars if ctx.assignment[v])
        return n >= lo and (hi is None or n <= hi)

    return fn


def _implies_var(a, b):
    def fn(ctx):
        return (not ctx.assignment[a]) or ctx.assignment[b]

    return fn


def _reified_link(tuple_var, reif_var, total):
    def fn(ctx):
        present = ctx.assignment[tuple_var]
        data = ctx.assignment[reif_var]
        if not present:
            return data is None
        return data is not None if total else True

    return fn


def _invariant_check(invariant, ref, attrs):
    def fn(ctx):
        env = {attr: ctx.assignment[("attr", ref, attr)] for attr in attrs}
        return evaluate(invariant, ctx, env)

    return fn


def _seq_at_most_one_source(vars, target):
    def fn(ctx):
        n = sum(1 for v in vars if target in ctx.assignment[v])
        return n <= 1

    return fn


def _seq_some_source(vars, target):
    def fn(ctx):
        return any(target in ctx.assignment[v] for v in vars)

    return fn


def _seq_source_count(vars, target, lo, hi):
    def fn(ctx):
        n = sum(1 for v in vars if target in ctx.assignment[v])
        return n >= lo and (hi is None or n <= hi)

    return fn


def _sequences(targets, min_len, max_len, injective):
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        frontier = [
            seq + (t,)
            for seq in frontier
            for t in targets
            if not (injective and t in seq)
        ]
        out.extend(frontier)
    return [seq for seq in out if len(seq) >= min_len]


# ---------------------------------------------------------------------------
# Ground expansion of quantified constraints


def _expand(node: E.Node, extents: dict):
    """Expand top-level universal quantification into ground conjuncts."""
    match node:
        case E.Quantifier("forall", var, type_name, body):
            for ref in sorted(extents[type_name]):
                yield from _expand(E.substitute(body, {var: E.RefLit(ref)}), extents)
        case E.And(items):
            for item in items:
                yield from _expand(item, extents)
        case _:
            yield _simplify(node)


def _simplify(node: E.Node) -> E.Node:
    """Rewrite membership tests into variable-level probes where possible."""
    match node:
        case E.InSet(E.RefLit(t), E.RelImage(E.RelName(rel), E.SetLit((E.RefLit(s),)))):
            return E.TupleTest(rel, s, t)
        case E.InSet(E.RefLit(ref), E.Dom(E.RelName(rel))):
            return E.DomTest(rel, ref)
        case E.InSet(E.RefLit(ref), E.Ran(E.RelName(rel))):
            return E.RanTest(rel, ref)
    return E._rebuild(node, _simplify)


def _class_depths(model: Model) -> dict:
    depths: dict = {}

    def depth(name: str) -> int:
        if name not in depths:
            parents = model.classes[name].parents
            depths[name] = 1 + max((depth(p.parent) for p in parents), default=-1)
        return depths[name]

    for name in model.classes:
        depth(name)
    return depths
