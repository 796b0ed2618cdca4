"""Object-oriented constraint programs: a modeling language, a full-axiom
validator, and a bounded finite-model-generation solver.

A model declares classes (with multiple inheritance, renaming, and
multi-discriminator specialization), relations between type extents (kinds,
composition, multiplicities, ordered relations, reified associations), and
global constraints that traverse the object structure.  Instances are object
graphs; ``validate`` decides whether a graph satisfies every axiom, and
``solve`` completes a partial graph into every valid instance within bounds.
"""

from .diagnostics import Diagnostic, ParseError, ParseFailure
from .dsl import expand, load_model, parse_expression, parse_model, render_expr, render_model
from .errors import (
    BoundWarning,
    BudgetExceeded,
    CycleError,
    DanglingReference,
    EmptyAggregate,
    LoadError,
    NonUniqueValue,
    OocpError,
    OracleTooLarge,
    SortError,
    TypeConflict,
    UnknownAttribute,
    UnknownClass,
)
from .expr import Bag, as_seq, bag_of, bagmax, bagmin, bagsum, pick_first, transitive_closure
from .instance import (
    Instance,
    ObjectRec,
    PartialInstance,
    Restriction,
    ValidationReport,
    canonical_key,
    canonicalize,
    load_instance,
    save_instance,
    validate,
)
from .model import (
    BoolDomain,
    ClassDef,
    EnumDomain,
    FlatClass,
    IntInterval,
    Model,
    Nat,
    NatPositive,
    ParentLink,
    TypeLattice,
    build_type_lattice,
    check_discriminators,
    check_object_table,
    get_attr,
    resolve_class,
    type_extent,
)
from .relations import (
    Multiplicity,
    Ordering,
    RelationDecl,
    RelationKind,
    check_multiplicity,
    check_ordered,
    check_reified,
    check_relation_kind,
    check_subset,
    role_image,
    role_inverse_image,
)
from .semantics import ModelInfo, analyze, evaluate, InstanceContext
from .solver import SolveConfig, SolveResult, brute_force_enumerate, solve, solve_collect

__version__ = "0.1.0"
