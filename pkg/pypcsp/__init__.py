"""
PyPCSP is divided into modules following the layers of the theory of finite probabilistic CSP.

pypcsp.terms and pypcsp.parser
------------------------------

The term language: the ``Term`` classes, desugaring, classification of processes and tests, and the ``lark`` grammar
used to read terms and modal formulas.

pypcsp.distribution and pypcsp.plts
-----------------------------------

Exact probability distributions over interned states and the probabilistic labelled transition system of a term,
including lifted, weak and success-avoiding transitions.

pypcsp.geometry and pypcsp.testing
----------------------------------

Outcome sets as vertex lists of exact rationals, and the application of tests to processes with state-based,
action-based and vector-based results-gathering.

pypcsp.resolutions
------------------

Resolutions of test applications, their success tuples and their synthesis for a given outcome.

pypcsp.logic and pypcsp.simulation
----------------------------------

The modal logics, characteristic formulas and tests, and the simulation and failure simulation preorders.

pypcsp.axioms
-------------

Derivations in the equational, may and must theories, normal forms and derivation synthesis.

pypcsp.enums and pypcsp.utils
-----------------------------

Enumerated options, exceptions and helpers for exact rationals.
"""
# noinspection PyUnresolvedReferences
from pypcsp.enums import (
    AxiomId,
    Direction,
    Flavour,
    Kind,
    Logic,
    Mode,
    Order,
    SimKind,
    TermClass,
    Theory,
)

# noinspection PyUnresolvedReferences
from pypcsp.terms import (
    NIL,
    OMEGA,
    TAU,
    ExtChoice,
    IntChoice,
    Nil,
    Par,
    Prefix,
    ProbChoice,
    Term,
    classify,
    desugar,
    ext_sum,
    int_sum,
    prefix,
    prob_sum,
)

# noinspection PyUnresolvedReferences
from pypcsp.parser import (
    parse,
    parse_formula,
    read_term,
    unparse,
)

# noinspection PyUnresolvedReferences
from pypcsp.distribution import (
    Dist,
    lift_check,
    mix,
    point,
)

# noinspection PyUnresolvedReferences
from pypcsp.plts import (
    PLTS,
    build,
)

# noinspection PyUnresolvedReferences
from pypcsp.geometry import (
    OutcomeSet,
    compare,
    dominated_point_exists,
    hull_reduce,
    minkowski_mix,
)

# noinspection PyUnresolvedReferences
from pypcsp.testing import (
    apply_test,
    results_action,
    results_state,
    results_vector,
    state_to_action_test,
    test_order,
)

# noinspection PyUnresolvedReferences
from pypcsp.resolutions import (
    Resolution,
    check_resolution,
    enumerate_deterministic_resolutions,
    pr,
    synthesize_resolution,
    w_of,
    w_set,
)

# noinspection PyUnresolvedReferences
from pypcsp.logic import (
    Conj,
    Diamond,
    ProbSum,
    Ref,
    Top,
    char_formula,
    char_test,
    logic_leq,
    sat,
)

# noinspection PyUnresolvedReferences
from pypcsp.simulation import (
    SimCertificate,
    check_certificate,
    fsim_leq,
    sim_leq,
)

# noinspection PyUnresolvedReferences
from pypcsp.axioms import (
    check_derivation,
    inits,
    normal_form,
    prob_normal_form,
    synth_derivation,
)

# noinspection PyUnresolvedReferences
from pypcsp.utils import (
    CertificateException,
    DerivationException,
    DistributionException,
    FormulaException,
    GeometryException,
    InvariantViolation,
    ParseException,
    PLTSException,
    ResolutionException,
    SortException,
)

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"
__version__ = "0.1.0"
