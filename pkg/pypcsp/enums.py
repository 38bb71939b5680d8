from enum import Enum

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"


class TermClass(Enum):
    process = "process"
    scalar_test = "scalar-test"
    vector_test = "vector-test"


class Kind(Enum):
    may = "may"
    must = "must"


class Flavour(Enum):
    state = "state"
    action = "action"
    vector = "vector"


class Order(Enum):
    hoare = "Hoare"
    smyth = "Smyth"


class Mode(Enum):
    raw = "RawFinite"
    convex = "ConvexVertices"


class Direction(Enum):
    below = "<="
    above = ">="


class Logic(Enum):
    F = "F"
    L = "L"


class Theory(Enum):
    eq = "eq"
    may = "may"
    must = "must"


class SimKind(Enum):
    simulation = "simulation"
    failure_simulation = "failureSimulation"
    e_failure_simulation = "eFailureSimulation"


class AxiomId(Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    EI = "EI"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    May0 = "May0"
    May1 = "May1"
    May2 = "May2"
    May3 = "May3"
    May4 = "May4"
    Must1 = "Must1"
    Must2 = "Must2"
    Must2p = "Must2'"
    MustDual = "MustDual"
