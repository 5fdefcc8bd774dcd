"""Taxonomy engine for probabilistic models of physical setups."""

from .config import QtaxConfig
from .dsl import canonical_equal, load_model, parse, serialize
from .equivalence import chsh, e_equivalent, p_equivalent, reduce
from .errors import (
    DSLError,
    ImpossibleScenario,
    InvalidArgument,
    NotApplicable,
    QtaxError,
    ReducibleSetup,
    ZeroEvidence,
)
from .inference import behavior, joint, world_joint
from .lattice import Lattice, Region, Site, lightcone
from .model import Model, Scenario, Variable, validate
from .report import TaxonomyReport, classify, emit

__all__ = [
    "DSLError",
    "ImpossibleScenario",
    "InvalidArgument",
    "Lattice",
    "Model",
    "NotApplicable",
    "QtaxConfig",
    "QtaxError",
    "ReducibleSetup",
    "Region",
    "Scenario",
    "Site",
    "TaxonomyReport",
    "Variable",
    "ZeroEvidence",
    "behavior",
    "canonical_equal",
    "chsh",
    "classify",
    "e_equivalent",
    "emit",
    "joint",
    "lightcone",
    "load_model",
    "p_equivalent",
    "parse",
    "reduce",
    "serialize",
    "validate",
    "world_joint",
]
