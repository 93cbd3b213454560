"""Numerical verification of quaternionic structures on hypersurfaces of
flat quaternionic space and of the submersions they induce."""
from .curvature import riemann_tensor, space_form_fit
from .errors import (
    DegenerateChart,
    GeometryError,
    InvalidArgument,
    InvalidHypersurface,
    NumericalFailure,
    SamplingError,
    StructureError,
)
from .geometry import Chart, classify_umbilical, frame, identity_chart, levi_civita, second_fundamental_form
from .hypersurface import OrientedHypersurface, SamplePlan, check_ac3_axioms, induce_3_structure
from .quaternion import (
    StructureTriple,
    check_structure_axioms,
    half_quaternionic,
    make_structure_triple,
    qk_connection_forms,
    so3_rotate,
)
from .report import CheckReport
from .scenarios import SCENARIOS, Scenario, build_scenario, expected_table
from .submersion import SubmersionDescriptor, fiber_compatibility, oneill_A, oneill_T, push_structure
from .suite import RunConfig, run_suite

__version__ = "0.1.0"

__all__ = [
    "CheckReport", "Chart", "DegenerateChart", "GeometryError", "InvalidArgument", "InvalidHypersurface",
    "NumericalFailure", "OrientedHypersurface", "RunConfig", "SCENARIOS", "SamplePlan", "SamplingError",
    "Scenario", "StructureError", "StructureTriple", "SubmersionDescriptor", "build_scenario",
    "check_ac3_axioms", "check_structure_axioms", "classify_umbilical", "expected_table",
    "fiber_compatibility", "frame", "half_quaternionic", "identity_chart", "induce_3_structure",
    "levi_civita", "make_structure_triple", "oneill_A", "oneill_T", "push_structure", "qk_connection_forms",
    "riemann_tensor", "run_suite", "second_fundamental_form", "so3_rotate", "space_form_fit",
]
