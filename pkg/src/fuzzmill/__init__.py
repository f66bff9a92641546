"""Constraint-driven fuzz-driver generation and dual-scheduler campaigns."""

from .campaign import Campaign, CampaignConfig
from .constraints import depends, enumerate_groups, sat_explicit, sat_implicit
from .executor import CoverageMap, SliceReport, merge_coverage
from .factory import DriverSource, GenerationOutcome, generate_driver, parse_implicit_constraints
from .failures import FailureCategory, classify_failure
from .model import (
    ApiFunction,
    ApiGroup,
    ImplicitConstraint,
    LibrarySpec,
    Parameter,
    load_library_spec,
    parse_library_spec,
    save_library_spec,
)
from .reporting import CampaignReport, build_report
from .retrieve import retrieve_context

__version__ = "0.1.0"

__all__ = [
    "ApiFunction",
    "ApiGroup",
    "Campaign",
    "CampaignConfig",
    "CampaignReport",
    "CoverageMap",
    "DriverSource",
    "FailureCategory",
    "GenerationOutcome",
    "ImplicitConstraint",
    "LibrarySpec",
    "Parameter",
    "SliceReport",
    "build_report",
    "classify_failure",
    "depends",
    "enumerate_groups",
    "generate_driver",
    "load_library_spec",
    "merge_coverage",
    "parse_implicit_constraints",
    "parse_library_spec",
    "retrieve_context",
    "sat_explicit",
    "sat_implicit",
    "save_library_spec",
    "__version__",
]
