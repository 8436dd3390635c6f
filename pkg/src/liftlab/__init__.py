"""Lifting maps through Riemannian coverings in fractional Sobolev spaces, numerically."""
from .covering import CoveringChart, TargetGeometry, deck_apply, get_covering, local_lift, project
from .decompose import mollify, split_sum_space, sum_membership_functional, sum_objective
from .domain import DomainKind, GridDomain, geodesic_distance, line_sections, make_domain
from .energy import (EnergyValue, Field, dirichlet, gagliardo, gap_energy, large_osc_energy, make_field,
                     segment_double_energy, truncated, x_energy)
from .lifting import chain_rule_residual, deck_align, lift_field, winding

__version__ = "0.1.0"

__all__ = [
    "CoveringChart", "TargetGeometry", "deck_apply", "get_covering", "local_lift", "project",
    "mollify", "split_sum_space", "sum_membership_functional", "sum_objective",
    "DomainKind", "GridDomain", "geodesic_distance", "line_sections", "make_domain",
    "EnergyValue", "Field", "dirichlet", "gagliardo", "gap_energy", "large_osc_energy", "make_field",
    "segment_double_energy", "truncated", "x_energy",
    "chain_rule_residual", "deck_align", "lift_field", "winding",
]
