"""Class-M handle calculus on surface cobordisms."""
from .conditions import Verdict, check_class_m, check_morse
from .moves import Plan, apply_plan, validate_plan
from .oracle import cross_validate, reachable_set, sweep
from .planner import PlanCertificate, construct_theorem2, plan_search
from .surface import (
    Component, N, O, Surface, connected_sum, euler_characteristic, format_surface,
    mobius_capacity, p_invariant, p_odd, parse_surface,
)

__version__ = "0.1.0"

__all__ = [
    "Component", "N", "O", "Plan", "PlanCertificate", "Surface", "Verdict", "apply_plan",
    "check_class_m", "check_morse", "connected_sum", "construct_theorem2", "cross_validate",
    "euler_characteristic", "format_surface", "mobius_capacity", "p_invariant", "p_odd",
    "parse_surface", "plan_search", "reachable_set", "sweep", "validate_plan",
]
