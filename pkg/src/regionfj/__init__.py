"""Compositional region type inference for Featherweight Java."""

from .checker import check_expr, check_well_typed
from .graphs import EMPTY, Atom, FieldGraph, Var, fg_concat, term
from .inference import (
    CapExceeded,
    ClassTable,
    SummaryTable,
    analysis_stats,
    compute_class_table,
    compute_method_table,
    infer,
    summarize_expr,
)
from .parser import FJSyntaxError, parse_program
from .regions import NULL, Region, region_universe
from .transform import AbstractTransformation, Environment, apply, compose, join

__all__ = [
    "AbstractTransformation", "Atom", "CapExceeded", "ClassTable", "EMPTY", "Environment",
    "FJSyntaxError", "FieldGraph", "NULL", "Region", "SummaryTable", "Var", "analysis_stats",
    "apply", "check_expr", "check_well_typed", "compose", "compute_class_table",
    "compute_method_table", "fg_concat", "infer", "join", "parse_program", "region_universe",
    "summarize_expr", "term",
]
