"""Durable proximity patterns over points with lifespans."""

from .aggregate import PairRecord, report_sum_pairs, report_union_pairs
from .core import Dataset, InputError, Lifespan, Metric, TemporalPoint
from .covertree import CoverTree
from .dataio import generate, load, read_csv, save, write_csv
from .durable_ball import DurableBallStructure
from .incremental import IncrementalSession, compute_activation, detect_triangle
from .linf import DurableRangeStructure, report_triangles_exact_linf
from .patterns import (PatternRecord, TriangleRecord, report_cliques, report_paths,
                       report_stars, report_triangles)

__all__ = [
    "CoverTree",
    "Dataset",
    "DurableBallStructure",
    "DurableRangeStructure",
    "IncrementalSession",
    "InputError",
    "Lifespan",
    "Metric",
    "PairRecord",
    "PatternRecord",
    "TemporalPoint",
    "TriangleRecord",
    "compute_activation",
    "detect_triangle",
    "generate",
    "load",
    "read_csv",
    "report_cliques",
    "report_paths",
    "report_stars",
    "report_sum_pairs",
    "report_triangles",
    "report_triangles_exact_linf",
    "report_union_pairs",
    "save",
    "write_csv",
]
