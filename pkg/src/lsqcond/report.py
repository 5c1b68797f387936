"""Condition report assembly and deterministic JSON/CSV serialization.

Reports must be byte-identical for identical inputs and seed, so floats
are always written with 17 significant digits (enough to round-trip a
double exactly) and key order is fixed by construction. Timings are only
included when explicitly requested, since they would break reproducibility.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .conditioning import (
    SCALE_PRESETS,
    ScaleFactors,
    projection_condition_bounds,
    residual_condition_bounds,
    scale_preset,
)
from .core import Geometry, LsCache
from .jacobian import EmpiricalEstimate
from .prior_bounds import PriorBoundRow

SCHEMA = "lsq-cond/1"


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_report(
    cache: LsCache,
    geom: Geometry,
    empirical: EmpiricalEstimate,
    empirical_scales_name: str,
    prior_rows: list[PriorBoundRow],
    matrix_file: str | None = None,
    rhs_file: str | None = None,
    timings: dict[str, float] | None = None,
) -> dict[str, Any]:
    """Assemble the full analysis record as a plain nested dict.

    Raises if the empirical value escapes its own preset's sandwich, so a
    report can never assert an inconsistent estimate.
    """
    problem = cache.problem
    estimates: dict[str, Any] = {}
    for name in SCALE_PRESETS:
        scales = scale_preset(name, cache)
        est = residual_condition_bounds(cache, geom, scales)
        estimates[name] = {
            "chi_A_lower": est.chi_A_lower,
            "chi_A_upper": est.chi_A_upper,
            "chi_b": est.chi_b,
        }

    emp_scales = scale_preset(empirical_scales_name, cache)
    emp_bounds = residual_condition_bounds(cache, geom, emp_scales)
    if not emp_bounds.chi_A_lower <= empirical.value <= emp_bounds.chi_A_upper * (1.0 + 1e-8):
        raise RuntimeError(
            f"empirical value {empirical.value} outside "
            f"[{emp_bounds.chi_A_lower}, {emp_bounds.chi_A_upper}]"
        )

    proj = projection_condition_bounds(cache, geom, ScaleFactors.relative(cache))
    return {
        "schema": SCHEMA,
        "problem": {
            "m": problem.m,
            "n": problem.n,
            "matrix_file": matrix_file,
            "rhs_file": rhs_file,
            "matrix_sha256": file_sha256(matrix_file) if matrix_file else None,
            "rhs_sha256": file_sha256(rhs_file) if rhs_file else None,
        },
        "geometry": {
            "kappa": geom.kappa,
            "theta": geom.theta,
            "cot_theta": geom.cot_theta,
            "vds": geom.vds,
            "sigma_min": geom.sigma_min,
        },
        "norms": {
            "A": cache.svd.sigma_max,
            "b": cache.norm_b,
            "r": cache.norm_r,
            "Ax": cache.norm_Ax,
            "x": cache.norm_x,
        },
        "estimates": estimates,
        "projection": {
            "chi_Ax_lower": proj.chi_A_lower,
            "chi_Ax_upper": proj.chi_A_upper,
            "chi_Ax_b": proj.chi_b,
        },
        "empirical": {
            "scales": empirical_scales_name,
            "value": empirical.value,
            "lower": emp_bounds.chi_A_lower,
            "upper": emp_bounds.chi_A_upper,
            "seed": empirical.seed,
            "samples": empirical.samples_used,
            "best_direction_origin": empirical.best_direction.origin,
        },
        "prior_bounds": [
            {
                "source": row.source,
                "value": row.value,
                "scale_convention": row.scale_convention,
                "ratio_to_tight": row.ratio_to_tight,
                "max_ratio": row.max_ratio,
            }
            for row in prior_rows
        ],
        "timings": timings,
    }


def format_number(x: Any) -> str:
    """Fixed 17-significant-digit rendering for floats; ints pass through."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    value = float(x)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value} in report")
    return format(value, ".17g")


def dump_json(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text: insertion-ordered keys, 17-digit floats."""
    pieces: list[str] = []
    _emit(obj, pieces, 0, indent)
    pieces.append("\n")
    return "".join(pieces)


def _emit(obj: Any, out: list[str], level: int, indent: int) -> None:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, int, float, np.integer, np.floating)):
        out.append(format_number(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, value) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(value, out, level + 1, indent)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for k, value in enumerate(seq):
            out.append(pad)
            _emit(value, out, level + 1, indent)
            out.append(",\n" if k < len(seq) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(fh, header: list[str], rows: list[list[Any]]) -> None:
    """Comma-separated output with '.' radix and 17-digit floats."""
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_csv_cell(value) for value in row) + "\n")


def _csv_cell(value: Any) -> str:
    if isinstance(value, str):
        if any(ch in value for ch in ',"\n'):
            return '"' + value.replace('"', '""') + '"'
        return value
    if isinstance(value, (bool, int, float, np.integer, np.floating)):
        if isinstance(value, float) and math.isnan(value):
            return "nan"
        return format_number(value)
    raise TypeError(f"cannot serialize {type(value).__name__} in CSV")
