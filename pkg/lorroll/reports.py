# lorroll/reports.py
# CSV and JSON emission for the command-line tools, with schema validation and rich summaries.

import csv
import io
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema
import numpy as np
from rich.console import Console
from rich.table import Table

from .minkowski import inner, lorentz_signature
from .models import (
    ControllabilityReport,
    Curve,
    DevelopmentCurve,
    HolonomyEstimate,
    ManifoldSpec,
    ProbeReport,
    RollingCurve,
    SubgroupClassification,
    TranslationWitness,
)
from .utils import load_packaged_schema

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "lorroll/v1"
SCHEMA_NAMES = ("geodesic", "develop", "roll", "holonomy", "classify", "controllability")


def load_schema(name: str) -> Dict[str, Any]:
    if name not in SCHEMA_NAMES:
        raise ValueError(f"Unknown report schema: {name}. Available schemas: {list(SCHEMA_NAMES)}")
    return load_packaged_schema(name)


def validate_report(name: str, data: Dict[str, Any]) -> Dict[str, Any]:
    jsonschema.validate(instance=data, schema=load_schema(name))
    return data


def to_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(value)) for value in row])
    return buffer.getvalue()


def _floats(values) -> List:
    return np.asarray(values, dtype=float).tolist()


def _envelope(command: str, manifold: Optional[ManifoldSpec]) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "command": command, "manifold": manifold.label if manifold else None}


def j_norm(y) -> float:
    """sqrt(|<y, y>|) in R^{n,1}."""
    y = np.asarray(y, dtype=float)
    return float(np.sqrt(abs(inner(y, y, lorentz_signature(len(y))))))


def witness_dict(witness: TranslationWitness) -> Dict[str, Any]:
    y = witness.element.y
    return {
        "y": _floats(y),
        "C": _floats(witness.element.C.matrix),
        "word": list(witness.word),
        "jNorm": j_norm(y),
        "norm": float(np.linalg.norm(y)),
    }


# --- Trajectories ---

def _coord_names(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{k + 1}" for k in range(count)]


def geodesic_csv(curve: Curve) -> str:
    d = curve.points.shape[1]
    header = ["t"] + _coord_names("x", d) + _coord_names("v", d)
    rows = (np.concatenate([[t], p, v]) for t, p, v in zip(curve.grid, curve.points, curve.velocities))
    return to_csv(header, rows)


def geodesic_json(curve: Curve, T: float, step: float) -> Dict[str, Any]:
    data = _envelope("geodesic", curve.manifold)
    data.update({
        "T": float(T),
        "step": float(step),
        "grid": _floats(curve.grid),
        "points": _floats(curve.points),
        "velocities": _floats(curve.velocities),
    })
    return validate_report("geodesic", data)


def probe_json(M: ManifoldSpec, x, v, report: ProbeReport) -> Dict[str, Any]:
    data = _envelope("geodesic", M)
    data["probe"] = {
        "x": _floats(x),
        "v": _floats(v),
        "reached": report.reached,
        "tReached": float(report.t_reached),
        "tMax": float(report.t_max),
        "tStar": None if report.t_star is None else float(report.t_star),
        "steps": int(report.steps),
        "reason": report.reason,
        "heuristic": report.heuristic,
        "summary": report.summary,
    }
    return validate_report("geodesic", data)


def develop_csv(curve: Curve, dev: DevelopmentCurve) -> str:
    d, m = curve.points.shape[1], dev.vectors.shape[1]
    header = ["t"] + _coord_names("x", d) + _coord_names("dev", m)
    rows = (np.concatenate([[t], p, c]) for t, p, c in zip(curve.grid, curve.points, dev.vectors))
    return to_csv(header, rows)


def develop_json(curve: Curve, dev: DevelopmentCurve) -> Dict[str, Any]:
    data = _envelope("develop", curve.manifold)
    data.update({
        "grid": _floats(dev.grid),
        "points": _floats(curve.points),
        "development": _floats(dev.vectors),
        "frame": _floats(dev.frame.vectors) if dev.frame is not None else None,
    })
    return validate_report("develop", data)


def roll_csv(rc: RollingCurve) -> str:
    first = rc.states[0]
    d, m = first.x.coords.shape[0], first.frame_hat.shape[1]
    k = first.x_hat.shape[0]
    frame_names = [f"fhat{a + 1}{b + 1}" for a in range(first.frame_hat.shape[0]) for b in range(m)]
    header = ["t"] + _coord_names("x", d) + _coord_names("xhat", k) + frame_names
    rows = (np.concatenate([[t], q.x.coords, q.x_hat, q.frame_hat.reshape(-1)]) for t, q in zip(rc.grid, rc.states))
    return to_csv(header, rows)


def roll_json(M: ManifoldSpec, rc: RollingCurve, residuals: Dict[str, float]) -> Dict[str, Any]:
    data = _envelope("roll", M)
    data.update({
        "target": rc.target.label if rc.target is not None else f"flat:{M.n},{M.nu}",
        "grid": _floats(rc.grid),
        "x": _floats([q.x.coords for q in rc.states]),
        "xHat": _floats([q.x_hat for q in rc.states]),
        "frameHat": _floats([q.frame_hat for q in rc.states]),
        "partial": rc.partial,
        "diagnostic": rc.diagnostic,
        "slip": float(residuals["slip"]),
        "twist": float(residuals["twist"]),
    })
    return validate_report("roll", data)


# --- Holonomy and verdicts ---

def holonomy_json(M: ManifoldSpec, estimate: HolonomyEstimate, loop: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    data = _envelope("holonomy", M)
    data.update({
        "point": _floats(estimate.base.coords),
        "rank": estimate.rank,
        "dimFull": estimate.dim_full,
        "method": estimate.method,
        "verdict": estimate.verdict,
        "lowerBound": estimate.lower_bound,
        "singularValues": _floats(estimate.singular_values),
        "basis": [_floats(X.matrix) for X in estimate.basis],
        "budget": estimate.budget,
        "seed": estimate.seed,
    })
    if loop is not None:
        data["loop"] = loop
    return validate_report("holonomy", data)


def classify_json(result: SubgroupClassification, sig_label: str) -> Dict[str, Any]:
    data = _envelope("classify-group", None)
    data.update({
        "signature": sig_label,
        "verdict": result.verdict.value,
        "witness": witness_dict(result.witness) if result.witness is not None else None,
        "demonstrations": [
            {
                "target": _floats(d.target),
                "causal": str(d.causal),
                "word": list(d.word),
                "wordLength": len(d.word),
                "residual": float(d.residual),
            }
            for d in result.demonstrations
        ],
        "report": result.report,
    })
    return validate_report("classify", data)


def controllability_json(M: ManifoldSpec, report: ControllabilityReport) -> Dict[str, Any]:
    data = _envelope("controllability", M)
    data.update({
        "verdict": report.verdict.value,
        "inconclusive": report.inconclusive,
        "rank": report.holonomy.rank,
        "dimFull": report.holonomy.dim_full,
        "method": report.holonomy.method,
        "witnesses": [witness_dict(w) for w in report.witnesses],
        "notes": list(report.notes),
        "budget": report.budget,
        "seed": report.seed,
    })
    return validate_report("controllability", data)


# --- Console summaries ---

def render_summary(console: Console, title: str, rows: Sequence[Sequence[Any]]):
    table = Table(title=title)
    table.add_column("Parameter")
    table.add_column("Value")
    for name, value in rows:
        table.add_row(str(name), str(value))
    console.print(table)
