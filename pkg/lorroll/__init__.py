# lorroll/__init__.py
# Main entry point for the library, includes a factory to build catalog manifolds.

import logging
import os
from typing import Any, Mapping, Optional, Union

import numpy as np

from .metric_parser import MetricField, parse_metric_expression
from .models import MANIFOLD_CONFIGS, ManifoldKind, ManifoldSpec

logger = logging.getLogger(__name__)

__version__ = "0.1.0"


def _signature_of(metric: MetricField) -> tuple:
    """Index of a chart metric read off at the default chart point (all coordinates 1)."""
    g = metric.evaluate(np.ones(metric.dim))
    eigenvalues = np.linalg.eigvalsh(g)
    if np.any(np.abs(eigenvalues) <= 1e-12 * max(1.0, float(np.max(np.abs(eigenvalues))))):
        raise ValueError("Custom metric is degenerate at the default point (1, ..., 1)")
    nu = int(np.sum(eigenvalues < 0))
    return metric.dim - nu, nu


def get_manifold(kind: str, n: Optional[int] = None, nu: Optional[int] = None, r: float = 1.0,
                 metric: Union[None, str, Mapping[str, Any], MetricField] = None) -> ManifoldSpec:
    """
    Factory function to build a catalog manifold from its kind name.
    """
    if kind not in MANIFOLD_CONFIGS:
        raise ValueError(f"Unknown manifold kind: {kind}. Available kinds: {list(MANIFOLD_CONFIGS.keys())}")

    config = MANIFOLD_CONFIGS[kind]
    if config.kind == ManifoldKind.CLIFTON_POHL:
        logger.debug("Creating Clifton-Pohl chart")
        return ManifoldSpec(ManifoldKind.CLIFTON_POHL, 1, 1)
    if config.kind == ManifoldKind.CUSTOM_CHART:
        if metric is None:
            raise ValueError("Custom chart manifolds need a metric")
        field = metric if isinstance(metric, MetricField) else parse_metric_expression(metric)
        if n is None or nu is None:
            n, nu = _signature_of(field)
        logger.debug(f"Creating custom chart of signature ({n},{nu})")
        return ManifoldSpec(ManifoldKind.CUSTOM_CHART, n, nu, metric=field)
    if n is None or nu is None:
        raise ValueError(f"Manifold kind {kind} needs parameters {list(config.params)}")
    logger.debug(f"Creating {config.description} with n={n}, nu={nu}, r={r}")
    return ManifoldSpec(config.kind, int(n), int(nu), r=float(r))


def parse_manifold(text: Union[str, Mapping[str, Any]]) -> ManifoldSpec:
    """
    Build a manifold from shorthand or a mapping.

    Shorthand: flat:n,nu | s:n,nu,r | h:n,nu,r | clifton-pohl | custom:<json object or path>.
    Mappings use the keys kind, n, nu, r and metric.
    """
    if isinstance(text, Mapping):
        data = dict(text)
        unknown = set(data) - {"kind", "n", "nu", "r", "metric"}
        if unknown:
            raise ValueError(f"Unknown manifold keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ValueError("Manifold object needs a kind")
        return get_manifold(data["kind"], data.get("n"), data.get("nu"), data.get("r", 1.0), data.get("metric"))

    kind, _, params = text.strip().partition(":")
    if kind == "custom":
        source = params.strip()
        if source and not source.startswith("{") and os.path.exists(source):
            with open(source, encoding="utf-8") as f:
                source = f.read()
        return get_manifold("custom", metric=source)
    if kind not in MANIFOLD_CONFIGS:
        raise ValueError(f"Unknown manifold kind: {kind}. Available kinds: {list(MANIFOLD_CONFIGS.keys())}")
    expected = MANIFOLD_CONFIGS[kind].params
    values = [p.strip() for p in params.split(",") if p.strip()] if params else []
    if len(values) not in (len(expected), len(expected) - 1 if "r" in expected else len(expected)):
        raise ValueError(f"Manifold {kind} takes parameters {list(expected)}, got {values}")
    try:
        n = int(values[0]) if values else None
        nu = int(values[1]) if len(values) > 1 else None
        r = float(values[2]) if len(values) > 2 else 1.0
    except ValueError:
        raise ValueError(f"Malformed manifold parameters in {text!r}")
    return get_manifold(kind, n, nu, r)
