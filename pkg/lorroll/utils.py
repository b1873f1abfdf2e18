import json
import logging
import os
from importlib import resources
from typing import Any, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "LORROLL_SEED"


def get_default_seed() -> int:
    """
    Get the default random seed.

    Returns:
        int: The value of LORROLL_SEED when set to an integer, otherwise 0.
    """
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {SEED_ENV_VAR}={raw!r}, using seed 0")
        return 0


def parse_vector(text: Optional[str]) -> Optional[List[float]]:
    """Parse a comma-separated list of numbers such as '0,1.5,-2'."""
    if text is None:
        return None
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    if not parts:
        raise ValueError(f"Empty vector: {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"Malformed vector {text!r}: expected comma-separated numbers")


def make_rng(seed: Optional[int]) -> np.random.Generator:
    if seed is None:
        seed = get_default_seed()
    return np.random.default_rng(seed)


def load_packaged_schema(name: str) -> Dict[str, Any]:
    """Read lorroll/schemas/<name>.json from the installed package."""
    text = resources.files("lorroll").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)
