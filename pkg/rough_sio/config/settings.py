"""
Numerical defaults and environment overrides
"""
import json
from functools import lru_cache
import logging
import os
from typing import Any, Dict

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

load_dotenv()

SETTINGS_FILE = os.path.join(os.path.dirname(__file__), "settings.json")

DEFAULT_TOLERANCES = {
    "identity": 1e-6,
    "equality": 1e-8,
    "cross_method": 1e-3,
    "trend_slope": 0.05,
    "growth_exponent": 0.05,
    "cauchy_block": 0.01,
    "decay_fit": 0.05,
    "cancellation": 1e-8,
    "moment": 1e-8,
    "llogl_refinement": 0.01,
    "average_refinement": 0.005,
    "coverage_miss": 1e-3,
    "membership_guard": 1e-9,
    "representation_error": 1e-2,
}

DEFAULT_NUMERICS = {
    "cells_2d": 4096,
    "polar_cells_3d": 128,
    "azimuth_cells_3d": 256,
    "strata_cap": 64,
    "hclass_j_min": -30,
    "hclass_j_max": 30,
    "t_nodes_per_block": 64,
    "radial_nodes_per_block": 24,
    "angular_max_width": 0.0125,
    "pv_levels": 14,
    "cap_limit": 1_000_000,
}


@lru_cache(maxsize=1)
def load_settings() -> Dict[str, Any]:
    """Load tolerance and numerics overrides merged over the defaults (cached, treat as read-only)"""
    settings = {
        "tolerances": DEFAULT_TOLERANCES.copy(),
        "numerics": DEFAULT_NUMERICS.copy(),
    }
    try:
        if os.path.exists(SETTINGS_FILE):
            with open(SETTINGS_FILE, "r", encoding="utf-8") as f:
                stored = json.load(f)
            settings["tolerances"].update(stored.get("tolerances", {}))
            settings["numerics"].update(stored.get("numerics", {}))
    except Exception as e:
        logger.warning("Error loading settings file %s: %s", SETTINGS_FILE, e)
    return settings


def tolerance(name: str) -> float:
    """Get a single tolerance value"""
    return float(load_settings()["tolerances"][name])


def numeric(name: str) -> Any:
    """Get a single numerics default"""
    return load_settings()["numerics"][name]


def thread_cap() -> int:
    """Worker cap from ROUGH_SIO_THREADS (defaults to the CPU count)"""
    raw = os.getenv("ROUGH_SIO_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("Ignoring non-integer ROUGH_SIO_THREADS=%r", raw)
    return os.cpu_count() or 1


def default_log_level() -> str:
    return os.getenv("ROUGH_SIO_LOG_LEVEL", "WARNING").upper()
