"""Numeric defaults, overridable through ``FUZZOPT_*`` environment variables."""
import os


def _env(name, cast, default):
    raw = os.environ.get(f"FUZZOPT_{name}")
    if raw is None or raw.strip() == "":
        return default
    return cast(raw)


GRID_LEVELS = _env("GRID", int, 11)
TOL = _env("TOL", float, 1e-9)
ACTIVE_TOL = _env("ACTIVE_TOL", float, 1e-8)
SEED = _env("SEED", int, 42)
SCHEMA = "fuzzopt/1"
