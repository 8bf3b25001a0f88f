from __future__ import annotations

import os
import tomllib
from dataclasses import dataclass, fields, replace
from pathlib import Path

ENV_PREFIX = "SPSLAB_"


@dataclass(frozen=True)
class Limits:
    """Desk-scale caps. Exceeding one raises ResourceError."""

    max_terms: int = 12
    max_degree: int = 24
    max_vars: int = 12
    max_monomials: int = 1_000_000
    max_slice: int = 5_000_000
    max_subsets: int = 2_000_000
    max_paths: int = 100_000
    max_points: int = 2_000_000


DEFAULT_LIMITS = Limits()


def _coerce(key: str, raw: object, source: str) -> int:
    try:
        value = int(str(raw).replace("_", ""))
    except ValueError:
        value = 0
    if value <= 0:
        raise SystemExit(
            f"Invalid value for {key!r} in {source}: {raw!r}.\n"
            "Limits must be positive integers."
        )
    return value


def load_config(config_path: Path | None = None) -> Limits:
    """Load the desk-scale limits.

    Resolution order, per key:
    1. Config TOML, table [limits]
    2. Env vars SPSLAB_<KEY>, e.g. SPSLAB_MAX_MONOMIALS
    3. Built-in default
    """
    path = config_path or Path.home() / ".config" / "spslab" / "config.toml"
    table: dict[str, object] = {}

    if path.exists():
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise SystemExit(f"Could not parse {path}: {e}") from e
        table = data.get("limits", {})
        if not isinstance(table, dict):
            raise SystemExit(f"[limits] in {path} must be a table.")
        known = {f.name for f in fields(Limits)}
        unknown = sorted(set(table) - known)
        if unknown:
            raise SystemExit(
                f"Unknown limit(s) in {path}: {', '.join(unknown)}.\n"
                f"Known limits: {', '.join(sorted(known))}."
            )

    overrides: dict[str, int] = {}
    for f in fields(Limits):
        if f.name in table:
            overrides[f.name] = _coerce(f.name, table[f.name], str(path))
            continue
        env_key = ENV_PREFIX + f.name.upper()
        raw = os.environ.get(env_key)
        if raw:
            overrides[f.name] = _coerce(f.name, raw, env_key)

    return replace(DEFAULT_LIMITS, **overrides)
