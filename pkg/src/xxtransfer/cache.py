"""On-disk cache of optimized couplings, keyed by chain size, field and tolerance version."""

from __future__ import annotations

import json
import os
from dataclasses import asdict
from pathlib import Path

from .optimizer import OptimalPoint, optimize_delta

CACHE_ENV = "XXTRANSFER_CACHE_DIR"
# bump when optimizer tolerances or search strategy change
TOLERANCE_VERSION = 1
_FILE = "optimal_points.json"


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "xxtransfer"


def _key(n_total: int, h: float) -> str:
    return f"M={n_total};h={float(h)!r};v={TOLERANCE_VERSION}"


def _load(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError):
        return {}


def optimal_point(n_total: int, h: float = 0.0, use_cache: bool = True) -> OptimalPoint:
    """Optimized point for ``N + 2 = n_total``; served from the cache when available."""
    path = cache_dir() / _FILE
    key = _key(n_total, h)
    if use_cache:
        entry = _load(path).get(key)
        if entry is not None:
            return OptimalPoint(**entry)
    point = optimize_delta(n_total - 2, h)
    if use_cache:
        data = _load(path)
        entry = asdict(point)
        entry.pop("scan")
        data[key] = entry
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(data, indent=1, sort_keys=True))
            tmp.replace(path)
        except OSError:
            pass
    return point
