"""On-disk cache of capacity estimates keyed by a canonical hash."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Callable

from .capacity import SOLVER_VERSION, CapacityEstimate

log = logging.getLogger(__name__)


def clean_json(obj):
    """Replace non-finite floats by ``None`` so output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    return obj


def canonical(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, strict floats."""
    return json.dumps(clean_json(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def cache_key(key: dict) -> str:
    """sha256 of the canonical form of ``key`` plus the solver version."""
    payload = dict(key, solver_version=SOLVER_VERSION)
    return hashlib.sha256(canonical(payload).encode()).hexdigest()


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cache_get_or_compute(cache_dir, key: dict,
                         compute: Callable[[], CapacityEstimate]) -> tuple[CapacityEstimate, bool]:
    """Return ``(estimate, hit)`` for ``key``, computing and storing on a miss.

    Entries whose solver version or key differ, or which fail to parse, are
    recomputed.  ``cache_dir=None`` disables caching.
    """
    if cache_dir is None:
        return compute(), False
    digest = cache_key(key)
    path = Path(cache_dir) / f"{digest}.json"
    if path.exists():
        try:
            rec = json.loads(path.read_text(encoding="utf-8"))
            if rec["solver_version"] == SOLVER_VERSION and rec["key"] == clean_json(key):
                return CapacityEstimate.from_dict(rec["estimate"]), True
            log.info("cache entry %s is stale; recomputing", path.name)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring corrupt cache entry %s (%s)", path.name, exc)
    est = compute()
    rec = {"solver_version": SOLVER_VERSION, "key": clean_json(key),
           "estimate": clean_json(est.to_dict())}
    atomic_write(path, canonical(rec))
    return est, False
