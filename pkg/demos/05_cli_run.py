"""Driving the batch front end from Python: a cached criterion run.

Run with ``python demos/05_cli_run.py``; files go to a temporary directory.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from qcap.cli import main

config = {
    "mode": "criterion",
    "domain": {"type": "difference",
               "base": {"type": "ball", "center": [0, 0], "radius": 1},
               "removed": {"type": "ball", "center": [0.375, 0], "radius": 0.00390625,
                           "closed": True}},
    "criterion": {"d": 1, "x": [0, 0], "p": 3, "n_max": 3},
}

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "run.json").write_text(json.dumps(config))
    args = ["--config", str(tmp / "run.json"), "--cache-dir", str(tmp / "cache")]
    # the first run fills the cache, the second reads from it
    for name in ("first", "second"):
        code = main(args + ["--out", str(tmp / name)])
        print(name, "exit status", code)
    same = (tmp / "first" / "report.json").read_bytes() == (tmp / "second" / "report.json").read_bytes()
    print("reports identical:", same)
    print((tmp / "second" / "partial_sums.csv").read_text())
