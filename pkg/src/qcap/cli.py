"""Batch front end: JSON run configurations in, JSON reports and CSV tables out.

Usage::

    python -m qcap --config run.json --out results/ [--cache-dir DIR] [--no-cache]
                   [--max-n N] [--resolution-scale S] [--seed S] [--jobs J]

Exit status is 0 on success (warnings are embedded in the report), 1 on a
numerical failure and 2 on an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cache import atomic_write, cache_get_or_compute, clean_json
from .capacity import (SOLVER_VERSION, SolverSettings, estimate_capacity,
                       radial_capacity_oracle)
from .criterion import (CriterionConfig, CriterionReport, affine_pole_family,
                        boundary_pole_family, evaluate_criterion, evaluation_norm_probe,
                        pole_family, polynomial_family)
from .cutoff import bump_energy, bump_grid_energy, bump_profile, gns_ratio
from .geometry import from_dict
from .grid import Grid, ScalarField
from .martinelli import (TestFunction, calibrate_orientation, cauchy_integral, circle_patch,
                         divergence_residual, integrate_bm, sphere_patch)

log = logging.getLogger("qcap")

MODES = ("criterion", "capacity", "martinelli-check", "cutoff-check", "probe")
REPORT_SCHEMA = "qcap-report-1"
CSV_HEADER = ["n", "capacity", "weight_log2", "term", "partial_sum", "resolved"]


class ConfigError(ValueError):
    """Invalid run configuration; ``line``/``column`` locate JSON syntax errors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

    def to_dict(self) -> dict:
        return {"error": "config", "message": str(self), "line": self.line, "column": self.column}


@dataclass
class RunConfig:
    """A parsed run configuration; ``body`` holds the mode-specific fields."""

    mode: str
    body: dict
    out: Path | None = None
    cache_dir: Path | None = None
    seed: int = 0
    max_n: int | None = None
    resolution_scale: float = 1.0
    jobs: int = 1
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        mode = data.get("mode")
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {mode!r}")
        cfg = cls(mode=mode, body=data, raw=data,
                  out=Path(data["out"]) if data.get("out") else None,
                  cache_dir=Path(data["cache_dir"]) if data.get("cache_dir") else None,
                  seed=int(data.get("seed", 0)), max_n=data.get("max_n"),
                  resolution_scale=float(data.get("resolution_scale", 1.0)),
                  jobs=int(data.get("jobs", 1)))
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        if cfg.resolution_scale <= 0:
            raise ConfigError("resolution_scale must be positive")
        cfg._check_required()
        return cfg

    def _check_required(self) -> None:
        need = {"criterion": ["domain", "criterion"], "capacity": ["capacity"],
                "martinelli-check": [], "cutoff-check": [], "probe": ["domain", "probe"]}
        for key in need[self.mode]:
            if key not in self.body:
                raise ConfigError(f"mode {self.mode!r} requires field {key!r}")


def parse_config_text(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc


def _settings(body: dict) -> SolverSettings:
    raw = dict(body.get("settings", {}))
    if "deltas" in raw:
        raw["deltas"] = tuple(raw["deltas"])
    try:
        return SolverSettings(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad solver settings: {exc}") from exc


def _domain(spec):
    try:
        return from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad geometry description: {exc}") from exc


def emit_partial_sums(report: CriterionReport, path) -> None:
    """Write the per-shell table as CSV (header ``n,capacity,weight_log2,term,partial_sum,resolved``)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in report.shells:
        w.writerow([s.n, repr(float(s.capacity)), repr(float(s.weight_log2)), repr(float(s.term)),
                    repr(float(s.partial_sum)), "true" if s.resolved else "false"])
    atomic_write(path, buf.getvalue())


def _orientation_sign(d: int) -> int:
    order = {1: 64, 2: 24}.get(d, 12)
    sign, _ = calibrate_orientation(sphere_patch(np.zeros(d, dtype=complex), 1.0, order=order),
                                    np.zeros(d))
    return sign


def _run_criterion(cfg: RunConfig) -> tuple[dict, dict]:
    body = dict(cfg.body["criterion"])
    U = _domain(cfg.body["domain"])
    body["settings"] = _settings(body)
    if cfg.max_n is not None:
        body["n_max"] = int(cfg.max_n)
    if cfg.resolution_scale != 1.0:
        body["resolutions"] = [max(2, int(round(m * cfg.resolution_scale)))
                               for m in body.get("resolutions", CriterionConfig.resolutions)]
    try:
        config = CriterionConfig(**body)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad criterion config: {exc}") from exc
    report = evaluate_criterion(U, config, cache_dir=cfg.cache_dir, jobs=cfg.jobs)
    out = report.to_dict()
    out["bm_orientation_sign"] = _orientation_sign(config.d)
    return out, {"partial_sums.csv": report}


def _run_capacity(cfg: RunConfig) -> tuple[dict, dict]:
    body = cfg.body["capacity"]
    try:
        target = _domain(body["target"])
        q = float(body["q"])
        ladder = [float(h) / cfg.resolution_scale for h in body["ladder"]]
        support = body["support"]
        support = float(support) if isinstance(support, (int, float)) else _domain(support)
        center = body.get("center")
    except KeyError as exc:
        raise ConfigError(f"capacity mode requires field {exc}") from exc
    if target.dim not in (2, 4):
        raise ConfigError("capacity mode supports d = 1 or 2 (dimension 2 or 4)")
    settings = _settings(body)
    key = {"target": target.digest(), "q": repr(q), "ladder": [repr(h) for h in ladder],
           "support": repr(support) if isinstance(support, float) else support.digest(),
           "center": None if center is None else [repr(float(c)) for c in center],
           "settings": settings.to_dict()}
    est, hit = cache_get_or_compute(
        cfg.cache_dir, key,
        lambda: estimate_capacity(target, q, ladder, support, center=center, settings=settings,
                                  keep_field=False))
    rec = est.to_dict()
    rec.pop("seconds", None)
    out = {"estimate": rec, "settings": settings.to_dict()}
    if "oracle" in body:
        o = body["oracle"]
        ref = radial_capacity_oracle(o["r"], o["R"], q, target.dim)
        out["oracle"] = {"value": ref, "relative_error": (est.value - ref) / ref}
    return out, {}


def _polynomial(terms) -> TestFunction:
    terms = [(complex(*c) if isinstance(c, list) else complex(c), tuple(pw)) for c, pw in terms]

    def ev(z):
        out = np.zeros(z.shape[0], dtype=complex)
        for c, pw in terms:
            out += c * np.prod(z ** np.asarray(pw), axis=1)
        return out
    return TestFunction(ev, "entire")


def _run_martinelli(cfg: RunConfig) -> tuple[dict, dict]:
    body = cfg.body.get("martinelli", {})
    d = int(body.get("d", 2))
    order = int(body.get("order", 48))
    terms = body.get("f", [[1.0, [2] + [0] * (d - 1)], [3.0, [0, 1] if d == 2 else [1]]])
    f = _polynomial(terms)
    z_in = np.array([complex(v) for v in body.get("z_inside", [0.3, 0.2][:d])])
    z_out = np.array([complex(v) for v in body.get("z_outside", [1.5] + [0] * (d - 1))])
    sign, surf = calibrate_orientation(sphere_patch(np.zeros(d, dtype=complex), 1.0, order=order),
                                       np.zeros(d))
    inside = integrate_bm(f, surf, z_in)
    outside = integrate_bm(f, surf, z_out)
    ref = complex(f(z_in))
    # one-variable cross-check against the trapezoid Cauchy integral
    g = _polynomial([[1.0, [2]], [0.5, [1]]])
    circ = integrate_bm(g, circle_patch(0, 1.0, order=64), [0.5])
    cauchy = cauchy_integral(lambda w: w**2 + 0.5 * w, 0.0, 1.0, 0.5)
    rng = np.random.default_rng(cfg.seed)
    h = float(body.get("h", 1e-3))
    residuals = {}
    for dd in (1, 2, 3):
        worst = 0.0
        for _ in range(int(body.get("samples", 100))):
            v = rng.normal(size=dd) + 1j * rng.normal(size=dd)
            v *= rng.uniform(0.5, 2.0) / np.linalg.norm(v)
            worst = max(worst, divergence_residual(v, h))
        residuals[str(dd)] = worst
    return {"d": d, "order": order, "orientation_sign": sign,
            "inside": {"z": [str(c) for c in z_in], "integral": [inside.real, inside.imag],
                       "expected": [ref.real, ref.imag], "error": abs(inside - ref)},
            "outside": {"z": [str(c) for c in z_out], "integral": [outside.real, outside.imag],
                        "error": abs(outside)},
            "cauchy_agreement": abs(circ - cauchy),
            "divergence_residual_max": residuals, "divergence_step": h}, {}


def _run_cutoff(cfg: RunConfig) -> tuple[dict, dict]:
    body = cfg.body.get("cutoff", {})
    d = int(body.get("d", 1))
    ns = [int(n) for n in body.get("n", [2, 3, 4])]
    m = int(body.get("nodes_per_radius", 64))
    rows = []
    for n in ns:
        r = np.linspace(0.0, 2.0 ** (-(n - 1)) * 1.25, 4001)
        v, s = bump_profile(n, r)
        e = 2.0 ** (-(n - 1))
        grid = Grid.covering(-e * np.ones(2 * d), e * np.ones(2 * d), e / m,
                             origin=np.zeros(2 * d))
        rows.append({"n": n, "value_min": float(v.min()), "value_max": float(v.max()),
                     "max_slope": float(np.abs(s).max()), "slope_bound": 2.0 ** (n + 2),
                     "energy_exact": bump_energy(n, d),
                     "energy_grid": bump_grid_energy(n, np.zeros(2 * d), grid)})
    q = float(body.get("q", 1.5))
    ratios = []
    for scale in (1.0, 0.5):
        grid = Grid.covering(-scale * np.ones(2 * d), scale * np.ones(2 * d), scale / 32,
                             origin=np.zeros(2 * d))
        hat = np.ones(grid.shape)
        for c in grid.relative_coords():
            hat = hat * np.clip(1 - np.abs(c) / scale, 0, None)
        ratios.append(gns_ratio(ScalarField(grid, hat), q))
    return {"d": d, "bumps": rows, "gns_ratio": {"q": q, "scales": [1.0, 0.5], "values": ratios}}, {}


def _family(spec: dict, d: int, seed: int):
    kind = spec.get("type")
    cap = int(spec.get("cap", 64))
    if kind == "polynomial":
        return polynomial_family(d, int(spec["max_degree"]), cap)
    if kind == "pole":
        return pole_family(spec["centers"], spec.get("powers", [1, 2]), cap)
    if kind == "boundary-pole":
        return boundary_pole_family(spec["x"], spec["normal"], float(spec["eps"]),
                                    spec.get("powers", [1, 2]))
    if kind == "affine":
        return affine_pole_family(spec["center"], float(spec["radius"]), d,
                                  min(cap, int(spec.get("count", 16))), seed)
    if kind == "constant":
        return [TestFunction.constant(1.0)]
    raise ConfigError(f"unknown probe family {kind!r}")


def _run_probe(cfg: RunConfig) -> tuple[dict, dict]:
    body = cfg.body["probe"]
    U = _domain(cfg.body["domain"])
    try:
        x, p = body["x"], float(body["p"])
        gs = body["grid"]
        grid = Grid.covering(gs["lo"], gs["hi"], float(gs["h"]) / cfg.resolution_scale,
                             origin=gs.get("origin"))
    except KeyError as exc:
        raise ConfigError(f"probe mode requires field {exc}") from exc
    family = _family(body.get("family", {"type": "constant"}), U.dim // 2, cfg.seed)
    value = evaluation_norm_probe(U, x, p, family, grid)
    return {"probe": value, "family_size": len(family), "h": grid.h, "p": p}, {}


RUNNERS = {"criterion": _run_criterion, "capacity": _run_capacity,
           "martinelli-check": _run_martinelli, "cutoff-check": _run_cutoff, "probe": _run_probe}


def run(config: RunConfig | dict) -> int:
    """Execute one configuration; returns the exit status."""
    try:
        cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
    except ConfigError as exc:
        _report_config_error(exc, None)
        return 2
    try:
        payload, tables = RUNNERS[cfg.mode](cfg)
    except ConfigError as exc:
        _report_config_error(exc, cfg.out)
        return 2
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        _write(cfg.out, "error.json", {"error": "numerical", "message": str(exc)})
        return 1
    report = {"schema": REPORT_SCHEMA, "mode": cfg.mode, "solver_version": SOLVER_VERSION,
              "seed": cfg.seed, "resolution_scale": cfg.resolution_scale,
              "config": cfg.raw, "result": payload}
    _write(cfg.out, "report.json", report)
    if cfg.out is not None:
        for name, rep in tables.items():
            emit_partial_sums(rep, cfg.out / name)
    else:
        sys.stdout.write(_dumps(report))
    return 0


def _dumps(obj) -> str:
    return json.dumps(clean_json(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(out, name, obj) -> None:
    if out is None:
        return
    atomic_write(Path(out) / name, _dumps(obj))


def _report_config_error(exc: ConfigError, out) -> None:
    sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
    _write(out, "error.json", exc.to_dict())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcap", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="run configuration (JSON)")
    ap.add_argument("--out", help="output directory for report.json and CSV tables")
    ap.add_argument("--cache-dir", help="capacity cache directory")
    ap.add_argument("--no-cache", action="store_true", help="disable the capacity cache")
    ap.add_argument("--max-n", type=int, help="override the last shell index")
    ap.add_argument("--resolution-scale", type=float, help="refine (>1) or coarsen (<1) grids")
    ap.add_argument("--seed", type=int, help="random seed for sampled checks and families")
    ap.add_argument("--jobs", type=int, help="worker threads for shell computations")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    out = Path(args.out) if args.out else None
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        data = parse_config_text(text)
        cfg = RunConfig.from_dict(
            data, out=out, cache_dir=Path(args.cache_dir) if args.cache_dir else None,
            max_n=args.max_n, resolution_scale=args.resolution_scale, seed=args.seed,
            jobs=args.jobs)
    except OSError as exc:
        _report_config_error(ConfigError(f"cannot read config: {exc}"), out)
        return 2
    except ConfigError as exc:
        _report_config_error(exc, out)
        return 2
    if args.no_cache:
        cfg.cache_dir = None
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
