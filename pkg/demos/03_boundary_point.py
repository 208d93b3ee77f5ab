"""A point on the boundary of a disk: growing terms and a growing probe.

Run with ``python demos/03_boundary_point.py``.
"""

from __future__ import annotations

from qcap import Ball, CriterionConfig, Grid, evaluate_criterion, evaluation_norm_probe
from qcap.criterion import boundary_pole_family

# Every shell about a boundary point meets a fixed fraction of the outside,
# so the shell capacities scale like the shell size and the weights win.
U = Ball((1, 0), 1.0)
config = CriterionConfig(d=1, x=(0, 0), p=3, n_max=6, resolutions=(8, 16))
report = evaluate_criterion(U, config)
for s in report.shells:
    print(f"n = {s.n}  term = {s.term:.4e}")
print("verdict:", report.verdict, " fitted ratio:", round(report.fitted_ratio, 3))

# Poles approaching x from outside give functions whose value at x grows
# faster than their L^2 norm over U.
grid = Grid.covering((0, -1), (2, 1), 1 / 256, origin=(0, 0))
for eps in (1e-1, 3e-2, 1e-2):
    family = boundary_pole_family((0, 0), (-1, 0), eps, [1, 2])
    print(f"eps = {eps:<6} probe = {evaluation_norm_probe(U, (0, 0), 2.0, family, grid):.3f}")
