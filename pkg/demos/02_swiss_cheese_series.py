"""The weighted capacity series at the centre of a Swiss cheese domain.

Run with ``python demos/02_swiss_cheese_series.py``.
"""

from __future__ import annotations

from qcap import CriterionConfig, Ball, evaluate_criterion, make_swiss_cheese

# One closed disk of radius 2^-8n is removed inside every dyadic shell about
# the origin.  The holes shrink much faster than the shell weights grow, so
# the terms fall off geometrically.
U = make_swiss_cheese((0, 0), lambda n: 2.0 ** (-8 * n), range(1, 7))
config = CriterionConfig(d=1, x=(0, 0), p=3, n_min=1, n_max=6)
report = evaluate_criterion(U, config)

print(f"q = {config.q:.3f}")
print(f"{'n':>2} {'capacity':>12} {'term':>12} {'partial sum':>12}")
for s in report.shells:
    print(f"{s.n:>2} {s.capacity:12.4e} {s.term:12.4e} {s.partial_sum:12.4e}")
print("verdict:", report.verdict)
print("fitted ratio:", report.fitted_ratio, " tail estimate:", report.tail_estimate)
print(report.message)

# For comparison, the centre of an intact disk sees no removed set at all.
plain = evaluate_criterion(Ball((0, 0), 1.0), config)
print("intact disk:", plain.verdict, [s.term for s in plain.shells])
