# coding: utf-8

# # Expected PA metrics for random scores
#
# For one anomaly segment of length L, anomaly ratio gamma and uniform
# scores thresholded at d, recall after PA is 1 - d**L.  Precision follows
# from Bayes' rule.  We check both against simulation.

import itertools

from tadeval.analytic import (
    AnalyticParams,
    SegmentLayout,
    expected_f1_pa_curve,
    expected_precision_pa,
    expected_recall_pa,
    monte_carlo_pa,
)


# ## Simulation against the closed forms

print(" gamma     L      d   recall(cf)  recall(mc)   prec(cf)  prec(mc)")
for gamma, L, d in itertools.product((0.05,), (10, 100, 1000), (0.5, 0.9, 0.99)):
    layout = SegmentLayout.single(gamma, L)
    p = AnalyticParams(layout.gamma, L, d)
    mc = monte_carlo_pa(layout, d, trials=2000, seed=1)
    print(f"{gamma:6.2f} {L:5d} {d:6.2f}   {expected_recall_pa(p):9.4f}  {mc.pooled_recall:9.4f}"
          f"   {expected_precision_pa(p):8.4f}  {mc.pooled_precision:8.4f}")


# ## Best achievable F1 after PA
#
# The longer the segment, the closer pure noise gets to a perfect score.

for L in (1, 10, 100, 1000, 5000):
    c = expected_f1_pa_curve(0.05, L)
    print(f"L={L:5d}: max expected F1_PA {c.max_f1:.3f} at d={c.best_delta:.4f}")
