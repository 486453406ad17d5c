# coding: utf-8

# # PA%K and the K-sweep
#
# PA%K only credits a segment when more than K percent of its steps were
# detected.  Sweeping K from 0 (plain PA) to 100 (point-wise) and taking
# the area under the F1 curve gives a single number that no longer depends
# on K.

import numpy as np

from tadeval import k_sweep
from tadeval.synth import layout_from_stats

layout = layout_from_stats(T=20_000, gamma=0.08, M=4, seed=3)
labels = layout.labels()
rng = np.random.default_rng(3)


# ## Random scores versus an informative detector
#
# The informative detector adds a modest offset inside anomaly segments.

random_scores = rng.random(labels.size)
useful_scores = rng.normal(size=labels.size) + 1.5 * labels

for name, scores in (("random", random_scores), ("informative", useful_scores)):
    curve = k_sweep(scores, labels, delta=None)
    cells = "  ".join(f"{int(k)}:{f:.2f}" for k, f in zip(curve.k_values, curve.f1_values))
    print(f"{name:12s} AUC {curve.auc:.3f}   {cells}")
