# coding: utf-8

# # Baselines that need no training
#
# Three reference scorers on a synthetic series with intermittent spikes:
# random numbers (Case 1), the norm of the normalised input window
# (Case 2) and the reconstruction error of a randomly initialised LSTM
# autoencoder (Case 3).

import numpy as np

from tadeval import ProtocolConfig, sweep_best_f1
from tadeval.baselines import WindowSpec, baseline_scores, window_size_sweep
from tadeval.core import dataset_stats
from tadeval.synth import generate, point_anomaly_spec

train, test, labels = generate(point_anomaly_spec(seed=0))
st = dataset_stats(labels)
print(f"test length {test.T}, channels {test.N}, gamma {st.anomaly_ratio_gamma:.3f}, segments {st.segment_count}")


# ## Best F1 per baseline
#
# Case 3 runs the LSTM over every window, which takes a few seconds.

for case in ("case1", "case2", "case3"):
    scores = baseline_scores(case, test, seed=0, reference=train)
    f1 = sweep_best_f1(scores, labels, ProtocolConfig.point()).best_f1
    f1_pa = sweep_best_f1(scores, labels, ProtocolConfig.pa()).best_f1
    print(f"{case}: F1 {f1:.3f}   F1 after PA {f1_pa:.3f}")


# ## Window length
#
# Longer windows accumulate more of the spikes inside a labelled period.

for tau, f1 in window_size_sweep(test, labels, [1, 10, 30, 60, 120, 250], reference=train):
    print(f"tau={tau:4d}  best F1 {f1:.3f}")
