"""Why no estimator can be trusted on arbitrary networks.

Two instances share one network and produce identical survey answers, yet
their hidden populations differ by a factor of k. Whatever a method reports,
it is off by at least sqrt(k) on one of them.
"""
import math

import numpy as np

from nsum import build_adversarial_pair, build_clique_pendant, build_star_instance, compute_errors
from nsum.estimators import Sample, estimate_mor, estimate_ros, extract_ard


def full_ard(inst):
    return extract_ard(inst, Sample(inst, np.arange(inst.n)))


# %% the clique / pendant / hub pair
k = 4
i1, i2 = build_adversarial_pair(k)
a1, a2 = full_ard(i1), full_ard(i2)
print("same answers on both instances:", sorted(zip(a1.R, a1.C)) == sorted(zip(a2.R, a2.C)))
print("true prevalence:", i1.prevalence, "vs", i2.prevalence)

for est in (estimate_mor(a1), estimate_ros(a1)):
    e1 = compute_errors(est, i1.prevalence).combined
    e2 = compute_errors(est, i2.prevalence).combined
    print(f"{est.method}: estimate {est.exact}, errors {e1:.3f} / {e2:.3f}, sqrt(k) = {math.sqrt(k):.3f}")

# %% the error grows without bound with k
for k in (1, 4, 16, 64):
    i1, i2 = build_adversarial_pair(k)
    est = estimate_ros(full_ard(i1))
    worse = max(compute_errors(est, i.prevalence).combined for i in (i1, i2))
    print(f"k={k:3d}  worse-instance RoS error {worse:7.3f}")

# %% stars and clique-pendants: the estimators' own worst cases
for n in (10, 100):
    hub = full_ard(build_star_instance(n, "hub_hidden"))
    print(f"star n={n}: E+ MoR = {compute_errors(estimate_mor(hub), 1 / n).upper:.0f}, "
          f"E+ RoS = {compute_errors(estimate_ros(hub), 1 / n).upper:.0f}")
for n in (8, 100):
    cp = build_clique_pendant(n)
    print(f"clique-pendant n={n}: E- RoS = {compute_errors(estimate_ros(full_ard(cp)), cp.prevalence).lower}")
