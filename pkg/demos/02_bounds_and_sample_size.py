"""Tail bounds and how many respondents a survey needs.

On random networks the estimators concentrate. The bounds below give the
probability that the multiplicative error exceeds beta, and the closed form
turns a target probability of 1/sqrt(n) into a sample size.
"""
from nsum.bounds import er_ros_bound, f_bound, mor_bound, sample_size, sf_mean_degree, sf_ros_bound

n, rho, beta = 10**6, 0.05, 1.05

# %% the two-term expression behind every bound
for y in (10, 100, 1000):
    print(f"F(beta={beta}, y={y}) = {f_bound(beta, y):.4g}")

# %% closed-form sample size for P[error > beta] <= 1/sqrt(n)
m = sample_size(n, rho, beta, 0.5)
print(f"\nsample size for n={n}, rho={rho}, beta={beta}: {m}")
print(f"MoR bound at that size: {mor_bound(beta, m, rho).raw:.3e} (target {n ** -0.5:.1e})")
for r in (0.02, 0.10):
    print(f"rho={r}: {sample_size(n, r, beta, 0.5)}")

# %% RoS bounds use the degrees, so they are much smaller on dense networks
p = 30 / (n - 1)
for m in (1_000, 10_000, 50_000):
    print(f"m={m:6d}  MoR {mor_bound(beta, m, rho).clamped:.3g}  "
          f"RoS on ER {er_ros_bound(beta, rho, m, n, p).clamped:.3g}  "
          f"RoS on SF {sf_ros_bound(beta, rho, m, n, 2.5).clamped:.3g}")

# %% the scale-free bound plugs in an approximate mean degree
print(f"\nSF mean degree, approximation {sf_mean_degree(n, 2.5):.3f} "
      f"vs exact {sf_mean_degree(n, 2.5, 'exact_pmf_mean'):.3f}")
