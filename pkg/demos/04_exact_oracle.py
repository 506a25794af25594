"""Exact checks of the probabilistic facts the bounds rest on.

On tiny networks the whole random graph can be enumerated with exact
fractions, so the unbiasedness and negative-correlation properties can be
checked with no sampling error at all.
"""
from fractions import Fraction

from nsum.oracle import (
    TinyModel,
    check_dependence_example,
    check_expectation_y,
    check_negative_correlation,
    chernoff_monte_carlo,
    default_corpus,
    run_corpus,
)

model = TinyModel(4, {1: Fraction(1, 2), 2: Fraction(1, 2)}, 2)
print(model.label(), "rho =", model.rho)

# %% every respondent's hidden fraction has mean exactly rho
exp = check_expectation_y(model)
print("E[Y] =", exp.e_y, " deviations:", exp.deviations())

# %% products of the indicators never exceed the independent value
corr = check_negative_correlation(model)
for name, fam in corr.families.items():
    print(f"{name:4s} checked {fam.checked:4d} products, worst margin {fam.worst_margin}")

# %% but the variables are not independent
dep = check_dependence_example(TinyModel(3, {1: Fraction(1)}, 1))
print("P[Y>0] =", dep.unconditional, " given another respondent's Y>0:", dep.conditional)

# %% the whole corpus
rows = run_corpus(default_corpus(range(2, 6)))
print(f"corpus: {sum(r.passed for r in rows)}/{len(rows)} checks passed")

# %% the Chernoff bound on a plain binomial
c = chernoff_monte_carlo(draws=20_000)
print(f"two-sided tail {c.two_sided_empirical:.4f} <= {c.two_sided_bound:.4f};"
      f" lower tail {c.lower_empirical:.4f} <= {c.lower_bound:.4f}")
