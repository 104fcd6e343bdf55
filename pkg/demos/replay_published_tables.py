"""
Replaying the published tables
==============================

The bank data behind the original study is not public, so nothing here
is refit. What can be checked is the arithmetic that links the printed
numbers to each other.
"""

import numpy as np

from creditlab import discriminant as da
from creditlab import neural as nn
from creditlab import reference

# Group mean tests: F is a function of Wilks' lambda alone when there are
# two groups. Lambda is printed to three decimals, which is coarse enough
# that F recomputed from it can drift by several hundredths.
print("variable  lambda  F(published)  F(from lambda)  p(from F)")
for code, (lam, f, d1, d2, sig) in reference.GROUP_MEAN_TESTS.items():
    print(f"{code:8s}  {lam:.3f}  {f:12.2f}  {d2 * (1 - lam) / lam:14.3f}"
          f"  {da.f_upper_tail(f, d1, d2):9.3f}")

# The canonical function ships as a model file; scoring a zero vector
# gives back the constant.
model = reference.canonical_model()
print("\nZ(0) =", da.score(model, np.zeros(len(model.variables))))

# Base-sample classification counts.
table = da.ConfusionTable(*reference.BASE_CONFUSION)
print(da.table_text(da.confusion_rows(table)), end="")
print(da.format_overall(table))

# Per-firm network outputs on the test year, cut at the printed threshold.
rows = nn.firm_rows(reference.TEST_DESIRED, reference.TEST_OUTPUTS,
                    reference.MEDIAN_THRESHOLD)
correct = sum(r[4] for r in rows[1:])
print(f"\nnetwork: {correct}/86 correct ({100 * correct / 86:.2f}%)")
print("misclassified firms:", [r[0] for r in rows[1:] if not r[4]])
print("median of the printed outputs:", np.median(reference.TEST_OUTPUTS))
