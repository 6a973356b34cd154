"""
Grey relational analysis, step by step
======================================

Walk through the four stages on a three-month toy problem: normalize,
take deviations from the reference, turn them into coefficients, and
average the coefficients into a grade.
"""

import numpy as np

from qqgra.gra import (
    GraConfig,
    RawSeries,
    classify_influence,
    deviation_matrix,
    grey_coefficients,
    normalize,
    relational_grades,
    run_gra,
)

# %%
# The reference is what we want to explain (mean pageviews per month);
# the comparatives are candidate drivers.
reference = RawSeries("pageviews", [1, 2, 3])
rising = RawSeries("rising", [10, 20, 30])
falling = RawSeries("falling", [3, 2, 1])

# %%
# Min-max normalization puts every series on [0, 1]. The scale of the raw
# values is gone, which is why ``rising`` will relate perfectly.
x0 = normalize(reference)
xs = [normalize(s) for s in (rising, falling)]
for s in xs:
    print(s.name, s.values)

# %%
# Absolute deviations from the reference, and the global extremes used by
# every coefficient.
dev = deviation_matrix(x0, xs)
print(dev.rows)
print("delta_min", dev.delta_min, "delta_max", dev.delta_max)

# %%
# Coefficients with the usual distinguishing coefficient of 0.5. A
# deviation equal to the global minimum scores exactly 1.
coeffs = grey_coefficients(dev, GraConfig(delta=0.5))
print(np.round(coeffs.rows, 4))

# %%
# The grade is the mean coefficient. ``falling`` scores 5/9: one perfect
# month in the middle and two months at 1/3.
for name, grade in zip(dev.names, relational_grades(coeffs)):
    print(f"{name:8s} {grade:.6f} {classify_influence(grade).value}")

# %%
# ``run_gra`` does all of the above and ranks the result.
for r in run_gra(reference, [rising, falling]):
    print(r.rank, r.name, round(r.grade, 6), r.influence.value)

# %%
# The distinguishing coefficient only stretches the contrast: every grade
# rises with it, but the order stays put here.
for delta in (0.1, 0.5, 1.0):
    res = run_gra(reference, [rising, falling], GraConfig(delta=delta))
    print(delta, [(r.name, round(r.grade, 4)) for r in res])
