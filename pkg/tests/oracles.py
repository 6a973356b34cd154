"""Independent reference implementations used as test oracles.

Written with plain Python loops and ``fractions``-free float arithmetic,
deliberately sharing no code with the package.
"""

import math


def naive_gra(reference, comparatives, delta=0.5):
    """Grades for each comparative, in input order.

    Direct transcription: min-max normalize, absolute deviations, global
    extremes, coefficient formula, row average.
    """
    def norm(xs):
        lo, hi = min(xs), max(xs)
        return [(x - lo) / (hi - lo) for x in xs]

    x0 = norm(reference)
    devs = []
    for comp in comparatives:
        xi = norm(comp)
        devs.append([abs(a - b) for a, b in zip(x0, xi)])
    dmin = min(min(row) for row in devs)
    dmax = max(max(row) for row in devs)
    grades = []
    for row in devs:
        if dmax <= 1e-9:  # coincident series (up to rounding) relate perfectly
            coeffs = [1.0] * len(row)
        else:
            coeffs = [(dmin + delta * dmax) / (d + delta * dmax) for d in row]
        grades.append(sum(coeffs) / len(coeffs))
    return grades


def sigma_clip_oracle(columns, sigma=3.0):
    """Indices of rows to drop: any column value outside mean +/- sigma*sd.

    ``columns`` maps name -> list of values (None = missing). Population SD.
    Columns that are constant are skipped.
    """
    n = len(next(iter(columns.values())))
    drop = set()
    for vals in columns.values():
        present = [v for v in vals if v is not None]
        if not present or min(present) == max(present):
            continue
        mu = sum(present) / len(present)
        sd = math.sqrt(sum((v - mu) ** 2 for v in present) / len(present))
        for i in range(n):
            v = vals[i]
            if v is not None and abs(v - mu) > sigma * sd:
                drop.add(i)
    return drop
