"""Statistical helpers shared by the measurement harness.

Thin wrappers over scipy that pin down the degenerate cases the raw
routines leave as nan: simulated channels frequently produce
zero-variance samples (a design that never leaks gives the same miss
count every trial), and the harness needs a defined answer there rather
than nan propagation.
"""

from __future__ import annotations

import numpy as np
from scipy import stats as sps


def welch_t(a, b) -> float:
    """Two-sided Welch t-test p-value for independent samples.

    Zero variance on both sides means the samples are deterministic:
    identical means are then indistinguishable (p = 1) and different
    means are perfectly distinguishable (p = 0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("welch_t needs at least 2 samples per side")
    if a.var() == 0.0 and b.var() == 0.0:
        return 1.0 if a.mean() == b.mean() else 0.0
    p = sps.ttest_ind(a, b, equal_var=False).pvalue
    return float(p)


def pearson(x, y) -> float:
    """Pearson correlation coefficient; 0.0 when either side is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 2 or x.std() == 0.0 or y.std() == 0.0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def chi_square_uniform(counts) -> float:
    """P-value of a chi-square test of ``counts`` against the uniform law."""
    counts = np.asarray(counts, dtype=np.float64)
    if len(counts) < 2:
        raise ValueError("need at least 2 bins")
    if counts.min() < 0:
        raise ValueError("counts must be nonnegative")
    if counts.sum() == 0:
        raise ValueError("empty histogram")
    return float(sps.chisquare(counts).pvalue)
