"""Pure-numpy implementations of the saturable-nonlinearity kernels.

Semantically identical to the compiled versions in ``_sat_cy.pyx``; used as
the import-time fallback and for cross-checking the extension.
"""

import numpy as np


def saturable_triple(t, s):
    t = np.asarray(t, dtype=float)
    tp = np.where(t > 0.0, t, 0.0)
    t2 = tp * tp
    den = 1.0 + s * t2
    f = tp * t2 / den
    fp = t2 * (3.0 + s * t2) / (den * den)
    big_f = t2 / (2.0 * s) - np.log(den) / (2.0 * s * s)
    return f, fp, big_f


def nehari_rate_sum(u, t, s):
    tu = t * np.where(u > 0.0, u, 0.0)
    tu2 = tu * tu
    return float(np.sum(tu * tu2 / (1.0 + s * tu2) * u)) / t


def energy_sums(u, v, s):
    u2 = u * u
    pot = float(np.dot(v, u2))
    up2 = np.where(u > 0.0, u2, 0.0)
    den = 1.0 + s * up2
    fint = float(np.sum(up2 / (2.0 * s) - np.log(den) / (2.0 * s * s)))
    fu = float(np.sum(up2 * up2 / den))
    return pot, fint, fu


def negative_sq_sum(u):
    un = np.where(u < 0.0, u, 0.0)
    return float(np.dot(un, un))
