"""Small numerical helpers shared across modules."""

import numpy as np


def phi1(z):
    """Evaluate (exp(z) - 1)/z, stable near z = 0, for real or complex input.

    Accepts scalars or arrays; the limit value at z = 0 is 1.
    """
    z = np.asarray(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex if np.iscomplexobj(z) else float)
    small = np.abs(z) < 1e-5
    zs = z[small]
    # cubic Taylor term keeps the error below 4e-22 at |z| = 1e-5
    out[small] = 1.0 + zs / 2.0 + zs**2 / 6.0 + zs**3 / 24.0
    zb = z[~small]
    if np.iscomplexobj(z):
        out[~small] = (np.exp(zb) - 1.0) / np.where(zb == 0, 1.0, zb)
    else:
        out[~small] = np.expm1(zb) / zb
    return out[0] if scalar else out


def exp_diff_over(z, x, y):
    """Evaluate (exp(z*x) - exp(z*y))/z, stable as z -> 0.

    Equals (x - y) * exp(z*y) * phi1(z*(x - y)).
    """
    return (x - y) * np.exp(z * y) * phi1(z * (x - y))
