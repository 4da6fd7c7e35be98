r"""Modified Bessel functions of the first kind, scaled by a power of the argument.

Everything here is expressed through

.. math::

    \mathcal{I}_\mu(r) = \frac{I_\mu(r)}{r^\mu}
    = 2^{-\mu} \sum_{m\ge0} \frac{(r^2/4)^m}{m!\,\Gamma(m+\mu+1)},

which is an entire function of ``r`` with all series terms positive, so the
small-argument branch has no cancellation and no removable singularity at
``r = 0``. Large arguments use the Hankel asymptotic expansion, which
terminates exactly for half-integer orders.
"""

import math

import numpy as np

#: below this radius the power series is used, above it the asymptotic series
SERIES_CUTOFF = 15.0

_SERIES_RTOL = 1e-17
_MAX_SERIES_TERMS = 500
_MAX_ASYMPTOTIC_TERMS = 80


def _series(mu, r):
    x = 0.25 * r * r
    term = np.full_like(r, 2.0 ** (-mu) / math.gamma(mu + 1.0))
    total = term.copy()
    for m in range(1, _MAX_SERIES_TERMS):
        term = term * x / (m * (m + mu))
        total += term
        if not np.any(term > _SERIES_RTOL * total):
            break
    return total


def _asymptotic(mu, r):
    four_mu2 = 4.0 * mu * mu
    total = np.ones_like(r)
    term = np.ones_like(r)
    active = np.ones(r.shape, dtype=bool)
    prev = np.ones_like(r)
    for k in range(1, _MAX_ASYMPTOTIC_TERMS):
        coeff = -(four_mu2 - (2 * k - 1) ** 2) / (8.0 * k)
        if coeff == 0.0:
            break
        term = term * coeff / r
        mag = np.abs(term)
        # optimal truncation: stop once terms start growing
        active &= mag < prev
        total = np.where(active, total + term, total)
        prev = np.where(active, mag, prev)
        if not np.any(active & (mag > _SERIES_RTOL * np.abs(total))):
            break
    return total * np.exp(r) / np.sqrt(2.0 * np.pi * r) / r ** mu


def scaled_bessel_i(mu, r):
    """Return ``I_mu(r) / r**mu`` for ``mu >= -1/2`` and ``r >= 0``.

    Works elementwise on arrays; scalars in, float out.
    """
    if mu < -0.5:
        raise ValueError(f"order {mu} not supported (need mu >= -1/2)")
    arr = np.asarray(r, dtype=float)
    scalar = arr.ndim == 0
    r1 = np.atleast_1d(arr)
    if np.any(r1 < 0) or not np.all(np.isfinite(r1)):
        raise ValueError("argument must be finite and non-negative")
    out = np.empty_like(r1)
    small = r1 <= SERIES_CUTOFF
    if np.any(small):
        out[small] = _series(mu, r1[small])
    if np.any(~small):
        out[~small] = _asymptotic(mu, r1[~small])
    return float(out[0]) if scalar else out


def bessel_i0(r):
    """Modified Bessel function ``I_0``."""
    return scaled_bessel_i(0.0, r)


def bessel_i1(r):
    """Modified Bessel function ``I_1``."""
    val = scaled_bessel_i(1.0, r)
    return val * (float(r) if np.ndim(r) == 0 else np.asarray(r, dtype=float))
