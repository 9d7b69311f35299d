"""Fourier-multiplier tables for the linear damped-wave and heat flows.

Each spatial mode of w_tt + w_t + lam*w = 0 evolves by an explicit 2x2
matrix E(t, lam) acting on (w, w_t).  With c = cos(t*om), s = sin(t*om)/om
for om = sqrt(lam - 1/4) (hyperbolic counterparts below 1/4):

    E11 = e^{-t/2} (c + s/2)      E12 = e^{-t/2} s
    E21 = -lam e^{-t/2} s         E22 = e^{-t/2} (c - s/2)

The Duhamel position weight is the exact integral of E12 over one step.
"""

import numpy as np

__all__ = [
    "damped_wave_propagator",
    "duhamel_weight",
    "heat_multiplier",
    "heat_duhamel_weight",
    "SERIES_HALFWIDTH",
]

# Width of the Taylor window around lam = 1/4 where sin(t*om)/om is
# evaluated by its 3-term series to avoid cancellation.
SERIES_HALFWIDTH = 1e-6


def _cos_sinc(t, lam):
    """c = cos(t*om), s = sin(t*om)/om with the branch switch at lam = 1/4."""
    lam = np.asarray(lam, dtype=float)
    mu = lam - 0.25
    c = np.empty_like(mu)
    s = np.empty_like(mu)

    trig = mu > SERIES_HALFWIDTH
    hyp = mu < -SERIES_HALFWIDTH
    near = ~(trig | hyp)

    if np.any(trig):
        om = np.sqrt(mu[trig])
        c[trig] = np.cos(t * om)
        s[trig] = np.sin(t * om) / om
    if np.any(hyp):
        nv = np.sqrt(-mu[hyp])
        c[hyp] = np.cosh(t * nv)
        s[hyp] = np.sinh(t * nv) / nv
    if np.any(near):
        m = mu[near]
        t2 = t * t
        c[near] = 1.0 - m * t2 / 2.0 + m * m * t2 * t2 / 24.0
        s[near] = t * (1.0 - m * t2 / 6.0 + m * m * t2 * t2 / 120.0)
    return c, s


def damped_wave_propagator(t, lam):
    """Entries (E11, E12, E21, E22) of the per-mode propagator at time t.

    Accepts a scalar or array of squared frequencies lam >= 0.  All entries
    are real; det E = e^{-t} (Abel identity).
    """
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("squared frequency must be nonnegative")
    c, s = _cos_sinc(t, lam)
    damp = np.exp(-0.5 * t)
    e11 = damp * (c + 0.5 * s)
    e12 = damp * s
    e21 = -lam * damp * s
    e22 = damp * (c - 0.5 * s)
    return e11, e12, e21, e22


def duhamel_weight(h, lam):
    """Exact integral of E12(s, lam) over s in [0, h].

    Closed form (1 - E11(h, lam))/lam for lam > 0; the lam = 0 value is
    h - 1 + e^{-h}, the continuous limit.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    lam = np.asarray(lam, dtype=float)
    e11, _, _, _ = damped_wave_propagator(h, lam)
    zero = lam == 0.0
    safe = np.where(zero, 1.0, lam)
    w = (1.0 - e11) / safe
    w0 = h - 1.0 + np.exp(-h)
    out = np.where(zero, w0, w)
    return float(out) if np.ndim(lam) == 0 else out


def heat_multiplier(t, lam):
    """Per-mode heat semigroup multiplier e^{-t*lam}."""
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("squared frequency must be nonnegative")
    out = np.exp(-t * lam)
    return float(out) if np.ndim(lam) == 0 else out


def heat_duhamel_weight(h, lam):
    """Exact integral of e^{-s*lam} over s in [0, h]: (1 - e^{-h*lam})/lam."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    lam = np.asarray(lam, dtype=float)
    zero = lam == 0.0
    safe = np.where(zero, 1.0, lam)
    out = np.where(zero, h, -np.expm1(-h * safe) / safe)
    return float(out) if np.ndim(lam) == 0 else out
