"""Classification of exponent pairs against the critical curve.

The curve alpha_max(p, q) = (max{p,q}+1)/(pq-1) = n/2 separates global
existence (below) from finite-time blow-up (on and above).  On the curve
the lifespan grows like exp(C * eps^{-kappa}); in the blow-up region off
the curve it grows like a power of 1/eps.
"""

from dataclasses import dataclass

__all__ = [
    "alpha_max",
    "fujita_exponent",
    "classify",
    "predicted_law",
    "single_equation_law",
    "CriticalityReport",
    "LifespanLaw",
]

DEFAULT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CriticalityReport:
    alpha_max: float
    fujita: float
    regime: str  # supercritical_global | critical | subcritical_blowup
    tolerance: float


@dataclass(frozen=True)
class LifespanLaw:
    form: str  # power | exp_power
    kappa: float
    description: str
    conjectural: bool = False


def _check_exponents(p, q):
    if p <= 1 or q <= 1:
        raise ValueError(f"exponents must exceed 1, got p={p}, q={q}")


def fujita_exponent(n):
    return 1.0 + 2.0 / n


def alpha_max(p, q):
    """(max{p,q}+1)/(pq-1); symmetric in p and q."""
    _check_exponents(p, q)
    return (max(p, q) + 1.0) / (p * q - 1.0)


def classify(p, q, n, tolerance=DEFAULT_TOLERANCE):
    """Place (p, q) relative to the critical curve at dimension n."""
    _check_exponents(p, q)
    if n not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {n}")
    if not 0 <= tolerance <= 1e-6:
        raise ValueError(f"tolerance must lie in [0, 1e-6], got {tolerance}")
    a = alpha_max(p, q)
    half = n / 2.0
    if abs(a - half) <= tolerance:
        regime = "critical"
    elif a < half - tolerance:
        regime = "supercritical_global"
    else:
        regime = "subcritical_blowup"
    return CriticalityReport(a, fujita_exponent(n), regime, tolerance)


def predicted_law(p, q, n, tolerance=DEFAULT_TOLERANCE):
    """Predicted lifespan law T_eps for a blow-up regime pair (p, q)."""
    report = classify(p, q, n, tolerance)
    conjectural = min(p, q) < 2 or n not in (1, 2)
    if report.regime == "supercritical_global":
        raise ValueError(
            f"no blow-up law: (p={p}, q={q}) is supercritical at n={n}"
        )
    if report.regime == "critical":
        if abs(p - q) <= tolerance:
            kappa = p - 1.0
            desc = f"T ~ exp(C * eps^-{kappa:g})  (critical, p = q)"
        else:
            kappa = p * q - fujita_exponent(n)
            other = max(p * (p * q - 1) / (p + 1), q * (p * q - 1) / (q + 1))
            if abs(kappa - other) > 1e-12 * max(1.0, abs(kappa)):
                raise AssertionError(
                    f"critical-curve kappa identity violated: {kappa} vs {other}"
                )
            desc = f"T ~ exp(C * eps^-{kappa:g})  (critical, p != q)"
        return LifespanLaw("exp_power", kappa, desc, conjectural)
    kappa = 1.0 / (report.alpha_max - n / 2.0)
    desc = f"T ~ C * eps^-{kappa:g}  (subcritical blow-up)"
    return LifespanLaw("power", kappa, desc, conjectural)


def single_equation_law(p, n, tolerance=DEFAULT_TOLERANCE):
    """Lifespan law for the single equation with one power nonlinearity."""
    if p <= 1:
        raise ValueError(f"exponent must exceed 1, got p={p}")
    pf = fujita_exponent(n)
    if p > pf + tolerance:
        raise ValueError(f"global regime: p={p} exceeds the Fujita exponent {pf}")
    if abs(p - pf) <= tolerance:
        kappa = p - 1.0
        return LifespanLaw(
            "exp_power", kappa, f"T ~ exp(C * eps^-{kappa:g})  (Fujita-critical)"
        )
    kappa = 2.0 * (p - 1.0) / (2.0 - n * (p - 1.0))
    return LifespanLaw("power", kappa, f"T ~ C * eps^-{kappa:g}  (sub-Fujita)")
