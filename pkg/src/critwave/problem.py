"""Problem definitions: model kind, exponents, initial data, nonlinearity."""

from dataclasses import dataclass, field

import numpy as np

from .criticality import classify

__all__ = [
    "InitialDataSpec",
    "ProblemSpec",
    "HypothesisReport",
    "build_initial_data",
    "data_norm",
    "check_hypotheses",
    "evaluate_nonlinearity",
]

MODELS = ("damped_wave", "reaction_diffusion")
SHAPES = ("gaussian", "smooth_bump", "constant")


@dataclass(frozen=True)
class InitialDataSpec:
    """Recipe for the four data components (u0, u1, v0, v1).

    All components share one profile; amplitudes scale it per component.
    ``width`` is the Gaussian length scale (profile exp(-(|x|/width)^2)),
    ``radius`` the support radius of the smooth bump.  ``constant`` fills
    the torus uniformly (used for ODE-equivalence checks).
    """

    shape: str = "smooth_bump"
    a_u0: float = 1.0
    a_u1: float = 0.0
    a_v0: float = 1.0
    a_v1: float = 0.0
    width: float = 2.0
    radius: float = 5.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown data shape {self.shape!r}")
        if self.width <= 0:
            raise ValueError(f"gaussian width must be positive, got {self.width}")
        if self.radius <= 0:
            raise ValueError(f"bump radius must be positive, got {self.radius}")

    @property
    def amplitudes(self):
        return (self.a_u0, self.a_u1, self.a_v0, self.a_v1)


@dataclass(frozen=True)
class ProblemSpec:
    model: str
    n: int
    p: float
    q: float
    eps: float
    data: InitialDataSpec = field(default_factory=InitialDataSpec)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.n}")
        if self.p <= 1 or self.q <= 1:
            raise ValueError(f"exponents must exceed 1, got p={self.p}, q={self.q}")
        if self.eps <= 0:
            raise ValueError(f"amplitude eps must be positive, got {self.eps}")


def _profile(spec, grid):
    """Unit-amplitude profile sampled on the grid."""
    if spec.shape == "constant":
        return np.ones(grid.shape)
    r2 = grid.radius_sq()
    if spec.shape == "gaussian":
        return np.exp(-r2 / spec.width**2)
    # smooth bump exp(1 - 1/(1 - (|x|/r)^2)) inside |x| < r, exact zero outside
    if spec.radius >= grid.L / 2.0:
        raise ValueError(
            f"bump radius {spec.radius} must be below L/2 = {grid.L / 2.0}"
        )
    s2 = r2 / spec.radius**2
    out = np.zeros(grid.shape)
    inside = s2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
    return out


def build_initial_data(spec, grid):
    """Sample (u0, u1, v0, v1) on the grid, without the eps factor."""
    base = _profile(spec, grid)
    return tuple(a * base for a in spec.amplitudes)


def data_norm(fields, grid):
    """J: sum of the eight data norms (H1+L1 for positions, L2+L1 for speeds)."""
    u0, u1, v0, v1 = fields
    total = 0.0
    for w in (u0, v0):
        total += grid.h1_norm(grid.forward(w)) + grid.l1_norm(w)
    for w in (u1, v1):
        total += grid.l2_norm(grid.forward(w)) + grid.l1_norm(w)
    return total


@dataclass
class HypothesisReport:
    """Which theorem hypotheses a problem satisfies (report, not rejection)."""

    regime: str
    mass_u: float
    mass_v: float
    sign_ok: bool
    compact_support: bool
    tail_mass_u: float
    tail_mass_v: float
    lower_exponents_ok: bool
    trivial_data: bool
    notes: list

    @property
    def upper_bound_ok(self):
        return self.sign_ok and not self.trivial_data

    @property
    def lower_bound_ok(self):
        return self.lower_exponents_ok and not self.trivial_data


def check_hypotheses(problem, grid):
    """Check sign/mass conditions, exponent ranges, and criticality status."""
    u0, u1, v0, v1 = build_initial_data(problem.data, grid)
    mass_u = grid.integrate(u0 + u1)
    mass_v = grid.integrate(v0 + v1)
    notes = []
    trivial = all(a == 0.0 for a in problem.data.amplitudes)
    if trivial:
        notes.append("trivial data: all amplitudes vanish")
    sign_ok = mass_u > 0.0 and mass_v > 0.0
    if not sign_ok and not trivial:
        notes.append("mass condition I0 > 0 fails for at least one component")

    compact = problem.data.shape == "smooth_bump"
    tail_u = tail_v = 0.0
    if problem.data.shape == "gaussian":
        # effectively supported: report the L1 tail outside 3*width
        r = 3.0 * problem.data.width
        far = grid.radius_sq() > r * r
        for w, name in ((np.abs(u0) + np.abs(u1), "u"), (np.abs(v0) + np.abs(v1), "v")):
            total = grid.integrate(w)
            tail = grid.integrate(np.where(far, w, 0.0))
            frac = tail / total if total > 0 else 0.0
            if name == "u":
                tail_u = frac
            else:
                tail_v = frac
        notes.append(
            "gaussian data are not compactly supported; treated as effectively "
            f"supported in radius {r:g} (tail fractions {tail_u:.2e}, {tail_v:.2e})"
        )
    if problem.data.shape == "constant":
        notes.append("constant data violate compact support (ODE-equivalence preset)")
        compact = False

    lower_ok = min(problem.p, problem.q) >= 2.0 and problem.n in (1, 2)
    if not lower_ok:
        notes.append("lower-bound hypothesis p, q >= 2 (n = 1, 2) fails")
    regime = classify(problem.p, problem.q, problem.n).regime
    return HypothesisReport(
        regime=regime,
        mass_u=mass_u,
        mass_v=mass_v,
        sign_ok=sign_ok,
        compact_support=compact,
        tail_mass_u=tail_u,
        tail_mass_v=tail_v,
        lower_exponents_ok=lower_ok,
        trivial_data=trivial,
        notes=notes,
    )


def evaluate_nonlinearity(w, exponent):
    """Pointwise |w|^exponent with |w| = 0 mapped to 0."""
    if exponent <= 1:
        raise ValueError(f"exponent must exceed 1, got {exponent}")
    return np.abs(w) ** exponent
