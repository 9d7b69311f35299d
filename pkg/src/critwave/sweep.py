"""Epsilon sweeps over a fixed problem family, lifespan scaling fits, and
CSV/JSON persistence for both."""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .grid import make_grid
from .problem import InitialDataSpec, ProblemSpec
from .rundriver import RunConfig, run

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepTable",
    "FitResult",
    "run_sweep",
    "fit_scaling",
    "default_eps_list",
]

CSV_HEADER = "model,n,p,q,eps,L,N,status,T_num,boundary_mass_max,dt_final"


def default_eps_list(start, count, ratio=0.85):
    """Geometric ladder of data amplitudes, largest first."""
    return tuple(start * ratio**k for k in range(count))


@dataclass(frozen=True)
class SweepSpec:
    model: str
    n: int
    p: float
    q: float
    data: InitialDataSpec
    eps_list: tuple
    grids: tuple  # ((L, N), ...) coarse to fine
    config: RunConfig = field(default_factory=RunConfig)
    jobs: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        if not eps:
            raise ValueError("eps_list is empty")
        if any(e <= 0 for e in eps):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if not self.grids:
            raise ValueError("at least one (L, N) grid is required")
        object.__setattr__(self, "eps_list", eps)
        object.__setattr__(self, "grids", tuple((float(L), int(N)) for L, N in self.grids))


@dataclass(frozen=True)
class SweepRow:
    model: str
    n: int
    p: float
    q: float
    eps: float
    L: float
    N: int
    status: str
    T_num: float
    boundary_mass_max: float
    dt_final: float


def _g17(x):
    return format(float(x), ".17g")


def _row_to_line(r):
    return ",".join(
        [
            r.model,
            str(r.n),
            _g17(r.p),
            _g17(r.q),
            _g17(r.eps),
            _g17(r.L),
            str(r.N),
            r.status,
            _g17(r.T_num),
            _g17(r.boundary_mass_max),
            _g17(r.dt_final),
        ]
    )


class SweepTable:
    def __init__(self, rows=()):
        self.rows = list(rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, SweepTable) and self._key() == other._key()

    def _key(self):
        def norm(r):
            t = r.T_num
            return r.model, r.n, r.p, r.q, r.eps, r.L, r.N, r.status, (
                "nan" if math.isnan(t) else t
            ), r.boundary_mass_max, r.dt_final
        return [norm(r) for r in self.rows]

    @property
    def flagged(self):
        """True if any run hit the boundary-mass guard (fit will skip it)."""
        return any(r.status == "inconclusive_boundary" for r in self.rows)

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in self.rows:
                fh.write(_row_to_line(r) + "\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            lines = fh.read().split("\n")
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError(f"{path}: line 1: bad or missing header")
        rows = []
        for i, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 11:
                raise ValueError(f"{path}: line {i}: expected 11 fields, got {len(parts)}")
            try:
                rows.append(
                    SweepRow(
                        model=parts[0], n=int(parts[1]), p=float(parts[2]),
                        q=float(parts[3]), eps=float(parts[4]), L=float(parts[5]),
                        N=int(parts[6]), status=parts[7], T_num=float(parts[8]),
                        boundary_mass_max=float(parts[9]), dt_final=float(parts[10]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: line {i}: {exc}") from None
        return cls(rows)


def _run_one(payload):
    model, n, p, q, eps, data_dict, L, N, config_dict = payload
    problem = ProblemSpec(
        model=model, n=n, p=p, q=q, eps=eps, data=InitialDataSpec(**data_dict)
    )
    grid = make_grid(n, L, N)
    result = run(problem, grid, RunConfig(**config_dict))
    return SweepRow(
        model=model, n=n, p=p, q=q, eps=eps, L=L, N=N,
        status=result.status, T_num=result.T_num,
        boundary_mass_max=result.boundary_mass_max, dt_final=result.dt_final,
    )


def run_sweep(spec, jobs=None):
    """Run every (eps, grid) pair; rows ordered by (eps descending, N ascending).

    Output is deterministic and independent of the worker count: tasks are
    enumerated in their final order and results collected positionally.
    """
    jobs = spec.jobs if jobs is None else int(jobs)
    grids = sorted(spec.grids, key=lambda g: g[1])
    payloads = [
        (spec.model, spec.n, spec.p, spec.q, eps, asdict(spec.data), L, N,
         asdict(spec.config))
        for eps in spec.eps_list
        for (L, N) in grids
    ]
    if jobs <= 1:
        rows = [_run_one(pl) for pl in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, payloads))
    return SweepTable(rows)


# -- scaling fits ---------------------------------------------------------------


@dataclass
class FitResult:
    law: str  # critical | subcritical | fixed-kappa
    kappa_hat: float
    C_hat: float
    r_squared: float
    residuals: list
    n_points: int
    kappa_predicted: float = float("nan")

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls(**json.load(fh))


def _usable_rows(table, need_t_above_one):
    blew = [r for r in table.rows if r.status == "blew_up"]
    if not blew:
        raise ValueError("no blow-up data: nothing to fit")
    # keep the finest grid per eps
    best = {}
    for r in blew:
        key = r.eps
        if key not in best or r.N > best[key].N:
            best[key] = r
    rows = sorted(best.values(), key=lambda r: -r.eps)
    if need_t_above_one:
        rows = [r for r in rows if r.T_num > 1.0]
    if len(rows) < 4:
        raise ValueError(f"only {len(rows)} usable rows; at least 4 required")
    for a, b in zip(rows, rows[1:]):
        if b.T_num < a.T_num * 0.95:
            raise ValueError(
                f"lifespans not monotone in eps beyond 5% noise: "
                f"T({b.eps:g}) = {b.T_num:.4g} < 0.95 * T({a.eps:g}) = "
                f"{a.T_num:.4g}"
            )
    return rows


def _linreg(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), r2, (y - fit).tolist()


def fit_scaling(table, law, kappa_predicted=None):
    """Fit measured lifespans against a scaling law.

    critical:     T = exp(C * eps^(-kappa)); kappa from loglog regression,
                  C through the origin afterwards.
    subcritical:  T = C * eps^(-kappa); plain log-log regression.
    fixed-kappa:  log T regressed against eps^(-kappa_predicted); the
                  r_squared linearity score is the figure of merit.
    """
    if law not in ("critical", "subcritical", "fixed-kappa"):
        raise ValueError(f"unknown law '{law}'")
    rows = _usable_rows(table, need_t_above_one=(law != "subcritical"))
    eps = np.array([r.eps for r in rows])
    T = np.array([r.T_num for r in rows])
    kp = float("nan") if kappa_predicted is None else float(kappa_predicted)

    if law == "critical":
        slope, _, r2, resid = _linreg(np.log(1.0 / eps), np.log(np.log(T)))
        kappa_hat = slope
        x = eps ** (-kappa_hat)
        c_hat = float(np.dot(x, np.log(T)) / np.dot(x, x))
    elif law == "subcritical":
        slope, intercept, r2, resid = _linreg(np.log(1.0 / eps), np.log(T))
        kappa_hat = slope
        c_hat = float(np.exp(intercept))
    else:
        if kappa_predicted is None:
            raise ValueError("fixed-kappa law requires kappa_predicted")
        slope, _, r2, resid = _linreg(eps ** (-kp), np.log(T))
        kappa_hat = kp
        c_hat = slope
    return FitResult(
        law=law, kappa_hat=kappa_hat, C_hat=c_hat, r_squared=r2,
        residuals=resid, n_points=len(rows), kappa_predicted=kp,
    )
