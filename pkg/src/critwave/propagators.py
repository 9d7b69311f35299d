"""Time stepping: exact linear propagation plus an exponential-midpoint
Duhamel step for the nonlinear coupling.

One step: (i) half-step the state with the exact linear flow, (ii) evaluate
the nonlinearities (|v|^p, |u|^q) there, (iii) full linear step plus the
closed-form Duhamel weights applied to the (dealiased) nonlinearity
spectra.  Self-starting, formally second order, unconditionally stable in
the linear part.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .multipliers import (
    damped_wave_propagator,
    duhamel_weight,
    heat_duhamel_weight,
    heat_multiplier,
)

__all__ = ["EvolState", "Stepper", "BlowUpSuspected"]


class BlowUpSuspected(RuntimeError):
    """Raised when a step produces non-finite field values."""

    def __init__(self, t):
        super().__init__(f"non-finite field values at t = {t}")
        self.t = t


@dataclass
class EvolState:
    """Spectra of the evolved fields at time t.

    Damped wave: (u, ut, v, vt); reaction-diffusion: (u, v) with the
    velocity slots unused (None).
    """

    t: float
    u: np.ndarray
    v: np.ndarray
    ut: np.ndarray = None
    vt: np.ndarray = None

    def copy(self):
        return EvolState(
            self.t,
            self.u.copy(),
            self.v.copy(),
            None if self.ut is None else self.ut.copy(),
            None if self.vt is None else self.vt.copy(),
        )

    @property
    def spectra(self):
        if self.ut is None:
            return (self.u, self.v)
        return (self.u, self.ut, self.v, self.vt)


class Stepper:
    """Steps one problem on one grid; multiplier tables are cached per h."""

    def __init__(self, problem, grid, impl=None):
        self.problem = problem
        self.grid = grid
        self.is_wave = problem.model == "damped_wave"
        self._impl = impl  # kernel backend override, None = default
        self._tables = {}

    def initial_state(self, fields):
        """Spectral state at t = 0 from physical (u0, u1, v0, v1) fields."""
        g = self.grid
        u0, u1, v0, v1 = fields
        if self.is_wave:
            return EvolState(
                0.0, g.forward(u0), g.forward(v0), g.forward(u1), g.forward(v1)
            )
        return EvolState(0.0, g.forward(u0), g.forward(v0))

    def _table(self, h):
        tab = self._tables.get(h)
        if tab is None:
            lam = self.grid.lam
            if self.is_wave:
                tab = {
                    "full": damped_wave_propagator(h, lam),
                    "half": damped_wave_propagator(0.5 * h, lam),
                    "wpos": duhamel_weight(h, lam),
                }
                tab["wvel"] = tab["full"][1]  # integral of E22 row = E12(h)
            else:
                tab = {
                    "full": heat_multiplier(h, lam),
                    "half": heat_multiplier(0.5 * h, lam),
                    "w": heat_duhamel_weight(h, lam),
                }
            if len(self._tables) > 64:
                self._tables.clear()
            self._tables[h] = tab
        return tab

    # -- steps ---------------------------------------------------------------

    def linear_step(self, state, h):
        """Exact linear flow over one step; returns a new state."""
        if h <= 0:
            raise ValueError(f"step must be positive, got {h}")
        tab = self._table(h)
        out = state.copy()
        if self.is_wave:
            e11, e12, e21, e22 = tab["full"]
            backend.dw_apply(e11, e12, e21, e22, state.u, state.ut,
                             out.u, out.ut, impl=self._impl)
            backend.dw_apply(e11, e12, e21, e22, state.v, state.vt,
                             out.v, out.vt, impl=self._impl)
        else:
            backend.heat_position(tab["full"], state.u, out.u, impl=self._impl)
            backend.heat_position(tab["full"], state.v, out.v, impl=self._impl)
        out.t = state.t + h
        return out

    def _nonlinearity_spectra(self, u_half, v_half, t):
        """Dealiased spectra of (|v|^p, |u|^q) from half-step position spectra."""
        g = self.grid
        u_phys = g.inverse(u_half)
        v_phys = g.inverse(v_half)
        fu = np.empty_like(v_phys)
        fv = np.empty_like(u_phys)
        backend.abs_power(v_phys, self.problem.p, fu, impl=self._impl)  # drives u
        backend.abs_power(u_phys, self.problem.q, fv, impl=self._impl)  # drives v
        if not (np.isfinite(fu).all() and np.isfinite(fv).all()):
            raise BlowUpSuspected(t)
        mask = g.dealias_mask
        return g.forward(fu) * mask, g.forward(fv) * mask

    def duhamel_step(self, state, h):
        """One exponential-midpoint step; returns a new state."""
        if h <= 0:
            raise ValueError(f"step must be positive, got {h}")
        tab = self._table(h)
        out = state.copy()
        if self.is_wave:
            h11, h12, _, _ = tab["half"]
            u_half = h11 * state.u + h12 * state.ut
            v_half = h11 * state.v + h12 * state.vt
            fu, fv = self._nonlinearity_spectra(u_half, v_half, state.t)
            e11, e12, e21, e22 = tab["full"]
            backend.dw_update(e11, e12, e21, e22, tab["wpos"], tab["wvel"],
                              fu, out.u, out.ut, impl=self._impl)
            backend.dw_update(e11, e12, e21, e22, tab["wpos"], tab["wvel"],
                              fv, out.v, out.vt, impl=self._impl)
        else:
            u_half = tab["half"] * state.u
            v_half = tab["half"] * state.v
            fu, fv = self._nonlinearity_spectra(u_half, v_half, state.t)
            backend.heat_update(tab["full"], tab["w"], fu, out.u, impl=self._impl)
            backend.heat_update(tab["full"], tab["w"], fv, out.v, impl=self._impl)
        if not all(np.isfinite(s).all() for s in out.spectra):
            raise BlowUpSuspected(state.t + h)
        out.t = state.t + h
        return out

    def step(self, state, h, linear=False):
        return self.linear_step(state, h) if linear else self.duhamel_step(state, h)
