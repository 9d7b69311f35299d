"""Periodic torus grids and spectral transforms.

The torus is [-L, L]^n with N points per axis.  Real fields are stored as
N^n float arrays (row-major); spectra use the real-FFT layout with the
forward transform normalized by 1/N^n, so the zero coefficient equals the
spatial mean of the field.
"""

import numpy as np

__all__ = ["GridSpec", "make_grid"]


class GridSpec:
    """Discretization of the torus [-L, L]^n (n = 1 or 2).

    Frequencies are xi_k = pi*k/L for k in {-N/2, ..., N/2-1}; spectra are
    held in rfft layout (last axis halved), which enforces conjugate
    symmetry structurally.
    """

    def __init__(self, n, L, N):
        if n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {n}")
        if L <= 0:
            raise ValueError(f"torus half-width must be positive, got {L}")
        if N < 16 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 16, got {N}")
        self.n = int(n)
        self.L = float(L)
        self.N = int(N)
        self.dx = 2.0 * self.L / self.N
        self.x = -self.L + self.dx * np.arange(self.N)
        # xi = pi*k/L; rfftfreq(N, d)*2*pi gives 2*pi*k/(N*d) = pi*k/L.
        xi_r = 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.dx)
        xi_f = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)
        if self.n == 1:
            self.spec_shape = (self.N // 2 + 1,)
            self.lam = xi_r**2
            self.grad_xi = (xi_r,)
        else:
            self.spec_shape = (self.N, self.N // 2 + 1)
            self.lam = xi_f[:, None] ** 2 + xi_r[None, :] ** 2
            self.grad_xi = (
                np.broadcast_to(xi_f[:, None], self.spec_shape),
                np.broadcast_to(xi_r[None, :], self.spec_shape),
            )
        self.shape = (self.N,) * self.n
        self._parseval_w = self._make_parseval_weights()
        self._dealias = self._make_dealias_mask()

    # -- transforms ---------------------------------------------------------

    def forward(self, f):
        """Real field -> spectrum; zero coefficient equals the spatial mean."""
        return np.fft.rfftn(f) / self.N**self.n

    def inverse(self, F):
        """Spectrum -> real field."""
        axes = tuple(range(self.n))
        return np.fft.irfftn(F * self.N**self.n, s=self.shape, axes=axes)

    def zero_spectrum(self):
        return np.zeros(self.spec_shape, dtype=np.complex128)

    # -- quadrature and norms ----------------------------------------------

    def integrate(self, f):
        """Trapezoid-rule integral over the torus (exact periodic rule)."""
        return float(np.sum(f)) * self.dx**self.n

    def _make_parseval_weights(self):
        w = np.ones(self.spec_shape)
        # rfft folds k and -k together except at k=0 and the Nyquist column.
        w[..., 1:-1] = 2.0
        return w

    def _make_dealias_mask(self):
        k = np.abs(np.fft.fftfreq(self.N, d=1.0 / self.N))
        keep = k <= self.N / 3.0
        keep_r = keep[: self.N // 2 + 1]
        if self.n == 1:
            return keep_r.astype(float)
        return (keep[:, None] & keep_r[None, :]).astype(float)

    @property
    def dealias_mask(self):
        return self._dealias

    def mass(self, F):
        """Integral of the field, read off the zero mode."""
        zero = F[0] if self.n == 1 else F[0, 0]
        return float(zero.real) * (2.0 * self.L) ** self.n

    def l2_norm(self, F):
        """L2 norm of the field from its spectrum (Parseval)."""
        s = np.sum(self._parseval_w * (F.real**2 + F.imag**2))
        return float(np.sqrt(s * (2.0 * self.L) ** self.n))

    def grad_l2_norm(self, F):
        """L2 norm of the gradient from the spectrum."""
        s = np.sum(self._parseval_w * self.lam * (F.real**2 + F.imag**2))
        return float(np.sqrt(s * (2.0 * self.L) ** self.n))

    def h1_norm(self, F):
        return float(np.hypot(self.l2_norm(F), self.grad_l2_norm(F)))

    def l1_norm(self, f):
        return self.integrate(np.abs(f))

    def radius_sq(self):
        """|x|^2 on the physical grid."""
        if self.n == 1:
            return self.x**2
        return self.x[:, None] ** 2 + self.x[None, :] ** 2

    def boundary_fraction(self, f, band):
        """Fraction of the L1 mass in the outer band*L shell of the torus."""
        cut = self.L * (1.0 - band)
        if self.n == 1:
            mask = np.abs(self.x) >= cut
        else:
            m1 = np.abs(self.x) >= cut
            mask = m1[:, None] | m1[None, :]
        total = np.sum(np.abs(f))
        if total == 0.0:
            return 0.0
        return float(np.sum(np.abs(f)[mask]) / total)


def make_grid(n, L, N):
    """Build a GridSpec, validating the preconditions."""
    return GridSpec(n, L, N)
