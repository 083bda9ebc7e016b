"""Anisotropic Gaussian test functions with closed-form norms and transforms.

These are the reference inputs for every numerical cross-check: their L^p
norms, Fourier transforms, and integrals against each other under linear maps
are all available in closed form, which is what makes honest error reporting
possible downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaussianSpec:
    """amplitude * exp(-sum_i (x_i - mean_i)^2 / (2 sigma_i^2)) on R^dim."""

    dim: int
    amplitude: float
    mean: tuple[float, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if len(self.mean) != self.dim or len(self.sigmas) != self.dim:
            raise ValueError("mean and sigmas must have length dim")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("sigmas must be positive")

    @classmethod
    def unit_mass(cls, dim: int, mean=None, sigmas=None) -> "GaussianSpec":
        """A Gaussian normalized to integral one."""
        mean = tuple([0.0] * dim) if mean is None else tuple(mean)
        sigmas = tuple([1.0] * dim) if sigmas is None else tuple(sigmas)
        amp = 1.0 / math.prod(math.sqrt(TWO_PI) * s for s in sigmas)
        return cls(dim=dim, amplitude=amp, mean=mean, sigmas=sigmas)

    # -- pointwise -----------------------------------------------------------

    def evaluate(self, x) -> np.ndarray:
        """Values at points of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        z = (x - np.asarray(self.mean)) / np.asarray(self.sigmas)
        return self.amplitude * np.exp(-0.5 * np.sum(z * z, axis=-1))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws from the normalized density proportional to this Gaussian."""
        z = rng.standard_normal(size=(size, self.dim))
        return np.asarray(self.mean) + z * np.asarray(self.sigmas)

    # -- closed-form functionals ---------------------------------------------

    @property
    def mass(self) -> float:
        """Integral over R^dim."""
        return self.amplitude * math.prod(math.sqrt(TWO_PI) * s for s in self.sigmas)

    @property
    def l1_norm(self) -> float:
        return self.mass  # amplitude > 0

    @property
    def l2_norm_sq(self) -> float:
        return self.amplitude**2 * math.prod(math.sqrt(math.pi) * s for s in self.sigmas)

    def lp_norm(self, p: float) -> float:
        """||f||_p for any p > 0, in closed form."""
        if p <= 0:
            raise ValueError("p must be positive")
        log_int = p * math.log(self.amplitude) + sum(
            0.5 * math.log(TWO_PI / p) + math.log(s) for s in self.sigmas
        )
        return math.exp(log_int / p)

    def fourier(self, xi) -> np.ndarray:
        """Fourier transform with the convention f^(xi) = integral f e^(-2 pi i <x, xi>).

        For this Gaussian: mass * exp(-2 pi^2 sum sigma_i^2 xi_i^2) * e^(-2 pi i <mean, xi>).
        """
        xi = np.asarray(xi, dtype=float)
        sig = np.asarray(self.sigmas)
        mod = self.mass * np.exp(-2.0 * math.pi**2 * np.sum((sig * xi) ** 2, axis=-1))
        phase = np.exp(-1j * TWO_PI * (xi @ np.asarray(self.mean)))
        return mod * phase

    def fourier_modulus(self, xi) -> np.ndarray:
        """|f^(xi)|, which is the transform itself when the mean vanishes."""
        xi = np.asarray(xi, dtype=float)
        sig = np.asarray(self.sigmas)
        return self.mass * np.exp(-2.0 * math.pi**2 * np.sum((sig * xi) ** 2, axis=-1))

    # -- support control ------------------------------------------------------

    def tail_outside_box(self, radius: float) -> float:
        """Upper bound on the mass fraction outside the box |x_i| <= radius.

        Union bound over axes with exact one-dimensional normal tails.
        """

        def sf(t: float) -> float:
            return 0.5 * math.erfc(t / math.sqrt(2.0))

        frac = 0.0
        for m, s in zip(self.mean, self.sigmas):
            frac += sf((radius - m) / s) + sf((radius + m) / s)
        return frac

    def box_for_mass(self, tail: float = 1e-9) -> float:
        """A radius R with at most the given mass fraction outside [-R, R]^dim."""
        r = max(abs(m) + s for m, s in zip(self.mean, self.sigmas))
        while self.tail_outside_box(r) > tail:
            r *= 1.25
        return r


def random_gaussian(
    rng: np.random.Generator,
    dim: int,
    sigma_range: tuple[float, float] = (0.6, 1.4),
    mean_radius: float = 1.0,
    normalized: bool = True,
) -> GaussianSpec:
    """A random anisotropic Gaussian, by default with unit mass."""
    sigmas = tuple(rng.uniform(*sigma_range, size=dim).tolist())
    mean = tuple(rng.uniform(-mean_radius, mean_radius, size=dim).tolist())
    if normalized:
        return GaussianSpec.unit_mass(dim, mean=mean, sigmas=sigmas)
    return GaussianSpec(dim=dim, amplitude=float(rng.uniform(0.5, 2.0)), mean=mean, sigmas=sigmas)


def gaussian_linear_pair_integral(f: GaussianSpec, h: GaussianSpec, bmat) -> float:
    """Closed form for integral f(x) h(B x) dx with B an (h.dim x f.dim) matrix.

    Writing each factor as amp * exp(-(x - m)^T D (x - m) / 2) with diagonal
    D = diag(1/sigma^2), the product is a single Gaussian with precision
    A = D_f + B^T D_h B, so the integral is

        amp_f amp_h (2 pi)^(dim/2) det(A)^(-1/2) exp((b^T A^-1 b - c0) / 2)

    with b = D_f m_f + B^T D_h m_h and c0 = m_f^T D_f m_f + m_h^T D_h m_h.
    """
    b_arr = np.asarray(bmat, dtype=float)
    if b_arr.shape != (h.dim, f.dim):
        raise ValueError(f"linear map must have shape ({h.dim}, {f.dim})")
    d_f = np.diag([1.0 / s**2 for s in f.sigmas])
    d_h = np.diag([1.0 / s**2 for s in h.sigmas])
    m_f = np.asarray(f.mean)
    m_h = np.asarray(h.mean)
    a = d_f + b_arr.T @ d_h @ b_arr
    b = d_f @ m_f + b_arr.T @ (d_h @ m_h)
    c0 = m_f @ d_f @ m_f + m_h @ d_h @ m_h
    sign, logdet = np.linalg.slogdet(a)
    if sign <= 0:
        raise ValueError("degenerate precision matrix in closed-form integral")
    quad = b @ np.linalg.solve(a, b)
    log_val = (
        math.log(f.amplitude)
        + math.log(h.amplitude)
        + 0.5 * f.dim * math.log(TWO_PI)
        - 0.5 * logdet
        + 0.5 * (quad - c0)
    )
    return math.exp(log_val)
