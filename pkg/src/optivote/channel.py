"""Stochastic inter-satellite FSO channel.

The channel gain of a node is the product of a geometric path-loss term
h_l = C_FSPL / d^2, with the link distance d drawn from a 3D spherical
shell, and a pointing-loss term h_p drawn from a zero-boresight jitter
power law on (0, a0].  Both samplers use inverse-CDF transforms so a
fixed seed replays bit-identically.  ``lambda_eff`` gives the exact
ensemble mean of the gain; ``lambda_oracle`` recomputes it by adaptive
quadrature as an independent cross-check.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericError, UsageError


def c_fspl_from_wavelength(lambda_opt: float) -> float:
    """Free-space path loss constant (lambda_opt / 4 pi)^2, lambda_opt in meters."""
    return (lambda_opt / (4.0 * math.pi)) ** 2


@dataclass(frozen=True)
class ChannelParams:
    """Static channel description; distances in meters."""

    d_min: float
    d_max: float
    lambda_opt: float = 1550e-9
    a0: float = 0.9
    xi_p: float = 1.5
    sigma_n2: float = 0.1
    c_fspl: float | None = None  # override for unit-scale testing

    def __post_init__(self):
        if not (0 < self.d_min < self.d_max):
            raise UsageError("require 0 < d_min < d_max")
        if not (0 < self.a0 <= 1):
            raise UsageError("require 0 < a0 <= 1")
        if self.xi_p <= 0:
            raise UsageError("require xi_p > 0")
        if self.sigma_n2 < 0:
            raise UsageError("require sigma_n2 >= 0")
        if self.c_fspl is not None and self.c_fspl <= 0:
            raise UsageError("require c_fspl > 0")

    @property
    def fspl_constant(self) -> float:
        if self.c_fspl is not None:
            return self.c_fspl
        return c_fspl_from_wavelength(self.lambda_opt)


@dataclass(frozen=True)
class ChannelDraw:
    """One block-fading realization for a node in one round."""

    distance: float
    h_l: float
    h_p: float
    intensity: float


def sample_distance(params: ChannelParams, rng: np.random.Generator, size=None):
    """Draw link distance(s) from f_D(d) = 3 d^2 / (d_max^3 - d_min^3)."""
    u = rng.random(size)
    lo3, hi3 = params.d_min**3, params.d_max**3
    return (lo3 + u * (hi3 - lo3)) ** (1.0 / 3.0)


def sample_pointing(params: ChannelParams, rng: np.random.Generator, size=None):
    """Draw pointing gain(s) from f_hp(h) = (xi_p^2 / a0^xi_p^2) h^(xi_p^2 - 1)."""
    u = rng.random(size)
    return params.a0 * u ** (1.0 / params.xi_p**2)


def sample_channel(params: ChannelParams, rng: np.random.Generator) -> ChannelDraw:
    """One joint draw; the pair (h_l, h_p) is held fixed within a round."""
    d = float(sample_distance(params, rng))
    h_l = params.fspl_constant / d**2
    h_p = float(sample_pointing(params, rng))
    return ChannelDraw(distance=d, h_l=h_l, h_p=h_p, intensity=h_l * h_p)


def sample_intensities(params: ChannelParams, rng: np.random.Generator, size: int):
    """Vectorized intensity draws (h_l * h_p) for Monte Carlo use."""
    d = sample_distance(params, rng, size)
    h_l = params.fspl_constant / d**2
    h_p = sample_pointing(params, rng, size)
    return h_l * h_p


def geometric_efficiency(params: ChannelParams) -> float:
    """Mean of h_l over the spherical-shell distance distribution."""
    c = params.fspl_constant
    num = 3.0 * c * (params.d_max - params.d_min)
    den = params.d_max**3 - params.d_min**3
    return num / den


def pointing_efficiency(params: ChannelParams) -> float:
    """Mean of h_p under the zero-boresight jitter power law."""
    xi2 = params.xi_p**2
    return params.a0 * xi2 / (xi2 + 1.0)


def lambda_eff(params: ChannelParams) -> float:
    """Closed-form channel efficiency: E[h_l] * E[h_p]."""
    return geometric_efficiency(params) * pointing_efficiency(params)


def lambda_oracle(params: ChannelParams) -> float:
    """Channel efficiency by adaptive quadrature over both densities.

    Independent of ``lambda_eff``; used to verify the closed form.
    """
    c = params.fspl_constant
    den = params.d_max**3 - params.d_min**3

    def hl_integrand(d):
        return (c / d**2) * (3.0 * d**2 / den)

    e_hl, err_hl = integrate.quad(hl_integrand, params.d_min, params.d_max,
                                  epsabs=0.0, epsrel=1e-11)

    xi2 = params.xi_p**2
    coef = xi2 / params.a0**xi2

    def hp_integrand(h):
        return h * coef * h ** (xi2 - 1.0)

    e_hp, err_hp = integrate.quad(hp_integrand, 0.0, params.a0,
                                  epsabs=0.0, epsrel=1e-11)

    for val, err, name in ((e_hl, err_hl, "E[h_l]"), (e_hp, err_hp, "E[h_p]")):
        if not math.isfinite(val) or err > 1e-8 * max(abs(val), 1e-300):
            raise NumericError(f"quadrature for {name} did not converge (err={err})")
    return e_hl * e_hp
