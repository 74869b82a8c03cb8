"""Statistical models of the two physical links.

The RF side is Rayleigh fading, so its SNR is exponential with mean
``gamma_bar_rf``.  The FSO side combines Negative Exponential turbulence
(rate ``lam``) with a pointing-error gain bounded by ``a0``; the severity
of pointing error is set by ``xi`` (larger xi, milder misalignment).  The
instantaneous FSO SNR is gamma = gamma_bar_fso * I^2 where I is the product
of the two gains.  Noise variances are absorbed into the mean SNRs, which
fully parameterize both links.

Closed forms used throughout, with zeta = xi^2 and X = c sqrt(gamma),
c = lam / (a0 sqrt(gamma_bar_fso)):

    gain density   f_I(h)   = (zeta lam^zeta / a0^zeta) h^{zeta-1}
                              Gamma(1-zeta, lam h / a0)
    SNR density    f(gamma) = lam W gamma^{zeta/2-1} Gamma(1-zeta, X)
    SNR CDF        F(gamma) = X^zeta Gamma(1-zeta, X) + 1 - e^{-X}

where W = zeta lam^{zeta-1} / (2 a0^zeta gamma_bar_fso^{zeta/2}).  The CDF
expression is the exact integral of the density (the same function has an
equivalent Meijer-G form exercised by the closed-form metrics layer).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sc

from .special import gamma_upper

_XI2_FORBIDDEN = (1.0, 2.0, 3.0)
_XI2_GUARD = 1e-6


def _as_float_array(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LinkParams:
    """Static parameters of one FSO/RF link pair.

    All SNRs are linear (not dB).  Derived constants are exposed as
    properties so they can never go stale.
    """

    gamma_bar_rf: float
    gamma_bar_fso: float
    lam: float
    a0: float
    xi: float
    eta: float = 1.0          # conversion efficiency, absorbed into gamma_bar_fso
    c_gain: float = 1.0       # fixed-gain relay constant
    gamma_th: float = field(default=1.0)

    def __post_init__(self):
        for name in ("gamma_bar_rf", "gamma_bar_fso", "lam", "a0",
                     "xi", "eta", "c_gain", "gamma_th"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")
        if self.a0 > 1.0:
            raise ValueError(f"a0 must lie in (0, 1], got {self.a0}")
        z2 = self.xi * self.xi
        for bad in _XI2_FORBIDDEN:
            if abs(z2 - bad) < _XI2_GUARD:
                raise ValueError(
                    f"xi^2 = {z2} is within {_XI2_GUARD} of {bad}; the gain "
                    "and SNR formulas degenerate there")

    @property
    def zeta(self):
        """xi squared, the exponent that shapes every pointing-error formula."""
        return self.xi * self.xi

    @property
    def w(self):
        """Prefactor of the FSO SNR density family (recomputed on access)."""
        z2 = self.zeta
        return (z2 * self.lam ** (z2 - 1.0)
                / (2.0 * self.a0 ** z2 * self.gamma_bar_fso ** (z2 / 2.0)))

    @property
    def c(self):
        """Scale of the CDF argument: X = c sqrt(gamma)."""
        return self.lam / (self.a0 * math.sqrt(self.gamma_bar_fso))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def a0_from_geometry(aperture_radius, beam_width):
    """Fraction of collected power at zero displacement, erf(v)^2.

    v = sqrt(pi/2) * aperture_radius / beam_width.  Offered as a
    convenience for physically parameterized setups; a0 itself is the
    canonical stored parameter.
    """
    if aperture_radius <= 0 or beam_width <= 0:
        raise ValueError("aperture_radius and beam_width must be positive")
    v = math.sqrt(math.pi / 2.0) * aperture_radius / beam_width
    return float(sc.erf(v)) ** 2


# ------------------------------------------------------------------ RF link

def rayleigh_snr_cdf(gamma, gamma_bar):
    """CDF of the exponential SNR on a Rayleigh-faded link."""
    if gamma_bar <= 0:
        raise ValueError("gamma_bar must be positive")
    g = _as_float_array(gamma, "gamma")
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    out = -np.expm1(-g / gamma_bar)
    return float(out) if np.isscalar(gamma) else out


def rayleigh_snr_pdf(gamma, gamma_bar):
    if gamma_bar <= 0:
        raise ValueError("gamma_bar must be positive")
    g = _as_float_array(gamma, "gamma")
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    out = np.exp(-g / gamma_bar) / gamma_bar
    return float(out) if np.isscalar(gamma) else out


def sample_rf_snr(gamma_bar, rng, size=None):
    """Draw exponential SNR with mean gamma_bar via inverse CDF."""
    u = rng.random(size=size)
    # random() yields [0, 1); use 1-u in (0, 1] so log never sees 0
    return -gamma_bar * np.log1p(-u)


# ----------------------------------------------------------------- FSO link

def ne_pe_joint_pdf(h, params):
    """Density of the composite gain I = h_a * h_p.

    h_a is the turbulence gain, exponential with rate lam; h_p is the
    pointing-error gain on (0, a0].  The upper incomplete gamma carries a
    negative first argument whenever xi^2 > 1.
    """
    z2 = params.zeta
    hv = _as_float_array(h, "h")
    if np.any(hv <= 0):
        raise ValueError("h must be positive")
    x = params.lam * hv / params.a0
    out = (z2 * params.lam ** z2 / params.a0 ** z2
           * hv ** (z2 - 1.0) * gamma_upper(1.0 - z2, x))
    return float(out) if np.isscalar(h) else out


def ne_pe_snr_pdf(gamma, params):
    """Density of the FSO SNR gamma = gamma_bar_fso * I^2."""
    z2 = params.zeta
    g = _as_float_array(gamma, "gamma")
    if np.any(g <= 0):
        raise ValueError("gamma must be positive")
    x = params.c * np.sqrt(g)
    out = (params.lam * params.w * g ** (z2 / 2.0 - 1.0)
           * gamma_upper(1.0 - z2, x))
    return float(out) if np.isscalar(gamma) else out


def ne_pe_snr_cdf(gamma, params):
    """CDF of the FSO SNR; exactly 0 at gamma = 0."""
    z2 = params.zeta
    g = _as_float_array(gamma, "gamma")
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    g = np.atleast_1d(g)
    out = np.zeros_like(g)
    pos = g > 0
    if np.any(pos):
        x = params.c * np.sqrt(g[pos])
        out[pos] = (x ** z2 * gamma_upper(1.0 - z2, x)
                    - np.expm1(-x))
    out = np.clip(out, 0.0, 1.0)
    if np.isscalar(gamma):
        return float(out[0])
    return out.reshape(np.shape(gamma))


def ne_snr_cdf_no_pointing(gamma, params):
    """FSO SNR CDF with the pointing-error gain pinned at a0.

    Then sqrt(gamma / gamma_bar) / a0 is the turbulence gain itself and
    the CDF collapses to 1 - exp(-c sqrt(gamma)).
    """
    g = _as_float_array(gamma, "gamma")
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    out = -np.expm1(-params.c * np.sqrt(g))
    return float(out) if np.isscalar(gamma) else out


def sample_fso_snr(params, rng, size=None, pointing_error=True):
    """Draw FSO SNR as gamma_bar_fso * (h_a h_p)^2.

    h_a is inverse-CDF exponential; h_p is a0 * U^(1/xi^2), the inverse
    CDF of the pointing-error gain law.  With pointing_error False the
    pointing gain is pinned at a0, leaving pure turbulence (the xi -> inf
    limit), which the tests use to isolate the two effects.
    """
    u1 = rng.random(size=size)
    h_a = -np.log1p(-u1) / params.lam
    if pointing_error:
        h_p = params.a0 * rng.random(size=size) ** (1.0 / params.zeta)
    else:
        h_p = params.a0 if size is None else np.full(size, params.a0)
    i = h_a * h_p
    return params.gamma_bar_fso * i * i


def sample_fso_snr_displacement(params, beam_width, rng, size=None):
    """FSO SNR sampler that builds the pointing gain geometrically.

    Radial displacement r comes from two independent Gaussians with
    sigma_s = beam_width / (2 xi); the gain is a0 exp(-2 r^2 / w^2).
    Same law as sample_fso_snr, kept as an independent construction for
    physical validation.
    """
    if beam_width <= 0:
        raise ValueError("beam_width must be positive")
    sigma_s = beam_width / (2.0 * params.xi)
    gx = rng.standard_normal(size=size)
    gy = rng.standard_normal(size=size)
    r2 = sigma_s * sigma_s * (gx * gx + gy * gy)
    h_p = params.a0 * np.exp(-2.0 * r2 / (beam_width * beam_width))
    u1 = rng.random(size=size)
    h_a = -np.log1p(-u1) / params.lam
    i = h_a * h_p
    return params.gamma_bar_fso * i * i
