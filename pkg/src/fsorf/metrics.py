"""Closed-form outage and DBPSK bit error rate for the relay chain.

Outage in both gain modes reduces to finite alternating sums over the
chain's binomial structure; the fixed-gain mode additionally carries a
Meijer-G Laplace kernel for the relay cascade.  The bit error rate is
the Laplace-type integral (1/2) int_0^inf e^{-gamma} P_out(gamma) dgamma,
offered two ways: adaptive quadrature of the outage curve, and a closed
multi-sum obtained by expanding the FSO CDF power F^t through its series
form, which turns every term into Gamma(1+H) sigma^{-1-H} minus a
Meijer-G correction.

The expansion bookkeeping: with the CDF series

    F(g) = F0 g^{zeta/2} + sum_{n>=0} E_n g^{(n+1)/2}

the t-th power contributes terms C(t,k1) F0^{t-k1} E_n^{(k1)} g^H where
E^{(k1)} is the k1-fold Cauchy self-convolution of the E coefficients
and H = (n + k1 + zeta (t - k1)) / 2.  The infinite n-sum is truncated
when three consecutive index blocks each contribute less than 1e-12 of
the running total (hard cap configurable); the reported truncation
estimate is the magnitude of those final blocks.
"""

import math
from dataclasses import dataclass

import scipy.integrate as si

from .composition import GainMode, fixed_segment_kernel
from .series import series_coeffs, series_power_coeffs
from .special import ConvergenceError, MeijerParams, gamma_fn, meijer_g

_BLOCK_TOL = 1e-12
_BLOCK_RUN = 3


@dataclass(frozen=True)
class ExpansionTerm:
    """One term of the error-rate multi-sum.

    coefficient already folds in the mode's outer sign, the alternating
    binomial weight, and C(t,k1) F0^{t-k1} E_n^{(k1)}; exponent_h is the
    power of gamma the term carries into the Laplace kernel.
    """

    k: int
    t: int
    u: int
    k1: int
    n: int
    coefficient: float
    exponent_h: float


@dataclass(frozen=True)
class BerResult:
    """Closed-form error-rate value with its series truncation record."""

    value: float
    truncation: float
    n_terms: int
    converged: bool


# ------------------------------------------------------------ Meijer rows

def _snr_cdf_meijer(gamma, params):
    """FSO SNR CDF through its Meijer-G representation.

    The closed-form metrics deliberately evaluate the CDF on this path
    so that comparisons against the channel layer's incomplete-gamma
    form cross-check two different special-function pipelines.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if gamma == 0.0:
        return 0.0
    z2 = params.zeta
    row = MeijerParams(m=2, n=1, a=(1.0, 1.0 + z2), b=(1.0, z2, 0.0))
    return z2 * meijer_g(row, params.c * math.sqrt(gamma))


def _ber_kernel_adaptive(h_exp, sigma, params):
    # int_0^inf e^{-sigma g} g^H (1 - F_FSO(g)) dg in closed form
    z2 = params.zeta
    c = params.c
    a = (-h_exp, 1.0, 0.5, (1.0 + z2) / 2.0, 1.0 + z2 / 2.0)
    b = (0.5, 1.0, z2 / 2.0, (z2 + 1.0) / 2.0, 0.5, 0.0)
    g = meijer_g(MeijerParams(m=4, n=3, a=a, b=b), c * c / (4.0 * sigma))
    return (gamma_fn(1.0 + h_exp) * sigma ** (-1.0 - h_exp)
            - (z2 / (2.0 * math.sqrt(math.pi)))
            * sigma ** (-1.0 - h_exp) * g)


def _ber_kernel_fixed(h_exp, sigma, s, params):
    # int_0^inf e^{-sigma g} g^H (1 - sK(g)) dg with the fixed-gain
    # cascade tail sK folded through its own Meijer-G Laplace transform
    z2 = params.zeta
    c = params.c
    cs = c * c * params.c_gain * s
    pref = (z2 * 2.0 ** (-1.0 - z2) / math.sqrt(math.pi)) * cs ** (z2 / 2.0)
    a = (-h_exp - z2 / 2.0, 1.0 - z2 / 2.0, (1.0 - z2) / 2.0, 0.5, 1.0)
    b = ((1.0 - z2) / 2.0, 1.0 - z2 / 2.0, 1.0 - z2 / 2.0, 0.0, 0.5,
         (1.0 - z2) / 2.0, -z2 / 2.0)
    g = meijer_g(MeijerParams(m=5, n=3, a=a, b=b), cs / (4.0 * sigma))
    return (gamma_fn(1.0 + h_exp) * sigma ** (-1.0 - h_exp)
            - pref * sigma ** (-1.0 - h_exp - z2 / 2.0) * g)


# ----------------------------------------------------------------- outage

def outage_adaptive(topology, params):
    """Closed-form outage probability, adaptive-gain first segment."""
    n_users = topology.n_users
    m_relays = topology.m_relays
    gr = params.gamma_bar_rf
    gth = params.gamma_th
    ff = _snr_cdf_meijer(gth, params)
    total = 1.0
    for k in range(1, n_users + 1):
        for t in range(m_relays):
            for u in range(t + 1):
                om = (math.comb(n_users, k) * math.comb(m_relays - 1, t)
                      * math.comb(t, u) * (-1.0) ** (k + t + u))
                total += (om * math.exp(-(k + u) * gth / gr)
                          * ff ** t * (1.0 - ff))
    return min(max(total, 0.0), 1.0)


def outage_fixed(topology, params):
    """Closed-form outage probability, fixed-gain first segment."""
    n_users = topology.n_users
    m_relays = topology.m_relays
    gr = params.gamma_bar_rf
    gth = params.gamma_th
    if gth == 0.0:
        return 0.0
    ff = _snr_cdf_meijer(gth, params)
    total = 1.0
    for k in range(n_users):
        s = (k + 1.0) / gr
        bracket = 1.0 - fixed_segment_kernel(gth, s, params)
        for t in range(m_relays):
            for u in range(t + 1):
                om = (math.comb(n_users - 1, k) * math.comb(m_relays - 1, t)
                      * math.comb(t, u) * (-1.0) ** (k + t + u)
                      * n_users / (k + 1.0))
                total -= (om * math.exp(-(k + u + 1.0) * gth / gr)
                          * bracket * ff ** t)
    return min(max(total, 0.0), 1.0)


def outage_closed_form(topology, params):
    """Dispatch to the mode's closed form."""
    if topology.first_segment_mode is GainMode.ADAPTIVE:
        return outage_adaptive(topology, params)
    return outage_fixed(topology, params)


# ------------------------------------------------------------- quadrature

def ber_quadrature(outage_curve, epsabs=1e-10):
    """(1/2) int_0^inf e^{-gamma} F(gamma) dgamma by adaptive quadrature.

    The substitution u = e^{-gamma} maps the integral to
    (1/2) int_0^1 F(-ln u) du on a finite interval.  Raises when the
    quadrature error estimate exceeds the requested tolerance.
    """

    def integrand(u):
        if u <= 0.0:
            return 0.0
        if u >= 1.0:
            return 0.0
        return outage_curve(-math.log(u))

    val, err = si.quad(integrand, 0.0, 1.0, epsabs=epsabs,
                       epsrel=1e-9, limit=400)
    if err > max(10.0 * epsabs, 1e-7 * abs(val)):
        raise ConvergenceError(
            f"error-rate quadrature achieved only {err:.2e} absolute error")
    return 0.5 * val


# ------------------------------------------------------------- expansions

def cdf_power_terms(t, coeffs, n_max):
    """Terms (k1, n, coeff, H) with F(g)^t = sum coeff * g^H.

    coeffs is the SeriesCoeffs bundle of the FSO CDF.  The k1 = 0 slot
    appears once (n = 0) as the pure F0^t term.
    """
    f0 = coeffs.f0
    z2 = coeffs.xi_sq
    out = []
    for k1 in range(t + 1):
        p = series_power_coeffs(coeffs.e, k1)
        top = 0 if k1 == 0 else n_max
        for n in range(top + 1):
            e_n = p[n] if n < p.size else 0.0
            if e_n == 0.0:
                continue
            coeff = math.comb(t, k1) * f0 ** (t - k1) * e_n
            h_exp = (n + k1 + z2 * (t - k1)) / 2.0
            out.append((k1, n, coeff, h_exp))
    return out


def expansion_terms(topology, params, n_max=60):
    """Materialized multi-sum terms for the mode's error-rate expansion."""
    coeffs = series_coeffs(params, n_max)
    n_users = topology.n_users
    m_relays = topology.m_relays
    adaptive = topology.first_segment_mode is GainMode.ADAPTIVE
    k_range = range(1, n_users + 1) if adaptive else range(n_users)
    terms = []
    for k in k_range:
        for t in range(m_relays):
            for u in range(t + 1):
                if adaptive:
                    om = (math.comb(n_users, k)
                          * math.comb(m_relays - 1, t) * math.comb(t, u)
                          * (-1.0) ** (k + t + u))
                else:
                    om = -(math.comb(n_users - 1, k)
                           * math.comb(m_relays - 1, t) * math.comb(t, u)
                           * (-1.0) ** (k + t + u) * n_users / (k + 1.0))
                for k1, n, coeff, h_exp in cdf_power_terms(t, coeffs, n_max):
                    terms.append(ExpansionTerm(
                        k=k, t=t, u=u, k1=k1, n=n,
                        coefficient=om * coeff, exponent_h=h_exp))
    return terms


def _ber_closed(topology, params, n_max):
    coeffs = series_coeffs(params, n_max)
    n_users = topology.n_users
    m_relays = topology.m_relays
    gr = params.gamma_bar_rf
    adaptive = topology.first_segment_mode is GainMode.ADAPTIVE
    k_range = range(1, n_users + 1) if adaptive else range(n_users)

    # per-(t, k1) convolution coefficient arrays, shared across blocks
    powers = {k1: series_power_coeffs(coeffs.e, k1)
              for k1 in range(m_relays)}
    kernel_cache = {}

    def kernel(h_exp, k, u):
        if adaptive:
            sigma = 1.0 + (k + u) / gr
            key = (h_exp, sigma)
            if key not in kernel_cache:
                kernel_cache[key] = _ber_kernel_adaptive(h_exp, sigma, params)
        else:
            sigma = 1.0 + (k + u + 1.0) / gr
            s = (k + 1.0) / gr
            key = (h_exp, sigma, s)
            if key not in kernel_cache:
                kernel_cache[key] = _ber_kernel_fixed(h_exp, sigma, s, params)
        return kernel_cache[key]

    total = 1.0
    small_run = 0
    last_blocks = []
    n_used = 0
    converged = False
    for n in range(n_max + 1):
        block = 0.0
        for k in k_range:
            for t in range(m_relays):
                for u in range(t + 1):
                    if adaptive:
                        om = (math.comb(n_users, k)
                              * math.comb(m_relays - 1, t) * math.comb(t, u)
                              * (-1.0) ** (k + t + u))
                    else:
                        om = -(math.comb(n_users - 1, k)
                               * math.comb(m_relays - 1, t)
                               * math.comb(t, u)
                               * (-1.0) ** (k + t + u) * n_users / (k + 1.0))
                    for k1 in range(t + 1):
                        if k1 == 0 and n > 0:
                            continue
                        p = powers[k1]
                        e_n = 1.0 if k1 == 0 else (
                            p[n] if n < p.size else 0.0)
                        if e_n == 0.0:
                            continue
                        coeff = (math.comb(t, k1)
                                 * coeffs.f0 ** (t - k1) * e_n)
                        h_exp = (n + k1 + coeffs.xi_sq * (t - k1)) / 2.0
                        block += om * coeff * kernel(h_exp, k, u)
        total += block
        n_used = n + 1
        last_blocks.append(abs(block))
        if len(last_blocks) > _BLOCK_RUN:
            last_blocks.pop(0)
        if abs(block) < _BLOCK_TOL * max(abs(total), 1e-300):
            small_run += 1
            if small_run >= _BLOCK_RUN:
                converged = True
                break
        else:
            small_run = 0
    truncation = sum(last_blocks)
    value = 0.5 * total
    value = min(max(value, 0.0), 0.5)
    return BerResult(value=value, truncation=0.5 * truncation,
                     n_terms=n_used, converged=converged)


def ber_adaptive_closed(topology, params, n_max=200):
    """Closed-form DBPSK error rate, adaptive-gain first segment."""
    if topology.first_segment_mode is not GainMode.ADAPTIVE:
        raise ValueError("topology mode must be adaptive-gain")
    return _ber_closed(topology, params, n_max)


def ber_fixed_closed(topology, params, n_max=200):
    """Closed-form DBPSK error rate, fixed-gain first segment."""
    if topology.first_segment_mode is not GainMode.FIXED:
        raise ValueError("topology mode must be fixed-gain")
    return _ber_closed(topology, params, n_max)


def ber_closed_form(topology, params, n_max=200):
    """Dispatch to the mode's closed error-rate form."""
    if topology.first_segment_mode is GainMode.ADAPTIVE:
        return ber_adaptive_closed(topology, params, n_max)
    return ber_fixed_closed(topology, params, n_max)
