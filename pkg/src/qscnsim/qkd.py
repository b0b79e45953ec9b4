"""Secure key generation rate of a single QKD link.

Closed-form vacuum+weak decoy-state rate with Chernoff-bound
finite-sample statistics. ``secure_rate`` composes the full chain from
device parameters and fiber length to a key generation capability in
bits/s; everything in here is a pure function of its inputs and is safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class EstimationFailed(Exception):
    """Single-photon estimation is unreliable (channel too lossy or
    statistics too poor); callers map this to a zero key rate."""


@dataclass(frozen=True)
class QkdDeviceParams:
    """Device-level parameters of one QKD transmitter/receiver pair.

    Attributes:
        f_req: pulse repetition rate (Hz).
        q: sifting coefficient in (0, 1].
        mu: signal-state intensity (mean photon number).
        nu: weak decoy intensity, 0 < nu < mu.
        phi: vacuum decoy intensity (must be 0).
        eta_bob: receiver transmittance including detector efficiency.
        e_det: misalignment error probability.
        y0: background (dark-count) rate.
        e0: background error rate (0.5: dark counts carry no signal).
        f_ec: error-correction inefficiency, >= 1.
        n_mu, n_nu, n_phi: pulses sent per intensity state.
        sigma: composite security bound; the per-tail failure
            probability used in the concentration bounds is sigma / 2.
        alpha: fiber attenuation (dB/km).
    """

    f_req: float
    q: float
    mu: float
    nu: float
    phi: float
    eta_bob: float
    e_det: float
    y0: float
    e0: float
    f_ec: float
    n_mu: float
    n_nu: float
    n_phi: float
    sigma: float
    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.nu < self.mu:
            raise ValueError(f"decoy intensities must satisfy 0 < nu < mu, got nu={self.nu}, mu={self.mu}")
        if self.phi != 0.0:
            raise ValueError(f"vacuum intensity must be 0, got {self.phi}")
        if not 0 < self.q <= 1:
            raise ValueError(f"sifting coefficient must be in (0, 1], got {self.q}")
        if self.f_ec < 1:
            raise ValueError(f"error-correction inefficiency must be >= 1, got {self.f_ec}")
        if not 0 < self.eta_bob <= 1:
            raise ValueError(f"receiver transmittance must be in (0, 1], got {self.eta_bob}")
        if not 0 <= self.e_det < 0.5:
            raise ValueError(f"misalignment error must be in [0, 0.5), got {self.e_det}")
        if self.e0 != 0.5:
            raise ValueError(f"background error rate must be 0.5, got {self.e0}")
        if not 0 < self.y0 < 1:
            raise ValueError(f"background rate must be in (0, 1), got {self.y0}")
        if min(self.n_mu, self.n_nu, self.n_phi) <= 0:
            raise ValueError("pulse counts must be positive")
        if not 0 < self.sigma < 2:
            raise ValueError(f"security bound must be in (0, 2), got {self.sigma}")
        if self.f_req <= 0:
            raise ValueError(f"pulse rate must be positive, got {self.f_req}")
        if self.alpha < 0:
            raise ValueError(f"attenuation must be >= 0, got {self.alpha}")

    @property
    def epsilon(self) -> float:
        """Per-tail failure probability of the concentration bounds."""
        return self.sigma / 2.0


@dataclass(frozen=True)
class ObservedStatistics:
    """Overall gain and QBER per intensity state."""

    q_mu: float
    q_nu: float
    q_phi: float
    e_mu: float
    e_nu: float
    e_phi: float


@dataclass(frozen=True)
class ConfidenceBound:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("confidence bounds must be finite")
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @classmethod
    def exact(cls, value: float) -> "ConfidenceBound":
        """Zero-width bound: the infinite-sample (asymptotic) limit."""
        return cls(value, value)


@dataclass(frozen=True)
class FiniteSizeBounds:
    """Chernoff bounds on the observed gains and on the QBERs that enter
    the single-photon estimate."""

    q_mu: ConfidenceBound
    q_nu: ConfidenceBound
    q_phi: ConfidenceBound
    e_mu: ConfidenceBound
    e_nu: ConfidenceBound
    e_phi: ConfidenceBound


@dataclass(frozen=True)
class SecureRateResult:
    """Secret fraction and key generation capability of one link."""

    r_per_pulse: float
    r_k: float
    y1_lower: float
    q1_lower: float
    e1_upper: float


def binary_entropy(x: float) -> float:
    """Binary Shannon information of a probability, H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def channel_transmittance(length_km: float, params: QkdDeviceParams) -> float:
    """Overall transmittance of a fiber link of the given length.

    Receiver transmittance times the fiber loss 10^(-alpha*L/10).
    """
    if length_km < 0:
        raise ValueError(f"fiber length must be >= 0, got {length_km}")
    return params.eta_bob * 10.0 ** (-params.alpha * length_km / 10.0)


def observed_statistics(eta: float, params: QkdDeviceParams) -> ObservedStatistics:
    """Expected gains and QBERs for the signal, decoy and vacuum states
    over a channel of transmittance ``eta``."""
    if not 0 < eta <= 1:
        raise ValueError(f"transmittance must be in (0, 1], got {eta}")

    def gain_and_error(intensity: float) -> tuple[float, float]:
        clicked = -math.expm1(-eta * intensity)  # 1 - e^(-eta x)
        gain = clicked + params.y0
        error = (params.e0 * params.y0 + params.e_det * clicked) / gain
        return gain, error

    q_mu, e_mu = gain_and_error(params.mu)
    q_nu, e_nu = gain_and_error(params.nu)
    return ObservedStatistics(q_mu=q_mu, q_nu=q_nu, q_phi=params.y0,
                              e_mu=e_mu, e_nu=e_nu, e_phi=params.e0)


def chernoff_bounds(rate: float, trials: float, epsilon: float) -> ConfidenceBound:
    """Two-sided Chernoff bound on an observed rate after ``trials``
    Bernoulli trials, each tail failing with probability ``epsilon``.

    For an error rate conditioned on detection, pass the conditioned
    count N*Q as ``trials``.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    lower_log = math.log(epsilon ** -1.5)
    upper_log = math.log(16.0 * epsilon ** -4)
    lower = max(0.0, rate - math.sqrt(2.0 * rate * lower_log / trials))
    upper = rate + math.sqrt(2.0 * rate * upper_log / trials)
    return ConfidenceBound(lower, upper)


def finite_size_bounds(stats: ObservedStatistics, params: QkdDeviceParams) -> FiniteSizeBounds:
    """Chernoff bounds for every observed quantity entering the rate."""
    eps = params.epsilon
    return FiniteSizeBounds(
        q_mu=chernoff_bounds(stats.q_mu, params.n_mu, eps),
        q_nu=chernoff_bounds(stats.q_nu, params.n_nu, eps),
        q_phi=chernoff_bounds(stats.q_phi, params.n_phi, eps),
        e_mu=chernoff_bounds(stats.e_mu, params.n_mu * stats.q_mu, eps),
        e_nu=chernoff_bounds(stats.e_nu, params.n_nu * stats.q_nu, eps),
        e_phi=chernoff_bounds(stats.e_phi, params.n_phi * stats.q_phi, eps),
    )


def estimate_single_photon(
    stats: ObservedStatistics,
    bounds: FiniteSizeBounds,
    params: QkdDeviceParams,
) -> tuple[float, float, float]:
    """Worst-case single-photon yield, gain and error rate.

    Returns ``(y1_lower, q1_lower, e1_upper)``. Raises
    ``EstimationFailed`` when the decoy-state estimate degenerates
    (non-positive single-photon gain or error denominator).
    """
    mu, nu = params.mu, params.nu
    span = mu * nu - nu * nu  # > 0 since nu < mu

    exp_nu = math.exp(nu)
    exp_mu = math.exp(mu)
    nu2_over_mu2 = (nu * nu) / (mu * mu)
    vacuum_weight = (mu * mu - nu * nu) / (mu * mu)

    # Shared decoy bracket; Y1 subtracts the measured background, Q1 its
    # upper confidence bound.
    y1_bracket = (bounds.q_nu.lower * exp_nu
                  - nu2_over_mu2 * bounds.q_mu.upper * exp_mu
                  - vacuum_weight * params.y0)
    q1_bracket = (bounds.q_nu.lower * exp_nu
                  - nu2_over_mu2 * bounds.q_mu.upper * exp_mu
                  - vacuum_weight * bounds.q_phi.upper)

    y1_lower = max(0.0, (mu / span) * y1_bracket)

    if q1_bracket <= 0.0:
        raise EstimationFailed("single-photon gain estimate is non-positive")
    q1_lower = (mu * mu * math.exp(-mu) / span) * q1_bracket

    e1_numerator = (bounds.q_nu.upper * bounds.e_nu.upper * exp_nu
                    - bounds.q_phi.lower * bounds.e_phi.lower)
    e1_upper = (span / (mu * nu)) * e1_numerator / q1_bracket
    e1_upper = min(0.5, max(0.0, e1_upper))

    return y1_lower, q1_lower, e1_upper


def _compose_rate(stats: ObservedStatistics, bounds: FiniteSizeBounds,
                  params: QkdDeviceParams) -> SecureRateResult:
    try:
        y1_lower, q1_lower, e1_upper = estimate_single_photon(stats, bounds, params)
    except EstimationFailed:
        return SecureRateResult(0.0, 0.0, 0.0, 0.0, 0.5)
    # Error-correction leakage is charged at the upper confidence bound
    # of the signal-state QBER (conservative; calibrated against the
    # reference operating point pinned in the golden tests).
    e_mu_pessimistic = min(0.5, bounds.e_mu.upper)
    r_l = (-params.q * stats.q_mu * params.f_ec * binary_entropy(e_mu_pessimistic)
           + params.q * q1_lower * (1.0 - binary_entropy(e1_upper)))
    r_per_pulse = max(0.0, r_l)
    return SecureRateResult(
        r_per_pulse=r_per_pulse,
        r_k=params.f_req * r_per_pulse,
        y1_lower=y1_lower,
        q1_lower=q1_lower,
        e1_upper=e1_upper,
    )


def secure_rate(length_km: float, params: QkdDeviceParams) -> SecureRateResult:
    """Finite-size secure key generation rate over a fiber of the given
    length. A degenerate estimate yields a zero rate, never an error."""
    eta = channel_transmittance(length_km, params)
    if eta == 0.0:  # fiber loss underflowed: nothing arrives
        return SecureRateResult(0.0, 0.0, 0.0, 0.0, 0.5)
    stats = observed_statistics(eta, params)
    return _compose_rate(stats, finite_size_bounds(stats, params), params)


def asymptotic_rate(length_km: float, params: QkdDeviceParams) -> SecureRateResult:
    """Infinite-sample rate: every confidence bound collapsed to its
    point estimate. Reference limit for finite-size consistency checks."""
    eta = channel_transmittance(length_km, params)
    if eta == 0.0:
        return SecureRateResult(0.0, 0.0, 0.0, 0.0, 0.5)
    stats = observed_statistics(eta, params)
    bounds = FiniteSizeBounds(
        q_mu=ConfidenceBound.exact(stats.q_mu),
        q_nu=ConfidenceBound.exact(stats.q_nu),
        q_phi=ConfidenceBound.exact(stats.q_phi),
        e_mu=ConfidenceBound.exact(stats.e_mu),
        e_nu=ConfidenceBound.exact(stats.e_nu),
        e_phi=ConfidenceBound.exact(stats.e_phi),
    )
    return _compose_rate(stats, bounds, params)
