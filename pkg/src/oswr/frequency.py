"""Frequency-domain convergence model for Robin-coupled heat transfer.

A Schwarz waveform-relaxation sweep contracts the interface error frequency
by frequency.  For two half-domains with diffusion coefficients nu1, nu2 and
Robin transmission coefficients sigma1, sigma2, the contraction rate at the
transformed frequency wt = sqrt(omega/2) is

    rho(wt)^2 = ((sigma1 - sqrt(nu2)*wt)^2 + nu2*wt^2)
              / ((sigma1 + sqrt(nu1)*wt)^2 + nu1*wt^2)
              * ((sigma2 - sqrt(nu1)*wt)^2 + nu1*wt^2)
              / ((sigma2 + sqrt(nu2)*wt)^2 + nu2*wt^2).

This module provides rho itself, the frequency band [wt1, wt2] resolved by a
time grid, the interior stationary frequencies of rho for the three standard
parameter scalings, and the sufficient condition guaranteeing rho < 1.
All values are immutable and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MU_SPLIT",
    "FrequencyBand",
    "DiffusionPair",
    "TransmissionParams",
    "frequency_band_from_grid",
    "rho",
    "max_rho_over_band",
    "interior_critical_frequencies",
    "sufficient_condition_holds",
]

# Above mu = 2 + sqrt(3) the p-derivative of rho for the one-parameter
# scaling gains two extra real stationary points (its quartic factor has a
# nonnegative discriminant).
MU_SPLIT = 2.0 + math.sqrt(3.0)


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class FrequencyBand:
    """Frequency window [wt1, wt2] resolved by a time grid.

    A solve over (0, T) with time step dt carries temporal frequencies
    omega between pi/(2T) and pi/dt.  In the transformed variable
    wt = sqrt(omega/2) the window is [wt1, wt2] with wt1 = sqrt(pi/(4T)),
    wt2 = sqrt(pi/(2 dt)) and ratio k_r = wt2/wt1.
    """

    final_time: float
    time_step: float
    omega_min: float
    omega_max: float
    wt1: float
    wt2: float
    k_r: float

    @classmethod
    def from_time_grid(cls, final_time: float, time_step: float) -> "FrequencyBand":
        T = _require_positive("final_time", final_time)
        dt = _require_positive("time_step", time_step)
        if dt >= 2.0 * T:
            raise ValueError(
                f"time_step={dt} >= 2*final_time={2.0 * T}: frequency band collapses"
            )
        omega_min = math.pi / (2.0 * T)
        omega_max = math.pi / dt
        wt1 = math.sqrt(omega_min / 2.0)
        wt2 = math.sqrt(omega_max / 2.0)
        return cls(T, dt, omega_min, omega_max, wt1, wt2, wt2 / wt1)

    @classmethod
    def from_wt(cls, wt1: float, wt2: float) -> "FrequencyBand":
        """Band with prescribed endpoints; wt1 == wt2 (degenerate) is allowed."""
        w1 = _require_positive("wt1", wt1)
        w2 = _require_positive("wt2", wt2)
        if w2 < w1:
            raise ValueError(f"wt2={w2} < wt1={w1}")
        T = math.pi / (4.0 * w1 * w1)
        dt = math.pi / (2.0 * w2 * w2)
        return cls(T, dt, 2.0 * w1 * w1, 2.0 * w2 * w2, w1, w2, w2 / w1)

    @property
    def degenerate(self) -> bool:
        return self.wt1 == self.wt2

    def geometric_grid(self, n_samples: int) -> np.ndarray:
        """Log-uniform frequency samples over [wt1, wt2], endpoints included."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.degenerate:
            return np.array([self.wt1])
        return np.geomspace(self.wt1, self.wt2, n_samples)


def frequency_band_from_grid(final_time: float, time_step: float) -> FrequencyBand:
    """Frequency band resolved by a solve over (0, final_time) with time_step."""
    return FrequencyBand.from_time_grid(final_time, time_step)


@dataclass(frozen=True)
class DiffusionPair:
    """Diffusion coefficients on the two sides of an interface."""

    nu1: float
    nu2: float

    def __post_init__(self) -> None:
        _require_positive("nu1", self.nu1)
        _require_positive("nu2", self.nu2)

    @property
    def mu(self) -> float:
        """sqrt(nu1/nu2); mu**2 is the coefficient jump across the interface."""
        return math.sqrt(self.nu1 / self.nu2)

    def normalized(self) -> "DiffusionPair":
        """The same pair oriented so that mu >= 1 (swap if nu1 < nu2)."""
        if self.nu1 >= self.nu2:
            return self
        return DiffusionPair(self.nu2, self.nu1)


@dataclass(frozen=True)
class TransmissionParams:
    """Robin transmission coefficients plus their dimensionless generators.

    sigma1 acts on the subdomain left of the interface, sigma2 on the right.
    The three standard scalings tie (sigma1, sigma2) to the dimensionless
    pair (p, q); ``custom`` carries arbitrary positive coefficients.
    """

    sigma1: float
    sigma2: float
    p: float
    q: float
    version: str

    _VERSIONS = ("I", "II", "III", "custom")

    def __post_init__(self) -> None:
        _require_positive("sigma1", self.sigma1)
        _require_positive("sigma2", self.sigma2)
        _require_positive("p", self.p)
        _require_positive("q", self.q)
        if self.version not in self._VERSIONS:
            raise ValueError(f"version must be one of {self._VERSIONS}")

    @property
    def gamma(self) -> float:
        return self.q / self.p

    @classmethod
    def version1(cls, p: float, diff: DiffusionPair) -> "TransmissionParams":
        """One-parameter scaling: both coefficients sqrt(nu_small) * p."""
        scale = math.sqrt(diff.normalized().nu2)
        return cls(scale * p, scale * p, p, p, "I")

    @classmethod
    def version2(cls, q: float, diff: DiffusionPair) -> "TransmissionParams":
        """Cross scaling with a single parameter: sqrt(nu2)*q and sqrt(nu1)*q."""
        return cls(math.sqrt(diff.nu2) * q, math.sqrt(diff.nu1) * q, q, q, "II")

    @classmethod
    def version3(cls, p: float, q: float, diff: DiffusionPair) -> "TransmissionParams":
        """Cross scaling with two parameters: sqrt(nu2)*p and sqrt(nu1)*q."""
        return cls(math.sqrt(diff.nu2) * p, math.sqrt(diff.nu1) * q, p, q, "III")

    @classmethod
    def custom(
        cls, sigma1: float, sigma2: float, diff: DiffusionPair
    ) -> "TransmissionParams":
        p = sigma1 / math.sqrt(diff.nu2)
        q = sigma2 / math.sqrt(diff.nu1)
        return cls(sigma1, sigma2, p, q, "custom")


def _rho_sq(wt, sigma1, sigma2, nu1: float, nu2: float):
    """Squared convergence factor; broadcasts over array arguments."""
    r1 = np.sqrt(nu1)
    r2 = np.sqrt(nu2)
    wsq = wt * wt
    num1 = (sigma1 - r2 * wt) ** 2 + nu2 * wsq
    den1 = (sigma1 + r1 * wt) ** 2 + nu1 * wsq
    num2 = (sigma2 - r1 * wt) ** 2 + nu1 * wsq
    den2 = (sigma2 + r2 * wt) ** 2 + nu2 * wsq
    return (num1 * num2) / (den1 * den2)


def rho(wt, params: TransmissionParams, diff: DiffusionPair):
    """Convergence factor at transformed frequency wt (scalar or array).

    Evaluated through the squared rational form with one final square root,
    which avoids cancellation between the four quadratic terms.
    """
    wt_arr = np.asarray(wt, dtype=float)
    if np.any(wt_arr <= 0.0) or not np.all(np.isfinite(wt_arr)):
        raise ValueError("wt must be positive and finite")
    out = np.sqrt(_rho_sq(wt_arr, params.sigma1, params.sigma2, diff.nu1, diff.nu2))
    if np.isscalar(wt) or wt_arr.ndim == 0:
        return float(out)
    return out


def interior_critical_frequencies(
    params: TransmissionParams, diff: DiffusionPair
) -> list[float]:
    """Stationary frequencies of rho inside (0, inf) for the standard scalings.

    Version I has a stationary point at p/sqrt(2*mu) and, when mu exceeds
    2 + sqrt(3), two more where the quartic factor of the wt-derivative
    vanishes.  Version II has q/sqrt(2), Version III sqrt(p*q/2).  For
    custom coefficients no closed form is available and the list is empty.
    """
    mu = diff.normalized().mu
    if params.version == "I":
        wc = params.p / math.sqrt(2.0 * mu)
        points = [wc]
        if mu > MU_SPLIT:
            delta = math.sqrt((mu * mu - 4.0 * mu + 1.0) * (mu * mu + 1.0))
            base = params.p * params.p / (4.0 * mu * mu)
            points.append(math.sqrt(base * ((mu - 1.0) ** 2 - delta)))
            points.append(math.sqrt(base * ((mu - 1.0) ** 2 + delta)))
        return sorted(points)
    if params.version == "II":
        return [params.q / math.sqrt(2.0)]
    if params.version == "III":
        return [math.sqrt(params.p * params.q / 2.0)]
    return []


def max_rho_over_band(
    params: TransmissionParams,
    diff: DiffusionPair,
    band: FrequencyBand,
    n_samples: int = 512,
) -> tuple[float, float]:
    """Maximum of rho over [wt1, wt2] and the frequency attaining it.

    Scans a geometric grid of n_samples points plus every analytic interior
    stationary frequency that falls inside the band, so for the standard
    scalings the result is exact up to arithmetic.
    """
    if n_samples < 3:
        raise ValueError("n_samples must be >= 3")
    if band.degenerate:
        w = band.wt1
        return w, rho(w, params, diff)
    grid = band.geometric_grid(n_samples)
    crits = [
        w
        for w in interior_critical_frequencies(params, diff)
        if band.wt1 < w < band.wt2
    ]
    if crits:
        grid = np.concatenate([grid, crits])
    values = rho(grid, params, diff)
    i = int(np.argmax(values))
    return float(grid[i]), float(values[i])


def sufficient_condition_holds(
    sigma1: float, sigma2: float, diff: DiffusionPair
) -> bool:
    """Whether (sqrt(nu1)-sqrt(nu2))*(sigma1-sigma2) <= 0.

    When true, rho < 1 on the whole band and the Schwarz iteration is
    guaranteed to contract.  The condition is sufficient only: rho < 1 can
    hold without it.
    """
    s1 = _require_positive("sigma1", sigma1)
    s2 = _require_positive("sigma2", sigma2)
    return (math.sqrt(diff.nu1) - math.sqrt(diff.nu2)) * (s1 - s2) <= 0.0
