"""Optimized Robin transmission parameters for the three standard scalings.

Each scaling turns the min-max problem

    minimize over positive parameters:  max of rho(wt) for wt in [wt1, wt2]

into a closed form or a scalar root-finding problem:

* Version I  (sigma1 = sigma2 = sqrt(nu_small) * p): equioscillation of the
  band endpoints gives p = sqrt(2*mu*wt1*wt2) for moderate jumps; for large
  jumps the minimizer set splits into cases driven by the band ratio k_r,
  including a pair of minimizers that are the positive roots of a quartic.
* Version II (sigma1 = sqrt(nu2)*q, sigma2 = sqrt(nu1)*q): unique optimum
  q = sqrt(2*wt1*wt2) by endpoint equioscillation.
* Version III (sigma1 = sqrt(nu2)*p, sigma2 = sqrt(nu1)*q): endpoint
  equioscillation forces p*q = 2*wt1*wt2; the remaining equation (equal
  values at wt1 and at the geometric midpoint) is solved by bracketed
  bisection, yielding a three-point equioscillation.

A brute-force grid oracle over the restricted parameter ranges certifies
the analytic optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frequency import (
    MU_SPLIT,
    DiffusionPair,
    FrequencyBand,
    TransmissionParams,
    _rho_sq,
    max_rho_over_band,
    rho,
)

__all__ = [
    "OptimizationError",
    "VersionICaseData",
    "OptimizedResult",
    "version_i_case_data",
    "restriction_interval_v1",
    "quartic_positive_roots",
    "optimize_v1",
    "optimize_v2",
    "optimize_v3",
    "v3_equation_sides",
    "v3_residual",
    "restriction_intervals_v3",
    "brute_force_minmax",
    "optimize",
]

# Bisection controls for the Version III scalar equation.
V3_BRACKET_SHRINK = 1e-9
V3_RESIDUAL_TOL = 1e-14
V3_MAX_BISECTIONS = 200


class OptimizationError(RuntimeError):
    """Raised when a parameter search cannot certify its bracket or converge."""


def _interior_level(mu: float) -> float:
    """Value of rho at its interior hump for the one-parameter scaling.

    Depends on mu only: substituting wt = p/sqrt(2*mu) into rho cancels p.
    """
    a = math.sqrt(2.0 * mu)
    s2 = math.sqrt(2.0)
    sm = math.sqrt(mu)
    return math.sqrt(
        ((a - 1.0) ** 2 + 1.0)
        / ((s2 + sm) ** 2 + mu)
        * ((s2 - sm) ** 2 + mu)
        / ((a + 1.0) ** 2 + 1.0)
    )


def _endpoint_level(mu: float, k_r: float) -> float:
    """rho at wt1 when p sits at the upper end sqrt(2*mu)*wt2 of the center range."""
    a = math.sqrt(2.0 * mu)
    s2 = math.sqrt(2.0)
    sm = math.sqrt(mu)
    return math.sqrt(
        ((a * k_r - 1.0) ** 2 + 1.0)
        / ((s2 * k_r + sm) ** 2 + mu)
        * ((s2 * k_r - sm) ** 2 + mu)
        / ((a * k_r + 1.0) ** 2 + 1.0)
    )


@dataclass(frozen=True)
class VersionICaseData:
    """Case diagnostics for the one-parameter (Version I) min-max problem.

    For mu <= 2 + sqrt(3) only the central parameter range is populated
    (branch ``small_mu``).  Beyond that threshold delta, h1, h2 and the
    three parameter ranges exist, and the band ratio k_r selects the branch:
    ``case_i`` (k_r > h2), ``case_ii`` (h1 < k_r <= h2) or ``case_iii``
    (k_r <= h1).
    """

    mu: float
    k_r: float
    branch: str
    delta: float | None
    h1: float | None
    h2: float | None
    interval_left: tuple[float, float] | None
    interval_center: tuple[float, float]
    interval_right: tuple[float, float] | None
    interior_level: float
    endpoint_level: float


def version_i_case_data(band: FrequencyBand, mu: float) -> VersionICaseData:
    """Case diagnostics of the Version I problem for a normalized jump mu >= 1."""
    if not (mu >= 1.0):
        raise ValueError(f"mu must be >= 1, got {mu}")
    wt1, wt2 = band.wt1, band.wt2
    k_r = band.k_r
    a = math.sqrt(2.0 * mu)
    center = (a * wt1, a * wt2)
    r_c = _interior_level(mu)
    r_ext = _endpoint_level(mu, k_r)
    if mu <= MU_SPLIT:
        return VersionICaseData(
            mu, k_r, "small_mu", None, None, None, None, center, None, r_c, r_ext
        )
    delta = math.sqrt((mu * mu - 4.0 * mu + 1.0) * (mu * mu + 1.0))
    h1 = (
        mu * mu
        + 1.0
        + math.sqrt((mu * mu - 4.0 * mu + 1.0) * (mu * mu + 4.0 * mu + 1.0))
    ) / (4.0 * mu)
    h2 = ((mu - 1.0) ** 2 + delta) / (2.0 * mu)
    if h2 < h1 * (1.0 - 1e-12):
        raise AssertionError(f"h2={h2} < h1={h1} for mu={mu}")
    left = (wt1 * math.sqrt((mu - 1.0) ** 2 - delta), a * wt1)
    right = (a * wt2, wt2 * math.sqrt((mu - 1.0) ** 2 + delta))
    if not (left[0] <= center[0] <= right[0]):
        raise AssertionError("parameter ranges out of order")
    if k_r > h2:
        branch = "case_i"
    elif k_r > h1:
        branch = "case_ii"
    else:
        branch = "case_iii"
    return VersionICaseData(
        mu, k_r, branch, delta, h1, h2, left, center, right, r_c, r_ext
    )


@dataclass(frozen=True)
class OptimizedResult:
    """An optimized transmission parameter set with its certificate data.

    rho_star is the analytic min-max value.  ``uniqueness`` is ``unique``,
    ``interval_of_minimizers`` (flat minimum; params holds a representative)
    or ``two_minimizers`` (params holds the smaller one, ``minimizers``
    both).  Version III results carry the bisection bracket and residual
    history.
    """

    params: TransmissionParams
    rho_star: float
    uniqueness: str
    case_data: VersionICaseData | None = None
    minimizers: tuple[float, ...] = ()
    bracket: tuple[float, float] | None = None
    residual_history: tuple[float, ...] = ()


def restriction_interval_v1(band: FrequencyBand, mu: float) -> tuple[float, float]:
    """Parameter range that must contain every Version I minimizer.

    Outside this range, moving p toward it decreases rho at every frequency
    of the band at once, so the min-max search can be restricted to it.
    """
    if not (mu >= 1.0):
        raise ValueError(f"mu must be >= 1, got {mu}")
    wt1, wt2 = band.wt1, band.wt2
    if mu <= MU_SPLIT:
        a = math.sqrt(2.0 * mu)
        return (a * wt1, a * wt2)
    delta = math.sqrt((mu * mu - 4.0 * mu + 1.0) * (mu * mu + 1.0))
    return (
        wt1 * math.sqrt((mu - 1.0) ** 2 - delta),
        wt2 * math.sqrt((mu - 1.0) ** 2 + delta),
    )


def quartic_positive_roots(band: FrequencyBand, mu: float) -> list[float]:
    """Positive roots of p**4/2 + b*p**2 + c with the endpoint-equality coefficients.

    b = (mu*wt2 - wt1)*(wt2 - mu*wt1) and c = 2*mu**2*wt1**2*wt2**2; the
    equation is solved as a quadratic in p**2 (larger root by the standard
    formula, smaller via the product of roots to avoid cancellation).
    Returns [] when there is no positive root, which happens exactly when
    the band ratio exceeds h2(mu).
    """
    wt1, wt2 = band.wt1, band.wt2
    b = (mu * wt2 - wt1) * (wt2 - mu * wt1)
    c = 2.0 * mu * mu * wt1 * wt1 * wt2 * wt2
    disc = b * b - 2.0 * c
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    y_hi = -b + root
    if y_hi <= 0.0:
        return []
    if disc == 0.0:
        return [math.sqrt(y_hi)]
    y_lo = 2.0 * c / y_hi
    return [math.sqrt(y_lo), math.sqrt(y_hi)]


def optimize_v1(band: FrequencyBand, diff: DiffusionPair) -> OptimizedResult:
    """Best one-parameter scaling sigma1 = sigma2 = sqrt(nu_small) * p.

    The jump is normalized to mu >= 1 internally; since both coefficients
    are equal the result is orientation-independent.
    """
    norm = diff.normalized()
    mu = norm.mu
    wt1, wt2 = band.wt1, band.wt2
    case = version_i_case_data(band, mu)
    p_eq = math.sqrt(2.0 * mu * wt1 * wt2)

    if case.branch == "small_mu":
        params = TransmissionParams.version1(p_eq, diff)
        return OptimizedResult(
            params, rho(wt1, params, diff), "unique", case, (p_eq,)
        )
    if case.branch == "case_i":
        params = TransmissionParams.version1(p_eq, diff)
        rho_end = rho(wt1, params, diff)
        if rho_end >= case.interior_level:
            return OptimizedResult(params, rho_end, "unique", case, (p_eq,))
        return OptimizedResult(
            params, case.interior_level, "interval_of_minimizers", case, (p_eq,)
        )
    if case.branch == "case_ii":
        params = TransmissionParams.version1(p_eq, diff)
        return OptimizedResult(
            params, case.interior_level, "interval_of_minimizers", case, (p_eq,)
        )
    # case_iii: the two positive quartic roots are the minimizers.  Both give
    # the same band maximum; the smaller one is reported as the
    # representative, matching the observed iteration counts of the
    # reference experiments.
    roots = quartic_positive_roots(band, mu)
    if len(roots) != 2:
        raise OptimizationError(
            f"expected two quartic roots for k_r={band.k_r} <= h1={case.h1}, "
            f"got {roots}"
        )
    p_l, p_r = roots
    params = TransmissionParams.version1(p_l, diff)
    return OptimizedResult(
        params, rho(wt1, params, diff), "two_minimizers", case, (p_l, p_r)
    )


def optimize_v2(band: FrequencyBand, diff: DiffusionPair) -> OptimizedResult:
    """Best single-parameter cross scaling: q = sqrt(2*wt1*wt2), always unique."""
    q_star = math.sqrt(2.0 * band.wt1 * band.wt2)
    params = TransmissionParams.version2(q_star, diff)
    return OptimizedResult(params, rho(band.wt1, params, diff), "unique")


def restriction_intervals_v3(
    band: FrequencyBand, mu: float
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Ranges that must contain the Version III minimizers (p first, q second).

    Assumes the normalized orientation mu >= 1, for which p <= q at the
    optimum.
    """
    if not (mu >= 1.0):
        raise ValueError(f"mu must be >= 1, got {mu}")
    wt1, wt2 = band.wt1, band.wt2
    root = math.sqrt(mu * mu + 1.0)
    p_scale = root - (mu - 1.0)
    q_scale = (root + (mu - 1.0)) / mu
    return ((wt1 * p_scale, wt2 * p_scale), (wt1 * q_scale, wt2 * q_scale))


def v3_equation_sides(p, band: FrequencyBand, mu: float):
    """Left and right sides of the Version III scalar equation at p.

    With q tied to p by p*q = 2*wt1*wt2, equality of rho at wt1 and at the
    geometric midpoint sqrt(wt1*wt2) reduces to LHS(p) = RHS(p) with

        LHS = f(wt1) * f(wt2),   RHS = f(sqrt(wt1*wt2))**2,
        f(w) = ((p - w)^2 + w^2) / ((p + mu*w)^2 + (mu*w)^2).

    Broadcasts over array p.
    """
    p = np.asarray(p, dtype=float)
    w1, w2 = band.wt1, band.wt2

    def f(w):
        return ((p - w) ** 2 + w * w) / ((p + mu * w) ** 2 + (mu * w) ** 2)

    lhs = f(w1) * f(w2)
    rhs = f(math.sqrt(w1 * w2)) ** 2
    return lhs, rhs


def v3_residual(p, band: FrequencyBand, mu: float):
    """LHS - RHS of the Version III scalar equation; continuous in p."""
    lhs, rhs = v3_equation_sides(p, band, mu)
    out = lhs - rhs
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(out)
    return out


def _v3_point_solution(wt: float, mu: float) -> tuple[float, float]:
    """Minimizer of rho at a single frequency: both partials vanish."""
    root = math.sqrt(mu * mu + 1.0)
    p = wt * (root - (mu - 1.0))
    q = wt * (root + (mu - 1.0)) / mu
    return p, q


def _v3_curve_max(p, band: FrequencyBand, mu: float):
    """Band maximum of rho along the constraint curve q = 2*wt1*wt2/p.

    On the curve the endpoint values agree, so the maximum is the larger of
    the endpoint value and the interior value at sqrt(p*q/2) = sqrt(wt1*wt2).
    Uses the same normalized form as the scalar equation (a factor mu**2
    relates it to rho**2 and cancels in comparisons).
    """
    lhs, rhs = v3_equation_sides(p, band, mu)
    return np.maximum(lhs, rhs)


def _v3_minimize_endpoint_level(a: float, b: float, band: FrequencyBand, mu: float) -> float:
    """Minimizer of the curve maximum on [a, b] for narrow bands.

    When the band ratio is small the interior hump stays below the endpoint
    level for every p in the bracket (the scalar equation has no root) and
    the best pair sits at the interior minimum of the endpoint level along
    the curve.  Dense scan followed by golden-section refinement.
    """
    ps = np.linspace(a, b, 513)
    vals = _v3_curve_max(ps, band, mu)
    j = int(np.argmin(vals))
    lo = ps[max(j - 1, 0)]
    hi = ps[min(j + 1, ps.size - 1)]
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1 = _v3_curve_max(x1, band, mu)
    f2 = _v3_curve_max(x2, band, mu)
    for _ in range(120):
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = _v3_curve_max(x1, band, mu)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = _v3_curve_max(x2, band, mu)
    return 0.5 * (lo + hi)


def optimize_v3(band: FrequencyBand, diff: DiffusionPair) -> OptimizedResult:
    """Best two-parameter cross scaling via bracketed bisection.

    Normalizes to mu > 1, solves the scalar equation on
    I_p = [wt1*(sqrt(mu^2+1) - (mu-1)), sqrt(2*wt1*wt2)], recovers
    q = 2*wt1*wt2/p, and swaps (p, q) back when the input pair had
    nu1 < nu2.  The scalar equation has a root whenever the band is wide
    enough (k_r of roughly 6 and beyond); for narrower bands the endpoint
    level is minimized along the constraint curve instead.  Raises
    OptimizationError on inconsistent residual signs or a stalled
    bisection.
    """
    norm = diff.normalized()
    swapped = norm is not diff
    mu = norm.mu
    wt1, wt2 = band.wt1, band.wt2

    def build(p_n: float, q_n: float, **extra) -> OptimizedResult:
        if swapped:
            p_n, q_n = q_n, p_n
        params = TransmissionParams.version3(p_n, q_n, diff)
        return OptimizedResult(
            params, rho(wt1, params, diff), "unique", **extra
        )

    if band.degenerate:
        p_n, q_n = _v3_point_solution(wt1, mu)
        return build(p_n, q_n)
    if mu == 1.0:
        # Versions II and III coincide (gamma = 1).
        q_star = math.sqrt(2.0 * wt1 * wt2)
        return build(q_star, q_star)

    p_lo = wt1 * (math.sqrt(mu * mu + 1.0) - (mu - 1.0))
    p_hi = math.sqrt(2.0 * wt1 * wt2)
    # Shrink the left end to stay away from the p = 0 root of the equation.
    a = p_lo + V3_BRACKET_SHRINK * (p_hi - p_lo)
    b = p_hi
    fa = v3_residual(a, band, mu)
    fb = v3_residual(b, band, mu)
    history: list[float] = [fa, fb]
    if fa == 0.0:
        root = a
    elif fb == 0.0:
        root = b
    elif fa * fb > 0.0:
        # Narrow bands (small k_r) leave the interior hump below the
        # endpoint level everywhere in the bracket, so the equation has no
        # root; minimize the endpoint level along the constraint curve
        # instead.  A same-sign residual with an interior sign change is
        # caught by the scan inside the fallback (the minimum would sit at
        # the crossing).
        if fa < 0.0:
            raise OptimizationError(
                f"unexpected residual signs on [{a}, {b}] (mu={mu}): "
                f"f(a)={fa}, f(b)={fb}"
            )
        root = _v3_minimize_endpoint_level(a, b, band, mu)
    else:
        root = None
        for _ in range(V3_MAX_BISECTIONS):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                root = mid  # bracket collapsed to machine precision
                break
            fm = v3_residual(mid, band, mu)
            history.append(fm)
            if abs(fm) <= V3_RESIDUAL_TOL:
                root = mid
                break
            if fa * fm < 0.0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        if root is None:
            raise OptimizationError(
                f"bisection did not converge within {V3_MAX_BISECTIONS} "
                f"iterations (bracket [{a}, {b}])"
            )
    q_root = 2.0 * wt1 * wt2 / root
    return build(
        root,
        q_root,
        bracket=(p_lo + V3_BRACKET_SHRINK * (p_hi - p_lo), p_hi),
        residual_history=tuple(history),
    )


_OPTIMIZERS = {"I": optimize_v1, "II": optimize_v2, "III": optimize_v3}


def optimize(version: str, band: FrequencyBand, diff: DiffusionPair) -> OptimizedResult:
    """Dispatch to the optimizer for ``version`` in {"I", "II", "III"}."""
    try:
        worker = _OPTIMIZERS[version]
    except KeyError:
        raise ValueError(f"unknown version {version!r}") from None
    return worker(band, diff)


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if lo == hi:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def brute_force_minmax(
    band: FrequencyBand,
    diff: DiffusionPair,
    version: str,
    param_grid_size: int = 512,
    freq_grid_size: int = 128,
) -> tuple[TransmissionParams, float]:
    """Grid oracle for the min-max problem of one of the standard scalings.

    Scans the restricted parameter range (a 2D product of ranges for
    Version III, filtered to p <= q in the normalized orientation) and
    minimizes the band maximum of rho.  Serves as an independent check of
    the analytic optimizers; the analytic min-max value can never exceed
    the value at any grid point.
    """
    if param_grid_size < 16 or freq_grid_size < 16:
        raise ValueError("grid sizes must be >= 16")
    norm = diff.normalized()
    swapped = norm is not diff
    mu = norm.mu

    if version in ("I", "II"):
        if version == "I":
            lo, hi = restriction_interval_v1(band, mu)
            make = lambda v: TransmissionParams.version1(v, diff)
        else:
            lo = math.sqrt(2.0) * band.wt1
            hi = math.sqrt(2.0) * band.wt2
            make = lambda v: TransmissionParams.version2(v, diff)
        best_params = None
        best_val = math.inf
        for v in _grid(lo, hi, param_grid_size):
            candidate = make(float(v))
            _, val = max_rho_over_band(candidate, diff, band, freq_grid_size)
            if val < best_val:
                best_val = val
                best_params = candidate
        return best_params, best_val

    if version != "III":
        raise ValueError(f"unknown version {version!r}")

    (p_lo, p_hi), (q_lo, q_hi) = restriction_intervals_v3(band, mu)
    p_grid = _grid(p_lo, p_hi, param_grid_size)
    q_grid = _grid(q_lo, q_hi, param_grid_size)
    freqs = band.geometric_grid(freq_grid_size)
    s_big = math.sqrt(norm.nu1)
    s_small = math.sqrt(norm.nu2)
    n_f = freqs.size
    wts = np.empty((q_grid.size, n_f + 1))
    wts[:, :n_f] = freqs
    best = (math.inf, p_grid[0], q_grid[0])
    for p_v in p_grid:
        # Interior stationary frequency sqrt(p*q/2) per q, clipped to the band.
        wts[:, n_f] = np.clip(np.sqrt(p_v * q_grid / 2.0), band.wt1, band.wt2)
        vals = _rho_sq(wts, s_small * p_v, (s_big * q_grid)[:, None], norm.nu1, norm.nu2)
        maxima = np.sqrt(vals.max(axis=1))
        maxima[q_grid < p_v] = np.inf  # keep the orientation p <= q
        j = int(np.argmin(maxima))
        if maxima[j] < best[0]:
            best = (float(maxima[j]), float(p_v), float(q_grid[j]))
    val, p_best, q_best = best
    if swapped:
        p_best, q_best = q_best, p_best
    return TransmissionParams.version3(p_best, q_best, diff), val
