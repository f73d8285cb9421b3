"""Carrier-wave diagnostics for combinations of characteristic polynomials.

Away from an exceptional set of angles, one term of the combination
dominates all others in log-modulus and therefore dictates where the real
rotation G changes sign — the "carrier wave".  This module computes the
normalized log-moduli L_j, the exceptional set where domination fails, the
circle subdivision with its base-angle selection, the gap classification
(roomy vs narrow) of a spectrum against the subdivision threshold, and the
all-pairs narrow-pair counter chi_eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import CombinationEnsemble
from .errors import InvalidArgumentError, InvalidConfigError
from .spectra import TWO_PI, EigenangleSpectrum, log_z

__all__ = [
    "CarrierWaveConfig",
    "GapReport",
    "normalized_logs",
    "exceptional_mask",
    "exceptional_set_measure",
    "carrier_wave_index",
    "subdivision",
    "narrow_gap_threshold",
    "gap_report",
    "narrow_gap_count",
]

_THETA0_CANDIDATES = 64


def _log_norm(n_dim: int) -> float:
    if n_dim < 2:
        raise InvalidArgumentError("log-modulus normalization requires N >= 2")
    return math.sqrt(0.5 * math.log(n_dim))


def normalized_logs(ens: CombinationEnsemble, theta: float) -> np.ndarray:
    """L_j(theta) = log|Z_j(theta)| / sqrt(log(N)/2) for each spectrum."""
    norm = _log_norm(ens.dim)
    return np.array([log_z(spec, float(theta)).re for spec in ens.spectra]) / norm


def _re_log_grid(ens: CombinationEnsemble, thetas: np.ndarray) -> np.ndarray:
    """Re log Z_j on a grid, shape (n, m); -inf at eigenangles."""
    thetas = np.asarray(thetas, dtype=np.float64)
    out = np.empty((ens.n_terms, len(thetas)))
    with np.errstate(divide="ignore"):
        for j, spec in enumerate(ens.spectra):
            v = np.mod(spec.angles[:, None] - thetas[None, :], TWO_PI)
            out[j] = np.sum(np.log(np.abs(2.0 * np.sin(0.5 * v))), axis=0)
    return out


def _im_log_grid(spec: EigenangleSpectrum, thetas: np.ndarray) -> np.ndarray:
    """Im log Z on a grid under the per-factor branch convention (finite everywhere)."""
    v = np.mod(spec.angles[:, None] - np.asarray(thetas)[None, :], TWO_PI)
    return np.sum(0.5 * (v - np.pi), axis=0)


def exceptional_mask(ens: CombinationEnsemble, delta: float, thetas: np.ndarray) -> np.ndarray:
    """Pointwise membership of thetas in the exceptional set E_delta.

    theta is exceptional iff some |L_i(theta)| >= 1/delta or some pair
    satisfies |L_i - L_j| <= delta.  Both conditions are monotone in delta,
    so membership is pointwise nondecreasing in delta.
    """
    delta = float(delta)
    if not (0.0 < delta < 0.5):
        raise InvalidArgumentError(f"delta must be in (0, 1/2), got {delta!r}")
    logs = _re_log_grid(ens, thetas) / _log_norm(ens.dim)
    mask = np.any(np.abs(logs) >= 1.0 / delta, axis=0)
    n = ens.n_terms
    for i in range(n):
        for j in range(i + 1, n):
            diff = np.abs(logs[i] - logs[j])
            # nan arises only when both terms are -inf (shared eigenangle);
            # such points are already exceptional via the first condition.
            mask |= np.where(np.isnan(diff), True, diff <= delta)
    return mask


def exceptional_set_measure(ens: CombinationEnsemble, delta: float, grid: int | None = None) -> float:
    """Normalized Lebesgue measure of E_delta, estimated on a uniform grid.

    The grid uses midpoints ((k + 1/2) * 2pi/grid) so that structured
    spectra cannot collide with grid nodes; grid must be >= 64*N.
    """
    if grid is None:
        grid = 64 * ens.dim
    if not isinstance(grid, (int, np.integer)) or grid < 64 * ens.dim:
        raise InvalidArgumentError(f"grid must be an integer >= 64*N = {64 * ens.dim}, got {grid!r}")
    thetas = (np.arange(grid) + 0.5) * (TWO_PI / grid)
    return float(np.mean(exceptional_mask(ens, delta, thetas)))


def carrier_wave_index(ens: CombinationEnsemble, theta: float) -> int:
    """1-based index of the term with the largest Re log Z at theta.

    Ties break to the lowest index.  Raises singular-point if theta sits on
    an eigenangle of any spectrum (where some Re log Z is -inf).
    """
    values = [log_z(spec, float(theta)).re for spec in ens.spectra]
    return int(np.argmax(values)) + 1


@dataclass
class CarrierWaveConfig:
    """Circle subdivision for carrier-wave bookkeeping.

    K subintervals of length Delta = 2pi/K starting at theta0; M = N/K is
    the mean eigenangle count per subinterval.
    """

    N: int
    K: int
    M: float
    delta: float
    Delta: float
    theta0: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise InvalidConfigError(f"N must be a positive integer, got {self.N!r}")
        if not isinstance(self.K, (int, np.integer)) or not (2 <= self.K <= self.N / 2):
            raise InvalidConfigError(f"K must satisfy 2 <= K <= N/2, got K={self.K!r}, N={self.N}")
        if self.M < 2 or abs(self.M - self.N / self.K) > 1e-12:
            raise InvalidConfigError(f"M must equal N/K >= 2, got {self.M!r}")
        if not (0.0 < self.delta < 0.25):
            raise InvalidConfigError(f"delta must be in (0, 1/4), got {self.delta!r}")
        if abs(self.Delta * self.K - TWO_PI) > 1e-12:
            raise InvalidConfigError("Delta * K must equal 2pi")

    def theta_k(self, k: int) -> float:
        """Left endpoint of subinterval k (k may equal K: the wrap point)."""
        return self.theta0 + self.Delta * k


def _default_subdivision_count(n_dim: int) -> int:
    # nominal K ~ N/(log N)^{3/64}, clamped into the invariant box
    nominal = round(n_dim / math.log(n_dim) ** (3.0 / 64.0))
    return max(2, min(int(nominal), n_dim // 2))


def _default_delta(n_dim: int) -> float:
    # nominal delta ~ (log N)^{-3/32}, clamped strictly below 1/4
    return min(math.log(n_dim) ** (-3.0 / 32.0), float(np.nextafter(0.25, 0.0)))


def _select_theta0(ens: CombinationEnsemble, k_div: int, delta: float) -> float:
    """Empirical base-angle selection over 64 candidates in [0, Delta).

    Minimizes the summed endpoint increments of Im log Z over the
    subdivision — sum over spectra and subintervals of
    |Im log Z(theta_k + (1 - sqrt(delta)) Delta) - Im log Z(theta_k + sqrt(delta) Delta)| —
    an empirical surrogate for the averaged form that defines theta0.
    """
    big_delta = TWO_PI / k_div
    candidates = np.arange(_THETA0_CANDIDATES) * (big_delta / _THETA0_CANDIDATES)
    offsets = np.arange(k_div) * big_delta
    lo = math.sqrt(delta) * big_delta
    hi = (1.0 - math.sqrt(delta)) * big_delta
    # thetas[c, k, 2]: all endpoint evaluations for candidate c
    base = candidates[:, None] + offsets[None, :]
    scores = np.zeros(_THETA0_CANDIDATES)
    for spec in ens.spectra:
        im_lo = _im_log_grid(spec, (base + lo).ravel()).reshape(base.shape)
        im_hi = _im_log_grid(spec, (base + hi).ravel()).reshape(base.shape)
        scores += np.sum(np.abs(im_hi - im_lo), axis=1)
    return float(candidates[int(np.argmin(scores))])


def subdivision(
    n_dim: int,
    k_div: int | None = None,
    delta: float | None = None,
    ens: CombinationEnsemble | None = None,
) -> CarrierWaveConfig:
    """Build the circle subdivision, defaulting K and delta from N.

    Nominal schedules K ~ N/(log N)^{3/64} and delta ~ (log N)^{-3/32} are
    clamped into the invariant ranges 2 <= K <= N/2 and delta < 1/4 (at
    practical N the nominal values overshoot both).  With an ensemble
    supplied, theta0 is chosen by the empirical 64-candidate scan;
    otherwise theta0 = 0.
    """
    if not isinstance(n_dim, (int, np.integer)) or n_dim < 4:
        raise InvalidConfigError(f"subdivision requires integer N >= 4, got {n_dim!r}")
    if k_div is None:
        k_div = _default_subdivision_count(n_dim)
    if delta is None:
        delta = _default_delta(n_dim)
    delta = float(delta)
    theta0 = 0.0
    if ens is not None:
        if ens.dim != n_dim:
            raise InvalidConfigError(f"ensemble dim {ens.dim} != N = {n_dim}")
        theta0 = _select_theta0(ens, int(k_div), delta)
    return CarrierWaveConfig(
        N=int(n_dim),
        K=int(k_div),
        M=n_dim / int(k_div),
        delta=delta,
        Delta=TWO_PI / int(k_div),
        theta0=theta0,
    )


@dataclass
class GapReport:
    """Classified circular gaps of one spectrum.

    ``gaps`` holds (left, right, width, classification) for the N circular
    gaps between consecutive eigenangles (including the wraparound gap,
    whose right angle exceeds 2pi); classification is 'narrow' when
    width <= threshold, else 'roomy'.
    """

    gaps: list
    threshold: float

    @property
    def narrow_count(self) -> int:
        return sum(1 for gap in self.gaps if gap[3] == "narrow")

    def check(self) -> "GapReport":
        for left, right, width, cls in self.gaps:
            if width < 0 or abs((right - left) - width) > 1e-12:
                raise InvalidArgumentError("inconsistent gap geometry")
            if cls != ("narrow" if width <= self.threshold else "roomy"):
                raise InvalidArgumentError("gap classification does not match threshold")
        return self


def narrow_gap_threshold(config: CarrierWaveConfig, c_prime: float = 1.0) -> float:
    """c' (M/N) delta^{-2} (log N)^{-1/4} (log M)^{1/2}, the roomy/narrow cut."""
    if c_prime <= 0.0:
        raise InvalidArgumentError(f"c_prime must be positive, got {c_prime!r}")
    return (
        c_prime
        * (config.M / config.N)
        * config.delta**-2
        * math.log(config.N) ** -0.25
        * math.sqrt(math.log(config.M))
    )


def gap_report(spec: EigenangleSpectrum, config: CarrierWaveConfig, c_prime: float = 1.0) -> GapReport:
    """Classify all circular eigenangle gaps against the subdivision threshold."""
    threshold = narrow_gap_threshold(config, c_prime)
    a = spec.angles
    gaps = []
    for i in range(len(a)):
        left = float(a[i])
        right = float(a[i + 1]) if i + 1 < len(a) else float(a[0]) + TWO_PI
        width = right - left
        gaps.append((left, right, width, "narrow" if width <= threshold else "roomy"))
    return GapReport(gaps, threshold)


def narrow_gap_count(spec: EigenangleSpectrum, eps: float) -> int:
    """chi_eps: unordered eigenangle pairs at circular distance <= eps/N."""
    if eps <= 0.0:
        raise InvalidArgumentError(f"eps must be positive, got {eps!r}")
    n = spec.dim
    if n < 2:
        return 0
    a = spec.angles
    d = np.abs(a[:, None] - a[None, :])
    d = np.minimum(d, TWO_PI - d)
    iu = np.triu_indices(n, 1)
    return int(np.sum(d[iu] <= eps / n))
