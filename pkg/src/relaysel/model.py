"""System model for a two-source, N-relay bidirectional AF network.

Two sources exchange symbols through half-duplex variable-gain relays in two
phases; each source removes its own self-interference before detection.  This
module holds the deterministic math only: end-to-end SNR formulas, the min-gain
bound, and the max-min relay-selection rules.  Everything here is a pure
function of its arguments.

Conventions
-----------
* Link matrices are ``(2, N)``: row 0 holds the source-1 links, row 1 the
  source-2 links, one column per relay.
* Sources and relays are indexed 0-based throughout the Python API (the CLI
  reports sources as 1/2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "SnrPolicy",
    "NetworkConfig",
    "ChannelRealization",
    "Modulation",
    "BPSK",
    "SelectionResult",
    "jakes_correlation",
    "max_fd_td",
    "snr_exact",
    "snr_upper",
    "min_snr_bound",
    "select_single",
    "select_multiple",
    "combined_snr",
]

# Largest Doppler-delay product for which the Jakes correlation is still
# nonnegative (first zero of the Bessel J0 divided by 2*pi).
_J0_FIRST_ZERO = 2.404825557695773


class SnrPolicy(enum.Enum):
    """Which end-to-end SNR expression to evaluate on a realization."""

    EXACT = "exact"
    UPPER_BOUND = "upper_bound"


def jakes_correlation(fd_td: float) -> float:
    """Correlation between selection-time and transmission-time gains.

    Under the Jakes Doppler spectrum, a channel observed ``T_d`` seconds apart
    decorrelates as ``J0(2*pi*fd*T_d)``.

    Parameters
    ----------
    fd_td : nonnegative Doppler spread times feedback delay.

    Returns
    -------
    Correlation coefficient in [-0.403, 1]; equals 1 at ``fd_td = 0``.
    """
    if fd_td < 0:
        raise ValueError(f"fd_td must be >= 0, got {fd_td}")
    return float(special.j0(2.0 * math.pi * fd_td))


def max_fd_td() -> float:
    """Largest fd_td with a nonnegative Jakes correlation (about 0.3827)."""
    return _J0_FIRST_ZERO / (2.0 * math.pi)


def _as_link_matrix(value, n_relays: int, name: str) -> tuple[tuple[float, ...], ...]:
    """Broadcast a scalar or validate a (2, N) nested sequence, as floats."""
    if np.isscalar(value):
        row = (float(value),) * n_relays
        return (row, row)
    arr = np.asarray(value, dtype=float)
    if arr.shape != (2, n_relays):
        raise ValueError(f"{name} must be scalar or shape (2, {n_relays}), got {arr.shape}")
    return tuple(tuple(float(x) for x in row) for row in arr)


@dataclass(frozen=True)
class NetworkConfig:
    """Static network description: link statistics and transmit SNRs.

    Attributes
    ----------
    n_relays : number of relays N >= 1.
    sigma2 : per-link channel variances, (2, N) tuples, all > 0.
    rho : per-link selection/transmission correlation, (2, N) tuples in [0, 1].
    psi_s : source transmit SNR ``p_s / sigma_n^2`` > 0.
    psi_r : relay transmit SNR ``p_r / sigma_n^2`` > 0.

    Stored as nested tuples so configs are hashable (term caches key on them).
    Use :meth:`create` for scalar broadcasting and fd_td input.
    """

    n_relays: int
    sigma2: tuple[tuple[float, ...], ...]
    rho: tuple[tuple[float, ...], ...]
    psi_s: float
    psi_r: float

    def __post_init__(self):
        if self.n_relays < 1:
            raise ValueError(f"n_relays must be >= 1, got {self.n_relays}")
        for name in ("sigma2", "rho"):
            mat = getattr(self, name)
            if len(mat) != 2 or any(len(row) != self.n_relays for row in mat):
                raise ValueError(f"{name} must have shape (2, {self.n_relays})")
        if any(v <= 0 for row in self.sigma2 for v in row):
            raise ValueError("sigma2 entries must be strictly positive")
        if any(not (0.0 <= r <= 1.0) for row in self.rho for r in row):
            raise ValueError("rho entries must lie in [0, 1]")
        if not (self.psi_s > 0 and self.psi_r > 0):
            raise ValueError("psi_s and psi_r must be strictly positive")

    @classmethod
    def create(cls, n_relays: int, *, sigma2=1.0, rho=None, fd_td=None,
               psi_s: float, psi_r: float) -> "NetworkConfig":
        """Build a config from scalars or matrices; ``fd_td`` is converted to
        a correlation via :func:`jakes_correlation` (one value for all links).
        """
        if rho is not None and fd_td is not None:
            raise ValueError("give either rho or fd_td, not both")
        if rho is None:
            rho = jakes_correlation(fd_td) if fd_td is not None else 1.0
        return cls(
            n_relays=n_relays,
            sigma2=_as_link_matrix(sigma2, n_relays, "sigma2"),
            rho=_as_link_matrix(rho, n_relays, "rho"),
            psi_s=float(psi_s),
            psi_r=float(psi_r),
        )

    @property
    def psi_h(self) -> float:
        """Harmonic-combination transmit SNR ``psi_s*psi_r/(psi_s+psi_r)``."""
        return self.psi_s * self.psi_r / (self.psi_s + self.psi_r)

    @property
    def sigma2_array(self) -> np.ndarray:
        return np.array(self.sigma2, dtype=float)

    @property
    def rho_array(self) -> np.ndarray:
        return np.array(self.rho, dtype=float)

    @property
    def combined_sigma2(self) -> np.ndarray:
        """Per-relay scale of ``min(|h_1i|^2, |h_2i|^2)``: the variances of the
        two links combined as ``s1*s2/(s1+s2)``."""
        s = self.sigma2_array
        return s[0] * s[1] / (s[0] + s[1])

    @property
    def is_symmetric(self) -> bool:
        """True when all link variances agree and all correlations agree."""
        s = self.sigma2_array
        r = self.rho_array
        return bool(np.all(s == s[0, 0]) and np.all(r == r[0, 0]))


@dataclass(frozen=True)
class ChannelRealization:
    """Paired channel states: ``h`` at transmission time, ``h_hat`` at
    selection time, both complex ``(2, N)``."""

    h: np.ndarray
    h_hat: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h)
        hh = np.asarray(self.h_hat)
        if h.shape != hh.shape or h.ndim != 2 or h.shape[0] != 2:
            raise ValueError(f"h and h_hat must share shape (2, N), got {h.shape} / {hh.shape}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(hh))):
            raise ValueError("channel gains must be finite")

    @property
    def n_relays(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class Modulation:
    """Linear-modulation SER parameterization ``SER = alpha * E[Q(sqrt(beta*snr))]``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    @classmethod
    def bpsk(cls) -> "Modulation":
        return cls(alpha=1.0, beta=2.0)


#: BPSK preset.
BPSK = Modulation(alpha=1.0, beta=2.0)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a selection round: chosen relay indices (0-based, ascending)
    plus the end-to-end SNR seen by each source (combined over relays when
    more than one is selected)."""

    indices: tuple[int, ...]
    gamma_s1: float
    gamma_s2: float

    def __post_init__(self):
        if len(self.indices) == 0 or len(set(self.indices)) != len(self.indices):
            raise ValueError("indices must be nonempty and distinct")
        if min(self.gamma_s1, self.gamma_s2) < 0:
            raise ValueError("SNRs must be nonnegative")


def _gain_pair(h1, h2, source: int):
    """Squared own-link / other-link gains seen from ``source``."""
    g = (abs(np.asarray(h1)) ** 2, abs(np.asarray(h2)) ** 2)
    if source not in (0, 1):
        raise ValueError(f"source must be 0 or 1, got {source}")
    return g[source], g[1 - source]


def snr_exact(h1, h2, cfg: NetworkConfig, source: int = 0):
    """End-to-end received SNR at a source through one variable-gain relay.

    With ``x = |h_own|^2`` and ``y = |h_other|^2``::

        snr = psi_s*psi_r*x*y / ((psi_s+psi_r)*x + psi_s*y + 1)

    Accepts scalar or array gains; zero gains give zero SNR.
    """
    x, y = _gain_pair(h1, h2, source)
    num = cfg.psi_s * cfg.psi_r * x * y
    den = (cfg.psi_s + cfg.psi_r) * x + cfg.psi_s * y + 1.0
    return num / den


def snr_upper(h1, h2, cfg: NetworkConfig, source: int = 0):
    """Upper bound of :func:`snr_exact`: drop the noise ``+1`` and rearrange
    into the two-hop harmonic form::

        snr <= (psi_r*x) * (psi_h*y) / (psi_r*x + psi_h*y)

    Returns 0 when both gains are zero (continuity convention).
    """
    x, y = _gain_pair(h1, h2, source)
    u = cfg.psi_r * x
    v = cfg.psi_h * y
    den = u + v
    scalar = np.isscalar(den)
    den_arr = np.atleast_1d(np.asarray(den, dtype=float))
    num_arr = np.atleast_1d(np.asarray(u * v, dtype=float))
    out = np.divide(num_arr, den_arr, out=np.zeros_like(den_arr), where=den_arr > 0)
    return float(out[0]) if scalar else out.reshape(np.shape(den))


def min_snr_bound(h1, h2, cfg: NetworkConfig):
    """Min-gain bound ``psi_h * min(|h1|^2, |h2|^2)``.

    Bounds ``min(snr_upper(source=0), snr_upper(source=1))`` from above for
    the same channel pair, and is tight at high transmit SNR.
    """
    x = abs(np.asarray(h1)) ** 2
    y = abs(np.asarray(h2)) ** 2
    out = cfg.psi_h * np.minimum(x, y)
    return float(out) if np.isscalar(h1) and np.isscalar(h2) else out


def _min_gain_metric(h_hat: np.ndarray) -> np.ndarray:
    hh = np.asarray(h_hat)
    if hh.ndim != 2 or hh.shape[0] != 2 or hh.shape[1] == 0:
        raise ValueError(f"h_hat must be (2, N) with N >= 1, got {hh.shape}")
    g = np.abs(hh) ** 2
    return np.minimum(g[0], g[1])


def select_single(h_hat: np.ndarray) -> int:
    """Max-min selection: the relay maximizing ``min(|h_hat_1i|^2, |h_hat_2i|^2)``.

    Ties break toward the lowest index.  With perfect selection-time CSI this
    is the instantaneous-SER-optimal rule; with outdated CSI the same rule is
    applied to the stale gains.
    """
    return int(np.argmax(_min_gain_metric(h_hat)))


def select_multiple(h_hat: np.ndarray, k: int) -> tuple[int, ...]:
    """Indices of the ``k`` relays with the largest min-gain metric.

    Returned ascending; rank ties resolve toward lower indices so exactly
    ``k`` relays come back.  ``k = 1`` coincides with :func:`select_single`.
    """
    phi = _min_gain_metric(h_hat)
    n = phi.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    order = np.argsort(-phi, kind="stable")  # stable: ties keep low index first
    return tuple(sorted(int(i) for i in order[:k]))


def combined_snr(realization: ChannelRealization, indices, cfg: NetworkConfig,
                 source: int = 0, policy: SnrPolicy = SnrPolicy.EXACT) -> float:
    """Post-combining SNR at a source over the selected relays.

    The relays forward on orthogonal resources and the source maximal-ratio
    combines, so SNRs add.  With K selected relays the per-relay transmit SNR
    is ``psi_r / K`` (equal split of the total relay power); the split lives
    here rather than in the config so one config drives every K.
    """
    idx = tuple(indices)
    n = realization.n_relays
    if len(idx) == 0 or len(set(idx)) != len(idx) or any(not 0 <= i < n for i in idx):
        raise ValueError(f"indices must be distinct and within [0, {n}), got {idx}")
    k = len(idx)
    split = NetworkConfig(
        n_relays=cfg.n_relays, sigma2=cfg.sigma2, rho=cfg.rho,
        psi_s=cfg.psi_s, psi_r=cfg.psi_r / k,
    ) if k > 1 else cfg
    snr_fn = snr_exact if policy is SnrPolicy.EXACT else snr_upper
    total = 0.0
    for i in idx:
        total += float(snr_fn(realization.h[0, i], realization.h[1, i], split, source))
    return total
