"""Stochastic engine: correlated channel sampling and SER estimation.

Sampling model: each link gain is circularly-symmetric complex Gaussian and
its selection-time copy is ``rho * h + sqrt(1 - rho^2) * eps`` with an
independent same-law ``eps``, so both marginals share the link variance and
the squared-gain pair carries correlation ``rho^2``.

Reproducibility contract: estimates depend only on (config, modulation,
scheme, trial count, seed, stream id, chunk size).  Trials are split into
fixed-size chunks, each driven by an independent substream derived from
``(seed, stream_id, chunk_index)``, and chunk results merge in index order,
so the worker count never changes any output bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from .model import Modulation, NetworkConfig, ChannelRealization, SnrPolicy

__all__ = [
    "RngStream",
    "SerEstimate",
    "DiversityProfile",
    "sample_realization",
    "sample_gain_chunks",
    "sample_selected_snr",
    "simulate_ser",
    "empirical_cdf",
    "empirical_mgf",
    "estimate_diversity",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile
#: symbol-detection estimates with fewer observed errors are flagged unreliable
MIN_RELIABLE_ERRORS = 20
DEFAULT_CHUNK_SIZE = 1 << 18


@dataclass
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Drawing advances internal state; two streams built with the same identity
    generate identical sequences.  Chunked consumers derive independent
    substreams from the identity rather than the mutable state.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            self._gen = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))))
        return self._gen

    def substream_generator(self, chunk_index: int) -> np.random.Generator:
        """Independent generator for one chunk; pure function of identity."""
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, chunk_index))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SerEstimate:
    """Monte-Carlo SER estimate with a 95% normal-approximation half-width.

    ``errors_observed`` counts threshold errors in symbol-detection mode and
    is 0 in averaging mode, where the value is the mean of the Q terms.
    Symbol-detection runs with fewer than ``MIN_RELIABLE_ERRORS`` errors are
    flagged rather than silently reported.
    """

    value: float
    half_width: float
    trials: int
    errors_observed: int = 0
    unreliable: bool = False


@dataclass(frozen=True)
class DiversityProfile:
    """Finite-SNR diversity order along an SNR grid."""

    snr_grid_db: np.ndarray
    d_of_snr: np.ndarray


def _draw_chunk(cfg: NetworkConfig, gen: np.random.Generator, m: int,
                complex_gains: bool = False):
    """Draw ``m`` correlated realizations; squared gains by default.

    One ``standard_normal`` call fixes the draw order: transmission-time
    components first, then the decorrelation innovations.
    """
    n = cfg.n_relays
    z = gen.standard_normal((2, 2, 2, n, m))
    z *= np.sqrt(cfg.sigma2_array / 2.0)[None, None, :, :, None]
    rho = cfg.rho_array[:, :, None]
    mix = np.sqrt(1.0 - rho**2)
    hr, hi = z[0, 0], z[0, 1]
    hhr = rho * hr
    hhr += mix * z[1, 0]
    hhi = rho * hi
    hhi += mix * z[1, 1]
    if complex_gains:
        return hr + 1j * hi, hhr + 1j * hhi
    hsq = hr * hr
    hsq += hi * hi
    hhsq = hhr * hhr
    hhsq += hhi * hhi
    return hsq, hhsq


def sample_realization(cfg: NetworkConfig, rng: RngStream) -> ChannelRealization:
    """One paired draw of transmission-time and selection-time gain matrices."""
    h, h_hat = _draw_chunk(cfg, rng.generator(), 1, complex_gains=True)
    return ChannelRealization(h=h[:, :, 0], h_hat=h_hat[:, :, 0])


def sample_gain_chunks(cfg: NetworkConfig, rng: RngStream, n_samples: int,
                       chunk_size: int = DEFAULT_CHUNK_SIZE):
    """Yield ``(hsq, hhsq)`` squared-gain chunks totalling ``n_samples``."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_chunks = -(-n_samples // chunk_size)
    for c in range(n_chunks):
        m = min(chunk_size, n_samples - c * chunk_size)
        yield _draw_chunk(cfg, rng.substream_generator(c), m)


def _policy_code(policy) -> int:
    policy = SnrPolicy(policy)
    return 0 if policy is SnrPolicy.EXACT else 1


def _kernel_for(cfg: NetworkConfig, kernel=None):
    if kernel is None:
        kernel = _backend.kernel
    cap = getattr(kernel, "MAX_KERNEL_RELAYS", None)
    if cap is not None and cfg.n_relays > cap:
        from . import _kernel_py
        kernel = _kernel_py
    return kernel


def sample_selected_snr(cfg: NetworkConfig, n_samples: int, rng: RngStream, *,
                        n_selected: int = 1,
                        snr_policy=SnrPolicy.UPPER_BOUND,
                        chunk_size: int = DEFAULT_CHUNK_SIZE,
                        kernel=None) -> np.ndarray:
    """Sampled end-to-end SNRs through the selected relay(s), shape (2, n).

    Selection uses the outdated gains, the returned SNR the transmission-time
    gains; defaults to the upper-bound policy whose distribution the analytic
    module describes.
    """
    kernel = _kernel_for(cfg, kernel)
    pol = _policy_code(snr_policy)
    out = np.empty((2, n_samples))
    done = 0
    for hsq, hhsq in sample_gain_chunks(cfg, rng, n_samples, chunk_size):
        m = hsq.shape[2]
        gamma = np.empty((2, m))
        kernel.e2e_snr(hsq, hhsq, cfg.psi_s, cfg.psi_r, n_selected, pol, gamma)
        out[:, done:done + m] = gamma
        done += m
    return out


def _run_chunk(cfg, mod, rng, chunk_index, m, n_selected, pol, mode, kernel):
    gen = rng.substream_generator(chunk_index)
    hsq, hhsq = _draw_chunk(cfg, gen, m)
    znoise = gen.standard_normal((2, m)) if mode == 1 else np.empty((2, 0))
    out_sum = np.zeros(2)
    out_sumsq = np.zeros(2)
    out_err = np.zeros(2, dtype=np.int64)
    kernel.accumulate_ser(hsq, hhsq, cfg.psi_s, cfg.psi_r, n_selected, pol,
                          mod.alpha, mod.beta, mode, znoise,
                          out_sum, out_sumsq, out_err)
    return out_sum, out_sumsq, out_err


def simulate_ser(cfg: NetworkConfig, mod: Modulation, trials: int, rng: RngStream, *,
                 n_selected: int = 1,
                 snr_mode: str = "q_average",
                 snr_policy=SnrPolicy.EXACT,
                 chunk_size: int = DEFAULT_CHUNK_SIZE,
                 workers: int | None = 1,
                 kernel=None) -> tuple[SerEstimate, SerEstimate]:
    """Monte-Carlo average SER for both sources.

    Per trial: draw a realization, select the ``n_selected`` best relays from
    the outdated gains, evaluate the transmission-time combined SNR ``g``
    under ``snr_policy`` (relay power split over the selected relays), then
    either average ``alpha*Q(sqrt(beta*g))`` (``q_average``, low variance) or
    detect one symbol against an equivalent-AWGN threshold and count errors
    (``symbol_detection``, an independent cross-check).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if snr_mode not in ("q_average", "symbol_detection"):
        raise ValueError(f"unknown snr_mode {snr_mode!r}")
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    mode = 0 if snr_mode == "q_average" else 1
    pol = _policy_code(snr_policy)
    kernel = _kernel_for(cfg, kernel)

    n_chunks = -(-trials // chunk_size)
    sizes = [min(chunk_size, trials - c * chunk_size) for c in range(n_chunks)]

    def job(c):
        return _run_chunk(cfg, mod, rng, c, sizes[c], n_selected, pol, mode, kernel)

    n_workers = _backend.resolve_workers(workers)
    if n_workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(job, range(n_chunks)))
    else:
        results = [job(c) for c in range(n_chunks)]

    estimates = []
    for src in (0, 1):
        total = math.fsum(r[0][src] for r in results)
        total_sq = math.fsum(r[1][src] for r in results)
        errors = int(sum(int(r[2][src]) for r in results))
        if mode == 0:
            mean = total / trials
            var = max(total_sq / trials - mean * mean, 0.0)
            estimates.append(SerEstimate(
                value=mean, half_width=_Z95 * math.sqrt(var / trials), trials=trials))
        else:
            p = errors / trials
            hw = _Z95 * mod.alpha * math.sqrt(max(p * (1.0 - p), 0.0) / trials)
            estimates.append(SerEstimate(
                value=mod.alpha * p, half_width=hw, trials=trials,
                errors_observed=errors, unreliable=errors < MIN_RELIABLE_ERRORS))
    return estimates[0], estimates[1]


def empirical_cdf(samples: np.ndarray, z) -> float | np.ndarray:
    """Fraction of sorted ``samples`` at or below ``z`` (right-continuous)."""
    arr = np.asarray(samples)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    out = np.searchsorted(arr, np.asarray(z), side="right") / arr.size
    return float(out) if np.isscalar(z) else out


def empirical_mgf(samples: np.ndarray, s) -> float | np.ndarray:
    """Sample mean of ``exp(s * x)``; requires ``s <= 0`` so it stays finite."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr > 0):
        raise ValueError("empirical_mgf requires s <= 0")
    out = np.exp(np.multiply.outer(s_arr, arr)).mean(axis=-1)
    return float(out) if np.isscalar(s) else out


def estimate_diversity(snr_grid_db, ser_values) -> DiversityProfile:
    """Finite-SNR diversity: negative log-log SER slope along the grid.

    Central differences of ``log10(ser)`` against ``snr_db / 10`` (one-sided
    at the ends).  Needs at least 3 strictly ascending grid points and
    positive SER values.
    """
    snr = np.asarray(snr_grid_db, dtype=float)
    ser = np.asarray(ser_values, dtype=float)
    if snr.ndim != 1 or snr.size < 3 or snr.shape != ser.shape:
        raise ValueError("need >= 3 grid points with matching SER values")
    if np.any(np.diff(snr) <= 0):
        raise ValueError("snr grid must be strictly ascending")
    if np.any(ser <= 0):
        raise ValueError("SER values must be positive")
    d = -np.gradient(np.log10(ser), snr / 10.0)
    return DiversityProfile(snr_grid_db=snr, d_of_snr=d)
