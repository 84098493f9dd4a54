"""Inclusion-exclusion terms behind the selected-relay distributions.

The max-min selection probability expands, by inclusion-exclusion over the
competing relays, into an alternating sum over subsets ``A`` of
``{0..N-1} \\ {i}``.  Every closed-form expression in :mod:`relaysel.analytic`
is a weighted sum over these ``(relay, subset)`` terms; this module
enumerates them once per (config, source) and compiles them into flat arrays.

For a symmetric network (equal variances, equal correlations) the subset sum
collapses to binomial weights over the subset size only, shrinking the term
count from ``N * 2^(N-1)`` to ``N``.

Numerical notes: the ``(-1)^|A|`` signs cancel catastrophically as N grows,
so reductions over these terms use exact (fsum) summation and configs are
capped at N <= 12, beyond which enumeration is refused.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import NetworkConfig

__all__ = [
    "MAX_ENUMERATED_RELAYS",
    "SubsetTerm",
    "enumerate_subset_terms",
    "term_table",
    "symmetric_term_table",
    "subset_sum_residuals",
]

MAX_ENUMERATED_RELAYS = 12


@dataclass(frozen=True)
class SubsetTerm:
    """One inclusion-exclusion term for candidate relay ``i``.

    Attributes
    ----------
    i : candidate relay index.
    t : subset size ``|a_set|``.
    a_set : competing-relay subset, ascending tuple, never containing ``i``.
    sign : ``(-1)^t``.
    inv_rate_sum : ``sum over l in a_set of 1/combined_sigma2[l]``.
    norm : per-source normalization ``1 / (1 + sigma2_other[i] * inv_rate_sum)``.
    """

    i: int
    t: int
    a_set: tuple[int, ...]
    sign: float
    inv_rate_sum: float
    norm: float


def _check_n(n: int):
    if n > MAX_ENUMERATED_RELAYS:
        raise ValueError(
            f"subset enumeration is O(N * 2^N); refusing N={n} > {MAX_ENUMERATED_RELAYS}"
        )


@lru_cache(maxsize=128)
def enumerate_subset_terms(cfg: NetworkConfig, source: int) -> tuple[SubsetTerm, ...]:
    """All ``(i, A)`` terms for ``source``, in deterministic order.

    Ordered by relay index, then subset size, then lexicographic subset.
    """
    _check_n(cfg.n_relays)
    if source not in (0, 1):
        raise ValueError(f"source must be 0 or 1, got {source}")
    n = cfg.n_relays
    other = 1 - source
    sigma2 = cfg.sigma2_array
    inv_combined = 1.0 / cfg.combined_sigma2  # 1/s_1l^2 + 1/s_2l^2 per relay
    out = []
    for i in range(n):
        rest = [l for l in range(n) if l != i]
        for t in range(n):
            for a_set in itertools.combinations(rest, t):
                s = math.fsum(inv_combined[l] for l in a_set)
                out.append(SubsetTerm(
                    i=i, t=t, a_set=a_set, sign=(-1.0) ** t,
                    inv_rate_sum=s,
                    norm=1.0 / (1.0 + sigma2[other, i] * s),
                ))
    return tuple(out)


@dataclass(frozen=True)
class TermTable:
    """Flat per-term arrays for one source, ready for vectorized evaluation.

    ``rate_factor`` rescales the own-link exponential rate for the
    selection-correlated mixture component and ``mix_weight`` weights it;
    both come from conditioning the transmission-time gain on the outdated
    selection-time gain.  ``mix_weight`` is 0 for empty subsets, so the
    correlated component vanishes there.
    """

    sign: np.ndarray         # (-1)^t per term
    norm: np.ndarray         # selection normalization per term
    inv_var_own: np.ndarray  # 1 / sigma2[source, i]
    var_own: np.ndarray      # sigma2[source, i]
    var_other: np.ndarray    # sigma2[1-source, i]
    inv_rate_sum: np.ndarray
    rate_factor: np.ndarray  # multiplies the nominal exponential rate
    mix_weight: np.ndarray   # weight of the rescaled component
    multiplicity: np.ndarray  # term count folded in (1 for the general path)

    def __len__(self) -> int:
        return self.sign.shape[0]


def _mixture_params(rho, var_own, var_other, inv_comb_i, inv_rate_sum):
    """Rate factor and weight of the selection-correlated PDF component."""
    denom = rho**2 / var_own + (1.0 - rho**2) * (inv_comb_i + inv_rate_sum)
    rate_factor = (inv_comb_i + inv_rate_sum) / denom
    mix_weight = (var_other / var_own) * inv_rate_sum / denom
    return rate_factor, mix_weight


@lru_cache(maxsize=128)
def term_table(cfg: NetworkConfig, source: int) -> TermTable:
    """General-path table: one row per enumerated ``(i, A)`` term."""
    terms = enumerate_subset_terms(cfg, source)
    sigma2 = cfg.sigma2_array
    rho = cfg.rho_array
    inv_combined = 1.0 / cfg.combined_sigma2
    other = 1 - source

    n_t = len(terms)
    sign = np.empty(n_t)
    norm = np.empty(n_t)
    var_own = np.empty(n_t)
    var_other = np.empty(n_t)
    inv_rate_sum = np.empty(n_t)
    rate_factor = np.empty(n_t)
    mix_weight = np.empty(n_t)
    for k, term in enumerate(terms):
        sign[k] = term.sign
        norm[k] = term.norm
        var_own[k] = sigma2[source, term.i]
        var_other[k] = sigma2[other, term.i]
        inv_rate_sum[k] = term.inv_rate_sum
        rate_factor[k], mix_weight[k] = _mixture_params(
            rho[source, term.i], var_own[k], var_other[k],
            inv_combined[term.i], term.inv_rate_sum,
        )
    return TermTable(
        sign=sign, norm=norm, inv_var_own=1.0 / var_own, var_own=var_own,
        var_other=var_other, inv_rate_sum=inv_rate_sum,
        rate_factor=rate_factor, mix_weight=mix_weight,
        multiplicity=np.ones(n_t),
    )


@lru_cache(maxsize=128)
def symmetric_term_table(cfg: NetworkConfig, source: int) -> TermTable:
    """Symmetric-path table: one row per subset size, binomial multiplicity.

    Requires equal variances and equal correlations across links; the sum
    over relays contributes a factor N and the sum over subsets of size t a
    factor binomial(N-1, t), while the per-subset inverse-rate sum becomes
    ``t * (2 / sigma2)``.
    """
    if not cfg.is_symmetric:
        raise ValueError("symmetric path requires equal variances and equal correlations")
    if source not in (0, 1):
        raise ValueError(f"source must be 0 or 1, got {source}")
    n = cfg.n_relays
    var = cfg.sigma2[0][0]
    rho = cfg.rho[0][0]
    inv_comb = 2.0 / var

    t = np.arange(n, dtype=float)
    inv_rate_sum = t * inv_comb
    sign = (-1.0) ** t
    norm = 1.0 / (1.0 + var * inv_rate_sum)
    rate_factor, mix_weight = _mixture_params(rho, var, var, inv_comb, inv_rate_sum)
    mult = np.array([n * math.comb(n - 1, int(tt)) for tt in t], dtype=float)
    full = np.full(n, var)
    return TermTable(
        sign=sign, norm=norm, inv_var_own=1.0 / full, var_own=full,
        var_other=full.copy(), inv_rate_sum=inv_rate_sum,
        rate_factor=rate_factor, mix_weight=mix_weight, multiplicity=mult,
    )


def subset_sum_residuals(sigma2_vec) -> tuple[float, np.ndarray]:
    """Self-test of the inclusion-exclusion expansion on a variance vector.

    Two families of identities must hold for any positive scales ``v``:

    * ``sum over i, A of (-1)^|A| / (1 + sum_{l in A} v_i / v_l) == 1``
    * for every k in 0..N-2 the moment sums
      ``sum over A of (-1)^|A| (sum_{l in A} 1/v_l)^k`` vanish
      (ground set ``{0..N-1} \\ {i}``; the empty subset counts with 0^0 = 1).

    Returns ``(r1, r2)``: the absolute defect of the first identity and the
    worst-over-i absolute defects of the k-indexed family (length N-1).
    Near machine zero certifies the enumeration and the summation scheme.
    """
    v = np.asarray(sigma2_vec, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("sigma2_vec must be a 1-D vector with at least one entry")
    if np.any(v <= 0):
        raise ValueError("sigma2_vec entries must be positive")
    n = v.size
    _check_n(n)
    inv = 1.0 / v

    first_parts = []
    moment_parts = [[] for _ in range(max(n - 1, 0))]
    for i in range(n):
        rest = [l for l in range(n) if l != i]
        for t in range(n):
            for a_set in itertools.combinations(rest, t):
                s = math.fsum(inv[l] for l in a_set)
                sign = (-1.0) ** t
                first_parts.append(sign / (1.0 + v[i] * s))
                for k in range(n - 1):
                    # 0.0**0 == 1.0 keeps the empty subset in the k = 0 identity
                    moment_parts[k].append((i, sign * s**k))
    r1 = abs(math.fsum(first_parts) - 1.0)
    r2 = np.zeros(max(n - 1, 0))
    for k in range(n - 1):
        per_i = {}
        for i, val in moment_parts[k]:
            per_i.setdefault(i, []).append(val)
        r2[k] = max(abs(math.fsum(vals)) for vals in per_i.values())
    return r1, r2
