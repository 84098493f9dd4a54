"""Closed-form performance analysis of max-min relay selection.

Everything here evaluates the upper-bound (harmonic two-hop) SNR of the relay
chosen from outdated gains.  The chain is:

* :func:`pdf_selected_gain` - density of the transmission-time squared gain
  of the selected relay on one link (exact, by inclusion-exclusion over the
  competing relays and conditioning on the outdated gain).
* :func:`cdf_e2e_snr` - CDF of the end-to-end SNR, combining the two hop
  distributions of the selected relay as if independent.  The max-min rule
  couples the two hops, so beyond N = 1 (or decorrelated selection) this and
  everything built on it is a tight approximation rather than exact; the test
  suite measures the gap against simulation.
* :func:`average_ser` - closed-form average SER for ``alpha*E[Q(sqrt(beta*g))]``
  modulations, obtained from the CDF through a Bessel-moment identity; each
  term pair contributes a 2F1 evaluation.
* :func:`asymptotic_ser` - leading high-SNR behavior, with separate perfect
  and outdated CSI forms (diversity N versus 1).
* :func:`mgf_multi_rs` - high-SNR MGF of the combined SNR when the best K of
  N relays forward, used for diversity (exponent) extraction only.

High-SNR precision: the SER closed form subtracts nearly ``alpha/2``, so when
cancellation eats double precision the evaluation transparently reruns in
mpmath (``precision="auto"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import special as _sp

from .model import Modulation, NetworkConfig
from .special import bessel_k1, gauss_2f1, gaussian_q  # re-exported API
from .terms import (
    TermTable,
    subset_sum_residuals,
    symmetric_term_table,
    term_table,
)

__all__ = [
    "bessel_k1",
    "gauss_2f1",
    "gaussian_q",
    "subset_sum_residuals",
    "ConvergenceError",
    "pdf_selected_gain",
    "cdf_e2e_snr",
    "average_ser",
    "asymptotic_ser",
    "symmetric_simplify",
    "SymmetricPath",
    "mgf_multi_rs",
]


class ConvergenceError(ArithmeticError):
    """A closed-form evaluation failed to produce a trustworthy number."""


def _tables(cfg: NetworkConfig, source: int, path: str) -> tuple[TermTable, TermTable]:
    """Own-side and other-side term tables for ``source``."""
    if path == "auto":
        path = "symmetric" if cfg.is_symmetric else "general"
    if path == "symmetric":
        return symmetric_term_table(cfg, source), symmetric_term_table(cfg, 1 - source)
    if path == "general":
        return term_table(cfg, source), term_table(cfg, 1 - source)
    raise ValueError(f"unknown path {path!r}")


def pdf_selected_gain(z, source: int, cfg: NetworkConfig, *, path: str = "auto"):
    """Density of ``|h_selected|^2`` on the ``source`` link at transmission time.

    A signed mixture of exponentials: per term, the plain own-link component
    plus a rate-rescaled component carrying the selection correlation.
    Nonnegative and normalized; for N = 1 it collapses to the plain
    exponential density of the single link.
    """
    tab, _ = _tables(cfg, source, path)
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz < 0):
        raise ValueError("gain argument must be nonnegative")
    rate = tab.inv_var_own
    coef = tab.multiplicity * tab.sign * tab.norm
    vals = (coef * rate) * np.exp(-np.outer(zz, rate)) + \
           (coef * rate * tab.mix_weight) * np.exp(-np.outer(zz, tab.rate_factor * rate))
    out = np.array([math.fsum(row) for row in vals])
    return float(out[0]) if np.isscalar(z) else out.reshape(np.shape(z))


@dataclass(frozen=True)
class _Atoms:
    """One side of the SNR distribution as a flat list of exponential atoms.

    ``rate`` is the exponential rate of the hop-SNR component; ``cdf_coef``
    and ``ser_coef`` are the coefficients it carries inside the CDF and SER
    reductions (signs, normalizations and multiplicities folded in).
    """

    rate: np.ndarray
    cdf_coef: np.ndarray
    ser_coef: np.ndarray


def _atoms(tab: TermTable, rate_scale: float) -> _Atoms:
    """Compile a term table into atoms for a hop with SNR scale ``1/rate_scale``."""
    base_rate = tab.inv_var_own * rate_scale
    coef = tab.multiplicity * tab.sign * tab.norm
    rates = [base_rate, tab.rate_factor * base_rate]
    cdf = [coef * np.sqrt(base_rate),
           coef * np.sqrt(base_rate) * tab.mix_weight / np.sqrt(tab.rate_factor)]
    ser = [coef * base_rate, coef * base_rate * tab.mix_weight]
    keep = [np.ones(len(tab), dtype=bool), tab.mix_weight != 0.0]
    return _Atoms(
        rate=np.concatenate([r[k] for r, k in zip(rates, keep)]),
        cdf_coef=np.concatenate([c[k] for c, k in zip(cdf, keep)]),
        ser_coef=np.concatenate([c[k] for c, k in zip(ser, keep)]),
    )


def _side_atoms(cfg: NetworkConfig, source: int, path: str) -> tuple[_Atoms, _Atoms]:
    own_tab, oth_tab = _tables(cfg, source, path)
    return _atoms(own_tab, 1.0 / cfg.psi_r), _atoms(oth_tab, 1.0 / cfg.psi_h)


def _zk1(z: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``z * exp(-(a+b) z) * K1(2 z sqrt(a b))`` with the z -> 0 limit built in.

    The small-argument pole of K1 cancels against z; below the underflow
    guard the product equals its limit ``1 / (2 sqrt(a b))`` to double
    precision.
    """
    root = np.sqrt(a * b)
    x = 2.0 * z * root
    limit = 0.5 / root
    tiny = x < 1e-290
    safe = np.where(tiny, 1.0, x)
    return np.where(tiny, limit, z * np.exp(-(a + b) * z) * _sp.k1(safe))


def cdf_e2e_snr(z, source: int, cfg: NetworkConfig, *, path: str = "auto"):
    """CDF of the end-to-end SNR at ``source`` via the selected relay.

    Evaluates the upper-bound SNR law ``u*v/(u+v)`` with the two hop
    variables drawn from their selected-relay marginals.  Exactly 0 at
    ``z = 0`` and increasing to 1.
    """
    own, oth = _side_atoms(cfg, source, path)
    a = own.rate[:, None]
    b = oth.rate[None, :]
    w = 2.0 * own.cdf_coef[:, None] * oth.cdf_coef[None, :]
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz < 0):
        raise ValueError("SNR argument must be nonnegative")
    out = np.empty(zz.shape)
    for m, zprobe in enumerate(zz):
        if zprobe == 0.0:
            out[m] = 0.0
            continue
        out[m] = 1.0 - math.fsum((w * _zk1(zprobe, a, b)).ravel())
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.isscalar(z) else out.reshape(np.shape(z))


# SER reduction constants: each atom pair contributes
#   coef * [(sqrt(a)+sqrt(b))^2 + beta/2]^(-5/2) * 2F1(5/2, 3/2; 2; w)
# with w the ratio of the shifted difference/sum squares; the Bessel moment
# integral fixes the 3*sqrt(2)*pi*alpha*sqrt(beta)/2 prefactor.
_SER_A, _SER_B, _SER_C = 2.5, 1.5, 2.0


def _ser_double_sum(own: _Atoms, oth: _Atoms, beta: float) -> tuple[float, float]:
    """fsum of the atom-pair 2F1 contributions and the sum of magnitudes."""
    sa = np.sqrt(own.rate)[:, None]
    sb = np.sqrt(oth.rate)[None, :]
    coef = own.ser_coef[:, None] * oth.ser_coef[None, :]
    plus = (sa + sb) ** 2 + beta / 2.0
    minus = (sa - sb) ** 2 + beta / 2.0
    vals = coef * plus**-2.5 * _sp.hyp2f1(_SER_A, _SER_B, _SER_C, minus / plus)
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("hypergeometric evaluation produced a non-finite term")
    flat = vals.ravel()
    return math.fsum(flat), float(np.abs(flat).sum())


def _side_atoms_mp(cfg: NetworkConfig, source: int, path: str, rate_scale) -> list:
    """Atoms rebuilt in mpmath from the exact config entries.

    The SER closed form cancels almost completely against ``alpha/2`` at high
    SNR, so even exactly-summed double-precision atoms limit the result to
    about 1e-16 absolute; recomputing the mixture parameters in working
    precision removes that floor.
    """
    if path == "auto":
        path = "symmetric" if cfg.is_symmetric else "general"
    other = 1 - source
    one = mp.mpf(1)
    atoms = []

    def push(sign_mult, norm, inv_var_own, rate_factor, mix_weight):
        base_rate = inv_var_own * rate_scale
        coef = sign_mult * norm
        atoms.append((base_rate, coef * base_rate))
        if mix_weight != 0:
            atoms.append((rate_factor * base_rate, coef * base_rate * mix_weight))

    if path == "symmetric":
        if not cfg.is_symmetric:
            raise ValueError("symmetric path requires equal variances and equal correlations")
        n = cfg.n_relays
        var = mp.mpf(cfg.sigma2[0][0])
        rho = mp.mpf(cfg.rho[0][0])
        inv_comb = 2 / var
        for t in range(n):
            s = t * inv_comb
            denom = rho**2 / var + (one - rho**2) * (inv_comb + s)
            push((-one) ** t * n * math.comb(n - 1, t), one / (one + var * s),
                 one / var, (inv_comb + s) / denom, s * denom**-1)
        return atoms

    from .terms import enumerate_subset_terms

    sigma2 = [[mp.mpf(v) for v in row] for row in cfg.sigma2]
    rho = [mp.mpf(v) for v in cfg.rho[source]]
    inv_comb = [one / sigma2[0][l] + one / sigma2[1][l] for l in range(cfg.n_relays)]
    for term in enumerate_subset_terms(cfg, source):
        i = term.i
        var_own = sigma2[source][i]
        var_other = sigma2[other][i]
        s = mp.fsum(inv_comb[l] for l in term.a_set)
        denom = rho[i] ** 2 / var_own + (one - rho[i] ** 2) * (inv_comb[i] + s)
        push((-one) ** term.t, one / (one + var_other * s), one / var_own,
             (inv_comb[i] + s) / denom, (var_other / var_own) * s / denom)
    return atoms


def _ser_double_sum_mp(own_atoms: list, oth_atoms: list, beta) -> mp.mpf:
    half_beta = mp.mpf(beta) / 2
    total = mp.mpf(0)
    for ra, ca in own_atoms:
        sa = mp.sqrt(ra)
        for rb, cb in oth_atoms:
            sb = mp.sqrt(rb)
            plus = (sa + sb) ** 2 + half_beta
            minus = (sa - sb) ** 2 + half_beta
            total += ca * cb * plus ** mp.mpf(-2.5) \
                * mp.hyp2f1(_SER_A, _SER_B, _SER_C, minus / plus)
    return total

# Auto precision switch: double is trusted while the cancelled result stays
# comfortably above the roundoff floor of the magnitude sum.
_F64_GUARD = 1e-10


def average_ser(cfg: NetworkConfig, mod: Modulation, source: int = 0, *,
                path: str = "auto", precision: str = "auto", mp_dps: int = 50) -> float:
    """Closed-form average SER at ``source`` for the single-selection scheme.

    Lies in ``(0, alpha/2]``; with all correlations 1 it is the perfect-CSI
    SER.  ``precision`` is ``"auto"`` (double, retried in mpmath when
    cancellation dominates), ``"double"``, or ``"mp"``.
    """
    if precision not in ("auto", "double", "mp"):
        raise ValueError(f"unknown precision {precision!r}")
    prefactor = 1.5 * math.sqrt(2.0) * math.pi * mod.alpha * math.sqrt(mod.beta)

    if precision != "mp":
        own, oth = _side_atoms(cfg, source, path)
        total, magnitude = _ser_double_sum(own, oth, mod.beta)
        value = mod.alpha / 2.0 - prefactor * total
        floor = _F64_GUARD * prefactor * magnitude
        if precision == "double" or value > floor:
            if not math.isfinite(value):
                raise ConvergenceError("SER evaluation overflowed in double precision")
            return value

    with mp.workdps(mp_dps):
        own_mp = _side_atoms_mp(cfg, source, path, 1 / mp.mpf(cfg.psi_r))
        oth_mp = _side_atoms_mp(cfg, 1 - source, path, mp.mpf(cfg.psi_s + cfg.psi_r)
                                / (mp.mpf(cfg.psi_s) * mp.mpf(cfg.psi_r)))
        total = _ser_double_sum_mp(own_mp, oth_mp, mod.beta)
        pref = mp.mpf(1.5) * mp.sqrt(2) * mp.pi * mp.mpf(mod.alpha) * mp.sqrt(mp.mpf(mod.beta))
        value = float(mp.mpf(mod.alpha) / 2 - pref * total)
    if not math.isfinite(value) or value <= 0.0:
        raise ConvergenceError(
            f"SER evaluation did not converge at dps={mp_dps}; got {value}")
    return value


def _require_csi(cfg: NetworkConfig, csi: str):
    rho = cfg.rho_array
    if csi == "perfect":
        if not np.all(rho == 1.0):
            raise ValueError("csi='perfect' requires every correlation equal to 1")
    elif csi == "outdated":
        if not np.all(rho < 1.0):
            raise ValueError("csi='outdated' requires every correlation below 1")
    else:
        raise ValueError(f"csi must be 'perfect' or 'outdated', got {csi!r}")


def asymptotic_ser(cfg: NetworkConfig, mod: Modulation, source: int = 0,
                   csi: str = "perfect", *, path: str = "auto") -> float:
    """Leading high-SNR SER term at ``source``.

    ``csi="perfect"`` (all correlations 1) decays with diversity N;
    ``csi="outdated"`` (all correlations below 1) decays with diversity 1.
    Mixed correlation patterns are rejected: the two regimes do not cover
    them.  The ratio to :func:`average_ser` tends to 1 as both transmit SNRs
    grow.
    """
    _require_csi(cfg, csi)
    own_tab, oth_tab = _tables(cfg, source, path)
    n = cfg.n_relays
    mult = own_tab.multiplicity
    a_rate = own_tab.inv_var_own / cfg.psi_r
    b_rate = oth_tab.inv_var_own / cfg.psi_h

    if csi == "perfect":
        # weight^(N-1) with 0.0**0 == 1.0 covering the single-relay case
        w_own = (own_tab.var_own * own_tab.inv_rate_sum) ** (n - 1)
        w_oth = (own_tab.var_other * own_tab.inv_rate_sum) ** (n - 1)
        parts = (-1.0) ** (n + 1) * own_tab.sign * mult * (
            w_own * a_rate**n + w_oth * b_rate**n)
        pref = (mod.alpha / (2.0 * math.sqrt(math.pi))) * (2.0 / mod.beta) ** n \
            * _sp.gamma(0.5 + n) / _sp.gamma(n + 1.0)
        return pref * math.fsum(parts)

    # outdated: both sources' mixture weights enter at the same (i, A) term
    parts = own_tab.sign * mult * (
        (1.0 + own_tab.mix_weight) * own_tab.norm * a_rate
        + (1.0 + oth_tab.mix_weight) * oth_tab.norm * b_rate)
    return mod.alpha / (2.0 * mod.beta) * math.fsum(parts)


@dataclass(frozen=True)
class SymmetricPath:
    """Bound evaluator using the collapsed binomial-weight term structure."""

    cfg: NetworkConfig

    def pdf_selected_gain(self, z, source: int = 0):
        return pdf_selected_gain(z, source, self.cfg, path="symmetric")

    def cdf_e2e_snr(self, z, source: int = 0):
        return cdf_e2e_snr(z, source, self.cfg, path="symmetric")

    def average_ser(self, mod: Modulation, source: int = 0, **kw) -> float:
        return average_ser(self.cfg, mod, source, path="symmetric", **kw)

    def asymptotic_ser(self, mod: Modulation, source: int = 0, csi: str = "perfect") -> float:
        return asymptotic_ser(self.cfg, mod, source, csi, path="symmetric")


def symmetric_simplify(cfg: NetworkConfig) -> SymmetricPath:
    """Evaluator that replaces subset enumeration with binomial weights.

    Only valid for symmetric networks (equal variances, equal correlations);
    asymmetric configs are rejected.  Results agree with the general path to
    full double precision while the term count drops from ``N * 2^(N-1)``
    to ``N`` per side.
    """
    if not cfg.is_symmetric:
        raise ValueError("symmetric_simplify requires equal variances and equal correlations")
    # build eagerly so invalid configs fail here, not at first use
    symmetric_term_table(cfg, 0)
    symmetric_term_table(cfg, 1)
    return SymmetricPath(cfg)


def mgf_multi_rs(s, n_relays: int, k: int, rho: float, psi_h: float) -> float:
    """High-SNR MGF of the combined SNR when the best K of N relays forward.

    Valid for the symmetric network under the min-gain approximation of the
    per-relay SNR.  Treat it as an exponent-extraction device: its log-log
    slope in ``-s`` approaches ``-K``, certifying diversity K, but its
    absolute scale carries a constant-factor convention (at K = N = 1 it
    evaluates to ``4/(-s*psi_h)``, twice the exact exponential-MGF tail
    ``2/(-s*psi_h)``; the ``selftest`` command reports this ratio).

    Requires ``s < 0``; the combined SNR is nonnegative so positive ``s``
    may diverge.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr >= 0):
        raise ValueError("mgf_multi_rs requires s < 0")
    if not 1 <= k <= n_relays:
        raise ValueError(f"k must be in [1, {n_relays}], got {k}")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    if psi_h <= 0:
        raise ValueError("psi_h must be positive")

    out = np.zeros(s_arr.shape)
    n, kk = n_relays, k
    for idx, sv in enumerate(s_arr):
        base = 4.0 / (-sv * psi_h)
        parts = []
        for a in range(0, n - kk + 1):
            for q in range(0, n - kk - a + 1):
                for m in range(0, a + 1):
                    parts.append(
                        base ** (n - a)
                        * math.factorial(n - kk) * (-1.0) ** (q + m)
                        / (math.factorial(n - kk - a - q) * math.factorial(m)
                           * math.factorial(q) * math.factorial(a - m))
                        / (n - a + m - m * rho**2)
                    )
        out[idx] = n * math.comb(n - 1, kk - 1) * math.fsum(parts)
    return float(out[0]) if np.isscalar(s) else out.reshape(np.shape(s))
