"""Pure-NumPy Monte-Carlo kernels, the fallback twin of the compiled module.

Same contract as relaysel._kernel: vectorized selection of the top-K min-gain
relays, per-source combined SNR, and SER statistic accumulation over one
chunk of pre-sampled squared gains.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

_SQRT1_2 = 1.0 / np.sqrt(2.0)

MAX_KERNEL_RELAYS = None  # no relay-count limit in the NumPy path


def _gamma_chunk(hsq, hhsq, psi_s, psi_r, n_sel, policy):
    """Per-source combined SNR array (2, n_trials) for one chunk."""
    n = hsq.shape[1]
    if not 1 <= n_sel <= n:
        raise ValueError("n_sel out of range")
    psi_re = psi_r / n_sel
    psi_he = psi_s * psi_re / (psi_s + psi_re)

    phi = np.minimum(hhsq[0], hhsq[1])
    if n_sel == 1:
        sel = np.argmax(phi, axis=0)[None, :]  # argmax keeps the lowest index on ties
    else:
        sel = np.argsort(-phi, axis=0, kind="stable")[:n_sel]

    own0 = np.take_along_axis(hsq[0], sel, axis=0)
    own1 = np.take_along_axis(hsq[1], sel, axis=0)
    out = np.empty((2, hsq.shape[2]))
    for src, (own, oth) in enumerate(((own0, own1), (own1, own0))):
        if policy == 0:
            path = psi_s * psi_re * own * oth / ((psi_s + psi_re) * own + psi_s * oth + 1.0)
        else:
            u = psi_re * own
            v = psi_he * oth
            den = u + v
            path = np.divide(u * v, den, out=np.zeros_like(den), where=den > 0)
        out[src] = path.sum(axis=0)
    return out


def accumulate_ser(hsq, hhsq, psi_s, psi_r, n_sel, policy, alpha, beta, mode,
                   znoise, out_sum, out_sumsq, out_err):
    """See relaysel._kernel.accumulate_ser."""
    gamma = _gamma_chunk(hsq, hhsq, psi_s, psi_r, n_sel, policy)
    root = np.sqrt(beta * gamma)
    if mode == 0:
        q = alpha * 0.5 * _sp.erfc(root * _SQRT1_2)
        out_sum += q.sum(axis=1)
        out_sumsq += (q * q).sum(axis=1)
    elif mode == 1:
        if znoise.shape != root.shape:
            raise ValueError("znoise must be (2, n_trials) in symbol-detection mode")
        out_err += (znoise > root).sum(axis=1)
    else:
        raise ValueError(f"unknown mode {mode}")


def e2e_snr(hsq, hhsq, psi_s, psi_r, n_sel, policy, out_gamma):
    """See relaysel._kernel.e2e_snr."""
    out_gamma[:] = _gamma_chunk(hsq, hhsq, psi_s, psi_r, n_sel, policy)
