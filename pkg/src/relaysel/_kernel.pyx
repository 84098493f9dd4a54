# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Hot Monte-Carlo kernels: per-trial selection, end-to-end SNR and SER
accumulation over pre-sampled squared channel gains.

Mirrors relaysel._kernel_py; the backend module picks whichever imports.
Trials are independent, so everything runs nogil and can be fanned out over
threads by the caller.
"""

from libc.math cimport erfc, sqrt

import numpy as np

DEF MAX_RELAYS = 64

M_SQRT1_2 = 0.7071067811865476  # 1/sqrt(2)
cdef double _SQRT1_2 = M_SQRT1_2

MAX_KERNEL_RELAYS = MAX_RELAYS


cdef inline double _snr_exact(double own, double oth, double psi_s, double psi_r) nogil:
    return psi_s * psi_r * own * oth / ((psi_s + psi_r) * own + psi_s * oth + 1.0)


cdef inline double _snr_upper(double own, double oth, double psi_r, double psi_h) nogil:
    cdef double u = psi_r * own
    cdef double v = psi_h * oth
    if u + v <= 0.0:
        return 0.0
    return u * v / (u + v)


cdef inline int _select_topk(const double[:, :, ::1] hhsq, Py_ssize_t m, int n,
                             int k, int* picked) nogil:
    """Indices of the k largest min-gains, strict > so ties keep low index."""
    cdef double phi[MAX_RELAYS]
    cdef bint used[MAX_RELAYS]
    cdef int i, r, best
    cdef double a, b, bestval
    for i in range(n):
        a = hhsq[0, i, m]
        b = hhsq[1, i, m]
        phi[i] = a if a < b else b
        used[i] = 0
    for r in range(k):
        best = -1
        bestval = -1.0
        for i in range(n):
            if not used[i] and phi[i] > bestval:
                bestval = phi[i]
                best = i
        used[best] = 1
        picked[r] = best
    return 0


def accumulate_ser(const double[:, :, ::1] hsq, const double[:, :, ::1] hhsq,
                   double psi_s, double psi_r, int n_sel, int policy,
                   double alpha, double beta, int mode,
                   const double[:, ::1] znoise,
                   double[::1] out_sum, double[::1] out_sumsq,
                   long long[::1] out_err):
    """Accumulate per-source SER statistics over one chunk of trials.

    policy: 0 exact SNR, 1 upper bound.  mode: 0 averages alpha*Q(sqrt(beta*g));
    1 counts threshold errors against the standard-normal draws in znoise.
    Accumulators are float64 sums / squared sums and error counts per source.
    """
    cdef Py_ssize_t n_trials = hsq.shape[2]
    cdef int n = <int> hsq.shape[1]
    if n > MAX_RELAYS:
        raise ValueError(f"compiled kernel supports at most {MAX_RELAYS} relays")
    if n_sel < 1 or n_sel > n:
        raise ValueError("n_sel out of range")
    if mode == 1 and (znoise.shape[0] != 2 or znoise.shape[1] != n_trials):
        raise ValueError("znoise must be (2, n_trials) in symbol-detection mode")

    cdef double psi_re = psi_r / n_sel
    cdef double psi_he = psi_s * psi_re / (psi_s + psi_re)
    cdef int picked[MAX_RELAYS]
    cdef double s0 = 0.0, s1 = 0.0, ss0 = 0.0, ss1 = 0.0
    cdef long long e0 = 0, e1 = 0
    cdef double g0, g1, q0, q1, root0, root1
    cdef Py_ssize_t m
    cdef int r, i

    with nogil:
        for m in range(n_trials):
            _select_topk(hhsq, m, n, n_sel, picked)
            g0 = 0.0
            g1 = 0.0
            if policy == 0:
                for r in range(n_sel):
                    i = picked[r]
                    g0 += _snr_exact(hsq[0, i, m], hsq[1, i, m], psi_s, psi_re)
                    g1 += _snr_exact(hsq[1, i, m], hsq[0, i, m], psi_s, psi_re)
            else:
                for r in range(n_sel):
                    i = picked[r]
                    g0 += _snr_upper(hsq[0, i, m], hsq[1, i, m], psi_re, psi_he)
                    g1 += _snr_upper(hsq[1, i, m], hsq[0, i, m], psi_re, psi_he)
            root0 = sqrt(beta * g0)
            root1 = sqrt(beta * g1)
            if mode == 0:
                q0 = alpha * 0.5 * erfc(root0 * _SQRT1_2)
                q1 = alpha * 0.5 * erfc(root1 * _SQRT1_2)
                s0 += q0
                ss0 += q0 * q0
                s1 += q1
                ss1 += q1 * q1
            else:
                if znoise[0, m] > root0:
                    e0 += 1
                if znoise[1, m] > root1:
                    e1 += 1

    out_sum[0] += s0
    out_sum[1] += s1
    out_sumsq[0] += ss0
    out_sumsq[1] += ss1
    out_err[0] += e0
    out_err[1] += e1


def e2e_snr(const double[:, :, ::1] hsq, const double[:, :, ::1] hhsq,
            double psi_s, double psi_r, int n_sel, int policy,
            double[:, ::1] out_gamma):
    """Fill out_gamma (2, n_trials) with per-source combined SNRs."""
    cdef Py_ssize_t n_trials = hsq.shape[2]
    cdef int n = <int> hsq.shape[1]
    if n > MAX_RELAYS:
        raise ValueError(f"compiled kernel supports at most {MAX_RELAYS} relays")
    if n_sel < 1 or n_sel > n:
        raise ValueError("n_sel out of range")
    if out_gamma.shape[0] != 2 or out_gamma.shape[1] != n_trials:
        raise ValueError("out_gamma must be (2, n_trials)")

    cdef double psi_re = psi_r / n_sel
    cdef double psi_he = psi_s * psi_re / (psi_s + psi_re)
    cdef int picked[MAX_RELAYS]
    cdef double g0, g1
    cdef Py_ssize_t m
    cdef int r, i

    with nogil:
        for m in range(n_trials):
            _select_topk(hhsq, m, n, n_sel, picked)
            g0 = 0.0
            g1 = 0.0
            if policy == 0:
                for r in range(n_sel):
                    i = picked[r]
                    g0 += _snr_exact(hsq[0, i, m], hsq[1, i, m], psi_s, psi_re)
                    g1 += _snr_exact(hsq[1, i, m], hsq[0, i, m], psi_s, psi_re)
            else:
                for r in range(n_sel):
                    i = picked[r]
                    g0 += _snr_upper(hsq[0, i, m], hsq[1, i, m], psi_re, psi_he)
                    g1 += _snr_upper(hsq[1, i, m], hsq[0, i, m], psi_re, psi_he)
            out_gamma[0, m] = g0
            out_gamma[1, m] = g1
