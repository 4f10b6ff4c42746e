"""Compiled inner loops for the cocycle engine."""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_BLOWUP = 1


@njit(cache=True, nogil=True)
def non_backtracking_fill(first, draws, gen_count):
    """Turn uniform draws on [0, 2g-1) into a reduced word.

    Symbol s < g is generator s, s >= g is the inverse of generator s - g.
    Each draw picks among the 2g - 1 symbols other than the inverse of the
    previous one, preserving their natural order.
    """
    n = draws.shape[0] + 1
    word = np.empty(n, dtype=np.int64)
    word[0] = first
    m = 2 * gen_count
    for t in range(1, n):
        forbidden = (word[t - 1] + gen_count) % m
        u = draws[t - 1]
        word[t] = u if u < forbidden else u + 1
    return word


@njit(cache=True, nogil=True)
def _orthonormalize(frame, logs, accumulate):
    """Modified Gram-Schmidt with one reorthogonalization pass, in place.

    Equivalent to a QR factorization with positive R diagonal; log R_jj is
    added to ``logs`` when ``accumulate``. Returns False on a zero or
    non-finite norm.
    """
    d = frame.shape[0]
    for j in range(d):
        for _ in range(2):
            for k in range(j):
                dot = 0.0
                for i in range(d):
                    dot += frame[i, k] * frame[i, j]
                for i in range(d):
                    frame[i, j] -= dot * frame[i, k]
        nrm = 0.0
        for i in range(d):
            nrm += frame[i, j] * frame[i, j]
        nrm = np.sqrt(nrm)
        if not (nrm > 0.0) or not np.isfinite(nrm):
            return False
        inv = 1.0 / nrm
        for i in range(d):
            frame[i, j] *= inv
        if accumulate:
            logs[j] += np.log(nrm)
    return True


@njit(cache=True, nogil=True)
def qr_walk(mats, word, burn_in, renorm_interval):
    """Push an orthonormal frame through ``mats[word[0]], mats[word[1]], ...``.

    The first ``burn_in`` steps are applied but not accumulated; the frame is
    always renormalized at the end of burn-in and at the end of the word.
    Returns (log growth sums per frame direction, status).
    """
    d = mats.shape[1]
    frame = np.eye(d)
    tmp = np.empty((d, d))
    logs = np.zeros(d)
    n = word.shape[0]
    since = 0
    for t in range(n):
        m = mats[word[t]]
        for i in range(d):
            for j in range(d):
                acc = 0.0
                for k in range(d):
                    acc += m[i, k] * frame[k, j]
                tmp[i, j] = acc
        frame, tmp = tmp, frame
        since += 1
        if since == renorm_interval or t == burn_in - 1 or t == n - 1:
            if not _orthonormalize(frame, logs, t >= burn_in):
                return logs, STATUS_BLOWUP
            since = 0
    return logs, STATUS_OK
