"""Numba-compiled Gibbs kernels; operation-for-operation mirror of
``_gibbs_numpy`` so both backends give bit-identical results.

The RNG helpers are reimplemented here with explicit uint64 arithmetic
because numba cannot call the Python-int versions in ``_rng``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U = np.uint64
_GOLDEN = _U(0x9E3779B97F4A7C15)
_MIX1 = _U(0xBF58476D1CE4E5B9)
_MIX2 = _U(0x94D049BB133111EB)
_UNIT = 1.1102230246251565e-16  # 2**-53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _U(30))) * _MIX1
    z = (z ^ (z >> _U(27))) * _MIX2
    return z ^ (z >> _U(31))


@njit(cache=True)
def _stream_state(seed, doc_key, sweep_idx):
    s = _mix64(seed + _GOLDEN)
    s = _mix64(s ^ doc_key)
    return _mix64(s ^ sweep_idx)


@njit(cache=True)
def _unit(state):
    return (_mix64(state) >> _U(11)) * _UNIT


@njit(cache=True)
def init_assignments(z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, seed):
    n_docs = doc_ptr.shape[0] - 1
    for d in range(n_docs):
        state = _stream_state(seed, doc_keys[d], _U(0))
        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            state = state + _GOLDEN
            topic = int(_unit(state) * k)
            z[i] = topic
            n_dk[d, topic] += 1
            n_kw[topic, words[i]] += 1
            n_k[topic] += 1


@njit(cache=True)
def sweep(
    z,
    doc_ptr,
    words,
    wcols,
    dwords_ptr,
    dwords,
    n_dk,
    n_kw,
    n_k,
    alpha,
    beta,
    doc_keys,
    seed,
    sweep_idx,
):
    n_docs = doc_ptr.shape[0] - 1
    k = n_dk.shape[1]
    v = n_kw.shape[1]
    vbeta = v * beta

    n_kw0 = n_kw.copy()
    n_k0 = n_k.copy()
    delta_kw = np.zeros_like(n_kw)
    delta_k = np.zeros_like(n_k)
    weights = np.empty(k, dtype=np.float64)

    for d in range(n_docs):
        u_d = dwords_ptr[d + 1] - dwords_ptr[d]
        loc = np.zeros((k, u_d), dtype=np.int64)
        locrow = np.zeros(k, dtype=np.int64)
        state = _stream_state(seed, doc_keys[d], sweep_idx)

        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            w = words[i]
            col = wcols[i]
            old = z[i]
            n_dk[d, old] -= 1
            loc[old, col] -= 1
            locrow[old] -= 1

            total = 0.0
            for t in range(k):
                p = (
                    (n_dk[d, t] + alpha[t])
                    * (n_kw0[t, w] + loc[t, col] + beta)
                    / (n_k0[t] + locrow[t] + vbeta)
                )
                weights[t] = p
                total += p

            state = state + _GOLDEN
            r = _unit(state) * total
            new = k - 1
            cum = 0.0
            for t in range(k):
                cum += weights[t]
                if r < cum:
                    new = t
                    break

            z[i] = new
            n_dk[d, new] += 1
            loc[new, col] += 1
            locrow[new] += 1

        base = dwords_ptr[d]
        for t in range(k):
            for j in range(u_d):
                delta_kw[t, dwords[base + j]] += loc[t, j]
            delta_k[t] += locrow[t]

    n_kw += delta_kw
    n_k += delta_k


@njit(cache=True)
def rng_selftest(seed, doc_key, sweep_idx, n):
    out = np.empty(n, dtype=np.float64)
    state = _stream_state(seed, doc_key, sweep_idx)
    for i in range(n):
        state = state + _GOLDEN
        out[i] = _unit(state)
    return out
