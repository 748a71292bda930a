"""Pure numpy/Python Gibbs kernels: the reference fallback backend.

Semantics shared with the numba backend (which mirrors this file
operation for operation):

* Each sweep samples every token of every document against a snapshot of
  the topic-word counts taken at sweep start, plus the document's own
  in-sweep changes. Per-document deltas are merged after the sweep, so the
  result does not depend on document order.
* Randomness comes from splitmix64 streams keyed by (seed, document key,
  sweep index); see ``_rng``.
"""

from __future__ import annotations

import numpy as np

from ._rng import GOLDEN, MASK64, mix64, next_state, state_to_unit, stream_state


def init_assignments(z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, seed):
    """Assign every token a uniform topic from its document's sweep-0 stream."""
    n_docs = doc_ptr.shape[0] - 1
    for d in range(n_docs):
        state = stream_state(seed, int(doc_keys[d]), 0)
        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            state = next_state(state)
            topic = int(state_to_unit(state) * k)
            z[i] = topic
            n_dk[d, topic] += 1
            n_kw[topic, words[i]] += 1
            n_k[topic] += 1


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
    """One full Gibbs sweep; mutates z and the count arrays in place."""
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
        state = stream_state(seed, int(doc_keys[d]), sweep_idx)

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

            state = next_state(state)
            r = state_to_unit(state) * total
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


def rng_selftest(seed: int, doc_key: int, sweep_idx: int, n: int) -> np.ndarray:
    """First n uniforms of a stream (used to cross-check the numba port)."""
    out = np.empty(n, dtype=np.float64)
    state = stream_state(seed, doc_key, sweep_idx)
    for i in range(n):
        state = next_state(state)
        out[i] = state_to_unit(state)
    return out


__all__ = [
    "init_assignments",
    "sweep",
    "rng_selftest",
    "GOLDEN",
    "MASK64",
    "mix64",
    "next_state",
    "state_to_unit",
    "stream_state",
]
