"""Time the Gibbs sweep under both backends on a synthetic corpus.

Run:  python benchmarks/bench_gibbs.py [--docs 500] [--sweeps 50]
The numba path includes a warm-up fit so JIT compilation is not timed.
"""

from __future__ import annotations

import argparse
import subprocess
import sys

CHILD = """
import os, time
os.environ["TOPICWATCH_BACKEND"] = {backend!r}
from topicwatch.lda.model import LdaConfig, fit
from topicwatch.synthetic import planted_lda_corpus

planted = planted_lda_corpus(v={v}, k={k}, n_docs={docs}, doc_len={doc_len}, seed=0)
cfg_warm = LdaConfig(k={k}, iterations=2, burn_in=0, optimize_interval=0, seed=0)
fit(planted.week, cfg_warm)  # warm-up (JIT compile on the numba path)

cfg = LdaConfig(k={k}, iterations={sweeps}, burn_in=0, optimize_interval=0, seed=0)
start = time.perf_counter()
model = fit(planted.week, cfg)
elapsed = time.perf_counter() - start
print(f"{{elapsed:.6f}} {{int(model.n_k.sum())}}")
"""


def run_backend(backend: str, args) -> tuple[float, int]:
    code = CHILD.format(
        backend=backend,
        v=args.vocab,
        k=args.topics,
        docs=args.docs,
        doc_len=args.doc_len,
        sweeps=args.sweeps,
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    ).stdout.split()
    return float(out[0]), int(out[1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=500)
    parser.add_argument("--doc-len", type=int, default=40)
    parser.add_argument("--vocab", type=int, default=150)
    parser.add_argument("--topics", type=int, default=5)
    parser.add_argument("--sweeps", type=int, default=50)
    args = parser.parse_args()

    tokens = args.docs * args.doc_len
    print(
        f"corpus: {args.docs} docs x {args.doc_len} tokens (={tokens}), "
        f"V={args.vocab}, k={args.topics}, {args.sweeps} sweeps"
    )
    t_numba, total_numba = run_backend("numba", args)
    t_numpy, total_numpy = run_backend("numpy", args)
    assert total_numba == total_numpy  # same corpus, same token count
    rate_nb = args.sweeps * tokens / t_numba
    rate_np = args.sweeps * tokens / t_numpy
    print(f"numba : {t_numba:8.3f}s  ({rate_nb:12.0f} token-updates/s)")
    print(f"numpy : {t_numpy:8.3f}s  ({rate_np:12.0f} token-updates/s)")
    print(f"speedup: {t_numpy / t_numba:.1f}x")


if __name__ == "__main__":
    main()
