"""Regenerate golden files after an intentional format change.

Run from the repository root:  python tests/data/make_golden.py
The two-account fixture's numbers are verified by hand in
tests/test_graphs.py::TestWorkedExample before trusting the bytes here.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[1]))

from test_graphs import build_two_account_graph  # noqa: E402

from topicwatch.graphs import serialize_graph  # noqa: E402


def main() -> None:
    out = Path(__file__).parent / "graph_two_account_golden.json"
    out.write_text(serialize_graph(build_two_account_graph()), encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
