#!/usr/bin/env python3
"""Walk the six-commit trace fixture end to end and print each stage.

Builds the fixture repository in a temp directory, links its two bug
reports, traces introducers at depth 1 and 3 (watch the second commit appear
only at depth 3), and emits the feature dataset.

Usage:
    python scripts/fig3_demo.py
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from szzkit.features import build_dataset  # noqa: E402
from szzkit.fixtures import build_repo, fig3_reports, fig3_script  # noqa: E402
from szzkit.linker import link_all  # noqa: E402
from szzkit.tracer import TraceConfig, Tracer  # noqa: E402


def main() -> int:
    with tempfile.TemporaryDirectory() as td:
        repo = build_repo(fig3_script(), Path(td) / "fig3")
        commits = repo.list_commits("master")
        ordered = list(reversed(commits))
        label = {c.id: f"commit {i + 1}" for i, c in enumerate(ordered)}

        print("history (oldest first):")
        for c in ordered:
            print(f"  {label[c.id]}: {c.message.splitlines()[0]}")

        reports = fig3_reports()
        links = link_all(reports, commits)
        print("\nfix links:")
        for link in links:
            print(f"  {link.issue_key} -> {label[link.fix_commit]}")

        for depth in (1, 3):
            tracer = Tracer(repo, config=TraceConfig(depth=depth))
            intros = tracer.trace_all(links, reports)
            print(f"\nintroducers at depth {depth}:")
            for b in intros:
                print(f"  {b.issue_key}: {label[b.introducing_commit]}"
                      f" ({b.category}) via {label[b.fix_commit]}")

        vectors = build_dataset(
            repo,
            introducer_ids={b.introducing_commit for b in intros},
            fix_ids={l.fix_commit for l in links},
            commits=commits,
        )
        print("\ndataset labels (bug, fix):")
        for v in vectors:
            print(f"  {label[v.commit]}: ({v.label_bug}, {v.label_fix})")
        repo.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
