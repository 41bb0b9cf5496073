#!/usr/bin/env python3
"""End-to-end mining run against the Jenkins core repository.

Clones jenkinsci/jenkins (unless --repo points at an existing clone), pulls
resolved core bugs from the public tracker, and runs the full pipeline with
the reference study's parameters (cut-off 2018-02-20 10:34 UTC, depth 3).
Prints the mined proportions next to the reference values:

    commits 26,378 / fixes 2,979 (11.3%) / introducers 954 (3.6%) / both 808

Expect hours of runtime and live-tracker drift; this is a best-effort
reproduction, not a golden test.

Usage:
    python scripts/mine_jenkins.py --workdir /tmp/jenkins-study [--repo PATH]
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from szzkit.config import PipelineConfig  # noqa: E402
from szzkit.cli import cmd_features, cmd_issues, cmd_link, cmd_trace  # noqa: E402
from szzkit.issues import IssueQuery, parse_iso8601  # noqa: E402
from szzkit.linker import load_fix_links  # noqa: E402
from szzkit.tracer import load_introductions  # noqa: E402

JENKINS_GIT = "https://github.com/jenkinsci/jenkins.git"
JENKINS_TRACKER = "https://issues.jenkins.io"
CUTOFF = "2018-02-20T10:34:00Z"

REFERENCE = {"commits": 26_378, "fixes": 2_979, "bugs": 954, "both": 808}


def run_study(workdir: Path, repo_path: Path | None = None,
              workers: int = 4) -> dict:
    workdir.mkdir(parents=True, exist_ok=True)
    if repo_path is None:
        repo_path = workdir / "jenkins"
        if not repo_path.exists():
            print(f"cloning {JENKINS_GIT} ...", flush=True)
            subprocess.run(["git", "clone", "--quiet", JENKINS_GIT, str(repo_path)],
                           check=True)
    config = PipelineConfig(
        repo_path=str(repo_path),
        branch="master",
        cutoff=CUTOFF,
        tracker_url=JENKINS_TRACKER,
        output_dir=str(workdir / "out"),
        worker_count=workers,
        query=IssueQuery(project="JENKINS", component="core",
                         created_before=parse_iso8601(CUTOFF)),
    )
    cmd_issues(config)
    cmd_link(config)
    cmd_trace(config)
    cmd_features(config)

    out = workdir / "out"
    links = load_fix_links(out / "fix_links.json")
    intros = load_introductions(out / "introducers.json")
    with open(out / "dataset.csv", encoding="utf-8") as fh:
        commits = sum(1 for _ in fh) - 1
    fixes = len({l.fix_commit for l in links})
    bugs = len({b.introducing_commit for b in intros})
    both = len({b.introducing_commit for b in intros}
               & {l.fix_commit for l in links})
    stats = {
        "commits": commits,
        "fixes": fixes,
        "bugs": bugs,
        "both": both,
        "fix_pct": 100.0 * fixes / commits,
        "bug_pct": 100.0 * bugs / commits,
    }
    print(f"\nmined:     {commits} commits / {fixes} fixes "
          f"({stats['fix_pct']:.1f}%) / {bugs} introducers "
          f"({stats['bug_pct']:.1f}%) / {both} both")
    print(f"reference: {REFERENCE['commits']} commits / {REFERENCE['fixes']} fixes "
          f"(11.3%) / {REFERENCE['bugs']} introducers (3.6%) / {REFERENCE['both']} both")
    return stats


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", type=Path, required=True)
    parser.add_argument("--repo", type=Path, default=None,
                        help="existing Jenkins core clone (skips cloning)")
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()
    run_study(args.workdir, args.repo, args.workers)
    return 0


if __name__ == "__main__":
    sys.exit(main())
