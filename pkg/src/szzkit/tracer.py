"""Phase 2: trace each fixing commit's changed lines backwards and rule on
every bug-introducing candidate.

Candidates come from the fix diff's old-side lines (pure additions have no
anchor and are excluded), walked back up to ``depth`` blame steps. A
candidate older than (or equal to) its report's creation is bug-introducing
outright; a newer one survives only as a partial fix (its message references
some issue) or when a different fixing commit also blames it.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .gitrepo import CommitInfo, GitRepo
from .linemap import DEFAULT_SIMILARITY, LineTracer, SimilarityConfig
from .linker import DEFAULT_PATTERN, FixLink, ReferencePattern
from .issues import BugReport

log = logging.getLogger(__name__)

BEFORE_REPORT = "BEFORE_REPORT"
PARTIAL_FIX = "PARTIAL_FIX"
OTHER_BUG = "OTHER_BUG"
CATEGORIES = frozenset({BEFORE_REPORT, PARTIAL_FIX, OTHER_BUG})


@dataclass(frozen=True)
class TraceConfig:
    """Backtracking depth and candidate-ruling knobs."""

    depth: int = 3
    file_level_other_bug: bool = False

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


@dataclass(frozen=True)
class BugIntroduction:
    """(issue, fix, introducer) verdict with its witnessing lines."""

    issue_key: str
    fix_commit: str
    introducing_commit: str
    category: str
    evidence: tuple[tuple[str, int], ...]


def classify_candidate(
    candidate: CommitInfo,
    report: BugReport,
    fix_commit: str,
    candidate_index: dict[str, set[str]],
    pattern: ReferencePattern = DEFAULT_PATTERN,
) -> str | None:
    """Rule on one candidate; None means ruled out.

    ``candidate_index`` maps candidate commit id -> fixing commits that blame
    it (the completed global index). Equal timestamps count as before-report.
    """
    if candidate.committer_time <= report.created:
        return BEFORE_REPORT
    if pattern.references_any_issue(candidate.message):
        return PARTIAL_FIX
    if candidate_index.get(candidate.id, set()) - {fix_commit}:
        return OTHER_BUG
    return None


class Tracer:
    """Runs the candidate/ruling passes over a repository snapshot."""

    def __init__(
        self,
        repo: GitRepo,
        pattern: ReferencePattern = DEFAULT_PATTERN,
        config: TraceConfig = TraceConfig(),
        similarity: SimilarityConfig = DEFAULT_SIMILARITY,
        workers: int = 1,
    ):
        self.repo = repo
        self.pattern = pattern
        self.config = config
        self.workers = max(1, workers)
        self.lines = LineTracer(repo, similarity)

    def candidates_for_fix(self, fix: FixLink) -> dict[str, set[tuple[str, int]]]:
        """Candidate commits for one fix, each with its anchor-line evidence.

        Anchors are the (path, old_line) pairs the fix deleted or modified,
        in the fix's first-parent coordinates; every commit on each anchor's
        blame chain (up to the configured depth) becomes a candidate.
        """
        commit = self.repo.commit(fix.fix_commit)
        diffs = self.repo.diff_commit(commit)
        parent = commit.parent_ids[0] if commit.parent_ids else None
        candidates: dict[str, set[tuple[str, int]]] = {}
        anchors = 0
        for fd in diffs:
            if fd.old_path is None or parent is None:
                continue  # new file: pure addition, nothing to blame
            for hunk in fd.hunks:
                for old_line, _text in hunk.deleted_lines:
                    anchors += 1
                    chain = self.lines.trace_back(parent, fd.old_path, old_line,
                                                  self.config.depth)
                    for commit_id, _path, _line in chain:
                        candidates.setdefault(commit_id, set()).add((fd.old_path, old_line))
        if anchors == 0:
            log.warning("fix %s for %s has no deleted or modified lines; "
                        "no candidates", fix.fix_commit[:10], fix.issue_key)
        return candidates

    def trace_all(self, fix_links: list[FixLink],
                  reports: list[BugReport]) -> list[BugIntroduction]:
        """Candidates for every fix first, then classification against the
        completed cross-fix index; deduplicated and deterministically ordered
        (fix commit time, then ids)."""
        by_key = {r.key: r for r in reports}
        missing = [l.issue_key for l in fix_links if l.issue_key not in by_key]
        if missing:
            raise ValueError(f"fix links reference unknown issues: {missing[:5]}")

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                all_candidates = list(pool.map(self.candidates_for_fix, fix_links))
        else:
            all_candidates = [self.candidates_for_fix(link) for link in fix_links]

        candidate_index: dict[str, set[str]] = {}
        for link, cands in zip(fix_links, all_candidates):
            for commit_id in cands:
                candidate_index.setdefault(commit_id, set()).add(link.fix_commit)
        if self.config.file_level_other_bug:
            candidate_index = self._file_level_index(fix_links, candidate_index)

        results: dict[tuple[str, str, str], BugIntroduction] = {}
        for link, cands in zip(fix_links, all_candidates):
            report = by_key[link.issue_key]
            for commit_id, evidence in cands.items():
                category = classify_candidate(
                    self.repo.commit(commit_id), report, link.fix_commit,
                    candidate_index, self.pattern,
                )
                if category is None:
                    continue
                key = (link.issue_key, link.fix_commit, commit_id)
                results[key] = BugIntroduction(
                    issue_key=link.issue_key,
                    fix_commit=link.fix_commit,
                    introducing_commit=commit_id,
                    category=category,
                    evidence=tuple(sorted(evidence)),
                )

        def order(intro: BugIntroduction):
            return (
                self.repo.commit(intro.fix_commit).committer_time,
                intro.fix_commit,
                intro.issue_key,
                intro.introducing_commit,
            )

        return sorted(results.values(), key=order)

    def _file_level_index(self, fix_links: list[FixLink],
                          line_index: dict[str, set[str]]) -> dict[str, set[str]]:
        """Alternative OTHER_BUG granularity: a candidate counts as blamed by
        a fix when it touched any file that fix later fixed lines in."""
        fix_files: dict[str, set[str]] = {}
        for link in fix_links:
            paths = set()
            for fd in self.repo.diff_commit(link.fix_commit):
                if fd.old_path is not None and any(h.deleted_lines for h in fd.hunks):
                    paths.add(fd.old_path)
            fix_files[link.fix_commit] = paths
        index: dict[str, set[str]] = {}
        for commit_id in line_index:
            info = self.repo.commit(commit_id)
            touched = {fd.path for fd in self.repo.diff_commit(commit_id)}
            for fix_id, paths in fix_files.items():
                fix_info = self.repo.commit(fix_id)
                if info.committer_time < fix_info.committer_time and touched & paths:
                    index.setdefault(commit_id, set()).add(fix_id)
        return index


def save_introductions(path: str | Path, intros: list[BugIntroduction]) -> None:
    records = [
        {
            "issue_key": b.issue_key,
            "fix_commit": b.fix_commit,
            "introducing_commit": b.introducing_commit,
            "category": b.category,
            "evidence": [{"path": p, "line": n} for p, n in b.evidence],
        }
        for b in intros
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")


def load_introductions(path: str | Path) -> list[BugIntroduction]:
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        BugIntroduction(
            issue_key=r["issue_key"],
            fix_commit=r["fix_commit"],
            introducing_commit=r["introducing_commit"],
            category=r["category"],
            evidence=tuple((e["path"], e["line"]) for e in r["evidence"]),
        )
        for r in records
    ]
