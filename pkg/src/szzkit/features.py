"""Per-commit feature vectors for just-in-time bug prediction.

Sixteen features per commit: relative churn (ft1-ft3) against the size of
the modified files at the parent (ft4), diffusion (ft5-ft7, entropy in
bits), author/file history (ft9-ft13), and logical-coupling counts
(ft14-ft16) over strictly-prior history, plus the purpose flag ft8 (equal to
the fix label). Labels come from the linker and tracer outputs.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .gitrepo import CommitInfo, FileDiff, GitRepo

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86_400.0
# ft13 decays at 1/(1+age); one "year" of age is exactly 365 days so a gap of
# 365 days contributes 1/2
SECONDS_PER_YEAR = 365.0 * SECONDS_PER_DAY

FEATURE_NAMES = tuple(f"ft{i}" for i in range(1, 17))


@dataclass(frozen=True)
class CouplingConfig:
    """Logical-coupling thresholds (code-maat style defaults)."""

    degree_threshold: float = 75.0
    min_shared_revisions: int = 5
    window: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.degree_threshold <= 100:
            raise ValueError("degree_threshold must be in (0, 100]")
        if self.min_shared_revisions < 1:
            raise ValueError("min_shared_revisions must be >= 1")


@dataclass(frozen=True)
class FeatureVector:
    commit: str
    committer_time: int
    ft1: float
    ft2: float
    ft3: float
    ft4: float
    ft5: int
    ft6: int
    ft7: float
    ft8: int
    ft9: int
    ft10: float
    ft11: int
    ft12: int
    ft13: float
    ft14: int
    ft15: int
    ft16: int
    label_bug: int
    label_fix: int

    def feature_values(self) -> tuple:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)


def _modified_paths(diffs: list[FileDiff]) -> list[str]:
    return [fd.path for fd in diffs]


def _line_counts(diffs: list[FileDiff]) -> tuple[int, int, dict[str, int]]:
    added = deleted = 0
    per_file: dict[str, int] = {}
    for fd in diffs:
        a = sum(len(h.added_lines) for h in fd.hunks)
        d = sum(len(h.deleted_lines) for h in fd.hunks)
        added += a
        deleted += d
        per_file[fd.path] = a + d
    return added, deleted, per_file


def churn_features(repo: GitRepo, commit: CommitInfo,
                   diffs: list[FileDiff] | None = None) -> tuple[float, float, float, float]:
    """ft1 added/LT, ft2 deleted/LT, ft3 churned-files share, ft4 = LT.

    LT is the total line count of the modified files at the first parent;
    when LT is 0 (only new files, or nothing at all) ft1 is 1.0 if any line
    was added, else 0.0, and ft2 is 0.0.
    """
    diffs = repo.diff_commit(commit) if diffs is None else diffs
    added, deleted, _ = _line_counts(diffs)
    parent = commit.parent_ids[0] if commit.parent_ids else None
    lt = 0
    for fd in diffs:
        if fd.old_path is not None and parent is not None:
            lt += len(repo.file_at(parent, fd.old_path))
    if lt > 0:
        ft1, ft2 = added / lt, deleted / lt
    else:
        ft1, ft2 = (1.0 if added > 0 else 0.0), 0.0
    total_files = repo.tree_file_count(parent) if parent is not None else 0
    if total_files > 0:
        ft3 = len(diffs) / total_files
    else:
        ft3 = 1.0 if diffs else 0.0
    return ft1, ft2, ft3, float(lt)


def _subsystem(path: str) -> str:
    return path.split("/", 1)[0] if "/" in path else ""


def _directory(path: str) -> str:
    return path.rsplit("/", 1)[0] if "/" in path else ""


def diffusion_features(repo: GitRepo, commit: CommitInfo,
                       diffs: list[FileDiff] | None = None) -> tuple[int, int, float]:
    """ft5 modified subsystems, ft6 modified directories, ft7 entropy.

    Subsystem = first path component (root-level files share one bucket);
    directory = containing directory. Entropy is over the share of modified
    lines per file, in bits; zero for a single-file (or empty) change.
    """
    diffs = repo.diff_commit(commit) if diffs is None else diffs
    paths = _modified_paths(diffs)
    ft5 = len({_subsystem(p) for p in paths})
    ft6 = len({_directory(p) for p in paths})
    _, _, per_file = _line_counts(diffs)
    total = sum(per_file.values())
    ft7 = 0.0
    if total > 0:
        for count in per_file.values():
            if count:
                p = count / total
                ft7 -= p * math.log2(p)
    return ft5, ft6, ft7


@dataclass
class HistoryState:
    """Cumulative indices over commits processed so far (dataset order).

    The coupling counters (revision counts, pair counts) honor an optional
    window of the most recent N commits; the author/file history used by
    ft9-ft13 is never windowed.
    """

    window: int | None = None
    file_commits: dict[str, list[str]] = field(default_factory=dict)
    file_authors: dict[str, set[str]] = field(default_factory=dict)
    author_times: dict[str, list[int]] = field(default_factory=dict)
    file_revisions: dict[str, int] = field(default_factory=dict)
    pair_counts: dict[frozenset, int] = field(default_factory=dict)
    partners: dict[str, set[str]] = field(default_factory=dict)
    recent: list[list[str]] = field(default_factory=list)
    commits_seen: int = 0

    def record(self, commit: CommitInfo, paths: list[str]) -> None:
        """Fold one commit into the indices (call after computing features)."""
        uniq = sorted(set(paths))
        for p in paths:
            self.file_commits.setdefault(p, []).append(commit.id)
            self.file_authors.setdefault(p, set()).add(commit.author_name)
        self.author_times.setdefault(commit.author_name, []).append(commit.committer_time)
        self._couple(uniq, +1)
        if self.window is not None:
            self.recent.append(uniq)
            if len(self.recent) > self.window:
                self._couple(self.recent.pop(0), -1)
        self.commits_seen += 1

    def _couple(self, uniq: list[str], sign: int) -> None:
        for p in uniq:
            self.file_revisions[p] = self.file_revisions.get(p, 0) + sign
        for i, a in enumerate(uniq):
            for b in uniq[i + 1 :]:
                key = frozenset((a, b))
                count = self.pair_counts.get(key, 0) + sign
                if count:
                    self.pair_counts[key] = count
                    self.partners.setdefault(a, set()).add(b)
                    self.partners.setdefault(b, set()).add(a)
                else:
                    self.pair_counts.pop(key, None)
                    self.partners.get(a, set()).discard(b)
                    self.partners.get(b, set()).discard(a)


def _replay_history(repo: GitRepo, commits_asc: list[CommitInfo],
                    upto: CommitInfo, window: int | None = None) -> HistoryState:
    state = HistoryState(window=window)
    for c in commits_asc:
        if c.id == upto.id:
            break
        state.record(c, _modified_paths(repo.diff_commit(c)))
    return state


def history_features(repo: GitRepo, commit: CommitInfo,
                     prior: HistoryState | None = None,
                     commits_asc: list[CommitInfo] | None = None,
                     diffs: list[FileDiff] | None = None,
                     ) -> tuple[int, float, int, int, float]:
    """ft9 prior committers on the touched files, ft10 days since this
    author's previous commit, ft11 distinct prior commits on the touched
    files, ft12 author's prior commit count, ft13 recency-weighted ft12.

    "Prior" means earlier in dataset order (committer time ascending). When
    no prepared ``prior`` state is given the history is replayed from
    ``commits_asc`` (or the full branch history).
    """
    diffs = repo.diff_commit(commit) if diffs is None else diffs
    if prior is None:
        if commits_asc is None:
            commits_asc = sorted(repo.list_commits("HEAD"),
                                 key=lambda c: (c.committer_time, c.id))
        prior = _replay_history(repo, commits_asc, commit)
    paths = _modified_paths(diffs)
    authors: set[str] = set()
    prior_commits: set[str] = set()
    for p in paths:
        authors |= prior.file_authors.get(p, set())
        prior_commits.update(prior.file_commits.get(p, []))
    own_times = prior.author_times.get(commit.author_name, [])
    ft10 = ((commit.committer_time - own_times[-1]) / SECONDS_PER_DAY) if own_times else 0.0
    ft13 = sum(
        1.0 / (1.0 + (commit.committer_time - t) / SECONDS_PER_YEAR) for t in own_times
    )
    return len(authors), ft10, len(prior_commits), len(own_times), ft13


def coupling_features(repo: GitRepo, commit: CommitInfo,
                      config: CouplingConfig = CouplingConfig(),
                      prior: HistoryState | None = None,
                      commits_asc: list[CommitInfo] | None = None,
                      diffs: list[FileDiff] | None = None) -> tuple[int, int, int]:
    """ft14 highly coupled files, ft15 coupled files at any degree, ft16 the
    ft15 files not themselves modified.

    Coupling degree between two files is shared commits divided by the mean
    of their revision counts, in percent, over history strictly before this
    commit; partners must share at least ``min_shared_revisions`` commits.
    """
    diffs = repo.diff_commit(commit) if diffs is None else diffs
    if prior is None:
        if commits_asc is None:
            commits_asc = sorted(repo.list_commits("HEAD"),
                                 key=lambda c: (c.committer_time, c.id))
        prior = _replay_history(repo, commits_asc, commit, window=config.window)
    modified = set(_modified_paths(diffs))
    coupled: set[str] = set()
    highly: set[str] = set()
    for f in modified:
        for partner in prior.partners.get(f, set()):
            shared = prior.pair_counts.get(frozenset((f, partner)), 0)
            if shared < config.min_shared_revisions:
                continue
            mean_rev = (prior.file_revisions[f] + prior.file_revisions[partner]) / 2.0
            degree = 100.0 * shared / mean_rev if mean_rev else 0.0
            if degree <= 0:
                continue
            coupled.add(partner)
            if degree >= config.degree_threshold:
                highly.add(partner)
    return len(highly), len(coupled), len(coupled - modified)


def build_dataset(
    repo: GitRepo,
    introducer_ids: set[str],
    fix_ids: set[str],
    commits: list[CommitInfo],
    coupling: CouplingConfig = CouplingConfig(),
) -> list[FeatureVector]:
    """One FeatureVector per commit, sorted by committer time ascending.

    History-dependent features use a single incremental pass, so "prior"
    always means earlier rows of the emitted dataset.
    """
    ordered = sorted(commits, key=lambda c: (c.committer_time, c.id))
    state = HistoryState(window=coupling.window)
    vectors: list[FeatureVector] = []
    for commit in ordered:
        diffs = repo.diff_commit(commit)
        ft1, ft2, ft3, ft4 = churn_features(repo, commit, diffs)
        ft5, ft6, ft7 = diffusion_features(repo, commit, diffs)
        ft9, ft10, ft11, ft12, ft13 = history_features(repo, commit, prior=state, diffs=diffs)
        ft14, ft15, ft16 = coupling_features(repo, commit, coupling, prior=state, diffs=diffs)
        label_bug = 1 if commit.id in introducer_ids else 0
        label_fix = 1 if commit.id in fix_ids else 0
        vectors.append(
            FeatureVector(
                commit=commit.id,
                committer_time=commit.committer_time,
                ft1=ft1, ft2=ft2, ft3=ft3, ft4=ft4,
                ft5=ft5, ft6=ft6, ft7=ft7,
                ft8=label_fix,
                ft9=ft9, ft10=ft10, ft11=ft11, ft12=ft12, ft13=ft13,
                ft14=ft14, ft15=ft15, ft16=ft16,
                label_bug=label_bug,
                label_fix=label_fix,
            )
        )
        state.record(commit, _modified_paths(diffs))
    return vectors


DATASET_HEADER = ["commit", "label_bug", "label_fix", *FEATURE_NAMES]
SIDECAR_HEADER = ["commit", "committer_time"]


def save_dataset(path: str | Path, vectors: list[FeatureVector]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for v in vectors:
            writer.writerow([v.commit, v.label_bug, v.label_fix,
                             *[repr(x) if isinstance(x, float) else x
                               for x in v.feature_values()]])


def save_sidecar(path: str | Path, vectors: list[FeatureVector]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SIDECAR_HEADER)
        for v in vectors:
            writer.writerow([v.commit, v.committer_time])
