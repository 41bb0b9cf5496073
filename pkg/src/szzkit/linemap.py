"""Similarity-based line-number mapping between adjacent revisions, and the
multi-step blame walk built on top of it.

Unchanged lines map by pure offset; within each change hunk, deleted and
added lines are scored by Jaccard similarity over token sets and matched
greedily highest score first. The result is a partial bijection between old
and new line numbers that the tracer walks backwards through history.
"""

from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass, field

from .gitrepo import CommitInfo, DiffConsistencyError, FileDiff, GitRepo

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


class TraceError(RuntimeError):
    """The blame walk hit an internally inconsistent state."""


@dataclass(frozen=True)
class SimilarityConfig:
    """Line-matching knobs: score threshold and tokenizer rule."""

    threshold: float = 0.4
    tokenizer: str = "alnum"

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold outside [0,1]: {self.threshold}")
        if self.tokenizer not in _TOKENIZERS:
            raise ValueError(f"unknown tokenizer rule {self.tokenizer!r}")


def _alnum_tokens(line: str) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(line))


def _char_tokens(line: str) -> frozenset[str]:
    return frozenset(line)


_TOKENIZERS = {"alnum": _alnum_tokens, "chars": _char_tokens}

DEFAULT_SIMILARITY = SimilarityConfig()


def jaccard_similarity(line_a: str, line_b: str,
                       config: SimilarityConfig = DEFAULT_SIMILARITY) -> float:
    """|T(a) ∩ T(b)| / |T(a) ∪ T(b)| over token sets.

    When both token sets are empty (whitespace or punctuation-only lines) the
    comparison falls back to character sets; two fully empty lines score 1.0.
    """
    tok = _TOKENIZERS[config.tokenizer]
    a, b = tok(line_a), tok(line_b)
    if not a and not b:
        a, b = _char_tokens(line_a), _char_tokens(line_b)
        if not a and not b:
            return 1.0
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


@dataclass(frozen=True)
class LineMapping:
    """Line-number correspondence of one file across one commit.

    ``pairs`` is a partial bijection old->new; ``changed`` is the subset of
    pairs produced by similarity matching (the commit modified those lines),
    the rest are pure offset shifts of untouched lines. ``deleted`` holds old
    lines with no counterpart, ``inserted`` new lines with none.
    """

    path_old: str | None
    path_new: str | None
    pairs: frozenset[tuple[int, int]]
    deleted: frozenset[int]
    inserted: frozenset[int]
    changed: frozenset[tuple[int, int]] = frozenset()
    _old_to_new: dict = field(default_factory=dict, repr=False, compare=False)
    _new_to_old: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._old_to_new.update({o: n for o, n in self.pairs})
        self._new_to_old.update({n: o for o, n in self.pairs})

    def new_of(self, old_line: int) -> int | None:
        return self._old_to_new.get(old_line)

    def old_of(self, new_line: int) -> int | None:
        return self._new_to_old.get(new_line)

    def is_changed_new(self, new_line: int) -> bool:
        old = self._new_to_old.get(new_line)
        return old is not None and (old, new_line) in self.changed


def _match_hunk(deleted: tuple[tuple[int, str], ...],
                added: tuple[tuple[int, str], ...],
                config: SimilarityConfig) -> list[tuple[int, int]]:
    """Greedy highest-score matching of one hunk's deleted x added lines.

    Ties break on smallest line-number distance, then lowest old line, then
    lowest new line. Scores below the threshold never match.
    """
    scored = []
    for old_line, old_text in deleted:
        for new_line, new_text in added:
            score = jaccard_similarity(old_text, new_text, config)
            if score >= config.threshold:
                scored.append((-score, abs(old_line - new_line), old_line, new_line))
    scored.sort()
    taken_old: set[int] = set()
    taken_new: set[int] = set()
    matches = []
    for _neg, _dist, old_line, new_line in scored:
        if old_line in taken_old or new_line in taken_new:
            continue
        taken_old.add(old_line)
        taken_new.add(new_line)
        matches.append((old_line, new_line))
    return matches


def map_lines(diff: FileDiff, old_content: list[str], new_content: list[str],
              config: SimilarityConfig = DEFAULT_SIMILARITY) -> LineMapping:
    """Build the LineMapping for one file diff.

    Raises DiffConsistencyError when the hunks do not reproduce
    ``new_content`` from ``old_content``.
    """
    pairs: list[tuple[int, int]] = []
    changed: list[tuple[int, int]] = []
    deleted: list[int] = []
    inserted: list[int] = []
    old_i, new_i = 1, 1
    for hunk in diff.hunks:
        if hunk.old_start < old_i:
            raise DiffConsistencyError(f"unsorted hunk at old line {hunk.old_start}")
        # untouched run before the hunk maps by offset
        while old_i < hunk.old_start:
            if old_i > len(old_content) or new_i > len(new_content):
                raise DiffConsistencyError("diff runs past file contents")
            if old_content[old_i - 1] != new_content[new_i - 1]:
                raise DiffConsistencyError(
                    f"contents disagree on unchanged line {old_i}->{new_i}"
                )
            pairs.append((old_i, new_i))
            old_i += 1
            new_i += 1
        if hunk.added_lines and hunk.added_lines[0][0] != new_i:
            raise DiffConsistencyError(
                f"hunk new side starts at {hunk.added_lines[0][0]}, expected {new_i}"
            )
        for line_no, text in hunk.deleted_lines:
            if line_no > len(old_content) or old_content[line_no - 1] != text:
                raise DiffConsistencyError(f"old content mismatch at line {line_no}")
        for line_no, text in hunk.added_lines:
            if line_no > len(new_content) or new_content[line_no - 1] != text:
                raise DiffConsistencyError(f"new content mismatch at line {line_no}")
        matches = _match_hunk(hunk.deleted_lines, hunk.added_lines, config)
        matched_old = {o for o, _ in matches}
        matched_new = {n for _, n in matches}
        pairs.extend(matches)
        changed.extend(matches)
        deleted.extend(o for o, _ in hunk.deleted_lines if o not in matched_old)
        inserted.extend(n for n, _ in hunk.added_lines if n not in matched_new)
        old_i = hunk.old_start + hunk.old_span
        new_i = (hunk.added_lines[0][0] + hunk.new_span) if hunk.added_lines else new_i
    # trailing untouched run
    while old_i <= len(old_content):
        if new_i > len(new_content):
            raise DiffConsistencyError("old content continues past mapped new content")
        if old_content[old_i - 1] != new_content[new_i - 1]:
            raise DiffConsistencyError(f"contents disagree on trailing line {old_i}")
        pairs.append((old_i, new_i))
        old_i += 1
        new_i += 1
    if new_i <= len(new_content):
        raise DiffConsistencyError("new content continues past mapped old content")
    return LineMapping(
        path_old=diff.old_path,
        path_new=diff.new_path,
        pairs=frozenset(pairs),
        deleted=frozenset(deleted),
        inserted=frozenset(inserted),
        changed=frozenset(changed),
    )


class LineTracer:
    """Walks a line's history backwards through per-commit LineMappings.

    Mappings are memoized per (commit, path); the cache is lock-guarded so
    tracer instances can be shared across worker threads.
    """

    def __init__(self, repo: GitRepo, config: SimilarityConfig = DEFAULT_SIMILARITY):
        self.repo = repo
        self.config = config
        self._cache: dict[tuple[str, str], LineMapping | None] = {}
        self._cache_lock = threading.Lock()

    def mapping(self, commit_id: str, new_path: str) -> LineMapping | None:
        """LineMapping of ``new_path`` across ``commit_id`` (diff vs first
        parent), or None when the commit does not change that file as text."""
        key = (commit_id, new_path)
        with self._cache_lock:
            if key in self._cache:
                return self._cache[key]
        found: LineMapping | None = None
        for fd in self.repo.diff_commit(commit_id):
            if fd.new_path == new_path:
                parent = self.repo.first_parent(commit_id)
                old = (
                    self.repo.file_at(parent, fd.old_path)
                    if parent is not None and fd.old_path is not None
                    else []
                )
                new = self.repo.file_at(commit_id, new_path)
                found = map_lines(fd, old, new, self.config)
                break
        with self._cache_lock:
            self._cache[key] = found
        return found

    def preimage(self, commit_id: str, path: str, line: int) -> tuple[str, int] | None:
        """The line's (path, line) at the commit's first parent, or None when
        the commit introduced the line (or is a root)."""
        if self.repo.first_parent(commit_id) is None:
            return None
        m = self.mapping(commit_id, path)
        if m is None:
            return (path, line)  # file untouched by this commit
        if line in m.inserted:
            return None
        old = m.old_of(line)
        if old is None:
            raise TraceError(f"line {line} of {path} not live at {commit_id}")
        return (m.path_old, old)  # type: ignore[return-value]

    def blame(self, rev: str, path: str, line: int) -> tuple[str, str, int]:
        """Most recent commit at-or-before ``rev`` (first-parent chain) that
        last modified the live line ``path:line``; returns the commit id and
        the line's coordinates in that commit's own revision."""
        cur_rev, cur_path, cur_line = rev, path, line
        while True:
            changer = self.repo.last_change(cur_rev, cur_path)
            if changer is None:
                raise TraceError(f"no commit changes {cur_path!r} at or before {cur_rev}")
            m = self.mapping(changer, cur_path)
            if m is None:
                # opaque change (e.g. the file was binary here): attribute the
                # line to this commit, the walk cannot see through it
                log.debug("opaque change to %s at %s; attributing line %d",
                          cur_path, changer, cur_line)
                return (changer, cur_path, cur_line)
            if cur_line in m.inserted or m.is_changed_new(cur_line):
                return (changer, cur_path, cur_line)
            old = m.old_of(cur_line)
            if old is None:
                raise TraceError(f"line {cur_line} of {cur_path} not live at {changer}")
            parent = self.repo.first_parent(changer)
            if parent is None:
                # root commits insert every line, so this is unreachable for
                # consistent repositories; guard anyway
                return (changer, cur_path, cur_line)
            cur_rev, cur_path, cur_line = parent, m.path_old, old  # type: ignore[assignment]

    def trace_back(self, rev: str, path: str, line: int,
                   steps: int) -> list[tuple[str, str, int]]:
        """Chain of up to ``steps`` successive modifiers of a line live at
        ``rev`` (ancestor-or-self), newest first, ending early at the line's
        originating commit."""
        chain: list[tuple[str, str, int]] = []
        cur: tuple[str, str, int] | None = (rev, path, line)
        for _ in range(steps):
            blamed = self.blame(*cur)
            chain.append(blamed)
            pre = self.preimage(*blamed)
            if pre is None:
                break
            parent = self.repo.first_parent(blamed[0])
            if parent is None:
                break
            cur = (parent, pre[0], pre[1])
        return chain

    def trace_line(self, commit: CommitInfo | str, path: str, line: int,
                   steps: int) -> list[tuple[str, str, int]]:
        """Ancestor commits that successively last modified the given live
        line, oldest last; at most ``steps`` blame steps. A line introduced
        by ``commit`` itself has an empty chain.
        """
        if steps < 1:
            raise ValueError("steps must be positive")
        commit_id = commit.id if isinstance(commit, CommitInfo) else commit
        # precondition: the line must be live at commit:path
        if line < 1 or line > len(self.repo.file_at(commit_id, path)):
            raise ValueError(f"line {line} does not exist at {commit_id}:{path}")
        pre = self.preimage(commit_id, path, line)
        if pre is None:
            return []
        parent = self.repo.first_parent(commit_id)
        if parent is None:
            return []
        return self.trace_back(parent, pre[0], pre[1], steps)


def format_mapping(mapping: LineMapping) -> str:
    """Human-readable dump of a LineMapping (debug CLI)."""
    lines = [f"old: {mapping.path_old}  new: {mapping.path_new}"]
    for old, new in sorted(mapping.pairs):
        tag = "~" if (old, new) in mapping.changed else " "
        lines.append(f"  {old:>5} ->{tag}{new:>5}")
    for old in sorted(mapping.deleted):
        lines.append(f"  {old:>5} -> (deleted)")
    for new in sorted(mapping.inserted):
        lines.append(f"  (inserted) -> {new:>5}")
    return "\n".join(lines)
