"""Read-only gateway to a local git repository.

Wraps the git CLI (``log``, ``diff``, ``cat-file --batch``, ``ls-tree``) and
exposes the commit graph, per-commit diffs with rename detection, and file
content at any revision. A repository is treated as an immutable snapshot
once opened; all reads are safe to issue from multiple worker threads.
"""

from __future__ import annotations

import logging
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

# Rename detection: two paths are the same file when content similarity >= 50%.
RENAME_THRESHOLD_PERCENT = 50


class GitRepoError(RuntimeError):
    """Fatal repository-level failure (missing repo, bad branch, git error)."""


class FileNotAtRevisionError(GitRepoError):
    """Requested path does not exist at the requested revision."""


class DiffConsistencyError(GitRepoError):
    """A parsed diff does not agree with the file contents it claims to relate."""


@dataclass(frozen=True)
class CommitInfo:
    """One commit: identity, authorship, timestamps (UTC epoch seconds), message."""

    id: str
    author_name: str
    author_time: int
    committer_time: int
    message: str
    parent_ids: tuple[str, ...]

    @property
    def is_merge(self) -> bool:
        return len(self.parent_ids) > 1

    @property
    def is_root(self) -> bool:
        return not self.parent_ids


@dataclass(frozen=True)
class Hunk:
    """A contiguous change region. Line numbers are 1-based on both sides.

    ``old_start`` is the first old-side line the hunk occupies; for a pure
    insertion it is the old line that the inserted block displaces (i.e. the
    insertion happens immediately before it). ``new_start`` mirrors that on
    the new side for pure deletions.
    """

    old_start: int
    deleted_lines: tuple[tuple[int, str], ...]
    new_start: int
    added_lines: tuple[tuple[int, str], ...]

    @property
    def old_span(self) -> int:
        return len(self.deleted_lines)

    @property
    def new_span(self) -> int:
        return len(self.added_lines)


@dataclass(frozen=True)
class FileDiff:
    """Changes to one file in one commit. ``old_path`` absent for new files,
    ``new_path`` absent for deleted files; both present (and possibly
    different, for renames) otherwise."""

    old_path: str | None
    new_path: str | None
    hunks: tuple[Hunk, ...]

    @property
    def path(self) -> str:
        return self.new_path if self.new_path is not None else self.old_path  # type: ignore[return-value]


@dataclass
class SkippedFile:
    """One file skipped while diffing a commit, with the reason."""

    commit: str
    path: str
    reason: str


def split_lines(content: str) -> list[str]:
    """Split file content into lines without terminators.

    Splits on ``\\n`` only; a trailing unterminated line is preserved
    verbatim as the final element. The empty file yields ``[]``.
    """
    if not content:
        return []
    pieces = content.split("\n")
    if pieces[-1] == "":
        return pieces[:-1]
    return pieces


def apply_hunks(old_lines: list[str], hunks: tuple[Hunk, ...] | list[Hunk]) -> list[str]:
    """Replay hunks over the old content and return the new content lines."""
    out: list[str] = []
    cursor = 1  # next old line to copy
    for hunk in hunks:
        if hunk.old_start < cursor:
            raise DiffConsistencyError(
                f"overlapping or unsorted hunk at old line {hunk.old_start}"
            )
        out.extend(old_lines[cursor - 1 : hunk.old_start - 1])
        cursor = hunk.old_start + hunk.old_span
        if cursor - 1 > len(old_lines):
            raise DiffConsistencyError(
                f"hunk at old line {hunk.old_start} runs past end of file"
            )
        out.extend(text for _, text in hunk.added_lines)
    out.extend(old_lines[cursor - 1 :])
    return out


@dataclass
class _RawEntry:
    status: str
    old_path: str | None
    new_path: str | None


class GitRepo:
    """Snapshot view of a git object database.

    All public methods are thread-safe; results are memoized where the
    snapshot assumption makes that sound.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.exists():
            raise GitRepoError(f"repository path does not exist: {self.path}")
        try:
            self._run(["rev-parse", "--git-dir"])
        except GitRepoError as exc:
            raise GitRepoError(f"not a git repository: {self.path}") from exc
        self._empty_tree = self._run(["hash-object", "-t", "tree", "/dev/null"]).strip()
        self.skipped: list[SkippedFile] = []
        self._lock = threading.Lock()
        self._cat_proc: subprocess.Popen | None = None
        self._cat_lock = threading.Lock()
        self._log_cache: dict[str, list[CommitInfo]] = {}
        self._commit_cache: dict[str, CommitInfo] = {}
        self._diff_cache: dict[str, list[FileDiff]] = {}
        self._tree_count_cache: dict[str, int] = {}

    # -- plumbing -----------------------------------------------------------

    def _run(self, args: list[str], check: bool = True) -> str:
        proc = subprocess.run(
            ["git", "--literal-pathspecs", "-C", str(self.path), "-c", "core.quotepath=false"]
            + args,
            capture_output=True,
            text=True,
            encoding="utf-8",
            errors="replace",
        )
        if check and proc.returncode != 0:
            raise GitRepoError(
                f"git {' '.join(args[:2])} failed: {proc.stderr.strip() or proc.stdout.strip()}"
            )
        return proc.stdout

    def close(self) -> None:
        with self._cat_lock:
            if self._cat_proc is not None:
                self._cat_proc.stdin.close()  # type: ignore[union-attr]
                self._cat_proc.wait(timeout=10)
                self._cat_proc = None

    def __enter__(self) -> "GitRepo":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- commits ------------------------------------------------------------

    _LOG_FORMAT = "%H%x1f%an%x1f%at%x1f%ct%x1f%P%x1f%B"

    def _parse_log(self, raw: str) -> list[CommitInfo]:
        commits = []
        for record in raw.split("\0"):
            if not record:
                continue
            cid, author, at, ct, parents, message = record.split("\x1f", 5)
            commits.append(
                CommitInfo(
                    id=cid,
                    author_name=author,
                    author_time=int(at),
                    committer_time=int(ct),
                    message=message,
                    parent_ids=tuple(parents.split()) if parents else (),
                )
            )
        return commits

    def list_commits(self, branch: str, until: int | None = None) -> list[CommitInfo]:
        """All commits reachable from ``branch``, newest committer time first.

        Ties keep git's topological order (children before parents). Commits
        committed after ``until`` (UTC epoch seconds) are excluded. An empty
        repository yields an empty list; a branch that does not resolve in a
        non-empty repository is fatal.
        """
        with self._lock:
            cached = self._log_cache.get(branch)
        if cached is None:
            probe = subprocess.run(
                ["git", "-C", str(self.path), "rev-parse", "--verify", "--quiet",
                 f"{branch}^{{commit}}"],
                capture_output=True,
                text=True,
            )
            if probe.returncode != 0:
                if not self._run(["rev-list", "-n1", "--all"]).strip():
                    return []
                raise GitRepoError(f"branch does not resolve: {branch!r}")
            raw = self._run(["log", "-z", f"--format={self._LOG_FORMAT}", branch])
            cached = self._parse_log(raw)
            # stable sort: equal committer times keep topological order
            cached.sort(key=lambda c: c.committer_time, reverse=True)
            with self._lock:
                self._log_cache[branch] = cached
                for c in cached:
                    self._commit_cache.setdefault(c.id, c)
        if until is None:
            return list(cached)
        return [c for c in cached if c.committer_time <= until]

    def commit(self, commit_id: str) -> CommitInfo:
        """Look up a single commit by id."""
        with self._lock:
            hit = self._commit_cache.get(commit_id)
        if hit is not None:
            return hit
        raw = self._run(["log", "-z", "-n1", f"--format={self._LOG_FORMAT}", commit_id])
        parsed = self._parse_log(raw)
        if not parsed:
            raise GitRepoError(f"no such commit: {commit_id}")
        with self._lock:
            self._commit_cache[commit_id] = parsed[0]
        return parsed[0]

    def first_parent(self, commit_id: str) -> str | None:
        info = self.commit(commit_id)
        return info.parent_ids[0] if info.parent_ids else None

    # -- diffs --------------------------------------------------------------

    def diff_commit(self, commit: CommitInfo | str) -> list[FileDiff]:
        """Diff a commit against its first parent (the empty tree for roots).

        Renames detected at >= 50% similarity; binary files are skipped and
        recorded in ``self.skipped``. Hunks carry exact 1-based line numbers
        on both sides.
        """
        commit_id = commit.id if isinstance(commit, CommitInfo) else commit
        with self._lock:
            hit = self._diff_cache.get(commit_id)
        if hit is not None:
            return hit
        info = self.commit(commit_id)
        base = info.parent_ids[0] if info.parent_ids else self._empty_tree
        diffs = self._diff_trees(base, commit_id)
        with self._lock:
            self._diff_cache[commit_id] = diffs
        return diffs

    def _diff_trees(self, base: str, target: str) -> list[FileDiff]:
        mflag = f"-M{RENAME_THRESHOLD_PERCENT}%"
        raw = self._run(["diff", "--raw", "-z", mflag, base, target])
        entries = self._parse_raw(raw)
        if not entries:
            return []
        patch = self._run(
            ["diff", "--patch", "-U0", mflag, "--no-color", "--no-ext-diff", base, target]
        )
        blocks = self._split_patch_blocks(patch)
        if len(blocks) != len(entries):
            raise GitRepoError(
                f"diff parse mismatch for {target}: {len(entries)} raw entries, "
                f"{len(blocks)} patch blocks"
            )
        diffs: list[FileDiff] = []
        for entry, block in zip(entries, blocks):
            if any(line.startswith(("Binary files ", "GIT binary patch")) for line in block):
                self.skipped.append(
                    SkippedFile(commit=target, path=entry.new_path or entry.old_path or "?",
                                reason="binary")
                )
                continue
            try:
                hunks = self._parse_hunks(block)
            except GitRepoError as exc:
                self.skipped.append(
                    SkippedFile(commit=target, path=entry.new_path or entry.old_path or "?",
                                reason=str(exc))
                )
                log.warning("skipping %s at %s: %s", entry.new_path, target, exc)
                continue
            diffs.append(FileDiff(old_path=entry.old_path, new_path=entry.new_path, hunks=hunks))
        return diffs

    @staticmethod
    def _parse_raw(raw: str) -> list[_RawEntry]:
        tokens = raw.split("\0")
        entries: list[_RawEntry] = []
        i = 0
        while i < len(tokens) and tokens[i]:
            meta = tokens[i]
            if not meta.startswith(":"):
                raise GitRepoError(f"unexpected raw diff token: {meta!r}")
            status = meta.split(" ")[-1]
            kind = status[0]
            if kind in ("R", "C"):
                old_path, new_path = tokens[i + 1], tokens[i + 2]
                i += 3
            else:
                path = tokens[i + 1]
                i += 2
                if kind == "A":
                    old_path, new_path = None, path
                elif kind == "D":
                    old_path, new_path = path, None
                else:  # M, T and friends: same path on both sides
                    old_path, new_path = path, path
            entries.append(_RawEntry(status=status, old_path=old_path, new_path=new_path))
        return entries

    @staticmethod
    def _split_patch_blocks(patch: str) -> list[list[str]]:
        blocks: list[list[str]] = []
        for line in patch.split("\n"):
            if line.startswith("diff --git "):
                blocks.append([line])
            elif blocks:
                blocks[-1].append(line)
        return blocks

    @staticmethod
    def _parse_hunks(block: list[str]) -> tuple[Hunk, ...]:
        hunks: list[Hunk] = []
        i = 0
        while i < len(block):
            line = block[i]
            if not line.startswith("@@ "):
                i += 1
                continue
            header = line[3 : line.index(" @@", 3)]
            old_part, new_part = header.split(" ")
            old_start, old_count = GitRepo._parse_range(old_part[1:])
            new_start, new_count = GitRepo._parse_range(new_part[1:])
            # -U0 reports the line *before* a zero-width side; normalize to
            # the first displaced position so spans are uniform
            if old_count == 0:
                old_start += 1
            if new_count == 0:
                new_start += 1
            deleted: list[tuple[int, str]] = []
            added: list[tuple[int, str]] = []
            i += 1
            while i < len(block):
                body = block[i]
                if body.startswith("-"):
                    deleted.append((old_start + len(deleted), body[1:]))
                elif body.startswith("+"):
                    added.append((new_start + len(added), body[1:]))
                elif body.startswith("\\"):
                    pass  # "\ No newline at end of file"
                else:
                    break
                i += 1
            if len(deleted) != old_count or len(added) != new_count:
                raise GitRepoError(
                    f"hunk body does not match header @@ -{old_part[1:]} +{new_part[1:]} @@"
                )
            hunks.append(
                Hunk(
                    old_start=old_start,
                    deleted_lines=tuple(deleted),
                    new_start=new_start,
                    added_lines=tuple(added),
                )
            )
        return tuple(hunks)

    @staticmethod
    def _parse_range(spec: str) -> tuple[int, int]:
        if "," in spec:
            start, count = spec.split(",")
            return int(start), int(count)
        return int(spec), 1

    # -- file content -------------------------------------------------------

    def file_at(self, commit: CommitInfo | str, path: str) -> list[str]:
        """Exact lines of ``path`` at ``commit``; no normalization.

        A trailing line without a newline is preserved verbatim as the last
        element. Raises FileNotAtRevisionError when the path is absent.
        """
        commit_id = commit.id if isinstance(commit, CommitInfo) else commit
        data = self._cat_file(f"{commit_id}:{path}")
        if data is None:
            raise FileNotAtRevisionError(f"{path!r} not present at {commit_id}")
        return split_lines(data.decode("utf-8", errors="replace"))

    def _cat_file(self, spec: str) -> bytes | None:
        with self._cat_lock:
            if self._cat_proc is None or self._cat_proc.poll() is not None:
                self._cat_proc = subprocess.Popen(
                    ["git", "-C", str(self.path), "cat-file", "--batch"],
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                )
            proc = self._cat_proc
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(spec.encode("utf-8") + b"\n")
            proc.stdin.flush()
            header = proc.stdout.readline().decode("utf-8", errors="replace").rstrip("\n")
            if header.endswith(" missing") or header.endswith(" ambiguous"):
                return None
            parts = header.split(" ")
            if len(parts) != 3:
                raise GitRepoError(f"unexpected cat-file header: {header!r}")
            size = int(parts[2])
            data = proc.stdout.read(size)
            proc.stdout.read(1)  # trailing newline
            return data

    # -- history helpers ----------------------------------------------------

    def last_change(self, rev: str, path: str) -> str | None:
        """Most recent commit at or before ``rev`` (first-parent chain) that
        changed ``path``. None when no such commit exists."""
        out = self._run(
            ["log", "-n1", "--first-parent", "--format=%H", rev, "--", path]
        ).strip()
        return out or None

    def tree_file_count(self, rev: str) -> int:
        """Number of files (blobs) in the tree at ``rev``."""
        with self._lock:
            hit = self._tree_count_cache.get(rev)
        if hit is not None:
            return hit
        if rev == self._empty_tree:
            count = 0
        else:
            out = self._run(["ls-tree", "-r", "-z", "--name-only", rev])
            count = sum(1 for tok in out.split("\0") if tok)
        with self._lock:
            self._tree_count_cache[rev] = count
        return count

    @property
    def empty_tree_id(self) -> str:
        return self._empty_tree
