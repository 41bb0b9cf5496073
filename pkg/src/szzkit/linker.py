"""Phase 1: link bug reports to the single commit that fixed each of them.

Commit messages are scanned with per-project reference templates (issue key,
bare #number, legacy key), each guarded by a trailing non-digit so that e.g.
key 123 never matches inside 1234. Bare-number references additionally
require the word "fix" somewhere in the message. Among multiple matching
commits, the newest one that is not a merge/cherry-pick/noting commit wins.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .gitrepo import CommitInfo
from .issues import BugReport

log = logging.getLogger(__name__)

ANY_KEY = r"[A-Z][A-Z0-9]*-\d+"
ANY_NUMBER = r"\d+"


@dataclass(frozen=True)
class ReferencePattern:
    """Message-reference templates for one project.

    Templates are regex fragments with ``{key}`` / ``{number}`` placeholders;
    each keeps the trailing ``\\D`` guard. ``legacy_template`` or
    ``hash_template`` may be None to disable that form. The exclusion regex
    drives fix-commit selection and is kept exactly as configured.
    """

    key_template: str = r"{key}\D"
    hash_template: str | None = r"#{number}\D"
    legacy_template: str | None = r"HUDSON-{number}\D"
    fix_word_required_for_hash: bool = True
    fix_word: str = "fix"
    exclusion: str = r"[Mm]erge|[Cc]herry|[Nn]oting"

    def _has_fix_word(self, message: str) -> bool:
        return self.fix_word.lower() in message.lower()

    def matches(self, key: str, number: int, message: str) -> bool:
        """Does the message reference this report under any template?"""
        if re.search(self.key_template.format(key=re.escape(key)), message):
            return True
        if self.legacy_template and re.search(
            self.legacy_template.format(number=number), message
        ):
            return True
        if self.hash_template and re.search(
            self.hash_template.format(number=number), message
        ):
            if not self.fix_word_required_for_hash or self._has_fix_word(message):
                return True
        return False

    def references_any_issue(self, message: str) -> bool:
        """Does the message reference *some* issue (any key or number)?"""
        if re.search(self.key_template.format(key=ANY_KEY), message):
            return True
        if self.legacy_template and re.search(
            self.legacy_template.format(number=ANY_NUMBER), message
        ):
            return True
        if self.hash_template and re.search(
            self.hash_template.format(number=ANY_NUMBER), message
        ):
            if not self.fix_word_required_for_hash or self._has_fix_word(message):
                return True
        return False

    def excluded(self, message: str) -> bool:
        return re.search(self.exclusion, message) is not None


DEFAULT_PATTERN = ReferencePattern()


@dataclass(frozen=True)
class FixLink:
    """A bug report bound to its selected fixing commit."""

    issue_key: str
    fix_commit: str
    matched_commits: tuple[str, ...]


def match_commits(report: BugReport, commits: list[CommitInfo],
                  pattern: ReferencePattern = DEFAULT_PATTERN) -> list[CommitInfo]:
    """Commits (newest first, order preserved) whose message references the
    report under any template."""
    return [c for c in commits if pattern.matches(report.key, report.number, c.message)]


def select_fix_commit(matches: list[CommitInfo],
                      pattern: ReferencePattern = DEFAULT_PATTERN) -> CommitInfo:
    """Newest match whose message is not excluded; the overall newest when
    every match is excluded."""
    if not matches:
        raise ValueError("select_fix_commit requires a non-empty match list")
    for commit in matches:
        if not pattern.excluded(commit.message):
            return commit
    return matches[0]


def link_all(reports: list[BugReport], commits: list[CommitInfo],
             pattern: ReferencePattern = DEFAULT_PATTERN) -> list[FixLink]:
    """One FixLink per report with at least one matching commit.

    ``commits`` must be newest-first (list_commits order). Reports without a
    match are summarized in the log; a commit may fix several reports.
    """
    links: list[FixLink] = []
    unlinked: list[str] = []
    for report in reports:
        matches = match_commits(report, commits, pattern)
        if not matches:
            unlinked.append(report.key)
            continue
        chosen = select_fix_commit(matches, pattern)
        links.append(
            FixLink(
                issue_key=report.key,
                fix_commit=chosen.id,
                matched_commits=tuple(c.id for c in matches),
            )
        )
    if unlinked:
        log.info("%d of %d reports had no referencing commit: %s%s",
                 len(unlinked), len(reports), ", ".join(unlinked[:10]),
                 "..." if len(unlinked) > 10 else "")
    return links


def save_fix_links(path: str | Path, links: list[FixLink]) -> None:
    records = [
        {
            "issue_key": l.issue_key,
            "fix_commit": l.fix_commit,
            "matched_commits": list(l.matched_commits),
        }
        for l in links
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")


def load_fix_links(path: str | Path) -> list[FixLink]:
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        FixLink(
            issue_key=r["issue_key"],
            fix_commit=r["fix_commit"],
            matched_commits=tuple(r["matched_commits"]),
        )
        for r in records
    ]
