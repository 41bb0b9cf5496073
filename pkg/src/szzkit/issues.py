"""Bug-report extraction from a Jira-compatible tracker, plus the on-disk
issue interchange format.

The interchange file is a UTF-8 JSON array of records with keys ``key``,
``created``, ``resolved``, ``status``, ``resolution``; timestamps are
ISO-8601 UTC and ``resolved`` may be null. Any producer can emit it, which is
what decouples the tracker from the miner.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import requests

log = logging.getLogger(__name__)

PAGE_SIZE = 100
MAX_ATTEMPTS = 5
BACKOFF_BASE_SECONDS = 0.5


class IssueFileError(ValueError):
    """Interchange file cannot be parsed; message carries the record position."""


class TrackerError(RuntimeError):
    """Tracker endpoint failed beyond the retry budget."""


def parse_iso8601(text: str) -> int:
    """ISO-8601 (or Jira's ``+0000`` flavor) to UTC epoch seconds."""
    t = text.strip()
    if t.endswith("Z"):
        t = t[:-1] + "+00:00"
    # Jira emits +0000 without the colon
    if len(t) >= 5 and t[-5] in "+-" and t[-3] != ":":
        t = t[:-2] + ":" + t[-2:]
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_iso8601(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _key_number(key: str) -> int:
    tail = key.rsplit("-", 1)[-1]
    if not tail.isdigit():
        raise ValueError(f"issue key has no trailing number: {key!r}")
    return int(tail)


@dataclass(frozen=True)
class BugReport:
    """One resolved bug from the tracker."""

    key: str
    number: int
    created: int
    resolved: int | None
    status: str
    resolution: str

    @classmethod
    def make(cls, key: str, created: int, resolved: int | None,
             status: str = "Resolved", resolution: str = "Fixed") -> "BugReport":
        return cls(key=key, number=_key_number(key), created=created,
                   resolved=resolved, status=status, resolution=resolution)


@dataclass(frozen=True)
class IssueQuery:
    """Parameters of the tracker search; serializes to JQL."""

    project: str
    issue_type: str = "Bug"
    statuses: tuple[str, ...] = ("Resolved", "Closed")
    resolution: str = "Fixed"
    component: str | None = "core"
    created_before: int | None = None
    order: str = "created DESC"


def build_jql(query: IssueQuery) -> str:
    """Deterministic JQL string for the query (field order fixed)."""
    clauses = [
        f"project = {query.project}",
        f"issuetype = {query.issue_type}",
        f"status in ({', '.join(query.statuses)})",
        f"resolution = {query.resolution}",
    ]
    if query.component:
        clauses.append(f"component = {query.component}")
    if query.created_before is not None:
        stamp = datetime.fromtimestamp(query.created_before, tz=timezone.utc)
        clauses.append(f'created <= "{stamp.strftime("%Y-%m-%d %H:%M")}"')
    jql = " AND ".join(clauses)
    if query.order:
        jql += f" ORDER BY {query.order}"
    return jql


def _issue_to_report(issue: dict) -> BugReport:
    fields = issue["fields"]
    resolved = fields.get("resolutiondate")
    resolution = fields.get("resolution") or {}
    return BugReport(
        key=issue["key"],
        number=_key_number(issue["key"]),
        created=parse_iso8601(fields["created"]),
        resolved=parse_iso8601(resolved) if resolved else None,
        status=(fields.get("status") or {}).get("name", ""),
        resolution=resolution.get("name", "") if isinstance(resolution, dict) else str(resolution),
    )


def fetch_issues(
    endpoint: str,
    jql: str,
    token: str | None = None,
    page_size: int = PAGE_SIZE,
    start_at: int = 0,
    skipped: list[dict] | None = None,
    on_page=None,
    into: list[BugReport] | None = None,
    session: requests.Session | None = None,
) -> list[BugReport]:
    """Fetch every page of a JQL search and map issues to BugReports.

    Paging is server-driven (startAt/total). Transient HTTP failures retry
    with exponential backoff up to MAX_ATTEMPTS, then raise TrackerError
    carrying the failing page offset so a caller can resume. Malformed issue
    records are skipped with a warning and appended to ``skipped``. When
    ``into`` is given, reports accumulate there page by page, so the caller
    keeps everything fetched before a mid-run failure; ``on_page`` receives
    (offset, page size) after each successful page.
    """
    sess = session or requests.Session()
    url = endpoint.rstrip("/") + "/rest/api/2/search"
    headers = {"Accept": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    reports: list[BugReport] = into if into is not None else []
    offset = start_at
    while True:
        payload = _get_page(sess, url, headers, jql, offset, page_size)
        issues = payload.get("issues", [])
        for issue in issues:
            try:
                reports.append(_issue_to_report(issue))
            except (KeyError, ValueError, TypeError) as exc:
                log.warning("skipping malformed issue record at offset %d: %s", offset, exc)
                if skipped is not None:
                    skipped.append({"offset": offset, "key": issue.get("key"), "error": str(exc)})
        if on_page is not None:
            on_page(offset, len(issues))
        offset += len(issues)
        total = payload.get("total")
        if not issues or (total is not None and offset >= total):
            break
    return reports


def _get_page(sess, url, headers, jql, start_at, page_size) -> dict:
    params = {
        "jql": jql,
        "startAt": start_at,
        "maxResults": page_size,
        "fields": "created,resolutiondate,status,resolution",
    }
    last_error: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            delay = BACKOFF_BASE_SECONDS * (2 ** (attempt - 1))
            log.info("retrying tracker page %d in %.1fs", start_at, delay)
            time.sleep(delay)
        try:
            resp = sess.get(url, headers=headers, params=params, timeout=60)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code == 200:
            return resp.json()
        if resp.status_code in (429,) or resp.status_code >= 500:
            last_error = TrackerError(f"HTTP {resp.status_code} at offset {start_at}")
            continue
        raise TrackerError(f"HTTP {resp.status_code} at offset {start_at}: {resp.text[:200]}")
    raise TrackerError(f"tracker unreachable at offset {start_at}: {last_error}")


def save_issues(path: str | Path, reports: list[BugReport]) -> None:
    records = [
        {
            "key": r.key,
            "created": format_iso8601(r.created),
            "resolved": format_iso8601(r.resolved) if r.resolved is not None else None,
            "status": r.status,
            "resolution": r.resolution,
        }
        for r in reports
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")


def load_issues(path: str | Path) -> list[BugReport]:
    try:
        records = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IssueFileError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(records, list):
        raise IssueFileError(f"{path}: top level must be an array")
    reports = []
    seen: set[str] = set()
    for i, rec in enumerate(records):
        try:
            key = rec["key"]
            created = parse_iso8601(rec["created"])
            resolved = parse_iso8601(rec["resolved"]) if rec.get("resolved") else None
            report = BugReport(
                key=key,
                number=_key_number(key),
                created=created,
                resolved=resolved,
                status=rec.get("status", ""),
                resolution=rec.get("resolution", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IssueFileError(f"{path}: record {i}: {exc}") from exc
        if resolved is not None and created > resolved:
            raise IssueFileError(f"{path}: record {i}: created after resolved for {key}")
        if key in seen:
            raise IssueFileError(f"{path}: record {i}: duplicate key {key}")
        seen.add(key)
        reports.append(report)
    return reports
