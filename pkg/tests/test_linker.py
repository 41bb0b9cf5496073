from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szzkit.gitrepo import CommitInfo
from szzkit.issues import BugReport
from szzkit.linker import (
    DEFAULT_PATTERN,
    FixLink,
    ReferencePattern,
    link_all,
    load_fix_links,
    match_commits,
    save_fix_links,
    select_fix_commit,
)


def _commit(cid: str, message: str, when: int) -> CommitInfo:
    return CommitInfo(id=cid, author_name="dev", author_time=when,
                      committer_time=when, message=message, parent_ids=("p",))


def _report(key: str, created: int = 0) -> BugReport:
    return BugReport.make(key, created=created, resolved=created + 10)


# -- match_commits ----------------------------------------------------------


def test_key_reference_matches():
    commits = [_commit("c1", "JENKINS-123: fix NPE", 10)]
    assert match_commits(_report("JENKINS-123"), commits) == commits


def test_digit_guard_rejects_longer_number():
    commits = [_commit("c1", "JENKINS-1234 refactor", 10)]
    assert match_commits(_report("JENKINS-123"), commits) == []


def test_hash_reference_requires_fix_word():
    no_fix = [_commit("c1", "#123 cleanup", 10)]
    with_fix = [_commit("c2", "#123 fixed race", 10)]
    report = _report("JENKINS-123")
    assert match_commits(report, no_fix) == []
    assert match_commits(report, with_fix) == with_fix


def test_legacy_reference_matches_without_fix_word():
    commits = [_commit("c1", "HUDSON-123 rework layout", 10)]
    assert match_commits(_report("JENKINS-123"), commits) == commits


def test_key_at_end_of_message_fails_trailing_guard():
    # the non-digit guard needs a character after the number
    commits = [_commit("c1", "resolved JENKINS-123", 10)]
    assert match_commits(_report("JENKINS-123"), commits) == []


def test_order_preserved_newest_first():
    commits = [
        _commit("new", "JENKINS-7 fix late", 30),
        _commit("mid", "JENKINS-7 fix again", 20),
        _commit("old", "JENKINS-7 fix early", 10),
    ]
    got = match_commits(_report("JENKINS-7"), commits)
    assert [c.id for c in got] == ["new", "mid", "old"]


# -- select_fix_commit --------------------------------------------------------


def test_selector_skips_merges():
    commits = [
        _commit("m", "Merge branch 'x' JENKINS-5 ", 30),
        _commit("f", "JENKINS-5 fix leak", 20),
    ]
    assert select_fix_commit(commits).id == "f"


def test_selector_falls_back_to_first_when_all_excluded():
    commits = [
        _commit("a", "Merge A JENKINS-5 work", 30),
        _commit("b", "Cherry pick B JENKINS-5 work", 20),
    ]
    assert select_fix_commit(commits).id == "a"


def test_selector_single_commit():
    only = [_commit("x", "JENKINS-5 fix", 10)]
    assert select_fix_commit(only).id == "x"


def test_selector_requires_nonempty_input():
    with pytest.raises(ValueError):
        select_fix_commit([])


def test_selector_noop_without_excluded_messages():
    commits = [
        _commit("a", "JENKINS-5 fix one", 30),
        _commit("b", "JENKINS-5 fix two", 20),
    ]
    assert select_fix_commit(commits).id == commits[0].id


# -- link_all: hand-labeled 20-message corpus --------------------------------

# Expectations were derived by hand-applying the reference-template semantics
# (trailing non-digit guard, hash form needs the "fix" stem, merge/cherry/
# noting exclusion with newest-first fallback) before the implementation ran.
CORPUS = [
    # (commit id, committer time, message)
    ("c01", 200, "JENKINS-11: fix null pointer in queue"),
    ("c02", 195, "JENKINS-110 rework scheduler"),          # not a match for 11
    ("c03", 190, "Merge branch 'fix/JENKINS-12'"),         # match 12, excluded
    ("c04", 185, "JENKINS-12 fix quoting"),
    ("c05", 180, "#13 cleanup whitespace"),                # hash without fix word
    ("c06", 175, "#13 hotfix for crash"),                  # "hotfix" carries the stem
    ("c07", 170, "HUDSON-14 adjust retry logic"),
    ("c08", 165, "noting this JENKINS-15 change"),         # match 15, excluded
    ("c09", 160, "JENKINS-15 fix fallback"),
    ("c10", 155, "Cherry pick of JENKINS-16 patch"),       # match 16, excluded
    ("c11", 150, "Merge JENKINS-16 work"),                 # match 16, excluded
    ("c12", 145, "resolved JENKINS-17"),                   # key at end: guard fails
    ("c13", 140, "JENKINS-18, JENKINS-19 fix both"),
    ("c14", 135, "prep for JENKINS-1800 rollout"),         # guard blocks 18
    ("c15", 130, "#20 and #21 fixes applied"),
    ("c16", 125, "JENKINS-22fix inline reference"),        # 'f' after number is fine
    ("c17", 120, "bump version"),
    ("c18", 115, "HUDSON-23 fix legacy path"),
    ("c19", 110, "merge of #24 fix"),                      # excluded, but sole match falls back
    ("c20", 105, "JENKINS-25 fix; also JENKINS-26 mention"),
]

REPORT_KEYS = [f"JENKINS-{n}" for n in (11, 12, 13, 14, 15, 16, 17, 18, 19,
                                        20, 21, 22, 23, 24, 25, 26, 27)]

EXPECTED_LINKS = {
    "JENKINS-11": ("c01", ["c01"]),
    "JENKINS-12": ("c04", ["c03", "c04"]),
    "JENKINS-13": ("c06", ["c06"]),
    "JENKINS-14": ("c07", ["c07"]),
    "JENKINS-15": ("c09", ["c08", "c09"]),
    "JENKINS-16": ("c10", ["c10", "c11"]),  # all excluded -> newest
    "JENKINS-18": ("c13", ["c13"]),
    "JENKINS-19": ("c13", ["c13"]),
    "JENKINS-20": ("c15", ["c15"]),
    "JENKINS-21": ("c15", ["c15"]),
    "JENKINS-22": ("c16", ["c16"]),
    "JENKINS-23": ("c18", ["c18"]),
    "JENKINS-24": ("c19", ["c19"]),
    "JENKINS-25": ("c20", ["c20"]),
    "JENKINS-26": ("c20", ["c20"]),
}
EXPECTED_UNLINKED = {"JENKINS-17", "JENKINS-27"}


def corpus_commits():
    return [_commit(cid, message, when) for cid, when, message in CORPUS]


def test_corpus_links_exactly():
    reports = [_report(k) for k in REPORT_KEYS]
    links = link_all(reports, corpus_commits())
    got = {l.issue_key: (l.fix_commit, list(l.matched_commits)) for l in links}
    assert got == EXPECTED_LINKS
    assert {r.key for r in reports} - set(got) == EXPECTED_UNLINKED


def test_zero_reports_zero_links():
    assert link_all([], corpus_commits()) == []


def test_no_link_references_nonmatching_commit():
    reports = [_report(k) for k in REPORT_KEYS]
    links = link_all(reports, corpus_commits())
    by_id = {c.id: c for c in corpus_commits()}
    for link in links:
        report = next(r for r in reports if r.key == link.issue_key)
        for cid in link.matched_commits:
            assert DEFAULT_PATTERN.matches(report.key, report.number,
                                           by_id[cid].message)
        assert link.fix_commit in link.matched_commits


def test_link_all_deterministic():
    reports = [_report(k) for k in REPORT_KEYS]
    assert link_all(reports, corpus_commits()) == link_all(reports, corpus_commits())


# -- pattern configurability -------------------------------------------------


def test_hash_fix_word_can_be_disabled():
    pattern = replace(DEFAULT_PATTERN, fix_word_required_for_hash=False)
    commits = [_commit("c1", "#123 cleanup", 10)]
    assert match_commits(_report("JENKINS-123"), commits, pattern) == commits


def test_references_any_issue():
    assert DEFAULT_PATTERN.references_any_issue("JENKINS-99 fix it")
    assert DEFAULT_PATTERN.references_any_issue("HUDSON-4 legacy tune")
    assert DEFAULT_PATTERN.references_any_issue("#44 fixing things")
    assert not DEFAULT_PATTERN.references_any_issue("#44 plain cleanup")
    assert not DEFAULT_PATTERN.references_any_issue("routine maintenance")


# -- persistence --------------------------------------------------------------


def test_fix_link_roundtrip(tmp_path):
    links = [
        FixLink("JENKINS-1", "abc", ("abc", "def")),
        FixLink("JENKINS-2", "def", ("def",)),
    ]
    p = tmp_path / "links.json"
    save_fix_links(p, links)
    assert load_fix_links(p) == links


@settings(max_examples=100)
@given(st.integers(min_value=1, max_value=10_000), st.integers(min_value=1, max_value=10_000))
def test_distinct_keys_never_cross_match(a, b):
    if a == b:
        return
    message = f"JENKINS-{a} fix things"
    assert not DEFAULT_PATTERN.matches(f"JENKINS-{b}", b, message)
