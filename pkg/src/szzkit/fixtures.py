"""Synthetic git repositories for tests and demos.

A HistoryScript is an ordered list of commits described as line-level edit
operations; build_repo materializes it into a real repository with fixed
author identities and timestamps, so commit ids are reproducible. The module
also ships the six-commit single-file trace fixture used by the golden tests
("fig3") and a seeded random-history generator.
"""

from __future__ import annotations

import random
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .gitrepo import GitRepo
from .issues import BugReport

AUTHORS = [
    ("Dev One", "one@example.com"),
    ("Dev Two", "two@example.com"),
    ("Dev Three", "three@example.com"),
]
COMMITTER = ("Forge", "forge@example.com")

# Base timestamp for fixture histories: 2020-01-01T00:00:00Z.
EPOCH_BASE = 1_577_836_800


class ScriptError(ValueError):
    """An edit cannot be applied to the evolving file state."""


@dataclass(frozen=True)
class Edit:
    """One line-level operation against the pre-step file state.

    kinds: "insert" places ``texts`` before 1-based ``line`` (len+1 appends);
    "delete" removes ``count`` lines starting at ``line``; "replace" swaps
    ``count`` lines starting at ``line`` for ``texts``; "delete_file" removes
    the path entirely.
    """

    kind: str
    path: str
    line: int = 1
    count: int = 0
    texts: tuple[str, ...] = ()


@dataclass(frozen=True)
class Step:
    author: tuple[str, str]
    timestamp: int
    message: str
    edits: tuple[Edit, ...]


@dataclass(frozen=True)
class HistoryScript:
    steps: tuple[Step, ...]

    def __post_init__(self) -> None:
        times = [s.timestamp for s in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScriptError("step timestamps must be strictly increasing")


def apply_edit(state: dict[str, list[str]], edit: Edit, where: str = "") -> None:
    """Apply one edit in place; raises ScriptError on out-of-range targets."""
    if edit.kind == "delete_file":
        if edit.path not in state:
            raise ScriptError(f"{where}: delete_file on missing {edit.path!r}")
        del state[edit.path]
        return
    lines = state.setdefault(edit.path, [])
    if edit.kind == "insert":
        if not 1 <= edit.line <= len(lines) + 1:
            raise ScriptError(f"{where}: insert at {edit.line} outside 1..{len(lines) + 1}")
        lines[edit.line - 1 : edit.line - 1] = list(edit.texts)
    elif edit.kind == "delete":
        if edit.count < 1 or edit.line < 1 or edit.line + edit.count - 1 > len(lines):
            raise ScriptError(f"{where}: delete {edit.line},{edit.count} outside file")
        del lines[edit.line - 1 : edit.line - 1 + edit.count]
    elif edit.kind == "replace":
        if edit.count < 1 or edit.line < 1 or edit.line + edit.count - 1 > len(lines):
            raise ScriptError(f"{where}: replace {edit.line},{edit.count} outside file")
        lines[edit.line - 1 : edit.line - 1 + edit.count] = list(edit.texts)
    else:
        raise ScriptError(f"{where}: unknown edit kind {edit.kind!r}")


def replay_states(script: HistoryScript) -> list[dict[str, list[str]]]:
    """File states after each step (deep copies), for oracle checks."""
    state: dict[str, list[str]] = {}
    states = []
    for idx, step in enumerate(script.steps):
        for edit in step.edits:
            apply_edit(state, edit, where=f"step {idx}")
        states.append({p: list(ls) for p, ls in state.items()})
    return states


def build_repo(script: HistoryScript, path: str | Path) -> GitRepo:
    """Materialize the script as a git repository at an empty ``path``."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    if any(root.iterdir()):
        raise ScriptError(f"target path not empty: {root}")

    def git(args: list[str], env_extra: dict[str, str] | None = None) -> None:
        import os

        env = dict(os.environ)
        env.update(env_extra or {})
        proc = subprocess.run(
            ["git", "-C", str(root)] + args, capture_output=True, text=True, env=env
        )
        if proc.returncode != 0:
            raise ScriptError(f"git {args[0]} failed: {proc.stderr.strip()}")

    git(["init", "-q", "-b", "master"])
    state: dict[str, list[str]] = {}
    for idx, step in enumerate(script.steps):
        before = set(state)
        for edit in step.edits:
            apply_edit(state, edit, where=f"step {idx}")
        for gone in before - set(state):
            (root / gone).unlink()
        for p, lines in state.items():
            fp = root / p
            fp.parent.mkdir(parents=True, exist_ok=True)
            fp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        git(["add", "-A"])
        name, email = step.author
        stamp = f"@{step.timestamp} +0000"
        git(
            ["commit", "-q", "--allow-empty", "-m", step.message],
            env_extra={
                "GIT_AUTHOR_NAME": name,
                "GIT_AUTHOR_EMAIL": email,
                "GIT_AUTHOR_DATE": stamp,
                "GIT_COMMITTER_NAME": COMMITTER[0],
                "GIT_COMMITTER_EMAIL": COMMITTER[1],
                "GIT_COMMITTER_DATE": stamp,
            },
        )
    return GitRepo(root)


def _ts(step: int) -> int:
    return EPOCH_BASE + step * 86_400


def fig3_script() -> HistoryScript:
    """Six commits to one file realizing the worked trace scenario.

    Line 1's lineage: created by commit 1, then edited by commits 2, 3, 5
    and 6 in turn, so tracing the last fix's first changed line reaches
    commit 2 in exactly three blame steps. The other three lines give the
    depth-1 blame set {1, 3, 4, 5}.
    """
    f = "core/app.txt"
    a1, a2, a3 = AUTHORS
    steps = (
        Step(a1, _ts(1), "initial platform import",
             (Edit("insert", f, 1, texts=(
                 "alpha beta one",
                 "gamma delta two",
                 "epsilon zeta three",
                 "eta theta four",
             )),)),
        Step(a2, _ts(2), "adjust alpha wiring",
             (Edit("replace", f, 1, 1, ("alpha beta uno",)),)),
        Step(a1, _ts(3), "JENKINS-1 fix alpha regression",
             (Edit("replace", f, 1, 1, ("alpha beta uno prime",)),
              Edit("replace", f, 2, 1, ("gamma delta dos",)))),
        Step(a3, _ts(4), "rework epsilon path",
             (Edit("replace", f, 3, 1, ("epsilon zeta tres",)),)),
        Step(a2, _ts(5), "polish alpha configuration",
             (Edit("replace", f, 1, 1, ("alpha beta uno prime two",)),)),
        Step(a1, _ts(6), "JENKINS-2 fix beta fallout",
             (Edit("replace", f, 1, 1, ("alpha beta uno prime final",)),
              Edit("replace", f, 2, 1, ("gamma delta dos final",)),
              Edit("replace", f, 3, 1, ("epsilon zeta tres final",)),
              Edit("replace", f, 4, 1, ("eta theta four final",)))),
    )
    return HistoryScript(steps)


def fig3_reports() -> list[BugReport]:
    """Issue records matching fig3: BR A predates commit 2, BR B postdates
    every non-fix commit."""
    return [
        BugReport(key="JENKINS-1", number=1, created=_ts(1) + 43_200,
                  resolved=_ts(3) + 3_600, status="Resolved", resolution="Fixed"),
        BugReport(key="JENKINS-2", number=2, created=_ts(5) + 43_200,
                  resolved=_ts(6) + 3_600, status="Resolved", resolution="Fixed"),
    ]


_WORDS = [
    "alpha", "bravo", "carbon", "delta", "ember", "falcon", "gamma", "harbor",
    "iris", "joule", "kelvin", "lumen", "meson", "nadir", "onyx", "photon",
    "quark", "rune", "sigma", "tensor", "umbra", "vector", "wavelet", "xenon",
]


def _fresh_line(rng: random.Random, serial: list[int]) -> str:
    serial[0] += 1
    words = rng.sample(_WORDS, 3)
    return f"{words[0]} {words[1]} {words[2]} n{serial[0]}"


def _similar_line(rng: random.Random, original: str, serial: list[int]) -> str:
    # keep most tokens so similarity matching pairs old and new deterministically
    serial[0] += 1
    tokens = original.split()
    tokens[-1] = f"n{serial[0]}"
    return " ".join(tokens)


def random_history(seed: int, steps: int = 12) -> tuple[HistoryScript, list[BugReport]]:
    """Seeded random linear history plus matching issue records.

    Edits within one commit target pairwise non-adjacent lines, replacements
    share most tokens with the line they replace, and inserted lines carry
    fresh tokens; this keeps similarity matching unambiguous so script-level
    provenance is an exact oracle for the tracer.
    """
    rng = random.Random(seed)
    serial = [0]
    files = ["core/app.txt", "lib/util.txt"]
    state: dict[str, list[str]] = {}
    out_steps: list[Step] = []
    reports: list[BugReport] = []
    issue_no = 0

    init_edits = tuple(
        Edit("insert", f, 1, texts=tuple(_fresh_line(rng, serial) for _ in range(6)))
        for f in files
    )
    out_steps.append(Step(AUTHORS[0], _ts(1), "seed the tree", init_edits))
    for edit in init_edits:
        apply_edit(state, edit)

    for i in range(2, steps + 2):
        f = rng.choice(files)
        edits: list[Edit] = []
        # positions are picked against the evolving state (edits apply
        # sequentially) and kept >= 2 apart so diff hunks never merge
        used: set[int] = set()
        for _ in range(rng.randint(1, 2)):
            lines = state[f]
            kind = rng.choice(["replace", "replace", "insert", "delete"])
            if kind == "delete" and len(lines) < 4:
                kind = "insert"
            if kind == "insert":
                pos = rng.randint(1, len(lines) + 1)
                near = {pos - 1, pos, pos + 1}
                if near & used:
                    continue
                edit = Edit("insert", f, pos, texts=(_fresh_line(rng, serial),))
            else:
                pos = rng.randint(1, len(lines))
                near = {pos - 1, pos, pos + 1}
                if near & used:
                    continue
                if kind == "replace":
                    edit = Edit("replace", f, pos, 1,
                                (_similar_line(rng, lines[pos - 1], serial),))
                else:
                    edit = Edit("delete", f, pos, 1)
            apply_edit(state, edit)
            edits.append(edit)
            used |= near
        if not edits:
            edit = Edit("insert", f, 1, texts=(_fresh_line(rng, serial),))
            apply_edit(state, edit)
            edits.append(edit)
        if rng.random() < 0.35:
            issue_no += 1
            message = f"JENKINS-{issue_no} fix {rng.choice(_WORDS)} fault"
            created = _ts(max(1, i - rng.randint(1, 3))) + 7_200
            reports.append(
                BugReport(
                    key=f"JENKINS-{issue_no}", number=issue_no, created=created,
                    resolved=_ts(i) + 3_600, status="Resolved", resolution="Fixed",
                )
            )
        else:
            message = f"{rng.choice(_WORDS)} maintenance pass {i}"
        out_steps.append(Step(rng.choice(AUTHORS), _ts(i), message, tuple(edits)))

    return HistoryScript(tuple(out_steps)), reports


def materialize(name: str, path: str | Path, seed: int = 0) -> tuple[GitRepo, list[BugReport]]:
    """Build a named fixture ("fig3" or "random-N") at ``path``."""
    if name == "fig3":
        return build_repo(fig3_script(), path), fig3_reports()
    if name.startswith("random-"):
        steps = int(name.split("-", 1)[1])
        script, reports = random_history(seed, steps)
        return build_repo(script, path), reports
    raise ValueError(f"unknown fixture {name!r} (expected 'fig3' or 'random-N')")
