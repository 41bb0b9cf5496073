"""Pipeline orchestration: issues -> link -> trace -> features, as
subcommands over one config file.

Every stage reads the documented interchange files of its upstream stage and
writes a manifest (tool version, config digest, input hashes, counts) next
to its outputs. Stage failures exit with a stage-identifying code.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import TOKEN_ENV_VAR, ConfigError, PipelineConfig, apply_overrides, load_config
from .features import build_dataset, save_dataset, save_sidecar
from .fixtures import materialize
from .gitrepo import GitRepo, GitRepoError
from .issues import TrackerError, build_jql, fetch_issues, load_issues, save_issues
from .linemap import LineTracer, format_mapping
from .linker import link_all, load_fix_links, save_fix_links
from .tracer import Tracer, load_introductions, save_introductions

log = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_ISSUES = 2
EXIT_LINK = 3
EXIT_TRACE = 4
EXIT_FEATURES = 5

ISSUES_FILE = "issues.json"
LINKS_FILE = "fix_links.json"
INTRODUCERS_FILE = "introducers.json"
DATASET_FILE = "dataset.csv"
SIDECAR_FILE = "commit_times.csv"
MANIFEST_FILE = "manifest.json"
CURSOR_FILE = "issues.cursor.json"


class StageError(RuntimeError):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(path: Path, producer: str, code: int) -> Path:
    if not path.exists():
        raise StageError(
            f"missing {path.name}; run the '{producer}' subcommand first", code
        )
    return path


def _count_rows(path: Path) -> int:
    if path.suffix == ".json":
        return len(json.loads(path.read_text(encoding="utf-8")))
    with open(path, encoding="utf-8") as fh:
        return sum(1 for _ in fh) - 1  # minus header


def write_manifest(out_dir: Path, config: PipelineConfig, stage: str,
                   inputs: list[Path], outputs: dict[Path, int]) -> None:
    """Record the run; counts are re-derived from the written files so the
    manifest can never disagree with them."""
    for path, count in outputs.items():
        actual = _count_rows(path)
        if actual != count:
            raise StageError(
                f"manifest self-check failed for {path.name}: wrote {count}, file has {actual}",
                EXIT_CONFIG,
            )
    manifest = {
        "tool": "szzkit",
        "version": __version__,
        "stage": stage,
        "config_digest": config.digest(),
        "generated_at": datetime.now(tz=timezone.utc).isoformat(),
        "inputs": {p.name: _sha256(p) for p in inputs if p.exists()},
        "outputs": {p.name: {"sha256": _sha256(p), "records": n}
                    for p, n in outputs.items()},
    }
    (out_dir / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n",
                                         encoding="utf-8")


def _open_repo(config: PipelineConfig) -> GitRepo:
    try:
        return GitRepo(config.repo_path)
    except GitRepoError as exc:
        raise StageError(str(exc), EXIT_CONFIG) from exc


def cmd_issues(config: PipelineConfig, jql_override: str | None = None) -> Path:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not config.tracker_url:
        raise StageError("tracker_url is required for the issues stage", EXIT_CONFIG)
    query = config.query
    if config.cutoff and query.created_before is None:
        from dataclasses import replace

        query = replace(query, created_before=config.cutoff_epoch)
    jql = jql_override or build_jql(query)
    token = os.environ.get(TOKEN_ENV_VAR)
    start_at = 0
    partial = []
    cursor_path = out_dir / CURSOR_FILE
    if cursor_path.exists():
        cursor = json.loads(cursor_path.read_text(encoding="utf-8"))
        if cursor.get("jql") == jql:
            start_at = cursor["start_at"]
            partial = load_issues(out_dir / cursor["partial"])
            log.info("resuming issue fetch at offset %d", start_at)
    fetched_through = start_at
    accumulated = list(partial)
    try:
        def on_page(offset: int, size: int) -> None:
            nonlocal fetched_through
            fetched_through = offset + size

        reports = fetch_issues(
            config.tracker_url, jql, token=token, start_at=start_at,
            on_page=on_page, into=accumulated,
        )
    except TrackerError as exc:
        partial_path = out_dir / ("partial_" + ISSUES_FILE)
        save_issues(partial_path, accumulated)
        cursor_path.write_text(
            json.dumps({"jql": jql, "start_at": fetched_through,
                        "partial": partial_path.name}) + "\n",
            encoding="utf-8",
        )
        raise StageError(f"issue fetch failed: {exc}", EXIT_ISSUES) from exc
    cursor_path.unlink(missing_ok=True)
    out = out_dir / ISSUES_FILE
    save_issues(out, reports)
    write_manifest(out_dir, config, "issues", [], {out: len(reports)})
    log.info("wrote %d issues to %s", len(reports), out)
    return out


def cmd_link(config: PipelineConfig) -> Path:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    issues_path = _require(out_dir / ISSUES_FILE, "issues", EXIT_LINK)
    reports = load_issues(issues_path)
    repo = _open_repo(config)
    try:
        commits = repo.list_commits(config.branch, until=config.cutoff_epoch)
        links = link_all(reports, commits, config.patterns)
    except GitRepoError as exc:
        raise StageError(str(exc), EXIT_LINK) from exc
    finally:
        repo.close()
    out = out_dir / LINKS_FILE
    save_fix_links(out, links)
    write_manifest(out_dir, config, "link", [issues_path], {out: len(links)})
    log.info("linked %d of %d reports", len(links), len(reports))
    return out


def cmd_trace(config: PipelineConfig) -> Path:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    issues_path = _require(out_dir / ISSUES_FILE, "issues", EXIT_TRACE)
    links_path = _require(out_dir / LINKS_FILE, "link", EXIT_TRACE)
    reports = load_issues(issues_path)
    links = load_fix_links(links_path)
    repo = _open_repo(config)
    try:
        tracer = Tracer(repo, config.patterns, config.trace, config.similarity,
                        workers=config.worker_count)
        intros = tracer.trace_all(links, reports)
    except GitRepoError as exc:
        raise StageError(str(exc), EXIT_TRACE) from exc
    finally:
        repo.close()
    out = out_dir / INTRODUCERS_FILE
    save_introductions(out, intros)
    write_manifest(out_dir, config, "trace", [issues_path, links_path],
                   {out: len(intros)})
    log.info("recorded %d bug introductions", len(intros))
    return out


def cmd_features(config: PipelineConfig) -> Path:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    links_path = _require(out_dir / LINKS_FILE, "link", EXIT_FEATURES)
    intros_path = _require(out_dir / INTRODUCERS_FILE, "trace", EXIT_FEATURES)
    links = load_fix_links(links_path)
    intros = load_introductions(intros_path)
    repo = _open_repo(config)
    try:
        commits = repo.list_commits(config.branch, until=config.cutoff_epoch)
        vectors = build_dataset(
            repo,
            introducer_ids={b.introducing_commit for b in intros},
            fix_ids={l.fix_commit for l in links},
            commits=commits,
            coupling=config.coupling,
        )
    except GitRepoError as exc:
        raise StageError(str(exc), EXIT_FEATURES) from exc
    finally:
        repo.close()
    dataset = out_dir / DATASET_FILE
    sidecar = out_dir / SIDECAR_FILE
    save_dataset(dataset, vectors)
    save_sidecar(sidecar, vectors)
    write_manifest(out_dir, config, "features", [links_path, intros_path],
                   {dataset: len(vectors), sidecar: len(vectors)})
    log.info("wrote %d feature rows", len(vectors))
    return dataset


def cmd_run(config: PipelineConfig, jql_override: str | None = None) -> None:
    if config.tracker_url:
        cmd_issues(config, jql_override)
    else:
        _require(Path(config.output_dir) / ISSUES_FILE, "issues", EXIT_ISSUES)
        log.info("no tracker_url configured; using existing issues file")
    cmd_link(config)
    cmd_trace(config)
    cmd_features(config)


def cmd_fixture(name: str, path: str, seed: int) -> None:
    repo, reports = materialize(name, path, seed=seed)
    repo.close()
    issues_path = Path(path) / "issues.json"
    save_issues(issues_path, reports)
    print(f"fixture {name!r} at {path} ({len(reports)} issue records)")


def cmd_mapdump(repo_path: str, commit: str, path: str) -> None:
    repo = GitRepo(repo_path)
    try:
        tracer = LineTracer(repo)
        mapping = tracer.mapping(repo.commit(commit).id, path)
        if mapping is None:
            print(f"{commit} does not change {path}")
        else:
            print(format_mapping(mapping))
    finally:
        repo.close()


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szzkit",
        description="Trace bug-introducing commits and emit commit-level "
                    "defect-prediction datasets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="YAML pipeline config file")
        p.add_argument("--repo", dest="repo_path", help="git repository path")
        p.add_argument("--branch", help="branch to mine")
        p.add_argument("--cutoff", help="ISO-8601 cut-off timestamp")
        p.add_argument("--depth", type=int, help="blame backtracking depth")
        p.add_argument("--out", dest="output_dir", help="output directory")
        p.add_argument("--workers", dest="worker_count", type=int,
                       help="intra-stage worker threads")
        p.add_argument("--tracker", dest="tracker_url", help="tracker base URL")
        p.add_argument("--jql", help="raw JQL override for the issues stage")

    for name in ("issues", "link", "trace", "features", "run"):
        add_common(sub.add_parser(name, help=f"run the {name} stage"))

    fx = sub.add_parser("fixture", help="materialize a named fixture repository")
    fx.add_argument("name", help="fig3 or random-N")
    fx.add_argument("path", help="target directory (must be empty)")
    fx.add_argument("--seed", type=int, default=0)

    md = sub.add_parser("mapdump", help="dump one file's line mapping at a commit")
    md.add_argument("--repo", required=True)
    md.add_argument("--commit", required=True)
    md.add_argument("--path", required=True)
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    return apply_overrides(
        config,
        repo_path=args.repo_path,
        branch=args.branch,
        cutoff=args.cutoff,
        tracker_url=args.tracker_url,
        output_dir=args.output_dir,
        worker_count=args.worker_count,
        depth=args.depth,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "fixture":
            cmd_fixture(args.name, args.path, args.seed)
            return 0
        if args.command == "mapdump":
            cmd_mapdump(args.repo, args.commit, args.path)
            return 0
        config = _config_from_args(args)
        if args.command == "issues":
            cmd_issues(config, args.jql)
        elif args.command == "link":
            cmd_link(config)
        elif args.command == "trace":
            cmd_trace(config)
        elif args.command == "features":
            cmd_features(config)
        elif args.command == "run":
            cmd_run(config, args.jql)
        return 0
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except StageError as exc:
        log.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
