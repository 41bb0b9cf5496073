import json
import shutil
import subprocess

import pytest
import yaml

from szzkit.cli import main
from szzkit.config import PipelineConfig, apply_overrides, load_config, ConfigError
from szzkit.issues import load_issues
from szzkit.linker import load_fix_links
from szzkit.tracer import load_introductions


@pytest.fixture()
def workspace(tmp_path):
    """fig3 repo plus its issues file staged into an output directory."""
    assert main(["fixture", "fig3", str(tmp_path / "repo")]) == 0
    out = tmp_path / "out"
    out.mkdir()
    shutil.copy(tmp_path / "repo" / "issues.json", out / "issues.json")
    return tmp_path


def _args(workspace, *extra):
    return [*extra, "--repo", str(workspace / "repo"), "--out", str(workspace / "out")]


def test_full_offline_run(workspace):
    assert main(_args(workspace, "run")) == 0
    out = workspace / "out"
    links = load_fix_links(out / "fix_links.json")
    intros = load_introductions(out / "introducers.json")
    assert {l.issue_key for l in links} == {"JENKINS-1", "JENKINS-2"}
    categories = {(i.issue_key, i.category) for i in intros}
    assert ("JENKINS-1", "OTHER_BUG") in categories
    dataset = (out / "dataset.csv").read_text().splitlines()
    assert len(dataset) == 7  # header + 6 commits
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"]["dataset.csv"]["records"] == 6


def test_stages_require_upstream_artifacts(tmp_path):
    assert main(["fixture", "fig3", str(tmp_path / "repo")]) == 0
    code = main(["trace", "--repo", str(tmp_path / "repo"),
                 "--out", str(tmp_path / "out")])
    assert code == 4  # trace stage exit code


def test_link_requires_issues_file(tmp_path):
    assert main(["fixture", "fig3", str(tmp_path / "repo")]) == 0
    code = main(["link", "--repo", str(tmp_path / "repo"),
                 "--out", str(tmp_path / "out")])
    assert code == 3


def test_missing_repo_is_config_error(workspace):
    code = main(["link", "--repo", str(workspace / "nope"),
                 "--out", str(workspace / "out")])
    assert code == 1


def test_depth_flag_changes_introducer_set(workspace):
    out = workspace / "out"
    assert main(_args(workspace, "link")) == 0
    assert main(_args(workspace, "trace", "--depth", "1")) == 0
    shallow = {(i.issue_key, i.introducing_commit)
               for i in load_introductions(out / "introducers.json")}
    assert main(_args(workspace, "trace", "--depth", "3")) == 0
    deep = {(i.issue_key, i.introducing_commit)
            for i in load_introductions(out / "introducers.json")}
    assert shallow < deep
    extra_commits = {c for _, c in deep - shallow}
    assert len(extra_commits) == 1  # exactly the commit-2 chain


def test_rerun_outputs_byte_identical(workspace):
    out = workspace / "out"
    assert main(_args(workspace, "run")) == 0
    first = {
        p.name: p.read_bytes()
        for p in out.iterdir()
        if p.name != "manifest.json"
    }
    assert main(_args(workspace, "run")) == 0
    second = {
        p.name: p.read_bytes()
        for p in out.iterdir()
        if p.name != "manifest.json"
    }
    assert first == second


def test_config_file_with_flag_overrides(workspace, tmp_path):
    config_path = tmp_path / "pipeline.yaml"
    config_path.write_text(yaml.safe_dump({
        "repo_path": str(workspace / "repo"),
        "branch": "master",
        "output_dir": str(workspace / "out"),
        "trace": {"depth": 2},
        "similarity": {"threshold": 0.4},
        "query": {"project": "JENKINS", "statuses": ["Resolved", "Closed"]},
    }))
    config = load_config(config_path)
    assert config.trace.depth == 2
    assert config.query.project == "JENKINS"
    overridden = apply_overrides(config, depth=3, worker_count=2)
    assert overridden.trace.depth == 3
    assert overridden.worker_count == 2
    assert main(["run", "--config", str(config_path)]) == 0


def test_bad_config_rejected(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump({"worker_count": 0}))
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text(yaml.safe_dump({"trace": {"nonsense": 1}}))
    with pytest.raises(ConfigError):
        load_config(p)


def test_config_digest_stable():
    assert PipelineConfig().digest() == PipelineConfig().digest()
    assert PipelineConfig().digest() != PipelineConfig(branch="dev").digest()


def test_mapdump_prints_mapping(workspace, capsys):
    repo_path = workspace / "repo"
    newest = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "master"],
        capture_output=True, text=True, check=True,
    ).stdout.strip()
    assert main(["mapdump", "--repo", str(repo_path), "--commit", newest,
                 "--path", "core/app.txt"]) == 0
    printed = capsys.readouterr().out
    assert "->" in printed and "core/app.txt" in printed


def test_manifest_self_check(workspace):
    assert main(_args(workspace, "run")) == 0
    manifest = json.loads((workspace / "out" / "manifest.json").read_text())
    reloaded = load_issues(workspace / "out" / "issues.json")
    links = load_fix_links(workspace / "out" / "fix_links.json")
    assert manifest["outputs"]["dataset.csv"]["records"] == 6
    assert len(links) == 2 and len(reloaded) == 2


def test_issues_stage_resumes_from_cursor(workspace, monkeypatch):
    """A mid-paging tracker outage leaves a cursor; the rerun resumes from
    the saved offset instead of refetching everything."""
    import threading
    from http.server import BaseHTTPRequestHandler, HTTPServer
    from urllib.parse import parse_qs, urlparse

    issues = [
        {
            "key": f"JENKINS-{n}",
            "fields": {
                "created": "2017-05-01T12:00:00.000+0000",
                "resolutiondate": "2017-06-01T12:00:00.000+0000",
                "status": {"name": "Resolved"},
                "resolution": {"name": "Fixed"},
            },
        }
        for n in range(1, 251)
    ]
    state = {"healthy_until": 100, "served_offsets": []}

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):  # noqa: N802
            qs = parse_qs(urlparse(self.path).query)
            start = int(qs.get("startAt", ["0"])[0])
            size = int(qs.get("maxResults", ["50"])[0])
            if start >= state["healthy_until"]:
                self.send_response(503)
                self.end_headers()
                return
            state["served_offsets"].append(start)
            page = issues[start : start + size]
            body = json.dumps({"startAt": start, "total": len(issues),
                               "issues": page}).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    url = f"http://127.0.0.1:{server.server_port}"
    import szzkit.issues as issues_mod

    monkeypatch.setattr(issues_mod, "BACKOFF_BASE_SECONDS", 0.01)
    out = workspace / "out"
    try:
        code = main(["issues", "--repo", str(workspace / "repo"),
                     "--out", str(out), "--tracker", url, "--jql", "project = J"])
        assert code == 2  # issues stage failure
        cursor = json.loads((out / "issues.cursor.json").read_text())
        assert cursor["start_at"] == 100
        state["healthy_until"] = 10_000  # tracker recovers
        state["served_offsets"].clear()
        code = main(["issues", "--repo", str(workspace / "repo"),
                     "--out", str(out), "--tracker", url, "--jql", "project = J"])
        assert code == 0
        assert min(state["served_offsets"]) == 100  # resumed, not restarted
        assert not (out / "issues.cursor.json").exists()
        from szzkit.issues import load_issues as _load

        reports = _load(out / "issues.json")
        assert len(reports) == 250
        assert [r.key for r in reports[:3]] == ["JENKINS-1", "JENKINS-2", "JENKINS-3"]
    finally:
        server.shutdown()


def test_bad_cutoff_rejected_as_config_error(workspace):
    code = main(_args(workspace, "link", "--cutoff", "not-a-date"))
    assert code == 1
