import pytest

from szzkit.fixtures import build_repo, fig3_reports, fig3_script


@pytest.fixture(scope="session")
def fig3(tmp_path_factory):
    """The six-commit golden fixture: (repo, commits oldest-first, reports)."""
    repo = build_repo(fig3_script(), tmp_path_factory.mktemp("fig3") / "repo")
    commits = list(reversed(repo.list_commits("master")))
    yield repo, commits, fig3_reports()
    repo.close()


@pytest.fixture(scope="session")
def fig3_repo(fig3):
    return fig3[0]
