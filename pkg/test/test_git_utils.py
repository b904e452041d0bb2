from pathlib import Path

import git
import pytest

import mufasa
from mufasa.git_utils import (
    GitRepository,
    MufasaGitWarning,
    artifact_version,
    get_git_repository,
)


@pytest.fixture
def committed_repo(tmp_path):
    """Repository with one committed file"""
    repo_path = tmp_path / "checkout"
    repo = git.Repo.init(repo_path, initial_branch='main')
    tracked = repo_path / "tracked.txt"
    tracked.write_text("first")
    repo.index.add([str(tracked)])
    repo.index.commit("First commit")
    return repo


def test_get_git_repository_warns_and_returns_none(tmp_path):
    plain_dir = tmp_path / "plain"
    plain_dir.mkdir()
    match = f"Path is not a valid git repository: {plain_dir}"
    with pytest.warns(MufasaGitWarning, match=match):
        assert get_git_repository(plain_dir, catch_error=True) is None


def test_get_git_repository_reraises(tmp_path):
    with pytest.warns(MufasaGitWarning):
        with pytest.raises(git.exc.NoSuchPathError):
            get_git_repository(tmp_path / "missing")


def test_describe_untagged_commit(committed_repo):
    repo_path = committed_repo.working_tree_dir
    described = GitRepository(repo_path).describe()
    assert committed_repo.head.commit.hexsha.startswith(described)


def test_describe_marks_dirty_tree(committed_repo):
    repo_path = committed_repo.working_tree_dir
    (Path(repo_path) / "tracked.txt").write_text("edited")
    assert GitRepository(repo_path).describe().endswith("-dirty")


def test_describe_prefers_tag(committed_repo):
    committed_repo.create_tag("v1.2")
    assert GitRepository(committed_repo.working_tree_dir).describe() == "v1.2"


def test_describe_without_commits(tmp_path):
    git.Repo.init(tmp_path / "empty", initial_branch='main')
    assert GitRepository(tmp_path / "empty").describe() is None


def test_artifact_version_falls_back_to_package_version(tmp_path):
    with pytest.warns(MufasaGitWarning):
        assert artifact_version(tmp_path) == mufasa.__version__


def test_artifact_version_uses_describe(committed_repo):
    committed_repo.create_tag("v0.9")
    assert artifact_version(committed_repo.working_tree_dir) == "v0.9"
