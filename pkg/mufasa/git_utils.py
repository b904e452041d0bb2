"""Source checkout version, read with GitPython.

:license: Apache License, Version 2.0, see LICENSE for details.
"""

import warnings
from pathlib import Path
from typing import Optional, Union

import git


class MufasaGitWarning(Warning):
    """Warning about the git state of a path"""


def get_git_repository(repo_path: Union[Path, str],
                       catch_error: bool = False) -> Optional[git.Repo]:
    """Repository containing ``repo_path``, searching parent directories.

    Warns when there is none, then returns None if ``catch_error`` is set
    and re-raises otherwise.
    """
    try:
        return git.Repo(repo_path, search_parent_directories=True)
    except (git.exc.InvalidGitRepositoryError, git.exc.NoSuchPathError):
        warnings.warn(f"Path is not a valid git repository: {repo_path}",
                      MufasaGitWarning)
        if not catch_error:
            raise
    return None


class GitRepository:
    """Read-only view of the repository holding the mufasa sources"""

    def __init__(self,
                 repo_path: Union[Path, str],
                 repo: Optional[git.Repo] = None,
                 catch_error: bool = False):
        self.repo_path = repo_path
        self.repo = repo if repo is not None else get_git_repository(
            repo_path, catch_error=catch_error
        )

    def describe(self) -> Optional[str]:
        """``git describe --tags --always --dirty``, or None without a
        repository or commits"""
        if self.repo is None:
            return None
        try:
            return self.repo.git.describe('--tags', '--always', '--dirty')
        except git.exc.GitCommandError:
            return None


def artifact_version(repo_path: Union[Path, str, None] = None) -> str:
    """Describe the source checkout, falling back to the package version"""
    from mufasa import __version__

    if repo_path is None:
        repo_path = Path(__file__).parent
    described = GitRepository(repo_path, catch_error=True).describe()
    return __version__ if described is None else described
