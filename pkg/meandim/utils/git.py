"""
Git utilities for run manifests.

The commit of the working tree is recorded next to experiment outputs so
that results can be traced back to the code that produced them.
"""

import logging
import subprocess

logger = logging.getLogger(__name__)


def get_git_commit() -> str | None:
    """
    Get the current git commit hash.

    Executes 'git rev-parse HEAD' in the current directory.

    Returns:
        The full commit hash, or None when not run from a git checkout or
        when git is unavailable

    Example:
        >>> manifest["git_commit"] = get_git_commit()
    """
    try:
        result = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True,
            text=True,
            check=True,
        )
    except (OSError, subprocess.CalledProcessError):
        logger.debug("No git commit available for the manifest")
        return None
    return result.stdout.strip()
