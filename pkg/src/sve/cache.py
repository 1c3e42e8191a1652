#
# MIT License
#
# Copyright (c) 2024 nbiotcloud
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
#
"""
Cache.

Certified sum-of-exponentials approximations are expensive to build and depend on four numbers
only. They are stored on disk, below `~/.cache/sve` or the directory named by the environment
variable `SVE_CACHE`. An empty `SVE_CACHE` disables the disk cache, so does a path which cannot
be created.
"""

import os
from pathlib import Path
from shutil import rmtree

from anycache import AnyCache
from pydantic import BaseModel

from .logging import LOGGER

CACHE_MAXSIZE = 10 * 1024 * 1024
"""Disk Space for Approximations in Bytes."""


class Cache(BaseModel):
    """
    Disk Cache.

    Attributes:
        path: Base Directory. `None` if caching is disabled.
    """

    path: Path | None

    @classmethod
    def init(cls) -> "Cache":
        """Create from Environment."""
        return cls(path=get_cachepath())

    def disable(self):
        """Disable Caching for the rest of the process."""
        self.path = None

    def clear(self):
        """Remove all cached Data."""
        if self.path is not None:
            rmtree(self.path, ignore_errors=True)

    @property
    def soe_cache(self) -> AnyCache:
        """Cache for Sum-of-Exponentials Approximations."""
        if self.path is None:
            return AnyCache(maxsize=0)
        return AnyCache(cachedir=self.path / "soe", maxsize=CACHE_MAXSIZE)


def get_cachepath() -> Path | None:
    """Base Directory from `SVE_CACHE`, created if missing."""
    envvar = os.environ.get("SVE_CACHE")
    if envvar == "":
        return None
    if envvar is None:
        try:
            path = Path.home() / ".cache" / "sve"
        except RuntimeError:  # pragma: no cover
            return None
    else:
        path = Path(envvar)
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / ".initialized").touch()
    except OSError as exc:
        LOGGER.debug("Cache disabled: %s", exc)
        return None
    return path


CACHE = Cache.init()
"""Process-wide Cache."""
