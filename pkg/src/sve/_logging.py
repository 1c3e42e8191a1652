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

"""Logging Utilities."""

from collections import Counter
from logging import ERROR, WARNING, Handler, LogRecord


class LevelCountHandler(Handler):
    """Count Log Records of Warning Level And Above."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._counts: Counter[int] = Counter()

    def emit(self, record: LogRecord):
        """Handle Log Record."""
        if record.levelno >= WARNING:
            self._counts[record.levelno] += 1

    @property
    def warnings(self) -> int:
        """Number of Warnings."""
        return self._counts[WARNING]

    @property
    def has_errors(self) -> bool:
        """True If An Error (Or Higher) Error Level Occurred."""
        return any(count for levelno, count in self._counts.items() if levelno >= ERROR)
