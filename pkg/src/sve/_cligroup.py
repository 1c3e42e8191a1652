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

"""Command Line Interface - Main Group."""

import click
from pydantic import ValidationError

from .exceptions import SVEError
from .logging import LOGGER

EXIT_CODE = "sve.exit_code"
"""Key of the mapped Exit Code in `click.Context.meta`."""


class MainGroup(click.Group):
    """
    Main Command Group mapping Errors to Exit Codes.

    * `0`: success
    * `1`: invalid parameters and configurations
    * `2`: numerical failures
    * `3`: sum-of-exponentials certification failures
    """

    def invoke(self, ctx):
        """Invoke Command and map Errors."""
        try:
            return super().invoke(ctx)
        except SVEError as exc:
            LOGGER.error("%s", exc)
            ctx.meta[EXIT_CODE] = exc.exit_code
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            LOGGER.error("%s", exc)
            ctx.exit(1)
        except click.UsageError as exc:
            exc.show()
            ctx.exit(1)
