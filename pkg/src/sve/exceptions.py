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

"""Exceptions.

Every exception carries the exit code used by the command line interface.
"""


class SVEError(Exception):
    """Base of all Errors."""

    exit_code: int = 1


class InvalidParameterError(SVEError, ValueError):
    """Invalid Parameter."""


class IndexOutOfRangeError(InvalidParameterError, IndexError):
    """Mesh Index Out Of Range."""


class DimensionError(InvalidParameterError):
    """Shape of Increments or States does not match."""


class ModeError(InvalidParameterError):
    """Scheme Mode does not fit Problem Parameters."""


class NumericalError(SVEError, ArithmeticError):
    """Numerical Failure."""

    exit_code: int = 2


class NonFiniteStateError(NumericalError):
    """
    State Overflow or NaN.

    Attributes:
        step: Mesh index of the first non-finite state.
        paths: Batch positions which failed on `step`.
    """

    def __init__(self, step: int, paths: tuple[int, ...] = ()):
        where = f" (paths {', '.join(str(path) for path in paths[:8])})" if paths else ""
        super().__init__(f"Non-finite state at step {step}{where}")
        self.step = step
        self.paths = paths


class FailedPathsError(NumericalError):
    """Too many Monte Carlo Paths failed."""


class QuadratureError(NumericalError):
    """Adaptive Quadrature did not converge."""


class SOEBuildError(SVEError, RuntimeError):
    """
    Sum-of-Exponentials Certification Failed.

    Attributes:
        achieved: Smallest maximum error reached.
    """

    exit_code: int = 3

    def __init__(self, msg: str, achieved: float):
        super().__init__(msg)
        self.achieved = achieved
