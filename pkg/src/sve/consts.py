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

"""Constants."""

from typing import Literal

Scheme = Literal["em", "fast_em", "milstein"]
"""Time Stepping Schemes."""

MilsteinMode = Literal["exact", "subsampled"]
"""Milstein Evaluation of the Iterated Stochastic Integrals."""

N_REF_EXP: int = 13
"""Default Reference Resolution Exponent (N_ref = 2**13)."""

PATHS: int = 5000
"""Default Number of Monte Carlo Paths."""

EPS: float = 1e-6
"""Default Sum-of-Exponentials Tolerance."""

MOMENT: float = 2.0
"""Default Error Moment."""

CHUNK_SIZE: int = 100
"""Paths Solved Together In One Vectorized Pass."""

MAX_FAILED_FRACTION: float = 1e-3
"""Fraction of failed Paths tolerated before aborting."""

VERIFY_GRID: int = 10_000
"""Default Number of Grid Points for SOE Certification."""

ORIGIN_WINDOW: float = 2.0**-24
"""Fraction of the Horizon covered by the near-origin Regularity Family."""

ORIGIN_STEPS: int = 2**9
"""Uniform Steps of the near-origin Regularity Family."""
