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
Experiments at reduced scale.

These take minutes and are skipped by default. Run with `pytest -m slow`.
"""

import numpy as np
from pytest import approx, mark

from sve.config import ExperimentConfig
from sve.harness import bench_cpu, regularity_probe, run_convergence
from sve.mesh import build_mesh
from sve.noise import path_seed, sample_paths
from sve.problem import example41
from sve.schemes import em_solve, fast_em_solve

LEVELS = (64, 128, 256, 512)
N_REF = 2**12


def _converge(scheme, alpha, beta, r, **kwargs):
    config = ExperimentConfig(
        scheme=scheme, alpha=alpha, beta=beta, r=r, levels=LEVELS, n_ref=N_REF, paths=1000, seed=1, **kwargs
    )
    return run_convergence(config)


@mark.slow
@mark.parametrize(
    "alpha,beta,r,order_end,order_max",
    [
        (0.9, 0.1, 1.0, 0.4, 0.2),
        (0.9, 0.1, 2.0, 0.4, 0.4),
        (0.8, 0.1, 1.0, 0.4, None),
        (0.8, 0.1, 2.0, 0.4, None),
    ],
)
def test_em_orders(alpha, beta, r, order_end, order_max):
    """EM Convergence Orders."""
    report = _converge("em", alpha, beta, r)
    assert report.order_end == approx(order_end, abs=0.15)
    if order_max is not None:
        tolerance = 0.1 if order_max < 0.3 else 0.15  # noqa: PLR2004
        assert report.order_max == approx(order_max, abs=tolerance)


@mark.slow
@mark.parametrize(
    "alpha,r,order_end,order_max",
    [
        (0.9, 1.0, 0.6, 0.2),
        (0.9, 3.0, 0.6, 0.6),
        (0.5, 1.0, 1.0, None),
        (0.5, 3.0, 1.0, None),
    ],
)
def test_milstein_orders(alpha, r, order_end, order_max):
    """Milstein Convergence Orders."""
    report = _converge("milstein", alpha, 0.0, r)
    assert report.reference == "milstein"
    assert report.order_end == approx(order_end, abs=0.15)
    if order_max is not None:
        tolerance = 0.1 if order_max < 0.3 else 0.15  # noqa: PLR2004
        assert report.order_max == approx(order_max, abs=tolerance)


@mark.slow
def test_milstein_beats_em():
    """Milstein converges faster than EM at the horizon if the noise is multiplicative."""
    coefs = (("A", -0.01), ("B", 1.0), ("b", 0.0))
    em = _converge("em", 0.9, 0.0, 1.0, preset="linear", coefs=coefs)
    milstein = _converge("milstein", 0.9, 0.0, 1.0, preset="linear", coefs=coefs)
    assert milstein.order_end >= em.order_end + 0.1
    assert all(m.err_end < e.err_end for m, e in zip(milstein.rows, em.rows, strict=True))


@mark.slow
def test_milstein_em_example41():
    """For the scalar test problem both schemes are still pre-asymptotic at these levels."""
    em = _converge("em", 0.9, 0.0, 1.0)
    milstein = _converge("milstein", 0.9, 0.0, 1.0)
    assert em.order_end == approx(0.6, abs=0.1)
    assert milstein.order_end == approx(0.6, abs=0.1)


@mark.slow
def test_fast_em_tolerance():
    """Fast EM deviation scales with the tolerance."""
    problem = example41(0.9, 0.1)
    mesh = build_mesh(1.0, 2**8, 2)
    increments = sample_paths(mesh, 1, [path_seed(0, idx) for idx in range(100)]).increments
    em = em_solve(problem, mesh, increments)
    epsilons = (1e-4, 1e-6, 1e-8)
    deviations = [np.abs(fast_em_solve(problem, mesh, increments, eps).states - em.states).max() for eps in epsilons]
    for eps, deviation in zip(epsilons, deviations, strict=True):
        assert deviation <= 100 * eps
    slope = np.polyfit(np.log(epsilons), np.log(deviations), 1)[0]
    assert slope == approx(1.0, abs=0.2)


@mark.slow
def test_bench_scaling():
    """EM run time grows quadratically, fast EM almost linearly."""
    config = ExperimentConfig(alpha=0.9, beta=0.1, r=2.0, levels=(2**7, 2**11), n_ref=2**11, paths=2000)
    report = bench_cpu(config, levels=[2**k for k in range(7, 12)], repeats=5)
    assert report.em_slope >= 1.8
    assert report.fast_em_slope <= 1.3
    assert report.rows[-1].fast_em_s < report.rows[-1].em_s


@mark.slow
def test_regularity():
    """Hoelder Exponents in the interior and near the origin."""
    report = regularity_probe(example41(0.9, 0.1), N_REF, 10_000, seed=2)
    assert report.interior_exponent == approx(0.4, abs=0.08)
    assert report.origin_exponent == approx(0.1, abs=0.08)
