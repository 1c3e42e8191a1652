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
"""Test Solvers."""

import numpy as np
from pytest import approx, fixture, mark, raises
from scipy.special import gamma as gamma_fn
from scipy.special import rgamma

from sve.exceptions import DimensionError, InvalidParameterError, ModeError, NonFiniteStateError
from sve.harness import fit_order
from sve.mesh import build_mesh
from sve.noise import coarsen, path_seed, sample_path, sample_paths
from sve.problem import SVEProblem, example41, linear
from sve.schemes import em_solve, fast_em_solve, milstein_solve, solve


def _zero_drift(x):
    return np.zeros_like(x)


def _zero_diffusion(x):
    return np.zeros((*x.shape, 1))


def _zero_diffusion_prime(x):
    return np.zeros((*x.shape, 1, 1))


@fixture
def trivial():
    """Problem without Drift and Diffusion."""
    return SVEProblem(
        alpha=0.5,
        beta=0.1,
        x0=(2.0,),
        f=_zero_drift,
        g=_zero_diffusion,
        g_prime=_zero_diffusion_prime,
    )


def _batch(mesh, m, paths, seed=0):
    return sample_paths(mesh, m, [path_seed(seed, idx) for idx in range(paths)])


@mark.parametrize("scheme", ["em", "fast_em"])
def test_trivial(trivial, scheme):
    """Constant Solution."""
    mesh = build_mesh(1.0, 16, 2)
    inc = _batch(mesh, 1, 3).increments
    traj = solve(scheme, trivial, mesh, inc, eps=1e-6)
    assert traj.states.shape == (3, 17, 1)
    assert (traj.states == 2.0).all()
    assert traj.scheme == scheme
    assert traj.wall_time >= 0.0


def test_trivial_milstein(trivial):
    """Constant Solution of the Milstein Scheme."""
    problem = trivial.new(beta=0.0)
    mesh = build_mesh(1.0, 16, 2)
    inc = _batch(mesh, 1, 3).increments
    traj = milstein_solve(problem, mesh, inc)
    assert (traj.states == 2.0).all()


@mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_constant_drift(alpha):
    """Drift sums telescope to the exact integral."""
    problem = linear(alpha, 0.0, A=0.0, a=3.0, b=0.0, x0=1.0)
    mesh = build_mesh(1.0, 32, 2)
    traj = em_solve(problem, mesh, np.zeros((32, 1)))
    p = 1 - alpha
    expected = 1.0 + 3.0 * mesh.points**p / p
    assert traj.states[:, 0] == approx(expected, rel=1e-10)
    assert traj.final.tolist() == approx([expected[-1]])


def test_first_step():
    """First Step of EM and Fast EM coincide."""
    problem = example41(0.7, 0.2)
    mesh = build_mesh(1.0, 8, 2)
    inc = sample_path(mesh, 1, seed=3).increments
    em = em_solve(problem, mesh, inc)
    fast = fast_em_solve(problem, mesh, inc, 1e-6, cache=False)
    assert fast.states[1, 0] == approx(em.states[1, 0], rel=1e-14)


def test_batch_equals_single():
    """Batched solves equal single path solves."""
    problem = example41(0.9, 0.1)
    mesh = build_mesh(1.0, 16, 2)
    batch = _batch(mesh, 1, 4)
    traj = em_solve(problem, mesh, batch.increments)
    for idx in range(4):
        single = em_solve(problem, mesh, batch.increments[idx])
        assert np.allclose(traj.states[idx], single.states, rtol=1e-13, atol=0.0)


def test_x0_override():
    """Per-Path Initial States."""
    problem = example41(0.5, 0.0)
    mesh = build_mesh(1.0, 4, 1)
    inc = np.zeros((2, 4, 1))
    traj = em_solve(problem, mesh, inc, x0=[[0.0], [1.0]])
    assert traj.states[:, 0, 0].tolist() == [0.0, 1.0]
    # sin(0) = 0 is a fixed point
    assert (traj.states[0] == 0.0).all()


@mark.parametrize("beta", [0.0, 0.1, 0.4])
def test_fast_em(beta):
    """Fast EM deviates from EM by at most a multiple of the tolerance."""
    problem = example41(0.9, beta)
    mesh = build_mesh(1.0, 2**8, 2)
    inc = _batch(mesh, 1, 100).increments
    em = em_solve(problem, mesh, inc)
    deviations = []
    for eps in (1e-4, 1e-6, 1e-8):
        fast = fast_em_solve(problem, mesh, inc, eps, cache=False)
        deviation = np.abs(fast.states - em.states).max()
        assert deviation <= 100 * eps
        deviations.append(deviation)
    assert deviations[-1] <= deviations[0]


def test_milstein_without_correction():
    """Milstein equals EM for constant diffusion."""
    problem = linear(0.6, 0.0, A=-1.0, B=0.0, b=0.5)
    mesh = build_mesh(1.0, 32, 2)
    inc = _batch(mesh, 1, 10).increments
    em = em_solve(problem, mesh, inc)
    mil = milstein_solve(problem, mesh, inc)
    assert np.allclose(mil.states, em.states, rtol=1e-12, atol=1e-14)
    assert mil.scheme == "milstein"


def test_milstein_one_step():
    """Single Milstein Step of `dX = X dW`."""
    problem = linear(0.5, 0.0, A=0.0, B=1.0, b=0.0, x0=1.0)
    mesh = build_mesh(1.0, 1, 1)
    dW = 0.3
    traj = milstein_solve(problem, mesh, np.array([[dW]]))
    assert traj.final[0] == approx(1.0 + dW + 0.5 * (dW**2 - 1.0), rel=1e-14)


def test_iterated_integral_moment():
    """Second Moment of the iterated integral `(dW^2 - h) / 2` is `h^2 / 2`."""
    mesh = build_mesh(1.0, 100_000, 1)
    h = mesh.step(1)
    dW = sample_path(mesh, 1, seed=9).increments[:, 0]
    iterated = 0.5 * (dW**2 - h)
    assert np.mean(iterated) == approx(0.0, abs=5 * h / np.sqrt(mesh.N))
    assert np.mean(iterated**2) == approx(h**2 / 2, rel=0.05)


def test_milstein_subsampled_single():
    """One fine step per step reproduces EM."""
    problem = example41(0.5, 0.0)
    mesh = build_mesh(1.0, 16, 1)
    path = _batch(mesh, 1, 5)
    em = em_solve(problem, mesh, path.increments)
    mil = milstein_solve(problem, mesh, path.increments, mode="subsampled", fine_path=path)
    assert np.allclose(mil.states, em.states, rtol=1e-12, atol=1e-14)


def test_milstein_subsampled_convergence():
    """Subsampled Milstein approaches exact Milstein as the sub-grid gets finer."""
    problem = example41(0.5, 0.0)
    mesh = build_mesh(1.0, 8, 1)
    fine_mesh = build_mesh(1.0, 8 * 64, 1)
    fine = _batch(fine_mesh, 1, 500, seed=4)
    inc = coarsen(fine, 8)
    exact = milstein_solve(problem, mesh, inc)
    deviations = []
    for k_inner in (4, 16, 64):
        sub_inc = coarsen(fine, 8 * k_inner)
        sub = milstein_solve(problem, mesh, inc, mode="subsampled", k_inner=k_inner, fine_path=sub_inc)
        deviations.append(np.sqrt(np.mean((sub.final - exact.final) ** 2)))
    assert deviations[0] > deviations[1] > deviations[2]


def test_milstein_subsampled_kernel():
    """Subsampled Milstein with singular diffusion kernel stays close to EM."""
    problem = example41(0.9, 0.1)
    mesh = build_mesh(1.0, 8, 2)
    fine = _batch(build_mesh(1.0, 64, 2), 1, 20, seed=2)
    inc = coarsen(fine, 8)
    em = em_solve(problem, mesh, inc)
    mil = milstein_solve(problem, mesh, inc, mode="subsampled", fine_path=fine)
    assert mil.states.shape == em.states.shape
    assert np.isfinite(mil.states).all()
    assert np.abs(mil.final - em.final).max() < 1.0


def test_milstein_modes():
    """Modes that do not fit the problem."""
    mesh = build_mesh(1.0, 4, 1)
    inc = np.zeros((4, 1))
    with raises(ModeError):
        milstein_solve(example41(0.5, 0.1), mesh, inc)
    with raises(ModeError):
        milstein_solve(example41(0.5, 0.0).new(g_prime=None), mesh, inc)
    with raises(ModeError):
        milstein_solve(example41(0.5, 0.1), mesh, inc, mode="subsampled")
    with raises(ModeError):
        milstein_solve(example41(0.5, 0.0), mesh, inc, mode="other")
    with raises(ModeError):
        milstein_solve(linear(0.5, 0.0, b=np.ones((1, 2))), mesh, np.zeros((4, 2)))


def test_milstein_fine_path_invalid():
    """Fine Paths that do not refine the increments."""
    mesh = build_mesh(1.0, 4, 1)
    problem = example41(0.5, 0.1)
    fine = sample_path(build_mesh(1.0, 16, 1), 1, seed=1)
    with raises(DimensionError):
        milstein_solve(problem, mesh, coarsen(fine, 4), mode="subsampled", fine_path=np.zeros((6, 1)))
    with raises(DimensionError):
        milstein_solve(problem, mesh, coarsen(fine, 4), mode="subsampled", k_inner=2, fine_path=fine)
    with raises(DimensionError):
        milstein_solve(problem, mesh, np.zeros((4, 1)), mode="subsampled", fine_path=fine)


def test_dimension_errors():
    """Mismatching Shapes and Horizons."""
    problem = example41(0.5, 0.1)
    with raises(DimensionError):
        em_solve(problem, build_mesh(1.0, 4, 1), np.zeros((5, 1)))
    with raises(DimensionError):
        em_solve(problem, build_mesh(1.0, 4, 1), np.zeros((4, 2)))
    with raises(DimensionError):
        em_solve(problem, build_mesh(1.0, 4, 1), np.zeros((3, 4, 1)), x0=np.zeros((2, 1)))
    with raises(InvalidParameterError):
        em_solve(problem, build_mesh(2.0, 4, 1), np.zeros((4, 1)))


def test_non_finite():
    """Overflow is reported with step and paths."""
    problem = linear(0.5, 0.0, A=1e200, b=0.0, x0=1.0)
    mesh = build_mesh(1.0, 4, 1)
    inc = np.zeros((3, 4, 1))
    with raises(NonFiniteStateError) as exc:
        em_solve(problem, mesh, inc, x0=[[0.0], [1e200], [0.0]])
    assert exc.value.step == 1
    assert exc.value.paths == (1,)
    assert exc.value.exit_code == 2


def test_solve():
    """Dispatch."""
    problem = example41(0.5, 0.0)
    mesh = build_mesh(1.0, 4, 1)
    inc = np.zeros((4, 1))
    assert solve("milstein", problem, mesh, inc).scheme == "milstein"
    with raises(InvalidParameterError):
        solve("fast_em", problem, mesh, inc)
    with raises(InvalidParameterError):
        solve("other", problem, mesh, inc)


def _mittag_leffler(mu, z, terms=200):
    """`E_mu(z)` by its power series, for moderate `|z|`."""
    k = np.arange(terms)
    return np.sum(np.power.outer(z, k) * rgamma(mu * k + 1), axis=-1)


@mark.parametrize("alpha,A", [(0.5, -1.0), (0.8, -0.1)])
def test_em_deterministic_resolvent(alpha, A):
    """Without noise EM converges to the Mittag-Leffler solution of the linear equation."""
    problem = linear(alpha, 0.0, A=A, B=0.0, b=0.0)
    levels = [2**k for k in range(6, 11)]
    errors = []
    for N in levels:
        mesh = build_mesh(1.0, N, 1)
        traj = em_solve(problem, mesh, np.zeros((N, 1)))
        z = A * gamma_fn(1 - alpha) * mesh.points ** (1 - alpha)
        exact = _mittag_leffler(1 - alpha, z)
        errors.append(np.abs(traj.states[:, 0] - exact).max())
    assert errors[-1] < errors[0]
    assert fit_order(levels, errors) >= min(2 * (1 - alpha), 1) - 0.15
