import warnings

import numpy as np
import pytest

from oracles import dense_diffs, dense_hsstv

from hsstv.cube import CubeDims, HsCube, ShapeError, constant_cube
from hsstv.linops import (ConvergenceWarning, DiffAxis, SamplingMask, StackedDiffOperator,
                          apply_A, apply_A_adjoint, apply_sampling, apply_sampling_adjoint,
                          build_fft_symbol, cg_solve, diff_adjoint, diff_forward,
                          solve_regularized_normal)

AXES = list(DiffAxis)


def test_diff_of_constant_is_zero():
    c = constant_cube(CubeDims(3, 4, 2), 0.7)
    for ax in AXES:
        assert np.all(diff_forward(c, ax).data == 0)


def test_diff_horizontal_wraps():
    u = HsCube(CubeDims(1, 4, 1), [1, 2, 3, 4])
    assert diff_forward(u, DiffAxis.HORIZONTAL).data.tolist() == [1, 1, 1, -3]


def test_diff_outputs_telescope(rng):
    u = HsCube(CubeDims(4, 4, 3), rng.standard_normal(48))
    for ax in AXES:
        out = diff_forward(u, ax).array
        assert np.allclose(out.sum(axis=int(ax)), 0, atol=1e-12)


def test_diff_adjoint_examples():
    dims = CubeDims(1, 4, 1)
    assert np.all(diff_adjoint(constant_cube(dims, 0.0), DiffAxis.HORIZONTAL).data == 0)
    # row j of D^T is column j of D: (D^T e1)_k = D[0, k]
    out = diff_adjoint(HsCube(dims, [1, 0, 0, 0]), DiffAxis.HORIZONTAL).data
    assert out.tolist() == [-1, 1, 0, 0]


@pytest.mark.parametrize("shape", [(3, 3, 2), (4, 5, 3), (2, 1, 4)])
def test_diffs_match_dense_matrices(shape, rng):
    dims = CubeDims(*shape)
    x = rng.standard_normal(dims.nb)
    y = rng.standard_normal(dims.nb)
    for ax, mat in zip(AXES, dense_diffs(dims)):
        assert np.allclose(diff_forward(HsCube(dims, x), ax).data, mat @ x, atol=1e-13)
        assert np.allclose(diff_adjoint(HsCube(dims, y), ax).data, mat.T @ y, atol=1e-13)


def test_apply_A_matches_dense(rng):
    dims = CubeDims(3, 3, 2)
    op = StackedDiffOperator(dims, 0.04)
    x = rng.standard_normal(dims.nb)
    y = rng.standard_normal(4 * dims.nb)
    big = dense_hsstv(dims, 0.04)
    assert np.allclose(apply_A(x, op), big @ x, atol=1e-13)
    assert np.allclose(apply_A_adjoint(y, op).data, big.T @ y, atol=1e-13)


def test_apply_A_trivial_cases(rng):
    dims = CubeDims(3, 3, 2)
    assert np.all(apply_A(constant_cube(dims, 2.0), StackedDiffOperator(dims, 0.5)) == 0)
    op0 = StackedDiffOperator(dims, 0.0)
    out = apply_A(HsCube(dims, rng.standard_normal(dims.nb)), op0)
    assert out.size == 4 * dims.nb and np.all(out[2 * dims.nb:] == 0)
    y = np.zeros(4 * dims.nb)
    assert np.all(apply_A_adjoint(y, op0).data == 0)
    y[2 * dims.nb:] = rng.standard_normal(2 * dims.nb)
    assert np.all(apply_A_adjoint(y, op0).data == 0)
    with pytest.raises(ShapeError):
        apply_A_adjoint(np.zeros(3), op0)
    with pytest.raises(ShapeError):
        apply_A(np.zeros(5), op0)


def test_sampling_operator(rng):
    dims = CubeDims(4, 3, 2)
    u = HsCube(dims, rng.standard_normal(dims.nb))
    full = SamplingMask.full(dims)
    assert np.array_equal(apply_sampling(u, full), u.data)
    mask = SamplingMask(dims, np.sort(rng.choice(dims.nb, 10, replace=False)))
    v = rng.standard_normal(10)
    assert np.array_equal(apply_sampling(apply_sampling_adjoint(v, mask), mask), v)
    back = apply_sampling_adjoint(apply_sampling(u, mask), mask).data
    dropped = np.setdiff1d(np.arange(dims.nb), mask.indices)
    assert np.all(back[dropped] == 0)
    assert np.array_equal(back[mask.indices], u.data[mask.indices])
    with pytest.raises(ShapeError):
        apply_sampling_adjoint(np.zeros(3), mask)


def test_sampling_mask_validation():
    dims = CubeDims(2, 2, 1)
    with pytest.raises(ValueError):
        SamplingMask(dims, [])
    with pytest.raises(ValueError):
        SamplingMask(dims, [2, 1])
    with pytest.raises(IndexError):
        SamplingMask(dims, [0, 4])
    m = SamplingMask.from_kept(dims, [1, 4])
    assert m.indices.tolist() == [0, 3] and m.kept.tolist() == [1, 4] and m.rate == 0.5


def test_symbol_properties():
    dims = CubeDims(4, 4, 3)
    sym = build_fft_symbol(StackedDiffOperator(dims, 0.3))
    assert sym.values.shape == dims.shape
    assert sym.values[0, 0, 0] == 0 and np.all(sym.values >= 0)
    # with omega = 0 only the spatio-spectral products remain
    s0 = build_fft_symbol(StackedDiffOperator(dims, 0.0)).values
    assert np.all(s0[:, :, 0] == 0) and np.all(s0[0, 0, :] == 0)


@pytest.mark.parametrize("omega", [0.0, 0.04, 1.0])
def test_symbol_reproduces_gram(omega, rng):
    dims = CubeDims(4, 4, 3)
    op = StackedDiffOperator(dims, omega)
    sym = build_fft_symbol(op).values
    for _ in range(5):
        x = rng.standard_normal(dims.nb)
        x3 = x.reshape(dims.shape, order="F")
        via_fft = np.real(np.fft.ifftn(sym * np.fft.fftn(x3))).ravel(order="F")
        ref = op.gram(x)
        assert np.linalg.norm(via_fft - ref) <= 1e-9 * np.linalg.norm(ref)


@pytest.mark.parametrize("shape", [(4, 4, 3), (3, 5, 2), (2, 3, 5)])
@pytest.mark.parametrize("c", [1.0, 1.5, 2.0])
def test_solve_matches_dense_lu(shape, c, rng):
    import scipy.linalg

    dims = CubeDims(*shape)
    op = StackedDiffOperator(dims, 0.04)
    big = dense_hsstv(dims, 0.04)
    lu = scipy.linalg.lu_factor(big.T @ big + c * np.eye(dims.nb))
    sym = op.symbol()
    for _ in range(3):
        b = rng.standard_normal(dims.nb)
        ref = scipy.linalg.lu_solve(lu, b)
        x = solve_regularized_normal(b, sym, c)
        assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)


def test_solve_round_trip_and_zero(rng):
    dims = CubeDims(5, 4, 3)
    op = StackedDiffOperator(dims, 0.1)
    sym = op.symbol()
    x0 = rng.standard_normal(dims.nb)
    b = 1.5 * x0 + op.gram(x0)
    assert np.linalg.norm(solve_regularized_normal(b, sym, 1.5) - x0) <= 1e-8 * np.linalg.norm(x0)
    assert np.all(solve_regularized_normal(np.zeros(dims.nb), sym, 2.0) == 0)
    with pytest.raises(ValueError):
        solve_regularized_normal(b, sym, 0.0)


def test_cg_examples(rng):
    b = rng.standard_normal(7)
    x, info = cg_solve(lambda v: 2 * v, b)
    assert np.allclose(x, b / 2, rtol=1e-12) and info.converged
    m = rng.standard_normal((5, 5))
    spd = m.T @ m + np.eye(5)
    b = rng.standard_normal(5)
    x, info = cg_solve(lambda v: spd @ v, b, tol=1e-12)
    ref = np.linalg.solve(spd, b)
    assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)
    x, info = cg_solve(lambda v: spd @ v, np.zeros(5))
    assert np.all(x == 0) and info.iterations == 1


def test_cg_reports_non_convergence(rng):
    m = rng.standard_normal((30, 30))
    spd = m.T @ m + 1e-3 * np.eye(30)
    with pytest.warns(ConvergenceWarning):
        _, info = cg_solve(lambda v: spd @ v, rng.standard_normal(30), tol=1e-14, max_iter=3)
    assert not info.converged and info.iterations == 3 and info.residual > 0


def test_cg_on_operator_gram_matches_fft(rng):
    dims = CubeDims(4, 4, 3)
    op = StackedDiffOperator(dims, 0.04)
    b = rng.standard_normal(dims.nb)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        x, info = cg_solve(lambda v: op.gram(v) + 1.5 * v, b, tol=1e-12)
    ref = solve_regularized_normal(b, op.symbol(), 1.5)
    assert np.linalg.norm(x - ref) <= 1e-9 * np.linalg.norm(ref)
