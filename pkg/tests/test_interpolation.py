import numpy as np
import pytest

from indefspline import numkernel as nk
from indefspline.errors import DegenerateParameter, HypothesisError, NoSolution
from indefspline.instances import random_instance
from indefspline.interpolation import (InterpolationProblem, analyze_TNV, bridge_w0_to_z0,
                                       bridge_z0_to_w0, constraint_subspaces, equality_case,
                                       image_of_kernel, interp_exists, interpolation_conditions,
                                       solve_interpolation)
from indefspline.krein import KreinSpace
from indefspline.pencil import ProblemData
from indefspline.smoothing import SmoothingProblem, normal_residual

E = np.eye(3)


def span(*cols):
    return nk.span(np.column_stack(cols))


def test_constraint_subspaces_d2(D2):
    NV, W, N0 = constraint_subspaces(D2)
    assert nk.equal(NV, span(E[2]))
    assert nk.equal(W, span(E[0], E[1]))
    assert N0.is_zero


def test_constraint_subspaces_d3(D3):
    NV, W, N0 = constraint_subspaces(D3)
    assert nk.equal(NV, span(E[1] + E[2]))
    assert np.allclose(D3.A, np.diag([1, 1, -1]))
    assert nk.equal(W, span(E[0], E[1] + E[2]))
    assert nk.equal(N0, NV)


def test_invertible_V():
    data = ProblemData(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]),
                       KreinSpace.hilbert(2), KreinSpace.diagonal([1, -1]))
    NV, W, N0 = constraint_subspaces(data)
    assert NV.is_zero and W.is_full and N0.is_zero
    sp = solve_interpolation(InterpolationProblem(data, [1.0, 2.0]))
    assert sp.dim == 0
    assert np.allclose(data.V @ sp.particular, [1, 2])


def test_existence_examples(D2, D3):
    rng = np.random.default_rng(0)
    assert interp_exists(InterpolationProblem(D2, rng.standard_normal(2)))
    assert interp_exists(InterpolationProblem(D3, [1.0, 0.0]))
    assert not interp_exists(InterpolationProblem(D3, [0.0, 1.0]))
    assert interp_exists(InterpolationProblem(D3, [0.0, 0.0]))
    with pytest.raises(NoSolution):
        solve_interpolation(InterpolationProblem(D3, [0.0, 1.0]))


def test_solutions_d2_d3(D2, D3):
    sp = solve_interpolation(InterpolationProblem(D2, [2.0, -3.0]))
    assert np.allclose(sp.particular, [2, -3, 0]) and sp.dim == 0
    sp = solve_interpolation(InterpolationProblem(D3, [1.0, 0.0]))
    assert np.allclose(sp.particular, [1, 0, 0], atol=1e-12)
    assert nk.equal(sp.directions, span(E[1] + E[2]))
    for t in (-2.0, 0.5, 3.0):
        assert interpolation_conditions(D3, sp.particular + t * (E[1] + E[2]), [1.0, 0.0])
    sp = solve_interpolation(InterpolationProblem(D3, [0.0, 0.0]))
    assert np.allclose(sp.particular, 0) and nk.equal(sp.directions, constraint_subspaces(D3).N0)


def test_hypothesis_failure_reported():
    # T(N(V)) = span{e2} is negative in K = diag(1, -1)
    data = ProblemData(np.eye(2), np.array([[1.0, 0.0]]), KreinSpace.diagonal([1, -1]),
                       KreinSpace.hilbert(1))
    with pytest.raises(HypothesisError, match="not nonnegative"):
        interp_exists(InterpolationProblem(data, [1.0]))


def test_tnv_reports(D2, D3):
    r = analyze_TNV(D2)
    assert r.nondegenerate and r.uniformly_positive and r.regular and r.consistent
    r = analyze_TNV(D3)
    assert r.TNV.dim == 1 and not r.nondegenerate and not r.regular
    assert nk.equal(r.isotropic, r.TNV) and r.isotropic_is_T_N0 and r.consistent
    data = ProblemData(np.eye(2), np.eye(2), KreinSpace.hilbert(2), KreinSpace.diagonal([1, -1]))
    r = analyze_TNV(data)
    assert r.TNV.is_zero and r.regular and r.consistent
    assert image_of_kernel(data).is_zero


@pytest.mark.parametrize("seed", range(30))
def test_tnv_characterizations_random(seed):
    kind = ("indefinite", "degenerate_tnv", "semidefinite", "kernel", "endpoint")[seed % 5]
    data = random_instance(seed, 3 + seed % 6, kind).problem()
    r = analyze_TNV(data)
    assert r.isotropic_is_T_N0
    assert r.decomposition_verified
    assert r.nondegenerate == r.nondegenerate_rhs
    assert r.regular == r.regular_rhs


def test_bridge_z2w_d1(D1):
    c = bridge_z0_to_w0(SmoothingProblem(D1, 1.0, [1, 1]))
    assert np.allclose(c.vector, [0.5, -1 / 3])
    assert c.inclusion and not c.strict and c.sp.equals(c.sm, D1.tol)
    c = bridge_z0_to_w0(SmoothingProblem(D1, 4.0, [1, 0]))
    assert np.allclose(c.vector, [0.8, 0])
    assert c.inclusion and c.strict
    assert c.sp.dim == 0 and c.sm.dim == 1
    c = bridge_z0_to_w0(SmoothingProblem(D1, 4.0, [0, 0]))
    assert np.allclose(c.vector, 0)


def test_bridge_w2z_d2(D2):
    c = bridge_w0_to_z0(InterpolationProblem(D2, [1.0, 1.0]), 0.5)
    assert np.max(np.abs(c.vector - [3, -1])) <= 1e-10
    assert np.allclose(c.sp.particular, [1, 1, 0])
    assert np.allclose(D2.pencil(0.5) @ c.sp.particular, [1.5, 0.5, 0])
    assert c.inclusion
    c = bridge_w0_to_z0(InterpolationProblem(D2, [0.0, 0.0]), 0.5)
    assert np.allclose(c.vector, 0)
    with pytest.raises(DegenerateParameter):
        bridge_w0_to_z0(InterpolationProblem(D2, [1.0, 1.0]), 0.0)
    with pytest.raises(HypothesisError):
        bridge_w0_to_z0(InterpolationProblem(D2, [1.0, 1.0]), 2.0)


def test_bridge_round_trip_d1(D1):
    w0 = bridge_z0_to_w0(SmoothingProblem(D1, 1.0, [1, 1])).vector
    c = bridge_w0_to_z0(InterpolationProblem(D1, w0), 1.0)
    assert c.sm.contains(np.array([0.5, -1 / 3]), D1.tol)


@pytest.mark.parametrize("seed", range(20))
def test_bridges_random(seed):
    kind = ("indefinite", "endpoint", "kernel", "indefinite")[seed % 4]
    inst = random_instance(seed, 3 + seed % 6, kind)
    data = inst.problem()
    c = bridge_z0_to_w0(SmoothingProblem(data, inst.rho, inst.z0), samples=20, seed=seed)
    assert c.max_residual <= 1e-8 and c.inclusion and c.points_checked == 20
    c = bridge_w0_to_z0(InterpolationProblem(data, inst.w0), inst.rho, samples=20, seed=seed)
    assert c.inclusion
    P = SmoothingProblem(data, inst.rho, c.vector)
    rng = np.random.default_rng(seed)
    assert all(normal_residual(P, x) <= 1e-8 for x in c.sp.sample(20, rng).T)


def test_equality_case_d1(D1):
    assert equality_case(D1, 1.0)
    assert not equality_case(D1, 4.0)
    assert not equality_case(D1, 5.0)


@pytest.mark.parametrize("seed", range(12))
def test_equality_case_gives_equal_manifolds(seed):
    inst = random_instance(seed, 3 + seed % 6, ("indefinite", "kernel")[seed % 2])
    data = inst.problem()
    if not equality_case(data, inst.rho):
        pytest.skip("equality hypothesis not met")
    c = bridge_z0_to_w0(SmoothingProblem(data, inst.rho, inst.z0))
    assert c.sp.angle_to(c.sm) <= 1e-8 and c.sp.equals(c.sm, data.tol)
    c = bridge_w0_to_z0(InterpolationProblem(data, inst.w0), inst.rho)
    assert c.sp.angle_to(c.sm) <= 1e-8 and c.sp.equals(c.sm, data.tol)
