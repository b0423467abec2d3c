import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cgauss
from indefspline import numkernel as nk
from indefspline.errors import ValidationError
from indefspline.instances import random_gram
from indefspline.krein import (Definiteness, KreinSpace, VectorClass, classify_subspace,
                               classify_vector, inner, isotropic_part, krein_adjoint,
                               orthogonal_companion)
from indefspline.numkernel import Subspace

J2 = KreinSpace.diagonal([1, -1])


def random_space(rng, n):
    return KreinSpace(random_gram(rng, n, int(rng.integers(0, n + 1))))


def test_gram_validation():
    with pytest.raises(ValidationError, match="Hermitian"):
        KreinSpace(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError, match="singular"):
        KreinSpace(np.diag([1.0, 0.0]))
    with pytest.raises(ValidationError, match="square"):
        KreinSpace(np.ones((2, 3)))
    assert J2.signature == (1, 1)
    assert KreinSpace.hilbert(3).is_hilbert


def test_inner_examples():
    assert inner(J2, [1, 1], [1, 1]) == 0
    assert inner(J2, [1, 0], [1, 0]) == 1
    assert inner(J2, [0, 1], [0, 1]) == -1
    assert inner(J2, [1, 1j], [1j, 1]) == pytest.approx(-2j)
    assert inner(J2, [1j, 1], [1, 1j]) == pytest.approx(np.conj(inner(J2, [1, 1j], [1j, 1])))


def test_inner_sesquilinear():
    rng = np.random.default_rng(3)
    sp = random_space(rng, 4)
    x, y = cgauss(rng, 4), cgauss(rng, 4)
    a = 2 - 3j
    assert inner(sp, a * x, y) == pytest.approx(a * inner(sp, x, y))
    assert inner(sp, x, a * y) == pytest.approx(np.conj(a) * inner(sp, x, y))


def test_classify_vector_examples():
    assert classify_vector(J2, [1, 1]) is VectorClass.NEUTRAL
    assert classify_vector(J2, [2, 1]) is VectorClass.POSITIVE
    assert classify_vector(J2, [1, 2]) is VectorClass.NEGATIVE
    J3 = KreinSpace.diagonal([1, 1, -1])
    assert classify_vector(J3, [1, 1, np.sqrt(2)]) is VectorClass.NEUTRAL
    with pytest.raises(ValidationError):
        classify_vector(J2, [0, 0])


def test_krein_adjoint_examples():
    rng = np.random.default_rng(0)
    T = cgauss(rng, 3, 2)
    assert np.allclose(krein_adjoint(T, KreinSpace.hilbert(2), KreinSpace.hilbert(3)),
                       T.conj().T)
    assert np.allclose(krein_adjoint(np.eye(2), KreinSpace.hilbert(2), J2), np.diag([1, -1]))
    with pytest.raises(ValidationError):
        krein_adjoint(T, KreinSpace.hilbert(3), KreinSpace.hilbert(3))


def test_krein_adjoint_identity_sampled():
    rng = np.random.default_rng(5)
    dom, cod = random_space(rng, 2), random_space(rng, 3)
    T = cgauss(rng, 3, 2)
    Ts = krein_adjoint(T, dom, cod)
    worst = 0.0
    for _ in range(100):
        x, y = cgauss(rng, 2), cgauss(rng, 3)
        lhs, rhs = inner(cod, T @ x, y), inner(dom, x, Ts @ y)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    assert worst <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_adjoint_involution(m, n, seed):
    rng = np.random.default_rng(seed)
    dom, cod = random_space(rng, n), random_space(rng, m)
    T = cgauss(rng, m, n)
    back = krein_adjoint(krein_adjoint(T, dom, cod), cod, dom)
    assert np.max(np.abs(back - T)) <= 1e-10 * max(1.0, np.max(np.abs(T)))


def test_companion_examples():
    line = nk.span(np.array([[1.0], [1.0]]))
    assert nk.equal(orthogonal_companion(J2, line), line)
    assert orthogonal_companion(J2, Subspace.full(2)).is_zero
    rng = np.random.default_rng(1)
    S = nk.span(cgauss(rng, 4, 2))
    assert nk.equal(orthogonal_companion(KreinSpace.hilbert(4), S), nk.euclid_complement(S))


def test_isotropic_part_examples():
    line = nk.span(np.array([[1.0], [1.0]]))
    assert nk.equal(isotropic_part(J2, line), line)
    assert isotropic_part(J2, nk.span(np.array([[1.0], [0.0]]))).is_zero
    assert isotropic_part(J2, Subspace.full(2)).is_zero


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_companion_involution_and_dimension(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    sp = random_space(rng, n)
    d = data.draw(st.integers(0, n))
    M = nk.span(cgauss(rng, n, d)) if d else Subspace.zero(n)
    comp = orthogonal_companion(sp, M)
    assert M.dim + comp.dim == n
    assert nk.equal(orthogonal_companion(sp, comp), M)


def test_classify_subspace_examples():
    rng = np.random.default_rng(2)
    H = KreinSpace.hilbert(3)
    c = classify_subspace(H, nk.span(cgauss(rng, 3, 2)))
    assert c.uniformly_positive and c.regular

    c = classify_subspace(J2, nk.span(np.array([[1.0], [1.0]])))
    assert c.definiteness is Definiteness.NEUTRAL
    assert not c.nondegenerate and not c.regular

    J3 = KreinSpace.diagonal([1, 1, -1])
    c = classify_subspace(J3, nk.span(np.eye(3)[:, :2]))
    assert c.definiteness is Definiteness.POSITIVE
    assert c.uniformly_positive and c.regular and c.pseudo_regular

    c = classify_subspace(J3, Subspace.full(3))
    assert c.definiteness is Definiteness.INDEFINITE and c.regular


def test_semidefinite_degenerate_subspace():
    # span{e1, e2 + e3} in diag(1, 1, -1): nonnegative with isotropic line
    J3 = KreinSpace.diagonal([1, 1, -1])
    M = nk.span(np.array([[1.0, 0], [0, 1], [0, 1]]))
    c = classify_subspace(J3, M)
    assert c.definiteness is Definiteness.NONNEGATIVE
    assert c.nonnegative and not c.uniformly_positive and not c.regular


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.data())
def test_uniform_positivity_iff_regular_and_nonnegative(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    sp = random_space(rng, n)
    d = data.draw(st.integers(0, n))
    if data.draw(st.booleans()) and sp.signature[0]:
        # bias towards positive subspaces drawn from the positive eigenspace
        ev, U = np.linalg.eigh(sp.gram)
        P = U[:, ev > 0]
        M = nk.span(P @ cgauss(rng, P.shape[1], min(d, P.shape[1]) or 1))
    else:
        M = nk.span(cgauss(rng, n, d)) if d else Subspace.zero(n)
    c = classify_subspace(sp, M)
    assert c.uniformly_positive == (c.regular and c.nonnegative)
    # regular and nondegenerate coincide in finite dimensions
    assert c.regular == isotropic_part(sp, M).is_zero == c.nondegenerate
