import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_dpt.operators import (
    FockSpace,
    SpinSpace,
    annihilation,
    collective_spin,
    creation,
    identity,
    number,
    pauli,
    quadrature,
    tensor,
)


def test_annihilation_elements():
    a = annihilation(FockSpace(2)).toarray()
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 2] = 1, np.sqrt(2)
    assert np.array_equal(a, expected)


def test_commutator_on_retained_block():
    f = FockSpace(1)
    a, ad = annihilation(f).toarray(), creation(f).toarray()
    comm = a @ ad - ad @ a
    assert comm[0, 0] == 1


def test_ladder_action():
    f = FockSpace(5)
    ket = np.zeros(6)
    ket[3] = 1
    out = annihilation(f).toarray() @ ket
    assert np.isclose(out[2], np.sqrt(3)) and np.count_nonzero(out) == 1


def test_invalid_spaces():
    with pytest.raises(ValueError):
        FockSpace(0)
    with pytest.raises(ValueError):
        SpinSpace(0)


def test_pauli_identities():
    s = {k: v.toarray() for k, v in pauli().items()}
    up = np.array([1, 0])
    assert np.allclose(s["z"] @ up, up)
    assert np.allclose(s["plus"] @ s["minus"] + s["minus"] @ s["plus"], np.eye(2))
    assert np.allclose(s["x"] @ s["x"], np.eye(2))


def test_collective_spin_reductions():
    J = {k: v.toarray() for k, v in collective_spin(1).items()}
    s = {k: v.toarray() for k, v in pauli().items()}
    for k in "xyz":
        assert np.allclose(J[k], s[k] / 2)
    w = np.linalg.eigvalsh(collective_spin(2)["z"].toarray())
    assert np.allclose(sorted(w), [-1, 0, 1])


@given(st.integers(1, 12))
def test_collective_su2(n):
    J = {k: v.toarray() for k, v in collective_spin(n).items()}
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        assert np.abs(J[a] @ J[b] - J[b] @ J[a] - 1j * J[c]).max() < 1e-12


def test_tensor_dims_and_quadratures():
    f = FockSpace(6)
    op = tensor(identity(2), number(f))
    assert op.dims == (2, 7) and op.dim == 14
    a = annihilation(f).toarray()
    assert np.allclose(quadrature(f, 0.0).toarray(), a + a.conj().T)
    assert np.allclose(quadrature(f, np.pi / 2).toarray(), -1j * (a - a.conj().T))


@given(st.integers(1, 40))
def test_number_diagonal(n):
    N = number(FockSpace(n)).toarray()
    assert np.array_equal(N, np.diag(np.arange(n + 1)))


@given(st.integers(1, 20), st.floats(-10, 10))
def test_quadrature_hermitian_and_odd(n, theta):
    f = FockSpace(n)
    X = quadrature(f, theta).toarray()
    assert np.allclose(X, X.conj().T, atol=1e-14)
    assert np.allclose(quadrature(f, theta + np.pi).toarray(), -X, atol=1e-12)


@given(st.integers(2, 4), st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_tensor_associative(d1, d2, d3, seed):
    from rabi_dpt.operators import Operator

    # integer entries keep every product exact
    rng = np.random.default_rng(seed)
    A, B, C = (Operator((d,), rng.integers(-5, 6, (d, d)) + 1j * rng.integers(-5, 6, (d, d)))
               for d in (d1, d2, d3))
    left = tensor(tensor(A, B), C)
    right = tensor(A, tensor(B, C))
    assert np.array_equal(left.toarray(), right.toarray())
    assert left.dims == right.dims == (d1, d2, d3)


def test_large_operators_are_sparse():
    assert annihilation(FockSpace(200)).issparse
    assert not annihilation(FockSpace(10)).issparse
