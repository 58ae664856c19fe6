import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tprabi.errors import InvalidDimensionError
from tprabi.hilbert import (FockSpace, IDENTITY_2, SIGMA_PLUS, SIGMA_X,
                            SIGMA_Z, boson_operators, expectation, fock_state,
                            is_hermitian, joint, joint_state)

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)


def test_annihilation_on_one():
    space = FockSpace(5)
    a, _, _ = boson_operators(space)
    assert np.allclose(a @ fock_state(space, 1), fock_state(space, 0))


def test_number_eigenrelation():
    space = FockSpace(6)
    _, _, number = boson_operators(space)
    vec = fock_state(space, 3)
    assert np.allclose(number @ vec, 3.0 * vec)


def test_creation_truncation_boundary():
    space = FockSpace(7)
    _, a_dag, _ = boson_operators(space)
    top = fock_state(space, space.n_trunc - 1)
    assert np.allclose(a_dag @ top, 0.0)


def test_a_dag_is_conjugate_transpose():
    a, a_dag, _ = boson_operators(FockSpace(9))
    assert np.array_equal(a_dag, a.conj().T)


def test_commutator_identity_below_truncation():
    n = 12
    a, a_dag, _ = boson_operators(FockSpace(n))
    comm = a @ a_dag - a_dag @ a
    assert np.allclose(comm[:n - 1, :n - 1], np.eye(n - 1), atol=1e-14)
    assert comm[n - 1, n - 1] == pytest.approx(1 - n)


def test_invalid_truncation_rejected():
    with pytest.raises(InvalidDimensionError):
        FockSpace(1)


def test_joint_identity():
    space = FockSpace(4)
    prod = joint(IDENTITY_2, space.identity())
    assert np.array_equal(prod, np.eye(8))


def test_joint_ladder_element():
    space = FockSpace(5)
    a, _, _ = boson_operators(space)
    op = joint(SIGMA_PLUS, a @ a)
    bra = joint_state(UP, fock_state(space, 0))
    ket = joint_state(DOWN, fock_state(space, 2))
    assert np.vdot(bra, op @ ket) == pytest.approx(np.sqrt(2))


def test_joint_sigma_z_diagonal():
    space = FockSpace(3)
    op = joint(SIGMA_Z, space.identity())
    assert np.allclose(op, np.diag([1, 1, 1, -1, -1, -1]))


def test_joint_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        joint(np.eye(3, dtype=complex), np.eye(4, dtype=complex))


def test_expectation_examples():
    space = FockSpace(4)
    _, _, number = boson_operators(space)
    up0 = joint_state(UP, fock_state(space, 0))
    assert expectation(up0, joint(SIGMA_Z, space.identity())) == pytest.approx(1.0)
    plus0 = joint_state((UP + DOWN) / np.sqrt(2), fock_state(space, 0))
    assert expectation(plus0, joint(SIGMA_X, space.identity())) == pytest.approx(1.0)
    down2 = joint_state(DOWN, fock_state(space, 2))
    assert expectation(down2, joint(IDENTITY_2, number)) == pytest.approx(2.0)


def test_expectation_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        expectation(np.ones(4, dtype=complex) / 2.0, np.eye(6, dtype=complex))


def test_expectation_real_for_hermitian():
    rng = np.random.default_rng(7)
    dim = 10
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = mat + mat.conj().T
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    assert abs(expectation(psi, herm).imag) < 1e-12 * abs(expectation(psi, herm))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
                min_size=2, max_size=16).filter(
                    lambda v: sum(re * re + im * im for re, im in v) > 1e-6))
def test_expectation_of_identity_is_one(amps):
    psi = np.array([complex(re, im) for re, im in amps])
    psi /= np.linalg.norm(psi)
    assert expectation(psi, np.eye(len(psi), dtype=complex)) == pytest.approx(1.0)


def test_is_hermitian():
    assert is_hermitian(SIGMA_X)
    assert not is_hermitian(SIGMA_PLUS)
