"""Operator algebra on the truncated qubit (x) boson Hilbert space.

Conventions, fixed once and asserted in tests:

* states and operators are dense numpy arrays (complex128);
* the qubit factor is leftmost in all tensor products, so a joint operator
  acts on a vector ordered as [up (x) |0..N-1>, down (x) |0..N-1>];
* the qubit basis is |up>, |down> with sigma_z |up> = +|up>;
* the boson ladder uses a hard cutoff: a_dag maps the top Fock state to the
  zero vector, which keeps a_dag exactly the conjugate transpose of a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |up><down|
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |down><up|
IDENTITY_2 = np.eye(2, dtype=complex)

for _op in (SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS, IDENTITY_2):
    _op.setflags(write=False)


@dataclass(frozen=True)
class FockSpace:
    """Truncated boson mode with Fock levels 0..n_trunc-1."""

    n_trunc: int

    def __post_init__(self):
        if self.n_trunc < 2:
            raise InvalidDimensionError(
                f"n_trunc must be >= 2, got {self.n_trunc}"
            )

    @property
    def joint_dim(self) -> int:
        return 2 * self.n_trunc

    def identity(self) -> np.ndarray:
        return np.eye(self.n_trunc, dtype=complex)


def boson_operators(space: FockSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation, creation and number operators for the truncated mode.

    a carries sqrt(n) on the first superdiagonal; a_dag is its conjugate
    transpose (hard cutoff at the top level); number = a_dag @ a.
    """
    n = space.n_trunc
    a = np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
    a_dag = a.conj().T
    number = a_dag @ a
    return a, a_dag, number


def joint(qubit_op: np.ndarray, boson_op: np.ndarray) -> np.ndarray:
    """Tensor product with the qubit factor leftmost."""
    if qubit_op.shape != (2, 2):
        raise InvalidDimensionError(
            f"qubit operator must be 2x2, got {qubit_op.shape}"
        )
    if boson_op.ndim != 2 or boson_op.shape[0] != boson_op.shape[1]:
        raise InvalidDimensionError(
            f"boson operator must be square, got {boson_op.shape}"
        )
    return np.kron(qubit_op, boson_op)


def joint_state(qubit_vec: np.ndarray, fock_vec: np.ndarray) -> np.ndarray:
    """Product state (qubit leftmost), normalized."""
    psi = np.kron(np.asarray(qubit_vec, dtype=complex),
                  np.asarray(fock_vec, dtype=complex))
    return psi / np.linalg.norm(psi)


def fock_state(space: FockSpace, n: int) -> np.ndarray:
    if not 0 <= n < space.n_trunc:
        raise InvalidDimensionError(
            f"Fock level {n} outside 0..{space.n_trunc - 1}"
        )
    vec = np.zeros(space.n_trunc, dtype=complex)
    vec[n] = 1.0
    return vec


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """<psi|O|psi> for a normalized state."""
    if op.shape != (state.shape[0], state.shape[0]):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match state dim {state.shape[0]}"
        )
    return complex(np.vdot(state, op @ state))


def is_hermitian(op: np.ndarray, rtol: float = 1e-12) -> bool:
    """Max-norm Hermiticity test: ||H - H^dag||_max < rtol * ||H||_max."""
    scale = np.abs(op).max()
    if scale == 0.0:
        return True
    return np.abs(op - op.conj().T).max() < rtol * scale


def norm_defect(state: np.ndarray) -> float:
    """|  ||psi|| - 1  | of a state vector."""
    return abs(np.linalg.norm(state) - 1.0)
