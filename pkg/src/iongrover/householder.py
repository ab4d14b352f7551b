"""Exact Householder-reflection operators on the register space.

Both reflections act only within the ion manifold (slots 1..N); the ancilla
slot 0 always carries the identity.  ``standard_hr`` is the involutory
reflection 1 - 2|chi><chi| and ``generalized_hr`` replaces the -1 eigenvalue
on chi by an arbitrary phase factor exp(i*phi).
"""

from __future__ import annotations

import cmath
from dataclasses import InitVar, dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import CouplingVector, DimensionMismatchError, RegisterState

#: Default unitarity acceptance for freshly built operators.
UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class Operator:
    """Dense unitary on the (N+1)-dimensional register space."""

    matrix: np.ndarray
    unitarity_tol: InitVar[float] = UNITARITY_TOL

    def __post_init__(self, unitarity_tol: float) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        if mat.shape[0] < 3:
            raise ValueError("operator must act on at least 2 ions plus ancilla")
        defect = float(np.linalg.norm(mat.conj().T @ mat - np.eye(len(mat))))
        if defect > unitarity_tol:
            raise ValueError(
                f"matrix is not unitary: defect {defect:.3g} > {unitarity_tol:g}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_ions(self) -> int:
        return self.dim - 1

    @property
    def manifold_block(self) -> np.ndarray:
        """The ion-manifold sub-matrix (slots 1..N)."""
        return self.matrix[1:, 1:]


def identity_operator(n_ions: int) -> Operator:
    return Operator(np.eye(n_ions + 1, dtype=complex))


def generalized_hr(chi: CouplingVector, phi: float) -> Operator:
    """Reflection with eigenvalue exp(i*phi) on chi, identity elsewhere."""
    n = chi.n_ions
    mat = np.eye(n + 1, dtype=complex)
    mat[1:, 1:] += (cmath.exp(1j * phi) - 1.0) * np.outer(
        chi.components, chi.components.conj()
    )
    return Operator(mat)


def standard_hr(chi: CouplingVector) -> Operator:
    """The involutory reflection 1 - 2|chi><chi| on the manifold."""
    return generalized_hr(chi, np.pi)


def apply(op: Operator, state: RegisterState) -> RegisterState:
    if op.dim != state.n_ions + 1:
        raise DimensionMismatchError(
            f"operator dim {op.dim} does not match register size {state.n_ions + 1}"
        )
    return RegisterState(op.matrix @ state.amplitudes)


def compose(ops: Sequence[Operator] | Iterable[Operator], n_ions: int | None = None) -> Operator:
    """Product of operators listed in application order (first applied first).

    An empty list composes to the identity; ``n_ions`` is then required to fix
    the dimension.
    """
    ops = list(ops)
    if not ops:
        if n_ions is None:
            raise ValueError("empty composition needs an explicit n_ions")
        return identity_operator(n_ions)
    dim = ops[0].dim
    for op in ops:
        if op.dim != dim:
            raise DimensionMismatchError("operators in a composition must share a dimension")
    mat = np.eye(dim, dtype=complex)
    for op in ops:
        mat = op.matrix @ mat
    return Operator(mat, unitarity_tol=1e-11)
