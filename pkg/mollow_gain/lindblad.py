# pyright: reportMissingTypeStubs=false
"""
Dense superoperator algebra for the pump-frame master equation.

Density matrices are vectorized by column stacking: vec(A X B) = (Bᵀ ⊗ A) vec(X).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import isqrt
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import expm, lu_factor, lu_solve, svdvals

from .errors import DegenerateSteadyState, DimensionMismatch, UnphysicalState
from .model import mhz_to_angular

if TYPE_CHECKING:
    from typing import TypeAlias
    from typing import Self

    import numpy.typing as npt

    from .model import DeviceParams, PumpFrameModel

    Operator: TypeAlias = npt.NDArray[np.complex128]

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
DEGENERACY_RATIO = 1e-9
RESIDUAL_TOL = 1e-10


def vec(matrix: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    return np.asarray(matrix, dtype=np.complex128).reshape(-1, order="F")


def unvec(vector: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    vector = np.asarray(vector, dtype=np.complex128)
    dim = isqrt(vector.size)
    if dim * dim != vector.size:
        raise DimensionMismatch(
            f"Vector of size {vector.size} is not a vectorized matrix"
        )
    return vector.reshape((dim, dim), order="F")


def spre(op: Operator) -> Operator:
    """
    Superoperator of X -> op X
    """
    return np.kron(np.eye(op.shape[0]), op)


def spost(op: Operator) -> Operator:
    """
    Superoperator of X -> X op
    """
    return np.kron(op.T, np.eye(op.shape[0]))


def projector(n_levels: int, row: int, col: int) -> Operator:
    """
    |row><col|
    """
    op = np.zeros((n_levels, n_levels), dtype=np.complex128)
    op[row, col] = 1
    return op


@dataclass(frozen=True, kw_only=True, eq=False)
class Liouvillian:
    """
    Generator of the master-equation dynamics acting on column-stacked density
    matrices.
    Attributes:
        matrix   (numpy.ndarray): N² x N² complex superoperator
        n_levels (int)          : N
    """

    matrix: Operator
    n_levels: int = field(init=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128, copy=True)
        rows, cols = matrix.shape
        n_levels = isqrt(rows)
        if rows != cols or n_levels * n_levels != rows or n_levels < 2:
            raise DimensionMismatch(f"Invalid superoperator shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("Superoperator has non-finite entries")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "n_levels", n_levels)

    @classmethod
    def zero(cls, n_levels: int) -> Self:
        return cls(matrix=np.zeros((n_levels**2, n_levels**2), dtype=np.complex128))

    def __add__(self, other: object) -> Liouvillian:
        if not isinstance(other, Liouvillian):
            return NotImplemented
        if other.n_levels != self.n_levels:
            raise DimensionMismatch(
                f"Cannot add {self.n_levels}- and {other.n_levels}-level generators"
            )
        return Liouvillian(matrix=self.matrix + other.matrix)

    def apply(self, rho: npt.ArrayLike) -> Operator:
        """
        dρ/dt for the density matrix `rho`
        """
        return unvec(self.matrix @ vec(rho))

    def eigenvalues(self) -> npt.NDArray[np.complex128]:
        return np.linalg.eigvals(self.matrix)


@dataclass(frozen=True, kw_only=True, eq=False)
class DensityMatrix:
    data: Operator

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.complex128, copy=True)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatch(f"Density matrix must be square, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def basis(cls, n_levels: int, level: int) -> Self:
        """
        |level><level|
        """
        return cls(data=projector(n_levels, level, level))

    @property
    def n_levels(self) -> int:
        return self.data.shape[0]

    @property
    def populations(self) -> npt.NDArray[np.float64]:
        return np.real(np.diag(self.data))

    def expect(self, op: Operator) -> complex:
        """
        Tr{op ρ}
        """
        return complex(np.trace(op @ self.data))

    def validate(self) -> None:
        """
        Raises:
            UnphysicalState: ρ is not a valid density matrix
        """
        hermitian_error = float(np.max(np.abs(self.data - self.data.conj().T)))
        if hermitian_error > HERMITIAN_TOL:
            raise UnphysicalState(
                f"Density matrix not Hermitian (error {hermitian_error:.3g})"
            )
        trace_error = abs(complex(np.trace(self.data)) - 1)
        if trace_error > TRACE_TOL:
            raise UnphysicalState(f"Density matrix trace off by {trace_error:.3g}")
        min_eig = float(np.min(np.linalg.eigvalsh(self.data)))
        if min_eig < -POSITIVITY_TOL:
            raise UnphysicalState(f"Density matrix has eigenvalue {min_eig:.3g}")


def hamiltonian(model: PumpFrameModel) -> Operator:
    """
    Pump-frame Hamiltonian in rad/ns:
      H = Σ Δ_m |m><m| - i(Ω/2)(Σ₊e^{iφ} - Σ₋e^{-iφ})
    """
    drive = model.sigma_plus * np.exp(1j * model.pump_phase)
    return np.diag(model.detunings).astype(np.complex128) - 1j * (
        model.rabi_angular / 2
    ) * (drive - drive.conj().T)


def commutator(h: Operator) -> Liouvillian:
    """
    Superoperator of ρ -> -i[h, ρ]
    """
    return Liouvillian(matrix=-1j * (spre(h) - spost(h)))


def dissipator(op: Operator, rate: float) -> Liouvillian:
    """
    Superoperator of rate·D[op], D[X]ρ = XρX† - {X†X, ρ}/2
    """
    if rate < 0:
        raise ValueError(f"Dissipation rate must be non-negative, got {rate}")
    op = np.asarray(op, dtype=np.complex128)
    op_dag_op = op.conj().T @ op
    matrix = np.kron(op.conj(), op) - 0.5 * (spre(op_dag_op) + spost(op_dag_op))
    return Liouvillian(matrix=rate * matrix)


def build_liouvillian(model: PumpFrameModel, params: DeviceParams) -> Liouvillian:
    """
    L = -i[H, ·] + Σ_m mΓ₁ D[|m-1><m|] + 2Γ_φ D[Σ m|m><m|]

    The dephasing channel carries 2Γ_φ so that the |0>-|1> coherence decays at
    γ = Γ₁/2 + Γ_φ.
    """
    n = params.n_levels
    if model.n_levels != n:
        raise DimensionMismatch(
            f"Model has {model.n_levels} levels, device has {n}"
        )
    gamma1 = mhz_to_angular(params.gamma1)
    gamma_phi = mhz_to_angular(params.gamma_phi)

    liouvillian = commutator(hamiltonian(model))
    for m in range(1, n):
        liouvillian += dissipator(projector(n, m - 1, m), m * gamma1)
    number = np.diag(np.arange(n, dtype=np.float64)).astype(np.complex128)
    return liouvillian + dissipator(number, 2 * gamma_phi)


def steady_state(l: Liouvillian) -> DensityMatrix:
    """
    Unique ρ with Lρ = 0 and Tr ρ = 1, from the bordered system where the first row
    of L is replaced by the trace functional.
    Raises:
        DegenerateSteadyState: L has more than one null vector
        UnphysicalState: the solution is not a valid density matrix
    """
    n = l.n_levels
    singular_values = svdvals(l.matrix)
    if (
        singular_values[0] == 0
        or singular_values[-2] < DEGENERACY_RATIO * singular_values[0]
    ):
        raise DegenerateSteadyState(
            f"Liouvillian null space is degenerate (second-smallest singular value "
            f"{singular_values[-2]:.3g}, largest {singular_values[0]:.3g})"
        )

    bordered = np.array(l.matrix, copy=True)
    bordered[0, :] = vec(np.eye(n))
    rhs = np.zeros(n * n, dtype=np.complex128)
    rhs[0] = 1
    solution = lu_solve(lu_factor(bordered), rhs)

    rho = unvec(solution)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho)
    residual = np.linalg.norm(l.matrix @ vec(rho)) / (
        singular_values[0] * np.linalg.norm(rho)
    )
    if residual > RESIDUAL_TOL:
        logger.warning("Steady-state relative residual %.3g", residual)

    state = DensityMatrix(data=rho)
    state.validate()
    return state


def propagator(l: Liouvillian, t: float) -> Operator:
    """
    exp(Lt) by scaling and squaring, `t` in ns
    """
    return expm(l.matrix * t)


def propagate(l: Liouvillian, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """
    exp(Lt)ρ₀ with `t` in ns
    """
    if t < 0:
        raise ValueError(f"Propagation time must be non-negative, got {t}")
    if t == 0:
        return rho0
    if rho0.n_levels != l.n_levels:
        raise DimensionMismatch(
            f"{rho0.n_levels}-level state, {l.n_levels}-level generator"
        )
    return DensityMatrix(data=unvec(propagator(l, t) @ vec(rho0.data)))
