"""Dense complex linear-algebra substrate for small driven-spin Hamiltonians.

States, Hermitian operators and unitaries are thin immutable wrappers around
numpy arrays, tagged by the basis they are expressed in.  All Hamiltonians are
stored in cyclic-frequency units (H/h, Hz); time evolution applies the 2*pi
factor explicitly, so ``propagator(H, t) = exp(-i 2 pi (H/h) t)``.

Matrix exponentials are computed exactly through the eigendecomposition,
which is both cheap and free of truncation error at these dimensions (d <= 6).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# Relative tolerances of the structural invariants enforced at construction.
HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
NORM_TOL = 1e-10


class Basis(enum.Enum):
    """Fixed ket orderings for every basis used by the model.

    The two-qubit dressed kets are ordered as the tensor product with qubit 1
    as the left factor and |0> = |z>, so T+ = |zz| and T- = |z̄z̄| sit at the
    ends.  The five-level orderings place S(0,2) first; the six-level ordering
    (used by the Schrieffer-Wolff machinery) starts with the two retained
    product kets.
    """

    LAB2 = ("lab2", ("up", "down"))
    ROT2 = ("rot2", ("up", "down"))
    DRESSED2 = ("dressed2", ("z", "zbar"))
    ROT4 = ("rot4", ("up_up", "up_down", "down_up", "down_down"))
    DRESSED4 = ("dressed4", ("t_plus", "z_zbar", "zbar_z", "t_minus"))
    SINGLET2 = ("singlet2", ("s11", "s02"))
    DRESSED5 = ("dressed5", ("s02", "t_plus", "z_zbar", "zbar_z", "t_minus"))
    DRESSED_ST5 = ("dressed_st5", ("s02", "t_plus", "s11", "t_zero", "t_minus"))
    DRESSED6 = ("dressed6", ("z_zbar", "zbar_z", "t_minus", "t_plus", "s02", "s20"))
    # Retained subspace of the Schrieffer-Wolff reduction; not one of the
    # model-construction bases but required by the reduced 2x2 operator.
    REDUCED2 = ("reduced2", ("z_zbar", "zbar_z"))

    def __init__(self, tag: str, kets: tuple[str, ...]):
        self.tag = tag
        self.kets = kets

    @property
    def dim(self) -> int:
        return len(self.kets)


class BasisMismatchError(ValueError):
    """Raised when an operation receives operands in the wrong basis."""


def _as_square_complex(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector tagged with its basis."""

    amplitudes: np.ndarray
    basis: Basis

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.basis.dim:
            raise ValueError(
                f"state of length {amps.shape[0]} does not fit basis "
                f"{self.basis.tag} (dim {self.basis.dim})"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def population_dict(self) -> dict[str, float]:
        return dict(zip(self.basis.kets, map(float, self.populations())))


@dataclass(frozen=True)
class HermitianOperator:
    """d x d Hermitian matrix in cyclic-frequency units (H/h, Hz)."""

    matrix: np.ndarray
    basis: Basis

    def __post_init__(self):
        m = _as_square_complex(self.matrix)
        if m.shape[0] != self.basis.dim:
            raise ValueError(
                f"{m.shape[0]}x{m.shape[0]} matrix does not fit basis "
                f"{self.basis.tag} (dim {self.basis.dim})"
            )
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if scale > 0.0 and defect > HERMITICITY_TOL * scale:
            raise ValueError(
                f"matrix is not Hermitian: max |M - M^dag| = {defect:.3e} "
                f"exceeds {HERMITICITY_TOL:.0e} * max|M| = {HERMITICITY_TOL * scale:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.basis.dim


@dataclass(frozen=True)
class UnitaryOperator:
    """d x d unitary matrix tagged with its basis."""

    matrix: np.ndarray
    basis: Basis

    def __post_init__(self):
        m = _as_square_complex(self.matrix)
        if m.shape[0] != self.basis.dim:
            raise ValueError(
                f"{m.shape[0]}x{m.shape[0]} matrix does not fit basis "
                f"{self.basis.tag} (dim {self.basis.dim})"
            )
        defect = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if defect > UNITARITY_TOL:
            raise ValueError(
                f"matrix is not unitary: max |U^dag U - I| = {defect:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.basis.dim


# Pauli matrices and friends, shared by the model builders and tests.
SIGMA_X = _freeze(np.array([[0, 1], [1, 0]], dtype=np.complex128))
SIGMA_Y = _freeze(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))
SIGMA_Z = _freeze(np.array([[1, 0], [0, -1]], dtype=np.complex128))
IDENTITY2 = _freeze(np.eye(2, dtype=np.complex128))
HADAMARD = _freeze(np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0))


def eigh(op: HermitianOperator) -> tuple[np.ndarray, UnitaryOperator]:
    """Eigendecomposition of a Hermitian operator.

    Returns the eigenvalues in ascending order (Hz) and the unitary whose
    columns are the corresponding orthonormal eigenvectors, so that
    ``op = V diag(w) V^dag``.
    """
    w, v = np.linalg.eigh(op.matrix)
    return w, UnitaryOperator(v, op.basis)


def propagator(op: HermitianOperator, t: float) -> UnitaryOperator:
    """Exact propagator exp(-i 2 pi (H/h) t) for a constant Hamiltonian.

    ``t`` is in seconds and must be non-negative.
    """
    if t < 0:
        raise ValueError(f"propagation time must be >= 0, got {t}")
    w, v = np.linalg.eigh(op.matrix)
    phases = np.exp(-2j * np.pi * w * t)
    u = (v * phases) @ v.conj().T
    return UnitaryOperator(u, op.basis)


_TENSOR_BASIS = {
    (Basis.ROT2, Basis.ROT2): Basis.ROT4,
    (Basis.DRESSED2, Basis.DRESSED2): Basis.DRESSED4,
}


def tensor(a, b):
    """Kronecker product with the first argument as the left (qubit-1) factor.

    Accepts two Hermitian operators, two unitaries, or two plain arrays.
    Typed operands must map onto a known product basis (rot2 x rot2 -> rot4,
    dressed2 x dressed2 -> dressed4).
    """
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return np.kron(_as_square_complex(a), _as_square_complex(b))
    if type(a) is not type(b):
        raise TypeError("tensor operands must be of the same kind")
    try:
        out_basis = _TENSOR_BASIS[(a.basis, b.basis)]
    except KeyError:
        raise BasisMismatchError(
            f"no product basis defined for {a.basis.tag} x {b.basis.tag}"
        ) from None
    return type(a)(np.kron(a.matrix, b.matrix), out_basis)


def gate_fidelity(u: UnitaryOperator | np.ndarray, v: UnitaryOperator | np.ndarray) -> float:
    """Global-phase-invariant gate fidelity |Tr(V^dag U)|^2 / d^2."""
    mu = u.matrix if isinstance(u, UnitaryOperator) else _as_square_complex(u)
    mv = v.matrix if isinstance(v, UnitaryOperator) else _as_square_complex(v)
    if mu.shape != mv.shape:
        raise ValueError(f"dimension mismatch: {mu.shape} vs {mv.shape}")
    d = mu.shape[0]
    return float(abs(np.trace(mv.conj().T @ mu)) ** 2 / d**2)


def apply(u: UnitaryOperator, psi: StateVector) -> StateVector:
    """Apply a unitary to a state in the same basis."""
    if u.basis is not psi.basis:
        raise BasisMismatchError(
            f"unitary in {u.basis.tag} applied to state in {psi.basis.tag}"
        )
    return StateVector(u.matrix @ psi.amplitudes, psi.basis)


def basis_state(basis: Basis, ket: int | str) -> StateVector:
    """Unit basis ket, addressed by index or by ket label."""
    idx = basis.kets.index(ket) if isinstance(ket, str) else int(ket)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[idx] = 1.0
    return StateVector(amps, basis)
