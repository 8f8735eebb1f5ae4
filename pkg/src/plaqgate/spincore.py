"""Dense operator algebra for small registers of spin-1/2 sites.

Conventions used throughout the package:
    * Pauli convention for the spin vectors (no factor 1/2); a two-site
      singlet is an eigenstate of the exchange dot product with eigenvalue -3.
    * hbar = 1; energies and inverse times share units.
    * The first site label of a register is the least-significant bit of the
      amplitude index, so serialized states are portable between tools.
All operators are dense complex arrays (max dimension 256 = 8 sites), and
matrix exponentials go through a Hermitian eigendecomposition rather than a
series expansion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI_BY_AXIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SpinRegister:
    """An ordered collection of named spin-1/2 sites.

    The label order fixes the tensor-product layout: ``site_labels[0]`` is the
    least-significant qubit of the state index.
    """

    site_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (1 <= len(self.site_labels) <= 8):
            raise ValueError(f"register supports 1-8 sites, got {len(self.site_labels)}")
        if len(set(self.site_labels)) != len(self.site_labels):
            raise ValueError(f"duplicate site labels: {self.site_labels}")

    @property
    def site_count(self) -> int:
        return len(self.site_labels)

    @property
    def dim(self) -> int:
        return 2 ** self.site_count

    def index(self, site: str) -> int:
        try:
            return self.site_labels.index(site)
        except ValueError:
            raise KeyError(f"unknown site label {site!r}; register has {self.site_labels}") from None


def plaquette_register() -> SpinRegister:
    """The standard 4-site plaquette register, sites labeled "1".."4"."""
    return SpinRegister(("1", "2", "3", "4"))


def superplaquette_register() -> SpinRegister:
    """Two coupled plaquettes: left sites "1".."4", right sites "1'".."4'"."""
    return SpinRegister(("1", "2", "3", "4", "1'", "2'", "3'", "4'"))


@dataclass
class Spectrum:
    """Eigendecomposition of a Hermitian operator (ascending eigenvalues)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def assert_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    dev = np.abs(op - op.conj().T).max()
    if dev > tol:
        raise ValueError(f"operator is not Hermitian (max |A - A^dag| = {dev:.3e})")


def _embed(op2: np.ndarray, position: int, site_count: int) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for k in range(site_count):
        out = np.kron(op2 if k == position else IDENTITY_2, out)
    return out


def pauli_site(reg: SpinRegister, site: str, axis: str) -> np.ndarray:
    """Pauli matrix on one site, identity elsewhere.

    Args:
        reg: the register.
        site: site label.
        axis: one of "x", "y", "z".
    """
    if axis not in _PAULI_BY_AXIS:
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    return _embed(_PAULI_BY_AXIS[axis], reg.index(site), reg.site_count)


def pauli_vector(reg: SpinRegister, site: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three Pauli components on one site."""
    return tuple(pauli_site(reg, site, ax) for ax in ("x", "y", "z"))


def pauli_dot(reg: SpinRegister, i: str, j: str) -> np.ndarray:
    """Exchange dot product s_i . s_j (eigenvalues -3 on singlets, +1 on triplets)."""
    if i == j:
        raise ValueError(f"pauli_dot needs two distinct sites, got {i!r} twice")
    out = np.zeros((reg.dim, reg.dim), dtype=complex)
    for ax in ("x", "y", "z"):
        out += pauli_site(reg, i, ax) @ pauli_site(reg, j, ax)
    return out


def total_spin(reg: SpinRegister) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Components of the total spin Sum_i s_i."""
    comps = []
    for ax in ("x", "y", "z"):
        comps.append(sum(pauli_site(reg, s, ax) for s in reg.site_labels))
    return tuple(comps)


def total_spin_squared(reg: SpinRegister) -> np.ndarray:
    """(Sum_i s_i)^2; eigenvalue 4S(S+1) on a total-spin-S multiplet."""
    sx, sy, sz = total_spin(reg)
    return sx @ sx + sy @ sy + sz @ sz


def eig_hermitian(op: np.ndarray) -> Spectrum:
    """Diagonalize a Hermitian operator.

    Returns:
        Spectrum with ascending eigenvalues and a unitary eigenvector matrix
        satisfying A V = V diag(lam) to 1e-10.
    """
    assert_hermitian(op)
    w, v = np.linalg.eigh(op)
    return Spectrum(eigenvalues=w, eigenvectors=v)


def unitary_evolve(hamiltonian: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) via eigendecomposition of the Hermitian H."""
    spec = eig_hermitian(hamiltonian)
    phases = np.exp(-1j * spec.eigenvalues * t)
    return (spec.eigenvectors * phases) @ spec.eigenvectors.conj().T


# ---------------------------------------------------------------------------
# JSON serialization: {dim, re[], im[]}, matrices row-major
# ---------------------------------------------------------------------------

def array_to_json(arr: np.ndarray) -> dict:
    """Serialize a complex vector or square matrix to {dim, re, im}."""
    a = np.asarray(arr, dtype=complex)
    if a.ndim == 1:
        dim = a.shape[0]
    elif a.ndim == 2 and a.shape[0] == a.shape[1]:
        dim = a.shape[0]
    else:
        raise ValueError(f"expected a vector or square matrix, got shape {a.shape}")
    flat = a.reshape(-1)  # row-major
    return {"dim": dim, "re": flat.real.tolist(), "im": flat.imag.tolist()}


def array_from_json(payload: dict) -> np.ndarray:
    """Inverse of array_to_json; shape is inferred from the element count."""
    dim = int(payload["dim"])
    flat = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    if flat.size == dim:
        return flat
    if flat.size == dim * dim:
        return flat.reshape(dim, dim)
    raise ValueError(f"payload has {flat.size} entries, expected {dim} or {dim * dim}")
