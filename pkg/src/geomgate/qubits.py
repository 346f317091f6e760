"""Two-qubit operator algebra around the collective operator Jy.

Jy = sigma_y (x) 1 + 1 (x) sigma_y with eigenvalues (+2, 0, 0, -2).  The
eigenbasis used everywhere is the product basis of single-qubit sigma_y
eigenvectors |+y> = (|0> + i|1>)/sqrt(2), |-y> = (|0> - i|1>)/sqrt(2),
ordered

    index 0: |+y,+y>   l = +2
    index 1: |+y,-y>   l =  0
    index 2: |-y,+y>   l =  0
    index 3: |-y,-y>   l = -2

so that |00> has weight 1/4 on each basis vector.  This fixed resolution of
the degenerate l = 0 subspace makes matrix-element indexing reproducible;
the dissipative dynamics only ever depends on the l values, so any unitary
mixing within the l = 0 pair would give the same physics.

The ideal global gate is exp(-i*phi*Jy^2); at phi = pi/8 it maps |00> to the
maximally entangled state (|00> + i|11>)/sqrt(2) up to a global phase.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, InvalidStateError

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])

JY_EIGENVALUES = np.array([2.0, 0.0, 0.0, -2.0])

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_FLOOR = -1e-10

_BASES = ("computational", "jy")


def jy_matrix() -> np.ndarray:
    """Collective operator Jy = sigma_y (x) 1 + 1 (x) sigma_y."""
    eye = np.eye(2)
    return np.kron(SIGMA_Y, eye) + np.kron(eye, SIGMA_Y)


@lru_cache(maxsize=1)
def _jy_transform() -> np.ndarray:
    u1 = np.array([[1.0, 1.0], [1.0j, -1.0j]]) / math.sqrt(2.0)  # columns |+y>, |-y>
    u = np.kron(u1, u1)
    u.setflags(write=False)
    return u


def jy_transform() -> np.ndarray:
    """Unitary whose columns are the Jy eigenvectors (computational -> jy)."""
    return _jy_transform().copy()


@dataclass(frozen=True)
class JyBasis:
    """Eigenvalue list and diagonalizing unitary of Jy."""

    eigenvalues: tuple = tuple(JY_EIGENVALUES)

    @property
    def transform(self) -> np.ndarray:
        return jy_transform()


@dataclass(frozen=True)
class QubitState:
    """4x4 two-qubit density matrix with an explicit basis tag."""

    rho: np.ndarray
    basis: str = "computational"

    def __post_init__(self):
        if self.basis not in _BASES:
            raise InvalidParameterError(f"basis must be one of {_BASES}, got {self.basis!r}")
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidStateError(f"qubit density matrix must be 4x4, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def trace_defect(self) -> float:
        return abs(complex(np.trace(self.rho)) - 1.0)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min())

    def require_valid(self):
        """Enforce the density-matrix invariants; raises InvalidStateError."""
        h = self.hermiticity_defect()
        if h > HERMITICITY_TOL:
            raise InvalidStateError(f"not Hermitian: max|rho - rho^dag| = {h:.2e}")
        t = self.trace_defect()
        if t > TRACE_TOL:
            raise InvalidStateError(f"trace deviates from 1 by {t:.2e}")
        lam = self.min_eigenvalue()
        if lam < POSITIVITY_FLOOR:
            raise InvalidStateError(f"negative eigenvalue {lam:.2e}")
        return self


def qubit_00() -> QubitState:
    """|00><00| in the computational basis."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    return QubitState(rho, "computational")


def to_jy_basis(state: QubitState) -> QubitState:
    """Similarity transform into the Jy eigenbasis."""
    if state.basis == "jy":
        return state
    u = _jy_transform()
    return QubitState(u.conj().T @ state.rho @ u, "jy")


def from_jy_basis(state: QubitState) -> QubitState:
    """Similarity transform back to the computational basis."""
    if state.basis == "computational":
        return state
    u = _jy_transform()
    return QubitState(u @ state.rho @ u.conj().T, "computational")


@dataclass(frozen=True)
class GateTarget:
    """The ideal global gate exp(-i*phase*Jy^2)."""

    phase: float
    unitary: np.ndarray

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)


def ideal_gate(phi: float) -> GateTarget:
    """exp(-i*phi*Jy^2) by spectral decomposition (diagonal in the Jy basis)."""
    u = _jy_transform()
    phases = np.exp(-1j * phi * JY_EIGENVALUES ** 2)
    return GateTarget(phase=float(phi), unitary=u @ np.diag(phases) @ u.conj().T)


@lru_cache(maxsize=1)
def _entangled_target() -> np.ndarray:
    e00 = np.zeros(4, dtype=complex)
    e00[0] = 1.0
    psi = ideal_gate(math.pi / 8.0).unitary @ e00
    psi.setflags(write=False)
    return psi


def entangled_target() -> np.ndarray:
    """|Psi_max> = exp(-i*(pi/8)*Jy^2)|00>, the maximally entangled gate target."""
    return _entangled_target().copy()


def gate_fidelity(rho_final: QubitState) -> float:
    """Bare target overlap F = <Psi_max| rho |Psi_max> (not squared).

    Requires a valid density matrix in the computational basis; the imaginary
    residue of the overlap must be below 1e-12 and is then discarded.
    """
    if rho_final.basis != "computational":
        raise InvalidParameterError("gate_fidelity expects a computational-basis state")
    rho_final.require_valid()
    psi = _entangled_target()
    val = complex(psi.conj() @ rho_final.rho @ psi)
    if abs(val.imag) > 1e-12:
        raise InvalidStateError(f"fidelity has imaginary residue {val.imag:.2e}")
    return float(val.real)


# -- CSV serialization -------------------------------------------------------

def state_to_csv(state: QubitState) -> str:
    """Serialize the 16 complex entries row-major as re,im pairs, basis tagged."""
    buf = io.StringIO()
    buf.write(f"# basis={state.basis}\n")
    buf.write("re,im\n")
    for z in state.rho.ravel():
        buf.write(f"{z.real:.17g},{z.imag:.17g}\n")
    return buf.getvalue()


def state_from_csv(text: str) -> QubitState:
    """Rebuild a QubitState serialized by `state_to_csv`."""
    basis = "computational"
    entries = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line.lstrip("#").strip()
            if tag.startswith("basis="):
                basis = tag.split("=", 1)[1].strip()
            continue
        if line == "re,im":
            continue
        re_s, im_s = line.split(",")
        entries.append(complex(float(re_s), float(im_s)))
    if len(entries) != 16:
        raise InvalidStateError(f"expected 16 complex entries, got {len(entries)}")
    return QubitState(np.array(entries, dtype=complex).reshape(4, 4), basis)
