"""Statevector simulation: gates, exact and shot-sampled expectation values.

Gates act directly on amplitudes through the sparse action of Pauli strings
(basis permutation plus phases); dense matrices appear only inside the
exact-diagonalization oracle, which is deliberately independent code.

Sampled expectation values use numpy's counter-based Philox generator so
runs are bit-reproducible for a given seed; the algorithm identifier is
exposed for output metadata.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse.linalg

from .pauli import PauliString, PauliSum

RNG_ALGORITHM = "numpy-philox4x64"

_H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
_SDG_GATE = np.array([[1, 0], [0, -1j]], dtype=complex)


class SimulatorError(ValueError):
    pass


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise SimulatorError(f"expected {2 ** self.n_qubits} amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise SimulatorError(f"statevector norm {norm} deviates from 1")
        object.__setattr__(self, "amplitudes", amps)

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


@dataclass(frozen=True)
class ShotPlan:
    shots_per_term: int
    seed: int = 0

    def __post_init__(self):
        if self.shots_per_term < 1:
            raise SimulatorError("shots_per_term must be >= 1")

    @property
    def algorithm(self) -> str:
        return RNG_ALGORITHM


def basis_state(n_qubits: int, index: int) -> Statevector:
    dim = 2 ** n_qubits
    if not 0 <= index < dim:
        raise SimulatorError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return Statevector(n_qubits, amps)


def _popcount_parity(values: np.ndarray) -> np.ndarray:
    """Parity (0/1) of the popcount of each unsigned integer."""
    return (np.bitwise_count(values) & np.uint64(1)).astype(np.int64)


@lru_cache(maxsize=1024)
def _pauli_action_tables(string: PauliString):
    """Source-index permutation and phase factors for P acting on a basis.

    Cached per string: circuits and Hamiltonians reapply the same strings
    thousands of times during an optimization.
    """
    dim = 2 ** string.n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    src = idx ^ np.uint64(string.x_bits)
    signs = 1.0 - 2.0 * _popcount_parity(src & np.uint64(string.z_bits))
    n_y = (string.x_bits & string.z_bits).bit_count()
    phases = (1j ** n_y) * signs
    src.setflags(write=False)
    phases.setflags(write=False)
    return src, phases


def _pauli_action(amps: np.ndarray, string: PauliString) -> np.ndarray:
    """Return P|psi> for a Pauli string: index permutation plus phases."""
    src, phases = _pauli_action_tables(string)
    return phases * amps[src]


def apply_pauli(state: Statevector, string: PauliString) -> Statevector:
    if string.n_qubits != state.n_qubits:
        raise SimulatorError("qubit count mismatch")
    return Statevector(state.n_qubits, _pauli_action(state.amplitudes, string))


def apply_pauli_exponential(state: Statevector, string: PauliString,
                            angle: float) -> Statevector:
    """exp(i * angle * P / 2) |psi>.

    Identity strings would only contribute an unobservable global phase and
    leave the state untouched.
    """
    if string.n_qubits != state.n_qubits:
        raise SimulatorError("qubit count mismatch")
    if string.is_identity:
        return state
    half = 0.5 * angle
    new = (math.cos(half) * state.amplitudes
           + 1j * math.sin(half) * _pauli_action(state.amplitudes, string))
    return Statevector(state.n_qubits, new)


def expectation_exact(state: Statevector, observable: PauliSum) -> float:
    """sum_j h_j <psi|P_j|psi> for a Hermitian observable."""
    if observable.n_qubits != state.n_qubits:
        raise SimulatorError("qubit count mismatch")
    if not observable.is_hermitian():
        raise SimulatorError("observable must have real coefficients")
    amps = state.amplitudes
    value = 0.0 + 0.0j
    for string, coeff in observable.terms.items():
        value += coeff * np.vdot(amps, _pauli_action(amps, string))
    if abs(value.imag) > 1e-10:
        raise SimulatorError(f"expectation has imaginary residue {value.imag}")
    return float(value.real)


def _apply_single_qubit(amps: np.ndarray, qubit: int, gate: np.ndarray) -> np.ndarray:
    dim = len(amps)
    idx = np.arange(dim)
    low = idx[(idx >> qubit) & 1 == 0]
    high = low + (1 << qubit)
    out = np.empty_like(amps)
    out[low] = gate[0, 0] * amps[low] + gate[0, 1] * amps[high]
    out[high] = gate[1, 0] * amps[low] + gate[1, 1] * amps[high]
    return out


def _measurement_basis_amplitudes(state: Statevector, string: PauliString) -> np.ndarray:
    """Rotate so measuring Z on the support reproduces the Pauli expectation."""
    amps = state.amplitudes
    for q in range(string.n_qubits):
        letter = string.letter(q)
        if letter == "X":
            amps = _apply_single_qubit(amps, q, _H_GATE)
        elif letter == "Y":
            amps = _apply_single_qubit(amps, q, _H_GATE @ _SDG_GATE)
    return amps


def expectation_sampled(state: Statevector, observable: PauliSum,
                        plan: ShotPlan) -> tuple[float, float]:
    """Shot-sampled estimate of <H>: (mean, standard error).

    Each term is rotated to its measurement basis, sampled S times from the
    exact outcome distribution, and averaged over measured parities;
    per-term standard errors combine in quadrature. Identity terms enter
    exactly. Deterministic for a given plan seed.
    """
    if observable.n_qubits != state.n_qubits:
        raise SimulatorError("qubit count mismatch")
    if not observable.is_hermitian():
        raise SimulatorError("observable must have real coefficients")
    rng = np.random.Generator(np.random.Philox(plan.seed))
    shots = plan.shots_per_term
    mean = 0.0
    variance = 0.0
    for string, coeff in observable.sorted_terms():
        weight = coeff.real
        if string.is_identity:
            mean += weight
            continue
        rotated = _measurement_basis_amplitudes(state, string)
        probs = np.abs(rotated) ** 2
        probs = probs / probs.sum()
        outcomes = rng.choice(len(probs), size=shots, p=probs).astype(np.uint64)
        parities = _popcount_parity(outcomes & np.uint64(string.support))
        values = 1.0 - 2.0 * parities
        term_mean = float(values.mean())
        if shots > 1:
            sample_var = (1.0 - term_mean ** 2) * shots / (shots - 1)
        else:
            sample_var = 0.0
        mean += weight * term_mean
        variance += weight ** 2 * sample_var / shots
    return mean, math.sqrt(variance)


def exact_ground_energy(observable: PauliSum) -> tuple[float, Statevector]:
    """Lowest eigenvalue and eigenvector of a Hermitian PauliSum.

    Dense diagonalization up to 6 qubits, iterative Lanczos from 7 to 12.
    """
    if not observable.is_hermitian():
        raise SimulatorError("observable must have real coefficients")
    n = observable.n_qubits
    if n > 12:
        raise SimulatorError("exact diagonalization capped at 12 qubits")
    if n <= 6:
        mat = observable.matrix()
        vals, vecs = np.linalg.eigh(mat)
        energy, vec = float(vals[0]), vecs[:, 0]
    else:
        dim = 2 ** n
        terms = observable.sorted_terms()

        def matvec(v):
            acc = np.zeros(dim, dtype=complex)
            for string, coeff in terms:
                acc += coeff * _pauli_action(v.astype(complex), string)
            return acc

        linop = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec,
                                                   dtype=complex)
        vals, vecs = scipy.sparse.linalg.eigsh(linop, k=1, which="SA",
                                               maxiter=5000)
        energy, vec = float(vals[0]), vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = np.linalg.norm(_sum_action(observable, vec) - energy * vec)
    if residual > 1e-9:
        raise SimulatorError(f"eigenpair residual {residual} exceeds 1e-9")
    return energy, Statevector(n, vec)


def _sum_action(observable: PauliSum, vec: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(vec, dtype=complex)
    for string, coeff in observable.terms.items():
        acc += coeff * _pauli_action(vec.astype(complex), string)
    return acc
