"""Parameterized state-preparation circuits.

Circuits are sequences of Pauli-exponential gates applied to a reference
basis state. A gate entry carries a Pauli string, an angle multiplier and
an optional parameter index; gates with no parameter apply a fixed angle.
Preparing any circuit at theta = 0 reproduces its reference state exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fermion import FermionOperator, hermitian_conjugate
from .mapping import (EncodingSpec, MappingError, PARITY, encode_occupations,
                      hartree_fock_occupations, map_operator, squeeze_index,
                      taper_two_qubits)
from .pauli import PauliString
from .simulator import Statevector, apply_pauli_exponential, basis_state


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    """One Pauli-exponential gate: exp(i * angle * P / 2).

    angle = coefficient * theta[parameter] for parameterized gates, or just
    coefficient when parameter is None.
    """

    string: PauliString
    coefficient: float
    parameter: int | None = None


@dataclass(frozen=True)
class AnsatzCircuit:
    n_qubits: int
    reference_index: int
    gates: tuple[GateSpec, ...]
    n_parameters: int
    label: str = ""

    def __post_init__(self):
        if not 0 <= self.reference_index < 2 ** self.n_qubits:
            raise AnsatzError("reference index out of range")
        referenced = set()
        for gate in self.gates:
            if gate.string.n_qubits != self.n_qubits:
                raise AnsatzError("gate qubit count mismatch")
            if gate.parameter is not None:
                if not 0 <= gate.parameter < self.n_parameters:
                    raise AnsatzError(f"parameter index {gate.parameter} out of range")
                referenced.add(gate.parameter)
        if referenced != set(range(self.n_parameters)):
            missing = sorted(set(range(self.n_parameters)) - referenced)
            raise AnsatzError(f"parameters {missing} are never referenced by a gate")

    def to_json(self) -> str:
        payload = {
            "label": self.label,
            "n_qubits": self.n_qubits,
            "n_parameters": self.n_parameters,
            "reference_index": self.reference_index,
            "gates": [
                {"paulis": g.string.label(), "coefficient": g.coefficient,
                 "parameter": g.parameter}
                for g in self.gates
            ],
        }
        return json.dumps(payload, indent=1)


def prepare(circuit: AnsatzCircuit, theta, gate_offsets=None) -> Statevector:
    """Apply the circuit's gates in order to the reference state.

    gate_offsets maps gate positions to extra angles; used by the
    parameter-shift rule, which shifts one gate occurrence at a time.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise AnsatzError(
            f"expected {circuit.n_parameters} parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise AnsatzError("non-finite parameter value")
    state = basis_state(circuit.n_qubits, circuit.reference_index)
    offsets = gate_offsets or {}
    for position, gate in enumerate(circuit.gates):
        if gate.parameter is None:
            angle = gate.coefficient
        else:
            angle = gate.coefficient * theta[gate.parameter]
        angle += offsets.get(position, 0.0)
        state = apply_pauli_exponential(state, gate.string, angle)
    return state


def uccsd_excitations(n_active_electrons: int, n_spin_orbitals: int):
    """Spin-preserving singles and doubles above the blocked HF reference.

    Returns (singles, doubles): singles as (i, a) spin-orbital pairs, doubles
    as (i, j, a, b) with the string a+_a b+_b a_j a_i. Deterministic order,
    ascending index tuples.
    """
    if n_spin_orbitals % 2:
        raise AnsatzError("spin-orbital count must be even")
    if n_active_electrons % 2 or n_active_electrons < 0:
        raise AnsatzError("electron count must be even and non-negative")
    if n_active_electrons > n_spin_orbitals:
        raise AnsatzError("more electrons than spin orbitals")
    m = n_spin_orbitals // 2
    half = n_active_electrons // 2
    occ = {0: list(range(half)), 1: list(range(m, m + half))}
    virt = {0: list(range(half, m)), 1: list(range(m + half, 2 * m))}

    singles = []
    for sigma in (0, 1):
        for i in occ[sigma]:
            for a in virt[sigma]:
                singles.append((i, a))
    singles.sort()

    doubles = []
    for sigma in (0, 1):  # same-spin pairs
        for ii, i in enumerate(occ[sigma]):
            for j in occ[sigma][ii + 1:]:
                for ai, a in enumerate(virt[sigma]):
                    for b in virt[sigma][ai + 1:]:
                        doubles.append((i, j, a, b))
    for i in occ[0]:  # opposite-spin products
        for j in occ[1]:
            for a in virt[0]:
                for b in virt[1]:
                    doubles.append((i, j, a, b))
    doubles.sort()
    return singles, doubles


def _excitation_generator(n_modes: int, creation, annihilation) -> FermionOperator:
    ops = tuple((p, True) for p in creation) + tuple((p, False) for p in annihilation)
    excitation = FermionOperator(n_modes, {ops: 1.0})
    return excitation - hermitian_conjugate(excitation)


def build_uccsd(n_active_electrons: int, n_spin_orbitals: int,
                encoding: EncodingSpec, taper: bool = False) -> AnsatzCircuit:
    """Unitary coupled-cluster singles/doubles circuit, one parameter per
    excitation.

    Each generator T_k - T_k^+ is mapped through the encoding (and tapered
    when requested) to Pauli-exponential gates sharing parameter k with
    fixed relative signs; the exponential is split first-order Trotter with
    a single repetition. The reference is the encoded HF occupation.
    """
    if encoding.n_modes != n_spin_orbitals:
        raise AnsatzError("encoding mode count must equal the spin-orbital count")
    if taper and encoding.kind != PARITY:
        raise MappingError("two-qubit tapering requires the parity encoding")
    singles, doubles = uccsd_excitations(n_active_electrons, n_spin_orbitals)
    occupations = hartree_fock_occupations(n_active_electrons, n_spin_orbitals)
    reference = encode_occupations(occupations, encoding)
    n_qubits = n_spin_orbitals
    if taper:
        removed = (n_spin_orbitals // 2 - 1, n_spin_orbitals - 1)
        reference = squeeze_index(reference, removed)
        n_qubits = n_spin_orbitals - 2

    gates: list[GateSpec] = []
    param = 0
    # singles (i, a): creation on a, annihilation on i
    generators = [((a,), (i,)) for (i, a) in singles]
    generators += [((a, b), (j, i)) for (i, j, a, b) in doubles]
    for creation, annihilation in generators:
        gen = _excitation_generator(n_spin_orbitals, creation, annihilation)
        mapped = map_operator(gen, encoding)
        if taper:
            mapped = taper_two_qubits(mapped, n_spin_orbitals, n_active_electrons,
                                      occupations).reduced
        term_gates = []
        for string, coeff in mapped.sorted_terms():
            # Anti-Hermitian generators map to purely imaginary coefficients:
            # exp(theta * G) = prod exp(i * theta * c * P).
            if abs(coeff.real) > 1e-10:
                raise AnsatzError("excitation generator mapped to a real coefficient")
            term_gates.append(GateSpec(string, 2.0 * coeff.imag, param))
        if not term_gates:
            raise AnsatzError("excitation generator vanished under the encoding")
        gates.extend(term_gates)
        param += 1
    label = f"uccsd-{n_active_electrons}e-{n_spin_orbitals}so-{encoding.kind}" \
            + ("-tapered" if taper else "")
    return AnsatzCircuit(n_qubits, reference, tuple(gates), param, label)


def build_hardware_efficient(n_qubits: int, n_layers: int) -> AnsatzCircuit:
    """Layered ansatz: Y-rotations on every qubit alternating with a linear
    nearest-neighbor CZ entangling ladder, plus a final rotation layer.

    The reference is |0...0>. Each CZ is realized as three fixed Pauli
    exponentials; one fixed Z rotation compensates their accumulated phase
    so that the zero-parameter circuit reproduces the reference exactly.
    """
    if n_qubits < 1 or n_layers < 0:
        raise AnsatzError("need at least one qubit and a non-negative layer count")
    gates: list[GateSpec] = []
    param = 0

    def rotation_layer():
        nonlocal param
        for q in range(n_qubits):
            gates.append(GateSpec(PauliString.single(n_qubits, q, "Y"), 1.0, param))
            param += 1

    n_cz = 0
    rotation_layer()
    for _ in range(n_layers):
        for q in range(n_qubits - 1):
            zc = PauliString.single(n_qubits, q, "Z")
            zt = PauliString.single(n_qubits, q + 1, "Z")
            zz = PauliString(n_qubits, 0, (1 << q) | (1 << (q + 1)))
            gates.append(GateSpec(zc, math.pi / 2))
            gates.append(GateSpec(zt, math.pi / 2))
            gates.append(GateSpec(zz, -math.pi / 2))
            n_cz += 1
        rotation_layer()
    # Each CZ triple leaves phase exp(i*pi/4) on |0...0>; cancel it.
    compensation = -math.pi * n_cz / 2.0
    if compensation % (4.0 * math.pi) != 0.0:
        gates.append(GateSpec(PauliString.single(n_qubits, 0, "Z"), compensation))
    return AnsatzCircuit(n_qubits, 0, tuple(gates), param,
                         f"hardware-efficient-{n_layers}l")


def _compiled_primitive_gates(circuit: AnsatzCircuit):
    """Expand each Pauli exponential into its CNOT-ladder template.

    Yields qubit tuples: single-qubit basis rotations for X/Y positions, the
    CNOT chain down the support, the Rz, then the mirrored chain and
    rotations.
    """
    for gate in circuit.gates:
        support = [q for q in range(circuit.n_qubits)
                   if (gate.string.support >> q) & 1]
        if not support:
            continue
        pre = [(q,) for q in support if gate.string.letter(q) in ("X", "Y")]
        chain = [(support[i], support[i + 1]) for i in range(len(support) - 1)]
        yield from pre
        yield from chain
        yield (support[-1],)  # Rz carrying the angle
        yield from reversed(chain)
        yield from pre


def circuit_depth(circuit: AnsatzCircuit) -> int:
    """Layered depth after compiling gates and greedily packing
    disjoint-qubit gates; reference-state preparation is not counted."""
    level = [0] * circuit.n_qubits
    depth = 0
    for qubits in _compiled_primitive_gates(circuit):
        layer = 1 + max(level[q] for q in qubits)
        for q in qubits:
            level[q] = layer
        depth = max(depth, layer)
    return depth
