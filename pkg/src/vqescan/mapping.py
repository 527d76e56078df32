"""Fermion-to-qubit encodings and two-qubit symmetry reduction.

Jordan-Wigner stores the occupation of mode p in qubit p; the parity
encoding stores the cumulative occupation parity of modes 0..p in qubit p.
Under parity encoding with blocked alpha/beta mode ordering, qubit
n/2 - 1 carries the alpha-block parity and qubit n - 1 the total parity.
Both are conserved by particle-number- and S_z-conserving Hamiltonians, so
every Hamiltonian term acts there with I or Z only and the two qubits can
be replaced by their sector eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fermion import FermionOperator
from .pauli import PauliString, PauliSum

JORDAN_WIGNER = "jordan_wigner"
PARITY = "parity"


class MappingError(ValueError):
    """Encoding mismatch or non-removable qubit."""


@dataclass(frozen=True)
class EncodingSpec:
    kind: str
    n_modes: int

    def __post_init__(self):
        if self.kind not in (JORDAN_WIGNER, PARITY):
            raise MappingError(f"unknown encoding {self.kind!r}")
        if self.n_modes < 1:
            raise MappingError("n_modes must be >= 1")


def _jw_ladder(n: int, p: int, dagger: bool) -> PauliSum:
    # a_p = (X_p + iY_p)/2 (x) Z_{p-1} ... Z_0
    z_tail = (1 << p) - 1
    x_term = PauliString(n, 1 << p, z_tail)
    y_term = PauliString(n, 1 << p, z_tail | (1 << p))
    sign = -1j if dagger else 1j
    return PauliSum(n, {x_term: 0.5, y_term: 0.5 * sign})


def _parity_ladder(n: int, p: int, dagger: bool) -> PauliSum:
    # Occupation flips cascade X through every higher parity qubit; the
    # occupation sign is read from qubits p and p-1:
    #   a_p = X_{n-1..p+1} (x) (X_p Z_{p-1} + i Y_p) / 2
    cascade = ((1 << n) - 1) & ~((1 << (p + 1)) - 1)
    xz_z = (1 << (p - 1)) if p > 0 else 0
    xz_term = PauliString(n, cascade | (1 << p), xz_z)
    y_term = PauliString(n, cascade | (1 << p), 1 << p)
    sign = -1j if dagger else 1j
    return PauliSum(n, {xz_term: 0.5, y_term: 0.5 * sign})


_LADDERS = {JORDAN_WIGNER: _jw_ladder, PARITY: _parity_ladder}


def ladder_image(spec: EncodingSpec, orbital: int, dagger: bool) -> PauliSum:
    """Encoded image of a single creation or annihilation operator."""
    if not 0 <= orbital < spec.n_modes:
        raise MappingError(f"orbital {orbital} out of range")
    return _LADDERS[spec.kind](spec.n_modes, orbital, dagger)


def map_operator(op: FermionOperator, spec: EncodingSpec) -> PauliSum:
    """Transform a FermionOperator into a PauliSum under the encoding."""
    if spec.n_modes != op.n_modes:
        raise MappingError(
            f"operator has {op.n_modes} modes, encoding expects {spec.n_modes}")
    n = spec.n_modes
    cache: dict[tuple[int, bool], PauliSum] = {}
    total = PauliSum.zero(n)
    for ops, coeff in op.terms.items():
        factor = PauliSum.identity(n, coeff)
        for ladder in ops:
            key = (ladder.orbital, ladder.dagger)
            if key not in cache:
                cache[key] = ladder_image(spec, *key)
            factor = factor @ cache[key]
        total = total + factor
    return total


def encode_occupations(occupations, spec: EncodingSpec) -> int:
    """Computational-basis index of an occupation-number product state.

    Jordan-Wigner: index bit p equals f_p. Parity: index bit p equals the
    prefix parity f_0 xor ... xor f_p.
    """
    occ = [int(bool(f)) for f in occupations]
    if len(occ) != spec.n_modes:
        raise MappingError("occupation list length must equal n_modes")
    index = 0
    if spec.kind == JORDAN_WIGNER:
        for p, f in enumerate(occ):
            index |= f << p
    else:
        running = 0
        for p, f in enumerate(occ):
            running ^= f
            index |= running << p
    return index


def hartree_fock_occupations(n_electrons: int, n_modes: int) -> list[int]:
    """Reference occupations for blocked ordering: lowest orbitals per spin."""
    if n_electrons % 2 or n_electrons < 0 or n_electrons > n_modes:
        raise MappingError("electron count must be even and fit the mode count")
    m = n_modes // 2
    half = n_electrons // 2
    occ = [0] * n_modes
    for p in range(half):
        occ[p] = 1
        occ[m + p] = 1
    return occ


@dataclass(frozen=True)
class TaperingResult:
    reduced: PauliSum
    removed_qubits: tuple[int, int]
    sector: tuple[int, int]


def _drop_bit(bits: int, position: int) -> int:
    lower = bits & ((1 << position) - 1)
    upper = (bits >> (position + 1)) << position
    return lower | upper


def squeeze_index(index: int, removed_qubits: tuple[int, int]) -> int:
    """Drop the removed bit positions from a basis-state index."""
    for pos in sorted(removed_qubits, reverse=True):
        index = _drop_bit(index, pos)
    return index


def taper_two_qubits(qubit_op: PauliSum, n_modes: int, n_electrons: int,
                     ref_occupations, sector: tuple[int, int] | None = None
                     ) -> TaperingResult:
    """Remove the alpha-parity and total-parity qubits of a parity-encoded sum.

    Every term must act on qubits n/2 - 1 and n - 1 with I or Z only; an X
    or Y there signals a wrong encoding or mode ordering. Each Z on a
    removed qubit is replaced by the sector eigenvalue. The default sector
    is read off the reference occupations: (-1)^(alpha electrons) for the
    middle qubit and (-1)^(total electrons) for the last.
    """
    if n_modes < 4 or n_modes % 2:
        raise MappingError("tapering needs an even mode count of at least 4")
    if qubit_op.n_qubits != n_modes:
        raise MappingError("operator qubit count must equal the mode count")
    mid, last = n_modes // 2 - 1, n_modes - 1
    if sector is None:
        occ = [int(bool(f)) for f in ref_occupations]
        if len(occ) != n_modes or sum(occ) != n_electrons:
            raise MappingError("reference occupations inconsistent with electron count")
        n_alpha = sum(occ[: n_modes // 2])
        sector = ((-1) ** n_alpha, (-1) ** n_electrons)
    z_mid, z_last = sector
    if z_mid not in (1, -1) or z_last not in (1, -1):
        raise MappingError("sector eigenvalues must be +1 or -1")

    reduced_terms: dict[PauliString, complex] = {}
    for string, coeff in qubit_op.terms.items():
        for pos in (mid, last):
            if (string.x_bits >> pos) & 1:
                raise MappingError(
                    f"term {string.label()} acts with X/Y on removable qubit {pos}; "
                    "expected a parity-encoded, blocked-ordering Hamiltonian")
        if (string.z_bits >> mid) & 1:
            coeff = coeff * z_mid
        if (string.z_bits >> last) & 1:
            coeff = coeff * z_last
        new_x = _drop_bit(_drop_bit(string.x_bits, last), mid)
        new_z = _drop_bit(_drop_bit(string.z_bits, last), mid)
        new_string = PauliString(n_modes - 2, new_x, new_z)
        reduced_terms[new_string] = reduced_terms.get(new_string, 0) + coeff
    return TaperingResult(PauliSum(n_modes - 2, reduced_terms), (mid, last),
                          (z_mid, z_last))
