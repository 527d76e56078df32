"""Pauli-string algebra and weighted Pauli sums.

Strings are stored as packed symplectic bit pairs (x_bits, z_bits): qubit q
carries X when bit q of x_bits is set, Z when bit q of z_bits is set, Y when
both. Qubit 0 is the least significant bit of computational-basis indices;
dense matrices are built accordingly (qubit n-1 is the leftmost Kronecker
factor).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

COEFF_CUTOFF = 1e-12

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        mask = (1 << self.n_qubits) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask:
            raise ValueError("bit pattern exceeds qubit count")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        """letters[q] is the Pauli on qubit q, e.g. "ZXI" puts Z on qubit 0."""
        x = z = 0
        for q, letter in enumerate(letters):
            if letter == "X":
                x |= 1 << q
            elif letter == "Y":
                x |= 1 << q
                z |= 1 << q
            elif letter == "Z":
                z |= 1 << q
            elif letter != "I":
                raise ValueError(f"bad Pauli letter {letter!r}")
        return cls(len(letters), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range")
        x = 1 << qubit if letter in ("X", "Y") else 0
        z = 1 << qubit if letter in ("Z", "Y") else 0
        if letter not in ("I", "X", "Y", "Z"):
            raise ValueError(f"bad Pauli letter {letter!r}")
        return cls(n_qubits, x, z)

    def letter(self, qubit: int) -> str:
        x = (self.x_bits >> qubit) & 1
        z = (self.z_bits >> qubit) & 1
        return ("I", "X", "Z", "Y")[x + 2 * z]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    @property
    def support(self) -> int:
        return self.x_bits | self.z_bits

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def label(self) -> str:
        """Compact form like "X0 Z3 Y5"; "I" for the identity string."""
        if self.is_identity:
            return "I"
        return " ".join(f"{self.letter(q)}{q}"
                        for q in range(self.n_qubits) if (self.support >> q) & 1)

    def matrix(self) -> np.ndarray:
        mat = np.array([[1.0 + 0j]])
        for q in range(self.n_qubits):
            mat = np.kron(_SINGLE[self.letter(q)], mat)
        return mat

    def __str__(self):
        return self.label()


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Qubitwise product a*b with its accumulated phase in {1, i, -1, -i}."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit count mismatch")
    ax, az, bx, bz = a.x_bits, a.z_bits, b.x_bits, b.z_bits
    a_y, b_y = ax & az, bx & bz
    a_x, b_x = ax & ~az, bx & ~bz
    a_z, b_z = az & ~ax, bz & ~bx
    # Cyclic products XY=iZ, YZ=iX, ZX=iY gain +1 in the i exponent;
    # the reversed orders gain -1.
    k = ((a_x & b_y).bit_count() + (a_y & b_z).bit_count() + (a_z & b_x).bit_count()
         - (a_y & b_x).bit_count() - (a_z & b_y).bit_count() - (a_x & b_z).bit_count())
    phase = (1, 1j, -1, -1j)[k % 4]
    return phase, PauliString(a.n_qubits, ax ^ bx, az ^ bz)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the strings commute (even number of clashing positions)."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit count mismatch")
    anti = (a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()
    return anti % 2 == 0


class PauliSum:
    """Weighted sum of Pauli strings, zero terms pruned at 1e-12."""

    def __init__(self, n_qubits: int, terms=None):
        if n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        self.n_qubits = n_qubits
        self.terms: dict[PauliString, complex] = {}
        for string, coeff in (terms or {}).items():
            if string.n_qubits != n_qubits:
                raise ValueError("term qubit count mismatch")
            c = self.terms.get(string, 0) + complex(coeff)
            if abs(c) > COEFF_CUTOFF:
                self.terms[string] = c
            elif string in self.terms:
                del self.terms[string]

    @classmethod
    def identity(cls, n_qubits: int, coeff=1.0) -> "PauliSum":
        return cls(n_qubits, {PauliString.identity(n_qubits): coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PauliSum.identity(self.n_qubits, other)
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        merged = dict(self.terms)
        for string, coeff in other.terms.items():
            merged[string] = merged.get(string, 0) + coeff
        return PauliSum(self.n_qubits, merged)

    __radd__ = __add__

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex)):
            return NotImplemented
        return PauliSum(self.n_qubits,
                        {s: c * scalar for s, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        prod: dict[PauliString, complex] = {}
        for s1, c1 in self.terms.items():
            for s2, c2 in other.terms.items():
                phase, s3 = multiply(s1, s2)
                prod[s3] = prod.get(s3, 0) + phase * c1 * c2
        return PauliSum(self.n_qubits, prod)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum) or self.n_qubits != other.n_qubits:
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= 1e-10
                   for k in keys)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, {len(self.terms)} terms)"

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def sorted_terms(self) -> list[tuple[PauliString, complex]]:
        return sorted(self.terms.items(),
                      key=lambda item: (item[0].weight, item[0].z_bits, item[0].x_bits))

    def matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; oracle support, capped at 12 qubits."""
        if self.n_qubits > 12:
            raise ValueError("dense matrix capped at 12 qubits")
        dim = 2 ** self.n_qubits
        total = np.zeros((dim, dim), dtype=complex)
        for string, coeff in self.terms.items():
            total += coeff * string.matrix()
        return total

    def format(self) -> str:
        lines = []
        for string, coeff in self.sorted_terms():
            if abs(coeff.imag) <= COEFF_CUTOFF:
                head = f"{coeff.real:.12g}"
            else:
                head = f"({coeff.real:.12g}{coeff.imag:+.12g}j)"
            lines.append(f"{head} * {string.label()}")
        return "\n".join(lines)

    def to_json(self) -> str:
        items = [{"coeff": [c.real, c.imag], "paulis": s.label()}
                 for s, c in self.sorted_terms()]
        return json.dumps({"n_qubits": self.n_qubits, "terms": items}, indent=1)

    @classmethod
    def from_json(cls, payload: str) -> "PauliSum":
        data = json.loads(payload)
        n = data["n_qubits"]
        terms = {}
        for item in data["terms"]:
            string = _string_from_label(n, item["paulis"])
            re_, im = item["coeff"]
            terms[string] = terms.get(string, 0) + complex(re_, im)
        return cls(n, terms)


def _string_from_label(n_qubits: int, label: str) -> PauliString:
    if label.strip() in ("", "I"):
        return PauliString.identity(n_qubits)
    x = z = 0
    for token in label.split():
        letter, qubit = token[0], int(token[1:])
        if letter in ("X", "Y"):
            x |= 1 << qubit
        if letter in ("Z", "Y"):
            z |= 1 << qubit
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"bad Pauli token {token!r}")
    return PauliString(n_qubits, x, z)
