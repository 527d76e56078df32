"""Second-quantized fermionic operators over spin orbitals.

Operators are weighted sums of creation/annihilation strings kept in a
normal-ordered canonical form: creations before annihilations, each group in
strictly decreasing orbital index, with coefficients below 1e-12 pruned.

Spin orbitals are blocked: alpha spins occupy indices [0, M), beta spins
[M, 2M) for M spatial orbitals. This fixes the two removable symmetry
qubits of the parity encoding at positions M-1 and 2M-1.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .integrals import ActiveSpaceHamiltonian

COEFF_CUTOFF = 1e-12


class LadderOp(NamedTuple):
    orbital: int
    dagger: bool

    def __str__(self):
        return f"{self.orbital}^" if self.dagger else f"{self.orbital}"


class FermionOperator:
    """Weighted sum of ladder-operator strings on a fixed mode count."""

    def __init__(self, n_modes: int, terms=None, *, normalize: bool = True):
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        self.n_modes = n_modes
        raw: dict[tuple[LadderOp, ...], complex] = {}
        for ops, coeff in (terms or {}).items():
            ops = tuple(LadderOp(int(o), bool(d)) for o, d in ops)
            for op in ops:
                if not 0 <= op.orbital < n_modes:
                    raise ValueError(f"orbital {op.orbital} out of range for {n_modes} modes")
            raw[ops] = raw.get(ops, 0) + complex(coeff)
        if normalize:
            self.terms = _normal_order_terms(raw)
        else:
            self.terms = {k: v for k, v in raw.items() if abs(v) > COEFF_CUTOFF}

    @classmethod
    def identity(cls, n_modes: int, coeff=1.0) -> "FermionOperator":
        return cls(n_modes, {(): coeff})

    @classmethod
    def from_string(cls, n_modes: int, spec: str, coeff=1.0) -> "FermionOperator":
        """Build a single term from text like "3^ 1^ 2 0"."""
        ops = []
        for token in spec.split():
            if token.endswith("^"):
                ops.append((int(token[:-1]), True))
            else:
                ops.append((int(token), False))
        return cls(n_modes, {tuple(ops): coeff})

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionOperator.identity(self.n_modes, other)
        if self.n_modes != other.n_modes:
            raise ValueError("mode count mismatch")
        merged = dict(self.terms)
        for ops, coeff in other.terms.items():
            merged[ops] = merged.get(ops, 0) + coeff
        return FermionOperator(self.n_modes, merged, normalize=False)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex)):
            return NotImplemented
        return FermionOperator(
            self.n_modes, {ops: c * scalar for ops, c in self.terms.items()},
            normalize=False)

    __rmul__ = __mul__

    def __matmul__(self, other: "FermionOperator") -> "FermionOperator":
        """Operator product, renormal-ordered."""
        if self.n_modes != other.n_modes:
            raise ValueError("mode count mismatch")
        prod: dict[tuple[LadderOp, ...], complex] = {}
        for ops1, c1 in self.terms.items():
            for ops2, c2 in other.terms.items():
                key = ops1 + ops2
                prod[key] = prod.get(key, 0) + c1 * c2
        return FermionOperator(self.n_modes, prod)

    def __eq__(self, other):
        if not isinstance(other, FermionOperator) or self.n_modes != other.n_modes:
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= 1e-10 for k in keys)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"FermionOperator(n_modes={self.n_modes}, {len(self.terms)} terms)"

    def format(self) -> str:
        """One term per line: "coeff [op list]", deterministic order."""
        lines = []
        for ops in sorted(self.terms, key=lambda t: (len(t), t)):
            coeff = self.terms[ops]
            body = " ".join(str(o) for o in ops)
            lines.append(f"{_fmt_coeff(coeff)} [{body}]")
        return "\n".join(lines)


def _fmt_coeff(c: complex) -> str:
    if abs(c.imag) <= COEFF_CUTOFF:
        return f"{c.real:.12g}"
    return f"({c.real:.12g}{c.imag:+.12g}j)"


def _normal_order_terms(terms: dict) -> dict:
    """Rewrite every term into canonical normal-ordered form.

    Uses {a_p, a_q^+} = delta_pq, {a_p, a_q} = 0. Creations move left of
    annihilations; within each group indices are strictly decreasing, and a
    repeated index within a group kills the term (Pauli exclusion).
    """
    out: dict[tuple[LadderOp, ...], complex] = {}
    stack = [(tuple(ops), coeff) for ops, coeff in terms.items()]
    while stack:
        ops, coeff = stack.pop()
        if abs(coeff) <= COEFF_CUTOFF:
            continue
        rewritten = False
        for i in range(len(ops) - 1):
            left, right = ops[i], ops[i + 1]
            if not left.dagger and right.dagger:
                # a_p a_q^+ = delta_pq - a_q^+ a_p
                swapped = ops[:i] + (right, left) + ops[i + 2:]
                stack.append((swapped, -coeff))
                if left.orbital == right.orbital:
                    stack.append((ops[:i] + ops[i + 2:], coeff))
                rewritten = True
                break
            if left.dagger == right.dagger:
                if left.orbital == right.orbital:
                    rewritten = True  # term vanishes
                    break
                if left.orbital < right.orbital:
                    swapped = ops[:i] + (right, left) + ops[i + 2:]
                    stack.append((swapped, -coeff))
                    rewritten = True
                    break
        if not rewritten:
            out[ops] = out.get(ops, 0) + coeff
    return {ops: c for ops, c in out.items() if abs(c) > COEFF_CUTOFF}


def normal_order(op: FermionOperator) -> FermionOperator:
    """Return the canonical normal-ordered form (idempotent)."""
    return FermionOperator(op.n_modes, op.terms)


def hermitian_conjugate(op: FermionOperator) -> FermionOperator:
    """Reverse each string, flip daggers, conjugate coefficients."""
    conj = {}
    for ops, coeff in op.terms.items():
        new_ops = tuple(LadderOp(o.orbital, not o.dagger) for o in reversed(ops))
        conj[new_ops] = conj.get(new_ops, 0) + coeff.conjugate()
    return FermionOperator(op.n_modes, conj)


def build_hamiltonian(asi: ActiveSpaceHamiltonian) -> FermionOperator:
    """Second-quantized electronic Hamiltonian over blocked spin orbitals.

    Emits sum_pq h_pq a_p^+ a_q over same-spin pairs, the two-body sum
    (1/2) sum g<pq|rs> a_p^+ a_q^+ a_r a_s with physicist-reordered
    coefficients g<pq|rs> = (ps|qr), plus core_energy times identity.
    """
    m = asi.n_active
    n_modes = 2 * m
    h, g = asi.h_eff, asi.g_active
    terms: dict[tuple, complex] = {(): complex(asi.core_energy)}

    def spin_orbital(p, sigma):
        return p + sigma * m

    for p in range(m):
        for q in range(m):
            if abs(h[p, q]) <= COEFF_CUTOFF:
                continue
            for sigma in (0, 1):
                key = ((spin_orbital(p, sigma), True), (spin_orbital(q, sigma), False))
                terms[key] = terms.get(key, 0) + h[p, q]

    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    g_phys = g[p, s, q, r]  # <pq|rs> from chemist (ps|qr)
                    if abs(g_phys) <= COEFF_CUTOFF:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            key = ((spin_orbital(p, sigma), True),
                                   (spin_orbital(q, tau), True),
                                   (spin_orbital(r, tau), False),
                                   (spin_orbital(s, sigma), False))
                            terms[key] = terms.get(key, 0) + 0.5 * g_phys
    return FermionOperator(n_modes, terms)


def number_operator(n_modes: int) -> FermionOperator:
    return FermionOperator(
        n_modes, {((p, True), (p, False)): 1.0 for p in range(n_modes)})


def sz_operator(n_modes: int) -> FermionOperator:
    """Total S_z in units of hbar for blocked alpha/beta ordering."""
    m = n_modes // 2
    terms = {}
    for p in range(m):
        terms[((p, True), (p, False))] = 0.5
        terms[((p + m, True), (p + m, False))] = -0.5
    return FermionOperator(n_modes, terms)


# ---------------------------------------------------------------------------
# Dense Fock-space matrices: the brute-force oracle used to cross-check the
# operator algebra and the qubit encodings. Occupation-number basis states
# are indexed with mode p as bit p; the sign convention counts occupied
# modes below p.
# ---------------------------------------------------------------------------

def _ladder_matrix(n_modes: int, orbital: int, dagger: bool) -> np.ndarray:
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    single = lower.T if dagger else lower
    z = np.diag([1.0, -1.0]).astype(complex)
    mat = np.array([[1.0 + 0j]])
    for mode in range(n_modes):
        if mode < orbital:
            factor = z
        elif mode == orbital:
            factor = single
        else:
            factor = np.eye(2, dtype=complex)
        mat = np.kron(factor, mat)  # mode 0 is the least significant bit
    return mat


def fock_matrix(op: FermionOperator) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the operator (oracle; small n only)."""
    if op.n_modes > 12:
        raise ValueError("Fock-space oracle capped at 12 modes")
    dim = 2 ** op.n_modes
    total = np.zeros((dim, dim), dtype=complex)
    cache: dict[LadderOp, np.ndarray] = {}
    for ops, coeff in op.terms.items():
        mat = np.eye(dim, dtype=complex)
        for ladder in ops:
            if ladder not in cache:
                cache[ladder] = _ladder_matrix(op.n_modes, ladder.orbital, ladder.dagger)
            mat = mat @ cache[ladder]
        total += coeff * mat
    return total


def sector_indices(n_modes: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """Fock-basis indices with fixed alpha/beta electron counts (blocked)."""
    m = n_modes // 2
    alpha_mask = (1 << m) - 1
    idx = np.arange(2 ** n_modes)
    n_a = np.array([bin(int(i) & alpha_mask).count("1") for i in idx])
    n_b = np.array([bin(int(i) >> m).count("1") for i in idx])
    return idx[(n_a == n_alpha) & (n_b == n_beta)]


def fci_ground_energy(asi: ActiveSpaceHamiltonian) -> float:
    """Exact ground energy in the closed-shell sector (n_alpha = n_beta).

    Independent oracle path: dense Fock-space matrix restricted to the
    particle sector, then eigvalsh.
    """
    ham = build_hamiltonian(asi)
    mat = fock_matrix(ham)
    n_half = asi.n_active_electrons // 2
    sel = sector_indices(ham.n_modes, n_half, n_half)
    sub = mat[np.ix_(sel, sel)]
    return float(np.linalg.eigvalsh(sub)[0])
