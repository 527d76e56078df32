"""Electronic-structure integrals and active-space embedding.

A minimal built-in integral engine covers contracted s-type Gaussians on H
and He (closed-form overlap/kinetic/nuclear/repulsion integrals with the
Boys function F0), followed by a restricted Hartree-Fock SCF that delivers
the molecular-orbital integral tensors. Larger basis sets enter through
FCIDUMP files (see :mod:`vqescan.fcidump`), not through this engine.

Two-electron integrals are stored in chemist notation (pq|rs) throughout;
the conversion to physicist ordering happens once, in the fermionic
Hamiltonian builder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import MolecularGeometry


class IntegralError(ValueError):
    """Invalid integral data or unsupported basis request."""


class ScfConvergenceError(RuntimeError):
    """SCF fixed-point iteration hit the iteration cap."""


def boys_f0(t: float) -> float:
    """F0(t) = (1/2) sqrt(pi/t) erf(sqrt(t)), with F0(0) = 1."""
    if t < 1e-12:
        return 1.0 - t / 3.0
    st = math.sqrt(t)
    return 0.5 * math.sqrt(math.pi / t) * math.erf(st)


@dataclass(frozen=True)
class GaussianShell:
    """Contracted s-type Gaussian (primitives share one center).

    Contraction coefficients are given for unit-normalized primitives; the
    contracted function is renormalized to unit self-overlap on construction.
    """

    center: np.ndarray
    exponents: tuple[float, ...]
    contraction_coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        exps = tuple(float(e) for e in self.exponents)
        coefs = tuple(float(c) for c in self.contraction_coefficients)
        if len(exps) != len(coefs) or not exps:
            raise IntegralError("exponents and coefficients must be equal-length, non-empty")
        if any(e <= 0 for e in exps):
            raise IntegralError("Gaussian exponents must be strictly positive")
        # Fold primitive norms into the coefficients, then normalize the
        # contraction so <phi|phi> = 1.
        scaled = [c * (2.0 * e / math.pi) ** 0.75 for e, c in zip(exps, coefs)]
        self_overlap = 0.0
        for ci, ai in zip(scaled, exps):
            for cj, aj in zip(scaled, exps):
                self_overlap += ci * cj * (math.pi / (ai + aj)) ** 1.5
        norm = 1.0 / math.sqrt(self_overlap)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "contraction_coefficients",
                           tuple(c * norm for c in scaled))


# STO-3G s exponents and contraction coefficients (published basis data).
STO3G_S = {
    "H": ((3.42525091, 0.62391373, 0.16885540),
          (0.15432897, 0.53532814, 0.44463454)),
    "He": ((6.36242139, 1.15892300, 0.31364979),
           (0.15432897, 0.53532814, 0.44463454)),
}


def sto3g_shells(geom: MolecularGeometry) -> list[GaussianShell]:
    """One STO-3G s shell per atom; only H and He are supported."""
    shells = []
    for a in geom.atoms:
        if a.element not in STO3G_S:
            raise IntegralError(
                f"built-in engine supports H and He only, got {a.element}")
        exps, coefs = STO3G_S[a.element]
        shells.append(GaussianShell(a.position, exps, coefs))
    return shells


@dataclass(frozen=True)
class IntegralSet:
    """MO-basis integrals: h_pq, (pq|rs), nuclear repulsion, electron count."""

    n_spatial: int
    h: np.ndarray
    g: np.ndarray  # chemist notation (pq|rs)
    e_nn: float
    n_electrons: int

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        g = np.asarray(self.g, dtype=float)
        m = self.n_spatial
        if h.shape != (m, m) or g.shape != (m, m, m, m):
            raise IntegralError("integral tensor shapes inconsistent with n_spatial")
        if np.max(np.abs(h - h.T)) > 1e-12:
            raise IntegralError("one-electron matrix is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.max(np.abs(g - g.transpose(perm))) > 1e-12:
                raise IntegralError("two-electron tensor breaks 8-fold symmetry")
        if self.n_electrons < 0 or self.n_electrons % 2:
            raise IntegralError("electron count must be even and non-negative")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class ActiveSpaceHamiltonian:
    """Active-space effective Hamiltonian with inactive-Fock embedding."""

    n_active: int
    h_eff: np.ndarray
    g_active: np.ndarray
    core_energy: float
    n_active_electrons: int

    def __post_init__(self):
        h = np.asarray(self.h_eff, dtype=float)
        g = np.asarray(self.g_active, dtype=float)
        m = self.n_active
        if h.shape != (m, m) or g.shape != (m, m, m, m):
            raise IntegralError("active-space tensor shapes inconsistent")
        if np.max(np.abs(h - h.T)) > 1e-12:
            raise IntegralError("effective one-electron matrix is not symmetric")
        if self.n_active_electrons < 0 or self.n_active_electrons % 2:
            raise IntegralError("active electron count must be even and non-negative")
        object.__setattr__(self, "h_eff", h)
        object.__setattr__(self, "g_active", g)

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_active


def _primitive_eri(a, av, b, bv, c, cv, d, dv):
    """(ab|cd) over unit-coefficient s primitives at centers av..dv."""
    p = a + b
    q = c + d
    P = (a * av + b * bv) / p
    Q = (c * cv + d * dv) / q
    kab = math.exp(-a * b / p * float(np.dot(av - bv, av - bv)))
    kcd = math.exp(-c * d / q * float(np.dot(cv - dv, cv - dv)))
    t = p * q / (p + q) * float(np.dot(P - Q, P - Q))
    return (2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))) * kab * kcd * boys_f0(t)


def ao_integrals(geom: MolecularGeometry, shells: list[GaussianShell]):
    """AO-basis S, T, V matrices and the (pq|rs) repulsion tensor."""
    m = len(shells)
    S = np.zeros((m, m))
    T = np.zeros((m, m))
    V = np.zeros((m, m))
    for i, si in enumerate(shells):
        for j, sj in enumerate(shells):
            if j < i:
                continue
            s = t = v = 0.0
            ab2 = float(np.dot(si.center - sj.center, si.center - sj.center))
            for a, ca in zip(si.exponents, si.contraction_coefficients):
                for b, cb in zip(sj.exponents, sj.contraction_coefficients):
                    p = a + b
                    mu = a * b / p
                    k = math.exp(-mu * ab2)
                    pref = ca * cb * (math.pi / p) ** 1.5 * k
                    s += pref
                    t += pref * mu * (3.0 - 2.0 * mu * ab2)
                    P = (a * si.center + b * sj.center) / p
                    for atom_ in geom.atoms:
                        pc2 = float(np.dot(P - atom_.position, P - atom_.position))
                        v -= (ca * cb * 2.0 * math.pi / p * k
                              * atom_.atomic_number * boys_f0(p * pc2))
            S[i, j] = S[j, i] = s
            T[i, j] = T[j, i] = t
            V[i, j] = V[j, i] = v

    eri = np.zeros((m, m, m, m))
    for i in range(m):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = 0.0
                    si, sj, sk, sl = shells[i], shells[j], shells[k], shells[l]
                    for a, ca in zip(si.exponents, si.contraction_coefficients):
                        for b, cb in zip(sj.exponents, sj.contraction_coefficients):
                            for c, cc in zip(sk.exponents, sk.contraction_coefficients):
                                for d, cd in zip(sl.exponents, sl.contraction_coefficients):
                                    val += ca * cb * cc * cd * _primitive_eri(
                                        a, si.center, b, sj.center,
                                        c, sk.center, d, sl.center)
                    for (p, q, r, s) in ((i, j, k, l), (j, i, k, l), (i, j, l, k),
                                         (j, i, l, k), (k, l, i, j), (l, k, i, j),
                                         (k, l, j, i), (l, k, j, i)):
                        eri[p, q, r, s] = val
    return S, T, V, eri


def restricted_hartree_fock(S, Hcore, eri, n_electrons, e_nn,
                            max_iterations=200, conv=1e-10, mixing=0.5):
    """Closed-shell RHF by damped fixed-point iteration.

    Core-Hamiltonian guess, Loewdin orthogonalization, linear density mixing.
    Converged when the max density-matrix change drops below `conv`.
    Returns (scf_energy, mo_coefficients, orbital_energies).
    """
    m = S.shape[0]
    n_occ = n_electrons // 2
    if n_occ > m:
        raise IntegralError("more electron pairs than orbitals")
    svals, svecs = np.linalg.eigh(S)
    if np.min(svals) < 1e-10:
        raise IntegralError("overlap matrix is numerically singular")
    X = svecs @ np.diag(svals ** -0.5) @ svecs.T

    def solve(F):
        e, cprime = np.linalg.eigh(X.T @ F @ X)
        return e, X @ cprime

    def density(C):
        occ = C[:, :n_occ]
        return 2.0 * occ @ occ.T

    _, C = solve(Hcore)
    P = density(C)
    for _ in range(max_iterations):
        J = np.einsum("pqrs,rs->pq", eri, P)
        K = np.einsum("prqs,rs->pq", eri, P)
        F = Hcore + J - 0.5 * K
        energies, C = solve(F)
        P_new = density(C)
        P_mixed = (1.0 - mixing) * P_new + mixing * P
        delta = np.max(np.abs(P_mixed - P))
        P = P_mixed
        if delta < conv:
            J = np.einsum("pqrs,rs->pq", eri, P)
            K = np.einsum("prqs,rs->pq", eri, P)
            F = Hcore + J - 0.5 * K
            energies, C = solve(F)
            e_elec = 0.5 * np.sum(P * (Hcore + F))
            return e_elec + e_nn, C, energies
    raise ScfConvergenceError(f"SCF did not converge in {max_iterations} iterations")


def mo_transform(C, Hcore, eri):
    """Transform AO integrals to the MO basis. Returns (h_mo, g_mo chemist)."""
    h_mo = C.T @ Hcore @ C
    g_mo = np.einsum("pi,qj,pqrs,rk,sl->ijkl", C, C, eri, C, C, optimize=True)
    return h_mo, g_mo


def compute_integrals_s(geom: MolecularGeometry,
                        shells: list[GaussianShell] | None = None) -> IntegralSet:
    """Full pipeline: s-Gaussian AO integrals -> RHF -> MO-basis IntegralSet.

    With shells omitted, one STO-3G s shell is placed on every atom (H/He).
    """
    if shells is None:
        shells = sto3g_shells(geom)
    if geom.n_electrons % 2:
        raise IntegralError("built-in engine handles closed-shell systems only")
    S, T, V, eri = ao_integrals(geom, shells)
    e_nn = geom.nuclear_repulsion()
    _, C, _ = restricted_hartree_fock(S, T + V, eri, geom.n_electrons, e_nn)
    h_mo, g_mo = mo_transform(C, T + V, eri)
    # Symmetrize away float noise so the IntegralSet invariants hold exactly.
    h_mo = 0.5 * (h_mo + h_mo.T)
    g_mo = 0.125 * (g_mo + g_mo.transpose(1, 0, 2, 3) + g_mo.transpose(0, 1, 3, 2)
                    + g_mo.transpose(1, 0, 3, 2) + g_mo.transpose(2, 3, 0, 1)
                    + g_mo.transpose(3, 2, 0, 1) + g_mo.transpose(2, 3, 1, 0)
                    + g_mo.transpose(3, 2, 1, 0))
    return IntegralSet(len(shells), h_mo, g_mo, e_nn, geom.n_electrons)


def scf_energy(geom: MolecularGeometry,
               shells: list[GaussianShell] | None = None) -> float:
    """RHF total energy from the built-in engine (reference for bounds)."""
    if shells is None:
        shells = sto3g_shells(geom)
    S, T, V, eri = ao_integrals(geom, shells)
    e, _, _ = restricted_hartree_fock(S, T + V, eri, geom.n_electrons,
                                      geom.nuclear_repulsion())
    return e


def embed_active_space(ints: IntegralSet, active_orbitals,
                       n_active_electrons: int) -> ActiveSpaceHamiltonian:
    """Fold inactive orbitals into an effective one-body operator and core energy.

    Inactive occupied orbitals are the lowest-index orbitals outside the
    active set (orbitals are assumed energy-ordered). Closed-shell
    expressions:

        h_eff[u,v] = h[u,v] + sum_i [2 (uv|ii) - (ui|iv)]
        core = e_nn + sum_i 2 h[i,i] + sum_ij [2 (ii|jj) - (ij|ji)]
    """
    active = sorted(set(int(a) for a in active_orbitals))
    m = ints.n_spatial
    if any(a < 0 or a >= m for a in active):
        raise IntegralError("active orbital index out of range")
    if n_active_electrons < 0 or n_active_electrons % 2:
        raise IntegralError("active electron count must be even and non-negative")
    n_inactive_elec = ints.n_electrons - n_active_electrons
    if n_inactive_elec < 0 or n_inactive_elec % 2:
        raise IntegralError(
            f"inactive electron count {n_inactive_elec} must be even and non-negative")
    outside = [p for p in range(m) if p not in active]
    n_pairs = n_inactive_elec // 2
    if n_pairs > len(outside):
        raise IntegralError("not enough orbitals outside the active set to hold "
                            f"{n_inactive_elec} inactive electrons")
    inactive = outside[:n_pairs]

    h, g = ints.h, ints.g
    act = np.array(active, dtype=int)
    h_eff = h[np.ix_(act, act)].copy()
    core = ints.e_nn
    for i in inactive:
        core += 2.0 * h[i, i]
        coulomb = g[np.ix_(act, act, [i], [i])][:, :, 0, 0]
        exchange = g[np.ix_(act, [i], [i], act)][:, 0, 0, :]
        h_eff += 2.0 * coulomb - exchange
        for j in inactive:
            core += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    g_active = g[np.ix_(act, act, act, act)].copy()
    h_eff = 0.5 * (h_eff + h_eff.T)
    return ActiveSpaceHamiltonian(len(active), h_eff, g_active, core, n_active_electrons)


def full_space_hamiltonian(ints: IntegralSet) -> ActiveSpaceHamiltonian:
    """Identity embedding: every orbital active, core energy = e_nn."""
    return embed_active_space(ints, range(ints.n_spatial), ints.n_electrons)
