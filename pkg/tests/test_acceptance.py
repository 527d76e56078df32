"""Acceptance suite: the package's exit criteria, one test per criterion.

Each test prints a single pass/fail line (visible with ``pytest -s``). The
paper-scale case-study reproduction (criterion 7) needs externally supplied
active-space FCIDUMP files and reports SKIPPED when they are absent; the
directory is taken from VQESCAN_PAPER_FCIDUMPS (default
tests/data/paper_fcidumps).
"""
import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from vqescan.ansatz import build_uccsd, prepare
from vqescan.fermion import build_hamiltonian
from vqescan.geometry import RotationOperator, bond_angle, parse_xyz
from vqescan.integrals import compute_integrals_s, full_space_hamiltonian, scf_energy
from vqescan.mapping import (EncodingSpec, JORDAN_WIGNER, PARITY,
                             hartree_fock_occupations, map_operator,
                             taper_two_qubits)
from vqescan.pathfinder import PointSolver, generate_scan, trace_path
from vqescan.pauli import PauliString, PauliSum
from vqescan.presets import load_preset
from vqescan.simulator import (ShotPlan, Statevector, exact_ground_energy,
                               expectation_sampled)
from vqescan.vqe import (VqeConfig, gradient_central_fd,
                         gradient_hellmann_feynman_fd, minimize)

from test_fermion import random_asi

FCIDUMP_DIR = os.environ.get(
    "VQESCAN_PAPER_FCIDUMPS",
    os.path.join(os.path.dirname(__file__), "data", "paper_fcidumps"))

# VQE energies and their oracle bounds collected across this module for the
# variational-bound criterion.
VQE_RUNS: list[tuple[float, float]] = []


@contextmanager
def criterion(number, label):
    try:
        yield
    except pytest.skip.Exception as exc:
        print(f"[acceptance] criterion {number} ({label}): SKIPPED - {exc}")
        raise
    except BaseException:
        print(f"[acceptance] criterion {number} ({label}): FAIL")
        raise
    print(f"[acceptance] criterion {number} ({label}): PASS")


def h2_geometry(bond):
    return parse_xyz(f"2\ncharge=0 mult=1\nH 0 0 0\nH 0 0 {bond}")


def solve_h2(bond, cfg=None):
    """Tapered CAS(2,2) parity pipeline for one H2 geometry."""
    ints = compute_integrals_s(h2_geometry(bond))
    asi = full_space_hamiltonian(ints)
    mapped = map_operator(build_hamiltonian(asi), EncodingSpec(PARITY, 4))
    ham = taper_two_qubits(mapped, 4, 2, hartree_fock_occupations(2, 4)).reduced
    circuit = build_uccsd(2, 4, EncodingSpec(PARITY, 4), taper=True)
    result = minimize(ham, circuit, cfg or VqeConfig())
    oracle, _ = exact_ground_energy(ham)
    VQE_RUNS.append((result.energy, oracle))
    return result, oracle, ham, circuit


def test_criterion_1_structural_quantum_cost():
    with criterion(1, "structural quantum cost"):
        start = time.monotonic()
        rng = np.random.default_rng(0)
        for m, n_elec, expect_qubits, expect_params in ((2, 2, 2, 3), (4, 4, 6, 26)):
            asi = random_asi(rng, m, n_electrons=n_elec)
            mapped = map_operator(build_hamiltonian(asi), EncodingSpec(PARITY, 2 * m))
            occ = hartree_fock_occupations(n_elec, 2 * m)
            reduced = taper_two_qubits(mapped, 2 * m, n_elec, occ).reduced
            circuit = build_uccsd(n_elec, 2 * m, EncodingSpec(PARITY, 2 * m),
                                  taper=True)
            assert reduced.n_qubits == expect_qubits
            assert circuit.n_qubits == expect_qubits
            assert circuit.n_parameters == expect_params
        assert time.monotonic() - start < 1.0


def test_criterion_2_h2_dissociation_regression():
    with criterion(2, "H2 end-to-end dissociation scan"):
        start = time.monotonic()
        bonds = np.linspace(0.5, 2.0, 16)
        for bond in bonds:
            result, oracle, _, _ = solve_h2(float(bond))
            hf = scf_energy(h2_geometry(float(bond)))
            assert result.energy == pytest.approx(oracle, abs=1e-6)
            assert result.energy <= hf + 1e-9
        assert time.monotonic() - start < 60.0


def test_criterion_3_mapping_isospectrality():
    with criterion(3, "JW/parity isospectrality and tapering"):
        rng = np.random.default_rng(42)
        sizes = [2, 3, 4, 2, 3] * 5  # 25 operators on <= 8 spin orbitals
        for case, m in enumerate(sizes):
            n_modes = 2 * m
            n_elec = 2 * int(rng.integers(1, m + 1))
            ham = build_hamiltonian(random_asi(rng, m, n_electrons=n_elec))
            jw = map_operator(ham, EncodingSpec(JORDAN_WIGNER, n_modes))
            par = map_operator(ham, EncodingSpec(PARITY, n_modes))
            spectrum_jw = np.linalg.eigvalsh(jw.matrix())
            spectrum_par = np.linalg.eigvalsh(par.matrix())
            assert np.max(np.abs(spectrum_jw - spectrum_par)) < 1e-10

            # Tapered ground in the reference sector against the untapered
            # matrix projected onto that sector; and the minimum over all
            # four sectors against the unrestricted ground energy.
            occ = hartree_fock_occupations(n_elec, n_modes)
            mat = par.matrix()
            mid, last = n_modes // 2 - 1, n_modes - 1
            sector_grounds = []
            for z_mid in (1, -1):
                for z_last in (1, -1):
                    reduced = taper_two_qubits(par, n_modes, n_elec, occ,
                                               sector=(z_mid, z_last)).reduced
                    ground = np.linalg.eigvalsh(reduced.matrix())[0]
                    sector_grounds.append(ground)
                    keep = [b for b in range(2 ** n_modes)
                            if (-1) ** ((b >> mid) & 1) == z_mid
                            and (-1) ** ((b >> last) & 1) == z_last]
                    projected = np.linalg.eigvalsh(mat[np.ix_(keep, keep)])[0]
                    assert ground == pytest.approx(projected, abs=1e-10)
            assert min(sector_grounds) == pytest.approx(
                np.linalg.eigvalsh(mat)[0], abs=1e-10)


def test_criterion_4_variational_bound():
    with criterion(4, "variational bound over all VQE runs"):
        if not VQE_RUNS:  # order-independent fallback
            for bond in (0.6, 0.9, 1.4):
                solve_h2(bond)
        assert VQE_RUNS
        for energy, oracle in VQE_RUNS:
            assert energy >= oracle - 1e-9


def test_criterion_5_finite_difference_order():
    with criterion(5, "finite-difference order and gradient cross-check"):
        # order-2 convergence on an analytic one-dimensional energy
        geom = parse_xyz("1\ncharge=-1 mult=1\nH 0.3 0 0")

        def analytic_energy(g):
            return float(np.exp(np.sin(g.atoms[0].position[0])))

        x = geom.atoms[0].position[0]
        exact = np.exp(np.sin(x)) * np.cos(x)
        errors = []
        for dR in (0.08, 0.04, 0.02):
            result = gradient_central_fd(analytic_energy, geom, [0], dR=dR)
            errors.append(abs(result.gradient[0] - exact))
        for coarse, fine in zip(errors, errors[1:]):
            assert coarse / fine == pytest.approx(4.0, abs=0.3)

        # Hellmann-Feynman vs central differences for the H2 stretch
        bond = 0.735
        dR = 1e-3
        result, _, ham, circuit = solve_h2(bond, VqeConfig(energy_tolerance=1e-10))
        state = prepare(circuit, result.theta)

        def vqe_energy(geometry):
            ints = compute_integrals_s(geometry)
            asi = full_space_hamiltonian(ints)
            mapped = map_operator(build_hamiltonian(asi), EncodingSpec(PARITY, 4))
            h = taper_two_qubits(mapped, 4, 2, [1, 0, 1, 0]).reduced
            res = minimize(h, circuit, VqeConfig(energy_tolerance=1e-10,
                                                 initial_theta=result.theta))
            oracle, _ = exact_ground_energy(h)
            VQE_RUNS.append((res.energy, oracle))
            return res.energy

        def hamiltonian_at(geometry):
            ints = compute_integrals_s(geometry)
            asi = full_space_hamiltonian(ints)
            mapped = map_operator(build_hamiltonian(asi), EncodingSpec(PARITY, 4))
            return taper_two_qubits(mapped, 4, 2, [1, 0, 1, 0]).reduced

        geom = h2_geometry(bond)
        coord = 5  # z of the second atom
        central = gradient_central_fd(vqe_energy, geom, [coord], dR=dR).gradient[0]
        from vqescan.vqe import displace
        h_plus = hamiltonian_at(displace(geom, coord, +0.5 * dR))
        h_minus = hamiltonian_at(displace(geom, coord, -0.5 * dR))
        hf_fd = gradient_hellmann_feynman_fd(h_plus, h_minus, state, dR)
        assert abs(central - hf_fd) < 1e-4


def test_criterion_6_scan_mechanics():
    with criterion(6, "scan mechanics and rotation orthogonality"):
        ethane = load_preset("ethane_cas22")
        assert len(generate_scan(ethane.geometry, ethane.scan)) == 73

        dce = load_preset("dichloroethylene_cas22")
        frames = generate_scan(dce.geometry, dce.scan)
        assert len(frames) == 13
        left_ref = bond_angle(dce.geometry, 4, 0, 2)
        right_ref = bond_angle(dce.geometry, 5, 1, 3)
        for frame in frames:
            assert abs(bond_angle(frame, 4, 0, 2) - left_ref) < 1e-8
            assert abs(bond_angle(frame, 5, 1, 3) - right_ref) < 1e-8

        rng = np.random.default_rng(123)
        for _ in range(1000):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            mat = RotationOperator(axis, float(rng.uniform(-2 * np.pi,
                                                           2 * np.pi))).matrix()
            assert np.max(np.abs(mat.T @ mat - np.eye(3))) < 1e-12
            assert abs(np.linalg.det(mat) - 1.0) < 1e-12


def _paper_files_present(label, grid):
    return all(os.path.exists(os.path.join(FCIDUMP_DIR, f"{label}_{angle:g}.fcidump"))
               for angle in grid)


def test_criterion_7_case_study_barriers():
    with criterion(7, "case-study barrier reproduction"):
        presets = {
            "ethane_cas22": ("ethane_cas22", 13.148097, 0.5),
            "ethane_cas44": ("ethane_cas44", 12.151007, 0.5),
        }
        ethane = load_preset("ethane_cas22")
        missing = [name for name, (label, _, _) in presets.items()
                   if not _paper_files_present(label, ethane.scan.grid())]
        dce = load_preset("dichloroethylene_cas22")
        if not _paper_files_present("dce_cas22", dce.scan.grid()):
            missing.append("dichloroethylene_cas22")
        if missing:
            pytest.skip("externally supplied active-space FCIDUMP files not found "
                        f"in {FCIDUMP_DIR} (missing: {', '.join(missing)})")

        for name, (label, barrier_kjmol, tol) in presets.items():
            preset = load_preset(name)
            solver = PointSolver(
                source="fcidump",
                fcidump_template=os.path.join(FCIDUMP_DIR, "{label}_{angle}.fcidump"),
                scan_label=label, vqe=VqeConfig(max_iterations=20000))
            path = trace_path(preset.geometry, preset.scan, solver)
            assert not path.failures
            assert path.barrier_kjmol == pytest.approx(barrier_kjmol, abs=tol)

        solver = PointSolver(
            source="fcidump",
            fcidump_template=os.path.join(FCIDUMP_DIR, "{label}_{angle}.fcidump"),
            scan_label="dce_cas22", vqe=VqeConfig(max_iterations=20000))
        path = trace_path(dce.geometry, dce.scan, solver)
        assert not path.failures
        assert 0.05 <= path.barrier_hartree <= 0.2


def test_criterion_8_sampling_statistics():
    with criterion(8, "sampling statistics"):
        plus = Statevector(1, np.array([1.0, 1.0]) / math.sqrt(2.0))
        observable = PauliSum(1, {PauliString.from_letters("Z"): 1.0})
        shots = 10_000
        means, stderrs = [], []
        for seed in range(50):
            mean, stderr = expectation_sampled(plus, observable,
                                               ShotPlan(shots, seed=seed))
            means.append(mean)
            stderrs.append(stderr)
        empirical = float(np.std(means, ddof=1))
        reported = float(np.mean(stderrs))
        assert empirical == pytest.approx(reported, rel=0.2)
        assert reported == pytest.approx(1.0 / math.sqrt(shots), rel=0.2)
