"""Reaction-path tracing: torsion scans, constrained relaxation, warm-started
per-point VQE, and mass-weighted steepest descent.

A scan walks a torsional reaction coordinate over a fixed angle grid. Every
grid geometry is generated fresh from the input geometry (no error
accumulation): the moving set is rotated rigidly about the torsion axis,
and an optional counter-rotating set turns by the opposite amount so the
two ends of the axis share the coordinate change symmetrically. Rigid
follower atoms co-rotate with their leaders, which keeps angles like
H-C-Cl frozen across the scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import HARTREE_TO_KJMOL
from .geometry import (MolecularGeometry, RotationOperator, apply_rotation,
                       torsion_angle)
from .integrals import (ActiveSpaceHamiltonian, IntegralSet, compute_integrals_s,
                        embed_active_space, full_space_hamiltonian)
from .fcidump import load_fcidump
from .fermion import build_hamiltonian
from .mapping import (EncodingSpec, PARITY, hartree_fock_occupations,
                      map_operator, taper_two_qubits)
from .pauli import PauliSum
from .ansatz import AnsatzCircuit, build_hardware_efficient, build_uccsd, circuit_depth
from .vqe import VqeConfig, VqeResult, minimize


class ScanError(ValueError):
    pass


@dataclass(frozen=True)
class ScanSpec:
    torsion_atoms: tuple[int, int, int, int]
    start: float
    stop: float
    step: float
    moving_set: frozenset[int]
    counter_rotating_set: frozenset[int] = frozenset()
    rigid_followers: dict = field(default_factory=dict)  # leader -> follower tuple
    relax_bonds: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moving_set", frozenset(self.moving_set))
        object.__setattr__(self, "counter_rotating_set",
                           frozenset(self.counter_rotating_set))
        object.__setattr__(self, "rigid_followers",
                           {int(k): tuple(v) for k, v in self.rigid_followers.items()})
        object.__setattr__(self, "relax_bonds",
                           tuple((int(a), int(b)) for a, b in self.relax_bonds))
        if self.step == 0:
            raise ScanError("scan step must be nonzero")
        span = (self.stop - self.start) / self.step
        if span < 0 or abs(span - round(span)) > 1e-9:
            raise ScanError("(stop - start) must be a non-negative integer multiple of step")
        i, j, k, l = self.torsion_atoms
        if len({i, j, k, l}) != 4:
            raise ScanError("torsion atoms must be distinct")
        if self.full_moving_set() & {i, j, k}:
            raise ScanError("moving_set must not contain torsion atoms i, j, k")
        # The counter set may contain atom i: when both ends of the axis
        # counter-rotate (the symmetric protocol), every substituent of j
        # rotates, i included. Only the axis atoms stay put.
        if self.full_counter_set() & {j, k}:
            raise ScanError("counter_rotating_set must not contain the axis atoms j, k")
        if l not in self.moving_set:
            raise ScanError("moving_set must contain the final torsion atom l")
        if self.full_moving_set() & self.full_counter_set():
            raise ScanError("moving and counter-rotating sets overlap")

    def full_moving_set(self) -> frozenset[int]:
        return self._with_followers(self.moving_set)

    def full_counter_set(self) -> frozenset[int]:
        return self._with_followers(self.counter_rotating_set)

    def _with_followers(self, leaders: frozenset[int]) -> frozenset[int]:
        members = set(leaders)
        for leader in leaders:
            members.update(self.rigid_followers.get(leader, ()))
        return frozenset(members)

    def grid(self) -> np.ndarray:
        n_points = int(round((self.stop - self.start) / self.step)) + 1
        return self.start + self.step * np.arange(n_points)


def generate_scan(geom: MolecularGeometry, spec: ScanSpec) -> list[MolecularGeometry]:
    """Geometries over the scan grid; each is built from the input geometry.

    Without a counter-rotating set the moving group is rotated so the
    torsion equals the grid angle. With one, the change is split evenly:
    the moving group turns by +delta/2 and the counter group by -delta/2
    about the same axis, which again lands the torsion on the grid angle.
    """
    i, j, k, l = spec.torsion_atoms
    moving = spec.full_moving_set()
    counter = spec.full_counter_set()
    for idx in moving | counter:
        if not 0 <= idx < geom.n_atoms:
            raise ScanError(f"atom index {idx} out of range")
    current = torsion_angle(geom, i, j, k, l)
    rj, rk = geom.atoms[j].position, geom.atoms[k].position
    axis_vec = rk - rj
    axis_len = np.linalg.norm(axis_vec)
    if axis_len < 1e-6:
        raise ScanError("degenerate torsion axis")
    axis = axis_vec / axis_len

    # With atom i inside the counter set, rotating that set by -delta/2
    # advances the torsion by +delta/2, so the two ends split the change
    # evenly. With i fixed, the moving set must carry the full delta.
    split = i in counter
    geometries = []
    for angle in spec.grid():
        delta = (angle - current) % 360.0
        if delta > 180.0:
            delta -= 360.0
        if not counter:
            rot = RotationOperator(axis, math.radians(delta), rk)
            point = apply_rotation(geom, rot, moving)
        else:
            forward = math.radians(delta) / 2.0 if split else math.radians(delta)
            backward = -forward if split else -math.radians(delta)
            point = apply_rotation(geom, RotationOperator(axis, forward, rk), moving)
            point = apply_rotation(point, RotationOperator(axis, backward, rk), counter)
        landed = torsion_angle(point, i, j, k, l)
        if abs((landed - angle + 180.0) % 360.0 - 180.0) > 1e-7:
            raise ScanError(
                f"scan point at {angle} deg landed on torsion {landed} deg; "
                "check the moving/counter-rotating set definitions")
        geometries.append(point)
    return geometries


def _golden_section(fn, a: float, b: float, tol: float):
    """Golden-section minimum of fn on [a, b]; returns the best point
    actually evaluated (including the bracket center)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    center = 0.5 * (a + b)
    best_x, best_f = center, fn(center)
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for x, f in ((x1, f1), (x2, f2)):
        if f < best_f:
            best_x, best_f = x, f
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
            if f1 < best_f:
                best_x, best_f = x1, f1
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
            if f2 < best_f:
                best_x, best_f = x2, f2
    return best_x, best_f


def relax_bonds(geom: MolecularGeometry, pairs, energy_fn,
                window: float = 0.15, tol: float = 1e-4,
                sweeps: int = 2) -> tuple[MolecularGeometry, float]:
    """Sequential coordinate descent over bond lengths.

    For each (atom, anchor) pair the atom slides along the anchor->atom
    direction; its bond length is line-searched by golden section within
    +-15 percent of the current value to 1e-4 Bohr. Two sweeps by default.
    Returns (geometry, energy); the energy never exceeds the input energy.
    """
    pairs = [(int(a), int(b)) for a, b in pairs]
    for a, b in pairs:
        if a == b:
            raise ScanError("bond relaxation pair must reference distinct atoms")
    current = geom
    current_energy = float(energy_fn(geom))
    for _ in range(sweeps):
        for moved, anchor in pairs:
            origin = current.atoms[anchor].position
            direction = current.atoms[moved].position - origin
            r0 = np.linalg.norm(direction)
            direction = direction / r0

            def at_length(r):
                coords = current.coordinates.copy()
                coords[moved] = origin + r * direction
                return current.with_coordinates(coords)

            best_r, best_e = _golden_section(
                lambda r: float(energy_fn(at_length(r))),
                (1.0 - window) * r0, (1.0 + window) * r0, tol)
            if best_e < current_energy:
                current = at_length(best_r)
                current_energy = best_e
    return current, current_energy


# ---------------------------------------------------------------------------
# Per-point electronic-structure pipeline
# ---------------------------------------------------------------------------

BUILTIN_SOURCE = "builtin"
FCIDUMP_SOURCE = "fcidump"

UCCSD = "uccsd"
HARDWARE_EFFICIENT = "hardware_efficient"


@dataclass(frozen=True)
class PointSolver:
    """Builds the qubit Hamiltonian and runs VQE for one scan geometry.

    source "builtin" computes s-Gaussian/STO-3G integrals from the geometry;
    source "fcidump" reads integrals from fcidump_path, or per scan point
    from fcidump_template formatted with {label} and {angle}.
    """

    source: str = BUILTIN_SOURCE
    n_active_electrons: int | None = None  # None -> all electrons/orbitals
    n_active_orbitals: int | None = None
    encoding_kind: str = PARITY
    taper: bool = True
    ansatz_kind: str = UCCSD
    hea_layers: int = 1
    vqe: VqeConfig = field(default_factory=VqeConfig)
    fcidump_path: str | None = None
    fcidump_template: str | None = None
    scan_label: str = ""

    def __post_init__(self):
        if self.source not in (BUILTIN_SOURCE, FCIDUMP_SOURCE):
            raise ScanError(f"unknown integral source {self.source!r}")
        if self.ansatz_kind not in (UCCSD, HARDWARE_EFFICIENT):
            raise ScanError(f"unknown ansatz {self.ansatz_kind!r}")
        if (self.n_active_electrons is None) != (self.n_active_orbitals is None):
            raise ScanError("active electrons and orbitals must be given together")

    def integrals_for(self, geom: MolecularGeometry | None,
                      angle: float | None = None) -> IntegralSet:
        if self.source == BUILTIN_SOURCE:
            if geom is None:
                raise ScanError("builtin integral source needs a geometry")
            return compute_integrals_s(geom)
        if self.fcidump_path is not None and angle is None:
            return load_fcidump(self.fcidump_path)
        if self.fcidump_template is None:
            raise ScanError("fcidump source needs fcidump_path or fcidump_template")
        path = self.fcidump_template.format(label=self.scan_label,
                                            angle=f"{angle:g}")
        return load_fcidump(path)

    def active_space(self, ints: IntegralSet) -> ActiveSpaceHamiltonian:
        if self.n_active_electrons is None:
            return full_space_hamiltonian(ints)
        n_occ = ints.n_electrons // 2
        first = n_occ - self.n_active_electrons // 2
        if first < 0 or first + self.n_active_orbitals > ints.n_spatial:
            raise ScanError(
                f"active window CAS({self.n_active_electrons},{self.n_active_orbitals}) "
                f"does not fit {ints.n_electrons} electrons in {ints.n_spatial} orbitals")
        window = range(first, first + self.n_active_orbitals)
        return embed_active_space(ints, window, self.n_active_electrons)

    def qubit_hamiltonian(self, asi: ActiveSpaceHamiltonian) -> PauliSum:
        n_modes = asi.n_spin_orbitals
        encoding = EncodingSpec(self.encoding_kind, n_modes)
        mapped = map_operator(build_hamiltonian(asi), encoding)
        if self.taper:
            occ = hartree_fock_occupations(asi.n_active_electrons, n_modes)
            mapped = taper_two_qubits(mapped, n_modes, asi.n_active_electrons,
                                      occ).reduced
        return mapped

    def circuit(self, asi: ActiveSpaceHamiltonian) -> AnsatzCircuit:
        n_modes = asi.n_spin_orbitals
        if self.ansatz_kind == UCCSD:
            return build_uccsd(asi.n_active_electrons, n_modes,
                               EncodingSpec(self.encoding_kind, n_modes),
                               taper=self.taper)
        n_qubits = n_modes - 2 if self.taper else n_modes
        return build_hardware_efficient(n_qubits, self.hea_layers)

    def solve(self, geom: MolecularGeometry | None, angle: float | None = None,
              warm_theta: np.ndarray | None = None) -> "PointSolution":
        ints = self.integrals_for(geom, angle)
        asi = self.active_space(ints)
        hamiltonian = self.qubit_hamiltonian(asi)
        circuit = self.circuit(asi)
        cfg = self.vqe
        if warm_theta is not None and len(warm_theta) == circuit.n_parameters:
            cfg = replace(cfg, initial_theta=np.asarray(warm_theta, dtype=float))
        result = minimize(hamiltonian, circuit, cfg)
        return PointSolution(result.energy, result, hamiltonian, circuit, asi)

    def energy_fn(self, warm_theta: np.ndarray | None = None):
        """Geometry -> VQE energy closure (builtin source only)."""
        if self.source != BUILTIN_SOURCE:
            raise ScanError("geometry-dependent energies need the builtin source")
        return lambda geom: self.solve(geom, warm_theta=warm_theta).energy


@dataclass
class PointSolution:
    energy: float
    vqe: VqeResult
    hamiltonian: PauliSum
    circuit: AnsatzCircuit
    active_space: ActiveSpaceHamiltonian

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @property
    def n_parameters(self) -> int:
        return self.circuit.n_parameters

    @property
    def depth(self) -> int:
        return circuit_depth(self.circuit)


# ---------------------------------------------------------------------------
# Reaction paths
# ---------------------------------------------------------------------------

@dataclass
class PathPoint:
    coordinate: float  # degrees
    geometry: MolecularGeometry
    energy: float  # Hartree
    vqe: VqeResult


@dataclass
class ReactionPath:
    points: list[PathPoint]
    failures: list[tuple[float, str]] = field(default_factory=list)

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.points])

    @property
    def coordinates(self) -> np.ndarray:
        return np.array([p.coordinate for p in self.points])

    @property
    def barrier_hartree(self) -> float:
        if not self.points:
            return 0.0
        e = self.energies
        return float(e.max() - e.min())

    @property
    def barrier_kjmol(self) -> float:
        return self.barrier_hartree * HARTREE_TO_KJMOL

    @property
    def minima(self) -> list[float]:
        """Coordinates of local minima along the path (endpoints included)."""
        e = self.energies
        c = self.coordinates
        found = []
        for n in range(len(e)):
            left_ok = n == 0 or e[n] < e[n - 1] + 1e-12
            right_ok = n == len(e) - 1 or e[n] < e[n + 1] + 1e-12
            strict = ((n > 0 and e[n] < e[n - 1] - 1e-12)
                      or (n < len(e) - 1 and e[n] < e[n + 1] - 1e-12))
            if left_ok and right_ok and strict:
                found.append(float(c[n]))
        return found


def trace_path(geom: MolecularGeometry, spec: ScanSpec,
               solver: PointSolver) -> ReactionPath:
    """Scan the torsion grid, solving VQE per point with warm starts.

    Per point: build geometry -> integrals -> active space -> map/taper ->
    VQE warm-started from the previous point (theta = 0 at the first) ->
    optional bond relaxation. A failing point is recorded with its
    coordinate and the path is returned partial.
    """
    if spec.relax_bonds and solver.source != BUILTIN_SOURCE:
        raise ScanError("bond relaxation needs geometry-dependent (builtin) integrals")
    geometries = generate_scan(geom, spec)
    angles = spec.grid()
    points: list[PathPoint] = []
    failures: list[tuple[float, str]] = []
    warm = None
    for angle, point_geom in zip(angles, geometries):
        try:
            solution = solver.solve(point_geom, angle=float(angle), warm_theta=warm)
            if spec.relax_bonds:
                relaxed_geom, relaxed_energy = relax_bonds(
                    point_geom, spec.relax_bonds,
                    solver.energy_fn(warm_theta=solution.vqe.theta))
                if relaxed_energy < solution.energy:
                    point_geom = relaxed_geom
                    solution = solver.solve(point_geom, angle=float(angle),
                                            warm_theta=solution.vqe.theta)
            warm = solution.vqe.theta
            points.append(PathPoint(float(angle), point_geom, solution.energy,
                                    solution.vqe))
        except Exception as exc:  # noqa: BLE001 - per-point failure manifest
            failures.append((float(angle), f"{type(exc).__name__}: {exc}"))
    return ReactionPath(points, failures)


# ---------------------------------------------------------------------------
# Mass-weighted steepest descent (explicit Euler)
# ---------------------------------------------------------------------------

@dataclass
class MassWeightedPathState:
    q: np.ndarray  # mass-weighted Cartesians, sqrt(amu)*Bohr
    s: float  # accumulated arc length
    v: np.ndarray | None  # unit tangent; None at a stationary terminal point
    energy: float


def steepest_descent_path(start: MolecularGeometry, potential_fn,
                          step: float = 0.05, max_steps: int = 500,
                          gradient_cutoff: float = 1e-4
                          ) -> list[MassWeightedPathState]:
    """Integrate dq/ds = v(s), v = -g_mw/|g_mw|, in mass-weighted Cartesians.

    potential_fn(geometry) -> (energy, gradient) with the gradient in
    Hartree/Bohr of shape (n_atoms, 3). Steps that raise the energy are
    halved up to five times; the walk stops when |g_mw| < cutoff, on
    max_steps, or when no decreasing step remains.
    """
    if step <= 0:
        raise ScanError("step must be positive")
    weights = np.repeat(np.sqrt(start.masses), 3)

    def to_geometry(q):
        return start.with_coordinates((q / weights).reshape(-1, 3))

    def evaluate(q):
        energy, grad = potential_fn(to_geometry(q))
        g_mw = np.asarray(grad, dtype=float).reshape(-1) / weights
        return float(energy), g_mw

    q = start.coordinates.reshape(-1) * weights
    energy, g_mw = evaluate(q)
    norm = np.linalg.norm(g_mw)
    if norm < gradient_cutoff:
        return [MassWeightedPathState(q, 0.0, None, energy)]
    path = [MassWeightedPathState(q, 0.0, -g_mw / norm, energy)]
    s = 0.0
    for _ in range(max_steps):
        v = -g_mw / norm
        h = step
        accepted = False
        for _ in range(6):  # initial try plus 5 halvings
            q_new = q + h * v
            e_new, g_new = evaluate(q_new)
            if e_new <= energy + 1e-8:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            break
        s += h
        q, energy, g_mw = q_new, e_new, g_new
        norm = np.linalg.norm(g_mw)
        if norm < gradient_cutoff:
            path.append(MassWeightedPathState(q, s, None, energy))
            break
        path.append(MassWeightedPathState(q, s, -g_mw / norm, energy))
    return path
