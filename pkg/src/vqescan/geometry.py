"""Molecular geometries, internal coordinates and axis-angle rotations.

Geometries are immutable: every operation returns a new object. Coordinates
are stored in Bohr; XYZ files are read and written in Angstrom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ANGSTROM_PER_BOHR, BOHR_PER_ANGSTROM, element_data


class GeometryError(ValueError):
    """Malformed geometry input or degenerate coordinate request."""


@dataclass(frozen=True)
class Atom:
    element: str
    atomic_number: int
    mass: float
    position: np.ndarray  # (3,) Bohr

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.atomic_number < 1:
            raise GeometryError(f"atomic_number must be >= 1, got {self.atomic_number}")
        if self.mass <= 0:
            raise GeometryError(f"mass must be positive, got {self.mass}")
        if self.position.shape != (3,) or not np.all(np.isfinite(self.position)):
            raise GeometryError("position must be a finite 3-vector")


def atom(element: str, position, **overrides) -> Atom:
    """Build an Atom from a symbol, filling Z and mass from the element table."""
    z, mass = element_data(element)
    return Atom(
        element=element.strip().capitalize(),
        atomic_number=overrides.get("atomic_number", z),
        mass=overrides.get("mass", mass),
        position=np.asarray(position, dtype=float),
    )


@dataclass(frozen=True)
class MolecularGeometry:
    atoms: tuple[Atom, ...]
    charge: int = 0
    spin_multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise GeometryError("geometry needs at least one atom")
        if self.spin_multiplicity < 1:
            raise GeometryError("spin multiplicity must be >= 1")
        coords = self.coordinates
        for i in range(len(coords)):
            for j in range(i + 1, len(coords)):
                if np.linalg.norm(coords[i] - coords[j]) < 1e-6:
                    raise GeometryError(f"atoms {i} and {j} closer than 1e-6 Bohr")
        if self.n_electrons < 0:
            raise GeometryError("negative electron count")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def coordinates(self) -> np.ndarray:
        """(n_atoms, 3) array of positions in Bohr."""
        return np.array([a.position for a in self.atoms])

    @property
    def n_electrons(self) -> int:
        return sum(a.atomic_number for a in self.atoms) - self.charge

    @property
    def masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.atoms])

    def with_coordinates(self, coords: np.ndarray) -> "MolecularGeometry":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.n_atoms, 3):
            raise GeometryError(f"expected shape {(self.n_atoms, 3)}, got {coords.shape}")
        new_atoms = tuple(
            Atom(a.element, a.atomic_number, a.mass, coords[i])
            for i, a in enumerate(self.atoms)
        )
        return MolecularGeometry(new_atoms, self.charge, self.spin_multiplicity)

    def nuclear_repulsion(self) -> float:
        """Sum of Z_I Z_J / |R_I - R_J| over nuclear pairs, in Hartree."""
        coords = self.coordinates
        zs = [a.atomic_number for a in self.atoms]
        e = 0.0
        for i in range(self.n_atoms):
            for j in range(i + 1, self.n_atoms):
                e += zs[i] * zs[j] / np.linalg.norm(coords[i] - coords[j])
        return e


@dataclass(frozen=True)
class RotationOperator:
    """Axis-angle rotation about a pivot point.

    The 3x3 matrix form is the Rodrigues expression
    cos(t)*I + sin(t)*[n]_x + (1 - cos(t))*n n^T for unit axis n.
    """

    axis: np.ndarray
    angle: float  # radians
    pivot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        piv = np.asarray(self.pivot, dtype=float)
        norm = np.linalg.norm(ax)
        if abs(norm - 1.0) > 1e-6:
            raise GeometryError(f"rotation axis norm {norm} deviates from 1 by more than 1e-6")
        object.__setattr__(self, "axis", ax / norm)
        object.__setattr__(self, "pivot", piv)

    def matrix(self) -> np.ndarray:
        n1, n2, n3 = self.axis
        c, s = math.cos(self.angle), math.sin(self.angle)
        cross = np.array([[0.0, -n3, n2], [n3, 0.0, -n1], [-n2, n1, 0.0]])
        return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(self.axis, self.axis)

    def apply_to_point(self, p: np.ndarray) -> np.ndarray:
        return self.pivot + self.matrix() @ (np.asarray(p, dtype=float) - self.pivot)


def bond_length(geom: MolecularGeometry, i: int, j: int) -> float:
    """Distance between atoms i and j in Bohr."""
    return float(np.linalg.norm(geom.atoms[i].position - geom.atoms[j].position))


def bond_angle(geom: MolecularGeometry, i: int, j: int, k: int) -> float:
    """Angle i-j-k in degrees."""
    u = geom.atoms[i].position - geom.atoms[j].position
    v = geom.atoms[k].position - geom.atoms[j].position
    cosang = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.degrees(math.acos(max(-1.0, min(1.0, cosang))))


def torsion_angle(geom: MolecularGeometry, i: int, j: int, k: int, l: int) -> float:
    """Signed dihedral i-j-k-l in degrees, range (-180, 180].

    Sign follows the right-hand rule about the j->k axis: rotating atom l
    right-handed about j->k increases the angle. Cis (eclipsed) is 0, anti
    (trans) is 180.
    """
    if len({i, j, k, l}) != 4:
        raise GeometryError("torsion needs four distinct atom indices")
    r = geom.coordinates
    b1 = r[j] - r[i]
    b2 = r[k] - r[j]
    b3 = r[l] - r[k]
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    if np.linalg.norm(n1) < 1e-10 or np.linalg.norm(n2) < 1e-10:
        raise GeometryError(f"colinear atoms make dihedral ({i},{j},{k},{l}) degenerate")
    x = np.dot(n1, n2)
    y = np.dot(b1, n2) * np.linalg.norm(b2)
    ang = math.degrees(math.atan2(y, x))
    if ang <= -180.0:
        ang += 360.0
    return ang


def apply_rotation(geom: MolecularGeometry, rot: RotationOperator,
                   atom_indices) -> MolecularGeometry:
    """Rotate the listed atoms; all other atoms stay fixed."""
    indices = set(atom_indices)
    for idx in indices:
        if not 0 <= idx < geom.n_atoms:
            raise GeometryError(f"atom index {idx} out of range")
    mat = rot.matrix()
    coords = geom.coordinates.copy()
    for idx in indices:
        coords[idx] = rot.pivot + mat @ (coords[idx] - rot.pivot)
    return geom.with_coordinates(coords)


def set_torsion(geom: MolecularGeometry, i: int, j: int, k: int, l: int,
                target_degrees: float, moving_set) -> MolecularGeometry:
    """Rotate moving_set rigidly about the j->k axis so torsion(i,j,k,l) = target.

    The pivot is atom k; bond lengths and angles inside moving_set are
    preserved exactly (rigid rotation). moving_set must contain l and must
    not contain i, j or k.
    """
    moving = set(moving_set)
    if l not in moving:
        raise GeometryError("moving_set must contain the final torsion atom l")
    if moving & {i, j, k}:
        raise GeometryError("moving_set must exclude torsion atoms i, j, k")
    rj, rk = geom.atoms[j].position, geom.atoms[k].position
    axis_vec = rk - rj
    axis_len = np.linalg.norm(axis_vec)
    if axis_len < 1e-6:
        raise GeometryError(f"degenerate torsion axis: atoms {j} and {k} coincide")
    current = torsion_angle(geom, i, j, k, l)
    delta = (target_degrees - current) % 360.0
    if delta > 180.0:
        delta -= 360.0
    rot = RotationOperator(axis=axis_vec / axis_len, angle=math.radians(delta), pivot=rk)
    return apply_rotation(geom, rot, moving)


def parse_xyz(text: str) -> MolecularGeometry:
    """Parse standard XYZ text (coordinates in Angstrom) into a geometry.

    The comment line may carry ``charge=<int>`` and ``mult=<int>`` key-value
    pairs; they default to 0 and 1. Errors report 1-based line numbers.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GeometryError("line 1: missing atom count")
    try:
        count = int(lines[0].strip())
    except ValueError:
        raise GeometryError(f"line 1: expected atom count, got {lines[0].strip()!r}") from None
    if count < 1:
        raise GeometryError("line 1: atom count must be positive")
    comment = lines[1] if len(lines) > 1 else ""
    charge, mult = 0, 1
    for token in comment.split():
        key, _, value = token.partition("=")
        try:
            if key == "charge":
                charge = int(value)
            elif key == "mult":
                mult = int(value)
        except ValueError:
            raise GeometryError(f"line 2: bad value in {token!r}") from None

    atoms = []
    for n, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 4:
            raise GeometryError(f"line {n}: expected 'Symbol x y z', got {line.strip()!r}")
        symbol = parts[0]
        try:
            z, mass = element_data(symbol)
        except KeyError:
            raise GeometryError(f"line {n}: unknown element symbol {symbol!r}") from None
        try:
            xyz = [float(p) for p in parts[1:4]]
        except ValueError:
            raise GeometryError(f"line {n}: malformed coordinates in {line.strip()!r}") from None
        pos = np.array(xyz) * BOHR_PER_ANGSTROM
        atoms.append(Atom(symbol.strip().capitalize(), z, mass, pos))
        if len(atoms) == count:
            break
    if len(atoms) != count:
        raise GeometryError(
            f"line {len(lines)}: atom count mismatch: header says {count}, found {len(atoms)}")
    return MolecularGeometry(tuple(atoms), charge=charge, spin_multiplicity=mult)


def format_xyz(geom: MolecularGeometry, comment: str | None = None) -> str:
    """Render a geometry as XYZ text (Angstrom, 12 significant digits)."""
    if comment is None:
        comment = f"charge={geom.charge} mult={geom.spin_multiplicity}"
    rows = [str(geom.n_atoms), comment]
    for a in geom.atoms:
        x, y, z = a.position * ANGSTROM_PER_BOHR
        rows.append(f"{a.element:<3s} {x: .12g} {y: .12g} {z: .12g}")
    return "\n".join(rows) + "\n"


def load_xyz(path) -> MolecularGeometry:
    with open(path, encoding="utf-8") as fh:
        return parse_xyz(fh.read())


def save_xyz(geom: MolecularGeometry, path, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_xyz(geom, comment))
