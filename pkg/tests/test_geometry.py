import math

import numpy as np
import pytest

from vqescan.constants import BOHR_PER_ANGSTROM
from vqescan.geometry import (Atom, GeometryError, MolecularGeometry,
                              RotationOperator, apply_rotation, atom,
                              bond_angle, bond_length, format_xyz, parse_xyz,
                              set_torsion, torsion_angle)


def ethane_like(dihedral=60.0):
    """Minimal H-C-C-H frame with an adjustable dihedral."""
    phi = math.radians(dihedral)
    return MolecularGeometry((
        atom("H", (1.0, 0.0, -0.5)),
        atom("C", (0.0, 0.0, 0.0)),
        atom("C", (0.0, 0.0, 1.5)),
        atom("H", (math.cos(phi), math.sin(phi), 2.0)),
    ))


class TestParseXyz:
    def test_single_atom(self):
        geom = parse_xyz("1\n\nH 0 0 0")
        assert geom.n_atoms == 1
        assert geom.charge == 0
        assert geom.spin_multiplicity == 1
        assert np.allclose(geom.atoms[0].position, 0.0)

    def test_h2_bond_converted_to_bohr(self):
        geom = parse_xyz("2\ncharge=0 mult=1\nH 0 0 0\nH 0 0 0.735")
        assert bond_length(geom, 0, 1) == pytest.approx(0.735 * BOHR_PER_ANGSTROM,
                                                        abs=1e-12)
        assert bond_length(geom, 0, 1) == pytest.approx(1.38894, abs=1e-5)

    def test_unknown_element_reports_line(self):
        with pytest.raises(GeometryError, match="line 4"):
            parse_xyz("2\n\nH 0 0 0\nXx 1 0 0")

    def test_malformed_coordinates(self):
        with pytest.raises(GeometryError, match="line 3"):
            parse_xyz("1\n\nH 0 zero 0")

    def test_count_mismatch(self):
        with pytest.raises(GeometryError, match="mismatch"):
            parse_xyz("3\n\nH 0 0 0\nH 0 0 1")

    def test_charge_and_multiplicity(self):
        geom = parse_xyz("1\ncharge=-1 mult=2\nH 0 0 0")
        assert geom.charge == -1
        assert geom.spin_multiplicity == 2
        assert geom.n_electrons == 2

    def test_roundtrip(self):
        geom = parse_xyz("2\ncharge=0 mult=1\nH 0.1 -0.2 0.3\nHe 1 2 3")
        again = parse_xyz(format_xyz(geom))
        assert np.allclose(again.coordinates, geom.coordinates, atol=1e-10)
        assert [a.element for a in again.atoms] == ["H", "He"]


class TestGeometryInvariants:
    def test_coincident_atoms_rejected(self):
        with pytest.raises(GeometryError, match="closer"):
            MolecularGeometry((atom("H", (0, 0, 0)), atom("H", (0, 0, 1e-8))))

    def test_bad_atom_fields(self):
        with pytest.raises(GeometryError):
            Atom("H", 0, 1.0, np.zeros(3))
        with pytest.raises(GeometryError):
            Atom("H", 1, -1.0, np.zeros(3))
        with pytest.raises(GeometryError):
            Atom("H", 1, 1.0, np.array([0.0, np.inf, 0.0]))


class TestTorsion:
    def test_eclipsed_is_zero(self):
        assert torsion_angle(ethane_like(0.0), 0, 1, 2, 3) == pytest.approx(0.0, abs=1e-9)

    def test_staggered_is_sixty(self):
        assert torsion_angle(ethane_like(60.0), 0, 1, 2, 3) == pytest.approx(60.0, abs=1e-9)

    def test_trans_is_180(self):
        assert torsion_angle(ethane_like(180.0), 0, 1, 2, 3) == pytest.approx(180.0, abs=1e-9)

    def test_range_is_half_open(self):
        # -180 must come back as +180
        assert torsion_angle(ethane_like(-180.0), 0, 1, 2, 3) == pytest.approx(180.0)
        assert torsion_angle(ethane_like(-60.0), 0, 1, 2, 3) == pytest.approx(-60.0)

    def test_colinear_is_degenerate(self):
        geom = MolecularGeometry((
            atom("H", (0, 0, -1)), atom("C", (0, 0, 0)),
            atom("C", (0, 0, 1.5)), atom("H", (1, 0, 2.5)),
        ))
        with pytest.raises(GeometryError, match="colinear"):
            torsion_angle(geom, 0, 1, 2, 3)

    def test_distinct_indices_required(self):
        with pytest.raises(GeometryError):
            torsion_angle(ethane_like(), 0, 1, 2, 2)

    def test_invariant_under_rigid_motion(self):
        rng = np.random.default_rng(7)
        geom = ethane_like(47.0)
        reference = torsion_angle(geom, 0, 1, 2, 3)
        for _ in range(50):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            rot = RotationOperator(axis, rng.uniform(-np.pi, np.pi),
                                   rng.normal(size=3))
            shift = rng.normal(size=3)
            moved = geom.with_coordinates(
                np.array([rot.apply_to_point(p) + shift for p in geom.coordinates]))
            assert torsion_angle(moved, 0, 1, 2, 3) == pytest.approx(reference,
                                                                     abs=1e-10)


class TestRotationOperator:
    def test_axis_must_be_normalized(self):
        with pytest.raises(GeometryError, match="axis norm"):
            RotationOperator(np.array([1.0, 1.0, 0.0]), 0.3)
        # tiny float noise is renormalized silently
        noisy = np.array([1.0 + 3e-7, 0.0, 0.0])
        rot = RotationOperator(noisy, 0.3)
        assert np.linalg.norm(rot.axis) == pytest.approx(1.0, abs=1e-15)

    def test_rodrigues_matches_explicit_form(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            theta = rng.uniform(-2 * np.pi, 2 * np.pi)
            mat = RotationOperator(axis, theta).matrix()
            n1, n2, n3 = axis
            cross = np.array([[0, -n3, n2], [n3, 0, -n1], [-n2, n1, 0]])
            explicit = (math.cos(theta) * np.eye(3) + math.sin(theta) * cross
                        + (1 - math.cos(theta)) * np.outer(axis, axis))
            assert np.max(np.abs(mat - explicit)) < 1e-12
            assert np.max(np.abs(mat.T @ mat - np.eye(3))) < 1e-12
            assert np.linalg.det(mat) == pytest.approx(1.0, abs=1e-12)

    def test_quarter_turn_about_z(self):
        rot = RotationOperator(np.array([0.0, 0.0, 1.0]), math.pi / 2)
        assert np.allclose(rot.apply_to_point([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0],
                           atol=1e-12)

    def test_c3_about_diagonal_permutes_axes(self):
        axis = np.ones(3) / math.sqrt(3.0)
        rot = RotationOperator(axis, 2 * math.pi / 3)
        assert np.allclose(rot.apply_to_point([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0],
                           atol=1e-12)


class TestApplyRotation:
    def test_zero_angle_is_identity(self):
        geom = ethane_like()
        rot = RotationOperator(np.array([0.0, 0.0, 1.0]), 0.0)
        out = apply_rotation(geom, rot, {0, 3})
        assert np.allclose(out.coordinates, geom.coordinates, atol=0)

    def test_only_listed_atoms_move(self):
        geom = ethane_like()
        rot = RotationOperator(np.array([0.0, 0.0, 1.0]), 0.4, np.zeros(3))
        out = apply_rotation(geom, rot, {3})
        assert np.allclose(out.coordinates[:3], geom.coordinates[:3], atol=0)
        assert not np.allclose(out.coordinates[3], geom.coordinates[3])

    def test_pairwise_distances_preserved(self):
        rng = np.random.default_rng(3)
        geom = ethane_like(25.0)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        rot = RotationOperator(axis, 1.1, rng.normal(size=3))
        out = apply_rotation(geom, rot, {0, 3})
        d_before = np.linalg.norm(geom.coordinates[0] - geom.coordinates[3])
        d_after = np.linalg.norm(out.coordinates[0] - out.coordinates[3])
        assert d_after == pytest.approx(d_before, abs=1e-12)

    def test_centroid_preserved_when_pivot_is_centroid(self):
        rng = np.random.default_rng(5)
        geom = ethane_like(100.0)
        subset = [0, 3]
        centroid = geom.coordinates[subset].mean(axis=0)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        out = apply_rotation(geom, RotationOperator(axis, 0.8, centroid), subset)
        assert np.allclose(out.coordinates[subset].mean(axis=0), centroid, atol=1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(GeometryError, match="out of range"):
            apply_rotation(ethane_like(), RotationOperator(np.array([0., 0., 1.]), 0.1),
                           {9})


class TestSetTorsion:
    def test_no_op_when_already_at_target(self):
        geom = ethane_like(60.0)
        out = set_torsion(geom, 0, 1, 2, 3, 60.0, {3})
        assert np.max(np.abs(out.coordinates - geom.coordinates)) < 1e-12

    def test_staggered_to_eclipsed_preserves_lengths(self):
        geom = ethane_like(60.0)
        out = set_torsion(geom, 0, 1, 2, 3, 0.0, {3})
        assert torsion_angle(out, 0, 1, 2, 3) == pytest.approx(0.0, abs=1e-9)
        assert bond_length(out, 2, 3) == pytest.approx(bond_length(geom, 2, 3),
                                                       abs=1e-12)
        assert bond_angle(out, 1, 2, 3) == pytest.approx(bond_angle(geom, 1, 2, 3),
                                                         abs=1e-9)

    def test_roundtrip_restores_coordinates(self):
        geom = ethane_like(60.0)
        there = set_torsion(geom, 0, 1, 2, 3, 180.0, {3})
        back = set_torsion(there, 0, 1, 2, 3, 60.0, {3})
        assert np.max(np.abs(back.coordinates - geom.coordinates)) < 1e-9

    def test_hits_target_modulo_360(self):
        rng = np.random.default_rng(13)
        geom = ethane_like(37.0)
        for target in rng.uniform(-350, 350, size=25):
            out = set_torsion(geom, 0, 1, 2, 3, target, {3})
            measured = torsion_angle(out, 0, 1, 2, 3)
            assert (measured - target) % 360.0 == pytest.approx(0.0, abs=1e-9) or \
                   (measured - target) % 360.0 == pytest.approx(360.0, abs=1e-9)

    def test_moving_set_must_contain_l(self):
        with pytest.raises(GeometryError, match="contain"):
            set_torsion(ethane_like(), 0, 1, 2, 3, 10.0, {0})

    def test_moving_set_must_exclude_axis(self):
        with pytest.raises(GeometryError, match="exclude"):
            set_torsion(ethane_like(), 0, 1, 2, 3, 10.0, {2, 3})
