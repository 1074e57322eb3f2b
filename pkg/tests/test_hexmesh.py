import numpy as np
import pytest

from gclkit import hexmesh
from gclkit.hexmesh import (
    REF_CORNERS,
    build_box_mesh,
    cell_geometry,
    corner_jacobians,
    detect_degenerate,
    face_area_vectors,
    hex_volume,
)
from gclkit.motion import MotionCase, sample_motion
from gclkit.verify import gauss_volume_oracle, random_hexahedra


def test_paper_mesh_counts_and_volumes(paper_mesh):
    assert paper_mesh.n_cells == 1000
    assert paper_mesh.n_vertices == 1331
    vols = hex_volume(paper_mesh.cell_corners())
    assert np.allclose(vols, 0.32 * 0.28 * 0.24, rtol=1e-12)


def test_unit_cube_mesh():
    mesh = build_box_mesh(1, 1, 1, 1.0, 1.0, 1.0)
    assert mesh.n_cells == 1
    assert hex_volume(mesh.cell_corners())[0] == pytest.approx(1.0, rel=1e-14)


def test_two_cell_partition_of_box():
    mesh = build_box_mesh(2, 1, 1, 2.0, 1.0, 1.0)
    vols = hex_volume(mesh.cell_corners())
    assert vols.shape == (2,)
    assert np.allclose(vols, 1.0, rtol=1e-14)
    assert vols.sum() == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize(
    "args",
    [
        (0, 1, 1, 1.0, 1.0, 1.0),
        (1, -2, 1, 1.0, 1.0, 1.0),
        (1, 1, 1, 0.0, 1.0, 1.0),
        (1, 1, 1, 1.0, -3.0, 1.0),
    ],
)
def test_build_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        build_box_mesh(*args)


def test_hex_volume_unit_cube_and_scaling():
    assert hex_volume(REF_CORNERS) == pytest.approx(1.0, abs=1e-15)
    assert hex_volume(2.0 * REF_CORNERS) == pytest.approx(8.0, rel=1e-14)


def test_hex_volume_matches_gauss_quadrature(rng):
    hexes = random_hexahedra(1000, rng, scale=0.2)
    exact = gauss_volume_oracle(hexes)
    rel = np.abs(hex_volume(hexes) - exact) / np.abs(exact)
    assert rel.max() <= 1e-13


def test_hex_volume_translation_invariant(rng):
    corners = random_hexahedra(1, rng)[0]
    shifted = corners + np.array([11.0, -7.0, 3.0])
    assert hex_volume(shifted) == pytest.approx(hex_volume(corners), rel=1e-12)


def test_face_area_vectors_unit_cube():
    vectors = face_area_vectors(REF_CORNERS)
    expected = np.array(
        [[0, 0, -1], [0, 0, 1], [0, 1, 0], [0, -1, 0], [-1, 0, 0], [1, 0, 0]],
        dtype=float,
    )
    np.testing.assert_allclose(vectors, expected, atol=1e-15)


def test_face_area_closure_random(rng):
    hexes = random_hexahedra(1000, rng)
    vectors = face_area_vectors(hexes)
    defect = np.linalg.norm(vectors.sum(axis=1), axis=-1)
    max_area = np.linalg.norm(vectors, axis=-1).max(axis=-1)
    assert (defect <= 1e-13 * max_area).all()


def test_face_area_planar_quad(rng):
    # planar quad with a known area and normal: the bottom face of a prism
    normal = np.array([1.0, 2.0, -0.5])
    normal /= np.linalg.norm(normal)
    u = np.cross(normal, [0.0, 0.0, 1.0])
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    # convex planar loop in the (u, v) plane; shoelace gives its area
    pts2d = np.array([[0.0, 0.0], [1.3, 0.1], [1.5, 1.2], [-0.2, 0.9]])
    area = 0.5 * abs(
        np.sum(
            pts2d[:, 0] * np.roll(pts2d[:, 1], -1)
            - np.roll(pts2d[:, 0], -1) * pts2d[:, 1]
        )
    )
    quad = pts2d[:, :1] * u + pts2d[:, 1:] * v
    bottom = quad
    top = quad + normal  # prism; bottom face loop (3,2,1,0) has outward -normal
    corners = np.vstack([bottom, top])
    vectors = face_area_vectors(corners)
    np.testing.assert_allclose(vectors[0], -area * normal, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(vectors[1], area * normal, rtol=1e-13, atol=1e-15)


def test_corner_jacobians_positive_on_valid_cells(rng):
    hexes = random_hexahedra(200, rng, scale=0.2)
    assert corner_jacobians(hexes).min() > 0.0


def test_cell_geometry_record(rng):
    corners = random_hexahedra(1, rng, scale=0.2)[0]
    geom = cell_geometry(corners)
    assert geom.volume > 0.0
    assert geom.volume == pytest.approx(hex_volume(corners), rel=1e-14)
    assert geom.face_area_vectors.shape == (6, 3)
    assert (geom.jacobian_signs == 1.0).all()


def test_detect_degenerate_undeformed(paper_mesh):
    assert len(detect_degenerate(paper_mesh.cell_corners())) == 0


def test_detect_degenerate_reports_incident_cells():
    mesh = build_box_mesh(3, 3, 3, 1.0, 1.0, 1.0)
    victim = mesh.interior_vertex_ids()[0]
    positions = mesh.vertices.copy()
    positions[victim] += np.array([0.8, 0.0, 0.0])  # push past the next plane
    flagged = set(detect_degenerate(mesh.cell_corners(positions)).tolist())
    incident = {
        c for c in range(mesh.n_cells) if victim in mesh.cell_vertex_ids[c]
    }
    assert flagged
    assert flagged <= incident


def test_case2_alpha_0p1_is_admissible(paper_mesh):
    case = MotionCase.for_case("case2", alpha0=0.1)
    trajectory = sample_motion(paper_mesh, case, 3)  # raises on degeneracy
    for positions in trajectory.positions:
        assert len(detect_degenerate(paper_mesh.cell_corners(positions))) == 0


def test_volume_partition_of_deformed_box(rng):
    mesh = build_box_mesh(6, 5, 4, 1.3, 1.1, 0.9)
    positions = mesh.vertices.copy()
    interior = mesh.interior_vertex_ids()
    spacing = min(1.3 / 6, 1.1 / 5, 0.9 / 4)
    positions[interior] += rng.uniform(-0.3, 0.3, (len(interior), 3)) * spacing
    total = hex_volume(mesh.cell_corners(positions)).sum()
    assert total == pytest.approx(1.3 * 1.1 * 0.9, rel=1e-12)


def test_volume_of_collapsed_hexahedron_is_zero(rng):
    # degenerate sweep hexahedra (coincident top and bottom) cancel among the
    # six face contributions down to rounding level
    quad = rng.normal(size=(4, 3))
    scale = np.abs(quad).max() ** 3
    assert abs(hex_volume(np.vstack([quad, quad]))) <= 1e-15 * scale
