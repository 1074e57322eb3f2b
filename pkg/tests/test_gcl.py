import numpy as np
import pytest

from gclkit import gcl
from gclkit.gcl import (
    aevi_increments,
    cell_volumes,
    dvoldt_trimap,
    extract_linear_and_periodic,
    ifmv_avg,
    ifmv_nlfd,
    ifmv_trimap,
    ifmv_ts,
    lvi_increments,
    quad_flux,
    quad_flux_by_direction,
    sweep_volume,
    sweep_volume_by_direction,
    trimap_field,
)
from gclkit.hexmesh import FACE_LOOPS, REF_CORNERS, hex_volume
from gclkit.motion import MotionCase, analytic_increment_case3, sample_motion
from gclkit.spectral import SpectralOperator
from gclkit.verify import quad_flux_oracle, random_hexahedra


def case3_face_trajectory(times, radius=0.05, y30=0.28, depth=0.24):
    """The benchmark quad: fixed bottom edge, top edge circling (case 3)."""
    t = np.atleast_1d(times)
    dx = radius * (1 - np.cos(2 * np.pi * t))
    dy = radius * np.sin(2 * np.pi * t)
    zeros = np.zeros_like(t)
    a = np.stack([zeros, zeros, zeros], -1)
    b = np.stack([dx, y30 + dy, zeros], -1)
    c = np.stack([dx, y30 + dy, np.full_like(t, depth)], -1)
    d = np.stack([zeros, zeros, np.full_like(t, depth)], -1)
    return np.stack([a, b, c, d], axis=-2)


# -- face flux primitives -------------------------------------------------


def test_quad_flux_matches_quadrature(rng):
    quads = rng.normal(size=(500, 4, 3))
    vels = rng.normal(size=(500, 4, 3))
    exact = quad_flux_oracle(quads, vels)
    scale = np.abs(exact) + 1.0
    assert (np.abs(quad_flux(quads, vels) - exact) / scale).max() <= 1e-13


def test_quad_flux_directions_sum_to_total(rng):
    quads = rng.normal(size=(200, 4, 3))
    vels = rng.normal(size=(200, 4, 3))
    by_dir = quad_flux_by_direction(quads, vels)
    total = quad_flux(quads, vels)
    assert np.abs(by_dir.sum(-1) - total).max() <= 1e-13 * (np.abs(total).max() + 1)


def test_unit_face_at_unit_normal_velocity():
    top = REF_CORNERS[FACE_LOOPS[1]]  # +z face of the unit cube
    vel = np.tile([0.0, 0.0, 1.0], (4, 1))
    assert quad_flux(top, vel) == pytest.approx(1.0, rel=1e-14)


def test_zero_velocity_zero_flux(rng):
    quads = rng.normal(size=(10, 4, 3))
    assert np.abs(quad_flux(quads, np.zeros((10, 4, 3)))).max() == 0.0


# -- trilinear volume rate and IFMV ---------------------------------------


def test_trimap_faces_sum_to_volume_rate(rng):
    hexes = random_hexahedra(1000, rng)
    vels = rng.normal(size=(1000, 8, 3))
    total, by_dir = ifmv_trimap(hexes, vels)
    rate = dvoldt_trimap(hexes, vels)
    scale = np.abs(rate) + np.abs(total).sum(-1)
    assert (np.abs(total.sum(-1) - rate) / scale).max() <= 1e-13
    assert np.abs(by_dir.sum(-1) - total).max() <= 1e-13 * np.abs(total).max()


def test_dvoldt_zero_for_rigid_motions(rng):
    corners = random_hexahedra(1, rng)[0]
    translation = np.tile([0.4, -1.0, 0.2], (8, 1))
    assert abs(dvoldt_trimap(corners, translation)) <= 1e-13
    omega = np.array([0.3, -0.5, 1.1])
    rotation = np.cross(omega, corners)
    assert abs(dvoldt_trimap(corners, rotation)) <= 1e-13 * np.abs(rotation).max()


def test_dvoldt_uniform_scaling():
    s, s_dot = 1.3, 0.7
    corners = s * REF_CORNERS
    vels = s_dot * REF_CORNERS
    expected = 3 * s**2 * s_dot * 1.0
    assert dvoldt_trimap(corners, vels) == pytest.approx(expected, rel=1e-13)


def test_dvoldt_matches_finite_difference(rng):
    corners = random_hexahedra(20, rng)
    vels = rng.normal(size=(20, 8, 3))
    h = 1e-6
    fd = (hex_volume(corners + h * vels) - hex_volume(corners - h * vels)) / (2 * h)
    rate = dvoldt_trimap(corners, vels)
    assert (np.abs(rate - fd) / np.abs(fd)).max() <= 1e-6


# -- sweep volumes ----------------------------------------------------------


def test_sweep_closure_identity(rng):
    # sum of the six face sweeps equals the volume difference, any deformation
    start = random_hexahedra(100, rng)
    end = random_hexahedra(100, rng)
    total = np.zeros(100)
    for loop in FACE_LOOPS:
        total += sweep_volume(start[:, loop], end[:, loop])
    dv = hex_volume(end) - hex_volume(start)
    assert np.abs(total - dv).max() <= 1e-13


def test_directional_sweep_sums_to_hex_volume(rng):
    q0 = rng.normal(size=(200, 4, 3))
    q1 = q0 + 0.3 * rng.normal(size=(200, 4, 3))
    split = sweep_volume_by_direction(q0, q1).sum(-1)
    whole = sweep_volume(q0, q1)
    assert np.abs(split - whole).max() <= 1e-12 * (np.abs(whole).max() + 1)


def test_rigid_normal_translation_sweep():
    quad = REF_CORNERS[FACE_LOOPS[1]]  # planar unit face, +z loop
    d = 0.37
    assert sweep_volume(quad, quad + [0, 0, d]) == pytest.approx(d, rel=1e-13)


# -- increment series -------------------------------------------------------


@pytest.fixture(scope="module")
def case1_setup(small_mesh_module):
    mesh = small_mesh_module
    traj = sample_motion(mesh, MotionCase.for_case("case1"), 3)
    return mesh, traj, SpectralOperator(3)


@pytest.fixture(scope="module")
def small_mesh_module():
    from gclkit.hexmesh import build_box_mesh

    return build_box_mesh(5, 5, 5, 3.2, 2.8, 2.4)


def test_increments_start_at_zero(case1_setup):
    mesh, traj, _ = case1_setup
    for maker in (lvi_increments, aevi_increments):
        series = maker(mesh, traj)
        assert np.abs(series.totals[..., 0]).max() == 0.0
        assert np.abs(series.by_direction[..., 0, :]).max() == 0.0


def test_lvi_equals_aevi_on_linear_motion(case1_setup):
    mesh, traj, _ = case1_setup
    lvi = lvi_increments(mesh, traj)
    aevi = aevi_increments(mesh, traj)
    assert np.abs(lvi.totals - aevi.totals).max() <= 1e-13


def test_extraction_of_synthetic_series():
    op = SpectralOperator(4)
    times = np.append(op.times, op.period)
    slope = 0.7
    series = gcl.IncrementSeries(
        method="aevi",
        period=op.period,
        times=times,
        totals=(slope * times + np.sin(2 * np.pi * times))[None, None, :],
        by_direction=np.zeros((1, 1, len(times), 3)),
    )
    series = extract_linear_and_periodic(series)
    assert series.linear_slope[0, 0] == pytest.approx(slope, abs=1e-12)
    np.testing.assert_allclose(
        series.periodic_part[0, 0], np.sin(2 * np.pi * op.times), atol=1e-12
    )


def test_extraction_closed_sweep_zero_slope(case1_setup):
    # the closing configuration equals the initial one, so the per-step
    # sweeps cancel down to accumulated rounding; the noise floor scales with
    # the cubed coordinate magnitude inside the volume expressions
    mesh, traj, _ = case1_setup
    series = extract_linear_and_periodic(aevi_increments(mesh, traj))
    floor = 1e-13 * np.abs(traj.positions).max() ** 3
    assert np.abs(series.linear_slope).max() <= floor
    np.testing.assert_allclose(
        series.periodic_part, series.totals[..., :-1], atol=floor
    )


def test_lvi_failure_mode_case3_face():
    radius, y30, depth = 0.05, 0.28, 0.24
    quads = case3_face_trajectory(np.array([0.0, 1.0]), radius, y30, depth)
    lvi_at_period = sweep_volume(quads[0], quads[1])
    exact = analytic_increment_case3(radius, y30, depth, 1.0)
    assert abs(lvi_at_period) <= 1e-15  # degenerate hexahedron
    assert exact == pytest.approx(depth * np.pi * radius**2, rel=1e-13)


def test_aevi_converges_on_case3_face():
    radius, y30, depth = 0.05, 0.28, 0.24
    target = analytic_increment_case3(radius, y30, depth, 1.0)
    errors = []
    nts_values = np.array([11, 21, 41, 81])
    for nts in nts_values:
        times = np.append(np.arange(nts) / nts, 1.0)
        quads = case3_face_trajectory(times, radius, y30, depth)
        total = sweep_volume(quads[:-1], quads[1:]).sum()
        errors.append(abs(total - target))
    errors = np.array(errors)
    assert (errors[1:] < errors[:-1]).all()
    assert errors[2] / abs(target) <= 1.0 / 41.0  # at least first order in tau


# -- IFMV pipelines ---------------------------------------------------------


def test_nlfd_pipeline_on_synthetic_sine():
    op = SpectralOperator(5)
    times = np.append(op.times, op.period)
    totals = np.sin(2 * np.pi * times)[None, None, :] * np.ones((1, 6, 1))
    series = gcl.IncrementSeries(
        "aevi", op.period, times, totals, np.zeros((1, 6, len(times), 3))
    )
    field = ifmv_nlfd(extract_linear_and_periodic(series), op)
    expected = 2 * np.pi * np.cos(2 * np.pi * op.times)
    np.testing.assert_allclose(field.total[0, 0], expected, atol=1e-12)


def test_nlfd_zero_increments_zero_ifmv():
    op = SpectralOperator(3)
    times = np.append(op.times, op.period)
    series = gcl.IncrementSeries(
        "lvi", op.period, times, np.zeros((2, 6, len(times))),
        np.zeros((2, 6, len(times), 3)),
    )
    field = ifmv_nlfd(extract_linear_and_periodic(series), op)
    assert np.abs(field.total).max() == 0.0


def test_ts_constant_slope_series():
    op = SpectralOperator(4)
    times = np.append(op.times, op.period)
    slope = 1.9
    series = gcl.IncrementSeries(
        "aevi", op.period, times, slope * times[None, None, :] * np.ones((1, 6, 1)),
        np.zeros((1, 6, len(times), 3)),
    )
    field = ifmv_ts(extract_linear_and_periodic(series), op)
    np.testing.assert_allclose(field.total, slope, atol=1e-12)


def test_ts_zero_increments_zero_ifmv():
    op = SpectralOperator(3)
    times = np.append(op.times, op.period)
    series = gcl.IncrementSeries(
        "lvi", op.period, times, np.zeros((2, 6, len(times))),
        np.zeros((2, 6, len(times), 3)),
    )
    field = ifmv_ts(extract_linear_and_periodic(series), op)
    assert np.abs(field.total).max() == 0.0
    assert np.abs(field.by_direction).max() == 0.0


def test_gcl_identity_case1(case1_setup):
    mesh, traj, op = case1_setup
    series = extract_linear_and_periodic(aevi_increments(mesh, traj))
    field = ifmv_nlfd(series, op)
    dvdt = op.differentiate(cell_volumes(mesh, traj))
    assert np.abs(field.sum_over_faces() - dvdt).max() <= 1e-12


def test_ts_equals_nlfd(case1_setup):
    mesh, traj, op = case1_setup
    traj3 = sample_motion(mesh, MotionCase.for_case("case3"), 3)
    series = extract_linear_and_periodic(aevi_increments(mesh, traj3))
    a = ifmv_nlfd(series, op)
    b = ifmv_ts(series, op)
    assert np.abs(a.total - b.total).max() <= 1e-12
    assert np.abs(a.by_direction - b.by_direction).max() <= 1e-12


def test_avg_on_stationary_mesh(small_mesh_module):
    mesh = small_mesh_module
    traj = sample_motion(mesh, MotionCase.for_case("rigid-translation", amplitude=(0, 0, 0)), 1)
    field = ifmv_avg(mesh, traj)
    assert np.abs(field.total).max() == 0.0


def test_avg_exact_for_rigid_translation(small_mesh_module):
    mesh = small_mesh_module
    traj = sample_motion(mesh, MotionCase.for_case("rigid-translation"), 2)
    field = ifmv_avg(mesh, traj)
    reference = trimap_field(mesh, traj)
    assert np.abs(field.total - reference.total).max() <= 1e-13


def test_trimap_field_zero_velocity(small_mesh_module):
    mesh = small_mesh_module
    traj = sample_motion(mesh, MotionCase.for_case("rigid-translation", amplitude=(0, 0, 0)), 1)
    field = trimap_field(mesh, traj)
    assert np.abs(field.total).max() == 0.0


def test_mesh_slope_matches_standalone_face(paper_mesh):
    # cell (0,0,5): its +x face has the two y=0 corners fixed and the two
    # interior corners circling, i.e. exactly the standalone benchmark quad
    traj = sample_motion(paper_mesh, MotionCase.for_case("case3"), 10)
    series = extract_linear_and_periodic(aevi_increments(paper_mesh, traj))
    cell = 0 + 10 * (0 + 10 * 5)
    nts = 21
    times = np.append(np.arange(nts) / nts, 1.0)
    quads = case3_face_trajectory(times, 0.05, 0.28, 0.24)
    standalone = sweep_volume(quads[:-1], quads[1:]).sum()
    assert series.linear_slope[cell, 5] == pytest.approx(standalone, rel=1e-12)
