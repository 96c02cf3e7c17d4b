"""Finite-size (mobility-tensor) image systems: free-space form, mono/poly
tables, Faxen-operator oracle, mobility matrix properties."""
import numpy as np
import pytest

from wallstokes import (CoincidentPoints, StokesSource, build_rpy_sums_mono,
                        build_rpy_sums_poly, combine_rpy_mono,
                        combine_rpy_poly, direct_sum, mobility_matrix,
                        neutral_image_velocity, rpy_free_space,
                        rpy_velocity_poly, rpy_wall_correction)
from wallstokes.kernels import stokeslet

from oracles import faxen_fd, rel_err, unit


def _source(rng, radius=0.0, zmin=0.15):
    pos = rng.uniform(0.1, 0.9, 3)
    pos[2] = rng.uniform(zmin, 0.5)
    return StokesSource(pos, rng.uniform(-1, 1, 3), radius)


def _image_field(src_force, src_radius=0.0):
    """Radius-0 image velocity as a function of (x, y) for the FD oracle."""
    def field(x, y):
        return neutral_image_velocity(
            x[None, :], [StokesSource(y, src_force, src_radius)])[0]
    return field


def test_free_space_point_limit():
    rng = np.random.default_rng(41)
    src = _source(rng)
    x = rng.uniform(0.1, 0.9, (4, 3)) + np.array([0, 0, 0.6])
    u = rpy_free_space(x, src)
    ref = stokeslet(x, src.position, src.force).value
    np.testing.assert_array_equal(u, ref)


def test_free_space_block_symmetric_under_exchange():
    rng = np.random.default_rng(42)
    x = np.array([0.2, 0.3, 0.9])
    y = np.array([0.7, 0.6, 0.4])
    a, b = 0.06, 0.11
    block_xy = np.column_stack([
        rpy_free_space((x[None, :], a), StokesSource(y, unit(k), b))[0]
        for k in range(3)])
    block_yx = np.column_stack([
        rpy_free_space((y[None, :], b), StokesSource(x, unit(k), a))[0]
        for k in range(3)])
    assert rel_err(block_xy, block_yx.T) <= 1e-14


def test_free_space_nested_fd_faxen():
    rng = np.random.default_rng(43)
    for _ in range(10):
        y = rng.uniform(0.1, 0.9, 3)
        x = rng.uniform(0.1, 0.9, 3)
        if np.linalg.norm(x - y) < 0.3:
            continue
        f = rng.uniform(-1, 1, 3)
        a, b = rng.uniform(0.02, 0.1, 2)

        def field(xx, yy):
            return stokeslet(xx, yy, f).value

        ref = faxen_fd(field, x, y, a, b,
                       h=1e-3 * np.linalg.norm(x - y))
        got = rpy_free_space((x[None, :], a), StokesSource(y, f, b))[0]
        assert rel_err(got, ref) <= 1e-4


def test_build_mono_strengths_table():
    src = StokesSource([0.2, 0.7, 0.5], [1.0, 2.0, 3.0], 0.1)
    x = np.array([[0.5, 0.5, 0.25]])
    reqs = build_rpy_sums_mono([src], x, 0.1)
    assert len(reqs) == 6
    stokes, mono, mono_z, dip, dip_z, quad = reqs
    np.testing.assert_array_equal(
        quad.strengths[0], [[6.0, 0, 0], [0, 6.0, 0], [2.0, 4.0, 0]])
    np.testing.assert_array_equal(dip_z.strengths,
                                  [[0, 0, 3.0], [0, 0, 3.0]])
    np.testing.assert_array_equal(dip_z.sources,
                                  [[0.2, 0.7, 0.5], [0.2, 0.7, -0.5]])
    assert stokes.orders == frozenset(("value", "laplacian"))
    assert mono.orders == frozenset(("value", "gradient", "hessian"))
    assert dip_z.orders == frozenset(("gradient",))


def test_build_mono_zero_force():
    src = StokesSource([0.2, 0.7, 0.5], [0.0, 0.0, 0.0], 0.1)
    reqs = build_rpy_sums_mono([src], np.array([[0.5, 0.5, 0.25]]), 0.1)
    for req in reqs:
        assert np.all(req.strengths == 0.0)


def test_build_poly_size_weighting():
    x = np.array([[0.5, 0.5, 0.25]])
    src0 = StokesSource([0.2, 0.7, 0.5], [1.0, 2.0, 3.0], 0.0)
    reqs = build_rpy_sums_poly([src0], x)
    assert len(reqs) == 7
    # radius 0 kills every size-weighted strength
    for idx in (1, 5, 6):
        assert np.all(reqs[idx].strengths == 0.0)
    # radius 1 makes the weighted strengths coincide with the mono table
    src1 = StokesSource([0.2, 0.7, 0.5], [1.0, 2.0, 3.0], 1.0)
    poly = build_rpy_sums_poly([src1], x)
    mono = build_rpy_sums_mono([src1], x, 1.0)
    np.testing.assert_array_equal(poly[0].strengths, mono[0].strengths)
    np.testing.assert_array_equal(poly[5].strengths, mono[4].strengths)
    np.testing.assert_array_equal(poly[6].strengths, mono[5].strengths)


def test_build_sums_neutral():
    rng = np.random.default_rng(44)
    sources = [_source(rng, radius=rng.uniform(0, 0.2)) for _ in range(30)]
    x = np.array([[0.5, 0.5, 0.25]])
    for reqs in (build_rpy_sums_poly(sources, x),
                 build_rpy_sums_mono(sources, x, 0.1)):
        for req in reqs:
            if req.kernel in ("stokeslet", "laplace-monopole"):
                scale = np.abs(req.strengths).sum()
                net = np.max(np.abs(req.strengths.sum(axis=0)))
                assert net <= 1e-15 * max(scale, 1e-300)


def test_mono_radius_zero_reduces_to_point_image():
    rng = np.random.default_rng(45)
    sources = [_source(rng) for _ in range(5)]
    x = rng.uniform(0.1, 0.9, (6, 3))
    reqs = build_rpy_sums_mono(sources, x, 0.0)
    outs = [direct_sum(r) for r in reqs]
    u = combine_rpy_mono(x, outs, 0.0)
    ref = neutral_image_velocity(x, sources)
    assert rel_err(u, ref) <= 1e-14


def test_poly_all_radii_zero_reduces_to_point_image():
    rng = np.random.default_rng(46)
    sources = [_source(rng) for _ in range(5)]
    x = rng.uniform(0.1, 0.9, (6, 3))
    u = rpy_velocity_poly(x, sources)
    ref = neutral_image_velocity(x, sources)
    assert rel_err(u, ref) <= 1e-14


def test_mono_equals_poly_with_equal_radii():
    rng = np.random.default_rng(47)
    a = 0.09
    sources = [_source(rng, radius=a) for _ in range(8)]
    x = rng.uniform(0.1, 0.9, (10, 3))
    targets = (x, a)
    reqs_m = build_rpy_sums_mono(sources, x, a)
    um = combine_rpy_mono(x, [direct_sum(r) for r in reqs_m], a)
    up = rpy_velocity_poly(targets, sources)
    assert rel_err(um, up) <= 1e-13


def test_poly_wall_target_zero_radius_no_slip():
    rng = np.random.default_rng(48)
    sources = [_source(rng, radius=rng.uniform(0.02, 0.15)) for _ in range(8)]
    wall = np.column_stack([rng.uniform(0, 1, 12), rng.uniform(0, 1, 12),
                            np.zeros(12)])
    interior = rng.uniform(0.1, 0.9, (12, 3))
    u_wall = rpy_velocity_poly(wall, sources)
    scale = np.max(np.abs(rpy_velocity_poly(interior, sources)))
    assert np.max(np.abs(u_wall)) <= 1e-12 * scale


def test_mono_nested_fd_faxen_oracle():
    rng = np.random.default_rng(49)
    checked = 0
    while checked < 25:
        src = _source(rng, zmin=0.25)
        x = rng.uniform(0.1, 0.9, 3)
        x[2] = rng.uniform(0.25, 0.9)
        dist = np.linalg.norm(x - src.position)
        if dist < 0.3:
            continue
        a = rng.uniform(0.02, 0.1)
        field = _image_field(src.force)
        ref = faxen_fd(field, x, src.position, a, a, h=1e-3 * dist)
        reqs = build_rpy_sums_mono([StokesSource(src.position, src.force, a)],
                                   x[None, :], a)
        got = combine_rpy_mono(x[None, :], [direct_sum(r) for r in reqs], a)[0]
        assert rel_err(got, ref) <= 1e-4
        checked += 1


def test_poly_nested_fd_faxen_oracle():
    rng = np.random.default_rng(50)
    checked = 0
    while checked < 25:
        src = _source(rng, zmin=0.25)
        x = rng.uniform(0.1, 0.9, 3)
        x[2] = rng.uniform(0.25, 0.9)
        dist = np.linalg.norm(x - src.position)
        if dist < 0.3:
            continue
        a, b = rng.uniform(0.02, 0.1, 2)
        field = _image_field(src.force)
        ref = faxen_fd(field, x, src.position, a, b, h=1e-3 * dist)
        got = rpy_velocity_poly((x[None, :], a),
                                [StokesSource(src.position, src.force, b)])[0]
        assert rel_err(got, ref) <= 1e-4
        checked += 1


def test_wall_correction_plus_free_space_equals_total():
    rng = np.random.default_rng(51)
    src = _source(rng, radius=0.07, zmin=0.2)
    x = rng.uniform(0.15, 0.85, (5, 3))
    targets = (x, 0.05)
    total = rpy_velocity_poly(targets, [src])
    wall_part = rpy_wall_correction(targets, [src])
    free_part = rpy_free_space(targets, src)
    assert rel_err(wall_part + free_part, total) <= 1e-13


def test_mobility_far_from_wall_is_free_space():
    a = 0.01
    M = mobility_matrix([(np.array([0.3, 0.4, 1000.0 * a]), a)])
    ref = np.eye(3) / (6.0 * np.pi * a)
    assert np.linalg.norm(M - ref) / np.linalg.norm(ref) <= 1e-3
    # the deviation itself is the classical wall drag: 9/16 (a/h) on the
    # tangential diagonal and 9/8 (a/h) on the normal one
    dev = 1.0 - np.diag(M) * (6.0 * np.pi * a)
    np.testing.assert_allclose(dev[:2], 9.0 / 16.0 * 1e-3, rtol=2e-2)
    np.testing.assert_allclose(dev[2], 9.0 / 8.0 * 1e-3, rtol=2e-2)


def test_mobility_symmetric_and_spd():
    rng = np.random.default_rng(52)
    particles = []
    while len(particles) < 12:
        a = rng.uniform(0.02, 0.05)
        pos = rng.uniform(0.1, 0.9, 3)
        pos[2] = rng.uniform(1.5 * a, 0.5)
        if all(np.linalg.norm(pos - p) > a + r + 0.01
               for p, r in particles):
            particles.append((pos, a))
    M = mobility_matrix(particles)
    scale = np.max(np.abs(M))
    assert np.max(np.abs(M - M.T)) <= 1e-12 * scale
    eigs = np.linalg.eigvalsh(M)
    assert eigs.min() >= -1e-10 * eigs.max()


def test_mobility_coincident_particles_raise():
    pos = np.array([0.5, 0.5, 0.3])
    with pytest.raises(CoincidentPoints):
        mobility_matrix([(pos, 0.05), (pos.copy(), 0.05)])


def test_mobility_rejects_zero_radius():
    with pytest.raises(ValueError):
        mobility_matrix([(np.array([0.5, 0.5, 0.3]), 0.0)])


def test_rpy_linearity_in_force():
    rng = np.random.default_rng(53)
    pos = np.array([0.4, 0.6, 0.3])
    f1 = rng.uniform(-1, 1, 3)
    f2 = rng.uniform(-1, 1, 3)
    x = rng.uniform(0.1, 0.9, (4, 3))
    targets = (x, 0.06)

    def u(force):
        return rpy_velocity_poly(targets, [StokesSource(pos, force, 0.09)])

    combo = u(2.0 * f1 - 0.5 * f2)
    assert rel_err(combo, 2.0 * u(f1) - 0.5 * u(f2)) <= 1e-14
