"""Image systems for Stokes flow above the no-slip wall at x3 = 0.

Two equivalent constructions of the wall Green's function are provided: a
one-shot reference formula (Stokeslet pair plus a harmonic wall correction)
and a split into four independent kernel sums, each of which carries zero
net force / net monopole and can therefore be handed to any singly or
doubly periodic summation backend as-is. The split extends to the Laplacian
of the Stokeslet and to finite-size (mobility-tensor) velocities for mono-
and polydisperse spheres.

build_* functions emit declarative KernelSumRequest records; combine_*
functions assemble the final velocities from the evaluated TargetOutputs.
Any backend honoring the summation contract slots in between.
"""
from dataclasses import dataclass

import numpy as np

from .errors import SourceBelowWall
from .kernels import (GRADIENT, HESSIAN, LAPLACIAN, VALUE, laplace_dipole,
                      laplace_monopole, stokeslet, stokeslet_laplacian)
from .summation import (FREE_SPACE, LAPLACE_DIPOLE, LAPLACE_MONOPOLE,
                        LAPLACE_QUADRUPOLE, STOKESLET, KernelSumRequest,
                        evaluate)


@dataclass(frozen=True)
class StokesSource:
    """A point force above the wall, optionally with a particle radius."""
    position: np.ndarray
    force: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float))
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class TargetPoint:
    """An evaluation point, optionally with a finite particle radius."""
    position: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))


class FlowSample:
    """Velocity (and, where the image system provides it, pressure)."""

    __slots__ = ("velocity", "pressure")

    def __init__(self, velocity, pressure=None):
        self.velocity = velocity
        self.pressure = pressure


def reflect(source):
    """Mirror a source across the wall: third components of the position
    and force are negated. Returns (image_position, image_force)."""
    return _mirror(source.position), _mirror(source.force)


def _mirror(v):
    out = np.array(v, dtype=float, copy=True)
    out[..., 2] = -out[..., 2]
    return out


def source_arrays(sources):
    """Positions (S,3), forces (S,3) and radii (S,) of a source list."""
    if isinstance(sources, StokesSource):
        sources = [sources]
    y = np.array([s.position for s in sources], dtype=float).reshape(-1, 3)
    f = np.array([s.force for s in sources], dtype=float).reshape(-1, 3)
    b = np.array([s.radius for s in sources], dtype=float)
    return y, f, b


def target_arrays(targets):
    """Positions (T,3) and radii (T,) of a target specification.

    Accepts a (T,3) array (radius-0 field points), a list of TargetPoint,
    a single TargetPoint, or a (positions, radii) pair.
    """
    if isinstance(targets, TargetPoint):
        targets = [targets]
    if isinstance(targets, tuple) and len(targets) == 2:
        x = np.asarray(targets[0], dtype=float).reshape(-1, 3)
        a = np.broadcast_to(np.asarray(targets[1], dtype=float),
                            (x.shape[0],)).copy()
        return x, a
    if isinstance(targets, np.ndarray):
        x = targets.reshape(-1, 3).astype(float)
        return x, np.zeros(x.shape[0])
    x = np.array([t.position for t in targets], dtype=float).reshape(-1, 3)
    a = np.array([t.radius for t in targets], dtype=float)
    return x, a


def _require_above_wall(y, x=None):
    if np.any(y[:, 2] < 0.0):
        raise SourceBelowWall("a source lies below the wall plane x3 = 0")
    if x is not None and np.any(x[:, 2] < 0.0):
        raise SourceBelowWall("a target lies below the wall plane x3 = 0")


def image_velocity_reference(targets, sources):
    """Wall velocity by the one-shot image formula.

    Adds to the Stokeslet of each source the negated image Stokeslet and a
    correction built from one harmonic potential (a monopole carrying the
    reflected normal force plus a dipole weighted by the source height).
    Serves as the independent oracle for the split construction.
    """
    x, _ = target_arrays(targets)
    y, f, _ = source_arrays(sources)
    _require_above_wall(y, x)
    y_img = _mirror(y)
    f_img = _mirror(f)
    xp = x[:, None, :]
    u = stokeslet(xp, y[None], np.broadcast_to(f, (x.shape[0],) + f.shape)).value
    u = u + stokeslet(xp, y_img[None],
                      np.broadcast_to(-f_img, (x.shape[0],) + f.shape)).value
    charge = -f[:, 2]
    moment = y[:, 2:3] * f_img
    mono = laplace_monopole(xp, y_img[None], charge[None], (VALUE, GRADIENT))
    dip = laplace_dipole(xp, y_img[None],
                         np.broadcast_to(moment, (x.shape[0],) + f.shape),
                         (VALUE, GRADIENT))
    phi = mono.value + dip.value
    grad = mono.gradient + dip.gradient
    correction = x[:, None, 2:3] * grad
    correction[..., 2] -= phi
    return (u - correction).sum(axis=1)


def build_stokeslet_sums(sources, targets):
    """The four neutral kernel sums of the point-force image system.

    (1) a Stokeslet pair carrying only the wall-parallel force components,
    (2) a dipole sum at the image points with height-weighted moments,
    (3) a monopole pair carrying the normal force, and (4) a monopole pair
    carrying the height-weighted normal force. Pair sums cancel exactly;
    the dipole sum is intrinsically neutral.
    """
    x, _ = target_arrays(targets)
    y, f, _ = source_arrays(sources)
    _require_above_wall(y, x)
    y_img = _mirror(y)
    pair_pos = np.concatenate([y, y_img], axis=0)
    f_xy = f.copy()
    f_xy[:, 2] = 0.0
    f3 = f[:, 2]
    y3 = y[:, 2]
    moment = y3[:, None] * np.column_stack([-f[:, 0], -f[:, 1], f3])
    return [
        KernelSumRequest(STOKESLET, pair_pos,
                         np.concatenate([f_xy, -f_xy], axis=0), x, (VALUE,)),
        KernelSumRequest(LAPLACE_DIPOLE, y_img, moment, x,
                         (VALUE, GRADIENT)),
        KernelSumRequest(LAPLACE_MONOPOLE, pair_pos,
                         np.concatenate([f3, -f3]), x, (VALUE, GRADIENT)),
        KernelSumRequest(LAPLACE_MONOPOLE, pair_pos,
                         np.concatenate([f3 * y3, -(f3 * y3)]), x,
                         (GRADIENT,)),
    ]


def _check_sequence(outs, kernels):
    if len(outs) != len(kernels):
        raise ValueError(f"expected {len(kernels)} kernel-sum outputs, "
                         f"got {len(outs)}")
    for out, kernel in zip(outs, kernels):
        if out.kernel != kernel:
            raise ValueError(f"kernel-sum outputs out of order: expected "
                             f"{kernel}, got {out.kernel}")


def combine_stokeslet(targets, outs):
    """Assemble the point-force wall velocity from the four sums emitted by
    build_stokeslet_sums."""
    _check_sequence(outs, [STOKESLET, LAPLACE_DIPOLE, LAPLACE_MONOPOLE,
                           LAPLACE_MONOPOLE])
    x, _ = target_arrays(targets)
    stokes, dip, mono, mono_z = outs
    x3 = x[:, 2:3]
    u = stokes.require(VALUE).copy()
    u += x3 * dip.require(GRADIENT)
    u[:, 2] -= dip.require(VALUE)
    u -= 0.5 * (x3 * mono.require(GRADIENT))
    u[:, 2] += 0.5 * mono.require(VALUE)
    u += 0.5 * mono_z.require(GRADIENT)
    return u


def neutral_image_velocity(targets, sources, periodicity=FREE_SPACE):
    """Point-force wall velocity through the neutral-split pipeline."""
    requests = build_stokeslet_sums(sources, targets)
    outs = [evaluate(req, periodicity) for req in requests]
    return combine_stokeslet(targets, outs)


def build_laplacian_sums(sources, targets):
    """Kernel sums of the image system for the Laplacian of the Stokeslet.

    Two dipole sums suffice: the applied moments at the sources and the
    reflected moments at the image points. Both are intrinsically neutral,
    so no rearrangement is needed before periodizing.
    """
    x, _ = target_arrays(targets)
    y, f, _ = source_arrays(sources)
    _require_above_wall(y, x)
    return [
        KernelSumRequest(LAPLACE_DIPOLE, y, f, x, (GRADIENT,)),
        KernelSumRequest(LAPLACE_DIPOLE, _mirror(y), _mirror(f), x,
                         (GRADIENT, HESSIAN)),
    ]


def combine_laplacian(targets, outs):
    """Velocity and pressure of the Laplacian-of-Stokeslet image system.

    The image-sum gradient doubles as the field whose third component is
    the harmonic wall potential; its Hessian row 3 is that potential's
    gradient, and -4 times the (3,3) entry is the pressure.
    """
    _check_sequence(outs, [LAPLACE_DIPOLE, LAPLACE_DIPOLE])
    x, _ = target_arrays(targets)
    direct, image = outs
    grad_direct = direct.require(GRADIENT)
    grad_image = image.require(GRADIENT)
    hess_image = image.require(HESSIAN)
    x3 = x[:, 2:3]
    u = grad_direct - grad_image - 2.0 * (x3 * hess_image[:, 2, :])
    u[:, 2] += 2.0 * grad_image[:, 2]
    pressure = -4.0 * hess_image[:, 2, 2]
    return FlowSample(velocity=u, pressure=pressure)


def laplacian_image_flow(targets, sources, periodicity=FREE_SPACE):
    """Laplacian-of-Stokeslet wall flow through the kernel-sum pipeline."""
    requests = build_laplacian_sums(sources, targets)
    outs = [evaluate(req, periodicity) for req in requests]
    return combine_laplacian(targets, outs)


def rpy_free_space(targets, source):
    """Free-space finite-size velocity of target particles due to one
    forced source particle.

    The size corrections of both particles collapse onto a single Laplacian
    term because the doubly-corrected part vanishes away from a wall.
    """
    x, a = target_arrays(targets)
    y, f, b = source_arrays(source)
    if y.shape[0] != 1:
        raise ValueError("rpy_free_space takes a single source")
    coef = (a * a + b[0] * b[0]) / 6.0
    u = stokeslet(x, y[0], f[0], (VALUE,)).value
    return u + coef[:, None] * stokeslet_laplacian(x, y[0], f[0])


def _quadrupole_strengths(f):
    """Quadrupole strengths of the finite-size image system, one 3x3 block
    per source."""
    n = f.shape[0]
    m = np.zeros((n, 3, 3))
    m[:, 0, 0] = 2.0 * f[:, 2]
    m[:, 1, 1] = 2.0 * f[:, 2]
    m[:, 2, 0] = 2.0 * f[:, 0]
    m[:, 2, 1] = 2.0 * f[:, 1]
    return m


def _rpy_requests(y, f, b2, x, image_only=False):
    """The seven kernel sums of the finite-size image system.

    b2 holds the squared source radii entering the source-size strengths.
    With image_only=True, only the entries located at the mirror points are
    emitted (the direct entries reassemble exactly into the free-space
    finite-size kernel, which is what makes this split usable for
    self-interactions).
    """
    y_img = _mirror(y)
    f_xy = f.copy()
    f_xy[:, 2] = 0.0
    f3 = f[:, 2]
    y3 = y[:, 2]
    moment = y3[:, None] * np.column_stack([-f[:, 0], -f[:, 1], f3])
    f3_col = np.zeros_like(f)
    f3_col[:, 2] = f3
    quad = b2[:, None, None] * _quadrupole_strengths(f)
    if image_only:
        stokes_pos = y_img
        stokes_f = -f_xy
        stokes_fb = -(b2[:, None] * f_xy)
        mono_pos = y_img
        mono_q = -f3
        mono_qz = -(f3 * y3)
        dipz_pos = y_img
        dipz_m = b2[:, None] * f3_col
    else:
        stokes_pos = np.concatenate([y, y_img], axis=0)
        stokes_f = np.concatenate([f_xy, -f_xy], axis=0)
        stokes_fb = np.concatenate([b2[:, None] * f_xy,
                                    -(b2[:, None] * f_xy)], axis=0)
        mono_pos = stokes_pos
        mono_q = np.concatenate([f3, -f3])
        mono_qz = np.concatenate([f3 * y3, -(f3 * y3)])
        dipz_pos = stokes_pos
        dipz_m = np.concatenate([b2[:, None] * f3_col, b2[:, None] * f3_col],
                                axis=0)
    return [
        KernelSumRequest(STOKESLET, stokes_pos, stokes_f, x,
                         (VALUE, LAPLACIAN)),
        KernelSumRequest(STOKESLET, stokes_pos, stokes_fb, x, (LAPLACIAN,)),
        KernelSumRequest(LAPLACE_MONOPOLE, mono_pos, mono_q, x,
                         (VALUE, GRADIENT, HESSIAN)),
        KernelSumRequest(LAPLACE_MONOPOLE, mono_pos, mono_qz, x,
                         (VALUE, GRADIENT, HESSIAN)),
        KernelSumRequest(LAPLACE_DIPOLE, y_img, moment, x,
                         (VALUE, GRADIENT, HESSIAN)),
        KernelSumRequest(LAPLACE_DIPOLE, dipz_pos, dipz_m, x, (GRADIENT,)),
        KernelSumRequest(LAPLACE_QUADRUPOLE, y_img, quad, x,
                         (VALUE, GRADIENT, HESSIAN)),
    ]


_RPY_SEQUENCE = [STOKESLET, STOKESLET, LAPLACE_MONOPOLE, LAPLACE_MONOPOLE,
                 LAPLACE_DIPOLE, LAPLACE_DIPOLE, LAPLACE_QUADRUPOLE]


def build_rpy_sums_poly(sources, targets):
    """Kernel sums of the finite-size image system, polydisperse form.

    Seven sums: the Stokeslet pair and its source-size-weighted companion,
    two monopole pairs, the height-weighted dipole sum at the image points,
    a size-weighted vertical dipole sum at sources and images, and a
    size-weighted quadrupole sum at the image points. Source radii enter
    squared in the weighted strengths; target radii enter only in the
    combination stage.
    """
    x, _ = target_arrays(targets)
    y, f, b = source_arrays(sources)
    _require_above_wall(y, x)
    return _rpy_requests(y, f, b * b, x)


def build_rpy_sums_mono(sources, targets, radius):
    """Kernel sums of the finite-size image system when every particle
    shares one radius.

    The shared radius scales out of all source strengths (six sums carry
    strengths identical to the point-force table plus the vertical dipole
    and quadrupole), leaving the radius entirely to the combination
    coefficients.
    """
    x, _ = target_arrays(targets)
    y, f, _ = source_arrays(sources)
    _require_above_wall(y, x)
    requests = _rpy_requests(y, f, np.ones(y.shape[0]), x)
    # the size-weighted Stokeslet sum duplicates the unweighted one here
    del requests[1]
    return requests


def build_rpy_wall_sums(sources, targets):
    """Only the mirror-point entries of the finite-size image system.

    Their combination is the wall-induced correction to the free-space
    finite-size velocity; it is regular everywhere above the wall,
    including at the source positions themselves.
    """
    x, _ = target_arrays(targets)
    y, f, b = source_arrays(sources)
    _require_above_wall(y, x)
    return _rpy_requests(y, f, b * b, x, image_only=True)


def combine_rpy_poly(targets, outs):
    """Assemble finite-size target velocities from the seven polydisperse
    sums; target radii are read from the targets."""
    _check_sequence(outs, _RPY_SEQUENCE)
    x, a = target_arrays(targets)
    stokes, stokes_b, mono, mono_z, dip, dip_z, quad = outs
    x3 = x[:, 2:3]
    a2 = (a * a)[:, None]
    u = stokes.require(VALUE) + (a2 / 6.0) * stokes.require(LAPLACIAN)
    u += stokes_b.require(LAPLACIAN) / 6.0
    u += x3 * dip.require(GRADIENT) + (a2 / 3.0) * dip.require(HESSIAN)[:, 2, :]
    u[:, 2] -= dip.require(VALUE)
    u -= 0.5 * (x3 * mono.require(GRADIENT)
                + (a2 / 3.0) * mono.require(HESSIAN)[:, 2, :])
    u[:, 2] += 0.5 * mono.require(VALUE)
    u += 0.5 * mono_z.require(GRADIENT)
    u += dip_z.require(GRADIENT) / 6.0
    u += (x3 * quad.require(GRADIENT) / 6.0
          + (a2 / 18.0) * quad.require(HESSIAN)[:, 2, :])
    u[:, 2] -= quad.require(VALUE) / 6.0
    return u


def combine_rpy_mono(targets, outs, radius):
    """Assemble finite-size target velocities in the equal-radius case from
    the six monodisperse sums."""
    _check_sequence(outs, [STOKESLET, LAPLACE_MONOPOLE, LAPLACE_MONOPOLE,
                           LAPLACE_DIPOLE, LAPLACE_DIPOLE,
                           LAPLACE_QUADRUPOLE])
    x, _ = target_arrays(targets)
    stokes, mono, mono_z, dip, dip_z, quad = outs
    x3 = x[:, 2:3]
    a2 = radius * radius
    u = stokes.require(VALUE) + (a2 / 3.0) * stokes.require(LAPLACIAN)
    u += x3 * dip.require(GRADIENT) + (a2 / 3.0) * dip.require(HESSIAN)[:, 2, :]
    u[:, 2] -= dip.require(VALUE)
    u -= 0.5 * (x3 * mono.require(GRADIENT)
                + (a2 / 3.0) * mono.require(HESSIAN)[:, 2, :])
    u[:, 2] += 0.5 * mono.require(VALUE)
    u += 0.5 * mono_z.require(GRADIENT)
    u += (a2 / 6.0) * dip_z.require(GRADIENT)
    u += ((a2 / 6.0) * (x3 * quad.require(GRADIENT))
          + (a2 * a2 / 18.0) * quad.require(HESSIAN)[:, 2, :])
    u[:, 2] -= (a2 / 6.0) * quad.require(VALUE)
    return u


def rpy_velocity_poly(targets, sources, periodicity=FREE_SPACE):
    """Polydisperse finite-size velocities through the kernel-sum pipeline."""
    requests = build_rpy_sums_poly(sources, targets)
    outs = [evaluate(req, periodicity) for req in requests]
    return combine_rpy_poly(targets, outs)


def rpy_wall_correction(targets, sources, periodicity=FREE_SPACE):
    """Wall-induced part of the finite-size velocity (mirror entries only)."""
    requests = build_rpy_wall_sums(sources, targets)
    outs = [evaluate(req, periodicity) for req in requests]
    return combine_rpy_poly(targets, outs)


def mobility_matrix(particles, periodicity=FREE_SPACE):
    """Dense 3N x 3N wall mobility of N spheres above the wall.

    Column 3j+k holds the velocities of every particle when particle j is
    forced by the unit vector e_k, computed through the finite-size image
    pipeline. The self block combines the standard free-space self mobility
    1/(6 pi a) with the wall correction evaluated at the particle position;
    the wall correction is regular there, so no regularization enters.
    """
    entries = []
    for p in particles:
        if isinstance(p, TargetPoint):
            entries.append((p.position, p.radius))
        else:
            pos, rad = p
            entries.append((np.asarray(pos, dtype=float), float(rad)))
    n = len(entries)
    positions = np.array([e[0] for e in entries]).reshape(n, 3)
    radii = np.array([e[1] for e in entries])
    if np.any(radii <= 0.0):
        raise ValueError("mobility_matrix needs strictly positive radii")
    _require_above_wall(positions)
    matrix = np.zeros((3 * n, 3 * n))
    eye = np.eye(3)
    for j in range(n):
        others = np.arange(n) != j
        targets_others = (positions[others], radii[others])
        target_self = (positions[j:j + 1], radii[j:j + 1])
        rows_others = np.nonzero(others)[0]
        for k in range(3):
            src = StokesSource(positions[j], eye[k], radii[j])
            if n > 1:
                u = rpy_velocity_poly(targets_others, [src], periodicity)
                for row, vel in zip(rows_others, u):
                    matrix[3 * row:3 * row + 3, 3 * j + k] = vel
            u_self = rpy_wall_correction(target_self, [src], periodicity)[0]
            u_self = u_self + eye[k] / (6.0 * np.pi * radii[j])
            matrix[3 * j:3 * j + 3, 3 * j + k] = u_self
    return matrix
