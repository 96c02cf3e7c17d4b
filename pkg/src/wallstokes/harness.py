"""Verification harness: deterministic source clouds, Chebyshev face meshes,
and the no-slip / periodicity error metrics.

Field-type variants evaluate velocities at radius-0 probe points; the
finite-size variants differ only in how source radii are drawn (one shared
radius for "rpy-mono", seeded polydisperse radii for "rpy-poly") and run
through the polydisperse combination, which is the general form for a point
probe next to finite spheres.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ModeMismatch
from .images import (build_laplacian_sums, build_rpy_sums_poly,
                     build_stokeslet_sums, combine_laplacian,
                     combine_rpy_poly, combine_stokeslet, rpy_velocity_poly,
                     StokesSource, source_arrays)
from .summation import (FREE_SPACE, MODE_DP, PeriodicityConfig, direct_sum,
                        periodic_sum_trace)

log = logging.getLogger(__name__)

VARIANTS = ("stokeslet", "laplacian", "rpy-mono", "rpy-poly")

#: lognormal parameters (mean, sigma of the underlying normal) of the cloud
CLOUD_LOGNORMAL = (0.2, 0.5)
#: half box: unit square in x1, x2 and height 0.5 in x3
BOX_HEIGHT = 0.5
#: fixed interior probe used to normalize wall residuals
PROBE_SHAPE = (9, 9, 5)


@dataclass(frozen=True)
class ExperimentConfig:
    """One harness run: field variant, periodic setting, cloud and mesh."""
    variant: str = "stokeslet"
    periodicity: PeriodicityConfig = field(default_factory=PeriodicityConfig)
    n_sources: int = 500
    seed: int = 0
    mesh: int = 33
    radius: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.n_sources < 1:
            raise ValueError("n_sources must be >= 1")
        if self.mesh < 2:
            raise ValueError("mesh must be >= 2")
        if self.radius < 0.0:
            raise ValueError("radius must be >= 0")
        if self.variant.startswith("rpy") and self.radius == 0.0:
            raise ValueError("rpy variants need a positive radius")


@dataclass
class ErrorReport:
    """No-slip and periodicity errors, with the shell convergence trace.

    eps_l2_x is the relative L2 mismatch of velocities between the x1 = 0
    and x1 = 1 face meshes (denominator: the L2 norm over both faces);
    eps_l2_y likewise for x2. max_noslip is the maximum velocity component
    on the wall mesh normalized by the maximum component over the interior
    probe cloud. trace rows hold (n_shell, eps_l2_x, eps_l2_y, max_noslip,
    delta) where delta is the relative change of the full field since the
    previous shell count.
    """
    max_noslip: float = 0.0
    eps_l2_x: float = None
    eps_l2_y: float = None
    trace: list = field(default_factory=list)


def generate_sources(n, seed, radius=0.0, polydisperse=False):
    """Seeded random source cloud filling the half box.

    Coordinates are lognormal draws mapped per axis onto [0, 1] (x1, x2)
    and [0, 0.5] (x3) by min/max normalization; forces are uniform in
    [-0.5, 0.5] per component. With polydisperse=True the particle radii
    are drawn uniformly from [radius/2, radius], otherwise all equal
    radius. The same seed always reproduces the same cloud.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    mu, sigma = CLOUD_LOGNORMAL
    raw = rng.lognormal(mu, sigma, size=(n, 3))
    forces = rng.uniform(-0.5, 0.5, size=(n, 3))
    if polydisperse:
        radii = rng.uniform(0.5 * radius, radius, size=n)
    else:
        radii = np.full(n, float(radius))
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    with np.errstate(invalid="ignore"):
        unit = np.where(span > 0.0, (raw - lo) / span, 0.5)
    coords = unit * np.array([1.0, 1.0, BOX_HEIGHT])
    return [StokesSource(coords[i], forces[i], radii[i]) for i in range(n)]


def chebyshev_nodes(m):
    """Chebyshev-Lobatto nodes of [0, 1]: (1 - cos(k pi / (m-1))) / 2."""
    if m < 2:
        raise ValueError("need at least 2 nodes")
    k = np.arange(m)
    return (1.0 - np.cos(k * np.pi / (m - 1))) / 2.0


def chebyshev_mesh(m, face, height=BOX_HEIGHT):
    """Tensor mesh of m^2 Chebyshev-Lobatto nodes on one box face.

    face is "wall" (x3 = 0, unit square) or one of "x1=0", "x1=1", "x2=0",
    "x2=1" (the side rectangles with x3 in [0, height]). Node ordering is
    row-major and identical on opposite faces, so paired faces subtract
    entry by entry.
    """
    t = chebyshev_nodes(m)
    a, b = np.meshgrid(t, t, indexing="ij")
    a = a.ravel()
    b = b.ravel()
    zero = np.zeros_like(a)
    if face == "wall":
        return np.column_stack([a, b, zero])
    if face == "x1=0":
        return np.column_stack([zero, a, height * b])
    if face == "x1=1":
        return np.column_stack([zero + 1.0, a, height * b])
    if face == "x2=0":
        return np.column_stack([a, zero, height * b])
    if face == "x2=1":
        return np.column_stack([a, zero + 1.0, height * b])
    raise ValueError(f"unknown face {face!r}")


def velocity_scale_probe(shape=PROBE_SHAPE, height=BOX_HEIGHT):
    """Interior probe points used to normalize wall residuals.

    First-kind Chebyshev (Gauss) nodes, which exclude the box boundary, so
    the probe never touches the wall or a mapped cloud extremum.
    """
    def gauss(n):
        k = np.arange(n)
        return (1.0 - np.cos((k + 0.5) * np.pi / n)) / 2.0

    g1, g2, g3 = (gauss(n) for n in shape)
    x1, x2, x3 = np.meshgrid(g1, g2, g3 * height, indexing="ij")
    return np.column_stack([x1.ravel(), x2.ravel(), x3.ravel()])


def _build_requests(variant, sources, targets):
    if variant == "stokeslet":
        return build_stokeslet_sums(sources, targets)
    if variant == "laplacian":
        return build_laplacian_sums(sources, targets)
    return build_rpy_sums_poly(sources, targets)


def _combine(variant, targets, outs):
    if variant == "stokeslet":
        return combine_stokeslet(targets, outs)
    if variant == "laplacian":
        return combine_laplacian(targets, outs).velocity
    return combine_rpy_poly(targets, outs)


def velocity_field(variant, sources, targets, periodicity=FREE_SPACE):
    """Velocity of one image-system variant at radius-0 target points."""
    return velocity_field_trace(variant, sources, targets, periodicity,
                                [periodicity.n_shell])[-1]


def velocity_field_trace(variant, sources, targets, periodicity,
                         shell_counts):
    """Velocities snapshot at each shell count of a replica sweep.

    All kernel sums are accumulated once out to the largest shell count;
    returns one (T, 3) velocity array per entry of shell_counts.
    """
    requests = _build_requests(variant, sources, targets)
    if not periodicity.periodic:
        outs = [[direct_sum(req)] for req in requests]
        shell_counts = [0]
    else:
        outs = [periodic_sum_trace(req, periodicity, shell_counts)
                for req in requests]
    fields = []
    for c in range(len(shell_counts)):
        fields.append(_combine(variant, targets, [o[c] for o in outs]))
    return fields


def _config_sources(config):
    return generate_sources(config.n_sources, config.seed, config.radius,
                            polydisperse=(config.variant == "rpy-poly"))


def _node_on_replica(targets, sources, periodicity):
    """Mask of mesh nodes sitting exactly on a source or one of its images.

    Min/max normalization pins the extreme sources to the box faces, so a
    small cloud can land a source exactly on a Lobatto mesh node, possibly
    through a periodic replica. No finite velocity exists there; the error
    metrics skip such nodes (their face-pair partners are skipped too).
    """
    mask = np.zeros(targets.shape[0], dtype=bool)
    n_shell = periodicity.n_shell if periodicity.periodic else 0
    for src in sources:
        pos = src.position
        d = targets - pos
        hit_z = d[:, 2] == 0.0
        if not np.any(hit_z):
            continue
        if periodicity.periodic:
            k1 = d[:, 0] / periodicity.box1
            hit_1 = (k1 == np.round(k1)) & (np.abs(k1) <= n_shell)
        else:
            hit_1 = d[:, 0] == 0.0
        if periodicity.mode == MODE_DP:
            k2 = d[:, 1] / periodicity.box2
            hit_2 = (k2 == np.round(k2)) & (np.abs(k2) <= n_shell)
        else:
            hit_2 = d[:, 1] == 0.0
        mask |= hit_z & hit_1 & hit_2
    return mask


def noslip_residual(config):
    """Normalized wall residual of the configured image system.

    Evaluates the field on the wall Chebyshev mesh and divides its largest
    velocity component by the largest component over the interior probe
    cloud, making the number scale-free. Zero forcing returns 0.
    """
    sources = _config_sources(config)
    wall = chebyshev_mesh(config.mesh, "wall")
    probe = velocity_scale_probe()
    targets = np.concatenate([wall, probe], axis=0)
    mask = _node_on_replica(targets, sources, config.periodicity)
    u = np.full_like(targets, np.nan)
    u[~mask] = velocity_field(config.variant, sources, targets[~mask],
                              config.periodicity)
    u_wall = u[:wall.shape[0]][~mask[:wall.shape[0]]]
    u_probe = u[wall.shape[0]:][~mask[wall.shape[0]:]]
    scale = np.max(np.abs(u_probe), initial=0.0)
    resid = np.max(np.abs(u_wall), initial=0.0)
    if scale == 0.0:
        return 0.0 if resid == 0.0 else np.inf
    return float(resid / scale)


def _pair_mismatch(u_lo, u_hi):
    diff = np.linalg.norm(u_lo - u_hi)
    denom = np.sqrt(np.linalg.norm(u_lo)**2 + np.linalg.norm(u_hi)**2)
    if denom == 0.0:
        return 0.0
    return float(diff / denom)


def periodicity_error(config, directions=None, shell_counts=None):
    """Relative face-mismatch errors of a periodized run, per shell count.

    directions defaults to the periodic directions of the mode; asking for
    a direction the mode does not periodize raises ModeMismatch. The
    returned report carries the final-shell errors plus the full trace.
    """
    mode = config.periodicity.mode
    if mode == "none":
        raise ModeMismatch("periodicity error undefined for mode 'none'")
    valid = ("x",) if mode == "sp" else ("x", "y")
    if directions is None:
        directions = valid
    for d in directions:
        if d not in valid:
            raise ModeMismatch(f"direction {d!r} is not periodic in mode "
                               f"{mode!r}")
    if shell_counts is None:
        shell_counts = [config.periodicity.n_shell]
    m = config.mesh
    faces = [chebyshev_mesh(m, f) for f in ("x1=0", "x1=1", "x2=0", "x2=1")]
    wall = chebyshev_mesh(m, "wall")
    probe = velocity_scale_probe()
    targets = np.concatenate(faces + [wall, probe], axis=0)
    nf = m * m
    sources = _config_sources(config)
    mask = _node_on_replica(targets, sources, config.periodicity)
    # face pairs subtract node by node, so a hit on either face skips both
    pair_x = ~(mask[:nf] | mask[nf:2 * nf])
    pair_y = ~(mask[2 * nf:3 * nf] | mask[3 * nf:4 * nf])
    fields = velocity_field_trace(config.variant, sources, targets[~mask],
                                  config.periodicity, shell_counts)
    report = ErrorReport()
    prev = None
    for n_shell, compact in zip(shell_counts, fields):
        u = np.full_like(targets, np.nan)
        u[~mask] = compact
        if "x" in directions:
            eps_x = _pair_mismatch(u[:nf][pair_x], u[nf:2 * nf][pair_x])
        else:
            eps_x = None
        if "y" in directions:
            eps_y = _pair_mismatch(u[2 * nf:3 * nf][pair_y],
                                   u[3 * nf:4 * nf][pair_y])
        else:
            eps_y = None
        u_wall = u[4 * nf:4 * nf + wall.shape[0]]
        u_wall = u_wall[~mask[4 * nf:4 * nf + wall.shape[0]]]
        u_probe = u[4 * nf + wall.shape[0]:][~mask[4 * nf + wall.shape[0]:]]
        scale = np.max(np.abs(u_probe), initial=0.0)
        noslip = float(np.max(np.abs(u_wall), initial=0.0) / scale) \
            if scale > 0.0 else 0.0
        if prev is None:
            delta = None
        else:
            den = np.max(np.abs(compact), initial=0.0)
            delta = float(np.max(np.abs(compact - prev), initial=0.0) / den) \
                if den > 0.0 else 0.0
        report.trace.append((n_shell, eps_x, eps_y, noslip, delta))
        report.max_noslip = noslip
        report.eps_l2_x = eps_x
        report.eps_l2_y = eps_y
        prev = compact
    if report.eps_l2_x is not None and report.eps_l2_y is not None:
        lo = min(report.eps_l2_x, report.eps_l2_y)
        hi = max(report.eps_l2_x, report.eps_l2_y)
        if lo > 0.0 and hi / lo > 3.0:
            log.warning("anisotropic periodicity errors: eps_x=%.3e "
                        "eps_y=%.3e", report.eps_l2_x, report.eps_l2_y)
    return report


def rpy_field_grid(source, radius, n_width=41, n_height=21, half_width=None,
                   height=None, periodicity=FREE_SPACE):
    """Finite-size target velocity sampled on a vertical plane.

    The grid spans the x1-x3 plane through the source (x2 fixed at the
    source's), from the wall up to `height`. Points inside the contact
    distance radius + source.radius are still evaluated but flagged; a grid
    point exactly on the source center is skipped with a NaN velocity.

    Returns (positions (G,3), velocities (G,3), overlap flags (G,)).
    """
    y, _, b = source_arrays(source)
    y = y[0]
    contact = radius + b[0]
    if half_width is None:
        half_width = max(6.0 * contact, 4.0 * y[2], 1.0)
    if height is None:
        height = half_width
    x1 = np.linspace(y[0] - half_width, y[0] + half_width, n_width)
    x3 = np.linspace(0.0, height, n_height)
    g1, g3 = np.meshgrid(x1, x3, indexing="ij")
    pos = np.column_stack([g1.ravel(), np.full(g1.size, y[1]), g3.ravel()])
    dist = np.linalg.norm(pos - y, axis=1)
    overlap = dist < contact
    ok = dist > 0.0
    vel = np.full_like(pos, np.nan)
    vel[ok] = rpy_velocity_poly((pos[ok], radius), source, periodicity)
    return pos, vel, overlap
