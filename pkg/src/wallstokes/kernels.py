"""Closed-form Laplace and Stokes kernels with analytic derivatives.

Positions are numpy arrays whose trailing axis has length 3; every function
broadcasts over the leading axes, so a single call can evaluate one pair or a
whole target-source grid. The fluid viscosity is fixed at 1, so the Stokeslet
carries the bare 1/(8 pi) prefactor.

Expression groupings here are kept in lockstep with the scalar loops in
``_engine`` so that a single-term kernel sum reproduces these values exactly.
"""
import numpy as np

from .errors import CoincidentPoints

INV_4PI = 1.0 / (4.0 * np.pi)
INV_8PI = 1.0 / (8.0 * np.pi)

VALUE = "value"
GRADIENT = "gradient"
HESSIAN = "hessian"
LAPLACIAN = "laplacian"

#: derivative orders a scalar (Laplace) kernel can produce
SCALAR_ORDERS = frozenset((VALUE, GRADIENT, HESSIAN))
#: derivative orders the Stokeslet can produce
STOKES_ORDERS = frozenset((VALUE, LAPLACIAN))


class ScalarFieldEval:
    """Value and requested x-derivatives of a scalar potential.

    Unrequested slots stay None. The hessian is stored with all 9 entries;
    it is symmetric by construction and traceless away from the singularity.
    """

    __slots__ = ("value", "gradient", "hessian")

    def __init__(self, value=None, gradient=None, hessian=None):
        self.value = value
        self.gradient = gradient
        self.hessian = hessian


class VectorFieldEval:
    """Value and (optionally) Laplacian of a vector field."""

    __slots__ = ("value", "laplacian")

    def __init__(self, value=None, laplacian=None):
        self.value = value
        self.laplacian = laplacian


def check_orders(orders, allowed, kernel_name):
    """Normalize an order collection to a frozenset and validate it."""
    wanted = frozenset(orders)
    if not wanted:
        raise ValueError(f"{kernel_name}: empty output-order set")
    unknown = wanted - allowed
    if unknown:
        raise ValueError(
            f"{kernel_name}: unsupported output orders {sorted(unknown)}; "
            f"allowed: {sorted(allowed)}")
    return wanted


def _separation(x, y):
    """Return (x - y, |x - y|^2), rejecting exactly coincident points."""
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r2 = r[..., 0] * r[..., 0] + r[..., 1] * r[..., 1] + r[..., 2] * r[..., 2]
    if np.any(r2 == 0.0):
        raise CoincidentPoints("kernel evaluated at zero separation")
    return r, r2


def laplace_monopole(x, y, q, orders=(VALUE,)):
    """Potential of a point charge q at y: q / (4 pi |x - y|).

    Input:
      x, y = target and source positions, shape (..., 3)
      q = charge, scalar or shape (...)
      orders = any subset of {value, gradient, hessian}

    Output:
      ScalarFieldEval with the requested fields, broadcast over leading axes.
    """
    wanted = check_orders(orders, SCALAR_ORDERS, "laplace_monopole")
    r, r2 = _separation(x, y)
    q = np.asarray(q, dtype=float)
    inv = 1.0 / np.sqrt(r2)
    out = ScalarFieldEval()
    if VALUE in wanted:
        out.value = (q * inv) * INV_4PI
    if GRADIENT in wanted or HESSIAN in wanted:
        inv3 = inv / r2
        if GRADIENT in wanted:
            out.gradient = -((q * inv3)[..., None] * r) * INV_4PI
        if HESSIAN in wanted:
            inv5 = inv3 / r2
            outer = r[..., :, None] * r[..., None, :]
            eye = np.eye(3)
            core = 3.0 * outer * inv5[..., None, None] - eye * inv3[..., None, None]
            out.hessian = (q[..., None, None] * core) * INV_4PI
    return out


def laplace_dipole(x, y, d, orders=(VALUE,)):
    """Potential of a point dipole with moment d at y.

    The dipole kernel is the source-gradient of the monopole kernel,
    (x - y) / (4 pi |x - y|^3), contracted with d.
    """
    wanted = check_orders(orders, SCALAR_ORDERS, "laplace_dipole")
    r, r2 = _separation(x, y)
    d = np.broadcast_to(np.asarray(d, dtype=float), r.shape)
    inv = 1.0 / np.sqrt(r2)
    inv3 = inv / r2
    rd = r[..., 0] * d[..., 0] + r[..., 1] * d[..., 1] + r[..., 2] * d[..., 2]
    out = ScalarFieldEval()
    if VALUE in wanted:
        out.value = (rd * inv3) * INV_4PI
    if GRADIENT in wanted or HESSIAN in wanted:
        inv5 = inv3 / r2
        if GRADIENT in wanted:
            out.gradient = (d * inv3[..., None]
                            - (3.0 * (rd * inv5))[..., None] * r) * INV_4PI
        if HESSIAN in wanted:
            inv7 = inv5 / r2
            outer = r[..., :, None] * r[..., None, :]
            sym = d[..., :, None] * r[..., None, :] + r[..., :, None] * d[..., None, :]
            eye = np.eye(3)
            core = ((15.0 * (rd * inv7))[..., None, None] * outer
                    - (3.0 * inv5)[..., None, None] * (sym + eye * rd[..., None, None]))
            out.hessian = core * INV_4PI
    return out


def laplace_quadrupole(x, y, strength, orders=(VALUE,)):
    """Potential of a point quadrupole at y, contracted with a 3x3 strength.

    The quadrupole kernel (second source-gradient of the monopole) is a
    symmetric traceless tensor, so only the symmetric part of the strength
    contributes and any isotropic part drops out.
    """
    wanted = check_orders(orders, SCALAR_ORDERS, "laplace_quadrupole")
    r, r2 = _separation(x, y)
    m = np.asarray(strength, dtype=float)
    ms = 0.5 * (m + np.swapaxes(m, -1, -2))
    ms = np.broadcast_to(ms, r.shape + (3,))
    tr = ms[..., 0, 0] + ms[..., 1, 1] + ms[..., 2, 2]
    inv = 1.0 / np.sqrt(r2)
    inv3 = inv / r2
    inv5 = inv3 / r2
    sr = (ms[..., :, 0] * r[..., 0:1] + ms[..., :, 1] * r[..., 1:2]
          + ms[..., :, 2] * r[..., 2:3])
    contr = sr[..., 0] * r[..., 0] + sr[..., 1] * r[..., 1] + sr[..., 2] * r[..., 2]
    out = ScalarFieldEval()
    if VALUE in wanted:
        out.value = (3.0 * (contr * inv5) - tr * inv3) * INV_4PI
    if GRADIENT in wanted or HESSIAN in wanted:
        inv7 = inv5 / r2
        if GRADIENT in wanted:
            out.gradient = (6.0 * (sr * inv5[..., None])
                            - (15.0 * (contr * inv7))[..., None] * r
                            + (3.0 * (tr * inv5))[..., None] * r) * INV_4PI
        if HESSIAN in wanted:
            inv9 = inv7 / r2
            outer = r[..., :, None] * r[..., None, :]
            srsym = sr[..., :, None] * r[..., None, :] + r[..., :, None] * sr[..., None, :]
            eye = np.eye(3)
            core = (6.0 * (ms * inv5[..., None, None])
                    - (30.0 * inv7)[..., None, None] * srsym
                    - (15.0 * (contr * inv7))[..., None, None] * eye
                    + (105.0 * (contr * inv9))[..., None, None] * outer
                    + (3.0 * (tr * inv5))[..., None, None] * eye
                    - (15.0 * (tr * inv7))[..., None, None] * outer)
            out.hessian = core * INV_4PI
    return out


def stokeslet(x, y, f, orders=(VALUE,)):
    """Velocity at x induced by a point force f at y (unit viscosity).

    Input:
      x, y = target and source positions, shape (..., 3)
      f = force vector, shape (..., 3)
      orders = any subset of {value, laplacian}

    Output:
      VectorFieldEval; the laplacian slot holds the quadrupole-like field
      that stokeslet_laplacian returns.
    """
    wanted = check_orders(orders, STOKES_ORDERS, "stokeslet")
    r, r2 = _separation(x, y)
    f = np.broadcast_to(np.asarray(f, dtype=float), r.shape)
    inv = 1.0 / np.sqrt(r2)
    inv3 = inv / r2
    rf = r[..., 0] * f[..., 0] + r[..., 1] * f[..., 1] + r[..., 2] * f[..., 2]
    out = VectorFieldEval()
    if VALUE in wanted:
        out.value = (f * inv[..., None] + (rf * inv3)[..., None] * r) * INV_8PI
    if LAPLACIAN in wanted:
        inv5 = inv3 / r2
        out.laplacian = (f * inv3[..., None]
                         - (3.0 * (rf * inv5))[..., None] * r) * INV_4PI
    return out


def stokeslet_laplacian(x, y, f):
    """Closed-form Laplacian of the Stokeslet applied to f.

    Equals the target-gradient of the Laplace dipole kernel contracted with
    f; it is divergence-free and harmonic away from the singularity.
    """
    r, r2 = _separation(x, y)
    f = np.broadcast_to(np.asarray(f, dtype=float), r.shape)
    inv = 1.0 / np.sqrt(r2)
    inv3 = inv / r2
    inv5 = inv3 / r2
    rf = r[..., 0] * f[..., 0] + r[..., 1] * f[..., 1] + r[..., 2] * f[..., 2]
    return (f * inv3[..., None] - (3.0 * (rf * inv5))[..., None] * r) * INV_4PI
