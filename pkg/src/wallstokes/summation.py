"""Kernel-sum backends: typed requests, neutrality gate, direct summation and
truncated symmetric-shell replica summation for singly/doubly periodic boxes.

A KernelSumRequest is a declarative record of one homogeneous kernel sum;
any backend honoring the evaluate() contract (deterministic, linear in the
strengths) can execute it. The replica backend here accumulates lattice
images shell-by-shell in symmetric (+v, -v) pairs, which is the normative
ordering for these conditionally convergent sums; with zero shells it runs
the identical code path as direct_sum, so the two backends agree bitwise.
"""
from dataclasses import dataclass, field

import numpy as np
import numba

from . import _engine
from .errors import CoincidentPoints, MissingOutputOrder, NeutralityViolation
from .kernels import (GRADIENT, HESSIAN, INV_4PI, INV_8PI, LAPLACIAN,
                      SCALAR_ORDERS, STOKES_ORDERS, VALUE, check_orders)

STOKESLET = "stokeslet"
LAPLACE_MONOPOLE = "laplace-monopole"
LAPLACE_DIPOLE = "laplace-dipole"
LAPLACE_QUADRUPOLE = "laplace-quadrupole"

KERNEL_IDS = (STOKESLET, LAPLACE_MONOPOLE, LAPLACE_DIPOLE, LAPLACE_QUADRUPOLE)

#: strength array shape (beyond the leading source axis) per kernel
_STRENGTH_SHAPE = {
    STOKESLET: (3,),
    LAPLACE_MONOPOLE: (),
    LAPLACE_DIPOLE: (3,),
    LAPLACE_QUADRUPOLE: (3, 3),
}

MODE_NONE = "none"
MODE_SP = "sp"
MODE_DP = "dp"

#: relative tolerance of the neutrality gate
NEUTRALITY_RTOL = 1e-12


@dataclass(frozen=True)
class PeriodicityConfig:
    """Periodic mode and box geometry.

    mode: "none", "sp" (periodic in x1) or "dp" (periodic in x1 and x2).
    box1, box2: box edge lengths along x1 and x2 (ignored for mode "none").
    n_shell: replica shell count; 0 keeps only the primary box.
    """
    mode: str = MODE_NONE
    box1: float = 1.0
    box2: float = 1.0
    n_shell: int = 0

    def __post_init__(self):
        if self.mode not in (MODE_NONE, MODE_SP, MODE_DP):
            raise ValueError(f"unknown periodic mode {self.mode!r}")
        if self.mode != MODE_NONE and (self.box1 <= 0.0 or self.box2 <= 0.0):
            raise ValueError("periodic box edge lengths must be positive")
        if self.n_shell < 0:
            raise ValueError("n_shell must be >= 0")

    @property
    def periodic(self):
        return self.mode != MODE_NONE


FREE_SPACE = PeriodicityConfig()


class KernelSumRequest:
    """One homogeneous kernel sum: sources with typed strengths, targets, and
    the requested output orders.

    sources: (S, 3) positions. strengths: (S,) scalars for the monopole,
    (S, 3) vectors for dipole/Stokeslet, (S, 3, 3) tensors for the
    quadrupole. targets: (T, 3). orders: subset of {value, gradient,
    hessian} for Laplace kernels, {value, laplacian} for the Stokeslet.
    """

    __slots__ = ("kernel", "sources", "strengths", "targets", "orders")

    def __init__(self, kernel, sources, strengths, targets, orders):
        if kernel not in KERNEL_IDS:
            raise ValueError(f"unknown kernel id {kernel!r}")
        self.kernel = kernel
        self.sources = np.ascontiguousarray(sources, dtype=float)
        self.strengths = np.ascontiguousarray(strengths, dtype=float)
        self.targets = np.ascontiguousarray(targets, dtype=float)
        if self.sources.ndim != 2 or self.sources.shape[1] != 3:
            raise ValueError("sources must have shape (S, 3)")
        if self.targets.ndim != 2 or self.targets.shape[1] != 3:
            raise ValueError("targets must have shape (T, 3)")
        want = _STRENGTH_SHAPE[kernel]
        if self.strengths.shape != (self.sources.shape[0],) + want:
            raise ValueError(
                f"{kernel} strengths must have shape (S,) + {want}, got "
                f"{self.strengths.shape}")
        if not (np.all(np.isfinite(self.sources))
                and np.all(np.isfinite(self.strengths))
                and np.all(np.isfinite(self.targets))):
            raise ValueError("positions and strengths must be finite")
        allowed = STOKES_ORDERS if kernel == STOKESLET else SCALAR_ORDERS
        self.orders = check_orders(orders, allowed, kernel)

    @property
    def n_sources(self):
        return self.sources.shape[0]

    @property
    def n_targets(self):
        return self.targets.shape[0]

    def scaled(self, factor):
        """A copy of this request with all strengths multiplied by factor."""
        return KernelSumRequest(self.kernel, self.sources,
                                factor * self.strengths, self.targets,
                                self.orders)


class TargetOutputs:
    """Per-target results of one executed kernel sum, aligned with the
    request's target list. Unrequested orders stay None."""

    __slots__ = ("kernel", "orders", "value", "gradient", "hessian",
                 "laplacian")

    def __init__(self, kernel, orders, value=None, gradient=None,
                 hessian=None, laplacian=None):
        self.kernel = kernel
        self.orders = orders
        self.value = value
        self.gradient = gradient
        self.hessian = hessian
        self.laplacian = laplacian

    def require(self, order):
        out = getattr(self, order, None)
        if out is None:
            raise MissingOutputOrder(
                f"{self.kernel} sum was evaluated without {order!r}")
        return out


@dataclass(frozen=True)
class NeutralityReport:
    """Outcome of the neutrality gate for one request."""
    ok: bool
    kernel: str
    net: np.ndarray = field(default=None)
    scale: float = 0.0

    def __bool__(self):
        return self.ok


def check_neutrality(request, periodicity):
    """Verify that a request may be periodized.

    Under singly or doubly periodic boundary conditions the Stokeslet sum
    must carry zero net force and the Laplace monopole sum zero net charge;
    dipole and quadrupole sums are intrinsically neutral. Non-periodic mode
    always passes. Returns a NeutralityReport; the caller decides whether a
    violation aborts.
    """
    if not periodicity.periodic:
        return NeutralityReport(True, request.kernel)
    if request.kernel in (LAPLACE_DIPOLE, LAPLACE_QUADRUPOLE):
        return NeutralityReport(True, request.kernel)
    net = request.strengths.sum(axis=0)
    scale = float(np.abs(request.strengths).sum())
    ok = np.max(np.abs(net), initial=0.0) <= NEUTRALITY_RTOL * scale
    return NeutralityReport(bool(ok), request.kernel, np.atleast_1d(net),
                            scale)


def shell_offsets(n_shell, periodicity):
    """Lattice translations out to a Chebyshev-distance shell count.

    Shell 0 is the origin; each further shell is emitted as symmetric
    (+v, -v) pairs in a fixed lexicographic order. This ordering is part of
    the replica-sum contract. Returns an (R, 3) float array.
    """
    if not periodicity.periodic:
        return np.zeros((1, 3))
    b1, b2 = periodicity.box1, periodicity.box2
    offs = [(0.0, 0.0, 0.0)]
    for s in range(1, n_shell + 1):
        if periodicity.mode == MODE_SP:
            offs.append((s * b1, 0.0, 0.0))
            offs.append((-s * b1, 0.0, 0.0))
        else:
            ring = [(i, j)
                    for i in range(-s, s + 1)
                    for j in range(-s, s + 1)
                    if max(abs(i), abs(j)) == s and (i, j) > (0, 0)]
            ring.sort()
            for i, j in ring:
                offs.append((i * b1, j * b2, 0.0))
                offs.append((-i * b1, -j * b2, 0.0))
    return np.array(offs, dtype=float)


def _offsets_per_shell(periodicity):
    """Cumulative offset count after each shell, starting at shell 0."""
    if periodicity.mode == MODE_SP:
        return lambda s: 1 + 2 * s
    return lambda s: 1 + 4 * s * (s + 1)


_ENGINES = {
    LAPLACE_MONOPOLE: _engine.monopole_sum,
    LAPLACE_DIPOLE: _engine.dipole_sum,
    LAPLACE_QUADRUPOLE: _engine.quadrupole_sum,
    STOKESLET: _engine.stokeslet_sum,
}


def _run(request, offsets, checkpoints):
    """Execute the accumulation engine and wrap each checkpoint snapshot."""
    nc = len(checkpoints)
    nt = request.n_targets
    targets = request.targets
    sources = request.sources
    offsets = np.ascontiguousarray(offsets, dtype=float)
    cps = np.asarray(checkpoints, dtype=np.int64)
    bad_source = np.full(nt, -1, dtype=np.int64)
    bad_replica = np.full(nt, -1, dtype=np.int64)
    kernel = request.kernel
    orders = request.orders

    if kernel == STOKESLET:
        want_v = VALUE in orders
        want_l = LAPLACIAN in orders
        value = np.zeros((nc, nt, 3))
        laplacian = np.zeros((nc, nt, 3))
        _engine.stokeslet_sum(targets, sources, request.strengths, offsets,
                              cps, want_v, want_l, value, laplacian,
                              bad_source, bad_replica)
        _raise_on_coincidence(bad_source, bad_replica)
        return [TargetOutputs(kernel, orders,
                              value=value[c] * INV_8PI if want_v else None,
                              laplacian=laplacian[c] * INV_4PI if want_l else None)
                for c in range(nc)]

    want_v = VALUE in orders
    want_g = GRADIENT in orders
    want_h = HESSIAN in orders
    value = np.zeros((nc, nt))
    gradient = np.zeros((nc, nt, 3))
    hessian = np.zeros((nc, nt, 3, 3))
    if kernel == LAPLACE_QUADRUPOLE:
        m = request.strengths
        ms = 0.5 * (m + np.swapaxes(m, -1, -2))
        packed = np.ascontiguousarray(
            np.stack([ms[:, 0, 0], ms[:, 1, 1], ms[:, 2, 2],
                      ms[:, 0, 1], ms[:, 0, 2], ms[:, 1, 2]], axis=1))
        strengths = packed
    else:
        strengths = request.strengths
    _ENGINES[kernel](targets, sources, strengths, offsets, cps,
                     want_v, want_g, want_h, value, gradient, hessian,
                     bad_source, bad_replica)
    _raise_on_coincidence(bad_source, bad_replica)
    return [TargetOutputs(kernel, orders,
                          value=value[c] * INV_4PI if want_v else None,
                          gradient=gradient[c] * INV_4PI if want_g else None,
                          hessian=hessian[c] * INV_4PI if want_h else None)
            for c in range(nc)]


def _raise_on_coincidence(bad_source, bad_replica):
    hits = np.nonzero(bad_source >= 0)[0]
    if hits.size:
        t = int(hits[0])
        raise CoincidentPoints(
            f"target {t} coincides with source {int(bad_source[t])} "
            f"(replica offset index {int(bad_replica[t])})")


def direct_sum(request):
    """Exact non-periodic sum over all sources for every target.

    Per-target accumulation runs in ascending source order, so repeated runs
    are bitwise identical at any thread count.
    """
    return _run(request, np.zeros((1, 3)), [1])[0]


def periodic_sum(request, periodicity):
    """Truncated replica sum over shell_offsets(periodicity.n_shell).

    Aborts with NeutralityViolation if the request carries a net force or
    net monopole under a periodic mode. With mode "none" (or zero shells in
    a periodic mode with a request already gated) this reduces to the exact
    direct_sum code path.
    """
    return periodic_sum_trace(request, periodicity,
                              [periodicity.n_shell])[-1]


def periodic_sum_trace(request, periodicity, shell_counts):
    """Replica sums snapshot at each requested shell count (ascending).

    One pass accumulates out to the largest shell count and records the
    running totals at every checkpoint, so a convergence sweep costs the
    same as its largest member. Returns one TargetOutputs per shell count.
    """
    report = check_neutrality(request, periodicity)
    if not report.ok:
        raise NeutralityViolation(
            f"{report.kernel} sum has net strength {report.net} "
            f"(scale {report.scale:.3e}); periodization would diverge")
    shells = sorted(set(int(s) for s in shell_counts))
    if not shells or shells[0] < 0:
        raise ValueError("shell counts must be non-negative")
    if shells != sorted(shell_counts):
        raise ValueError("shell counts must be given in ascending order")
    offsets = shell_offsets(shells[-1], periodicity)
    if not periodicity.periodic:
        if shells != [0]:
            raise ValueError("non-periodic mode admits only shell count 0")
        checkpoints = [1]
    else:
        cum = _offsets_per_shell(periodicity)
        checkpoints = [cum(s) for s in shells]
    return _run(request, offsets, checkpoints)


def evaluate(request, periodicity=FREE_SPACE):
    """Backend entry point: direct sum for mode "none", replica sum else."""
    if not periodicity.periodic:
        return direct_sum(request)
    return periodic_sum(request, periodicity)


def set_thread_count(n):
    """Pin the worker thread count, clamped to what numba has available.

    Results do not depend on this value; it only controls parallelism over
    targets. Returns the count actually in effect.
    """
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
