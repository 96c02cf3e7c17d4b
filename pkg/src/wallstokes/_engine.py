"""Scalar accumulation loops behind the kernel-sum backends.

One function per kernel. Each loops targets in parallel; per target the
accumulation runs replica-offset-major, source-index-ascending, so results
are bitwise reproducible at any thread count. ``checkpoints`` holds cumulative
offset counts (the last entry equals the offset count); a snapshot of the
running sums is written each time a checkpoint is crossed, which is how the
replica backend exposes its shell-by-shell convergence trace.

Raw kernel cores are accumulated here; the 1/(4 pi) and 1/(8 pi) prefactors
are applied by the wrappers in ``summation``. Groupings of the arithmetic
match ``kernels`` exactly so a single-term sum reproduces the closed forms.

A target exactly coincident with a (replicated) source contributes nothing
when that source strength is exactly zero; otherwise the offending pair is
recorded in ``bad_source``/``bad_replica`` and the wrapper raises.
"""
import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def monopole_sum(targets, sources, strength, offsets, checkpoints,
                 want_value, want_gradient, want_hessian,
                 value, gradient, hessian, bad_source, bad_replica):
    nt = targets.shape[0]
    ns = sources.shape[0]
    nr = offsets.shape[0]
    nc = checkpoints.shape[0]
    for t in prange(nt):
        x1 = targets[t, 0]
        x2 = targets[t, 1]
        x3 = targets[t, 2]
        v = 0.0
        g1 = 0.0
        g2 = 0.0
        g3 = 0.0
        h11 = 0.0
        h12 = 0.0
        h13 = 0.0
        h22 = 0.0
        h23 = 0.0
        h33 = 0.0
        c = 0
        for r in range(nr):
            o1 = offsets[r, 0]
            o2 = offsets[r, 1]
            o3 = offsets[r, 2]
            for s in range(ns):
                d1 = x1 - sources[s, 0] - o1
                d2 = x2 - sources[s, 1] - o2
                d3 = x3 - sources[s, 2] - o3
                rr = d1 * d1 + d2 * d2 + d3 * d3
                if rr == 0.0:
                    if strength[s] != 0.0 and bad_source[t] < 0:
                        bad_source[t] = s
                        bad_replica[t] = r
                    continue
                q = strength[s]
                inv = 1.0 / np.sqrt(rr)
                if want_value:
                    v += q * inv
                if want_gradient or want_hessian:
                    inv3 = inv / rr
                    if want_gradient:
                        g1 -= (q * inv3) * d1
                        g2 -= (q * inv3) * d2
                        g3 -= (q * inv3) * d3
                    if want_hessian:
                        inv5 = inv3 / rr
                        h11 += q * (3.0 * (d1 * d1) * inv5 - inv3)
                        h22 += q * (3.0 * (d2 * d2) * inv5 - inv3)
                        h33 += q * (3.0 * (d3 * d3) * inv5 - inv3)
                        h12 += q * (3.0 * (d1 * d2) * inv5)
                        h13 += q * (3.0 * (d1 * d3) * inv5)
                        h23 += q * (3.0 * (d2 * d3) * inv5)
            if c < nc and r + 1 == checkpoints[c]:
                if want_value:
                    value[c, t] = v
                if want_gradient:
                    gradient[c, t, 0] = g1
                    gradient[c, t, 1] = g2
                    gradient[c, t, 2] = g3
                if want_hessian:
                    hessian[c, t, 0, 0] = h11
                    hessian[c, t, 0, 1] = h12
                    hessian[c, t, 0, 2] = h13
                    hessian[c, t, 1, 0] = h12
                    hessian[c, t, 1, 1] = h22
                    hessian[c, t, 1, 2] = h23
                    hessian[c, t, 2, 0] = h13
                    hessian[c, t, 2, 1] = h23
                    hessian[c, t, 2, 2] = h33
                c += 1


@njit(cache=True, parallel=True)
def dipole_sum(targets, sources, strength, offsets, checkpoints,
               want_value, want_gradient, want_hessian,
               value, gradient, hessian, bad_source, bad_replica):
    nt = targets.shape[0]
    ns = sources.shape[0]
    nr = offsets.shape[0]
    nc = checkpoints.shape[0]
    for t in prange(nt):
        x1 = targets[t, 0]
        x2 = targets[t, 1]
        x3 = targets[t, 2]
        v = 0.0
        g1 = 0.0
        g2 = 0.0
        g3 = 0.0
        h11 = 0.0
        h12 = 0.0
        h13 = 0.0
        h22 = 0.0
        h23 = 0.0
        h33 = 0.0
        c = 0
        for r in range(nr):
            o1 = offsets[r, 0]
            o2 = offsets[r, 1]
            o3 = offsets[r, 2]
            for s in range(ns):
                s1 = strength[s, 0]
                s2 = strength[s, 1]
                s3 = strength[s, 2]
                d1 = x1 - sources[s, 0] - o1
                d2 = x2 - sources[s, 1] - o2
                d3 = x3 - sources[s, 2] - o3
                rr = d1 * d1 + d2 * d2 + d3 * d3
                if rr == 0.0:
                    if (s1 != 0.0 or s2 != 0.0 or s3 != 0.0) and bad_source[t] < 0:
                        bad_source[t] = s
                        bad_replica[t] = r
                    continue
                inv = 1.0 / np.sqrt(rr)
                inv3 = inv / rr
                rd = d1 * s1 + d2 * s2 + d3 * s3
                if want_value:
                    v += rd * inv3
                if want_gradient or want_hessian:
                    inv5 = inv3 / rr
                    if want_gradient:
                        g1 += s1 * inv3 - (3.0 * (rd * inv5)) * d1
                        g2 += s2 * inv3 - (3.0 * (rd * inv5)) * d2
                        g3 += s3 * inv3 - (3.0 * (rd * inv5)) * d3
                    if want_hessian:
                        inv7 = inv5 / rr
                        t15 = 15.0 * (rd * inv7)
                        t3 = 3.0 * inv5
                        h11 += t15 * (d1 * d1) - t3 * ((s1 * d1 + d1 * s1) + rd)
                        h22 += t15 * (d2 * d2) - t3 * ((s2 * d2 + d2 * s2) + rd)
                        h33 += t15 * (d3 * d3) - t3 * ((s3 * d3 + d3 * s3) + rd)
                        h12 += t15 * (d1 * d2) - t3 * (s1 * d2 + d1 * s2)
                        h13 += t15 * (d1 * d3) - t3 * (s1 * d3 + d1 * s3)
                        h23 += t15 * (d2 * d3) - t3 * (s2 * d3 + d2 * s3)
            if c < nc and r + 1 == checkpoints[c]:
                if want_value:
                    value[c, t] = v
                if want_gradient:
                    gradient[c, t, 0] = g1
                    gradient[c, t, 1] = g2
                    gradient[c, t, 2] = g3
                if want_hessian:
                    hessian[c, t, 0, 0] = h11
                    hessian[c, t, 0, 1] = h12
                    hessian[c, t, 0, 2] = h13
                    hessian[c, t, 1, 0] = h12
                    hessian[c, t, 1, 1] = h22
                    hessian[c, t, 1, 2] = h23
                    hessian[c, t, 2, 0] = h13
                    hessian[c, t, 2, 1] = h23
                    hessian[c, t, 2, 2] = h33
                c += 1


@njit(cache=True, parallel=True)
def quadrupole_sum(targets, sources, sym, offsets, checkpoints,
                   want_value, want_gradient, want_hessian,
                   value, gradient, hessian, bad_source, bad_replica):
    # sym holds the symmetrized strength packed as m11,m22,m33,m12,m13,m23
    nt = targets.shape[0]
    ns = sources.shape[0]
    nr = offsets.shape[0]
    nc = checkpoints.shape[0]
    for t in prange(nt):
        x1 = targets[t, 0]
        x2 = targets[t, 1]
        x3 = targets[t, 2]
        v = 0.0
        g1 = 0.0
        g2 = 0.0
        g3 = 0.0
        h11 = 0.0
        h12 = 0.0
        h13 = 0.0
        h22 = 0.0
        h23 = 0.0
        h33 = 0.0
        c = 0
        for r in range(nr):
            o1 = offsets[r, 0]
            o2 = offsets[r, 1]
            o3 = offsets[r, 2]
            for s in range(ns):
                m11 = sym[s, 0]
                m22 = sym[s, 1]
                m33 = sym[s, 2]
                m12 = sym[s, 3]
                m13 = sym[s, 4]
                m23 = sym[s, 5]
                d1 = x1 - sources[s, 0] - o1
                d2 = x2 - sources[s, 1] - o2
                d3 = x3 - sources[s, 2] - o3
                rr = d1 * d1 + d2 * d2 + d3 * d3
                if rr == 0.0:
                    if (m11 != 0.0 or m22 != 0.0 or m33 != 0.0 or m12 != 0.0
                            or m13 != 0.0 or m23 != 0.0) and bad_source[t] < 0:
                        bad_source[t] = s
                        bad_replica[t] = r
                    continue
                tr = m11 + m22 + m33
                inv = 1.0 / np.sqrt(rr)
                inv3 = inv / rr
                inv5 = inv3 / rr
                sr1 = m11 * d1 + m12 * d2 + m13 * d3
                sr2 = m12 * d1 + m22 * d2 + m23 * d3
                sr3 = m13 * d1 + m23 * d2 + m33 * d3
                contr = sr1 * d1 + sr2 * d2 + sr3 * d3
                if want_value:
                    v += 3.0 * (contr * inv5) - tr * inv3
                if want_gradient or want_hessian:
                    inv7 = inv5 / rr
                    if want_gradient:
                        g1 += (6.0 * (sr1 * inv5) - (15.0 * (contr * inv7)) * d1
                               + (3.0 * (tr * inv5)) * d1)
                        g2 += (6.0 * (sr2 * inv5) - (15.0 * (contr * inv7)) * d2
                               + (3.0 * (tr * inv5)) * d2)
                        g3 += (6.0 * (sr3 * inv5) - (15.0 * (contr * inv7)) * d3
                               + (3.0 * (tr * inv5)) * d3)
                    if want_hessian:
                        inv9 = inv7 / rr
                        t30 = 30.0 * inv7
                        tc = 15.0 * (contr * inv7)
                        t105 = 105.0 * (contr * inv9)
                        tt5 = 3.0 * (tr * inv5)
                        tt7 = 15.0 * (tr * inv7)
                        h11 += (6.0 * (m11 * inv5) - t30 * (sr1 * d1 + d1 * sr1)
                                - tc + t105 * (d1 * d1) + tt5 - tt7 * (d1 * d1))
                        h22 += (6.0 * (m22 * inv5) - t30 * (sr2 * d2 + d2 * sr2)
                                - tc + t105 * (d2 * d2) + tt5 - tt7 * (d2 * d2))
                        h33 += (6.0 * (m33 * inv5) - t30 * (sr3 * d3 + d3 * sr3)
                                - tc + t105 * (d3 * d3) + tt5 - tt7 * (d3 * d3))
                        h12 += (6.0 * (m12 * inv5) - t30 * (sr1 * d2 + d1 * sr2)
                                + t105 * (d1 * d2) - tt7 * (d1 * d2))
                        h13 += (6.0 * (m13 * inv5) - t30 * (sr1 * d3 + d1 * sr3)
                                + t105 * (d1 * d3) - tt7 * (d1 * d3))
                        h23 += (6.0 * (m23 * inv5) - t30 * (sr2 * d3 + d2 * sr3)
                                + t105 * (d2 * d3) - tt7 * (d2 * d3))
            if c < nc and r + 1 == checkpoints[c]:
                if want_value:
                    value[c, t] = v
                if want_gradient:
                    gradient[c, t, 0] = g1
                    gradient[c, t, 1] = g2
                    gradient[c, t, 2] = g3
                if want_hessian:
                    hessian[c, t, 0, 0] = h11
                    hessian[c, t, 0, 1] = h12
                    hessian[c, t, 0, 2] = h13
                    hessian[c, t, 1, 0] = h12
                    hessian[c, t, 1, 1] = h22
                    hessian[c, t, 1, 2] = h23
                    hessian[c, t, 2, 0] = h13
                    hessian[c, t, 2, 1] = h23
                    hessian[c, t, 2, 2] = h33
                c += 1


@njit(cache=True, parallel=True)
def stokeslet_sum(targets, sources, strength, offsets, checkpoints,
                  want_value, want_laplacian,
                  value, laplacian, bad_source, bad_replica):
    nt = targets.shape[0]
    ns = sources.shape[0]
    nr = offsets.shape[0]
    nc = checkpoints.shape[0]
    for t in prange(nt):
        x1 = targets[t, 0]
        x2 = targets[t, 1]
        x3 = targets[t, 2]
        v1 = 0.0
        v2 = 0.0
        v3 = 0.0
        l1 = 0.0
        l2 = 0.0
        l3 = 0.0
        c = 0
        for r in range(nr):
            o1 = offsets[r, 0]
            o2 = offsets[r, 1]
            o3 = offsets[r, 2]
            for s in range(ns):
                f1 = strength[s, 0]
                f2 = strength[s, 1]
                f3 = strength[s, 2]
                d1 = x1 - sources[s, 0] - o1
                d2 = x2 - sources[s, 1] - o2
                d3 = x3 - sources[s, 2] - o3
                rr = d1 * d1 + d2 * d2 + d3 * d3
                if rr == 0.0:
                    if (f1 != 0.0 or f2 != 0.0 or f3 != 0.0) and bad_source[t] < 0:
                        bad_source[t] = s
                        bad_replica[t] = r
                    continue
                inv = 1.0 / np.sqrt(rr)
                inv3 = inv / rr
                rf = d1 * f1 + d2 * f2 + d3 * f3
                if want_value:
                    v1 += f1 * inv + (rf * inv3) * d1
                    v2 += f2 * inv + (rf * inv3) * d2
                    v3 += f3 * inv + (rf * inv3) * d3
                if want_laplacian:
                    inv5 = inv3 / rr
                    l1 += f1 * inv3 - (3.0 * (rf * inv5)) * d1
                    l2 += f2 * inv3 - (3.0 * (rf * inv5)) * d2
                    l3 += f3 * inv3 - (3.0 * (rf * inv5)) * d3
            if c < nc and r + 1 == checkpoints[c]:
                if want_value:
                    value[c, t, 0] = v1
                    value[c, t, 1] = v2
                    value[c, t, 2] = v3
                if want_laplacian:
                    laplacian[c, t, 0] = l1
                    laplacian[c, t, 1] = l2
                    laplacian[c, t, 2] = l3
                c += 1
