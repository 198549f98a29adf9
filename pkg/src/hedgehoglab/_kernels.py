"""Hot orbit-classification loops, JIT compiled.

Status codes shared by all kernels:

* 0 — orbit cap hit without a decision
* 1 — converged: entered the verified trap region (or passed the disc test)
* 2 — escaped the ball
* 3 — unresolvable at this cap: the sector drift |u| is too small to cross
      the remaining arc within the step budget (reported, never silently
      dropped)
* 4 — inverse step failed to converge (backward runs only)

The trap test works in the partially-normalized sector coordinate
u = P(z), where P is a fixed polynomial supplied by the caller; membership in
either lobe region is the strict inequality (Re u +- r)^2 + (|Im u| - r)^2 < 2 r^2.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _horner(c, z):
    acc = c[-1]
    for k in range(len(c) - 2, -1, -1):
        acc = acc * z + c[k]
    return acc


@njit(cache=True, inline="always")
def _horner_val_der(c, z):
    v = c[-1]
    d = 0.0 + 0.0j
    for k in range(len(c) - 2, -1, -1):
        d = d * z + v
        v = v * z + c[k]
    return v, d


@njit(cache=True, inline="always")
def _in_lobe(u, r, plus):
    ur = u.real if plus else -u.real
    ui = abs(u.imag)
    return (ur + r) * (ur + r) + (ui - r) * (ui - r) < 2.0 * r * r


@njit(cache=True, inline="always")
def _outside_ball(z, phic, B, b_inner):
    """Ambient ball test |z|^2 + |phi(z)|^2 <= B^2 with a cheap two-sided
    radial screen: b_inner is a certified radius inside which the graph term
    cannot push the point out."""
    zz = z.real * z.real + z.imag * z.imag
    if zz > B * B:
        return True
    if zz <= b_inner * b_inner or len(phic) <= 1:
        return False
    ph = _horner(phic, z)
    return zz + ph.real * ph.real + ph.imag * ph.imag > B * B


@njit(cache=True, inline="always")
def _backward_step(z, gc, inv_mode, laminv, tol):
    """One inverse step; returns (w, ok)."""
    if inv_mode == 1:
        # quadratic c1 w + c2 w^2 = z, branch through the origin
        c1 = gc[1]
        c2 = gc[2]
        s = np.sqrt(c1 * c1 + 4.0 * c2 * z)
        w1 = (-c1 + s) / (2.0 * c2)
        w2 = (-c1 - s) / (2.0 * c2)
        return (w1, True) if abs(w1) <= abs(w2) else (w2, True)
    w = laminv * z
    for _ in range(40):
        v, d = _horner_val_der(gc, w)
        if d == 0:
            return w, False
        dw = (v - z) / d
        w = w - dw
        if abs(dw) < tol:
            break
    v, _ = _horner_val_der(gc, w)
    return w, abs(v - z) < 1e-9


@njit(cache=True, parallel=True)
def classify_orbits(z0, gc, pc, phic, cap, B, b_inner, r_trap, u_min,
                    forward, plus, inv_mode, laminv):
    """Classify each start point by trap entry / escape under the chart map.

    ``gc`` is the chart dynamics, ``pc`` the trap-coordinate polynomial,
    ``phic`` the vertical graph for the ambient ball test (length-1 array for
    a genuinely 1-D chart).  ``plus`` selects the forward (attracting) or
    mirrored (repelling) lobe pair.
    """
    n = z0.size
    status = np.zeros(n, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        z = z0[i]
        st = np.int8(0)
        it = 0
        while it < cap:
            u = _horner(pc, z)
            if _in_lobe(u, r_trap, plus):
                st = 1
                break
            if abs(u) < u_min:
                st = 3
                break
            if _outside_ball(z, phic, B, b_inner):
                st = 2
                break
            if forward:
                z = _horner(gc, z)
            else:
                z, ok = _backward_step(z, gc, inv_mode, laminv, 1e-14)
                if not ok:
                    st = 4
                    break
            it += 1
        status[i] = st
        steps[i] = it
    return status, steps


@njit(cache=True, parallel=True)
def disc_test_orbits(z0, gc, phic, cap, B, b_inner, r_enter, r_stay, stay_steps):
    """Strict two-threshold convergence test: the forward orbit must enter
    the disc of radius ``r_enter`` and the following ``stay_steps`` iterates
    must remain inside radius ``r_stay``.  Escape beats entry."""
    n = z0.size
    status = np.zeros(n, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        z = z0[i]
        st = np.int8(0)
        it = 0
        while it < cap:
            if abs(z) < r_enter:
                ok = True
                for _ in range(stay_steps):
                    z = _horner(gc, z)
                    if abs(z) > r_stay:
                        ok = False
                        break
                st = 1 if ok else 2
                break
            if _outside_ball(z, phic, B, b_inner):
                st = 2
                break
            z = _horner(gc, z)
            it += 1
        status[i] = st
        steps[i] = it
    return status, steps


