"""Dense complex polynomial helpers.

One-variable polynomials are coefficient vectors in ascending order
(``c[k]`` multiplies ``z**k``).  Two-variable polynomials are coefficient
matrices ``C[i, j]`` multiplying ``x**i * y**j``.  Degrees stay small
throughout (maps are quadratic-ish, jets run to degree ~24), so the quadratic
algorithms below are never the bottleneck.
"""

from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------------------
# one variable
# ---------------------------------------------------------------------------

def p1_trim(c):
    c = np.asarray(c, dtype=complex)
    nz = np.flatnonzero(np.abs(c) > 0)
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)

def p1_val(c, z):
    """Horner evaluation; ``z`` scalar or ndarray."""
    acc = np.full_like(np.asarray(z, dtype=complex), c[-1])
    for k in range(len(c) - 2, -1, -1):
        acc = acc * z + c[k]
    return acc

def p1_der(c):
    if len(c) <= 1:
        return np.zeros(1, dtype=complex)
    return c[1:] * np.arange(1, len(c))

def p1_mul(a, b, trunc=None):
    out = np.convolve(a, b)
    return out if trunc is None else out[: trunc + 1]

def p1_add(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[: len(a)] += a
    out[: len(b)] += b
    return out

def p1_compose(a, b, trunc):
    """a(b(z)) truncated to degree ``trunc``; requires b(0) small or zero."""
    out = np.zeros(trunc + 1, dtype=complex)
    cur = np.zeros(trunc + 1, dtype=complex)
    cur[0] = 1.0
    bb = np.asarray(b, dtype=complex)[: trunc + 1]
    for k in range(len(a)):
        if a[k] != 0:
            out += a[k] * cur
        if k < len(a) - 1:
            cur = p1_mul(cur, bb, trunc)
    return out

def p1_pow(a, n, trunc):
    out = np.zeros(trunc + 1, dtype=complex)
    out[0] = 1.0
    base = np.asarray(a, dtype=complex)[: trunc + 1]
    for _ in range(n):
        out = p1_mul(out, base, trunc)
    return out

def p1_inverse_jet(a, trunc):
    """Compositional inverse jet of a = a_1 z + ... with a_1 != 0."""
    a = np.asarray(a, dtype=complex)
    if len(a) < 2 or a[1] == 0 or (len(a) > 0 and a[0] != 0):
        raise ValueError("need a(0) = 0, a'(0) != 0")
    inv = np.zeros(trunc + 1, dtype=complex)
    inv[1] = 1.0 / a[1]
    for k in range(2, trunc + 1):
        # coefficient of z^k in a(inv(z)) must vanish
        ck = p1_compose(a, inv, k)[k]
        inv[k] = -ck / a[1]
    return inv

def p1_sup_on_circle(c, radius, samples=256):
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    return float(np.abs(p1_val(c, radius * np.exp(1j * th))).max())

def p1_coeff_tail_bound(c, radius, from_degree):
    """sum_{k >= from_degree} |c_k| r^k — crude tail majorant."""
    k = np.arange(len(c))
    mask = k >= from_degree
    return float(np.sum(np.abs(c[mask]) * radius ** k[mask]))


# ---------------------------------------------------------------------------
# two variables
# ---------------------------------------------------------------------------

def p2_zeros(dx, dy):
    return np.zeros((dx + 1, dy + 1), dtype=complex)

def p2_trim(C):
    C = np.asarray(C, dtype=complex)
    rows = np.flatnonzero(np.abs(C).sum(axis=1) > 0)
    cols = np.flatnonzero(np.abs(C).sum(axis=0) > 0)
    if rows.size == 0:
        return np.zeros((1, 1), dtype=complex)
    return C[: rows[-1] + 1, : cols[-1] + 1]

def p2_val(C, x, y):
    """Evaluate C at (x, y); broadcasts over ndarray arguments."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    acc = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    # Horner in x, inner Horner in y
    for i in range(C.shape[0] - 1, -1, -1):
        row = C[i]
        inner = np.full_like(acc, row[-1])
        for j in range(C.shape[1] - 2, -1, -1):
            inner = inner * y + row[j]
        acc = acc * x + inner
    return acc

def p2_add(A, B):
    nx = max(A.shape[0], B.shape[0]); ny = max(A.shape[1], B.shape[1])
    out = np.zeros((nx, ny), dtype=complex)
    out[: A.shape[0], : A.shape[1]] += A
    out[: B.shape[0], : B.shape[1]] += B
    return out

def p2_mul(A, B):
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1),
                   dtype=complex)
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            if A[i, j] != 0:
                out[i : i + B.shape[0], j : j + B.shape[1]] += A[i, j] * B
    return out

def p2_scale(A, s):
    return np.asarray(A, dtype=complex) * s

def p2_dx(C):
    if C.shape[0] == 1:
        return np.zeros((1, C.shape[1]), dtype=complex)
    return C[1:, :] * np.arange(1, C.shape[0])[:, None]

def p2_dy(C):
    if C.shape[1] == 1:
        return np.zeros((C.shape[0], 1), dtype=complex)
    return C[:, 1:] * np.arange(1, C.shape[1])[None, :]

def p2_compose_affine(C, ax, bx, cx, ay, by, cy):
    """C(ax*u + bx*v + cx, ay*u + by*v + cy) as a polynomial in (u, v).

    Exact (no truncation); used to translate and rotate maps when moving a
    fixed point to the origin and aligning eigen-directions with the axes.
    """
    C = np.asarray(C, dtype=complex)
    dx, dy = C.shape[0] - 1, C.shape[1] - 1
    X = np.array([[cx, bx], [ax, 0.0]], dtype=complex)   # ax*u + bx*v + cx
    Y = np.array([[cy, by], [ay, 0.0]], dtype=complex)
    xpows = [np.ones((1, 1), dtype=complex)]
    for _ in range(dx):
        xpows.append(p2_mul(xpows[-1], X))
    ypows = [np.ones((1, 1), dtype=complex)]
    for _ in range(dy):
        ypows.append(p2_mul(ypows[-1], Y))
    out = np.zeros((1, 1), dtype=complex)
    for i in range(dx + 1):
        for j in range(dy + 1):
            if C[i, j] != 0:
                out = p2_add(out, p2_scale(p2_mul(xpows[i], ypows[j]), C[i, j]))
    return p2_trim(out)

def p2_substitute_jets(C, xjet, yjet, trunc):
    """C(xjet(t), yjet(t)) as a one-variable jet in t, truncated."""
    C = np.asarray(C, dtype=complex)
    xp = [np.zeros(trunc + 1, dtype=complex)]
    xp[0][0] = 1.0
    for _ in range(C.shape[0] - 1):
        xp.append(p1_mul(xp[-1], xjet, trunc))
    yp = [np.zeros(trunc + 1, dtype=complex)]
    yp[0][0] = 1.0
    for _ in range(C.shape[1] - 1):
        yp.append(p1_mul(yp[-1], yjet, trunc))
    out = np.zeros(trunc + 1, dtype=complex)
    for i in range(C.shape[0]):
        for j in range(C.shape[1]):
            if C[i, j] != 0:
                out += C[i, j] * p1_mul(xp[i], yp[j], trunc)
    return out

def p2_gradient_bound(C, radius):
    """Bound for the gradient norm of C on the polydisc |x|,|y| <= radius."""
    gx = p2_dx(C); gy = p2_dy(C)
    def coeff_sum(A):
        i = np.arange(A.shape[0])[:, None]
        j = np.arange(A.shape[1])[None, :]
        return float(np.sum(np.abs(A) * radius ** (i + j)))
    return coeff_sum(gx) + coeff_sum(gy)
