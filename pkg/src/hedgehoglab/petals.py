"""Semi-parabolic petal geometry.

Local attracting / repelling petals are the classical lobe-pair regions read
off in a partially normalized sector coordinate u: with q petals and
multiplicity one, u = c (h^{-1}(x))^q turns one application of the map into a
near-translation drift u -> u (1 + q u + ...), and the lobe pair

    (Re u +- r)^2 + (|Im u| - r)^2 < 2 r^2

is forward- (resp. backward-) trapped for small r.  Trapping and a uniform
Fatou-coordinate increment are verified on samples, with the radius halved on
failure, so downstream orbit classification can treat lobe entry as a
convergence certificate instead of waiting out the polynomial crawl to the
fixed point (which takes ~1/epsilon^q steps and is unreachable for q >= 2 at
any realistic orbit cap).

Maximal petals relative to a ball are classified on the chart grid: a point
belongs iff its forward orbit stays in the ball until it enters the
attracting lobes and its backward orbit does the same into the repelling
lobes.  Components are labeled per sign of Im u, which separates petals that
meet only at the origin below grid scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

from . import _poly as P
from ._kernels import classify_orbits
from .compacta import EIGHT, CompactSetApprox
from .errors import (AmbiguousTracking, ComponentCountMismatch, GraphTransformDivergence,
                     PreconditionError, TrappingUnverifiable)
from .germs import Germ, NormalFormData, center_restricted_jet

TRAP_HALVINGS = 4
FATOU_MIN_INCREMENT = 0.25
SLOW_SAFETY = 1.2
# Families carry nested lobe pairs Delta_{r_in} inside Delta_r (the nesting is
# exact: a disc of radius sqrt(2) r' centered (-1+i) r' lies inside the one of
# radius sqrt(2) r centered (-1+i) r whenever r' <= r).  Samples and orbit
# classification live on the inner pair; one-step images are verified against
# the outer pair, which absorbs the relative error of the truncated sector
# coordinate near the lobe boundary.
INNER_FRACTION = 0.85
DEFAULT_CAP = 100_000
EXCISE_CELLS = 2.5
# a component counts as reaching the origin when it enters the labeling
# collar: with 2q cusps meeting at 0 there are not enough adjacent cells for
# each to own one, so the collar radius plus a cell diagonal is the sharpest
# grid-realizable notion of "0 in the closure"
ADHERENCE_CELLS = EXCISE_CELLS + math.sqrt(2.0)


# ---------------------------------------------------------------------------
# lobe-pair regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaRegion:
    r: float
    sign: int      # +1 or -1

    def __post_init__(self):
        if self.r <= 0:
            raise PreconditionError("delta radius must be positive")
        if self.sign not in (+1, -1):
            raise PreconditionError("sign must be +1 or -1")


def delta_contains(region: DeltaRegion, x) -> bool | np.ndarray:
    """Strict membership in the lobe pair."""
    x = np.asarray(x, dtype=complex)
    r = region.r
    xr = x.real * region.sign
    res = (xr + r) ** 2 + (np.abs(x.imag) - r) ** 2 < 2 * r * r
    return bool(res) if res.ndim == 0 else res


def delta_two_disc_contains(region: DeltaRegion, x) -> bool | np.ndarray:
    """The same region as the union of two open discs of radius sqrt(2) r
    centered at -sign*r +- i r; used as the independent membership oracle."""
    x = np.asarray(x, dtype=complex)
    r = region.r
    c1 = -region.sign * r + 1j * r
    c2 = -region.sign * r - 1j * r
    res = (np.abs(x - c1) < math.sqrt(2) * r) | (np.abs(x - c2) < math.sqrt(2) * r)
    return bool(res) if res.ndim == 0 else res


# ---------------------------------------------------------------------------
# chart dynamics bundle
# ---------------------------------------------------------------------------

@dataclass
class ChartDynamics:
    """Everything the orbit kernels need about one semi-parabolic germ."""
    chart: str
    q: int
    gc: np.ndarray              # chart dynamics coefficients
    phic: np.ndarray            # vertical graph for the ambient ball test ([0] if 1-D)
    trap_poly: np.ndarray       # u = trap_poly(x)
    trap_coefficient: complex
    attracting_axes: np.ndarray  # chart arguments of the q attracting directions
    repelling_axes: np.ndarray
    inv_mode: int               # 1 quadratic closed form, 2 newton
    laminv: complex

    def u(self, x):
        return P.p1_val(self.trap_poly, np.asarray(x, dtype=complex))

    def forward(self, x):
        return P.p1_val(self.gc, np.asarray(x, dtype=complex))

    def backward(self, x):
        x = np.asarray(x, dtype=complex)
        if self.inv_mode == 1:
            c1, c2 = self.gc[1], self.gc[2]
            s = np.sqrt(c1 * c1 + 4.0 * c2 * x)
            w1 = (-c1 + s) / (2 * c2)
            w2 = (-c1 - s) / (2 * c2)
            return np.where(np.abs(w1) <= np.abs(w2), w1, w2)
        w = self.laminv * x
        dgc = P.p1_der(self.gc)
        for _ in range(40):
            val = P.p1_val(self.gc, w) - x
            w = w - val / P.p1_val(dgc, w)
            if np.max(np.abs(val)) < 1e-14:
                break
        bad = np.abs(P.p1_val(self.gc, w) - x) > 1e-9
        return np.where(bad, np.nan + 0j, w)

    def ambient_norm(self, x):
        x = np.asarray(x, dtype=complex)
        if len(self.phic) <= 1:
            return np.abs(x)
        ph = P.p1_val(self.phic, x)
        return np.sqrt(np.abs(x) ** 2 + np.abs(ph) ** 2)

    def inner_ball_radius(self, B):
        """Radius below which |x| alone certifies ambient-ball membership,
        from the coefficient bound sup |phi| <= sum |phi_k| B^k."""
        if len(self.phic) <= 1:
            return B
        k = np.arange(len(self.phic))
        phimax = float(np.sum(np.abs(self.phic) * B ** k))
        return math.sqrt(max(B * B - phimax * phimax, 0.0))

    def forward_q(self, x):
        for _ in range(self.q):
            x = self.forward(x)
        return x

    def sector_of(self, x):
        """Index of the attracting axis nearest in argument (0..q-1)."""
        a = np.angle(np.asarray(x, dtype=complex))
        d = np.abs((a[..., None] - self.attracting_axes[None, :] + math.pi)
                   % (2 * math.pi) - math.pi)
        return np.argmin(d, axis=-1)


def build_chart(g: Germ, nf: NormalFormData, chart_degree: int = 14,
                center_jet=None) -> ChartDynamics:
    if nf.nu != 1:
        raise PreconditionError(
            f"petal geometry requires semi-parabolic multiplicity 1, got nu={nf.nu}")
    q = nf.q
    if g.dim == 1:
        gc = np.zeros(max(chart_degree + 1, len(g.fwd.c)), dtype=complex)
        gc[: len(g.fwd.c)] = g.fwd.c
        gc = P.p1_trim(gc)
        phic = np.zeros(1, dtype=complex)
        chart = "plane"
    else:
        if center_jet is not None:
            phic = np.asarray(center_jet, dtype=complex)
            gc = P.p2_substitute_jets(g.fwd.c1, _ident(chart_degree),
                                      phic[: chart_degree + 1], chart_degree)
        else:
            gc = center_restricted_jet(g, chart_degree)
            from .manifolds import center_manifold_jet
            phic = center_manifold_jet(g, chart_degree, check_validity=False).coefficients
        chart = "center-x"
    lam = gc[1]
    trunc = min(4 * q, max(len(nf.to_normal) - 1, q))
    trap_poly = nf.trap_coefficient * P.p1_pow(nf.to_normal, q, trunc)
    kt = nf.trap_coefficient
    # attracting directions solve arg(kt) + q*a = pi, repelling ones = 0
    att = np.array([((math.pi - np.angle(kt)) + 2 * math.pi * k) / q
                    for k in range(q)])
    rep = np.array([((0.0 - np.angle(kt)) + 2 * math.pi * k) / q for k in range(q)])
    inv_mode = 1 if (g.dim == 1 and len(g.fwd.c) == 3 and abs(g.fwd.c[0]) == 0) else 2
    return ChartDynamics(chart, q, gc, phic, trap_poly, kt,
                         np.mod(att + math.pi, 2 * math.pi) - math.pi,
                         np.mod(rep + math.pi, 2 * math.pi) - math.pi,
                         inv_mode, 1.0 / lam)


def _ident(degree):
    x = np.zeros(degree + 1, dtype=complex)
    x[1] = 1.0
    return x


# ---------------------------------------------------------------------------
# petal families
# ---------------------------------------------------------------------------

@dataclass
class PetalComponent:
    index: int
    centroid: complex
    compact: CompactSetApprox | None
    samples: np.ndarray
    sector: int = -1
    im_sign: int = 0             # sign of Im u (maximal families)
    graph_coeffs: np.ndarray | None = None
    min_dist_to_zero: float = float("nan")
    max_ambient_norm: float = float("nan")


@dataclass
class PetalFamily:
    kind: str                    # attracting | repelling | maximal
    q: int
    components: list
    ball_radius: float
    r_delta: float
    r_prime: float | None = None
    chart: ChartDynamics | None = None
    extras: dict = field(default_factory=dict)

    def component_count(self):
        return len(self.components)


def _sector_samples(chart: ChartDynamics, r_delta: float, plus: bool,
                    per_sector: int, rng: np.random.Generator):
    """Samples of each lobe-sector, grouped by sector: the sector spine and a
    small polar grid first (deterministic), then seeded random fill."""
    q = chart.q
    kt = chart.trap_coefficient
    xmax = (2.9 * r_delta / abs(kt)) ** (1.0 / q)
    axes = chart.attracting_axes if plus else chart.repelling_axes
    det = []
    radii = np.linspace(0.02, 0.98, 24) * xmax
    spine_offsets = np.array([0.0, 0.0875, -0.0875, 0.175, -0.175,
                              0.2625, -0.2625, 0.35, -0.35])
    for a in axes:
        for da in spine_offsets * (math.pi / q):
            det.append(radii * np.exp(1j * (a + da)))
    n_cand = per_sector * q * 40
    rad = xmax * rng.uniform(0, 1, n_cand) ** (1.0 / (q + 1))
    ang = rng.uniform(-math.pi, math.pi, n_cand)
    cand = np.concatenate(det + [rad * np.exp(1j * ang)])
    region = DeltaRegion(r_delta, +1 if plus else -1)
    inside = delta_contains(region, chart.u(cand))
    pts = cand[inside]
    sec = chart.sector_of(pts)
    groups = []
    for k in range(q):
        pk = pts[sec == k][:per_sector]
        groups.append(pk)
    return groups


def _fatou_increment(chart: ChartDynamics, pts, plus: bool):
    """min real increment of w = -sign/(q u) over one q-fold application."""
    if pts.size == 0:
        return float("inf")
    sign = 1.0 if plus else -1.0
    u0 = chart.u(pts)
    img = chart.forward_q(pts) if plus else _backward_q(chart, pts)
    u1 = chart.u(img)
    w0 = -sign / (chart.q * u0)
    w1 = -sign / (chart.q * u1)
    return float(np.min((w1 - w0).real))


def _backward_q(chart: ChartDynamics, pts):
    x = pts
    for _ in range(chart.q):
        x = chart.backward(x)
    return x


def _component_grid(chart: ChartDynamics, r_delta: float, plus: bool, sector: int,
                    grid_n: int = 192):
    """Occupancy approximation of one lobe-sector for rendering and tracking."""
    kt = chart.trap_coefficient
    q = chart.q
    xmax = 1.05 * (2.9 * r_delta / abs(kt)) ** (1.0 / q)
    ax = (np.arange(grid_n) + 0.5) * (2 * xmax / grid_n) - xmax
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    z = X + 1j * Y
    region = DeltaRegion(r_delta, +1 if plus else -1)
    member = delta_contains(region, chart.u(z)) & (chart.sector_of(z) == sector)
    return CompactSetApprox(chart.chart, xmax, member)


def local_attracting_petals(g: Germ, nf: NormalFormData, r: float,
                            r_prime: float | None = None,
                            samples_per_sector: int = 400,
                            stable_jet=None, seed: int = 11) -> PetalFamily:
    """The q attracting lobe-sectors, with verified forward trapping.

    Verification maps family samples one step forward and demands membership
    in the family again or proximity to the strong stable graph; a uniform
    Fatou-coordinate increment over f^q certifies that trapped orbits drift to
    the fixed point.  The radius is halved up to four times before giving up.
    """
    chart = build_chart(g, nf)
    if g.dim == 2 and r_prime is None:
        # vertical extent tied to the sector scale: off-graph points feed
        # back into the sector coordinate at O(y^2), so a fat slab over a
        # thin sector is not trapped in the raw chart
        r_prime = 0.75 * (2.9 * r / abs(chart.trap_coefficient)) ** (1.0 / chart.q)
    rng = np.random.default_rng(seed)
    last_fail = ""
    r_cur = r
    r_prime_cur = r_prime
    for _ in range(TRAP_HALVINGS + 1):
        r_in = INNER_FRACTION * r_cur
        groups = _sector_samples(chart, r_in, True, samples_per_sector, rng)
        if min(gp.size for gp in groups) < samples_per_sector // 4:
            last_fail = "sector sampling starved"
            r_cur, r_prime_cur = _halve(r_cur, r_prime_cur)
            continue
        ok, worst = _verify_attracting_trap(g, chart, groups, r_cur, r_prime_cur,
                                            stable_jet)
        if not ok:
            last_fail = worst
            r_cur, r_prime_cur = _halve(r_cur, r_prime_cur)
            continue
        fmin = min(_fatou_increment(chart, gp, True) for gp in groups)
        if fmin < FATOU_MIN_INCREMENT:
            last_fail = f"fatou increment {fmin:.3f} below {FATOU_MIN_INCREMENT}"
            r_cur, r_prime_cur = _halve(r_cur, r_prime_cur)
            continue
        comps = []
        for k, gp in enumerate(groups):
            comps.append(PetalComponent(k, complex(gp.mean()),
                                        _component_grid(chart, r_in, True, k),
                                        gp, sector=k))
        comps.sort(key=lambda c: math.atan2(c.centroid.imag, c.centroid.real))
        for i, c in enumerate(comps):
            c.index = i
        return PetalFamily("attracting", chart.q, comps, g.domain_radius, r_cur,
                           r_prime_cur, chart,
                           {"fatou_min_increment": fmin, "r_inner": r_in})
    raise TrappingUnverifiable(f"attracting trap failed after {TRAP_HALVINGS} "
                               f"halvings: {last_fail}")


def _halve(r, r_prime):
    return r / 2, (r_prime / 2 if r_prime is not None else None)


def _delta_margin(u, r, plus):
    """Positive inside the lobe pair, in units of r^2."""
    ur = u.real if plus else -u.real
    return (2 * r * r - (ur + r) ** 2 - (np.abs(u.imag) - r) ** 2) / (r * r)


def _verify_attracting_trap(g, chart, groups, r_cur, r_prime, stable_jet):
    """Two-part forward-trapping check.

    Strict part: samples on the invariant graph (the chart itself) must map
    back into the region or onto the strong stable curve; this is the object
    the orbit kernels classify.  Slab part: off-graph samples feed back into
    the sector coordinate at a rate proportional to their vertical offset, so
    they are only required to map into the full region when they start with a
    collar margin (f applied to the shrunken slab lands in the slab)."""
    region = DeltaRegion(r_cur, +1)
    pts = np.concatenate(groups)      # sampled from the inner lobe pair
    img = chart.forward(pts)
    good = delta_contains(region, chart.u(img)) | (np.abs(img) < 1e-8)
    if not np.all(good):
        bad = img[~good]
        return False, f"{(~good).sum()} on-graph escapes, worst |u| = " \
                      f"{np.abs(chart.u(bad)).max():.2e}"
    if g.dim == 1:
        return True, ""
    ny = 8
    ys = np.concatenate([0.6 * r_prime * np.exp(2j * np.pi * np.arange(ny) / ny),
                         0.98 * r_prime * np.exp(2j * np.pi * (np.arange(ny) + 0.5) / ny)])
    X = np.repeat(pts, len(ys))
    Y = P.p1_val(chart.phic, X) + np.tile(ys, pts.size)
    keep = np.abs(Y) < r_prime
    X, Y = X[keep], Y[keep]
    fx, fy = g.fwd(X, Y)
    in_family = delta_contains(region, chart.u(fx)) & (np.abs(fy) < r_prime)
    if stable_jet is not None:
        near_ss = np.abs(fx - P.p1_val(stable_jet.coefficients, fy)) < 1e-3
    else:
        near_ss = np.abs(fx) < 1e-6
    good = in_family | near_ss
    if np.all(good):
        return True, ""
    return False, f"{(~good).sum()} of {good.size} slab images escaped"


def local_repelling_petals(g: Germ, nf: NormalFormData, r: float,
                           samples_per_sector: int = 400,
                           graph_degree: int = 8, seed: int = 12) -> PetalFamily:
    """The q repelling lobe-sectors; in dimension 2 each carries the graph
    y = psi(x) of the backward-invariant curve over it, computed by iterating
    the graph transform (values pulled back through the inverse base dynamics)
    from the zero graph to its fixed point."""
    chart = build_chart(g, nf)
    rng = np.random.default_rng(seed)
    last_fail = ""
    r_cur = r
    for _ in range(TRAP_HALVINGS + 1):
        r_in = INNER_FRACTION * r_cur
        groups = _sector_samples(chart, r_in, False, samples_per_sector, rng)
        if min(gp.size for gp in groups) < samples_per_sector // 4:
            last_fail = "sector sampling starved"
            r_cur /= 2
            continue
        graphs = []
        residuals = []
        if g.dim == 2:
            for gp in groups:
                coef, res = _graph_transform(g, chart, gp, graph_degree)
                graphs.append(coef)
                residuals.append(res)
        ok, why = _verify_repelling_trap(g, chart, groups, graphs, r_cur)
        if not ok:
            last_fail = why
            r_cur /= 2
            continue
        fmin = min(_fatou_increment(chart, gp, False) for gp in groups)
        if fmin < FATOU_MIN_INCREMENT:
            last_fail = f"backward fatou increment {fmin:.3f}"
            r_cur /= 2
            continue
        comps = []
        for k, gp in enumerate(groups):
            comps.append(PetalComponent(k, complex(gp.mean()),
                                        _component_grid(chart, r_in, False, k),
                                        gp, sector=k,
                                        graph_coeffs=graphs[k] if graphs else None))
        comps.sort(key=lambda c: math.atan2(c.centroid.imag, c.centroid.real))
        for i, c in enumerate(comps):
            c.index = i
        extras = {"fatou_min_increment": fmin, "r_inner": r_in}
        if residuals:
            extras["graph_residuals"] = residuals
        return PetalFamily("repelling", chart.q, comps, g.domain_radius, r_cur,
                           None, chart, extras)
    raise TrappingUnverifiable(f"repelling trap failed after {TRAP_HALVINGS} "
                               f"halvings: {last_fail}")


def _graph_transform(g: Germ, chart: ChartDynamics, xs: np.ndarray,
                     degree: int, tol: float = 1e-10, max_iter: int = 200):
    """Fixed graph over one repelling sector: psi_new(x') = f2(x, psi(x)) with
    f1(x, psi(x)) = x' solved by Newton, refitted as a polynomial each sweep."""
    coef = np.zeros(degree + 1, dtype=complex)
    vand = np.vander(xs, degree + 1, increasing=True)[:, 2:]
    prev_delta = None
    grow = 0
    for it in range(max_iter):
        x = chart.backward(xs)
        for _ in range(30):
            ps = P.p1_val(coef, x)
            f1x, _ = g.fwd(x, ps)
            dcoef = P.p1_der(coef)
            a, b, _, _ = g.fwd.jacobian(x, ps)
            der = a + b * P.p1_val(dcoef, x)
            val = f1x - xs
            x = x - val / der
            if np.max(np.abs(val)) < 1e-13:
                break
        _, f2v = g.fwd(x, P.p1_val(coef, x))
        sol, *_ = np.linalg.lstsq(vand, f2v, rcond=None)
        new_coef = np.concatenate([np.zeros(2, dtype=complex), sol])
        delta = float(np.abs(P.p1_val(new_coef, xs) - P.p1_val(coef, xs)).max())
        coef = new_coef
        if delta < tol:
            resid = float(np.abs(P.p1_val(coef, xs)
                                 - _graph_image(g, chart, coef, xs)).max())
            return coef, resid
        if prev_delta is not None and delta > prev_delta:
            grow += 1
            if grow >= 5:
                raise GraphTransformDivergence(
                    f"sup-distance grew for 5 consecutive sweeps (last {delta:.2e})")
        else:
            grow = 0
        prev_delta = delta
    raise GraphTransformDivergence(f"no convergence after {max_iter} sweeps")


def _graph_image(g, chart, coef, xs):
    x = chart.backward(xs)
    for _ in range(30):
        ps = P.p1_val(coef, x)
        f1x, _ = g.fwd(x, ps)
        a, b, _, _ = g.fwd.jacobian(x, ps)
        der = a + b * P.p1_val(P.p1_der(coef), x)
        val = f1x - xs
        x = x - val / der
        if np.max(np.abs(val)) < 1e-13:
            break
    _, f2v = g.fwd(x, P.p1_val(coef, x))
    return f2v


def _verify_repelling_trap(g, chart, groups, graphs, r_cur):
    region = DeltaRegion(r_cur, -1)
    for k, gp in enumerate(groups):
        if g.dim == 1:
            img = chart.backward(gp)
            good = delta_contains(region, chart.u(img)) | (np.abs(img) < 1e-8)
        else:
            ys = P.p1_val(graphs[k], gp)
            ix, iy = g.apply_inverse(gp, ys)
            finite = np.isfinite(ix.real)
            on_graph = np.zeros(gp.shape, dtype=bool)
            in_sector = np.zeros(gp.shape, dtype=bool)
            if finite.any():
                sec = chart.sector_of(ix[finite])
                ingraph = np.abs(iy[finite]
                                 - P.p1_val(graphs[k], ix[finite])) < 1e-6
                # backward image may hop to the adjacent sector graph
                best = np.zeros(finite.sum(), dtype=bool)
                for kk in range(chart.q):
                    gg = graphs[kk] if graphs else None
                    if gg is None:
                        continue
                    best |= np.abs(iy[finite] - P.p1_val(gg, ix[finite])) < 1e-6
                on_graph[finite] = best
                in_sector[finite] = delta_contains(region, chart.u(ix[finite]))
            good = (in_sector & on_graph) | (np.abs(ix) < 1e-8)
        if not np.all(good):
            return False, f"sector {k}: {(~good).sum()} backward escapes"
    return True, ""


# ---------------------------------------------------------------------------
# asymptotic curve samples
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticCurveSample:
    points: np.ndarray              # chart coordinates
    tangents: np.ndarray | None     # ambient tangent directions (2-D)
    horizontal_flags: np.ndarray | None
    capped_seeds: int
    total_seeds: int


def asymptotic_curve_sample(g: Germ, repelling: PetalFamily, B: float,
                            density: int, orbit_cap: int = 10_000,
                            cone_tangent: float = 0.18) -> AsymptoticCurveSample:
    """Forward saturation of repelling-petal samples inside the ball.

    Every recorded iterate has, by construction, a full backward orbit inside
    the ball (the recorded prefix followed by the verified backward-trapped
    petal tail).  Seeds still alive at the cap are counted and their further
    iterates dropped.  In dimension 2 each retained point carries the tangent
    direction transported along the orbit together with its horizontal-cone
    membership flag.
    """
    chart = repelling.chart
    if density <= 0:
        empty = np.zeros(0, dtype=complex)
        return AsymptoticCurveSample(empty, None if g.dim == 1 else np.zeros((0, 2), complex),
                                     None if g.dim == 1 else np.zeros(0, bool), 0, 0)
    seeds = []
    tangents = []
    for comp in repelling.components:
        pts = comp.samples[:density]
        seeds.append(pts)
        if g.dim == 2:
            dcoef = P.p1_der(comp.graph_coeffs)
            tv = np.stack([np.ones(pts.size, complex), P.p1_val(dcoef, pts)], axis=1)
            tangents.append(tv)
    seeds = np.concatenate(seeds)
    keep0 = chart.ambient_norm(seeds) <= B
    seeds = seeds[keep0]
    out_pts = [seeds.copy()]
    if g.dim == 2:
        tans = np.concatenate(tangents)[keep0]
        tans /= np.linalg.norm(tans, axis=1, keepdims=True)
        out_tan = [tans.copy()]
    x = seeds
    capped = 0
    for step in range(orbit_cap):
        if x.size == 0:
            break
        if g.dim == 1:
            x_new = chart.forward(x)
            inball = np.abs(x_new) <= B
        else:
            x_new = chart.forward(x)
            inball = chart.ambient_norm(x_new) <= B
            a, b, c, d = g.fwd.jacobian(x, P.p1_val(chart.phic, x))
            t1 = a * tans[:, 0] + b * tans[:, 1]
            t2 = c * tans[:, 0] + d * tans[:, 1]
            tans = np.stack([t1, t2], axis=1)
            tans /= np.linalg.norm(tans, axis=1, keepdims=True)
        x = x_new[inball]
        if g.dim == 2:
            tans = tans[inball]
        if x.size == 0:
            break
        out_pts.append(x.copy())
        if g.dim == 2:
            out_tan.append(tans.copy())
        # deep inside the attracting lobes the tail only piles up at the
        # origin; stop extending once committed and small
        ux = chart.u(x)
        settled = delta_contains(DeltaRegion(repelling.r_delta, +1), ux) \
            & (np.abs(ux) < repelling.r_delta / 32)
        x = x[~settled]
        if g.dim == 2:
            tans = tans[~settled]
    else:
        capped = x.size
    pts = np.concatenate(out_pts)
    if g.dim == 1:
        return AsymptoticCurveSample(pts, None, None, capped, int(keep0.sum()))
    tv = np.concatenate(out_tan)
    flags = np.abs(tv[:, 1]) <= cone_tangent * np.abs(tv[:, 0])
    return AsymptoticCurveSample(pts, tv, flags, capped, int(keep0.sum()))


# ---------------------------------------------------------------------------
# maximal petals
# ---------------------------------------------------------------------------

@dataclass
class MaximalPetalReport:
    members: int
    forward_status: dict
    backward_status: dict
    r_attracting: float
    r_repelling: float
    u_min: float
    excised_cells: int


def maximal_petals(g: Germ, nf: NormalFormData, B: float,
                   resolution: int = 2048, orbit_cap: int = DEFAULT_CAP,
                   chart_degree: int = 12, stable_jet=None,
                   trap_scale: float = 0.3) -> PetalFamily:
    """Maximal invariant petals relative to the ball of radius ``B``.

    Grid classification in the center chart: forward orbits must stay in the
    ball until they enter the verified attracting lobes, backward orbits
    until they enter the repelling ones.  The 2q components adherent to the
    origin are labeled within each sign of Im u so that petals touching only
    at the fixed point stay separate.
    """
    chart = build_chart(g, nf, chart_degree)
    q = chart.q
    r0 = trap_scale * abs(chart.trap_coefficient) * B ** q
    att = local_attracting_petals(g, nf, r0, stable_jet=stable_jet)
    rep = local_repelling_petals(g, nf, r0)
    r_att = att.extras["r_inner"]
    r_rep = rep.extras["r_inner"]
    u_min = SLOW_SAFETY * 1.5 * math.pi / (q * orbit_cap)

    h = 2.0 * B / resolution
    ax = (np.arange(resolution) + 0.5) * h - B
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    Z = (X + 1j * Y).ravel()
    inball = chart.ambient_norm(Z) <= B
    zb = Z[inball]

    b_inner = chart.inner_ball_radius(B)
    fwd_status, _ = classify_orbits(zb, chart.gc, chart.trap_poly, chart.phic,
                                    orbit_cap, B, b_inner, r_att, u_min, True,
                                    True, chart.inv_mode, chart.laminv)
    bwd_status, _ = classify_orbits(zb, chart.gc, chart.trap_poly, chart.phic,
                                    orbit_cap, B, b_inner, r_rep, u_min, False,
                                    False, chart.inv_mode, chart.laminv)
    member = (fwd_status == 1) & (bwd_status == 1)
    undecided = (fwd_status == 3) | (fwd_status == 0) | (bwd_status == 3) \
        | (bwd_status == 0)

    occ = np.zeros(resolution * resolution, dtype=bool)
    occ[np.flatnonzero(inball)[member]] = True
    occ = occ.reshape(resolution, resolution)
    und = np.zeros(resolution * resolution, dtype=bool)
    und[np.flatnonzero(inball)[undecided]] = True
    und = und.reshape(resolution, resolution)

    U = chart.u(Z).reshape(resolution, resolution)
    absZ = np.abs(Z).reshape(resolution, resolution)
    excise = absZ <= EXCISE_CELLS * h
    comps = _label_components(chart, occ, U, excise, B, h)

    adherent = [c for c in comps if c.min_dist_to_zero <= ADHERENCE_CELLS * h]
    stray = [c for c in comps if c not in adherent and c.compact.count() >= 5]
    report = MaximalPetalReport(
        int(member.sum()),
        _status_histogram(fwd_status), _status_histogram(bwd_status),
        r_att, r_rep, u_min, int((excise & occ).sum()))
    if len(adherent) != 2 * q:
        raise ComponentCountMismatch(
            f"found {len(adherent)} origin-adherent components, expected {2 * q}",
            adherent=len(adherent), expected=2 * q,
            stray=len(stray), report=report.__dict__,
            sizes=[c.compact.count() for c in comps])
    adherent.sort(key=lambda c: math.atan2(c.centroid.imag, c.centroid.real))
    for i, c in enumerate(adherent):
        c.index = i
    fam = PetalFamily("maximal", q, adherent, B, r_att, None, chart,
                      {"report": report, "resolution": resolution,
                       "orbit_cap": orbit_cap, "stray_components": len(stray),
                       "undecided_grid": und})
    worst, frac_over, skipped = verify_fq_invariance(fam)
    fam.extras["fq_invariance_worst_cells"] = worst
    fam.extras["fq_invariance_frac_over_one_cell"] = frac_over
    fam.extras["fq_invariance_undecided_images"] = skipped
    if frac_over > 0.005 or worst > 4.0:
        raise ComponentCountMismatch(
            f"components moved under f^q: worst {worst:.2f} cells, "
            f"{100 * frac_over:.2f}% beyond one cell",
            worst_cells=worst, frac_over=frac_over)
    return fam


def _status_histogram(status):
    names = {0: "cap", 1: "converged", 2: "escaped", 3: "too-slow", 4: "inverse-failed"}
    vals, counts = np.unique(status, return_counts=True)
    return {names[int(v)]: int(c) for v, c in zip(vals, counts)}


def _label_components(chart, occ, U, excise, B, h):
    comps = []
    n = occ.shape[0]
    labelable = occ & ~excise
    for sign, mask in ((+1, U.imag > 0), (-1, U.imag < 0)):
        m = labelable & mask
        lab, count = ndimage.label(m, structure=EIGHT)
        if count == 0:
            continue
        # return excised member cells of this sign to the nearest labeled cell
        leftover = occ & excise & mask
        if leftover.any():
            lab_full = _assign_leftover(lab, leftover)
        else:
            lab_full = lab
        for k in range(1, count + 1):
            cells = lab_full == k
            if not cells.any():
                continue
            compact = CompactSetApprox(chart.chart, B, cells)
            pts = compact.cell_centers()
            if pts.size < 3:
                continue
            comp = PetalComponent(-1, complex(pts.mean()), compact, pts,
                                  im_sign=sign)
            comp.min_dist_to_zero = float(np.abs(pts).min())
            comp.max_ambient_norm = float(chart.ambient_norm(pts).max())
            comp.sector = int(chart.sector_of(np.array([comp.centroid]))[0])
            comps.append(comp)
    return comps


def _assign_leftover(lab, leftover):
    """Attach excised member cells to the nearest labeled component."""
    full = lab.copy()
    idx = np.argwhere(leftover)
    labeled = np.argwhere(lab > 0)
    if labeled.size == 0:
        return full
    from scipy.spatial import cKDTree
    tree = cKDTree(labeled)
    _, near = tree.query(idx, k=1)
    full[idx[:, 0], idx[:, 1]] = lab[labeled[near][:, 0], labeled[near][:, 1]]
    return full


def verify_fq_invariance(family: PetalFamily):
    """Displacement (in cells) of component boundary clouds under the chart
    q-fold map, measured back to the same component.

    Images landing in cells whose orbit classification was inconclusive
    (capped or drift-starved) are skipped and counted: the true petal
    continues into those cells but the grid cannot testify either way.
    Returns (worst, fraction beyond one cell, skipped count); the classified
    set itself is only one-cell accurate, so a small outlier fraction with a
    bounded worst case is the grid-realizable form of invariance."""
    chart = family.chart
    und = family.extras.get("undecided_grid") if family.extras else None
    worst = 0.0
    over = 0
    total = 0
    skipped = 0
    for comp in family.components:
        pts = comp.compact.boundary_points
        img = chart.forward_q(pts)
        good = np.isfinite(img.real)
        img = img[good]
        if und is not None and img.size:
            cells = comp.compact.points_to_cells(img)
            n = comp.compact.n
            i = np.clip(cells[:, 0], 0, n - 1)
            j = np.clip(cells[:, 1], 0, n - 1)
            in_und = und[i, j]
            skipped += int(in_und.sum())
            img = img[~in_und]
        d = comp.compact.distance_cells_to(img)
        if d.size:
            worst = max(worst, float(d.max()))
            over += int((d > 1.0).sum())
            total += int(d.size)
    frac = over / total if total else 0.0
    return worst, frac, skipped


def petal_touches_boundary(family: PetalFamily, B: float,
                           tol_cells: float = 2.0) -> list[bool]:
    """Per component: does it come within ``tol_cells`` of the sphere of
    radius B (ambient norm)?"""
    out = []
    for comp in family.components:
        h = comp.compact.resolution if comp.compact is not None else 0.0
        out.append(bool(comp.max_ambient_norm >= B - tol_cells * h * math.sqrt(2)))
    return out


# ---------------------------------------------------------------------------
# combinatorial rotation number
# ---------------------------------------------------------------------------

def petal_cycle(g: Germ, family: PetalFamily):
    """Permutation induced on the components by the map, with its rotation
    number as a cyclic shift in the circular (argument) order.

    Components must already be argument-sorted (constructors guarantee it).
    Returns (permutation tuple, Fraction rotation number).
    """
    chart = family.chart
    n = len(family.components)
    if n == 0:
        raise PreconditionError("empty family")
    if n == 1:
        return (0,), Fraction(0, 1)
    centroids = np.array([c.centroid for c in family.components])
    images = chart.forward(centroids)
    perm = []
    for j, w in enumerate(images):
        dists = []
        for c in family.components:
            if c.compact is None:
                dists.append(abs(w - c.centroid))
            else:
                d = c.compact.distance_cells_to(np.array([w]))[0]
                dists.append(d * c.compact.resolution if np.isfinite(d) else np.inf)
        order = np.argsort(dists)
        if not np.isfinite(dists[order[0]]):
            raise AmbiguousTracking(f"component {j}: image landed nowhere")
        if family.kind == "maximal":
            # image must stay on the same side of the sector coordinate
            target = int(order[0])
            if family.components[target].im_sign != family.components[j].im_sign:
                same = [k for k in order
                        if family.components[k].im_sign == family.components[j].im_sign]
                if not same or not np.isfinite(dists[same[0]]):
                    raise AmbiguousTracking(f"component {j}: sign-consistent target missing")
                target = int(same[0])
        else:
            target = int(order[0])
        perm.append(target)
    if sorted(perm) != list(range(n)):
        raise AmbiguousTracking(f"not a permutation: {perm}")

    # rotation number per cycle as a consistent circular shift
    q = family.q
    shifts = set()
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen[cur] = True
            cur = perm[cur]
        if len(cycle) != q:
            raise AmbiguousTracking(
                f"cycle length {len(cycle)} differs from petal count q={q}")
        order = sorted(cycle, key=lambda k: math.atan2(
            family.components[k].centroid.imag, family.components[k].centroid.real))
        pos = {k: i for i, k in enumerate(order)}
        s = {(pos[perm[k]] - pos[k]) % q for k in cycle}
        if len(s) != 1:
            raise AmbiguousTracking(f"inconsistent shift {sorted(s)} in one cycle")
        shifts |= s
    if len(shifts) != 1:
        raise AmbiguousTracking(f"cycles disagree on the shift: {sorted(shifts)}")
    s = shifts.pop()
    return tuple(perm), Fraction(s, q) if q > 1 else Fraction(0, 1)
