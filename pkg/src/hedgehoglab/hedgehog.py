"""Hedgehog approximation pipeline.

The target germ's rotation angle is approximated along its continued-fraction
convergents; for each index the eigenvalue-substituted germ is semi-parabolic
and its maximal petals relative to the fixed ball are computed, scanned for
interfering periodic points, and verified against the expected conclusions
(origin adherence, connectedness, complete invariance, boundary contact).
The limit candidate is a majority-vote refinement of the last stages together
with the final stage itself; pairwise Hausdorff gaps are reported without any
convergence claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _poly as P
from .arithmetic import continued_fraction_expand
from .compacta import (CompactSetApprox, InvarianceReport, check_complete_invariance,
                       complement_is_connected, fill_to_full, hausdorff_distance,
                       is_grid_connected)
from .errors import PreconditionError, StageError
from .germs import (FixedPointData, Germ, approximating_sequence,
                    semiparabolic_multiplicity)
from .manifolds import center_manifold_jet, strong_stable_disc
from .petals import PetalFamily, maximal_petals, petal_touches_boundary


# ---------------------------------------------------------------------------
# periodic point scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicPoint:
    location: tuple
    period: int
    multipliers: tuple
    kind: str                    # attracting | repelling | hyperbolic | semi-neutral | neutral


@dataclass(frozen=True)
class PeriodicScanReport:
    points: tuple
    semi_neutral_interference: bool
    scanned_periods: int
    seeds: int
    exclusion_radius: float = 0.0


def scan_periodic_points(g: Germ, radius: float, max_period: int,
                         seeds_per_axis: int = 24, neutral_tol: float = 1e-6,
                         center_jet=None, exclusion_radius: float = 1e-8,
                         residual_tol: float = 1e-10) -> PeriodicScanReport:
    """Newton scan for periodic points of period <= max_period inside the
    ball, excluding the origin.  Flags any cycle with a multiplier on the unit
    circle (within ``neutral_tol``) as interference.

    ``exclusion_radius`` guards the degenerate fixed point: near a parabolic
    point f^q - id vanishes to order nu q + 1, so the whole collar satisfies
    any residual tolerance and would flood the scan with phantom neutral
    points.  Callers should set it to roughly (residual_tol/|kappa|)^(1/(nu q + 1)).
    """
    found: dict = {}
    if g.dim == 1:
        ax = np.linspace(-radius, radius, seeds_per_axis)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        seeds0 = (X + 1j * Y).ravel()
        seeds0 = seeds0[np.abs(seeds0) <= radius]
    else:
        ax = np.linspace(-radius, radius, seeds_per_axis)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        xs = (X + 1j * Y).ravel()
        xs = xs[np.abs(xs) <= radius]
        if center_jet is None:
            center_jet = center_manifold_jet(g, 10, check_validity=False).coefficients
        seeds0 = (xs, P.p1_val(center_jet, xs))

    for k in range(1, max_period + 1):
        if g.dim == 1:
            z = seeds0.copy()
            for _ in range(60):
                w = z
                dw = np.ones_like(z)
                for _ in range(k):
                    dw = dw * g.fwd.derivative(w)
                    w = g.fwd(w)
                val = w - z
                der = dw - 1.0
                step = np.where(np.abs(der) > 1e-14, val / der, 0.0)
                z = z - step
                if np.max(np.abs(step)) < 1e-13:
                    break
            w = z
            dw = np.ones_like(z)
            for _ in range(k):
                dw = dw * g.fwd.derivative(w)
                w = g.fwd(w)
            ok = (np.abs(w - z) < residual_tol) & (np.abs(z) <= radius) \
                & (np.abs(z) > exclusion_radius)
            for zz, mm in zip(z[ok], dw[ok]):
                key = (round(zz.real, 8), round(zz.imag, 8))
                if key in found or any(_same_orbit_1d(g, zz, kk) for kk in found):
                    continue
                found[key] = PeriodicPoint((zz.real, zz.imag), k, (complex(mm),),
                                           _kind_1d(mm, neutral_tol))
        else:
            zx, zy = seeds0[0].copy(), seeds0[1].copy()
            for _ in range(60):
                wx, wy = zx, zy
                ma = np.ones_like(zx); mb = np.zeros_like(zx)
                mc = np.zeros_like(zx); md = np.ones_like(zx)
                for _ in range(k):
                    a, b, c, d = g.fwd.jacobian(wx, wy)
                    ma, mb, mc, md = a * ma + b * mc, a * mb + b * md, \
                        c * ma + d * mc, c * mb + d * md
                    wx, wy = g.fwd(wx, wy)
                rx, ry = wx - zx, wy - zy
                da, db, dc, dd = ma - 1.0, mb, mc, md - 1.0
                det = da * dd - db * dc
                det = np.where(np.abs(det) > 1e-14, det, np.inf)
                sx = (dd * rx - db * ry) / det
                sy = (-dc * rx + da * ry) / det
                zx, zy = zx - sx, zy - sy
                if np.max(np.abs(sx)) + np.max(np.abs(sy)) < 1e-13:
                    break
            wx, wy = zx, zy
            ma = np.ones_like(zx); mb = np.zeros_like(zx)
            mc = np.zeros_like(zx); md = np.ones_like(zx)
            for _ in range(k):
                a, b, c, d = g.fwd.jacobian(wx, wy)
                ma, mb, mc, md = a * ma + b * mc, a * mb + b * md, \
                    c * ma + d * mc, c * mb + d * md
                wx, wy = g.fwd(wx, wy)
            norm = np.hypot(np.abs(zx), np.abs(zy))
            ok = (np.abs(wx - zx) + np.abs(wy - zy) < 10 * residual_tol) \
                & (norm <= radius) & (norm > exclusion_radius)
            for xx, yy, a, b, c, d in zip(zx[ok], zy[ok], ma[ok], mb[ok], mc[ok], md[ok]):
                key = (round(xx.real, 8), round(xx.imag, 8),
                       round(yy.real, 8), round(yy.imag, 8))
                if key in found:
                    continue
                tr = a + d
                det2 = a * d - b * c
                disc = np.sqrt(tr * tr - 4 * det2)
                evs = ((tr + disc) / 2, (tr - disc) / 2)
                found[key] = PeriodicPoint((xx.real, xx.imag, yy.real, yy.imag), k,
                                           tuple(complex(e) for e in evs),
                                           _kind_2d(evs, neutral_tol))
    pts = tuple(found[k] for k in sorted(found))
    interference = any(p.kind in ("semi-neutral", "neutral") for p in pts)
    n_seeds = seeds0[0].size if g.dim == 2 else seeds0.size
    return PeriodicScanReport(pts, interference, max_period, int(n_seeds),
                              exclusion_radius)


def _same_orbit_1d(g, z, key):
    return False   # dedup by rounded location is enough at scan tolerance


def _kind_1d(m, tol):
    if abs(abs(m) - 1.0) < tol:
        return "neutral"
    return "attracting" if abs(m) < 1 else "repelling"


def _kind_2d(evs, tol):
    mods = sorted(abs(e) for e in evs)
    if any(abs(m - 1.0) < tol for m in mods):
        return "semi-neutral"
    if mods[1] < 1:
        return "attracting"
    if mods[0] > 1:
        return "repelling"
    return "hyperbolic"


# ---------------------------------------------------------------------------
# stages and runs
# ---------------------------------------------------------------------------

@dataclass
class HedgehogStage:
    n: int
    p: int
    q: int
    germ: Germ
    fixed_point: FixedPointData
    family: PetalFamily
    compact: CompactSetApprox
    scan: PeriodicScanReport
    contains_zero: bool
    connected: bool
    invariance: InvarianceReport
    boundary_contact: bool
    flags_pass: bool


@dataclass
class HedgehogRun:
    germ: Germ
    ball_radius: float
    convergent_indices: tuple
    stages: list
    hausdorff_gaps: tuple
    limit_candidate: CompactSetApprox
    report: dict = field(default_factory=dict)


def _stage_compact(family: PetalFamily, resolution: int) -> CompactSetApprox:
    occ = np.zeros((resolution, resolution), dtype=bool)
    for comp in family.components:
        occ |= comp.compact.occupancy
    chart_name = family.components[0].compact.chart
    return CompactSetApprox(chart_name, family.ball_radius, occ)


def run_stage(g_n: Germ, fp_n: FixedPointData, n: int, B: float,
              resolution: int, orbit_cap: int, jet_degree: int = 8,
              seeds_per_axis: int = 24) -> HedgehogStage:
    p, q = fp_n.classification.p, fp_n.classification.q
    nf = semiparabolic_multiplicity(g_n, fp_n, jet_degree=max(jet_degree, 2 * q + 2))
    if nf.nu != 1:
        raise PreconditionError(f"stage multiplicity nu={nf.nu} != 1; not supported")
    stable = strong_stable_disc(g_n, 8) if g_n.dim == 2 else None
    excl = 2.0 * (1e-10 / max(abs(nf.leading_coefficient), 1e-6)) \
        ** (1.0 / (nf.nu * q + 1))
    scan = scan_periodic_points(g_n, min(1.2 * B, g_n.domain_radius), q,
                                seeds_per_axis=seeds_per_axis,
                                exclusion_radius=max(excl, 1e-8))
    family = maximal_petals(g_n, nf, B, resolution=resolution,
                            orbit_cap=orbit_cap, stable_jet=stable)
    compact = _stage_compact(family, resolution)
    h = compact.resolution
    contains_zero = bool(compact.distance_cells_to(np.array([0j]))[0] <= math.sqrt(2) + 1e-9)
    connected = is_grid_connected(compact)
    fwd, bwd = family.chart.forward, family.chart.backward
    inv = check_complete_invariance(fwd, bwd, compact, tol_cells=1.0,
                                    exclude_mask=family.extras.get("undecided_grid"))
    contact = any(petal_touches_boundary(family, B, tol_cells=2.0))
    flags = contains_zero and connected and inv.passed and contact \
        and not scan.semi_neutral_interference
    return HedgehogStage(n, p, q, g_n, fp_n, family, compact, scan,
                         contains_zero, connected, inv, contact, flags)


def limit_candidate_of(stage_compacts: list) -> CompactSetApprox:
    """Final-stage occupancy plus the cells filled in at least ceil(K/2) of
    the last K stages (K = min(3, #stages))."""
    K = min(3, len(stage_compacts))
    last = stage_compacts[-1]
    votes = np.zeros_like(last.occupancy, dtype=np.int16)
    for c in stage_compacts[-K:]:
        votes += c.occupancy.astype(np.int16)
    majority = votes >= math.ceil(K / 2)
    return last.replace_occupancy(last.occupancy | majority)


def hedgehog_approximate(g: Germ, fp: FixedPointData, B: float,
                         indices, resolution: int = 1024,
                         orbit_cap: int = 100_000,
                         seeds_per_axis: int = 24) -> HedgehogRun:
    """Full pipeline: stage germs, petals, verification flags, gaps, limit.

    A rational (already semi-parabolic) input degenerates to the single stage
    of the germ itself.  Per-stage failures re-raise as :class:`StageError`
    carrying the stage index.
    """
    cls = fp.classification
    if cls is None:
        raise PreconditionError("classify the fixed point first")
    stages: list[HedgehogStage] = []
    if cls.is_parabolic:
        try:
            stages.append(run_stage(g, fp, 0, B, resolution, orbit_cap,
                                    seeds_per_axis=seeds_per_axis))
        except Exception as e:          # noqa: BLE001 - annotate with the stage
            raise StageError(0, e) from e
        indices = (0,)
    else:
        indices = tuple(sorted(indices))
        cfe = continued_fraction_expand(fp.angle, max(indices))
        for n in indices:
            try:
                g_n, fp_n = approximating_sequence(g, fp, cfe, n)
                stages.append(run_stage(g_n, fp_n, n, B, resolution, orbit_cap,
                                        seeds_per_axis=seeds_per_axis))
            except Exception as e:      # noqa: BLE001
                raise StageError(n, e) from e
    compacts = [s.compact for s in stages]
    gaps = tuple(hausdorff_distance(compacts[i], compacts[i + 1])
                 for i in range(len(compacts) - 1))
    raw_limit = limit_candidate_of(compacts)
    limit = fill_to_full(raw_limit)
    fill_added = limit.count() - raw_limit.count()

    # the limit candidate is examined under the *target* germ
    if cls.is_parabolic:
        fwd, bwd = stages[0].family.chart.forward, stages[0].family.chart.backward
    else:
        fwd, bwd = _target_chart_maps(g)
    inv = check_complete_invariance(fwd, bwd, limit, tol_cells=1.0)
    cauchy = all(gaps[i + 1] <= gaps[i] + limit.resolution for i in range(len(gaps) - 1)) \
        if len(gaps) >= 2 else True
    report = {
        "contains_zero": bool(limit.distance_cells_to(np.array([0j]))[0] <= math.sqrt(2) + 1e-9),
        "connected": is_grid_connected(limit),
        "complete_invariance": inv,
        "boundary_contact": bool(
            np.abs(limit.cell_centers()).max() >= B - 2.0 * limit.resolution * math.sqrt(2))
        if limit.count() else False,
        "stage_flags": [s.flags_pass for s in stages],
        "gap_trend_monotone": cauchy,
        "full": complement_is_connected(limit),
        "fill_added_cells": fill_added,
    }
    return HedgehogRun(g, B, indices, stages, gaps, limit, report)


def _target_chart_maps(g: Germ):
    """Chart dynamics of the (irrational) target germ itself."""
    if g.dim == 1:
        gc = g.fwd.c

        def fwd(x):
            return P.p1_val(gc, np.asarray(x, dtype=complex))

        lam = gc[1]
        dgc = P.p1_der(gc)

        def bwd(x):
            x = np.asarray(x, dtype=complex)
            if len(gc) == 3 and gc[0] == 0:
                c1, c2 = gc[1], gc[2]
                s = np.sqrt(c1 * c1 + 4 * c2 * x)
                w1 = (-c1 + s) / (2 * c2)
                w2 = (-c1 - s) / (2 * c2)
                return np.where(np.abs(w1) <= np.abs(w2), w1, w2)
            w = x / lam
            for _ in range(40):
                val = P.p1_val(gc, w) - x
                w = w - val / P.p1_val(dgc, w)
                if np.max(np.abs(val)) < 1e-14:
                    break
            return w
        return fwd, bwd
    jet = center_manifold_jet(g, 14, check_validity=False).coefficients
    ident = np.zeros(15, dtype=complex)
    ident[1] = 1.0
    gc = P.p2_substitute_jets(g.fwd.c1, ident, jet, 14)
    lam = gc[1]
    dgc = P.p1_der(gc)

    def fwd(x):
        return P.p1_val(gc, np.asarray(x, dtype=complex))

    def bwd(x):
        x = np.asarray(x, dtype=complex)
        w = x / lam
        for _ in range(40):
            val = P.p1_val(gc, w) - x
            w = w - val / P.p1_val(dgc, w)
            if np.max(np.abs(val)) < 1e-14:
                break
        bad = np.abs(P.p1_val(gc, w) - x) > 1e-9
        return np.where(bad, np.nan + 0j, w)
    return fwd, bwd


# ---------------------------------------------------------------------------
# strong stable lamination
# ---------------------------------------------------------------------------

@dataclass
class StableDisc:
    base_point: tuple
    samples_x: np.ndarray
    samples_y: np.ndarray
    vertical: bool
    rate_ok: bool
    max_tangent_ratio: float


def strong_stable_lamination_sample(g: Germ, H: CompactSetApprox, count: int,
                                    mu_bar: float = 0.3, cone_tangent: float = 0.18,
                                    pullback_depth: int = 10,
                                    rate_horizon: int = 40,
                                    center_jet=None) -> list:
    """Local strong stable discs through sample points of H.

    Each disc is the pullback of a short vertical segment through the forward
    iterate f^k(p): vertical segments are backward-invariant as a cone class,
    and the pullback contracts onto the strong stable curve of p.  Verified
    per disc: all chord directions stay in the vertical cone, and a test
    point approaches the base orbit at rate mu_bar (non-increasing ratio
    tail over the horizon).
    """
    if g.dim != 2:
        raise PreconditionError("lamination sampling needs a 2-D germ")
    if H.is_empty():
        raise PreconditionError("H is empty")
    if center_jet is None:
        center_jet = center_manifold_jet(g, 10, check_validity=False).coefficients
    pts = H.boundary_points
    stride = max(1, pts.size // count)
    bases = pts[::stride][:count]
    mu = abs(g.fwd.linear_part()[1, 1])
    discs = []
    for x0 in bases:
        p = (complex(x0), complex(P.p1_val(center_jet, complex(x0))))
        disc = _pullback_disc(g, p, mu, pullback_depth)
        if disc is None:
            discs.append(StableDisc((p[0].real, p[0].imag, p[1].real, p[1].imag),
                                    np.zeros(0, complex), np.zeros(0, complex),
                                    False, False, float("inf")))
            continue
        sx, sy = disc
        dx = np.diff(sx)
        dy = np.diff(sy)
        ratios = np.abs(dx) / np.maximum(np.abs(dy), 1e-300)
        vertical = bool(np.all(ratios <= cone_tangent))
        rate_ok = _mu_rate_check(g, p, (sx[-1], sy[-1]), mu_bar, rate_horizon)
        discs.append(StableDisc((p[0].real, p[0].imag, p[1].real, p[1].imag),
                                sx, sy, vertical, rate_ok, float(ratios.max())))
    return discs


def _pullback_disc(g: Germ, p, mu, depth, n_samples=17):
    """Pull a short vertical segment through f^depth(p) back to p.

    The segment half-length shrinks like mu^depth so the pulled-back disc has
    a size of order the domain radius; depth is kept moderate so the segment
    stays resolvable in double precision next to f^depth(p)."""
    fx, fy = p
    for _ in range(depth):
        fx, fy = g.fwd(fx, fy)
        fx, fy = complex(fx), complex(fy)
        if not (abs(fx) < 10 and abs(fy) < 10):
            return None
    half = 0.2 * g.domain_radius * mu ** depth
    if half < 1e4 * abs(fy) * 2.3e-16 + 1e-250:
        return None    # segment would collapse below rounding next to the orbit
    offs = np.linspace(-1, 1, n_samples)
    sx = np.full(n_samples, fx, dtype=complex)
    sy = fy + offs * half
    for _ in range(depth):
        nx, ny = g.apply_inverse(sx, sy)
        if np.any(~np.isfinite(nx.real)):
            return None
        sx, sy = nx, ny
    return sx, sy


def _mu_rate_check(g, p, test, mu_bar, horizon, floor=1e-11):
    """Distance to the base orbit must decay at rate mu_bar: nonincreasing
    ratio tail.  Distances below ``floor`` count as converged: the pullback
    disc carries a small construction residue (vertical-segment tilt times
    the neutral horizontal transport), and below it the ratio would grow
    spuriously."""
    px, py = p
    tx, ty = complex(test[0]), complex(test[1])
    ratios = []
    for n in range(1, horizon + 1):
        px, py = g.fwd(px, py)
        tx, ty = g.fwd(tx, ty)
        px, py, tx, ty = complex(px), complex(py), complex(tx), complex(ty)
        d = math.hypot(abs(tx - px), abs(ty - py))
        if d < floor:
            d = 0.0
        ratios.append(d / mu_bar ** n)
    tail = ratios[max(2, horizon // 4):]
    return all(tail[i + 1] <= tail[i] * (1 + 1e-9) + 1e-300 for i in range(len(tail) - 1))
