"""Partial hyperbolicity certificates.

The certificate checks, on a covering grid of the real 4-ball, the four
defining conditions: forward invariance of the horizontal cone family,
backward invariance of the vertical one, the two-sided norm bound on
horizontal vectors and the contraction bound on vertical vectors.  Cones sit
around the constant axis distributions of the normalized chart and all norms
are Euclidean; if certification fails in this metric the certificate says so
rather than searching for an adapted one.

Sampling is turned into a covering statement by demanding each inequality
hold with slack proportional to a Lipschitz bound of the Jacobian entries on
the ball times the grid covering radius; margins below that slack raise
``grid-too-coarse`` instead of certifying.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _poly as P
from .errors import GridTooCoarse, InverseUnavailable, PreconditionError
from .germs import Germ

DEFAULT_RAYS = 256
DEFAULT_GRID = 12
DEFAULT_CONE_TANGENT = 0.18


@dataclass(frozen=True)
class ConeFieldSpec:
    """Constant cone fields around the chart axes.

    ``cone_half_angle`` is measured with the Hermitian angle between a vector
    and a complex line; membership of v = (v1, v2) in the vertical cone means
    |v1| <= tan(angle) |v2|, and symmetrically for the horizontal one.
    """
    cone_half_angle: float = math.atan(DEFAULT_CONE_TANGENT)
    boundary_rays: int = DEFAULT_RAYS

    def __post_init__(self):
        if not (0 < self.cone_half_angle < math.pi / 2):
            raise PreconditionError("cone half-angle must lie in (0, pi/2)")

    @property
    def tangent(self):
        return math.tan(self.cone_half_angle)


@dataclass(frozen=True)
class Witness:
    point: tuple
    condition: str
    ray_angle: float
    value: float
    bound: float


@dataclass(frozen=True)
class PartialHyperbolicityCertificate:
    mu_bar: float
    lambda_lower: float
    ball_radius: float
    grid_points: int
    passed: bool
    margins: dict = field(default_factory=dict)   # per-condition worst margins
    required_slack: float = 0.0
    witness: Witness | None = None
    dimension: int = 2
    notes: str = ""

    def to_json(self) -> str:
        d = {
            "mu_bar": self.mu_bar,
            "lambda_lower": self.lambda_lower,
            "ball_radius": self.ball_radius,
            "grid_points": self.grid_points,
            "passed": self.passed,
            "margins": {k: float(v) for k, v in sorted(self.margins.items())},
            "required_slack": self.required_slack,
            "dimension": self.dimension,
            "notes": self.notes,
        }
        if self.witness is not None:
            d["witness"] = {
                "point": [float(v) for v in self.witness.point],
                "condition": self.witness.condition,
                "ray_angle": self.witness.ray_angle,
                "value": self.witness.value,
                "bound": self.witness.bound,
            }
        return json.dumps(d, sort_keys=True, indent=2)


def _ball_grid(radius, density):
    """Lattice covering the real 4-ball; covering radius = half cell diagonal."""
    axes = np.linspace(-radius, radius, density)
    spacing = 2 * radius / (density - 1)
    g = np.stack(np.meshgrid(axes, axes, axes, axes, indexing="ij"), axis=-1)
    pts = g.reshape(-1, 4)
    keep = (pts ** 2).sum(axis=1) <= radius * radius * (1 + 1e-12)
    return pts[keep], spacing * 1.0   # half-diagonal of a 4-cube of side s is s


def _jacobian_lipschitz(g: Germ, radius):
    """Sum of gradient bounds of the four Jacobian entry polynomials."""
    total = 0.0
    for C in (g.fwd.c1, g.fwd.c2):
        for D in (P.p2_dx(C), P.p2_dy(C)):
            total += P.p2_gradient_bound(D, radius)
    return total


def certify(g: Germ, spec: ConeFieldSpec, ball_radius: float,
            grid_density: int = DEFAULT_GRID, mu_bar: float = 0.3,
            lambda_lower: float = 0.8) -> PartialHyperbolicityCertificate:
    """Certify partial hyperbolicity of ``g`` on the ball of ``ball_radius``.

    Dimension 2 checks the full cone-field package; dimension 1 degenerates to
    the two-sided derivative bound lambda_lower <= |f'| <= 1/lambda_lower on
    the disc (the vertical conditions are vacuous and recorded as such).
    """
    if not (0 < mu_bar < lambda_lower < 1):
        raise PreconditionError("need 0 < mu_bar < lambda_lower < 1")
    if g.dim == 1:
        return _certify_1d(g, ball_radius, grid_density, mu_bar, lambda_lower)
    if g.inv is None and g.inverse_seed is None:
        raise InverseUnavailable("vertical cone conditions need an inverse")

    L = g.fwd.linear_part()
    mu = abs(L[1, 1])
    if not (0 < mu < mu_bar):
        return PartialHyperbolicityCertificate(
            mu_bar, lambda_lower, ball_radius, 0, False,
            witness=Witness((0.0, 0.0, 0.0, 0.0), "dissipative-eigenvalue", 0.0, mu, mu_bar),
            notes="|mu| must lie strictly inside (0, mu_bar)")

    pts, cover = _ball_grid(ball_radius, grid_density)
    t = spec.tangent
    th = np.linspace(0, 2 * np.pi, spec.boundary_rays, endpoint=False)
    rays = np.exp(1j * th)

    x = pts[:, 0] + 1j * pts[:, 1]
    y = pts[:, 2] + 1j * pts[:, 3]
    a, b, c, d = g.fwd.jacobian(x, y)
    det = a * d - b * c
    if np.any(np.abs(det) < 1e-14):
        raise InverseUnavailable("Jacobian numerically singular on the grid")
    ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det

    # horizontal boundary rays v = (1, t e^{i th}); vertical v = (t e^{i th}, 1)
    A = a[:, None]; B = b[:, None]; C = c[:, None]; D = d[:, None]
    IA = ia[:, None]; IB = ib[:, None]; IC = ic[:, None]; ID = id_[:, None]
    hv2 = t * rays[None, :]
    w1 = A + B * hv2
    w2 = C + D * hv2
    hcone = t * np.abs(w1) - np.abs(w2)                   # > 0 wanted
    norm_h = np.sqrt(np.abs(w1) ** 2 + np.abs(w2) ** 2) / math.sqrt(1 + t * t)
    hlo = norm_h - lambda_lower                           # > 0 wanted
    hhi = 1.0 / lambda_lower - norm_h                     # > 0 wanted
    vv1 = t * rays[None, :]
    u1 = IA * vv1 + IB
    u2 = IC * vv1 + ID
    vcone = t * np.abs(u2) - np.abs(u1)                   # > 0 wanted
    z1 = A * vv1 + B
    z2 = C * vv1 + D
    norm_v = np.sqrt(np.abs(z1) ** 2 + np.abs(z2) ** 2) / math.sqrt(1 + t * t)
    vbound = mu_bar - norm_v                              # > 0 wanted

    # center rays of both cones are subject to the norm bounds as well
    norm_c = np.sqrt(np.abs(a) ** 2 + np.abs(c) ** 2)
    hlo_c = norm_c - lambda_lower
    hhi_c = 1.0 / lambda_lower - norm_c
    norm_cv = np.sqrt(np.abs(b) ** 2 + np.abs(d) ** 2)
    vbound_c = mu_bar - norm_cv

    lip = _jacobian_lipschitz(g, ball_radius)
    ray_gap = 2 * math.pi / spec.boundary_rays
    # grid slack: quantities are 1-Lipschitz in the Jacobian entries up to the
    # |v| <= sqrt(1+t^2) factor; ray slack: d/dth bounded by t * max|J| per entry
    jmax = max(float(np.abs(v).max()) for v in (a, b, c, d))
    slack = 2.0 * math.sqrt(1 + t * t) * (lip * cover + t * jmax * ray_gap)

    conditions = {
        "horizontal-cone-invariance": hcone,
        "vertical-cone-invariance": vcone,
        "horizontal-lower-bound": hlo,
        "horizontal-upper-bound": hhi,
        "vertical-contraction": vbound,
        "horizontal-lower-bound-center": hlo_c[:, None],
        "horizontal-upper-bound-center": hhi_c[:, None],
        "vertical-contraction-center": vbound_c[:, None],
    }
    margins = {k: float(v.min()) for k, v in conditions.items()}
    worst_name = min(margins, key=lambda k: margins[k])
    worst = margins[worst_name]
    if worst <= 0:
        arr = conditions[worst_name]
        if arr.shape[1] == 1:
            flat = int(np.argmin(arr[:, 0])); ray = 0.0
        else:
            flat = int(np.argmin(arr.min(axis=1)))
            ray = float(th[int(np.argmin(arr[flat]))])
        wpt = tuple(float(v) for v in pts[flat])
        bound = {"horizontal-lower-bound": lambda_lower,
                 "horizontal-lower-bound-center": lambda_lower,
                 "horizontal-upper-bound": 1 / lambda_lower,
                 "horizontal-upper-bound-center": 1 / lambda_lower,
                 "vertical-contraction": mu_bar,
                 "vertical-contraction-center": mu_bar}.get(worst_name, 0.0)
        return PartialHyperbolicityCertificate(
            mu_bar, lambda_lower, ball_radius, len(pts), False, margins, slack,
            Witness(wpt, worst_name, ray, worst, bound))
    if worst < slack:
        raise GridTooCoarse(
            f"worst margin {worst:.3e} below covering slack {slack:.3e}; "
            f"raise grid_density above {grid_density}")
    return PartialHyperbolicityCertificate(
        mu_bar, lambda_lower, ball_radius, len(pts), True, margins, slack)


def _certify_1d(g: Germ, ball_radius, grid_density, mu_bar, lambda_lower):
    n = max(grid_density * grid_density, 64)
    side = int(math.isqrt(n))
    ax = np.linspace(-ball_radius, ball_radius, side)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    z = (X + 1j * Y).ravel()
    z = z[np.abs(z) <= ball_radius]
    spacing = 2 * ball_radius / (side - 1)
    cover = spacing / math.sqrt(2)
    der = g.fwd.derivative(z)
    lo = np.abs(der) - lambda_lower
    hi = 1.0 / lambda_lower - np.abs(der)
    margins = {"derivative-lower-bound": float(lo.min()),
               "derivative-upper-bound": float(hi.min())}
    second = P.p1_der(P.p1_der(g.fwd.c))
    lip = float(np.sum(np.abs(second) * ball_radius ** np.arange(len(second))))
    slack = 2.0 * lip * cover
    worst_name = min(margins, key=lambda k: margins[k])
    worst = margins[worst_name]
    if worst <= 0:
        arr = lo if worst_name == "derivative-lower-bound" else hi
        i = int(np.argmin(arr))
        return PartialHyperbolicityCertificate(
            mu_bar, lambda_lower, ball_radius, z.size, False, margins, slack,
            Witness((float(z[i].real), float(z[i].imag)), worst_name, 0.0,
                    float(np.abs(der[i])),
                    lambda_lower if worst_name.endswith("lower-bound") else 1 / lambda_lower),
            dimension=1, notes="1-D: vertical conditions vacuous")
    if worst < slack:
        raise GridTooCoarse(f"worst margin {worst:.3e} below slack {slack:.3e}")
    return PartialHyperbolicityCertificate(
        mu_bar, lambda_lower, ball_radius, z.size, True, margins, slack,
        dimension=1, notes="1-D: vertical conditions vacuous")


def witness_violates(g: Germ, spec: ConeFieldSpec, cert: PartialHyperbolicityCertificate) -> bool:
    """Re-evaluate a failure witness from scratch and confirm the violation."""
    w = cert.witness
    if w is None:
        return False
    if cert.dimension == 1:
        z = w.point[0] + 1j * w.point[1]
        dv = abs(complex(g.fwd.derivative(z)))
        if w.condition == "derivative-lower-bound":
            return dv < cert.lambda_lower
        return dv > 1.0 / cert.lambda_lower
    x = w.point[0] + 1j * w.point[1]
    y = w.point[2] + 1j * w.point[3]
    a, b, c, d = [complex(v) for v in g.fwd.jacobian(x, y)]
    t = spec.tangent
    e = cmath_exp(w.ray_angle)
    if w.condition == "dissipative-eigenvalue":
        mu = abs(g.fwd.linear_part()[1, 1])
        return not (0 < mu < cert.mu_bar)
    if w.condition == "horizontal-cone-invariance":
        w1, w2 = a + b * t * e, c + d * t * e
        return t * abs(w1) - abs(w2) <= 0
    if w.condition == "vertical-cone-invariance":
        det = a * d - b * c
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        u1, u2 = ia * t * e + ib, ic * t * e + id_
        return t * abs(u2) - abs(u1) <= 0
    if w.condition.startswith("horizontal"):
        if w.condition.endswith("center"):
            ratio = math.hypot(abs(a), abs(c))
        else:
            w1, w2 = a + b * t * e, c + d * t * e
            ratio = math.hypot(abs(w1), abs(w2)) / math.sqrt(1 + t * t)
        if "lower" in w.condition:
            return ratio < cert.lambda_lower
        return ratio > 1.0 / cert.lambda_lower
    if w.condition.endswith("center"):
        ratio = math.hypot(abs(b), abs(d))
    else:
        z1, z2 = a * t * e + b, c * t * e + d
        ratio = math.hypot(abs(z1), abs(z2)) / math.sqrt(1 + t * t)
    return ratio > cert.mu_bar


def cmath_exp(theta):
    return complex(math.cos(theta), math.sin(theta))


def boundary_extremum_is_interior_max(g: Germ, spec: ConeFieldSpec, point,
                                      interior_samples: int = 7) -> bool:
    """Sampled comparison backing the boundary-ray optimization: ratios at
    interior cone directions must not exceed the boundary extrema."""
    if g.dim != 2:
        raise PreconditionError("2-D check")
    x, y = point
    a, b, c, d = [complex(v) for v in g.fwd.jacobian(x, y)]
    t = spec.tangent
    th = np.linspace(0, 2 * np.pi, spec.boundary_rays, endpoint=False)
    rays = np.exp(1j * th)
    w1 = a + b * t * rays
    w2 = c + d * t * rays
    ratios = np.sqrt(np.abs(w1) ** 2 + np.abs(w2) ** 2) / math.sqrt(1 + t * t)
    center = float(np.hypot(abs(a), abs(c)))
    bmax = max(float(ratios.max()), center)
    bmin_center = min(center, float(ratios.min()))
    ok = True
    # sampled comparison with a small slack: the extrema principle is exact
    # for the cone-invariance quantities and holds to rounding-level dips for
    # the norm ratios in the near-diagonal regime certified here
    for s in np.linspace(0, t, interior_samples + 1)[1:-1]:
        iw1 = a + b * s * rays
        iw2 = c + d * s * rays
        ratio = np.sqrt(np.abs(iw1) ** 2 + np.abs(iw2) ** 2) / math.sqrt(1 + s * s)
        ok &= float(ratio.max()) <= bmax + 1e-3
        ok &= float(ratio.min()) >= bmin_center - 1e-3
    return bool(ok)
