"""Polynomial germs, fixed-point normalization, classification, normal-form
invariants and the semi-parabolic approximating sequence.

A germ is a polynomial map of C (dimension 1) or a polynomial automorphism of
C^2 (dimension 2, explicit inverse) fixing the origin after normalization.
All dynamics downstream run on these normalized representatives: linear part
diag(lambda, mu) with the neutral direction on the x-axis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import _poly as P
from .arithmetic import (BrjunoReport, ContinuedFractionExpansion, RotationAngle,
                         angle_of_unit_complex, continued_fraction_expand)
from .errors import (ConfigError, DegenerateDifferential, IndexOutOfRange,
                     JetDegreeInsufficient, NoFixedPointFound, PreconditionError,
                     ResonanceViolation)

UNIT_CIRCLE_TOL = 1e-9        # relative tolerance for |lambda| = 1
EIGEN_SEPARATION = 1e-10
NEWTON_STEPS = 200
MULTIPLICITY_FLOOR = 1e-10    # smallest admissible leading coefficient


# ---------------------------------------------------------------------------
# polynomial maps
# ---------------------------------------------------------------------------

class PolyMap:
    """Polynomial self-map of C (one coefficient vector) or C^2 (two
    coefficient matrices ``C[i, j] x^i y^j``)."""

    def __init__(self, comps, dim=None):
        if dim == 1 or (dim is None and np.ndim(comps[0]) == 1 and len(comps) == 1):
            self.dim = 1
            self.c = P.p1_trim(np.asarray(comps[0], dtype=complex))
        else:
            self.dim = 2
            self.c1 = P.p2_trim(np.asarray(comps[0], dtype=complex))
            self.c2 = P.p2_trim(np.asarray(comps[1], dtype=complex))
            self._jac = None

    @staticmethod
    def one_dim(coeffs):
        return PolyMap((coeffs,), dim=1)

    def __call__(self, x, y=None):
        if self.dim == 1:
            return P.p1_val(self.c, x)
        return P.p2_val(self.c1, x, y), P.p2_val(self.c2, x, y)

    def derivative(self, z):
        if self.dim != 1:
            raise ValueError("derivative() is the 1-D API; use jacobian()")
        return P.p1_val(P.p1_der(self.c), z)

    def jacobian(self, x, y):
        if self._jac is None:
            self._jac = (P.p2_dx(self.c1), P.p2_dy(self.c1),
                         P.p2_dx(self.c2), P.p2_dy(self.c2))
        a, b, c, d = self._jac
        return (P.p2_val(a, x, y), P.p2_val(b, x, y),
                P.p2_val(c, x, y), P.p2_val(d, x, y))

    def linear_part(self):
        if self.dim == 1:
            return self.c[1] if len(self.c) > 1 else 0j
        m = np.zeros((2, 2), dtype=complex)
        if self.c1.shape[0] > 1:
            m[0, 0] = self.c1[1, 0]
        if self.c1.shape[1] > 1:
            m[0, 1] = self.c1[0, 1]
        if self.c2.shape[0] > 1:
            m[1, 0] = self.c2[1, 0]
        if self.c2.shape[1] > 1:
            m[1, 1] = self.c2[0, 1]
        return m

    def max_degree(self):
        if self.dim == 1:
            return len(self.c) - 1
        return max(self.c1.shape[0] + self.c1.shape[1],
                   self.c2.shape[0] + self.c2.shape[1]) - 2


# ---------------------------------------------------------------------------
# germ
# ---------------------------------------------------------------------------

@dataclass
class Germ:
    dim: int
    fwd: PolyMap
    inv: PolyMap | None
    domain_radius: float
    inverse_seed: PolyMap | None = None   # used to seed Newton when inv is None

    def __call__(self, x, y=None):
        return self.fwd(x) if self.dim == 1 else self.fwd(x, y)

    @property
    def has_exact_inverse(self):
        return self.inv is not None

    def apply_inverse(self, x, y=None, newton_steps=40, tol=1e-13):
        """Local inverse branch near the origin.

        An explicit polynomial inverse is evaluated directly; otherwise a
        Newton solve seeded with ``inverse_seed`` (or the inverse linear part)
        is used.  Entries that fail to converge come back as NaN.
        """
        if self.inv is not None:
            return self.inv(x) if self.dim == 1 else self.inv(x, y)
        if self.dim == 1:
            w = np.asarray(x, dtype=complex)
            lam = self.fwd.linear_part()
            z = (self.inverse_seed(w) if self.inverse_seed is not None else w / lam)
            dc = P.p1_der(self.fwd.c)
            for _ in range(newton_steps):
                val = P.p1_val(self.fwd.c, z) - w
                z = z - val / P.p1_val(dc, z)
                if np.max(np.abs(val)) < tol:
                    break
            bad = np.abs(P.p1_val(self.fwd.c, z) - w) > 1e-9
            if np.any(bad):
                z = np.where(bad, np.nan + 0j, z)
            return z
        wx = np.asarray(x, dtype=complex)
        wy = np.asarray(y, dtype=complex)
        if self.inverse_seed is not None:
            zx, zy = self.inverse_seed(wx, wy)
        else:
            L = np.linalg.inv(self.fwd.linear_part())
            zx = L[0, 0] * wx + L[0, 1] * wy
            zy = L[1, 0] * wx + L[1, 1] * wy
        for _ in range(newton_steps):
            fx, fy = self.fwd(zx, zy)
            rx, ry = fx - wx, fy - wy
            a, b, c, d = self.fwd.jacobian(zx, zy)
            det = a * d - b * c
            zx = zx - (d * rx - b * ry) / det
            zy = zy - (-c * rx + a * ry) / det
            if max(np.max(np.abs(rx)), np.max(np.abs(ry))) < tol:
                break
        fx, fy = self.fwd(zx, zy)
        bad = (np.abs(fx - wx) > 1e-9) | (np.abs(fy - wy) > 1e-9)
        if np.any(bad):
            zx = np.where(bad, np.nan + 0j, zx)
            zy = np.where(bad, np.nan + 0j, zy)
        return zx, zy

    def inverse_defect(self, n_samples=100, seed=7):
        """max |f^{-1}(f(z)) - z| over sample points of the domain ball."""
        rng = np.random.default_rng(seed)
        if self.dim == 1:
            z = self.domain_radius * np.sqrt(rng.uniform(0, 1, n_samples)) \
                * np.exp(2j * np.pi * rng.uniform(0, 1, n_samples))
            w = self.fwd(z)
            return float(np.nanmax(np.abs(self.apply_inverse(w) - z)))
        v = rng.normal(size=(n_samples, 4))
        v *= (self.domain_radius * rng.uniform(0, 1, n_samples) ** 0.25
              / np.linalg.norm(v, axis=1))[:, None]
        zx, zy = v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]
        wx, wy = self.fwd(zx, zy)
        ix, iy = self.apply_inverse(wx, wy)
        return float(np.nanmax(np.hypot(np.abs(ix - zx), np.abs(iy - zy))))


# ---------------------------------------------------------------------------
# fixed point data and classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    kind: str            # semi-parabolic | semi-siegel-candidate |
                         # semi-cremer-candidate | not-semi-indifferent | undecided
    p: int | None = None
    q: int | None = None

    def __str__(self):
        if self.kind == "semi-parabolic":
            return f"semi-parabolic({self.p},{self.q})"
        return self.kind

    @property
    def is_parabolic(self):
        return self.kind == "semi-parabolic"

    @property
    def is_irrational_candidate(self):
        return self.kind in ("semi-siegel-candidate", "semi-cremer-candidate", "undecided")


@dataclass(frozen=True)
class FixedPointData:
    eigenvalue_neutral: complex
    eigenvalue_dissipative: complex | None
    angle: RotationAngle
    classification: Classification | None
    e_center: tuple | None = None        # unit eigenvectors in the original frame
    e_stable: tuple | None = None
    location: tuple | complex = 0j       # fixed point in the original coordinates


def _phase_fix(v):
    """Scale a unit vector so its largest-modulus entry is real positive."""
    k = int(np.argmax(np.abs(v)))
    return v / (v[k] / abs(v[k]))


def normalize_fixed_point(raw_map: PolyMap, guess, declared_angle: RotationAngle | None = None,
                          domain_radius: float = 0.3,
                          raw_inverse: PolyMap | None = None) -> tuple[Germ, FixedPointData]:
    """Locate the fixed point near ``guess`` by Newton, translate it to the
    origin and (in dimension 2) rotate so the neutral/dissipative
    eigen-directions become the x/y axes.

    Idempotent: feeding back a normalized germ reproduces its coefficients to
    rounding error.  ``declared_angle`` overrides the angle measured from the
    neutral eigenvalue, which keeps exact arithmetic available downstream when
    the eigenvalue was constructed from a known rotation number.
    """
    if raw_map.dim == 1:
        z = complex(guess)
        for _ in range(NEWTON_STEPS):
            val = complex(raw_map(z)) - z
            der = complex(raw_map.derivative(z)) - 1.0
            if der == 0:
                break
            step = val / der
            z -= step
            if abs(step) < 1e-14:
                break
        if abs(complex(raw_map(z)) - z) > 1e-10:
            raise NoFixedPointFound(f"Newton stalled at {z}")
        shifted = P.p1_compose(raw_map.c, np.array([z, 1.0], dtype=complex),
                               trunc=len(raw_map.c) - 1)
        shifted[0] -= z
        if abs(shifted[0]) > 1e-12:
            raise NoFixedPointFound("translation did not cancel the constant term")
        shifted[0] = 0.0
        fwd = PolyMap.one_dim(shifted)
        lam = fwd.linear_part()
        angle = declared_angle if declared_angle is not None else angle_of_unit_complex(lam)
        fp = FixedPointData(lam, None, angle, None, location=z)
        inv = PolyMap.one_dim(_shift_poly(raw_inverse.c, z)) if raw_inverse is not None else None
        return Germ(1, fwd, inv, domain_radius), fp

    gx = complex(guess[0]); gy = complex(guess[1])
    zx, zy = gx, gy
    for _ in range(NEWTON_STEPS):
        fx, fy = raw_map(zx, zy)
        rx, ry = complex(fx) - zx, complex(fy) - zy
        a, b, c, d = [complex(v) for v in raw_map.jacobian(zx, zy)]
        a -= 1.0; d -= 1.0
        det = a * d - b * c
        if det == 0:
            break
        dx = (d * rx - b * ry) / det
        dy = (-c * rx + a * ry) / det
        zx -= dx; zy -= dy
        if abs(dx) + abs(dy) < 1e-14:
            break
    fx, fy = raw_map(zx, zy)
    if abs(complex(fx) - zx) + abs(complex(fy) - zy) > 1e-10:
        raise NoFixedPointFound(f"Newton stalled at ({zx}, {zy})")

    ja, jb, jc, jd = [complex(v) for v in raw_map.jacobian(zx, zy)]
    J = np.array([[ja, jb], [jc, jd]])
    evals, evecs = np.linalg.eig(J)
    if abs(evals[0] - evals[1]) < EIGEN_SEPARATION:
        raise DegenerateDifferential(f"eigenvalues {evals} too close")
    order = np.argsort(np.abs(np.abs(evals) - 1.0))   # neutral first
    lam, mu = evals[order[0]], evals[order[1]]
    vc = _phase_fix(evecs[:, order[0]] / np.linalg.norm(evecs[:, order[0]]))
    vs = _phase_fix(evecs[:, order[1]] / np.linalg.norm(evecs[:, order[1]]))
    Pm = np.column_stack([vc, vs])
    Pi = np.linalg.inv(Pm)

    def conjugate(pm: PolyMap) -> PolyMap:
        # Pi (pm(Pm u + z0) - z0), component-wise exact polynomial algebra
        c1 = P.p2_compose_affine(pm.c1, Pm[0, 0], Pm[0, 1], zx, Pm[1, 0], Pm[1, 1], zy)
        c2 = P.p2_compose_affine(pm.c2, Pm[0, 0], Pm[0, 1], zx, Pm[1, 0], Pm[1, 1], zy)
        c1[0, 0] -= zx
        c2[0, 0] -= zy
        n1 = P.p2_add(P.p2_scale(c1, Pi[0, 0]), P.p2_scale(c2, Pi[0, 1]))
        n2 = P.p2_add(P.p2_scale(c1, Pi[1, 0]), P.p2_scale(c2, Pi[1, 1]))
        for m in (n1, n2):
            if abs(m[0, 0]) > 1e-10:
                raise NoFixedPointFound("conjugation left a constant term")
            m[0, 0] = 0.0
        return PolyMap((n1, n2))

    fwd = conjugate(raw_map)
    inv = conjugate(raw_inverse) if raw_inverse is not None else None
    residual = np.abs(fwd.linear_part() - np.diag([lam, mu])).max()
    if residual > 1e-12 * max(1.0, abs(lam)):
        raise DegenerateDifferential(f"diagonalization residual {residual:.2e}")
    angle = declared_angle if declared_angle is not None else angle_of_unit_complex(lam)
    fp = FixedPointData(lam, mu, angle, None,
                        e_center=(vc[0], vc[1]), e_stable=(vs[0], vs[1]),
                        location=(zx, zy))
    return Germ(2, fwd, inv, domain_radius), fp


def _shift_poly(c, z0):
    out = P.p1_compose(np.asarray(c, dtype=complex),
                       np.array([z0, 1.0], dtype=complex), trunc=len(c) - 1)
    out[0] -= z0
    return out


def classify(fp: FixedPointData, report: BrjunoReport | None) -> Classification:
    """Arithmetic sub-classification of a semi-indifferent fixed point."""
    lam = fp.eigenvalue_neutral
    mu = fp.eigenvalue_dissipative
    if abs(abs(lam) - 1.0) > UNIT_CIRCLE_TOL or (mu is not None and abs(mu) >= 1.0):
        return Classification("not-semi-indifferent")
    if fp.angle.exact:
        frac = fp.angle.lo
        return Classification("semi-parabolic", frac.numerator, frac.denominator)
    if report is None or report.verdict == "undecided":
        return Classification("undecided")
    if report.verdict == "rational":
        cfe = continued_fraction_expand(fp.angle, 64)
        frac = cfe.as_fraction()
        return Classification("semi-parabolic", frac.numerator, frac.denominator)
    if report.verdict == "brjuno-likely":
        return Classification("semi-siegel-candidate")
    return Classification("semi-cremer-candidate")


def with_classification(fp: FixedPointData, cls: Classification) -> FixedPointData:
    return replace(fp, classification=cls)


# ---------------------------------------------------------------------------
# normal-form invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFormData:
    q: int
    nu: int
    leading_coefficient: complex      # first resonant coefficient of the restricted f^q jet
    c_constant: complex | None
    restricted_jet: np.ndarray        # center-restricted jet of f itself
    normal_jet: np.ndarray            # restricted jet with non-resonant orders removed
    from_normal: np.ndarray           # h:  normalized coordinate -> chart
    to_normal: np.ndarray             # h^{-1} jet
    trap_coefficient: complex         # gt_{nu q + 1} / lambda; u = trap_coefficient * x^{nu q}

    @property
    def resonant_order(self):
        return self.nu * self.q + 1


def center_restricted_jet(g: Germ, degree: int) -> np.ndarray:
    """Jet of the dynamics induced on the center direction.

    Dimension 1: the map's own jet.  Dimension 2: f_1(x, phi(x)) where phi is
    the center-manifold jet of matching degree.
    """
    if g.dim == 1:
        out = np.zeros(degree + 1, dtype=complex)
        src = g.fwd.c[: degree + 1]
        out[: len(src)] = src
        return out
    from .manifolds import center_manifold_jet   # deferred: manifolds imports germs
    jet = center_manifold_jet(g, degree, check_validity=False)
    return P.p2_substitute_jets(g.fwd.c1, _identity_jet(degree), jet.coefficients, degree)


def _identity_jet(degree):
    x = np.zeros(degree + 1, dtype=complex)
    x[1] = 1.0
    return x


def partial_normal_form(jet: np.ndarray, q: int, through: int):
    """Remove non-resonant orders (k-1 mod q != 0) of a 1-D jet by a
    polynomial change of variable tangent to the identity.

    Returns (normalized jet gt, h, h^{-1} jet) with g o h = h o gt through the
    requested order.  Divisors lambda^k - lambda are bounded away from zero at
    the removed orders, so this never hits a small divisor.
    """
    degree = len(jet) - 1
    lam = jet[1]
    h = _identity_jet(degree)
    gt = np.zeros(degree + 1, dtype=complex)
    gt[1] = lam
    for k in range(2, through + 1):
        # residual_k depends on the unknowns as  c_k + (lam - lam^k) h_k  and
        # c_k - gt_k  respectively
        ck = (P.p1_compose(jet, h, degree) - P.p1_compose(h, gt, degree))[k]
        if (k - 1) % q == 0:
            gt[k] = ck
        else:
            h[k] = ck / (lam ** k - lam)
    hinv = P.p1_inverse_jet(h, degree)
    return gt, h, hinv


def semiparabolic_multiplicity(g: Germ, fp: FixedPointData,
                               jet_degree: int = 8) -> NormalFormData:
    """Order of the first resonant term of the center-restricted jet of f^q.

    The jet of f^q restricted to the center direction is tangent to the
    identity; its first nonzero term sits at some order m with m - 1 a
    multiple of q, and nu = (m-1)/q is the semi-parabolic multiplicity.
    """
    cls = fp.classification
    if cls is None or not cls.is_parabolic:
        raise PreconditionError("semiparabolic_multiplicity needs a semi-parabolic germ")
    q = cls.q
    if jet_degree < q + 2:
        raise PreconditionError(f"jet_degree must be >= q + 2 = {q + 2}")
    gj = center_restricted_jet(g, jet_degree)
    G = gj.copy()
    for _ in range(q - 1):
        G = P.p1_compose(gj, G, jet_degree)
    if abs(G[1] - 1.0) > 1e-8:
        raise ResonanceViolation(f"lambda^q = {G[1]} is not 1")
    m = None
    for k in range(2, jet_degree + 1):
        if abs(G[k]) > MULTIPLICITY_FLOOR:
            m = k
            break
    if m is None:
        raise JetDegreeInsufficient(
            f"no resonant term up to degree {jet_degree}; raise jet_degree")
    if (m - 1) % q != 0:
        raise ResonanceViolation(f"first term at order {m}, m-1 not divisible by q={q}")
    nu = (m - 1) // q
    kappa = complex(G[m])

    through = min(2 * nu * q + 1, jet_degree)
    gt, h, hinv = partial_normal_form(gj, q, through)
    lam = gj[1]
    trap_coeff = complex(gt[nu * q + 1] / lam)

    c_constant = None
    if jet_degree >= 2 * nu * q + 1:
        # normalize the q-fold composition up to order 2 nu q + 1 and rescale
        Gt, _, _ = partial_normal_form(G, q, 2 * nu * q + 1)
        c2 = Gt[2 * nu * q + 1]
        if abs(kappa) > MULTIPLICITY_FLOOR:
            c_constant = complex(c2 / kappa ** 2)
    return NormalFormData(q, nu, kappa, c_constant, gj, gt, h, hinv, trap_coeff)


# ---------------------------------------------------------------------------
# approximating sequence
# ---------------------------------------------------------------------------

def approximating_sequence(g: Germ, fp: FixedPointData, cfe: ContinuedFractionExpansion,
                           n: int) -> tuple[Germ, FixedPointData]:
    """n-th semi-parabolic approximation of an irrational germ (1-based).

    Only the linear x-coefficient of the first component changes, rescaled by
    lambda_n / lambda, so sup_{|z| <= r} |f_n - f| = |lambda_n - lambda| r
    exactly.  The explicit inverse of the original germ (when present) seeds
    the Newton inverse of the perturbed one, whose inverse is generally not
    polynomial.
    """
    if not (1 <= n <= len(cfe.convergents)):
        raise IndexOutOfRange(f"index {n} outside 1..{len(cfe.convergents)}")
    if fp.classification is not None and not fp.classification.is_irrational_candidate:
        raise PreconditionError("approximating_sequence expects an irrational-candidate germ")
    p, q = cfe.convergents[n - 1]
    lam_n = cmath.exp(2j * math.pi * p / q)
    lam = fp.eigenvalue_neutral
    scale = lam_n / lam
    if g.dim == 1:
        c = g.fwd.c.copy()
        c[1] *= scale
        fwd = PolyMap.one_dim(c)
        new_g = Germ(1, fwd, None, g.domain_radius, inverse_seed=g.inv)
    else:
        c1 = g.fwd.c1.copy()
        c1[1, 0] *= scale
        fwd = PolyMap((c1, g.fwd.c2.copy()))
        new_g = Germ(2, fwd, None, g.domain_radius, inverse_seed=g.inv)
    angle = RotationAngle.from_fraction(p, q)
    new_fp = FixedPointData(lam_n, fp.eigenvalue_dissipative, angle,
                            Classification("semi-parabolic", p, q),
                            e_center=fp.e_center, e_stable=fp.e_stable,
                            location=fp.location)
    return new_g, new_fp


# ---------------------------------------------------------------------------
# constructors for the standard families
# ---------------------------------------------------------------------------

def henon_raw(lam: complex, mu: complex):
    """Quadratic Henon automorphism with a fixed point of eigenvalues
    (lam, mu): f(x, y) = (x^2 + c + b y, x) with b = -lam mu and c solved from
    the trace equation 2 x_f = lam + mu at the fixed point x_f = y_f."""
    if mu == 0:
        raise ConfigError("mu must be nonzero for an automorphism")
    b = -lam * mu
    xf = (lam + mu) / 2
    c = xf - xf * xf - b * xf
    c1 = P.p2_zeros(2, 1)
    c1[0, 0] = c; c1[2, 0] = 1.0; c1[0, 1] = b
    c2 = P.p2_zeros(1, 1)
    c2[1, 0] = 1.0
    fwd = PolyMap((c1, c2))
    # inverse: x = Y, y = (X - Y^2 - c)/b
    i1 = P.p2_zeros(1, 2)
    i1[0, 1] = 1.0
    i2 = P.p2_zeros(2, 3)
    i2[1, 0] = 1.0 / b; i2[0, 2] = -1.0 / b; i2[0, 0] = -c / b
    inv = PolyMap((i1, i2))
    return fwd, inv, (xf, xf)


def henon_germ(angle: RotationAngle, mu: complex,
               domain_radius: float = 0.3) -> tuple[Germ, FixedPointData]:
    lam = cmath.exp(2j * math.pi * angle.value)
    fwd, inv, guess = henon_raw(lam, mu)
    return normalize_fixed_point(fwd, guess, declared_angle=angle,
                                 domain_radius=domain_radius, raw_inverse=inv)


def quadratic1d_germ(angle: RotationAngle,
                     domain_radius: float = 0.45) -> tuple[Germ, FixedPointData]:
    """f(z) = e^{2 pi i alpha} z + z^2, already normalized at the origin."""
    lam = cmath.exp(2j * math.pi * angle.value)
    fwd = PolyMap.one_dim([0.0, lam, 1.0])
    fp = FixedPointData(lam, None, angle, None, location=0j)
    return Germ(1, fwd, None, domain_radius), fp
