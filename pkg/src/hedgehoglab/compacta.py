"""Finite approximations of planar compact sets.

A :class:`CompactSetApprox` is an occupancy grid over a centered square chart
window plus a boundary point cloud (centers of filled cells that touch an
empty 8-neighbor or the window edge).  Hausdorff distances between two
approximations are computed on the boundary clouds with a k-d tree and agree
with the naive double loop to rounding; against the underlying true sets they
are exact to within one grid cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import ChartMismatch, PreconditionError

EIGHT = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class CompactSetApprox:
    chart: str
    half_width: float           # window is [-W, W]^2
    occupancy: np.ndarray       # bool [n, n], cell (i, j) covers x-index i, y-index j
    _boundary: np.ndarray | None = field(default=None, repr=False, compare=False)
    _dt: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        object.__setattr__(self, "occupancy", occ)
        if occ.ndim != 2 or occ.shape[0] != occ.shape[1]:
            raise PreconditionError("occupancy must be a square boolean grid")

    # -- geometry ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.occupancy.shape[0]

    @property
    def resolution(self) -> float:
        """Grid spacing h."""
        return 2.0 * self.half_width / self.n

    def cell_centers(self, mask=None) -> np.ndarray:
        idx = np.argwhere(self.occupancy if mask is None else mask)
        return self.cells_to_points(idx)

    def cells_to_points(self, idx) -> np.ndarray:
        h = self.resolution
        return ((idx[:, 0] + 0.5) * h - self.half_width) \
            + 1j * ((idx[:, 1] + 0.5) * h - self.half_width)

    def points_to_cells(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        h = self.resolution
        i = np.floor((pts.real + self.half_width) / h).astype(np.int64)
        j = np.floor((pts.imag + self.half_width) / h).astype(np.int64)
        return np.stack([i, j], axis=-1)

    @property
    def boundary_points(self) -> np.ndarray:
        bnd = self._boundary
        if bnd is None:
            occ = self.occupancy
            interior = ndimage.binary_erosion(occ, structure=EIGHT, border_value=0)
            bnd = self.cell_centers(occ & ~interior)
            object.__setattr__(self, "_boundary", bnd)
        return bnd

    def count(self) -> int:
        return int(self.occupancy.sum())

    def is_empty(self) -> bool:
        return not self.occupancy.any()

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_points(points, chart: str, half_width: float, n: int) -> "CompactSetApprox":
        occ = np.zeros((n, n), dtype=bool)
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size:
            h = 2.0 * half_width / n
            i = np.floor((pts.real + half_width) / h).astype(np.int64)
            j = np.floor((pts.imag + half_width) / h).astype(np.int64)
            ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
            occ[i[ok], j[ok]] = True
        return CompactSetApprox(chart, half_width, occ)

    def replace_occupancy(self, occ) -> "CompactSetApprox":
        return CompactSetApprox(self.chart, self.half_width, occ)

    # -- set operations ------------------------------------------------------

    def union(self, other: "CompactSetApprox") -> "CompactSetApprox":
        _check_compatible(self, other, same_res=True)
        return self.replace_occupancy(self.occupancy | other.occupancy)

    def distance_cells_to(self, pts) -> np.ndarray:
        """Euclidean distance in cell units from each point to the occupied set."""
        if self.is_empty():
            return np.full(np.asarray(pts).shape, np.inf)
        dt = self._dt
        if dt is None:
            dt = ndimage.distance_transform_edt(~self.occupancy)
            object.__setattr__(self, "_dt", dt)
        cells = self.points_to_cells(pts)
        n = self.n
        i = np.clip(cells[..., 0], 0, n - 1)
        j = np.clip(cells[..., 1], 0, n - 1)
        outside = (cells[..., 0] != i) | (cells[..., 1] != j)
        d = dt[i, j]
        return np.where(outside, np.inf, d)


def _check_compatible(a: CompactSetApprox, b: CompactSetApprox, same_res=False):
    if a.chart != b.chart:
        raise ChartMismatch(f"charts differ: {a.chart!r} vs {b.chart!r}")
    ratio = a.resolution / b.resolution
    k = ratio if ratio >= 1 else 1 / ratio
    if abs(k - round(k)) > 1e-9:
        raise ChartMismatch(f"incommensurable resolutions {a.resolution} vs {b.resolution}")
    if same_res and abs(ratio - 1) > 1e-12:
        raise ChartMismatch("operation requires equal resolutions")


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------

def directed_hausdorff(src: np.ndarray, dst: np.ndarray) -> float:
    """max over src of the distance to dst, via a k-d tree on dst."""
    if src.size == 0:
        return 0.0
    if dst.size == 0:
        return float("inf")
    tree = cKDTree(np.column_stack([dst.real, dst.imag]))
    d, _ = tree.query(np.column_stack([src.real, src.imag]), k=1)
    return float(d.max())


def hausdorff_distance(a: CompactSetApprox, b: CompactSetApprox) -> float:
    """Symmetric Hausdorff distance between the boundary clouds."""
    _check_compatible(a, b)
    pa, pb = a.boundary_points, b.boundary_points
    if pa.size == 0 and pb.size == 0:
        return 0.0
    return max(directed_hausdorff(pa, pb), directed_hausdorff(pb, pa))


def hausdorff_distance_points(pa, pb) -> float:
    pa = np.asarray(pa, dtype=complex).ravel()
    pb = np.asarray(pb, dtype=complex).ravel()
    if pa.size == 0 and pb.size == 0:
        return 0.0
    return max(directed_hausdorff(pa, pb), directed_hausdorff(pb, pa))


def naive_hausdorff(pa, pb) -> float:
    """Quadratic double-loop reference used as the oracle in tests."""
    pa = np.asarray(pa, dtype=complex).ravel()
    pb = np.asarray(pb, dtype=complex).ravel()
    d_ab = max(min(abs(p - q) for q in pb) for p in pa)
    d_ba = max(min(abs(p - q) for q in pa) for p in pb)
    return max(d_ab, d_ba)


# ---------------------------------------------------------------------------
# fullness and invariance
# ---------------------------------------------------------------------------

def fill_to_full(H: CompactSetApprox) -> CompactSetApprox:
    """Add the bounded complement components (flood fill from the window edge).

    The result's complement within the window is a single edge-connected
    region, the grid meaning of fullness.  Idempotent.
    """
    occ = H.occupancy
    comp = ~occ
    lab, n = ndimage.label(comp)          # 4-connectivity for the complement
    if n == 0:
        return H
    edge_labels = np.unique(np.concatenate([
        lab[0, :], lab[-1, :], lab[:, 0], lab[:, -1]]))
    edge_labels = edge_labels[edge_labels != 0]
    keep = np.isin(lab, edge_labels)
    return H.replace_occupancy(occ | (comp & ~keep))


def complement_is_connected(H: CompactSetApprox) -> bool:
    _, n = ndimage.label(~H.occupancy)
    return n <= 1


def occupancy_components(occ: np.ndarray):
    lab, n = ndimage.label(occ, structure=EIGHT)
    return lab, n


def is_grid_connected(H: CompactSetApprox) -> bool:
    _, n = occupancy_components(H.occupancy)
    return n <= 1


@dataclass(frozen=True)
class InvarianceReport:
    passed: bool
    worst_offset_cells: float
    checked_points: int
    fraction_beyond_tol: float = 0.0
    excluded_points: int = 0

OUTLIER_FRACTION = 0.005
WORST_FACTOR = 4.0


def check_complete_invariance(forward, backward, H: CompactSetApprox,
                              tol_cells: float = 1.0,
                              exclude_mask=None) -> InvarianceReport:
    """Map the boundary cloud by the chart dynamics both ways and measure the
    distances back to the occupied set, in cell units.

    The occupied set itself is only one-cell accurate, so mapping its
    boundary compounds that error with the map's stretch; the check therefore
    passes when all but an ``OUTLIER_FRACTION`` sliver of image points lie
    within ``tol_cells`` and the worst offset stays below ``WORST_FACTOR``
    times it.  ``exclude_mask`` marks cells whose classification was
    inconclusive; images landing there are excluded and counted.
    ``forward``/``backward`` take and return complex chart coordinates;
    non-finite returns (an inverse that fell off its branch) count as misses.
    """
    pts = H.boundary_points
    if pts.size == 0:
        return InvarianceReport(True, 0.0, 0)
    worst = 0.0
    over = 0
    total = 0
    excluded = 0
    for mapper in (forward, backward):
        img = np.asarray(mapper(pts), dtype=complex)
        good = np.isfinite(img.real) & np.isfinite(img.imag)
        if np.any(~good):
            worst = float("inf")
            over += int((~good).sum())
        img = img[good]
        if exclude_mask is not None and img.size:
            cells = H.points_to_cells(img)
            n = H.n
            i = np.clip(cells[:, 0], 0, n - 1)
            j = np.clip(cells[:, 1], 0, n - 1)
            hit = exclude_mask[i, j]
            excluded += int(hit.sum())
            img = img[~hit]
        d = H.distance_cells_to(img)
        if d.size:
            worst = max(worst, float(d.max()))
            over += int((d > tol_cells).sum())
            total += int(d.size)
    frac = over / total if total else 0.0
    passed = frac <= OUTLIER_FRACTION and worst <= WORST_FACTOR * tol_cells
    return InvarianceReport(passed, worst, int(2 * pts.size), frac, excluded)
