"""Fixed point detection and index certification on the torus.

A point is fixed for the torus map of a word exactly when the canonical
lift moves it by a deck vector, so every residual here is the distance
from the lift displacement to the nearest lattice point.  Zero sets are
located by a grid scan followed by damped Newton refinement; curves of
fixed points (the interesting examples fix whole circles) are detected
as connected runs of near-zero grid cells and reported as sampled
chains rather than collapsed to spurious isolated points.

Nothing here is a rigorous existence proof.  Every report carries the
grid resolution and tolerance it was computed at.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import AmbiguousWinding, DefectExceeded, NonIsolated
from .maps import (LiftedWord, Word, _as_lift, apply_lift_batch,
                   displacement_field_batch, orbit_displacement_means,
                   reduce_point)
from .measures import EmpiricalMeasure, invariance_defect, rotation_vector

__all__ = [
    "FixedChain",
    "FixedPointEntry",
    "FixedPointReport",
    "FranksReport",
    "common_fixed_points",
    "find_fixed_points",
    "fixed_point_index",
    "franks_certificate",
]

_FD_STEP = 1e-6
_NEWTON_MAX = 50
_CHAIN_MIN_CELLS = 8
_VANISH = 1e-12
# an angular step this close to pi means consecutive field directions
# nearly reversed and the wrap direction is a coin flip
_MAX_TURN = 2.7


@dataclass(frozen=True)
class FixedPointEntry:
    point: Tuple[float, float]
    residual: float
    index: Optional[int] = None


@dataclass(frozen=True)
class FixedChain:
    """Sampled curve of fixed points; always non-isolated by construction."""

    points: Tuple[Tuple[float, float], ...]
    max_residual: float

    @property
    def cell_count(self) -> int:
        return len(self.points)


@dataclass
class FixedPointReport:
    points: List[FixedPointEntry]
    chains: List[FixedChain]
    all_points_fixed: bool
    grid_n: int
    tol: float
    newton_steps: int

    def is_empty(self) -> bool:
        return not (self.points or self.chains or self.all_points_fixed)

    def to_json_dict(self) -> dict:
        return {
            "grid_n": self.grid_n,
            "tol": self.tol,
            "newton_steps": self.newton_steps,
            "all_points_fixed": self.all_points_fixed,
            "points": [
                {"x": repr(p.point[0]), "y": repr(p.point[1]),
                 "residual": repr(p.residual),
                 "index": p.index}
                for p in self.points
            ],
            "chains": [
                {"cell_count": c.cell_count,
                 "max_residual": repr(c.max_residual),
                 "points": [[repr(x), repr(y)] for x, y in c.points]}
                for c in self.chains
            ],
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def chains_to_csv(self, path) -> None:
        """One polyline per chain, rows (chain, x, y)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["chain", "x", "y"])
            for k, chain in enumerate(self.chains):
                for x, y in chain.points:
                    w.writerow([k, repr(x), repr(y)])


def _lift_list(ws) -> List[LiftedWord]:
    if isinstance(ws, (Word, LiftedWord)):
        ws = [ws]
    lifts = [_as_lift(w) for w in ws]
    if not lifts:
        raise ValueError("need at least one word")
    return lifts


def _residual_fields(lifts: Sequence[LiftedWord], pts: np.ndarray) -> np.ndarray:
    """Stacked per-word lattice residuals, shape (m, n, 2)."""
    out = np.empty((len(lifts), len(pts), 2))
    for i, lw in enumerate(lifts):
        d = apply_lift_batch(lw, pts) - pts
        out[i] = d - np.round(d)
    return out


def _combined_norm(lifts, pts: np.ndarray) -> np.ndarray:
    res = _residual_fields(lifts, pts)
    return np.sqrt((res * res).sum(axis=2)).max(axis=0)


def _flat_residual(lifts, p: np.ndarray) -> np.ndarray:
    return _residual_fields(lifts, p[None, :]).reshape(-1)


def _fd_jacobian(lifts, p: np.ndarray) -> np.ndarray:
    """Central differences, step 1e-6; rounding is locally constant so the
    raw lift displacement has the same Jacobian as the lattice residual."""
    h = _FD_STEP
    probes = np.array([[p[0] + h, p[1]], [p[0] - h, p[1]],
                       [p[0], p[1] + h], [p[0], p[1] - h]])
    rows = []
    for lw in lifts:
        d = apply_lift_batch(lw, probes) - probes
        jx = (d[0] - d[1]) / (2.0 * h)
        jy = (d[2] - d[3]) / (2.0 * h)
        rows.append(np.stack([jx, jy], axis=1))
    return np.vstack(rows)


def _refine(lifts, seeds: np.ndarray, tol: float) -> List[Tuple[Tuple[float, float], float]]:
    """Damped Newton on the stacked residual system from each seed.

    Returns reduced points with their worst per-word residual, keeping
    only seeds that converged below tol.
    """
    kept = []
    for p0 in seeds:
        p = np.array(p0, dtype=float)
        f = _flat_residual(lifts, p)
        best = math.sqrt(float(f @ f))
        for _ in range(_NEWTON_MAX):
            if best < 1e-14:
                break
            jac = _fd_jacobian(lifts, p)
            step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
            if not np.isfinite(step).all():
                break
            cand = p + step
            fc = _flat_residual(lifts, cand)
            rc = math.sqrt(float(fc @ fc))
            halved = 0
            while rc >= best and halved < 30:
                step = step * 0.5
                cand = p + step
                fc = _flat_residual(lifts, cand)
                rc = math.sqrt(float(fc @ fc))
                halved += 1
            if rc >= best:
                break
            p, f, best = cand, fc, rc
        per_word = _residual_fields(lifts, p[None, :])[:, 0, :]
        worst = float(np.sqrt((per_word * per_word).sum(axis=1)).max())
        if worst < tol:
            kept.append((reduce_point((float(p[0]), float(p[1]))), worst))
    return kept


def _torus_dist(a, b) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return math.hypot(dx, dy)


def _dedup(found, merge_radius: float) -> List[Tuple[Tuple[float, float], float]]:
    # best residual first so the representative of a cluster is the
    # most converged point; ties broken by position for determinism
    ordered = sorted(found, key=lambda t: (t[1], t[0]))
    kept: List[Tuple[Tuple[float, float], float]] = []
    for pt, res in ordered:
        if all(_torus_dist(pt, k[0]) > merge_radius for k in kept):
            kept.append((pt, res))
    kept.sort(key=lambda t: t[0])
    return kept


def _grid_components(mask: np.ndarray) -> List[List[Tuple[int, int]]]:
    """8-connected components of a boolean torus grid, deterministic order."""
    n = mask.shape[0]
    seen = np.zeros_like(mask)
    comps = []
    for i in range(n):
        for j in range(n):
            if not mask[i, j] or seen[i, j]:
                continue
            stack = [(i, j)]
            seen[i, j] = True
            cells = []
            while stack:
                a, b = stack.pop()
                cells.append((a, b))
                for da in (-1, 0, 1):
                    for db in (-1, 0, 1):
                        if da == 0 and db == 0:
                            continue
                        na, nb = (a + da) % n, (b + db) % n
                        if mask[na, nb] and not seen[na, nb]:
                            seen[na, nb] = True
                            stack.append((na, nb))
            cells.sort()
            comps.append(cells)
    comps.sort(key=lambda c: c[0])
    return comps


def _local_min_seeds(norms: np.ndarray, exclude: np.ndarray) -> List[Tuple[int, int]]:
    """Cells no worse than all eight torus neighbours and strictly better
    than at least one; flat plateaus (constant displacement) yield none."""
    n = norms.shape[0]
    le_all = np.ones_like(norms, dtype=bool)
    lt_any = np.zeros_like(norms, dtype=bool)
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            if da == 0 and db == 0:
                continue
            nb = np.roll(np.roll(norms, -da, axis=0), -db, axis=1)
            le_all &= norms <= nb
            lt_any |= norms < nb
    mask = le_all & lt_any & ~exclude
    return [(int(i), int(j)) for i, j in np.argwhere(mask)]


def _scan(lifts, grid_n: int, tol: float) -> FixedPointReport:
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    axis = np.arange(grid_n) / grid_n
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    norms = _combined_norm(lifts, pts).reshape(grid_n, grid_n)

    report = FixedPointReport(points=[], chains=[], all_points_fixed=False,
                              grid_n=grid_n, tol=tol, newton_steps=_NEWTON_MAX)
    if bool((norms < tol).all()):
        report.all_points_fixed = True
        return report

    below = norms < tol
    consumed = np.zeros_like(below)
    seed_cells: List[Tuple[int, int]] = []
    for comp in _grid_components(below):
        if len(comp) >= _CHAIN_MIN_CELLS:
            chain_pts = tuple((float(axis[i]), float(axis[j])) for i, j in comp)
            worst = float(max(norms[i, j] for i, j in comp))
            report.chains.append(FixedChain(points=chain_pts, max_residual=worst))
            for i, j in comp:
                consumed[i, j] = True
        else:
            best = min(comp, key=lambda c: (norms[c[0], c[1]], c))
            seed_cells.append(best)
            for i, j in comp:
                consumed[i, j] = True

    seed_cells.extend(_local_min_seeds(norms, consumed))
    seeds = np.array([(axis[i], axis[j]) for i, j in seed_cells], dtype=float)
    if len(seeds):
        found = _refine(lifts, seeds, tol)
        # keep chain cells out of the isolated list: a Newton run started
        # next to a fixed curve lands on the curve, not on a new point
        cell = 1.0 / grid_n
        clear = []
        for pt, res in found:
            near_chain = any(
                min(_torus_dist(pt, q) for q in c.points) < 1.5 * cell
                for c in report.chains)
            if not near_chain:
                clear.append((pt, res))
        for pt, res in _dedup(clear, 10.0 * tol):
            report.points.append(FixedPointEntry(point=pt, residual=res))
    return report


def find_fixed_points(w: Word, grid_n: int = 64, tol: float = 1e-9) -> FixedPointReport:
    """Fixed points of the torus map of w at the given grid resolution.

    Connected runs of at least eight near-zero cells come back as
    sampled chains (curves of fixed points); everything else is Newton
    refined and deduplicated within 10*tol.
    """
    lw = _as_lift(w)
    # force the isotopy check up front with a well-defined error
    displacement_field_batch(lw, np.zeros((1, 2)))
    return _scan([lw], grid_n, tol)


def common_fixed_points(ws, grid_n: int = 64, tol: float = 1e-9) -> FixedPointReport:
    """Points fixed simultaneously by every word in ws.

    Words with non-identity linear part are allowed here: their torus
    fixed points are still the zeros of the lattice residual, and the
    reflection generator of the key examples is exactly such a word.
    """
    return _scan(_lift_list(ws), grid_n, tol)


def fixed_point_index(w: Word, p, radius: float = 0.05, samples: int = 256) -> int:
    """Winding number of the displacement field along a circle around p.

    The total angular increment must land within 0.1 of a full multiple
    of 2*pi, and no single increment may approach a half turn.
    """
    if samples < 8:
        raise ValueError("samples must be at least 8")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    lw = _as_lift(w)
    p = (float(p[0]), float(p[1]))
    at_p = displacement_field_batch(lw, np.array([p]))[0]
    deck = np.round(at_p)

    theta = 2.0 * math.pi * np.arange(samples) / samples
    circle = np.column_stack([p[0] + radius * np.cos(theta),
                              p[1] + radius * np.sin(theta)])
    field = displacement_field_batch(lw, circle) - deck
    norms = np.hypot(field[:, 0], field[:, 1])
    if float(norms.min()) < _VANISH:
        raise NonIsolated(
            "displacement vanishes on the sample circle (radius %g)" % radius)

    ang = np.arctan2(field[:, 1], field[:, 0])
    inc = np.diff(np.concatenate([ang, ang[:1]]))
    inc = (inc + math.pi) % (2.0 * math.pi) - math.pi
    if float(np.abs(inc).max()) > _MAX_TURN:
        raise AmbiguousWinding(
            "field direction turns almost half a revolution between "
            "samples; increase samples")
    total = float(inc.sum())
    k = round(total / (2.0 * math.pi))
    if abs(total - 2.0 * math.pi * k) >= 0.1:
        raise AmbiguousWinding(
            "total increment %.6f is not close to a multiple of 2*pi" % total)
    return int(k)


@dataclass
class FranksReport:
    rho: Tuple[float, float]
    nearest_lattice: Tuple[int, int]
    dist_to_lattice: float
    hypothesis_met: bool
    birkhoff_spread: float
    fixed_points: FixedPointReport
    support_distance: Optional[float]
    certificate: str
    note: str
    defect: float
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "rho": [repr(self.rho[0]), repr(self.rho[1])],
            "nearest_lattice": list(self.nearest_lattice),
            "dist_to_lattice": repr(self.dist_to_lattice),
            "hypothesis_met": self.hypothesis_met,
            "birkhoff_spread": repr(self.birkhoff_spread),
            "fixed_points": self.fixed_points.to_json_dict(),
            "support_distance": None if self.support_distance is None
            else repr(self.support_distance),
            "certificate": self.certificate,
            "note": self.note,
            "defect": repr(self.defect),
            "tol": self.tol,
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def franks_certificate(w: Word, mu: EmpiricalMeasure, tol: float = 1e-6,
                       grid_n: int = 64, orbit_n: int = 512) -> FranksReport:
    """Empirical check of the zero-rotation-vector fixed point criterion.

    The certificate can only ever say "consistent": a nonzero rotation
    vector makes the hypothesis vacuous, and fixed points found in that
    case contradict nothing, because the implication runs one way.
    """
    lw = _as_lift(w)
    defect = invariance_defect(w, mu)
    if not defect < tol:
        raise DefectExceeded(
            "measure is not invariant enough: defect %.3e, tol %.3e"
            % (defect, tol))
    rho = rotation_vector(mu, lw)
    nearest = (int(round(rho[0])), int(round(rho[1])))
    dist = math.hypot(rho[0] - nearest[0], rho[1] - nearest[1])
    hypothesis_met = dist < tol

    # ergodicity proxy: time averages from distinct atoms should agree.
    # Sample evenly across the atom list, not its head: a mixture lists one
    # component's atoms before the other's, and the head misses the second.
    pick = np.unique(np.linspace(0, len(mu.points) - 1,
                                 min(len(mu.points), 8)).round().astype(int))
    seeds = mu.points[pick]
    means = orbit_displacement_means(lw, seeds, orbit_n)
    spread = 0.0
    for i in range(len(means)):
        for j in range(i + 1, len(means)):
            spread = max(spread, float(np.hypot(*(means[i] - means[j]))))

    fp = _scan([lw], grid_n, tol if tol > 1e-12 else 1e-9)
    found = not fp.is_empty()

    samples: List[Tuple[float, float]] = [e.point for e in fp.points]
    for c in fp.chains:
        samples.extend(c.points)
    support_distance: Optional[float] = None
    if fp.all_points_fixed:
        support_distance = 0.0
    elif samples:
        support_distance = min(
            _torus_dist(s, (float(a[0]), float(a[1])))
            for s in samples for a in mu.points)

    if hypothesis_met and found:
        certificate = "consistent with Franks"
        note = "zero rotation vector and a nonempty fixed set at this resolution"
    elif hypothesis_met:
        certificate = "INCONSISTENT at this resolution"
        note = ("zero rotation vector but no fixed point found at grid %d; "
                "refine before concluding anything" % grid_n)
    else:
        certificate = "hypothesis not met"
        if found:
            note = ("rotation vector is nonzero yet fixed points exist; "
                    "no contradiction, the criterion is one-directional")
        else:
            note = "rotation vector is nonzero and no fixed points were found"

    return FranksReport(
        rho=(float(rho[0]), float(rho[1])),
        nearest_lattice=nearest,
        dist_to_lattice=dist,
        hypothesis_met=hypothesis_met,
        birkhoff_spread=spread,
        fixed_points=fp,
        support_distance=support_distance,
        certificate=certificate,
        note=note,
        defect=defect,
        tol=tol,
    )
