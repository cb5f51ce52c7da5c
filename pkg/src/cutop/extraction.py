"""Locate discontinuities and sharp transitions in gridded solution data.

Jumps in (x, t) fields are found per time slice as peaks of the discrete
x-derivative; sharp transitions in 1D traces are the window around the
maximum-slope point. Cells smeared by a numerical solver can be masked out
so the operator never trains on artificial transition values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ExtractionError, NoTransitionError
from .problems import SolutionField

CLUSTER_GAP = 2  # interfaces this many cells apart merge into one cluster
DEFAULT_REL_THRESHOLD = 0.5
DEFAULT_SLOPE_FLOOR = 1.0  # mV/ms
DEFAULT_W_STABLE = 5


@dataclass
class DiscontinuitySet:
    """Per-sample discontinuity geometry.

    kind "jump": locations has shape (Nt, dis_n), sorted per slice, with
    jump_gaps the matching |left - right| magnitudes. kind
    "sharp_transition": locations is the pair [t_a, t_b].
    """

    kind: str
    locations: np.ndarray
    jump_gaps: np.ndarray | None = None

    @property
    def dis_n(self) -> int:
        return self.locations.shape[-1]


@dataclass
class SmearMask:
    """Boolean grid congruent with a field; True = drop from stage-2 training."""

    mask: np.ndarray


def _slice_clusters(u: np.ndarray, x: np.ndarray, rel_threshold: float):
    """Candidate jump clusters of one slice: (centroid, integrated gap) pairs."""
    dx = x[1] - x[0]
    du = np.abs(np.diff(u))
    peak = du.max()
    if peak <= 0.0:
        return []
    idx = np.flatnonzero(du >= rel_threshold * peak)
    interfaces = 0.5 * (x[:-1] + x[1:])
    clusters = []
    start = prev = idx[0]
    for i in list(idx[1:]) + [None]:
        if i is not None and i - prev <= CLUSTER_GAP:
            prev = i
            continue
        members = np.arange(start, prev + 1)
        w = du[members]
        centroid = float(np.sum(interfaces[members] * w) / np.sum(w))
        gap = float(np.abs(u[prev + 1] - u[start]))
        clusters.append((centroid, float(np.sum(w)), gap))
        if i is not None:
            start = prev = i
    del dx
    return clusters


def extract_jumps(field: SolutionField, dis_n: int,
                  rel_threshold: float = DEFAULT_REL_THRESHOLD) -> DiscontinuitySet:
    """Derivative-peak extraction on every time slice of a 2D field."""
    if field.x is None:
        raise ConfigError("extract_jumps needs a 2D (x, t) field")
    if dis_n < 1:
        raise ConfigError("dis_n must be >= 1")
    if not (0.0 < rel_threshold < 1.0):
        raise ConfigError("rel_threshold must be in (0, 1)")
    nt = len(field.t)
    locations = np.empty((nt, dis_n))
    gaps = np.empty((nt, dis_n))
    for j in range(nt):
        clusters = _slice_clusters(field.values[j], field.x, rel_threshold)
        if len(clusters) < dis_n:
            raise ExtractionError(
                f"slice {j} (t={field.t[j]:.4g}): found {len(clusters)} "
                f"clusters, expected {dis_n}"
            )
        top = sorted(clusters, key=lambda c: -c[1])[:dis_n]
        top.sort(key=lambda c: c[0])
        locations[j] = [c[0] for c in top]
        gaps[j] = [c[2] for c in top]
    return DiscontinuitySet("jump", locations, gaps)


def extract_sharp_transition(trace: SolutionField,
                             slope_floor: float = DEFAULT_SLOPE_FLOOR,
                             w_stable: int = DEFAULT_W_STABLE) -> DiscontinuitySet:
    """Window [t_a, t_b] around the maximum-derivative point of a 1D trace.

    From the max-|slope| sample the window extends in both directions until
    the slope stays below `slope_floor` for `w_stable` consecutive samples;
    the boundary is the last still-steep sample on each side.
    """
    if trace.x is not None:
        raise ConfigError("extract_sharp_transition needs a 1D time trace")
    if slope_floor <= 0:
        raise ConfigError("slope_floor must be positive")
    t, v = trace.t, trace.values
    slope = np.abs(np.gradient(v, t))
    k = int(np.argmax(slope))
    if slope[k] < slope_floor:
        raise NoTransitionError(
            f"max slope {slope[k]:.3g} below floor {slope_floor:.3g}"
        )
    calm = slope < slope_floor

    def walk(direction: int) -> int:
        i = k
        run = 0
        last_steep = k
        while 0 <= i + direction < len(t):
            i += direction
            if calm[i]:
                run += 1
                if run >= w_stable:
                    return last_steep
            else:
                run = 0
                last_steep = i
        return last_steep

    ia, ib = walk(-1), walk(+1)
    return DiscontinuitySet("sharp_transition", np.array([t[ia], t[ib]]))


def filter_smeared(field: SolutionField, disc: DiscontinuitySet,
                   band_cells: int) -> SmearMask:
    """Mask grid points within band_cells cells of an extracted jump.

    Sharp-transition windows are kept: the steep interior is its own region,
    not a solver artifact.
    """
    if band_cells < 0:
        raise ConfigError("band_cells must be >= 0")
    mask = np.zeros_like(field.values, dtype=bool)
    if disc.kind != "jump" or band_cells == 0:
        return SmearMask(mask)
    band = band_cells * field.dx
    for j in range(len(field.t)):
        for loc in disc.locations[j]:
            mask[j] |= np.abs(field.x - loc) <= band
    return SmearMask(mask)
