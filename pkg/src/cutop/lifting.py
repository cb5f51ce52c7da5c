"""Lift solution data into label-augmented coordinates.

Each grid point gets an integer region label counting how many discontinuity
locations lie at or below its coordinate (half-open convention: a point
exactly on a front belongs to the region on its right). Targets are copied
unchanged; lifting only changes coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .extraction import DiscontinuitySet, SmearMask
from .problems import SolutionField

# labels are encoded as c_j = j * ENCODE_SCALE before trunk standardization
ENCODE_SCALE = 1.0


def region_label(coord: float, slice_locations) -> int:
    """Region index of a coordinate w.r.t. sorted front locations."""
    return int(np.searchsorted(np.asarray(slice_locations), coord, side="right"))


def region_labels(coords: np.ndarray, slice_locations) -> np.ndarray:
    return np.searchsorted(np.asarray(slice_locations), coords, side="right")


@dataclass
class LiftedSample:
    sensors: np.ndarray   # (m,)
    coords: np.ndarray    # (n, d) -- (x, t) or (t,)
    labels: np.ndarray    # (n,) integer region indices
    targets: np.ndarray   # (n,)


@dataclass
class LiftedDataset:
    samples: list
    region_count: int
    coord_dim: int

    @property
    def n_samples(self) -> int:
        return len(self.samples)


@dataclass
class DiscSample:
    sensors: np.ndarray
    times: np.ndarray | None      # (Nt,) for 2D problems, None for traces
    locations: np.ndarray         # (Nt, dis_n) or (dis_n,)


@dataclass
class DiscDataset:
    samples: list
    dis_n: int
    with_time: bool
    domain: tuple  # (lo, hi) of the coordinate the locations live in


def build_lifted_dataset(fields, discs, masks=None) -> LiftedDataset:
    """Emit one lifted point per unmasked grid point of every sample."""
    if len(fields) != len(discs):
        raise UsageError("fields and discontinuity sets must pair up")
    if masks is not None and len(masks) != len(fields):
        raise UsageError("masks must pair with fields")
    samples = []
    dis_n = discs[0].dis_n
    for i, (fld, disc) in enumerate(zip(fields, discs)):
        keep = None if masks is None else ~masks[i].mask
        if fld.x is not None:
            nt, nx = fld.values.shape
            labels = np.empty((nt, nx), dtype=np.int64)
            for j in range(nt):
                labels[j] = region_labels(fld.x, disc.locations[j])
            xx = np.broadcast_to(fld.x, (nt, nx))
            tt = np.broadcast_to(fld.t[:, None], (nt, nx))
            if keep is None:
                keep = np.ones((nt, nx), dtype=bool)
            elif keep.shape != (nt, nx):
                raise UsageError("mask shape does not match field")
            coords = np.column_stack([xx[keep], tt[keep]])
            samples.append(LiftedSample(fld.sensors, coords,
                                        labels[keep], fld.values[keep]))
        else:
            labels = region_labels(fld.t, disc.locations)
            if keep is None:
                keep = np.ones(len(fld.t), dtype=bool)
            samples.append(LiftedSample(fld.sensors, fld.t[keep, None],
                                        labels[keep], fld.values[keep]))
    coord_dim = samples[0].coords.shape[1]
    return LiftedDataset(samples, region_count=dis_n + 1, coord_dim=coord_dim)


def build_disc_dataset(fields, discs) -> DiscDataset:
    """Pair each sample's sensor vector with its front locations."""
    if len(fields) != len(discs):
        raise UsageError("fields and discontinuity sets must pair up")
    samples = []
    with_time = fields[0].x is not None
    for fld, disc in zip(fields, discs):
        if with_time:
            samples.append(DiscSample(fld.sensors, fld.t, disc.locations))
        else:
            samples.append(DiscSample(fld.sensors, None, disc.locations))
    if with_time:
        domain = (float(fields[0].x[0]), float(fields[0].x[-1]))
    else:
        domain = (float(fields[0].t[0]), float(fields[0].t[-1]))
    return DiscDataset(samples, discs[0].dis_n, with_time, domain)
