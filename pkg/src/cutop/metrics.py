"""Error metrics: global L1 and the near-discontinuity Dis restriction.

Dis is the mean absolute error restricted to windows around the TRUE
discontinuity locations, with the windows totalling `window_frac` of the
domain extent split equally across the fronts of a slice. Reported spreads
are population standard deviations over test samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

DEFAULT_WINDOW_FRAC = 0.10


def l1_error(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean absolute difference over congruent grids (uniform quadrature)."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise UsageError(f"shape mismatch {pred.shape} vs {truth.shape}")
    return float(np.mean(np.abs(pred - truth)))


def dis_window_mask(grid: np.ndarray, fronts_per_slice: np.ndarray,
                    window_frac: float = DEFAULT_WINDOW_FRAC) -> np.ndarray:
    """Boolean mask of the near-front region on every slice.

    Each of the dis_n fronts gets an interval of width
    window_frac * extent / dis_n centered on it; overlaps union.
    """
    if not (0.0 < window_frac < 1.0):
        raise UsageError("window_frac must be in (0, 1)")
    fronts = np.atleast_2d(np.asarray(fronts_per_slice, dtype=float))
    extent = float(grid[-1] - grid[0])
    half = 0.5 * window_frac * extent / fronts.shape[1]
    mask = np.zeros((fronts.shape[0], len(grid)), dtype=bool)
    for j in range(fronts.shape[0]):
        for f in fronts[j]:
            mask[j] |= np.abs(grid - f) <= half
    return mask


def dis_error(pred: np.ndarray, truth: np.ndarray, grid: np.ndarray,
              fronts_per_slice: np.ndarray,
              window_frac: float = DEFAULT_WINDOW_FRAC) -> float:
    """Mean absolute error restricted to the near-front windows.

    For 2D fields, pred/truth have shape (Nt, Nx), grid is the x grid and
    fronts_per_slice is (Nt, dis_n). For traces, pred/truth are (Nt,), grid
    is the t grid and fronts_per_slice is the (dis_n,) transition times.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise UsageError(f"shape mismatch {pred.shape} vs {truth.shape}")
    if pred.ndim == 1:
        pred = pred[None, :]
        truth = truth[None, :]
        fronts_per_slice = np.atleast_2d(fronts_per_slice)
    mask = dis_window_mask(grid, fronts_per_slice, window_frac)
    if not mask.any():
        raise UsageError("no grid point falls inside the discontinuity window")
    return float(np.mean(np.abs(pred - truth)[mask]))


@dataclass
class MetricReport:
    problem: str
    model: str
    resolution: int
    l1_values: np.ndarray
    dis_values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def l1_mean(self) -> float:
        return float(np.mean(self.l1_values))

    @property
    def l1_std(self) -> float:
        return float(np.std(self.l1_values))

    @property
    def dis_mean(self) -> float:
        return float(np.mean(self.dis_values))

    @property
    def dis_std(self) -> float:
        return float(np.std(self.dis_values))


SWEEP_HEADER = ("model", "Nx", "l1_mean", "l1_std", "dis_mean", "dis_std")


def report_rows(reports) -> list:
    return [(r.model, r.resolution, r.l1_mean, r.l1_std, r.dis_mean, r.dis_std)
            for r in reports]
