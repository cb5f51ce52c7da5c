"""The learned components and their prediction-time composition.

A DeepONetModel in "lifted" mode takes an augmented query (coords, label);
"baseline" mode takes the plain coordinate. The CuttingNet maps sensor
readings (plus a time coordinate for spatio-temporal problems) to sorted
front locations. cut_predict composes both into a genuinely piecewise
solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UsageError
from .lifting import ENCODE_SCALE, region_labels
from .nets import MlpParams, Standardizer, mlp_forward_batch


@dataclass
class DeepONetModel:
    branch: MlpParams
    trunk: MlpParams
    mode: str  # "lifted" | "baseline"
    branch_norm: Standardizer
    trunk_norm: Standardizer
    target_norm: Standardizer

    @property
    def latent_width(self) -> int:
        return self.branch.layer_sizes[-1]


@dataclass
class CuttingNet:
    net: MlpParams
    with_time: bool
    domain: tuple  # (lo, hi) the outputs are clamped to
    in_norm: Standardizer
    out_norm: Standardizer

    @property
    def dis_n(self) -> int:
        return self.net.layer_sizes[-1]


@dataclass
class PiecewiseSolution:
    x: np.ndarray | None
    t: np.ndarray
    values: np.ndarray
    region_index: np.ndarray
    fronts: np.ndarray  # (Nt, dis_n) for 2D, (dis_n,) for traces


def deeponet_eval_batch(model: DeepONetModel, sensors: np.ndarray,
                        queries: np.ndarray) -> np.ndarray:
    """Branch-trunk dot product for n (sensor vector, query) rows."""
    sensors = np.atleast_2d(np.asarray(sensors, dtype=float))
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if sensors.shape[0] == 1 and queries.shape[0] > 1:
        sensors = np.broadcast_to(sensors, (queries.shape[0], sensors.shape[1]))
    if sensors.shape[0] != queries.shape[0]:
        raise ShapeError("sensor and query row counts disagree")
    if queries.shape[1] != model.trunk.layer_sizes[0]:
        raise ShapeError(
            f"query width {queries.shape[1]} does not match trunk input "
            f"{model.trunk.layer_sizes[0]} (mode={model.mode})"
        )
    b = mlp_forward_batch(model.branch, model.branch_norm.apply(sensors))
    t = mlp_forward_batch(model.trunk, model.trunk_norm.apply(queries))
    raw = np.sum(b * t, axis=1)
    return model.target_norm.invert(raw[:, None])[:, 0]


def deeponet_eval(model: DeepONetModel, sensors, query) -> float:
    return float(deeponet_eval_batch(model, np.asarray(sensors, dtype=float)[None, :],
                                     np.asarray(query, dtype=float)[None, :])[0])


def cutnet_eval(cnet: CuttingNet, sensors, t: float | None = None) -> np.ndarray:
    """Predicted front locations: de-standardized, clamped, sorted ascending."""
    sensors = np.asarray(sensors, dtype=float)
    if cnet.with_time:
        if t is None:
            raise UsageError("this Cutting Net conditions on a time coordinate")
        inp = np.concatenate([sensors, [float(t)]])
    else:
        if t is not None:
            raise UsageError("this Cutting Net takes sensors only")
        inp = sensors
    if inp.shape[0] != cnet.net.layer_sizes[0]:
        raise ShapeError(
            f"input width {inp.shape[0]} does not match Cutting Net input "
            f"{cnet.net.layer_sizes[0]}"
        )
    raw = mlp_forward_batch(cnet.net, cnet.in_norm.apply(inp[None, :]))[0]
    out = cnet.out_norm.invert(raw)
    return np.sort(np.clip(out, cnet.domain[0], cnet.domain[1]))


def compose_piecewise(front_fn, value_fn, x: np.ndarray | None,
                      t: np.ndarray) -> PiecewiseSolution:
    """Compose a front provider with a lifted value provider on a grid.

    front_fn(t) -> sorted locations for one slice (2D) or front_fn() -> the
    transition times (1D). value_fn(coords, labels) -> values. Points exactly
    on a front take the right region's value.
    """
    if x is not None:
        nt, nx = len(t), len(x)
        fronts = np.stack([np.asarray(front_fn(tj), dtype=float) for tj in t])
        labels = np.empty((nt, nx), dtype=np.int64)
        for j in range(nt):
            labels[j] = region_labels(x, fronts[j])
        coords = np.column_stack([
            np.broadcast_to(x, (nt, nx)).ravel(),
            np.broadcast_to(t[:, None], (nt, nx)).ravel(),
        ])
        values = value_fn(coords, labels.ravel()).reshape(nt, nx)
        return PiecewiseSolution(x, t, values, labels, fronts)
    fronts = np.asarray(front_fn(), dtype=float)
    labels = region_labels(t, fronts)
    values = value_fn(t[:, None], labels)
    return PiecewiseSolution(None, t, values, labels, fronts)


def cut_predict(model: DeepONetModel, cnet: CuttingNet, sensors,
                x: np.ndarray | None, t: np.ndarray) -> PiecewiseSolution:
    """Evaluate the lifted operator at Cutting-Net-predicted coordinates."""
    if model.mode != "lifted":
        raise UsageError("cut_predict needs a lifted-mode model")
    sensors = np.asarray(sensors, dtype=float)

    if cnet.with_time:
        def front_fn(tj):
            return cutnet_eval(cnet, sensors, tj)
    else:
        def front_fn():
            return cutnet_eval(cnet, sensors)

    def value_fn(coords, labels):
        queries = np.column_stack([coords, labels * ENCODE_SCALE])
        return deeponet_eval_batch(model, sensors[None, :], queries)

    return compose_piecewise(front_fn, value_fn, x, t)


def baseline_predict(model: DeepONetModel, sensors, x: np.ndarray | None,
                     t: np.ndarray) -> np.ndarray:
    """Plain DeepONet evaluation over a grid (no labels, no fronts)."""
    if model.mode != "baseline":
        raise UsageError("baseline_predict needs a baseline-mode model")
    sensors = np.asarray(sensors, dtype=float)
    if x is not None:
        nt, nx = len(t), len(x)
        coords = np.column_stack([
            np.broadcast_to(x, (nt, nx)).ravel(),
            np.broadcast_to(t[:, None], (nt, nx)).ravel(),
        ])
        return deeponet_eval_batch(model, sensors[None, :], coords).reshape(nt, nx)
    return deeponet_eval_batch(model, sensors[None, :], t[:, None])
