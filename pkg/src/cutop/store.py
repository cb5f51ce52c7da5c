"""Dataset and model checkpoint persistence on top of the array store."""

from __future__ import annotations

import numpy as np

from .arraystore import load_arrays, save_arrays
from .errors import CorruptionError
from .nets import MlpParams, Standardizer
from .operators import CuttingNet, DeepONetModel
from .problems import AdvectionIC, Dataset, RiemannIC, SolutionField, StimulusParams

_IC_FIELDS = {
    "advection": ("h", "w", "s_mid"),
    "burgers_exact": ("u_left", "x_d"),
    "burgers_godunov": ("u_left", "x_d"),
    "parsimonious": ("a_stim", "t_stim", "d_stim"),
}


def _ic_to_row(problem: str, ic) -> list:
    return [getattr(ic, f) for f in _IC_FIELDS[problem]]


def _ic_from_row(problem: str, row):
    vals = dict(zip(_IC_FIELDS[problem], (float(v) for v in row)))
    if problem == "advection":
        return AdvectionIC(**vals)
    if problem.startswith("burgers"):
        return RiemannIC(**vals)
    return StimulusParams(**vals)


def save_dataset(ds: Dataset, manifest_path: str):
    arrays = {
        "t": ds.fields[0].t,
        "sensors": np.stack([f.sensors for f in ds.fields]),
        "values": np.stack([f.values for f in ds.fields]),
        "ic_params": np.array([_ic_to_row(ds.problem, f.ic) for f in ds.fields]),
    }
    if ds.fields[0].x is not None:
        arrays["x"] = ds.fields[0].x
    for name, idx in ds.splits.items():
        arrays[f"split_{name}"] = np.asarray(idx, dtype=float)
    meta = {
        "kind": "dataset",
        "problem": ds.problem,
        "provenance": ds.fields[0].provenance,
        "seed": ds.seed,
        "m": ds.m,
        "n_samples": len(ds.fields),
        "ic_fields": list(_IC_FIELDS[ds.problem]),
    }
    save_arrays(manifest_path, arrays, meta)


def load_dataset(manifest_path: str) -> Dataset:
    arrays, meta = load_arrays(manifest_path)
    if meta.get("kind") != "dataset":
        raise CorruptionError("manifest does not describe a dataset")
    problem = meta["problem"]
    x = arrays.get("x")
    t = arrays["t"]
    fields = []
    for i in range(int(meta["n_samples"])):
        ic = _ic_from_row(problem, arrays["ic_params"][i])
        fields.append(SolutionField(x, t, arrays["values"][i],
                                    arrays["sensors"][i], meta["provenance"], ic))
    splits = {name[len("split_"):]: arrays[name].astype(int)
              for name in arrays if name.startswith("split_")}
    return Dataset(problem, fields, splits, int(meta["seed"]), int(meta["m"]))


def save_lifted(lifted, manifest_path: str):
    from .lifting import LiftedDataset  # noqa: F401  (documented return type)

    ptr = np.cumsum([0] + [len(s.targets) for s in lifted.samples])
    arrays = {
        "sensors": np.stack([s.sensors for s in lifted.samples]),
        "coords": np.concatenate([s.coords for s in lifted.samples]),
        "labels": np.concatenate([s.labels for s in lifted.samples]).astype(float),
        "targets": np.concatenate([s.targets for s in lifted.samples]),
        "ptr": ptr.astype(float),
    }
    meta = {"kind": "lifted", "region_count": lifted.region_count,
            "coord_dim": lifted.coord_dim}
    save_arrays(manifest_path, arrays, meta)


def load_lifted(manifest_path: str):
    from .lifting import LiftedDataset, LiftedSample

    arrays, meta = load_arrays(manifest_path)
    if meta.get("kind") != "lifted":
        raise CorruptionError("manifest does not describe a lifted dataset")
    ptr = arrays["ptr"].astype(int)
    samples = []
    for i in range(len(ptr) - 1):
        lo, hi = ptr[i], ptr[i + 1]
        samples.append(LiftedSample(arrays["sensors"][i],
                                    arrays["coords"][lo:hi],
                                    arrays["labels"][lo:hi].astype(np.int64),
                                    arrays["targets"][lo:hi]))
    return LiftedDataset(samples, int(meta["region_count"]),
                         int(meta["coord_dim"]))


def save_disc(disc, manifest_path: str):
    arrays = {
        "sensors": np.stack([s.sensors for s in disc.samples]),
        "locations": np.stack([s.locations for s in disc.samples]),
    }
    if disc.with_time:
        arrays["times"] = disc.samples[0].times
    meta = {"kind": "disc", "dis_n": disc.dis_n, "with_time": disc.with_time,
            "domain": list(disc.domain)}
    save_arrays(manifest_path, arrays, meta)


def load_disc(manifest_path: str):
    from .lifting import DiscDataset, DiscSample

    arrays, meta = load_arrays(manifest_path)
    if meta.get("kind") != "disc":
        raise CorruptionError("manifest does not describe a discontinuity dataset")
    with_time = bool(meta["with_time"])
    times = arrays.get("times")
    samples = [DiscSample(arrays["sensors"][i], times, arrays["locations"][i])
               for i in range(len(arrays["sensors"]))]
    return DiscDataset(samples, int(meta["dis_n"]), with_time,
                       tuple(meta["domain"]))


def _mlp_arrays(prefix: str, p: MlpParams) -> dict:
    out = {}
    for k, (w, b) in enumerate(zip(p.weights, p.biases)):
        out[f"{prefix}w{k}"] = w
        out[f"{prefix}b{k}"] = b
    return out


def _mlp_from_arrays(prefix: str, arrays: dict, meta: dict) -> MlpParams:
    sizes = tuple(meta[f"{prefix}layer_sizes"])
    n = len(sizes) - 1
    weights = tuple(arrays[f"{prefix}w{k}"] for k in range(n))
    biases = tuple(arrays[f"{prefix}b{k}"] for k in range(n))
    return MlpParams(sizes, weights, biases, meta[f"{prefix}activation"])


def _norm_arrays(prefix: str, s: Standardizer) -> dict:
    return {f"{prefix}mean": s.mean, f"{prefix}scale": s.scale}


def _norm_from_arrays(prefix: str, arrays: dict) -> Standardizer:
    return Standardizer(arrays[f"{prefix}mean"], arrays[f"{prefix}scale"])


def save_model(model, manifest_path: str):
    if isinstance(model, DeepONetModel):
        arrays = {**_mlp_arrays("branch_", model.branch),
                  **_mlp_arrays("trunk_", model.trunk),
                  **_norm_arrays("branch_norm_", model.branch_norm),
                  **_norm_arrays("trunk_norm_", model.trunk_norm),
                  **_norm_arrays("target_norm_", model.target_norm)}
        meta = {
            "kind": "deeponet",
            "mode": model.mode,
            "branch_layer_sizes": list(model.branch.layer_sizes),
            "branch_activation": model.branch.activation,
            "trunk_layer_sizes": list(model.trunk.layer_sizes),
            "trunk_activation": model.trunk.activation,
        }
    elif isinstance(model, CuttingNet):
        arrays = {**_mlp_arrays("net_", model.net),
                  **_norm_arrays("in_norm_", model.in_norm),
                  **_norm_arrays("out_norm_", model.out_norm)}
        meta = {
            "kind": "cutnet",
            "with_time": model.with_time,
            "domain": list(model.domain),
            "net_layer_sizes": list(model.net.layer_sizes),
            "net_activation": model.net.activation,
        }
    else:
        raise TypeError(f"cannot persist {type(model).__name__}")
    save_arrays(manifest_path, arrays, meta)


def load_model(manifest_path: str):
    arrays, meta = load_arrays(manifest_path)
    kind = meta.get("kind")
    if kind == "deeponet":
        return DeepONetModel(
            branch=_mlp_from_arrays("branch_", arrays, meta),
            trunk=_mlp_from_arrays("trunk_", arrays, meta),
            mode=meta["mode"],
            branch_norm=_norm_from_arrays("branch_norm_", arrays),
            trunk_norm=_norm_from_arrays("trunk_norm_", arrays),
            target_norm=_norm_from_arrays("target_norm_", arrays),
        )
    if kind == "cutnet":
        return CuttingNet(
            net=_mlp_from_arrays("net_", arrays, meta),
            with_time=bool(meta["with_time"]),
            domain=tuple(meta["domain"]),
            in_norm=_norm_from_arrays("in_norm_", arrays),
            out_norm=_norm_from_arrays("out_norm_", arrays),
        )
    raise CorruptionError(f"manifest kind {kind!r} is not a model checkpoint")
