"""Two-stage training loops plus the vanilla DeepONet baseline.

Stage 1 fits the Cutting Net on (sensors -> front locations); stage 2 fits
the branch/trunk operator on lifted points. Both loops are plain
mini-batch Adam, deterministic under a fixed config seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, UsageError
from .lifting import ENCODE_SCALE, DiscDataset, LiftedDataset
from .nets import (
    Batch,
    Standardizer,
    adam_init,
    adam_step,
    backward,
    forward_cached,
    loss_and_dpred,
    mlp_init,
    mlp_value_and_grad,
)
from .operators import CuttingNet, DeepONetModel
from .problems import SolutionField


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 2000
    batch_size: int = 1024
    lr: float = 1e-3
    lr_decay: str = "step"  # halve every 25% of epochs; "constant" disables
    points_per_sample: int | None = None  # None = use every point each epoch
    seed: int = 0
    loss: str = "mse"
    patience: int | None = None
    stratified: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.lr_decay not in ("step", "constant"):
            raise ConfigError(f"unknown lr schedule {self.lr_decay!r}")


@dataclass
class TrainReport:
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    wall_clock: float = 0.0
    points_per_epoch: int | None = None
    checkpoint: str | None = None


def _epoch_lr(cfg: TrainConfig, epoch: int) -> float:
    if cfg.lr_decay == "constant":
        return cfg.lr
    quarter = max(1, cfg.epochs // 4)
    return cfg.lr * 0.5 ** (epoch // quarter)


def _check_loss_finite(value: float, epoch: int):
    if not np.isfinite(value):
        raise NumericError(f"non-finite loss at epoch {epoch}")


def _sample_rows(n: int, labels: np.ndarray | None, budget: int | None,
                 stratified: bool, rng: np.random.Generator) -> np.ndarray:
    if budget is None:
        return np.arange(n)
    if budget > n:
        raise UsageError(f"point budget {budget} exceeds available points {n}")
    if not stratified or labels is None:
        return rng.choice(n, size=budget, replace=False)
    # uniform per region, remainder drawn from the leftover pool
    regions = np.unique(labels)
    per = budget // len(regions)
    picked = []
    short = 0
    for r in regions:
        pool = np.flatnonzero(labels == r)
        take = min(per, len(pool))
        short += per - take
        picked.append(rng.choice(pool, size=take, replace=False))
    rest = budget - sum(len(p) for p in picked)
    if rest > 0:
        taken = np.concatenate(picked)
        pool = np.setdiff1d(np.arange(n), taken, assume_unique=False)
        picked.append(rng.choice(pool, size=rest, replace=False))
    return np.concatenate(picked)


def _deeponet_step(branch, trunk, u, y, target, loss):
    """Joint loss and gradients of the branch-trunk dot product."""
    b_acts = forward_cached(branch, u)
    t_acts = forward_cached(trunk, y)
    b_out, t_out = b_acts[-1], t_acts[-1]
    pred = np.sum(b_out * t_out, axis=1)
    value, d_pred = loss_and_dpred(pred, target, loss)
    g_branch, _ = backward(branch, b_acts, t_out * d_pred[:, None])
    g_trunk, _ = backward(trunk, t_acts, b_out * d_pred[:, None])
    return value, g_branch, g_trunk


def _train_deeponet(sensor_matrix, sample_data, cfg: TrainConfig, mode: str,
                    branch_sizes, trunk_sizes, val_data=None):
    """Shared loop for lifted and baseline operator training.

    sample_data: list of (coords_with_label_or_not, targets) per sample;
    rows are standardized once up front, then each epoch draws the budget per
    sample, shuffles, and steps Adam on mini-batches.
    """
    rng = np.random.default_rng(cfg.seed)
    branch = mlp_init(branch_sizes, seed=int(rng.integers(2 ** 31)))
    trunk = mlp_init(trunk_sizes, seed=int(rng.integers(2 ** 31)))

    branch_norm = Standardizer.fit(sensor_matrix)
    all_queries = np.concatenate([d[0] for d in sample_data])
    all_targets = np.concatenate([d[1] for d in sample_data])
    trunk_norm = Standardizer.fit(all_queries)
    target_norm = Standardizer.fit(all_targets[:, None])

    u_std = branch_norm.apply(sensor_matrix)
    q_std = [trunk_norm.apply(d[0]) for d in sample_data]
    z_std = [target_norm.apply(d[1][:, None])[:, 0] for d in sample_data]
    del all_queries, all_targets

    if val_data is not None:
        v_sensors, v_samples = val_data
        vu = branch_norm.apply(v_sensors)
        v_rows = []
        for i, (q, z) in enumerate(v_samples):
            v_rows.append((i, trunk_norm.apply(q),
                           target_norm.apply(z[:, None])[:, 0]))

    st_b = adam_init(branch, lr=cfg.lr)
    st_t = adam_init(trunk, lr=cfg.lr)
    report = TrainReport()
    budget = cfg.points_per_sample
    report.points_per_epoch = budget
    t0 = time.perf_counter()
    best_val = np.inf
    stale = 0
    labels_per_sample = [d[2] if len(d) > 2 else None for d in sample_data]

    for epoch in range(cfg.epochs):
        lr = _epoch_lr(cfg, epoch)
        rows_u = []
        rows_q = []
        rows_z = []
        for i, q in enumerate(q_std):
            idx = _sample_rows(len(q), labels_per_sample[i], budget,
                               cfg.stratified, rng)
            rows_u.append(np.full(len(idx), i))
            rows_q.append(q[idx])
            rows_z.append(z_std[i][idx])
        su = np.concatenate(rows_u)
        sq = np.concatenate(rows_q)
        sz = np.concatenate(rows_z)
        perm = rng.permutation(len(sz))
        su, sq, sz = su[perm], sq[perm], sz[perm]

        total = 0.0
        for k in range(0, len(sz), cfg.batch_size):
            idx = slice(k, min(k + cfg.batch_size, len(sz)))
            value, g_b, g_t = _deeponet_step(branch, trunk, u_std[su[idx]],
                                             sq[idx], sz[idx], cfg.loss)
            branch, st_b = adam_step(branch, g_b, st_b, lr=lr)
            trunk, st_t = adam_step(trunk, g_t, st_t, lr=lr)
            total += value * (idx.stop - idx.start)
        train_loss = total / len(sz)
        _check_loss_finite(train_loss, epoch)
        report.train_losses.append(train_loss)

        if val_data is not None:
            v_total = 0.0
            v_count = 0
            for i, q, z in v_rows:
                b_out = forward_cached(branch, vu[i][None, :].repeat(len(q), 0))[-1]
                t_out = forward_cached(trunk, q)[-1]
                r = np.sum(b_out * t_out, axis=1) - z
                v_total += float(np.sum(r * r))
                v_count += len(z)
            val_loss = v_total / v_count
        else:
            val_loss = train_loss
        _check_loss_finite(val_loss, epoch)
        report.val_losses.append(val_loss)
        if cfg.patience is not None:
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if stale > cfg.patience:
                    break

    report.wall_clock = time.perf_counter() - t0
    model = DeepONetModel(branch, trunk, mode, branch_norm, trunk_norm,
                          target_norm)
    return model, report


def train_operator(lifted: LiftedDataset, cfg: TrainConfig,
                   branch_sizes=None, trunk_sizes=None, latent: int = 128,
                   hidden=(256, 256, 256), val: LiftedDataset | None = None):
    """Stage 2: fit the lifted-space operator."""
    if lifted.n_samples == 0:
        raise UsageError("empty lifted dataset")
    m = len(lifted.samples[0].sensors)
    d = lifted.coord_dim + 1
    branch_sizes = branch_sizes or (m, *hidden, latent)
    trunk_sizes = trunk_sizes or (d, *hidden, latent)
    sensor_matrix = np.stack([s.sensors for s in lifted.samples])
    sample_data = [
        (np.column_stack([s.coords, s.labels * ENCODE_SCALE]), s.targets, s.labels)
        for s in lifted.samples
    ]
    val_data = None
    if val is not None:
        val_data = (
            np.stack([s.sensors for s in val.samples]),
            [(np.column_stack([s.coords, s.labels * ENCODE_SCALE]), s.targets)
             for s in val.samples],
        )
    return _train_deeponet(sensor_matrix, sample_data, cfg, "lifted",
                           branch_sizes, trunk_sizes, val_data)


def train_baseline(fields: list, cfg: TrainConfig, branch_sizes=None,
                   trunk_sizes=None, latent: int = 128, hidden=(256, 256, 256),
                   val: list | None = None):
    """Vanilla DeepONet on raw grid data: no labels, no masking."""
    if not fields:
        raise UsageError("no training fields")

    def rows(fld: SolutionField):
        if fld.x is not None:
            nt, nx = fld.values.shape
            coords = np.column_stack([
                np.broadcast_to(fld.x, (nt, nx)).ravel(),
                np.broadcast_to(fld.t[:, None], (nt, nx)).ravel(),
            ])
            return coords, fld.values.ravel()
        return fld.t[:, None].astype(float), fld.values

    m = len(fields[0].sensors)
    first_coords, _ = rows(fields[0])
    d = first_coords.shape[1]
    branch_sizes = branch_sizes or (m, *hidden, latent)
    trunk_sizes = trunk_sizes or (d, *hidden, latent)
    sensor_matrix = np.stack([f.sensors for f in fields])
    sample_data = [rows(f) for f in fields]
    val_data = None
    if val is not None:
        val_data = (np.stack([f.sensors for f in val]),
                    [rows(f) for f in val])
    return _train_deeponet(sensor_matrix, sample_data, cfg, "baseline",
                           branch_sizes, trunk_sizes, val_data)


def train_cutnet(disc: DiscDataset, cfg: TrainConfig, hidden=(64, 64, 64),
                 val: DiscDataset | None = None):
    """Stage 1: fit front locations from sensor readings (plus t for 2D)."""
    if not disc.samples:
        raise UsageError("empty discontinuity dataset")

    def rows(ds: DiscDataset):
        ins, outs = [], []
        for s in ds.samples:
            if ds.with_time:
                rep = np.broadcast_to(s.sensors, (len(s.times), len(s.sensors)))
                ins.append(np.column_stack([rep, s.times]))
                outs.append(s.locations)
            else:
                ins.append(s.sensors[None, :])
                outs.append(s.locations[None, :])
        return np.concatenate(ins), np.concatenate(outs)

    x_all, y_all = rows(disc)
    in_norm = Standardizer.fit(x_all)
    out_norm = Standardizer.fit(y_all)
    xs = in_norm.apply(x_all)
    ys = out_norm.apply(y_all)
    if val is not None:
        xv, yv = rows(val)
        xv = in_norm.apply(xv)
        yv = out_norm.apply(yv)

    rng = np.random.default_rng(cfg.seed)
    net = mlp_init((xs.shape[1], *hidden, disc.dis_n),
                   seed=int(rng.integers(2 ** 31)))
    state = adam_init(net, lr=cfg.lr)
    report = TrainReport()
    t0 = time.perf_counter()
    best_val = np.inf
    stale = 0
    for epoch in range(cfg.epochs):
        lr = _epoch_lr(cfg, epoch)
        perm = rng.permutation(len(ys))
        total = 0.0
        for k in range(0, len(ys), cfg.batch_size):
            idx = perm[k:k + cfg.batch_size]
            value, grads = mlp_value_and_grad(net, Batch(xs[idx], ys[idx]),
                                              cfg.loss)
            net, state = adam_step(net, grads, state, lr=lr)
            total += value * len(idx)
        train_loss = total / len(ys)
        _check_loss_finite(train_loss, epoch)
        report.train_losses.append(train_loss)
        if val is not None:
            r = forward_cached(net, xv)[-1] - yv
            val_loss = float(np.mean(r * r))
        else:
            val_loss = train_loss
        report.val_losses.append(val_loss)
        if cfg.patience is not None:
            if val_loss < best_val - 1e-12:
                best_val, stale = val_loss, 0
            else:
                stale += 1
                if stale > cfg.patience:
                    break
    report.wall_clock = time.perf_counter() - t0
    cnet = CuttingNet(net, disc.with_time, disc.domain, in_norm, out_norm)
    return cnet, report
