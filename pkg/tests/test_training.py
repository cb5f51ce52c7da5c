"""Training loops: convergence on tiny problems, budgets, determinism."""

import numpy as np
import pytest

from cutop.errors import ConfigError, UsageError
from cutop.extraction import extract_jumps
from cutop.lifting import build_disc_dataset, build_lifted_dataset
from cutop.operators import baseline_predict, cut_predict, cutnet_eval
from cutop.problems import AdvectionIC, advection_exact
from cutop.training import TrainConfig, _epoch_lr, _sample_rows, train_baseline, train_cutnet, train_operator


def tiny_advection(n=6, nx=60, nt=4, seed0=0):
    fields = []
    rng = np.random.default_rng(seed0)
    for _ in range(n):
        ic = AdvectionIC(h=float(rng.uniform(0.3, 0.7)),
                         w=float(rng.uniform(0.22, 0.3)),
                         s_mid=float(rng.uniform(0.16, 0.2)))
        fields.append(advection_exact(ic, nx=nx, nt=nt))
    discs = [extract_jumps(f, dis_n=2) for f in fields]
    return fields, discs


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            TrainConfig(epochs=0)
        with pytest.raises(ConfigError):
            TrainConfig(lr_decay="cosine")

    def test_step_schedule_halves_quarterly(self):
        cfg = TrainConfig(epochs=100, lr=1.0)
        assert _epoch_lr(cfg, 0) == 1.0
        assert _epoch_lr(cfg, 25) == 0.5
        assert _epoch_lr(cfg, 50) == 0.25
        assert _epoch_lr(cfg, 99) == 0.125

    def test_constant_schedule(self):
        cfg = TrainConfig(epochs=100, lr=0.3, lr_decay="constant")
        assert _epoch_lr(cfg, 99) == 0.3


class TestSampling:
    def test_full_budget_identity(self):
        rng = np.random.default_rng(0)
        np.testing.assert_array_equal(_sample_rows(7, None, None, False, rng),
                                      np.arange(7))

    def test_budget_respected_without_replacement(self):
        rng = np.random.default_rng(0)
        idx = _sample_rows(100, None, 40, False, rng)
        assert len(idx) == 40
        assert len(np.unique(idx)) == 40

    def test_budget_too_large(self):
        rng = np.random.default_rng(0)
        with pytest.raises(UsageError):
            _sample_rows(10, None, 11, False, rng)

    def test_stratified_covers_regions(self):
        rng = np.random.default_rng(0)
        labels = np.repeat([0, 1, 2], [80, 10, 10])
        idx = _sample_rows(100, labels, 30, True, rng)
        assert len(idx) == 30
        counts = np.bincount(labels[idx], minlength=3)
        assert np.all(counts == 10)


class TestOperatorTraining:
    def test_fits_tiny_dataset(self):
        fields, discs = tiny_advection()
        lifted = build_lifted_dataset(fields, discs)
        cfg = TrainConfig(epochs=300, batch_size=512, lr=3e-3, seed=0)
        model, report = train_operator(lifted, cfg, latent=16, hidden=(32, 32))
        assert report.train_losses[-1] < 0.05 * report.train_losses[0]
        assert model.mode == "lifted"

    def test_loss_series_deterministic(self):
        fields, discs = tiny_advection(n=3)
        lifted = build_lifted_dataset(fields, discs)
        cfg = TrainConfig(epochs=10, batch_size=256, seed=4)
        _, r1 = train_operator(lifted, cfg, latent=8, hidden=(16,))
        _, r2 = train_operator(lifted, cfg, latent=8, hidden=(16,))
        assert r1.train_losses == r2.train_losses

    def test_seed_changes_training(self):
        fields, discs = tiny_advection(n=3)
        lifted = build_lifted_dataset(fields, discs)
        _, r1 = train_operator(lifted, TrainConfig(epochs=5, seed=1),
                               latent=8, hidden=(16,))
        _, r2 = train_operator(lifted, TrainConfig(epochs=5, seed=2),
                               latent=8, hidden=(16,))
        assert r1.train_losses != r2.train_losses

    def test_budget_limits_points(self):
        fields, discs = tiny_advection(n=3)
        lifted = build_lifted_dataset(fields, discs)
        cfg = TrainConfig(epochs=2, points_per_sample=50)
        model, report = train_operator(lifted, cfg, latent=8, hidden=(16,))
        assert report.points_per_epoch == 50

    def test_empty_dataset(self):
        from cutop.lifting import LiftedDataset

        with pytest.raises(UsageError):
            train_operator(LiftedDataset([], 3, 2), TrainConfig(epochs=1))

    def test_validation_early_stop(self):
        fields, discs = tiny_advection(n=4)
        lifted = build_lifted_dataset(fields[:3], discs[:3])
        val = build_lifted_dataset(fields[3:], discs[3:])
        cfg = TrainConfig(epochs=500, patience=5, seed=0)
        model, report = train_operator(lifted, cfg, latent=8, hidden=(16,),
                                       val=val)
        assert len(report.val_losses) == len(report.train_losses)
        assert len(report.train_losses) <= 500


class TestBaselineTraining:
    def test_fits_and_predicts(self):
        fields, _ = tiny_advection()
        cfg = TrainConfig(epochs=200, batch_size=512, lr=3e-3, seed=0)
        model, report = train_baseline(fields, cfg, latent=16, hidden=(32, 32))
        assert model.mode == "baseline"
        pred = baseline_predict(model, fields[0].sensors, fields[0].x,
                                fields[0].t)
        assert pred.shape == fields[0].values.shape
        assert report.train_losses[-1] < report.train_losses[0]

    def test_no_fields(self):
        with pytest.raises(UsageError):
            train_baseline([], TrainConfig(epochs=1))


class TestCutnetTraining:
    def test_fits_fronts(self):
        fields, discs = tiny_advection(n=8, nx=200, nt=5)
        disc_ds = build_disc_dataset(fields, discs)
        cfg = TrainConfig(epochs=800, lr=3e-3, seed=0)
        cnet, report = train_cutnet(disc_ds, cfg, hidden=(16, 16))
        assert cnet.with_time
        errs = []
        for fld in fields:
            ic = fld.ic
            for tj in fld.t:
                pred = cutnet_eval(cnet, fld.sensors, tj)
                errs.append(np.abs(pred - ic.fronts_at(tj)).max())
        assert np.mean(errs) < 0.03

    def test_deterministic(self):
        fields, discs = tiny_advection(n=3)
        disc_ds = build_disc_dataset(fields, discs)
        cfg = TrainConfig(epochs=10, seed=9)
        _, r1 = train_cutnet(disc_ds, cfg, hidden=(8,))
        _, r2 = train_cutnet(disc_ds, cfg, hidden=(8,))
        assert r1.train_losses == r2.train_losses

    def test_empty(self):
        from cutop.lifting import DiscDataset

        with pytest.raises(UsageError):
            train_cutnet(DiscDataset([], 1, True, (0, 1)), TrainConfig(epochs=1))


class TestEndToEnd:
    def test_cut_predict_beats_constant(self):
        fields, discs = tiny_advection(n=6, nx=100, nt=4)
        lifted = build_lifted_dataset(fields, discs)
        disc_ds = build_disc_dataset(fields, discs)
        op, _ = train_operator(lifted, TrainConfig(epochs=300, lr=3e-3, seed=0),
                               latent=16, hidden=(32, 32))
        cnet, _ = train_cutnet(disc_ds, TrainConfig(epochs=500, lr=3e-3, seed=0),
                               hidden=(16, 16))
        fld = fields[0]
        sol = cut_predict(op, cnet, fld.sensors, fld.x, fld.t)
        err = np.mean(np.abs(sol.values - fld.values))
        const_err = np.mean(np.abs(fld.values - fld.values.mean()))
        assert err < 0.5 * const_err
