"""Persistence, CSV emission, and the command-line interface."""

import csv
import hashlib
import json
import os

import numpy as np
import pytest

from cutop.arraystore import (
    FORMAT_VERSION,
    blob_path,
    emit_csv,
    load_arrays,
    save_arrays,
)
from cutop.cli import cli_main
from cutop.errors import CorruptionError, FormatVersionError
from cutop.extraction import extract_jumps, filter_smeared
from cutop.lifting import build_disc_dataset, build_lifted_dataset
from cutop.nets import mlp_init
from cutop.operators import cutnet_eval, deeponet_eval_batch
from cutop.problems import generate_dataset
from cutop.store import (
    load_dataset,
    load_disc,
    load_lifted,
    load_model,
    save_dataset,
    save_disc,
    save_lifted,
    save_model,
)
from cutop.training import TrainConfig, train_baseline, train_cutnet


class TestArrayStore:
    def test_bitwise_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {
            "a": rng.normal(size=(3, 4, 5)),
            "b": np.array([np.pi, -0.0, 1e-300, 1e300]),
            "scalar_row": np.array([42.0]),
        }
        path = str(tmp_path / "m.json")
        save_arrays(path, arrays, {"note": "x"})
        loaded, meta = load_arrays(path)
        assert meta == {"note": "x"}
        for k in arrays:
            assert loaded[k].shape == arrays[k].shape
            assert loaded[k].tobytes() == np.ascontiguousarray(arrays[k]).tobytes()

    def test_truncated_blob_detected(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(10.0)})
        blob = blob_path(path)
        with open(blob, "rb") as fh:
            data = fh.read()
        with open(blob, "wb") as fh:
            fh.write(data[:-8])
        with pytest.raises(CorruptionError):
            load_arrays(path)

    def test_flipped_byte_detected(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(10.0)})
        blob = blob_path(path)
        data = bytearray(open(blob, "rb").read())
        data[3] ^= 0xFF
        open(blob, "wb").write(bytes(data))
        with pytest.raises(CorruptionError):
            load_arrays(path)

    def test_future_format_version(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(3.0)})
        manifest = json.load(open(path))
        manifest["format_version"] = FORMAT_VERSION + 1
        json.dump(manifest, open(path, "w"))
        with pytest.raises(FormatVersionError):
            load_arrays(path)

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(3.0)})
        assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


class TestCsv:
    def test_round_trip_17_digits(self, tmp_path):
        path = str(tmp_path / "out.csv")
        value = 0.1 + 0.2  # not exactly representable
        emit_csv(("model", "Nx", "v"), [("cut", 500, value)], path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["model", "Nx", "v"]
        assert rows[1][0] == "cut"
        assert float(rows[1][2]) == value

    def test_quoting(self, tmp_path):
        path = str(tmp_path / "out.csv")
        emit_csv(("a",), [('fancy, "name"',)], path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[1][0] == 'fancy, "name"'

    def test_crlf_line_endings(self, tmp_path):
        path = str(tmp_path / "out.csv")
        emit_csv(("a",), [(1.0,)], path)
        raw = open(path, "rb").read()
        assert raw.endswith(b"\r\n")
        assert raw.count(b"\r\n") == 2


class TestDatasetStore:
    def test_round_trip(self, tmp_path):
        ds = generate_dataset("advection", 4, seed=3, nx=60, nt=4)
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.problem == ds.problem
        assert back.seed == ds.seed
        for a, b in zip(ds.fields, back.fields):
            assert a.values.tobytes() == b.values.tobytes()
            assert a.sensors.tobytes() == b.sensors.tobytes()
            assert a.ic == b.ic
        for k in ds.splits:
            np.testing.assert_array_equal(ds.splits[k], back.splits[k])

    def test_parsimonious_round_trip(self, tmp_path):
        ds = generate_dataset("parsimonious", 3, seed=1, dt=0.05, m=100)
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.fields[0].x is None
        assert back.fields[0].values.tobytes() == ds.fields[0].values.tobytes()
        assert back.fields[0].ic == ds.fields[0].ic

    def test_wrong_kind(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(3.0)}, {"kind": "other"})
        with pytest.raises(CorruptionError):
            load_dataset(path)


class TestLiftedAndDiscStore:
    def test_round_trips(self, tmp_path):
        ds = generate_dataset("advection", 3, seed=2, nx=80, nt=4)
        discs = [extract_jumps(f, 2) for f in ds.fields]
        masks = [filter_smeared(f, d, 1) for f, d in zip(ds.fields, discs)]
        lifted = build_lifted_dataset(ds.fields, discs, masks)
        disc_ds = build_disc_dataset(ds.fields, discs)

        lp = str(tmp_path / "lifted.json")
        save_lifted(lifted, lp)
        lback = load_lifted(lp)
        assert lback.region_count == lifted.region_count
        assert lback.coord_dim == lifted.coord_dim
        for a, b in zip(lifted.samples, lback.samples):
            assert a.coords.tobytes() == b.coords.tobytes()
            np.testing.assert_array_equal(a.labels, b.labels)
            assert a.targets.tobytes() == b.targets.tobytes()

        dp = str(tmp_path / "disc.json")
        save_disc(disc_ds, dp)
        dback = load_disc(dp)
        assert dback.dis_n == 2 and dback.with_time
        assert dback.domain == disc_ds.domain
        for a, b in zip(disc_ds.samples, dback.samples):
            assert a.locations.tobytes() == b.locations.tobytes()


class TestModelStore:
    def test_deeponet_round_trip(self, tmp_path):
        ds = generate_dataset("advection", 3, seed=5, nx=60, nt=3)
        model, _ = train_baseline(ds.fields, TrainConfig(epochs=3, seed=0),
                                  latent=8, hidden=(16,))
        path = str(tmp_path / "model.json")
        save_model(model, path)
        back = load_model(path)
        assert back.mode == "baseline"
        queries = np.array([[0.3, 0.1], [0.7, 0.2]])
        a = deeponet_eval_batch(model, ds.fields[0].sensors[None, :], queries)
        b = deeponet_eval_batch(back, ds.fields[0].sensors[None, :], queries)
        np.testing.assert_array_equal(a, b)

    def test_cutnet_round_trip(self, tmp_path):
        ds = generate_dataset("advection", 3, seed=5, nx=60, nt=3)
        discs = [extract_jumps(f, 2) for f in ds.fields]
        disc_ds = build_disc_dataset(ds.fields, discs)
        cnet, _ = train_cutnet(disc_ds, TrainConfig(epochs=3, seed=0),
                               hidden=(8,))
        path = str(tmp_path / "cnet.json")
        save_model(cnet, path)
        back = load_model(path)
        a = cutnet_eval(cnet, ds.fields[0].sensors, 0.1)
        b = cutnet_eval(back, ds.fields[0].sensors, 0.1)
        np.testing.assert_array_equal(a, b)

    def test_unpersistable(self, tmp_path):
        with pytest.raises(TypeError):
            save_model(mlp_init((2, 2)), str(tmp_path / "x.json"))

    def test_not_a_model(self, tmp_path):
        path = str(tmp_path / "m.json")
        save_arrays(path, {"a": np.arange(3.0)}, {"kind": "dataset"})
        with pytest.raises(CorruptionError):
            load_model(path)


class TestCli:
    def test_unknown_flag_is_user_error(self, capsys):
        assert cli_main(["--bogus"]) == 1
        assert cli_main(["gen-data", "--nope"]) == 1

    def test_missing_subcommand(self):
        assert cli_main([]) == 1

    def test_gen_data_writes_echo_and_dataset(self, tmp_path):
        out = str(tmp_path / "data")
        rc = cli_main(["gen-data", "--problem", "advection", "--n", "3",
                       "--nx", "60", "--nt", "3", "--out", out])
        assert rc == 0
        assert os.path.exists(os.path.join(out, "dataset.json"))
        echo = json.load(open(os.path.join(out, "config_echo.json")))
        assert echo["problem"] == "advection"
        assert echo["seed"] == 0

    def test_gen_data_deterministic_rerun(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            cli_main(["gen-data", "--problem", "advection", "--n", "3",
                      "--nx", "60", "--nt", "3", "--seed", "7", "--out", out])
            blob = open(os.path.join(out, "dataset.bin"), "rb").read()
            outs.append(hashlib.sha256(blob).hexdigest())
        assert outs[0] == outs[1]

    def test_pipeline_stages(self, tmp_path):
        d = str(tmp_path / "data")
        e = str(tmp_path / "ext")
        l = str(tmp_path / "lift")
        c = str(tmp_path / "cut")
        o = str(tmp_path / "op")
        p = str(tmp_path / "pred")
        assert cli_main(["gen-data", "--problem", "advection", "--n", "4",
                         "--nx", "60", "--nt", "3", "--out", d]) == 0
        assert cli_main(["extract", "--data", d, "--dis-n", "2",
                         "--band-cells", "1", "--out", e]) == 0
        assert cli_main(["lift", "--data", d, "--extract", e, "--out", l]) == 0
        assert cli_main(["train-cutnet", "--lifted", l, "--out", c,
                         "--epochs", "3", "--hidden", "8"]) == 0
        assert cli_main(["train-operator", "--lifted", l, "--out", o,
                         "--epochs", "3", "--hidden", "8", "--latent", "4"]) == 0
        assert cli_main(["predict", "--data", d,
                         "--operator", os.path.join(o, "operator.json"),
                         "--cutnet", os.path.join(c, "cutnet.json"),
                         "--out", p]) == 0
        arrays, meta = load_arrays(os.path.join(p, "predictions.json"))
        assert meta["mode"] == "lifted"
        assert arrays["predictions"].shape[0] == 1  # one test sample

    def test_predict_lifted_without_cutnet_is_user_error(self, tmp_path):
        d = str(tmp_path / "data")
        e = str(tmp_path / "ext")
        l = str(tmp_path / "lift")
        o = str(tmp_path / "op")
        cli_main(["gen-data", "--problem", "advection", "--n", "4",
                  "--nx", "60", "--nt", "3", "--out", d])
        cli_main(["extract", "--data", d, "--dis-n", "2", "--out", e])
        cli_main(["lift", "--data", d, "--extract", e, "--out", l])
        cli_main(["train-operator", "--lifted", l, "--out", o,
                  "--epochs", "2", "--hidden", "8", "--latent", "4"])
        rc = cli_main(["predict", "--data", d,
                       "--operator", os.path.join(o, "operator.json"),
                       "--out", str(tmp_path / "p")])
        assert rc == 1

    def test_internal_error_exit_code(self, tmp_path):
        # corrupt dataset manifest -> internal error (2), not a crash
        d = str(tmp_path / "data")
        cli_main(["gen-data", "--problem", "advection", "--n", "3",
                  "--nx", "60", "--nt", "3", "--out", d])
        blob = os.path.join(d, "dataset.bin")
        data = bytearray(open(blob, "rb").read())
        data[0] ^= 0xFF
        open(blob, "wb").write(bytes(data))
        rc = cli_main(["extract", "--data", d, "--dis-n", "2",
                       "--out", str(tmp_path / "e")])
        assert rc == 2

    def test_train_loss_series_deterministic(self, tmp_path):
        d = str(tmp_path / "data")
        e = str(tmp_path / "ext")
        l = str(tmp_path / "lift")
        cli_main(["gen-data", "--problem", "advection", "--n", "4",
                  "--nx", "60", "--nt", "3", "--out", d])
        cli_main(["extract", "--data", d, "--dis-n", "2", "--out", e])
        cli_main(["lift", "--data", d, "--extract", e, "--out", l])
        losses = []
        for name in ("c1", "c2"):
            c = str(tmp_path / name)
            cli_main(["train-cutnet", "--lifted", l, "--out", c,
                      "--epochs", "4", "--hidden", "8", "--seed", "3"])
            rep = json.load(open(os.path.join(c, "train_report.json")))
            losses.append(rep["train_losses"])
        assert losses[0] == losses[1]
