"""Session-scoped trained models shared across the acceptance criteria.

Desk-scale benchmark training is the expensive part of the acceptance run,
so each (problem, seed) stack is trained exactly once here and reused by
every criterion that needs it.
"""

import numpy as np
import pytest

from cutop.bench import (
    _train_cfg,
    evaluate_baseline,
    evaluate_cut,
    prepare_problem,
    train_baseline_model,
    train_cut_stack,
)
from cutop.config import default_config
from cutop.operators import cutnet_eval
from cutop.training import train_cutnet

SEEDS = (0, 1, 2)


def cutnet_test_mae(prep, cnet) -> float:
    """Held-out front-location MAE against the analytic positions."""
    errs = []
    for sensors, truth, fronts in zip(prep.test_sensors, prep.test_truth,
                                      prep.test_fronts):
        if truth.x is None:
            errs.append(float(np.abs(cutnet_eval(cnet, sensors)
                                     - fronts).mean()))
        else:
            for k, tj in enumerate(truth.t):
                pred = cutnet_eval(cnet, sensors, float(tj))
                errs.append(float(np.abs(pred - fronts[k]).mean()))
    return float(np.mean(errs))


@pytest.fixture(scope="session")
def adv_prep():
    return prepare_problem(default_config("advection", "desk"))


@pytest.fixture(scope="session")
def adv_runs(adv_prep):
    runs = []
    for seed in SEEDS:
        cnet, model, _ = train_cut_stack(adv_prep, seed)
        bmodel, _ = train_baseline_model(adv_prep, seed)
        runs.append({
            "seed": seed,
            "cnet": cnet,
            "model": model,
            "cut": evaluate_cut(adv_prep, cnet, model),
            "base": evaluate_baseline(adv_prep, bmodel),
            "cnet_mae": cutnet_test_mae(adv_prep, cnet),
        })
    return runs


@pytest.fixture(scope="session")
def burgers_prep():
    return prepare_problem(default_config("burgers", "desk"))


@pytest.fixture(scope="session")
def burgers_run(burgers_prep):
    cnet, model, _ = train_cut_stack(burgers_prep, 0)
    bmodel, _ = train_baseline_model(burgers_prep, 0)
    return {
        "cnet": cnet,
        "model": model,
        "cut": evaluate_cut(burgers_prep, cnet, model),
        "base": evaluate_baseline(burgers_prep, bmodel),
        "cnet_mae": cutnet_test_mae(burgers_prep, cnet),
    }


@pytest.fixture(scope="session")
def burgers_cutnet_maes(burgers_prep, burgers_run):
    maes = [burgers_run["cnet_mae"]]
    cfg = burgers_prep.cfg
    for seed in SEEDS[1:]:
        cnet, _ = train_cutnet(
            burgers_prep.disc,
            _train_cfg(cfg, seed, cfg.cutnet_epochs, None, lr=cfg.cutnet_lr),
            hidden=cfg.cutnet_hidden)
        maes.append(cutnet_test_mae(burgers_prep, cnet))
    return maes


@pytest.fixture(scope="session")
def pars_prep():
    return prepare_problem(default_config("parsimonious", "desk"))


@pytest.fixture(scope="session")
def pars_runs(pars_prep):
    runs = []
    for seed in SEEDS:
        cnet, model, _ = train_cut_stack(pars_prep, seed)
        bmodel, _ = train_baseline_model(pars_prep, seed)
        runs.append({
            "seed": seed,
            "cut": evaluate_cut(pars_prep, cnet, model),
            "base": evaluate_baseline(pars_prep, bmodel),
        })
    return runs
