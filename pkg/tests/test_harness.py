import math

import numpy as np
import pytest

from l1stab.harness import (CSV_COLUMNS, ExperimentConfig, GenerationCapExceeded,
                            draw_trial_instance, generate_instance, records_to_csv,
                            run_experiment, run_trial)


def test_config_defaults_and_checks():
    cfg = ExperimentConfig(m=4)
    assert cfg.h == 4
    with pytest.raises(ValueError):
        ExperimentConfig(n=41)
    with pytest.raises(ValueError):
        ExperimentConfig(n=4, m=3, l=2)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"trials": 1, "typo": 2})


def test_planted_point_is_strictly_feasible():
    cfg = ExperimentConfig(n=8, m=5, l=2, h=6, epsilon=0.3, weights=(0.5, 0.3, 0.2))
    rng = np.random.default_rng(0)
    for _ in range(10):
        inst = generate_instance(cfg, rng)
        p = inst.problem
        assert p.constraint_value(inst.x0) == pytest.approx(0.27)
        assert np.all(p.side_residual(inst.x0) < 0)
        assert np.count_nonzero(inst.x0) == cfg.k


def test_generation_cap():
    cfg = ExperimentConfig(n=6, m=2, k=3, require_certified=True, max_attempts=2)
    with pytest.raises(GenerationCapExceeded):
        draw_trial_instance(cfg, 0)


def test_uncertified_trial_skips_witness():
    cfg = ExperimentConfig(n=4, m=2, k=4, facets=4, robinson_samples=0, run_oracle=False)
    rec = run_trial(cfg, 0)
    assert not rec.rsp_holds
    assert math.isnan(rec.margin_eq12)


def test_records_in_trial_order():
    cfg = ExperimentConfig(trials=4, n=6, m=4, facets=4, robinson_samples=0)
    recs = run_experiment(cfg, workers=2)
    assert [r.trial for r in recs] == [0, 1, 2, 3]
    text = records_to_csv(recs)
    assert text.splitlines()[1].split(",") == CSV_COLUMNS
    assert CSV_COLUMNS[:14] == [
        "trial", "rsp_holds", "theta_residual", "value_l1", "k_min_l0", "err_l2", "sigma_k",
        "term_eps_upsilon", "term_phi", "term_Bxb", "margin_eq12", "margin_eq14",
        "margin_eq17", "margin_eq19"]


def test_general_trial_margins():
    cfg = ExperimentConfig(trials=1, n=8, m=5, l=2, h=6, k=1, epsilon=0.3,
                           weights=(0.5, 0.3, 0.2), facets=12, robinson_samples=1,
                           require_certified=True, seed=2)
    rec = run_trial(cfg, 0)
    assert rec.rsp_holds
    assert min(rec.margins().values()) >= -1e-8
    assert rec.eq7_residual <= 1e-8
    assert rec.theta_residual <= 1e-7
    assert rec.k_min_l0 <= 1
