import math

import numpy as np
import pytest

from conftest import signal_dataset
from rgsearch import engine
from rgsearch.data import Dataset, encode, make_folds, stratified_holdout
from rgsearch.engine import (HypesResult, SearchConfig, compare_reports, derive_seed, evaluate_hypes,
                             refit_and_validate, run_search, select_best, write_results)
from rgsearch.errors import DataError, NumericalError, UsageError
from rgsearch.learners import fit
from rgsearch.metrics import auc
from rgsearch.space import Hypes, builtin_space, sample_hypes

NB_H = Hypes("NB", {"alpha": 1.0, "min_categories": 2, "fit_prior": True})


@pytest.fixture(scope="module")
def split():
    d = signal_dataset(300, seed=3)
    tt, va = stratified_holdout(d, 0.8, 0)
    return tt, va, make_folds(tt, 5, 0)


def test_evaluate_five_folds(split):
    tt, _, folds = split
    r = evaluate_hypes("NB", NB_H, tt, folds, 0)
    assert len(r.fold_aucs) == 5
    assert r.mean_test_auc == pytest.approx(np.mean(r.fold_aucs))
    r2 = evaluate_hypes("NB", NB_H, tt, folds, 0)
    assert (r2.fold_aucs, r2.mean_test_auc, r2.warnings) == (r.fold_aucs, r.mean_test_auc, r.warnings)


def test_evaluate_matches_hand_driver(split):
    tt, _, folds = split
    r = evaluate_hypes("NB", NB_H, tt, folds, 5, index=2)
    for f in range(5):
        train_rows = np.flatnonzero(folds.assignment != f)
        test_rows = np.flatnonzero(folds.assignment == f)
        m = fit("NB", NB_H, tt.take(train_rows), derive_seed(5, 2, f))
        p = m.predict_proba(tt.X[test_rows])
        assert r.fold_aucs[f] == auc(p, tt.y[test_rows])


def test_derive_seed_depends_on_every_part():
    seeds = {derive_seed(1, i, f) for i in range(20) for f in range(5)}
    assert len(seeds) == 100
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)


def test_select_best():
    rs = [HypesResult(i, NB_H, [], m) for i, m in enumerate(np.linspace(0.5, 0.9, 10))]
    assert select_best(rs) == 9
    means = [0.6, 0.7, 0.6, 0.8, 0.5, 0.6, 0.7, 0.8, 0.1]
    assert select_best([HypesResult(i, NB_H, [], m) for i, m in enumerate(means)]) == 3
    with pytest.raises(UsageError):
        select_best([])


def test_select_best_skips_failures():
    rs = [HypesResult(0, NB_H, [], math.nan, error="boom"), HypesResult(1, NB_H, [], 0.4)]
    assert select_best(rs) == 1


def test_run_search_single(split):
    tt, va, folds = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=1, k=5)
    rep = run_search(cfg, tt, va, folds)
    assert len(rep.results) == 1 and rep.best_index == 0
    assert rep.models_trained == 5
    assert rep.total_minutes > 0


@pytest.mark.parametrize("method", ["NB", "LR", "DT"])
def test_run_search_accounting(split, method):
    tt, va, folds = split
    cfg = SearchConfig(method, builtin_space(method, tt.n_cases, "desk"), n_hypes=12, k=5, sampling_seed=4)
    rep = run_search(cfg, tt, va, folds)
    assert [r.index for r in rep.results] == list(range(12))
    assert rep.models_trained == 60 == sum(len(r.fold_aucs) for r in rep.results)
    sampled = sample_hypes(cfg.space, 12, 4)
    assert [r.hypes.key for r in rep.results] == [h.key for h in sampled]
    best = rep.results[rep.best_index].mean_test_auc
    assert all(r.mean_test_auc <= best for r in rep.results if not r.failed)
    assert all(r.mean_test_auc == pytest.approx(np.mean(r.fold_aucs)) for r in rep.results)


def test_run_search_uses_shared_folds(split):
    tt, va, _ = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=3, k=4, fold_seed=9)
    rep = run_search(cfg, tt, va)
    folds = make_folds(tt, 4, 9)
    for r in rep.results:
        assert r.fold_aucs == evaluate_hypes("NB", r.hypes, tt, folds, 0, r.index).fold_aucs


def test_failed_fit_recorded_not_fatal(split, monkeypatch):
    tt, va, folds = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=4, k=5, sampling_seed=1)
    poisoned = sample_hypes(cfg.space, 4, 1)[1].values
    real = engine.fit_encoded

    def flaky(method, values, *a, **kw):
        if values == poisoned:
            raise NumericalError("NON_FINITE", "diverged")
        return real(method, values, *a, **kw)

    monkeypatch.setattr(engine, "fit_encoded", flaky)
    rep = run_search(cfg, tt, va, folds)
    assert rep.results[1].failed and "diverged" in rep.results[1].error
    assert rep.best_index != 1
    assert rep.models_trained == 20


def test_workers_do_not_change_results(split, tmp_path):
    tt, va, folds = split
    files = []
    for workers in (1, 3):
        cfg = SearchConfig("DT", builtin_space("DT", tt.n_cases, "desk"), n_hypes=8, k=5, workers=workers)
        rep = run_search(cfg, tt, va, folds)
        write_results(rep, tmp_path / f"r{workers}.csv")
        engine.write_summary(rep, tmp_path / f"s{workers}.json")
        files.append(((tmp_path / f"r{workers}.csv").read_bytes(), (tmp_path / f"s{workers}.json").read_bytes()))
    assert files[0] == files[1]


def test_leakage_guard(split):
    tt, va, folds = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=1, k=5)
    leaky = Dataset(va.schema, np.r_[va.X, tt.X[:1]], np.r_[va.y, tt.y[:1]], np.r_[va.case_ids, tt.case_ids[:1]])
    with pytest.raises(DataError) as e:
        run_search(cfg, tt, leaky, folds)
    assert e.value.code == "LEAKAGE"


def test_validation_never_in_training_folds(split):
    tt, va, folds = split
    val_ids = set(va.case_ids.tolist())
    for f in range(folds.k):
        train_rows, _ = folds.split(f)
        assert not val_ids & set(tt.case_ids[train_rows].tolist())


def test_mismatch_aborts(split):
    tt, va, folds = split
    with pytest.raises(UsageError):
        SearchConfig("NB", builtin_space("DT", tt.n_cases), n_hypes=1)
    with pytest.raises(UsageError):
        SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=0)
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=1, k=4)
    with pytest.raises(DataError):
        run_search(cfg, tt, va, folds)


def test_refit_planted_nb(planted):
    tt, va = stratified_holdout(planted, 0.8, 0)
    model, v_auc, curve = refit_and_validate("NB", NB_H, tt, va, 0)
    assert v_auc >= 0.85
    p = model.predict_proba(encode(va, "ordinal").values)
    assert abs(v_auc - auc(p, va.y)) <= 1e-15
    assert abs(curve.auc - v_auc) <= 1e-12


def test_refit_rejects_bad_validation(split):
    tt, va, _ = split
    with pytest.raises(DataError):
        refit_and_validate("NB", NB_H, tt, va.take([]), 0)
    one_class = va.take(np.flatnonzero(va.y == 1))
    with pytest.raises(DataError):
        refit_and_validate("NB", NB_H, tt, one_class, 0)


def summary(best, average, method="NB"):
    return {"method": method, "best_mean_test_auc": best, "average_mean_test_auc": average}


def test_compare_reports_published_rows():
    row = compare_reports(summary(0.818, 0.7), summary(0.862, 0.7))
    assert abs(row["difference_pct"] - 5.38) <= 0.01
    row = compare_reports(summary(0.766, 0.542), summary(0.766, 0.542))
    assert row["difference_pct"] == 0.0
    assert abs(row["best_vs_average_pct"] - 41.3) <= 0.1
    with pytest.raises(UsageError):
        compare_reports(summary(0.8, 0.7), summary(0.8, 0.7, "DT"))


def test_compare_reports_from_search(split):
    tt, va, folds = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=3, k=5)
    rep = run_search(cfg, tt, va, folds)
    row = compare_reports(rep, rep)
    assert row["difference_pct"] == 0.0
    assert row["best"] == rep.best.mean_test_auc


def test_results_file_layout(split, tmp_path):
    tt, va, folds = split
    cfg = SearchConfig("NB", builtin_space("NB", tt.n_cases), n_hypes=5, k=5)
    rep = run_search(cfg, tt, va, folds)
    write_results(rep, tmp_path / "r.csv")
    engine.write_timing(rep, tmp_path / "t.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].split(",")[:4] == ["index", "alpha", "min_categories", "fit_prior"]
    assert len(lines) == 6
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 6
