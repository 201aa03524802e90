import math
import time

import numpy as np
import pytest

from featuregraph.analysis import (
    BoundInputs,
    bound_rhs_abs,
    bound_rhs_diff,
    complexity_probe,
    estimate_r_lambda,
    loo_stability,
    predicted_beta,
    stability_report,
    verify_bound,
)
from featuregraph.dataset import Dataset, gen_synthetic, split, SplitSpec, fit_standardizer, apply_standardizer, load_csv
from featuregraph.errors import ConfigError
from featuregraph.graph import build_layout, evaluate_batch, init_from_svm
from featuregraph.svr import LinearModel, SvrConfig, auto_tol, svr_train
from featuregraph.training import TrainConfig, train_loss_optimized


def test_bound_inputs_validation():
    with pytest.raises(ConfigError):
        BoundInputs(r=1.0, Lambda=2.0, m=10, delta=0.0, eps_loss=0.1, V=1)
    with pytest.raises(ConfigError):
        BoundInputs(r=1.0, Lambda=2.0, m=10, delta=1.5, eps_loss=0.1, V=1)
    with pytest.raises(ConfigError):
        BoundInputs(r=1.0, Lambda=0.0, m=10, delta=0.1, eps_loss=0.1, V=1)
    with pytest.raises(ConfigError):
        BoundInputs(r=1.0, Lambda=2.0, m=0, delta=0.1, eps_loss=0.1, V=1)


def test_bound_rhs_diff_degenerate_node_count():
    b = BoundInputs(r=1.0, Lambda=2.0, m=100, delta=0.5, eps_loss=0.1, V=0)
    assert bound_rhs_diff(b, 0.7, 0.4) == pytest.approx(0.3)


def test_bound_rhs_diff_arithmetic():
    # delta = 1 kills the log term: rhs = 0.3 + 3 * (2*1*2/10) * 1 = 1.5
    b = BoundInputs(r=1.0, Lambda=2.0, m=100, delta=1.0, eps_loss=0.1, V=3)
    assert bound_rhs_diff(b, 0.5, 0.5) == pytest.approx(1.5)


def test_bound_rhs_abs_reduces_to_single_model_bound():
    b = BoundInputs(r=1.5, Lambda=3.0, m=64, delta=0.1, eps_loss=0.2, V=0)
    slack = (2 * 1.5 * 3.0 / 8.0) * (1 + math.sqrt(math.log(10.0) / 2))
    assert bound_rhs_abs(b, 0.9) == pytest.approx(0.9 + 0.2 + slack)


def test_bound_monotonicities():
    base = dict(r=1.0, Lambda=2.0, m=100, delta=0.2, eps_loss=0.1, V=3)
    rhs = bound_rhs_diff(BoundInputs(**base), 0.5, 0.4)
    for key, hi in (("r", 2.0), ("Lambda", 4.0), ("eps_loss", 0.5), ("V", 6)):
        grown = dict(base, **{key: hi})
        assert bound_rhs_diff(BoundInputs(**grown), 0.5, 0.4) > rhs
    assert bound_rhs_diff(BoundInputs(**dict(base, m=400)), 0.5, 0.4) < rhs
    assert bound_rhs_diff(BoundInputs(**dict(base, delta=0.8)), 0.5, 0.4) < rhs
    # delta -> 0+ diverges (at sqrt(log) speed)
    seq = [bound_rhs_abs(BoundInputs(**dict(base, delta=d)), 0.5) for d in (0.5, 1e-5, 1e-100, 1e-300)]
    assert all(a < b for a, b in zip(seq, seq[1:]))


def test_estimate_r_lambda_small_layout(rng):
    D = 4
    X = rng.normal(size=(30, D))
    X = (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)
    ds = Dataset(X, rng.normal(size=30), tuple(f"x{i}" for i in range(D)))
    graph = init_from_svm(build_layout(D, 2), LinearModel(rng.normal(size=D), 0.3), np.arange(D))
    r, lam = estimate_r_lambda(ds, graph)
    assert lam == 2.0
    assert r > 0


def test_estimate_r_lambda_zero_row():
    ds = Dataset(np.zeros((1, 4)), np.zeros(1), ("a", "b", "c", "d"))
    graph = init_from_svm(build_layout(4, 2), LinearModel(np.zeros(4), 0.0), np.arange(4))
    r, lam = estimate_r_lambda(ds, graph)
    assert r == 0.0  # degenerate: the bound is vacuous


def test_estimate_r_lambda_housing_layout(housing_split):
    train, _ = housing_split
    graph = init_from_svm(build_layout(13, 4), LinearModel(np.zeros(13), 0.0), np.arange(13))
    r, lam = estimate_r_lambda(train, graph)
    assert lam == 4.0
    assert r > 0


def test_loo_constant_trainer_is_perfectly_stable(rng):
    ds = Dataset(rng.normal(size=(8, 2)), rng.normal(size=8), ("a", "b"))
    probe = Dataset(rng.normal(size=(10, 2)), rng.normal(size=10), ("a", "b"))

    def trainer(d):
        return lambda X: np.full(X.shape[0], 1.5)

    res = loo_stability(ds, trainer, probe)
    assert np.all(res.per_removal_norms == 0.0)
    assert res.mean_norm == 0.0


def test_loo_duplicated_rows_shield_the_solution(rng):
    X = rng.normal(size=(10, 2))
    y = X @ np.array([1.0, -1.0]) + 0.1 * rng.normal(size=10)
    X2 = np.vstack([X, X])
    y2 = np.concatenate([y, y])
    ds = Dataset(X2, y2, ("a", "b"))
    probe = Dataset(rng.normal(size=(15, 2)), rng.normal(size=15), ("a", "b"))
    cfg = SvrConfig(C=2.0, epsilon=0.1, tol=auto_tol(y2, 2.0))

    def trainer(d):
        return svr_train(d.features, d.targets, cfg).model.predict

    res = loo_stability(ds, trainer, probe)
    # a twin of every removed point remains, so solutions barely move
    baseline = float(np.linalg.norm(probe.targets))
    assert res.mean_norm <= 0.05 * baseline


def test_loo_needs_two_rows(rng):
    ds = Dataset(rng.normal(size=(1, 2)), rng.normal(size=1), ("a", "b"))
    with pytest.raises(ConfigError):
        loo_stability(ds, lambda d: (lambda X: np.zeros(X.shape[0])), ds)


def test_predicted_beta_paths(rng):
    D = 8
    graph = init_from_svm(build_layout(D, 2), LinearModel(rng.normal(size=D), 0.2), np.arange(D))
    # no retrained nodes: prediction equals the svm term
    assert predicted_beta(graph, {}, 0.011) == 0.011
    # one retrained leaf under identity upper layers adds its beta unscaled
    graph.nodes[0][0].retrained = True
    assert predicted_beta(graph, {(0, 0): 0.005}, 0.011) == pytest.approx(0.016)
    with pytest.raises(ConfigError):
        predicted_beta(graph, {}, 0.011)


def test_predicted_beta_doubles_with_full_first_layer(rng):
    D = 8
    graph = init_from_svm(build_layout(D, 2), LinearModel(rng.normal(size=D), 0.2), np.arange(D))
    beta_svm = 0.02
    share = beta_svm / graph.layout.layer_sizes[0]
    betas = {}
    for p, node in enumerate(graph.nodes[0]):
        node.retrained = True
        betas[(0, p)] = share
    assert predicted_beta(graph, betas, beta_svm) == pytest.approx(2 * beta_svm)


def test_predicted_beta_scales_with_path_weights(rng):
    D = 4
    graph = init_from_svm(build_layout(D, 2), LinearModel(rng.normal(size=D), 0.0), np.arange(D))
    graph.nodes[0][0].retrained = True
    # double the root's coefficient for its first input
    graph.nodes[1][0].model = LinearModel(np.array([2.0, 1.0]), 0.0)
    assert predicted_beta(graph, {(0, 0): 0.01}, 0.0) == pytest.approx(0.02)


def test_verify_bound_on_small_pipeline(rng):
    ds = gen_synthetic(8, 120, 2, seed=5)
    train, test = split(ds, SplitSpec(n_train=80, seed=5))
    std = fit_standardizer(train)
    train, test = apply_standardizer(std, train), apply_standardizer(std, test)
    C = 2.0
    cfg = SvrConfig(C=C, epsilon=0.1, tol=auto_tol(train.targets, C))
    svm = svr_train(train.features, train.targets, cfg).model
    graph, _ = train_loss_optimized(train, svm, 2, np.arange(8), TrainConfig(svr=cfg))
    report = verify_bound(train, test, svm, graph, delta=0.05, eps_loss=0.1)
    assert report.satisfied == (report.lhs_diff <= report.rhs_diff)
    assert report.inputs.V == graph.n_nodes
    assert report.rhs_abs >= report.train_loss_fga
    assert report.confidence_diff == pytest.approx(1 - graph.n_nodes * 0.05)
    assert not report.degenerate


def test_stability_report_combines_and_predicts(rng):
    ds = Dataset(rng.normal(size=(12, 4)), rng.normal(size=12), tuple("abcd"))
    probe = Dataset(rng.normal(size=(10, 4)), rng.normal(size=10), tuple("abcd"))
    cfg = SvrConfig(C=1.0, epsilon=0.1)

    def svm_trainer(d):
        return svr_train(d.features, d.targets, cfg).model.predict

    def fga_trainer(d):
        svm = svr_train(d.features, d.targets, cfg).model
        graph, _ = train_loss_optimized(d, svm, 2, np.arange(4), TrainConfig(svr=cfg))
        return lambda X: evaluate_batch(graph, X)

    svm = svr_train(ds.features, ds.targets, cfg).model
    graph, _ = train_loss_optimized(ds, svm, 2, np.arange(4), TrainConfig(svr=cfg))
    rep = stability_report(ds, svm_trainer, fga_trainer, probe, graph=graph)
    assert rep.svm.per_removal_norms.shape == (12,)
    assert rep.fga.per_removal_norms.shape == (12,)
    if rep.svm.mean_norm > 0:
        assert rep.ratio == pytest.approx(rep.fga.mean_norm / rep.svm.mean_norm)
    assert np.isfinite(rep.predicted_beta)


def test_complexity_probe_stub_calibration():
    def stub(D):
        time.sleep(D * 2e-4)

    res = complexity_probe([64, 128, 256, 512], trials=2, seed=0, sweep_fn=stub)
    assert res.slope == pytest.approx(1.0, abs=0.2)


def test_complexity_probe_leaf_count_doubles():
    for D in (64, 128, 256):
        assert build_layout(2 * D, 4).layer_sizes[0] == 2 * build_layout(D, 4).layer_sizes[0]


def test_complexity_probe_validation():
    with pytest.raises(ConfigError):
        complexity_probe([64, 128], trials=1)
    with pytest.raises(ConfigError):
        complexity_probe([64, 128, 256], trials=0)
