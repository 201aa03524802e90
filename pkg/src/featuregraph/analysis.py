"""Generalisation-bound verification, leave-one-out stability, complexity probe.

The bound calculator evaluates the right-hand sides of the graph-vs-SVM
difference bound and the absolute graph bound. Both use the MEAN
epsilon-insensitive loss; benchmark tables report SSE, so reports carry both
numbers. The stability harness retrains from scratch with each training point
removed and measures how far the probe-set error vector moves. The
complexity probe times a single loss-optimised sweep across feature counts
and fits a log-log slope.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._parallel import run_indexed
from .dataset import Dataset, apply_standardizer, fit_standardizer, gen_synthetic
from .errors import ConfigError
from .graph import FeatureGraph, evaluate_batch, forward_outputs, node_inputs
from .svr import LinearModel, SvrConfig, auto_tol, svr_train
from .training import TrainConfig, eps_insensitive_loss, sse, train_loss_optimized


@dataclass(frozen=True)
class BoundInputs:
    """Quantities entering the generalisation bounds.

    r bounds the node-input radius (sqrt of max kernel diagonal), Lambda is
    the weight-norm bound (the maximum node fan-in), m the training size,
    delta the per-event confidence parameter, eps_loss the tube half-width of
    the loss, V the node count.
    """

    r: float
    Lambda: float
    m: int
    delta: float
    eps_loss: float
    V: int

    def __post_init__(self):
        if not (self.r >= 0) or not np.isfinite(self.r):
            raise ConfigError(f"r must be finite and >= 0, got {self.r}")
        if not (self.Lambda > 0):
            raise ConfigError(f"Lambda must be positive, got {self.Lambda}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if not (0.0 < self.delta <= 1.0):
            # delta = 1 is allowed: it simply zeroes the log term
            raise ConfigError(f"delta must be in (0, 1], got {self.delta}")
        if not (self.eps_loss >= 0):
            raise ConfigError(f"eps_loss must be >= 0, got {self.eps_loss}")
        if self.V < 0:
            raise ConfigError(f"V must be >= 0, got {self.V}")


def _slack_term(b: BoundInputs) -> float:
    return (2.0 * b.r * b.Lambda / math.sqrt(b.m)) * (1.0 + math.sqrt(math.log(1.0 / b.delta) / 2.0))


def bound_rhs_diff(b: BoundInputs, train_loss_fga: float, train_loss_svm: float) -> float:
    """Right side of the graph-minus-SVM generalisation bound.

    The empirical terms are mean epsilon-insensitive losses. Holds with
    probability at least 1 - V * delta.
    """
    return (train_loss_fga - train_loss_svm) + b.V * b.eps_loss + b.V * _slack_term(b)


def bound_rhs_abs(b: BoundInputs, train_loss_fga: float) -> float:
    """Right side of the absolute graph bound, with (V + 1) multipliers.

    Holds with probability at least 1 - (V + 1) * delta; V = 0 reduces to the
    standard single-SVM bound.
    """
    k = b.V + 1
    return train_loss_fga + k * b.eps_loss + k * _slack_term(b)


def estimate_r_lambda(ds: Dataset, graph: FeatureGraph) -> tuple[float, float]:
    """Empirical bound inputs: max node-input radius and max node fan-in.

    r is the largest euclidean norm of any node's input vector over the
    training rows (r = 0 only for degenerate all-zero inputs, which makes the
    bound vacuous); Lambda is the maximum fan-in d_max.
    """
    X = ds.features
    outputs = forward_outputs(graph, X)
    r_sq = 0.0
    lam = 0
    for l, layer in enumerate(graph.nodes):
        for p, node in enumerate(layer):
            Z = node_inputs(graph, X, outputs, l, p)
            r_sq = max(r_sq, float(np.max(np.sum(Z * Z, axis=1))))
            lam = max(lam, len(node.input_refs))
    return math.sqrt(r_sq), float(lam)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking the difference bound on a train/test pair."""

    rhs_diff: float
    rhs_abs: float
    lhs_diff: float
    satisfied: bool
    confidence_diff: float
    confidence_abs: float
    inputs: BoundInputs
    train_loss_svm: float
    train_loss_fga: float
    test_loss_svm: float
    test_loss_fga: float
    train_sse_svm: float
    train_sse_fga: float
    test_sse_svm: float
    test_sse_fga: float
    degenerate: bool


def verify_bound(
    train: Dataset,
    test: Dataset,
    svm: LinearModel,
    graph: FeatureGraph,
    delta: float = 0.05,
    eps_loss: float = 0.1,
) -> BoundReport:
    """Evaluate both bound right-hand sides and compare against observed test losses."""
    r, lam = estimate_r_lambda(train, graph)
    inputs = BoundInputs(
        r=r, Lambda=lam, m=train.n_samples, delta=delta, eps_loss=eps_loss, V=graph.n_nodes
    )
    pred_tr_svm = svm.predict(train.features)
    pred_tr_fga = evaluate_batch(graph, train.features)
    pred_te_svm = svm.predict(test.features)
    pred_te_fga = evaluate_batch(graph, test.features)
    tr_loss_svm = eps_insensitive_loss(pred_tr_svm, train.targets, eps_loss)
    tr_loss_fga = eps_insensitive_loss(pred_tr_fga, train.targets, eps_loss)
    te_loss_svm = eps_insensitive_loss(pred_te_svm, test.targets, eps_loss)
    te_loss_fga = eps_insensitive_loss(pred_te_fga, test.targets, eps_loss)
    rhs = bound_rhs_diff(inputs, tr_loss_fga, tr_loss_svm)
    lhs = te_loss_fga - te_loss_svm
    return BoundReport(
        rhs_diff=rhs,
        rhs_abs=bound_rhs_abs(inputs, tr_loss_fga),
        lhs_diff=lhs,
        satisfied=bool(lhs <= rhs),
        confidence_diff=1.0 - inputs.V * delta,
        confidence_abs=1.0 - (inputs.V + 1) * delta,
        inputs=inputs,
        train_loss_svm=tr_loss_svm,
        train_loss_fga=tr_loss_fga,
        test_loss_svm=te_loss_svm,
        test_loss_fga=te_loss_fga,
        train_sse_svm=sse(pred_tr_svm, train.targets),
        train_sse_fga=sse(pred_tr_fga, train.targets),
        test_sse_svm=sse(pred_te_svm, test.targets),
        test_sse_fga=sse(pred_te_fga, test.targets),
        degenerate=bool(r <= 0.0),
    )


@dataclass(frozen=True)
class LooResult:
    """Leave-one-out run for a single trainer: per-removal error-vector
    distances and their mean."""

    per_removal_norms: np.ndarray
    mean_norm: float


def loo_stability(ds: Dataset, trainer, probe: Dataset) -> LooResult:
    """Retrain with each training row removed and measure ||e - e_i|| on the probe set.

    `trainer` maps a Dataset to a prediction function over feature matrices;
    e is the probe error vector of the full-data model and e_i that of the
    model trained without row i. Removals are independent and may run in
    parallel; aggregation is by input index.
    """
    m = ds.n_samples
    if m < 2:
        raise ConfigError(f"need at least two rows for leave-one-out, got {m}")
    predict_full = trainer(ds)
    e_full = np.asarray(predict_full(probe.features), dtype=float) - probe.targets

    def run_one(i: int) -> float:
        keep = np.ones(m, dtype=bool)
        keep[i] = False
        ds_i = Dataset(
            ds.features[keep], ds.targets[keep], ds.feature_names, name=f"{ds.name}\\{i}"
        )
        predict_i = trainer(ds_i)
        e_i = np.asarray(predict_i(probe.features), dtype=float) - probe.targets
        return float(np.linalg.norm(e_full - e_i))

    norms = np.array(run_indexed(run_one, range(m)))
    return LooResult(per_removal_norms=norms, mean_norm=float(norms.mean()))


@dataclass(frozen=True)
class StabilityReport:
    """Paired SVM/graph leave-one-out results with their mean-norm ratio."""

    svm: LooResult
    fga: LooResult
    ratio: float
    predicted_beta: float


def predicted_beta(graph: FeatureGraph, node_betas: dict[tuple[int, int], float], beta_svm: float) -> float:
    """Stability prediction: the SVM term plus each retrained node's beta
    scaled by the product of edge weights on its path to the root.

    node_betas must cover exactly the retrained nodes; the edge weight from a
    node to its parent is the parent's coefficient for that input.
    """
    total = float(beta_svm)
    n_layers = graph.layout.n_layers
    for l, layer in enumerate(graph.nodes):
        for p, node in enumerate(layer):
            if not node.retrained:
                continue
            if (l, p) not in node_betas:
                raise ConfigError(f"missing beta for retrained node ({l}, {p})")
            weight = 1.0
            cl, cp = l, p
            while cl < n_layers - 1:
                parent_pos = graph.parent_position(cl, cp)
                parent = graph.nodes[cl + 1][parent_pos]
                weight *= float(parent.model.weights[cp - parent_pos * graph.layout.M])
                cl, cp = cl + 1, parent_pos
            total += node_betas[(l, p)] * weight
    return total


def stability_report(
    ds: Dataset,
    svm_trainer,
    fga_trainer,
    probe: Dataset,
    graph: FeatureGraph | None = None,
    beta_svm: float | None = None,
) -> StabilityReport:
    """Run the LOO harness for both trainers and combine.

    When a trained graph is supplied, the predicted beta uses the doubling
    heuristic: each retrained node contributes an equal share of the SVM's
    observed instability, scaled by its path weights.
    """
    svm_res = loo_stability(ds, svm_trainer, probe)
    fga_res = loo_stability(ds, fga_trainer, probe)
    denom = svm_res.mean_norm
    ratio = fga_res.mean_norm / denom if denom > 0 else float("inf")
    predicted = float("nan")
    if graph is not None:
        base = svm_res.mean_norm if beta_svm is None else beta_svm
        share = base / max(1, graph.layout.layer_sizes[0])
        betas = {
            (l, p): share
            for l, layer in enumerate(graph.nodes)
            for p, node in enumerate(layer)
            if node.retrained
        }
        predicted = predicted_beta(graph, betas, base)
    return StabilityReport(svm=svm_res, fga=fga_res, ratio=ratio, predicted_beta=predicted)


@dataclass(frozen=True)
class ComplexityResult:
    feature_counts: tuple[int, ...]
    times: tuple[float, ...]
    slope: float
    intercept: float
    max_abs_residual: float
    noisy: bool


def complexity_probe(
    Ds,
    m: int = 200,
    M: int = 4,
    trials: int = 3,
    seed: int = 0,
    sweep_fn=None,
    residual_threshold: float = 0.35,
) -> ComplexityResult:
    """Time one loss-optimised sweep per feature count and fit a log-log slope.

    Setup (data generation, scaling, the seed SVM fit) happens outside the
    timed region; permutation search is excluded entirely. Each point takes
    the best of `trials` runs. A custom sweep_fn(D) may be injected, e.g. to
    calibrate the probe with a known-complexity stub. When the log-log fit
    residuals exceed residual_threshold the result is flagged noisy.
    """
    Ds = sorted(int(d) for d in Ds)
    if len(set(Ds)) < 3:
        raise ConfigError("need at least three distinct feature counts")
    if trials < 1:
        raise ConfigError("need at least one timing trial")
    times = []
    for D in Ds:
        if sweep_fn is None:
            ds = gen_synthetic(D, m, p=2, seed=seed + D)
            std = fit_standardizer(ds)
            ds = apply_standardizer(std, ds)
            C = 1.0
            # budgeted inner solves keep per-node cost flat across D
            cfg = SvrConfig(C=C, epsilon=0.1, tol=auto_tol(ds.targets, C), max_passes=300)
            svm = svr_train(ds.features, ds.targets, cfg).model
            tcfg = TrainConfig(epsilon_stop=1e-4, max_sweeps=1, svr=cfg, seed=seed)
            perm = np.arange(D)

            def run(D=D, ds=ds, svm=svm, tcfg=tcfg, perm=perm):
                train_loss_optimized(ds, svm, M, perm, tcfg)

        else:

            def run(D=D):
                sweep_fn(D)

        best = math.inf
        for _ in range(trials):
            t0 = time.perf_counter()
            run()
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    logd = np.log(np.array(Ds, dtype=float))
    logt = np.log(np.array(times))
    slope, intercept = np.polyfit(logd, logt, 1)
    resid = logt - (slope * logd + intercept)
    max_resid = float(np.max(np.abs(resid)))
    return ComplexityResult(
        feature_counts=tuple(Ds),
        times=tuple(times),
        slope=float(slope),
        intercept=float(intercept),
        max_abs_residual=max_resid,
        noisy=bool(max_resid > residual_threshold),
    )
