"""Training algorithms for feature graphs, plus error metrics and baselines.

Two strategies:

* layer-based: every node is fitted bottom-up against the raw target, layer
  outputs feeding the next layer; kept as a reference variant.
* loss-optimised: the graph starts as an exact copy of a tuned shallow SVM,
  then nodes are retrained one at a time against a mean-preserving scaled
  target. A candidate is kept only when it strictly lowers the global
  training SSE, so the error trace is non-increasing by construction and the
  final graph is never worse than the seed SVM on the training set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, DataError, NumericError
from .graph import (
    FeatureGraph,
    build_layout,
    forward_outputs,
    init_from_svm,
    node_inputs,
)
from .svr import LinearModel, SvrConfig, auto_tol, svr_train, tune_c, DEFAULT_C_GRID


def sse(predictions, targets) -> float:
    """Sum of squared errors; the headline training/test metric."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape or p.size == 0:
        raise DataError(f"prediction/target shape mismatch: {p.shape} vs {t.shape}")
    return float(np.sum((p - t) ** 2))


def l2_norm(predictions, targets) -> float:
    return float(np.sqrt(sse(predictions, targets)))


def rmse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=float)
    return float(np.sqrt(sse(predictions, targets) / p.size))


def eps_insensitive_loss(predictions, targets, epsilon: float) -> float:
    """Mean epsilon-insensitive loss: zero inside the tube, linear outside."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape or p.size == 0:
        raise DataError(f"prediction/target shape mismatch: {p.shape} vs {t.shape}")
    return float(np.mean(np.maximum(0.0, np.abs(p - t) - epsilon)))


def scaled_target(y, node_mean: float, target_mean: float) -> np.ndarray:
    """Rescale y so its mean matches the node's current output mean.

    Falls back to the raw target when the target mean is (numerically) zero.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DataError("empty target vector")
    if abs(target_mean) > 1e-12:
        return y * (node_mean / target_mean)
    return y.copy()


@dataclass(frozen=True)
class TrainConfig:
    """Sweep control: relative-improvement stop, sweep cap, node solver settings."""

    epsilon_stop: float = 1e-4
    max_sweeps: int = 10
    svr: SvrConfig = field(default_factory=SvrConfig)
    seed: int = 0

    def __post_init__(self):
        if not (self.epsilon_stop > 0):
            raise ConfigError(f"epsilon_stop must be positive, got {self.epsilon_stop}")
        if self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


@dataclass(frozen=True)
class UpdateRecord:
    sweep: int
    node: tuple[int, int]
    candidate_error: float
    accepted: bool


@dataclass
class TrainReport:
    initial_error: float
    updates: list[UpdateRecord]
    final_error: float
    sweeps_run: int
    retrained_count: int

    def accepted_errors(self) -> list[float]:
        return [u.candidate_error for u in self.updates if u.accepted]


def _node_svr_config(base: SvrConfig, node_mean: float, target_mean: float) -> SvrConfig:
    """Node solver settings under target rescaling.

    The retraining target is y scaled by s = node_mean / target_mean, so the
    tube half-width scales by |s|; otherwise a fixed tube would act 1/|s|
    wider on a downscaled target and smother the local fit. The gap tolerance
    also scales by |s| (the loss term dominates the objective scale), floored
    near machine precision. C carries over unchanged, matching the tuned
    shallow model.
    """
    if abs(target_mean) <= 1e-12:
        return base
    s = abs(node_mean / target_mean)
    if not np.isfinite(s) or s <= 1e-12:
        return base
    return SvrConfig(
        C=base.C,
        epsilon=base.epsilon * s,
        tol=max(base.tol * s, 1e-12),
        max_passes=base.max_passes,
    )


def _recompute_path(graph: FeatureGraph, X, outputs, layer: int, position: int) -> None:
    """Refresh the cached output of one node and of its ancestors."""
    l, p = layer, position
    while True:
        node = graph.nodes[l][p]
        Z = node_inputs(graph, X, outputs, l, p)
        outputs[l][p] = Z @ node.model.weights + node.model.bias
        if l == graph.layout.n_layers - 1:
            break
        p = graph.parent_position(l, p)
        l += 1


def _recompute_ancestors(graph: FeatureGraph, X, outputs, layer: int, position: int) -> None:
    """Refresh the cached outputs strictly above one node, leaving it as set."""
    l, p = layer, position
    while l < graph.layout.n_layers - 1:
        p = graph.parent_position(l, p)
        l += 1
        node = graph.nodes[l][p]
        Z = node_inputs(graph, X, outputs, l, p)
        outputs[l][p] = Z @ node.model.weights + node.model.bias


def _calibrate_node(graph: FeatureGraph, X, y, outputs, layer: int, position: int, model: LinearModel) -> LinearModel:
    """Affine output recalibration of a candidate node model.

    The graph output is affine in any single node's output, so the global
    training SSE as a function of a rescale a*f(x) + b of the candidate is a
    two-parameter least-squares problem; solving it exactly keeps the node
    linear while aligning its output scale and offset with what the layers
    above actually propagate. The epsilon-insensitive node fit sits at an
    L1-flavoured optimum whose offset and gain are systematically off for
    the squared-error accept metric; this closes that gap. Falls back to the
    raw candidate on degenerate geometry (dead upstream path, constant node
    output).
    """
    Z = node_inputs(graph, X, outputs, layer, position)
    z_new = Z @ model.weights + model.bias
    outputs[layer][position] = z_new
    _recompute_ancestors(graph, X, outputs, layer, position)
    out0 = outputs[-1][0].copy()
    outputs[layer][position] = z_new + 1.0
    _recompute_ancestors(graph, X, outputs, layer, position)
    out1 = outputs[-1][0]
    g = float(np.mean(out1 - out0))
    if not np.isfinite(g) or abs(g) < 1e-12:
        return model
    r = out0 - g * z_new
    u = g * z_new
    t = y - r
    # normal equations for t ~ a*u + b*g
    suu = float(np.dot(u, u))
    su = float(np.sum(u))
    n = float(u.size)
    det = suu * (g * g * n) - (g * su) ** 2
    if not np.isfinite(det) or abs(det) < 1e-12 * max(1.0, suu) * (g * g):
        return model
    sut = float(np.dot(u, t))
    st = float(np.sum(t))
    a = (sut * (g * g * n) - g * su * g * st) / det
    b = (suu * g * st - g * su * sut) / det
    if not (np.isfinite(a) and np.isfinite(b)):
        return model
    return LinearModel(a * model.weights, a * model.bias + b)


def train_loss_optimized(
    ds: Dataset,
    svm: LinearModel,
    M: int,
    perm,
    cfg: TrainConfig,
) -> tuple[FeatureGraph, TrainReport]:
    """Selective node retraining with accept/revert against global training SSE.

    The graph is initialised to reproduce the seed SVM exactly, so the
    initial error equals the SVM's. Sweeps walk layers bottom-up and node
    positions left to right; each node is refitted by SVR against the target
    rescaled to the node's current output mean, using the node's current
    inputs, and the refit's output is affinely recalibrated to the global
    squared-error metric before the accept check. An update is kept only
    when the recomputed training SSE strictly improves on the best seen,
    which makes final <= initial an identity rather than an approximation.
    """
    X, y = ds.features, ds.targets
    layout = build_layout(ds.n_features, M)
    graph = init_from_svm(layout, svm, perm)
    outputs = forward_outputs(graph, X)
    best = sse(outputs[-1][0], y)
    initial = best
    ybar = float(np.mean(y))
    updates: list[UpdateRecord] = []
    sweeps_run = 0
    for sweep in range(cfg.max_sweeps):
        sweep_start = best
        accepted_any = False
        for l in range(layout.n_layers):
            for p in range(layout.layer_sizes[l]):
                node = graph.nodes[l][p]
                Z = node_inputs(graph, X, outputs, l, p)
                node_mean = float(np.mean(outputs[l][p]))
                y_s = scaled_target(y, node_mean, ybar)
                snapshot = (node.model, node.retrained)
                fitted = svr_train(Z, y_s, _node_svr_config(cfg.svr, node_mean, ybar)).model
                node.model = _calibrate_node(graph, X, y, outputs, l, p, fitted)
                _recompute_path(graph, X, outputs, l, p)
                candidate = sse(outputs[-1][0], y)
                accepted = candidate < best
                updates.append(UpdateRecord(sweep, (l, p), candidate, accepted))
                if accepted:
                    best = candidate
                    node.retrained = True
                    accepted_any = True
                else:
                    node.model, node.retrained = snapshot
                    _recompute_path(graph, X, outputs, l, p)
        sweeps_run = sweep + 1
        if not accepted_any:
            break
        rel = (sweep_start - best) / max(sweep_start, 1e-300)
        if rel < cfg.epsilon_stop:
            break
    retrained = sum(1 for layer in graph.nodes for n in layer if n.retrained)
    report = TrainReport(
        initial_error=initial,
        updates=updates,
        final_error=best,
        sweeps_run=sweeps_run,
        retrained_count=retrained,
    )
    return graph, report


def train_layer_based(ds: Dataset, M: int, cfg: TrainConfig) -> tuple[FeatureGraph, TrainReport]:
    """Reference variant: fit every node bottom-up against the raw target.

    Sweeps repeat while the relative SSE improvement exceeds epsilon_stop
    (with a deterministic solver a second sweep reproduces the first, so two
    sweeps is the common case). The best-sweep graph is kept, so the reported
    final error never exceeds the first sweep's. Node updates are logged from
    the second sweep onward; during the first sweep the tree above a node
    does not exist yet, so no global error can be attached to it.
    """
    X, y = ds.features, ds.targets
    layout = build_layout(ds.n_features, M)
    # first sweep builds the graph
    graph = init_from_svm(layout, LinearModel(np.zeros(ds.n_features), 0.0), np.arange(ds.n_features))
    outputs = forward_outputs(graph, X)
    updates: list[UpdateRecord] = []
    for l in range(layout.n_layers):
        for p in range(layout.layer_sizes[l]):
            node = graph.nodes[l][p]
            Z = node_inputs(graph, X, outputs, l, p)
            node.model = svr_train(Z, y, cfg.svr).model
            node.retrained = True
            _recompute_path(graph, X, outputs, l, p)
    best = sse(outputs[-1][0], y)
    initial = best
    best_models = [[n.model for n in layer] for layer in graph.nodes]
    sweeps_run = 1
    for sweep in range(1, cfg.max_sweeps):
        sweep_start = best
        for l in range(layout.n_layers):
            for p in range(layout.layer_sizes[l]):
                node = graph.nodes[l][p]
                Z = node_inputs(graph, X, outputs, l, p)
                node.model = svr_train(Z, y, cfg.svr).model
                _recompute_path(graph, X, outputs, l, p)
                updates.append(UpdateRecord(sweep, (l, p), sse(outputs[-1][0], y), True))
        sweeps_run = sweep + 1
        err = sse(outputs[-1][0], y)
        if err < best:
            best = err
            best_models = [[n.model for n in layer] for layer in graph.nodes]
        rel = (sweep_start - err) / max(sweep_start, 1e-300)
        if rel < cfg.epsilon_stop:
            break
    for l, layer in enumerate(graph.nodes):
        for p, node in enumerate(layer):
            node.model = best_models[l][p]
    report = TrainReport(
        initial_error=initial,
        updates=updates,
        final_error=best,
        sweeps_run=sweeps_run,
        retrained_count=layout.n_nodes,
    )
    return graph, report


def svm_baseline(
    ds: Dataset,
    grid=DEFAULT_C_GRID,
    k: int = 5,
    seed: int = 0,
    epsilon: float = 0.1,
    max_passes: int = 10_000,
) -> tuple[LinearModel, float]:
    """Cross-validation tuned shallow SVM: tune_c then a full-data fit."""
    X, y = ds.features, ds.targets
    C, _ = tune_c(X, y, grid=grid, k=k, seed=seed, epsilon=epsilon, max_passes=max_passes)
    cfg = SvrConfig(C=C, epsilon=epsilon, tol=auto_tol(y, C), max_passes=max_passes)
    res = svr_train(X, y, cfg)
    return res.model, C


def linreg_baseline(ds: Dataset) -> LinearModel:
    """Ordinary least squares via the normal equations.

    Singular designs (duplicated or constant columns) get a ridge jitter of
    1e-10 on the Gram diagonal.
    """
    X, y = ds.features, ds.targets
    A = np.column_stack([X, np.ones(X.shape[0])])
    G = A.T @ A
    rhs = A.T @ y
    try:
        coef = np.linalg.solve(G, rhs)
        if not np.all(np.isfinite(coef)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(G + 1e-10 * np.eye(G.shape[0]), rhs)
    if not np.all(np.isfinite(coef)):
        raise NumericError("least-squares solve failed even with ridge jitter")
    return LinearModel(weights=coef[:-1], bias=float(coef[-1]))
