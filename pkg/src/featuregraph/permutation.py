"""Feature-permutation optimisation.

Correlated features can be steered into the same leaf group (good when upper
layers get trained) or spread across groups (good for mostly-shallow trained
graphs); both orderings are available. A randomized search runs the
loss-optimised trainer under many seeded permutations and keeps the one with
the lowest training SSE. Correlation significance uses the exact two-sided
t-test p-value via the regularized incomplete beta function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from ._parallel import run_indexed
from .dataset import Dataset
from .errors import ConfigError, DataError, NumericError
from .graph import FeatureGraph, build_layout, evaluate_batch
from .svr import LinearModel
from .training import TrainConfig, TrainReport, sse, train_loss_optimized


def pearson(a, b) -> float:
    """Sample Pearson correlation; 0 when either vector is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError(f"need equal-length vectors, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise DataError("need at least two samples")
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt(np.dot(da, da)))
    nb = float(np.sqrt(np.dot(db, db)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    r = float(np.dot(da, db) / (na * nb))
    return max(-1.0, min(1.0, r))


def corr_pvalue(r: float, n: int) -> float:
    """Two-sided p-value for a sample correlation r at sample size n.

    Uses t = r sqrt((n-2)/(1-r^2)) against the t distribution with n-2
    degrees of freedom; the tail probability is the regularized incomplete
    beta I_x(nu/2, 1/2) at x = nu / (nu + t^2).
    """
    if n < 3:
        raise ConfigError(f"need n >= 3 for a p-value, got {n}")
    if not np.isfinite(r) or abs(r) > 1 + 1e-12:
        raise DataError(f"correlation must lie in [-1, 1], got {r}")
    r = max(-1.0, min(1.0, float(r)))
    if abs(r) == 1.0:
        return 0.0
    nu = n - 2
    t_sq = r * r * nu / (1.0 - r * r)
    x = nu / (nu + t_sq)
    return float(betainc(nu / 2.0, 0.5, x))


def correlation_matrices(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise Pearson r and two-sided p-values for the columns of X.

    With fewer than three rows no test is possible; p defaults to 1
    off-diagonal. Diagonal entries are r = 1, p = 0.
    """
    X = np.asarray(X, dtype=float)
    m, D = X.shape
    R = np.eye(D)
    P = np.zeros((D, D))
    for i in range(D):
        for j in range(i + 1, D):
            r = pearson(X[:, i], X[:, j]) if m >= 2 else 0.0
            p = corr_pvalue(r, m) if m >= 3 else 1.0
            R[i, j] = R[j, i] = r
            P[i, j] = P[j, i] = p
    return R, P


@dataclass(frozen=True)
class CorrelationStats:
    """First-layer block correlation summary for one permutation."""

    pairwise_r: np.ndarray
    pairwise_p: np.ndarray
    sig_count: int
    sig_p_sum: float
    sig_r_mean: float


def adjacent_sig_stats(ds: Dataset, perm, M: int, alpha: float = 0.05) -> CorrelationStats:
    """Count significant correlations among features sharing a leaf group.

    Considers every unordered pair within each first-layer block under the
    permutation; a pair is significant when its p-value is below alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    perm = np.asarray(perm, dtype=int)
    layout = build_layout(ds.n_features, M)
    R, P = correlation_matrices(ds.features)
    count = 0
    p_sum = 0.0
    r_abs = []
    for slots in layout.leaf_groups:
        feats = [int(perm[s]) for s in slots]
        for a_i in range(len(feats)):
            for b_i in range(a_i + 1, len(feats)):
                fa, fb = feats[a_i], feats[b_i]
                if P[fa, fb] < alpha:
                    count += 1
                    p_sum += float(P[fa, fb])
                    r_abs.append(abs(float(R[fa, fb])))
    mean_r = float(np.mean(r_abs)) if r_abs else 0.0
    return CorrelationStats(
        pairwise_r=R, pairwise_p=P, sig_count=count, sig_p_sum=p_sum, sig_r_mean=mean_r
    )


def heuristic_permutation(ds: Dataset, M: int, mode: str = "correlate") -> np.ndarray:
    """Greedy correlation-driven feature ordering for the leaf groups.

    "correlate" (default): each new group is seeded with the unassigned
    feature having the largest |r| to any other unassigned feature, then
    filled with the features most correlated to that seed; groups are then
    ordered so the mean |r| to out-of-group features decreases toward later
    block positions. "decorrelate" inverts the choices, building internally
    decorrelated groups for the mostly-shallow training regime. Ties go to
    the lowest feature index; a short remainder group always stays last so
    blocks align with the layout.
    """
    D = ds.n_features
    if D < 2:
        raise ConfigError("need at least two features to permute")
    if mode not in ("correlate", "decorrelate"):
        raise ConfigError(f"unknown heuristic mode {mode!r}")
    R, _ = correlation_matrices(ds.features)
    A = np.abs(R)
    np.fill_diagonal(A, 0.0)
    unassigned = list(range(D))
    groups: list[list[int]] = []
    while unassigned:
        if len(unassigned) == 1:
            groups.append([unassigned.pop()])
            break
        sub = A[np.ix_(unassigned, unassigned)]
        peak = sub.max(axis=1)
        if mode == "correlate":
            seed_local = int(np.argmax(peak))
        else:
            seed_local = int(np.argmin(peak))
        seed = unassigned[seed_local]
        unassigned.remove(seed)
        group = [seed]
        while len(group) < M and unassigned:
            if mode == "correlate":
                scores = [A[seed, f] for f in unassigned]
                pick_local = int(np.argmax(scores))
            else:
                scores = [max(A[g, f] for g in group) for f in unassigned]
                pick_local = int(np.argmin(scores))
            group.append(unassigned.pop(pick_local))
        groups.append(group)

    def inter_group_score(g: list[int]) -> float:
        outside = [f for f in range(D) if f not in g]
        if not outside:
            return 0.0
        return float(np.mean(A[np.ix_(g, outside)]))

    full = [g for g in groups if len(g) == M]
    short = [g for g in groups if len(g) < M]
    reverse = mode == "correlate"
    full.sort(key=lambda g: ((-inter_group_score(g)) if reverse else inter_group_score(g), min(g)))
    ordered = full + short
    return np.array([f for g in ordered for f in g], dtype=int)


@dataclass(frozen=True)
class PermTrial:
    index: int
    seed: int | None  # None marks the heuristic trial
    train_sse: float


@dataclass
class PermSearchResult:
    best_perm: np.ndarray
    best_train_sse: float
    best_test_sse: float | None
    trials: list[PermTrial]
    best_graph: FeatureGraph
    best_report: TrainReport
    best_index: int


def random_perm_search(
    ds: Dataset,
    svm: LinearModel,
    M: int,
    cfg: TrainConfig,
    n_perms: int,
    seed: int,
    test: Dataset | None = None,
) -> PermSearchResult:
    """Train under n_perms permutations and keep the lowest training SSE.

    Trial 0 is always the correlation heuristic; the remaining trials are
    seeded Fisher-Yates shuffles. Deterministic under a fixed seed, and the
    argmin (ties to the lowest trial index) does not depend on evaluation
    order, so trials may run in parallel.
    """
    if n_perms < 1:
        raise ConfigError(f"need n_perms >= 1, got {n_perms}")
    D = ds.n_features
    if D >= 2:
        perms = [heuristic_permutation(ds, M)]
    else:
        perms = [np.arange(D)]
    root = np.random.default_rng(seed)
    trial_seeds: list[int | None] = [None]
    for _ in range(n_perms - 1):
        s = int(root.integers(0, 2**63 - 1))
        trial_seeds.append(s)
        perms.append(np.random.default_rng(s).permutation(D))

    def run_one(item):
        idx, perm = item
        graph, report = train_loss_optimized(ds, svm, M, perm, cfg)
        return graph, report

    results = run_indexed(run_one, list(enumerate(perms)))
    trials = [
        PermTrial(index=i, seed=trial_seeds[i], train_sse=rep.final_error)
        for i, (_, rep) in enumerate(results)
    ]
    best_i = min(range(len(trials)), key=lambda i: (trials[i].train_sse, i))
    best_graph, best_report = results[best_i]
    best_test = None
    if test is not None:
        best_test = sse(evaluate_batch(best_graph, test.features), test.targets)
    return PermSearchResult(
        best_perm=perms[best_i],
        best_train_sse=trials[best_i].train_sse,
        best_test_sse=best_test,
        trials=trials,
        best_graph=best_graph,
        best_report=best_report,
        best_index=best_i,
    )


@dataclass(frozen=True)
class PairingWitness:
    """Two second-layer pairings of four unit feature vectors with equal
    target alignment, and their uniform-weight residual errors."""

    corr_12_34: float
    corr_13_24: float
    err_12_34: float
    err_13_24: float


def theorem3_witness(n: int, seed: int, max_tries: int = 50) -> PairingWitness:
    """Build the four-vector pairing example and evaluate both residual errors.

    Draws four unit vectors in R^n adjusted to share the same inner product K
    with a unit target Y. The pair combination with the smaller mutual inner
    product plays the (12, 34) role and the other the (13, 24) role; each
    uniform-weight residual error ||Y - Xa - Xb||^2 expands to
    3 - 4K + 2<Xa, Xb>, so the error difference equals exactly twice the
    inner-product difference and the lower-correlation pairing never loses.
    """
    if n < 4:
        raise ConfigError(f"need n >= 4, got {n}")
    rng = np.random.default_rng(seed)
    K_target = 0.4
    for _ in range(max_tries):
        Y = rng.standard_normal(n)
        ny = np.linalg.norm(Y)
        if ny < 1e-12:
            continue
        Y /= ny
        xs = []
        for _ in range(4):
            v = rng.standard_normal(n)
            v_perp = v - np.dot(v, Y) * Y
            norm = np.linalg.norm(v_perp)
            if norm < 1e-9:
                break
            xs.append(np.sqrt(1.0 - K_target**2) * v_perp / norm + K_target * Y)
        if len(xs) != 4:
            continue
        x_a1, x_a2, x_b1, x_b2 = xs
        c_a = float(np.dot(x_a1, x_a2))
        c_b = float(np.dot(x_b1, x_b2))
        if c_a > c_b:
            (x_a1, x_a2, x_b1, x_b2) = (x_b1, x_b2, x_a1, x_a2)
            c_a, c_b = c_b, c_a
        r_a = Y - x_a1 - x_a2
        r_b = Y - x_b1 - x_b2
        return PairingWitness(
            corr_12_34=c_a,
            corr_13_24=c_b,
            err_12_34=float(np.dot(r_a, r_a)),
            err_13_24=float(np.dot(r_b, r_b)),
        )
    raise NumericError(f"could not build a non-degenerate witness after {max_tries} tries")
