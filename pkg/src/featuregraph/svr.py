"""Linear epsilon-insensitive support vector regression.

Solves the standard primal

    min_{w, b}  0.5 ||w||^2 + C * sum_i max(0, |w.x_i + b - y_i| - eps)

through its dual: 2m box-constrained variables (alpha_i, alpha_i*) coupled by
the bias equality constraint sum(alpha - alpha*) = 0. The solver performs
coordinate descent over the paired dual variables; every update moves along a
two-variable feasible direction that keeps the constraint satisfied and is
minimized exactly. Pairs are chosen deterministically: the maximal KKT
violator, with its partner picked by the second-order rule (ties broken by
index). The bias never enters the dual iteration and is recovered afterwards
from the exact one-dimensional minimizer of the epsilon-insensitive loss
given w (the standard KKT-interval rule lands in the same flat interval; we
take its midpoint).

Termination is on the exact duality gap. A projected-gradient reference
solver for the identical dual QP (`qp_oracle_train`) is provided for tests
and benchmarks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, NumericError

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


DEFAULT_C_GRID = tuple(2.0**k for k in range(-2, 6))
WIDE_C_GRID = tuple(10.0**k for k in range(-10, 11))


@dataclass(frozen=True)
class SvrConfig:
    """Solver settings: box constraint C, tube half-width, gap tolerance, pass cap."""

    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-6
    max_passes: int = 10_000

    def __post_init__(self):
        if not (self.C > 0):
            raise ConfigError(f"C must be positive, got {self.C}")
        if not (self.epsilon >= 0):
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        if not (self.tol > 0):
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_passes < 1:
            raise ConfigError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass(frozen=True)
class LinearModel:
    """Affine predictor x -> weights . x + bias."""

    weights: np.ndarray
    bias: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1).copy()
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise NumericError("linear model has non-finite coefficients")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.weights.size

    def predict(self, X: np.ndarray) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            if X.size != self.dim:
                raise DataError(f"model dimension {self.dim}, input dimension {X.size}")
            return float(np.dot(X, self.weights) + self.bias)
        if X.shape[1] != self.dim:
            raise DataError(f"model dimension {self.dim}, input dimension {X.shape[1]}")
        return X @ self.weights + self.bias


@dataclass(frozen=True)
class SvrTrainResult:
    model: LinearModel
    primal_objective: float
    dual_objective: float
    duality_gap: float
    passes_used: int


def svr_predict(model: LinearModel, x) -> float:
    """Evaluate w . x + b for a single input vector."""
    return float(model.predict(np.asarray(x, dtype=float).reshape(-1)))


@njit(cache=True, nogil=True)
def _opt_bias(residuals, eps):
    """Exact minimizer over b of sum_i max(0, |r_i + b| - eps).

    The loss is convex piecewise linear in b with breakpoints at -r_i +- eps;
    its slope rises by one per crossed breakpoint from -m, so the minimum is
    flat between the m-th and (m+1)-th smallest breakpoints. Returns the
    midpoint of that interval.
    """
    m = residuals.shape[0]
    bp = np.empty(2 * m)
    for i in range(m):
        bp[i] = -residuals[i] - eps
        bp[m + i] = -residuals[i] + eps
    bp.sort()
    return 0.5 * (bp[m - 1] + bp[m])


@njit(cache=True, nogil=True)
def _pair_step(a, beta, G, K, Kd, C, eps, m):
    """One exact minimization along the maximal-violating pair direction.

    Variables 0..m-1 are alpha (constraint sign +1), m..2m-1 are alpha*
    (sign -1). The "up" index is the feasible variable with the largest KKT
    score, its partner is picked by the second-order rule (violation squared
    over direction curvature). A positive step moves the up variable along
    its constraint sign and the partner against it, preserving the bias
    constraint. Returns 1 if the dual point moved.
    """
    n = 2 * m
    tau = 1e-12
    # score_t = -p_t * grad_t; grad = [G + eps, -G + eps]
    best_up = -1e300
    u = -1
    for t in range(n):
        if t < m:
            if a[t] >= C:
                continue
            s = -(G[t] + eps)
        else:
            if a[t] <= 0.0:
                continue
            s = -G[t - m] + eps
        if s > best_up:
            best_up = s
            u = t
    if u < 0:
        return 0
    i = u if u < m else u - m
    best_gain = 0.0
    best_viol = 0.0
    v = -1
    for t in range(n):
        if t < m:
            if a[t] <= 0.0:
                continue
            s = -(G[t] + eps)
            j_t = t
        else:
            if a[t] >= C:
                continue
            s = -G[t - m] + eps
            j_t = t - m
        viol = best_up - s
        if viol <= 1e-12:
            continue
        eta = Kd[i] + Kd[j_t] - 2.0 * K[i, j_t]
        if eta < tau:
            eta = tau
        gain = viol * viol / eta
        if gain > best_gain:
            best_gain = gain
            best_viol = viol
            v = t
    if v < 0:
        return 0
    j = v if v < m else v - m
    # box room along the direction
    lim_u = (C - a[u]) if u < m else a[u]
    lim_v = a[v] if v < m else (C - a[v])
    lim = lim_u if lim_u < lim_v else lim_v
    if lim <= 0.0:
        return 0
    eta = Kd[i] + Kd[j] - 2.0 * K[i, j]
    if eta > 1e-15:
        step = best_viol / eta
        if step > lim:
            step = lim
    else:
        step = lim
    # apply: up variable moves along its sign, the partner against it
    if u < m:
        a[u] += step
    else:
        a[u] -= step
    if v < m:
        a[v] -= step
    else:
        a[v] += step
    beta[i] += step
    beta[j] -= step
    for t in range(m):
        G[t] += step * (K[i, t] - K[j, t])
    return 1


@njit(cache=True, nogil=True)
def _smo_core(K, y, C, eps, tol, max_passes):
    """Run paired-variable dual coordinate descent until the gap reaches tol.

    A pass is one block of 2m pair updates followed by an exact gradient
    recompute (which kills incremental drift) and a duality-gap check.
    """
    m = y.shape[0]
    n = 2 * m
    a = np.zeros(n)
    beta = np.zeros(m)
    G = -y.copy()
    Kd = np.empty(m)
    for t in range(m):
        Kd[t] = K[t, t]
    passes = 0
    b = 0.0
    P = 0.0
    D = 0.0
    gap = 1e300
    while passes < max_passes:
        moved = 0
        for _ in range(n):
            stepped = _pair_step(a, beta, G, K, Kd, C, eps, m)
            if stepped == 0:
                break
            moved += 1
        passes += 1
        G = K @ beta - y
        norm_sq = np.dot(beta, G + y)
        b = _opt_bias(G, eps)
        loss = 0.0
        for t in range(m):
            excess = abs(G[t] + b) - eps
            if excess > 0.0:
                loss += excess
        P = 0.5 * norm_sq + C * loss
        D = -(0.5 * norm_sq + eps * np.sum(a) - np.dot(y, beta))
        gap = P - D
        if gap <= tol or moved == 0:
            break
    return a, beta, b, P, D, gap, passes


def _validate_xy(X, y):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2:
        raise DataError(f"X must be 2-d, got ndim={X.ndim}")
    m, d = X.shape
    if m < 1 or d < 1:
        raise DataError(f"need m >= 1 and d >= 1, got shape {X.shape}")
    if y.shape != (m,):
        raise DataError(f"y must have shape ({m},), got {y.shape}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DataError("non-finite values in training data")
    return X, y


def svr_train(X, y, cfg: SvrConfig) -> SvrTrainResult:
    """Train a linear eps-SVR by paired dual coordinate descent.

    Fully deterministic (greedy pair selection with index tie-breaks).
    Returns when the duality gap drops to cfg.tol or the pass budget runs
    out; degenerate data (constant targets, all-identical or all-zero rows)
    resolves at the initial dual point with w = 0 and the tube-centred bias.
    """
    X, y = _validate_xy(X, y)
    K = X @ X.T
    a, beta, b, P, D, gap, passes = _smo_core(
        K, y, float(cfg.C), float(cfg.epsilon), float(cfg.tol), int(cfg.max_passes)
    )
    w = X.T @ beta
    model = LinearModel(weights=w, bias=b)
    return SvrTrainResult(
        model=model,
        primal_objective=float(P),
        dual_objective=float(D),
        duality_gap=float(gap),
        passes_used=int(passes),
    )


def _project_box_hyperplane(v, C, signs):
    """Project v onto {0 <= a <= C, signs . a = 0} by bisection on the shift."""
    B = float(np.max(np.abs(v))) + C + 1.0
    lo, hi = -B, B

    def shifted(lam):
        return np.clip(v - lam * signs, 0.0, C)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.dot(signs, shifted(mid)) > 0.0:
            lo = mid
        else:
            hi = mid
    return shifted(0.5 * (lo + hi))


def qp_oracle_train(X, y, cfg: SvrConfig, max_iter: int = 500_000) -> SvrTrainResult:
    """Solve the identical dual QP by projected gradient descent (dense, m <= 50).

    Accelerated projected gradient with monotone restarts; runs to duality
    gap <= cfg.tol / 10. Test and benchmark oracle only.
    """
    X, y = _validate_xy(X, y)
    m, _ = X.shape
    if m > 50:
        raise ConfigError(f"qp_oracle_train is a dense method for m <= 50, got m={m}")
    C, eps = float(cfg.C), float(cfg.epsilon)
    target_gap = float(cfg.tol) / 10.0
    K = X @ X.T
    lam_max = float(np.linalg.eigvalsh(K)[-1]) if m > 1 else float(K[0, 0])
    L = max(2.0 * lam_max, 1e-10)
    signs = np.concatenate([np.ones(m), -np.ones(m)])

    def dual_value_terms(a):
        beta = a[:m] - a[m:]
        G = K @ beta - y
        norm_sq = float(np.dot(beta, G + y))
        F = 0.5 * norm_sq + eps * float(np.sum(a)) - float(np.dot(y, beta))
        return beta, G, norm_sq, F

    def gap_at(a):
        beta, G, norm_sq, F = dual_value_terms(a)
        b = float(_opt_bias(G, eps))
        P = 0.5 * norm_sq + C * float(np.sum(np.maximum(0.0, np.abs(G + b) - eps)))
        return P, -F, b, beta

    a = np.zeros(2 * m)
    v = a.copy()
    theta = 1.0
    _, _, _, F_prev = dual_value_terms(a)
    best = gap_at(a) + (a.copy(),)
    it = 0
    while it < max_iter:
        beta_v = v[:m] - v[m:]
        G_v = K @ beta_v - y
        grad = np.concatenate([G_v + eps, -G_v + eps])
        a_next = _project_box_hyperplane(v - grad / L, C, signs)
        theta_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
        v = a_next + ((theta - 1.0) / theta_next) * (a_next - a)
        a = a_next
        theta = theta_next
        it += 1
        if it % 25 == 0 or it == max_iter:
            _, _, _, F_now = dual_value_terms(a)
            if F_now > F_prev:  # lost monotonicity: restart momentum
                v = a.copy()
                theta = 1.0
            F_prev = F_now
            P, Dv, b, beta = gap_at(a)
            if P - Dv < best[0] - best[1]:
                best = (P, Dv, b, beta, a.copy())
            if P - Dv <= target_gap:
                break
    P, Dv, b, beta = best[:4]
    w = X.T @ beta
    return SvrTrainResult(
        model=LinearModel(weights=w, bias=b),
        primal_objective=float(P),
        dual_objective=float(Dv),
        duality_gap=float(P - Dv),
        passes_used=it,
    )


def auto_tol(y, C: float, rel: float = 1e-6) -> float:
    """Absolute duality-gap tolerance scaled to the problem's objective size.

    The scale proxy is the primal loss of the best constant predictor, so the
    returned tolerance asks for roughly `rel` relative accuracy.
    """
    y = np.asarray(y, dtype=float)
    scale = C * float(np.sum(np.abs(y - np.median(y))))
    return rel * max(1.0, scale)


def tune_c(
    X,
    y,
    grid=DEFAULT_C_GRID,
    k: int = 5,
    seed: int = 0,
    epsilon: float = 0.1,
    tol: float | None = None,
    max_passes: int = 10_000,
) -> tuple[float, np.ndarray]:
    """Pick C from the grid by k-fold cross-validation on summed squared error.

    Folds come from a seeded shuffle; the score per C is the mean over folds
    of the validation SSE. Exact ties go to the smaller C.
    """
    X, y = _validate_xy(X, y)
    m = X.shape[0]
    grid = [float(c) for c in grid]
    if not grid:
        raise ConfigError("C grid is empty")
    if any(c <= 0 for c in grid):
        raise ConfigError("C grid values must be positive")
    if k < 2 or k > m:
        raise ConfigError(f"fold count k must be in [2, {m}], got {k}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    folds = np.array_split(order, k)
    cv_errors = np.empty(len(grid))
    for gi, C in enumerate(grid):
        cfg = SvrConfig(
            C=C,
            epsilon=epsilon,
            tol=auto_tol(y, C) if tol is None else tol,
            max_passes=max_passes,
        )
        fold_err = 0.0
        for fold in folds:
            mask = np.ones(m, dtype=bool)
            mask[fold] = False
            res = svr_train(X[mask], y[mask], cfg)
            pred = res.model.predict(X[fold])
            fold_err += float(np.sum((pred - y[fold]) ** 2))
        cv_errors[gi] = fold_err / k
    best_i = min(range(len(grid)), key=lambda i: (cv_errors[i], grid[i]))
    return grid[best_i], cv_errors
