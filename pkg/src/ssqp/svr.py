"""nu-support-vector regression with an RBF kernel, trained by SMO.

The dual is solved over 2l variables (alpha, alpha*) subject to
sum(alpha - alpha*) = 0, sum(alpha + alpha*) = C * nu * l and box
constraints [0, C]. Working pairs are chosen within one block (maximal
violating pair), which preserves both equality constraints exactly; the
tube width and bias are recovered from the KKT conditions afterwards.

Feature scaling to the unit interval and (C, gamma) selection by v-fold
cross validation are provided alongside the bare solver.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Normalizer",
    "SvrHyperparams",
    "SvrModel",
    "train_nu_svr",
    "grid_search_cv",
    "fit_svr",
]

_BOUND_EPS = 1e-12
_SV_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class Normalizer:
    """Per-dimension min/max scaling into [0, 1], clamping out-of-range values.

    Dimensions that were constant during fitting map to 0.5.
    """

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValueError("normalization needs at least 2 training rows")
        return cls(lo=X.min(axis=0), hi=X.max(axis=0))

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        span = self.hi - self.lo
        flat = X.ndim == 1
        X2 = X[None, :] if flat else X
        out = np.where(span > 0, np.clip((X2 - self.lo) / np.where(span > 0, span, 1.0), 0.0, 1.0), 0.5)
        return out[0] if flat else out

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(lo=np.asarray(d["lo"], dtype=np.float64), hi=np.asarray(d["hi"], dtype=np.float64))


@dataclass(frozen=True)
class SvrHyperparams:
    """Search space for model selection; the defaults follow common grid
    practice for RBF kernels (powers of two)."""

    nu: float = 0.5
    C_grid: tuple = tuple(float(2.0**e) for e in range(-5, 17, 2))
    gamma_grid: tuple = tuple(float(2.0**e) for e in range(-15, 5, 2))
    cv_folds: int = 5

    def __post_init__(self):
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if len(self.C_grid) == 0 or len(self.gamma_grid) == 0:
            raise ValueError("hyperparameter grids must be non-empty")
        if min(self.C_grid) <= 0 or min(self.gamma_grid) <= 0:
            raise ValueError("grid values must be positive")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")


@dataclass(frozen=True, eq=False)
class SvrModel:
    """Trained regressor: f(x) = sum_i coeff_i K(sv_i, x) + bias.

    When norm_lo/norm_hi are set, inputs are min/max-scaled (and clamped)
    before kernel evaluation.
    """

    support_vectors: np.ndarray
    dual_coeffs: np.ndarray
    bias: float
    gamma: float
    norm_lo: np.ndarray = None
    norm_hi: np.ndarray = None
    nu: float = None
    c: float = None
    epsilon: float = None
    cv_mse: float = None
    n_train: int = 0

    @property
    def n_support(self):
        return self.support_vectors.shape[0]

    @property
    def dim(self):
        return self.support_vectors.shape[1]

    def _transform(self, X):
        if self.norm_lo is None:
            return X
        return Normalizer(self.norm_lo, self.norm_hi).apply(X)

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise ValueError(f"expected a feature vector of dimension {self.dim}, got shape {x.shape}")
        return float(self.predict_batch(x[None, :])[0])

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"expected rows of dimension {self.dim}, got shape {X.shape}")
        Xn = self._transform(X)
        if self.n_support == 0:
            return np.full(X.shape[0], self.bias)
        cross = _rbf_kernel(Xn, self.support_vectors, self.gamma)
        return cross @ self.dual_coeffs + self.bias

    def to_dict(self):
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coeffs": self.dual_coeffs.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "norm_lo": None if self.norm_lo is None else self.norm_lo.tolist(),
            "norm_hi": None if self.norm_hi is None else self.norm_hi.tolist(),
            "nu": self.nu,
            "c": self.c,
            "epsilon": self.epsilon,
            "cv_mse": self.cv_mse,
            "n_train": self.n_train,
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, d):
        dim = d["dim"]
        sv = np.asarray(d["support_vectors"], dtype=np.float64).reshape(-1, dim)
        return cls(
            support_vectors=sv,
            dual_coeffs=np.asarray(d["dual_coeffs"], dtype=np.float64),
            bias=float(d["bias"]),
            gamma=float(d["gamma"]),
            norm_lo=None if d["norm_lo"] is None else np.asarray(d["norm_lo"], dtype=np.float64),
            norm_hi=None if d["norm_hi"] is None else np.asarray(d["norm_hi"], dtype=np.float64),
            nu=d.get("nu"),
            c=d.get("c"),
            epsilon=d.get("epsilon"),
            cv_mse=d.get("cv_mse"),
            n_train=d.get("n_train", 0),
        )


def _sq_dists(A, B):
    aa = np.sum(A * A, axis=1)
    bb = np.sum(B * B, axis=1)
    d = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def _rbf_kernel(A, B, gamma):
    return np.exp(-gamma * _sq_dists(A, B))


def _smo_core(K, y, nu, C, tol, max_iter):
    """SMO sweep over the two dual blocks; plain loops so it can be JITted.

    Working pairs live within one block (alpha or alpha*), preserving both
    equality constraints. The first pair index is the maximal violator, the
    partner maximizes the second-order gain. Returns the block variables,
    the running gradient of the alpha block, and the convergence flag.
    """
    l = y.shape[0]
    alpha = np.zeros(l)
    alpha_star = np.zeros(l)
    remaining = C * nu * l / 2.0
    for i in range(l):
        a = remaining if remaining < C else C
        alpha[i] = a
        alpha_star[i] = a
        remaining -= a
        if remaining <= 0.0:
            break

    # alpha - alpha* is zero at init, so the alpha-block gradient is -y.
    g = np.empty(l)
    for t in range(l):
        g[t] = -y[t]

    converged = False
    it = 0
    while it < max_iter:
        it += 1
        gmin_p = np.inf
        gmax_p = -np.inf
        ip = -1
        gmin_m = np.inf
        gmax_m = -np.inf
        im = -1
        for t in range(l):
            gt = g[t]
            if alpha[t] < C - _BOUND_EPS and gt < gmin_p:
                gmin_p = gt
                ip = t
            if alpha[t] > _BOUND_EPS and gt > gmax_p:
                gmax_p = gt
            if alpha_star[t] < C - _BOUND_EPS and -gt < gmin_m:
                gmin_m = -gt
                im = t
            if alpha_star[t] > _BOUND_EPS and -gt > gmax_m:
                gmax_m = -gt
        viol_p = gmax_p - gmin_p if ip >= 0 and gmax_p > -np.inf else -np.inf
        viol_m = gmax_m - gmin_m if im >= 0 and gmax_m > -np.inf else -np.inf

        if viol_p < tol and viol_m < tol:
            converged = True
            break

        if viol_p >= viol_m:
            i = ip
            gi = g[i]
            kii = K[i, i]
            best_gain = -1.0
            j = -1
            for t in range(l):
                if alpha[t] > _BOUND_EPS:
                    diff = g[t] - gi
                    if diff > 0.0:
                        eta = kii + K[t, t] - 2.0 * K[i, t]
                        if eta < 1e-12:
                            eta = 1e-12
                        gain = diff * diff / eta
                        if gain > best_gain:
                            best_gain = gain
                            j = t
            eta = kii + K[j, j] - 2.0 * K[i, j]
            if eta < 1e-12:
                eta = 1e-12
            delta = (g[j] - gi) / eta
            if delta > C - alpha[i]:
                delta = C - alpha[i]
            if delta > alpha[j]:
                delta = alpha[j]
            alpha[i] = min(alpha[i] + delta, C)
            alpha[j] = max(alpha[j] - delta, 0.0)
            for t in range(l):
                g[t] += delta * (K[i, t] - K[j, t])
        else:
            i = im
            gi = g[i]
            kii = K[i, i]
            best_gain = -1.0
            j = -1
            for t in range(l):
                if alpha_star[t] > _BOUND_EPS:
                    diff = gi - g[t]
                    if diff > 0.0:
                        eta = kii + K[t, t] - 2.0 * K[i, t]
                        if eta < 1e-12:
                            eta = 1e-12
                        gain = diff * diff / eta
                        if gain > best_gain:
                            best_gain = gain
                            j = t
            eta = kii + K[j, j] - 2.0 * K[i, j]
            if eta < 1e-12:
                eta = 1e-12
            delta = (gi - g[j]) / eta
            if delta > C - alpha_star[i]:
                delta = C - alpha_star[i]
            if delta > alpha_star[j]:
                delta = alpha_star[j]
            alpha_star[i] = min(alpha_star[i] + delta, C)
            alpha_star[j] = max(alpha_star[j] - delta, 0.0)
            for t in range(l):
                g[t] += delta * (K[j, t] - K[i, t])
    return alpha, alpha_star, g, converged


try:  # the JIT pays for itself many times over in grid search
    from numba import njit

    _smo_core = njit(cache=True)(_smo_core)
except ImportError:  # pragma: no cover - slow but identical fallback
    pass


def _smo_nu_svr(K, y, nu, C, tol=1e-3, max_iter=None):
    """Solve the nu-SVR dual on a precomputed kernel matrix.

    Returns (dual_coeffs, bias, epsilon, converged) where dual_coeffs are
    alpha - alpha*.
    """
    l = y.shape[0]
    if max_iter is None:
        max_iter = max(100000, 2000 * l)
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    alpha, alpha_star, g, converged = _smo_core(K, y, float(nu), float(C), float(tol), int(max_iter))

    # KKT recovery of the bias and the optimized tube half-width: free
    # variables pin the multipliers, bounded ones bracket them.
    def _block_rate(a, grad):
        free = (a > _BOUND_EPS) & (a < C - _BOUND_EPS)
        if free.any():
            return float(grad[free].mean())
        ub = grad[a <= _BOUND_EPS]
        lb = grad[a >= C - _BOUND_EPS]
        top = float(lb.max()) if lb.size else -np.inf
        bot = float(ub.min()) if ub.size else np.inf
        if not np.isfinite(top):
            return bot
        if not np.isfinite(bot):
            return top
        return (top + bot) / 2.0

    r1 = _block_rate(alpha, g)
    r2 = _block_rate(alpha_star, -g)
    bias = (r2 - r1) / 2.0
    epsilon = max(0.0, -(r1 + r2) / 2.0)
    return alpha - alpha_star, bias, epsilon, converged


def train_nu_svr(X, y, nu: float, C: float, gamma: float, tol: float = 1e-3) -> SvrModel:
    """Train on already-scaled features; see fit_svr for the full pipeline.

    A constant target vector short-circuits to a zero-dual model whose bias
    is the constant.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"inconsistent training shapes {X.shape} / {y.shape}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if not (0.0 < nu < 1.0 and C > 0 and gamma > 0):
        raise ValueError("require nu in (0,1), C > 0, gamma > 0")

    if np.ptp(y) == 0.0:
        return SvrModel(
            support_vectors=np.empty((0, X.shape[1])), dual_coeffs=np.empty(0),
            bias=float(y[0]), gamma=gamma, nu=nu, c=C, epsilon=0.0, n_train=X.shape[0],
        )

    K = _rbf_kernel(X, X, gamma)
    coeffs, bias, epsilon, _ = _smo_nu_svr(K, y, nu, C, tol=tol)
    keep = np.abs(coeffs) > _SV_EPS * max(1.0, C)
    return SvrModel(
        support_vectors=X[keep].copy(), dual_coeffs=coeffs[keep].copy(),
        bias=bias, gamma=gamma, nu=nu, c=C, epsilon=epsilon, n_train=X.shape[0],
    )


def _cv_folds(n, v, seed):
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(perm, v)]


def grid_search_cv(X, y, hyper: SvrHyperparams, seed: int = 0):
    """Pick (C, gamma) minimizing v-fold cross-validation MSE.

    Ties break toward smaller C, then smaller gamma; fold assignment is a
    seeded permutation so repeated runs select identically.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < hyper.cv_folds:
        raise ValueError(f"need at least cv_folds={hyper.cv_folds} rows, got {n}")

    folds = _cv_folds(n, hyper.cv_folds, seed)
    D = _sq_dists(X, X)
    all_idx = np.arange(n)

    best = (None, None, np.inf)
    for gamma in sorted(hyper.gamma_grid):
        K = np.exp(-gamma * D)
        for C in sorted(hyper.C_grid):
            errs = []
            for fold in folds:
                tr = np.setdiff1d(all_idx, fold, assume_unique=True)
                ytr = y[tr]
                if np.ptp(ytr) == 0.0:
                    pred = np.full(fold.shape[0], ytr[0] if ytr.size else 0.0)
                else:
                    coef, bias, _, _ = _smo_nu_svr(K[np.ix_(tr, tr)], ytr, hyper.nu, C)
                    pred = K[np.ix_(fold, tr)] @ coef + bias
                errs.append(float(np.mean((pred - y[fold]) ** 2)))
            mse = float(np.mean(errs))
            better = mse < best[2]
            if not better and mse == best[2] and best[0] is not None:
                better = (C, gamma) < (best[0], best[1])
            if better:
                best = (C, gamma, mse)
    return best


def fit_svr(X, y, hyper: SvrHyperparams = None, seed: int = 0) -> SvrModel:
    """Scale features to [0, 1], grid-search (C, gamma), retrain on all rows."""
    hyper = hyper or SvrHyperparams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    norm = Normalizer.fit(X)
    Xn = norm.apply(X)
    if np.ptp(y) == 0.0:
        gamma = float(sorted(hyper.gamma_grid)[0])
        model = train_nu_svr(Xn, y, hyper.nu, float(sorted(hyper.C_grid)[0]), gamma)
        cv_mse = 0.0
    else:
        C, gamma, cv_mse = grid_search_cv(Xn, y, hyper, seed=seed)
        model = train_nu_svr(Xn, y, hyper.nu, C, gamma)
    return SvrModel(
        support_vectors=model.support_vectors, dual_coeffs=model.dual_coeffs,
        bias=model.bias, gamma=model.gamma, norm_lo=norm.lo, norm_hi=norm.hi,
        nu=model.nu, c=model.c, epsilon=model.epsilon, cv_mse=cv_mse,
        n_train=X.shape[0],
    )
