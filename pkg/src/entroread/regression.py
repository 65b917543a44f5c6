"""Linear and fractional-response logistic regression under k-fold CV.

Held-out log-likelihoods are the quantity of interest: each row is scored
exactly once by the model fit on its complementary folds, with the Gaussian
variance frozen from the training folds.  All likelihoods are average nats
per item.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError

SIGMA2_FLOOR = 1e-12
IRLS_TOL = 1e-10
IRLS_MAX_ITER = 100
RIDGE_FALLBACK = 1e-6

# Probability clamp when evaluating Bernoulli log-likelihoods.
_MU_EPS = 1e-12


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    n_rows: int
    assignment: np.ndarray
    grouped: bool = False

    def __post_init__(self):
        counts = np.bincount(self.assignment, minlength=self.k)
        if self.assignment.shape != (self.n_rows,):
            raise ContractError("fold assignment length mismatch")
        if not self.grouped and counts.max() - counts.min() > 1:
            raise ContractError("fold sizes differ by more than 1")


def make_fold_plan(n_rows, k=10, seed=0, groups=None):
    """Seeded uniform partition of rows into k folds.

    Ungrouped (default): a permutation of the rows is dealt round-robin, so
    the assignment depends only on (seed, n_rows) and fold sizes differ by at
    most 1.  With ``groups`` (one hashable key per row, e.g. text ids), whole
    groups are dealt instead and sizes are only approximately balanced.
    """
    if n_rows < k:
        raise DomainError(f"cannot split {n_rows} rows into {k} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n_rows, dtype=np.int64)
    if groups is None:
        perm = rng.permutation(n_rows)
        assignment[perm] = np.arange(n_rows) % k
        return FoldPlan(k=k, seed=seed, n_rows=n_rows, assignment=assignment)
    if len(groups) != n_rows:
        raise DomainError("one group key per row required")
    unique = list(dict.fromkeys(groups))
    if len(unique) < k:
        raise DomainError(f"cannot split {len(unique)} groups into {k} folds")
    perm = rng.permutation(len(unique))
    fold_of = {g: int(i % k) for g, i in zip(unique, np.argsort(perm))}
    for row, g in enumerate(groups):
        assignment[row] = fold_of[g]
    return FoldPlan(k=k, seed=seed, n_rows=n_rows, assignment=assignment, grouped=True)


def _check_design(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DomainError("design matrix and response shapes disagree")
    if X.shape[0] == 0:
        raise DomainError("zero rows")
    if X.shape[0] < X.shape[1]:
        raise DomainError(f"{X.shape[0]} rows < {X.shape[1]} columns")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("non-finite entries in design matrix or response")
    return X, y


def fit_linear(X, y):
    """Least squares fit; returns (coefficients, residual variance).

    Solved by SVD, which is rank-revealing: on rank deficiency the
    minimum-norm solution is returned with a warning.  The variance is the
    MLE SSR/N, clamped at the floor (with a warning on clamping).
    """
    X, y = _check_design(X, y)
    phi, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        warnings.warn(
            f"design matrix rank {rank} < {X.shape[1]} columns; minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    residuals = y - X @ phi
    sigma2 = float(np.mean(residuals**2))
    if sigma2 < SIGMA2_FLOOR:
        warnings.warn("residual variance at floor (near-perfect fit)", RuntimeWarning, stacklevel=2)
        sigma2 = SIGMA2_FLOOR
    return phi, sigma2


def gaussian_llh(y, y_hat, sigma2):
    """Average Gaussian log-likelihood in nats:
    -log sqrt(2 pi sigma2) - sum((y - y_hat)^2) / (2 N sigma2)."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    return float(
        -0.5 * math.log(2.0 * math.pi * sigma2)
        - np.sum((y - y_hat) ** 2) / (2.0 * y.shape[0] * sigma2)
    )


def _bernoulli_llh_terms(y, mu):
    mu = np.clip(mu, _MU_EPS, 1.0 - _MU_EPS)
    return y * np.log(mu) + (1.0 - y) * np.log1p(-mu)


def _sigmoid(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def fit_logistic(X, y, ridge=0.0):
    """Maximize the fractional-response Bernoulli likelihood by IRLS.

    Newton steps with step-halving on non-improvement; converged when the
    average llh improves by less than the tolerance.  Diverging coefficients
    (perfect separation) trigger a warning and a ridge-penalized refit.
    """
    X, y = _check_design(X, y)
    if np.any(y < 0) or np.any(y > 1):
        raise DomainError("logistic responses must lie in [0, 1]")

    def objective(coef):
        val = float(np.mean(_bernoulli_llh_terms(y, _sigmoid(X @ coef))))
        return val - 0.5 * ridge * float(coef @ coef)

    def ridge_refit(reason):
        warnings.warn(f"{reason}; refitting with ridge penalty", RuntimeWarning, stacklevel=3)
        return fit_logistic(X, y, ridge=RIDGE_FALLBACK)

    phi = np.zeros(X.shape[1])
    llh = objective(phi)
    for _ in range(IRLS_MAX_ITER):
        mu = _sigmoid(X @ phi)
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        grad = X.T @ (y - mu) - ridge * phi
        hess = X.T @ (X * w[:, None]) + ridge * np.eye(X.shape[1])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            if ridge:
                raise
            return ridge_refit("singular system in IRLS")
        scale = 1.0
        for _ in range(30):
            cand = phi + scale * step
            cand_llh = objective(cand)
            if cand_llh >= llh:
                break
            scale *= 0.5
        if cand_llh < llh:
            break
        improved = cand_llh - llh
        phi, llh = cand, cand_llh
        if float(np.linalg.norm(phi)) > 1e6:
            if ridge:
                raise DomainError("logistic coefficients diverged despite ridge penalty")
            return ridge_refit("diverging coefficients (perfect separation)")
        if improved < IRLS_TOL:
            break
    if ridge == 0.0 and _separation_suspected(X @ phi, y):
        return ridge_refit("saturated predictions (perfect separation)")
    return phi


def _separation_suspected(eta, y):
    """Divergence proxy for the fractional Bernoulli fit.

    Only rows with response exactly 0 or 1 can push the likelihood along an
    unbounded coefficient ray, and convergence-by-tolerance can stall such
    rows well below any global saturation bound, so boundary rows get a
    signed threshold of their own.
    """
    if float(np.max(np.abs(eta))) > 30.0:
        return True
    return bool(np.any((y == 1.0) & (eta > 15.0)) or np.any((y == 0.0) & (eta < -15.0)))


def logistic_llh(y, eta):
    """Average fractional Bernoulli log-likelihood in nats at logits eta."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(_bernoulli_llh_terms(y, _sigmoid(np.asarray(eta, dtype=np.float64)))))


@dataclass
class FitResult:
    """Cross-validated fit: full-data coefficients plus per-item held-out
    log-likelihoods and per-fold coefficient draws."""

    model: str
    coefficients: np.ndarray
    sigma2: float | None
    train_llh: float
    per_item_heldout_llh: np.ndarray
    fold_coefficients: np.ndarray
    provenance: tuple | None = None

    @property
    def heldout_llh(self):
        return float(np.mean(self.per_item_heldout_llh))

    def to_json_dict(self, terms=None):
        names = [t.name for t in terms] if terms is not None else [
            f"c{i}" for i in range(len(self.coefficients))
        ]
        per_fold_mean = [float(v) for v in np.mean(self.fold_coefficients, axis=0)]
        per_fold_std = [float(v) for v in np.std(self.fold_coefficients, axis=0)]
        return {
            "model": self.model,
            "coefficients": dict(zip(names, (float(c) for c in self.coefficients))),
            "sigma2": self.sigma2,
            "train_llh": self.train_llh,
            "heldout_llh": self.heldout_llh,
            "fold_coefficient_mean": dict(zip(names, per_fold_mean)),
            "fold_coefficient_std": dict(zip(names, per_fold_std)),
        }


def cross_validate(matrix, model, plan):
    """Score every row out-of-fold; returns a FitResult.

    ``matrix`` is a FeatureMatrix, ``model`` 'linear' or 'logistic'.  The
    training-fold variance is frozen when scoring linear held-out items.
    """
    if model not in ("linear", "logistic"):
        raise DomainError(f"unknown model {model!r}")
    X, y = _check_design(matrix.values, matrix.response)
    if plan.n_rows != X.shape[0]:
        raise ContractError("fold plan row count does not match matrix")

    per_item = np.empty(X.shape[0])
    fold_coefs = np.empty((plan.k, X.shape[1]))
    for fold in range(plan.k):
        test = plan.assignment == fold
        train = ~test
        if model == "linear":
            phi, sigma2 = fit_linear(X[train], y[train])
            resid = y[test] - X[test] @ phi
            per_item[test] = -0.5 * np.log(2.0 * math.pi * sigma2) - resid**2 / (2.0 * sigma2)
        else:
            phi = fit_logistic(X[train], y[train])
            per_item[test] = _bernoulli_llh_terms(y[test], _sigmoid(X[test] @ phi))
        fold_coefs[fold] = phi

    if model == "linear":
        phi, sigma2 = fit_linear(X, y)
        train_llh = gaussian_llh(y, X @ phi, sigma2)
    else:
        phi = fit_logistic(X, y)
        sigma2 = None
        train_llh = logistic_llh(y, X @ phi)
    return FitResult(
        model=model,
        coefficients=phi,
        sigma2=sigma2,
        train_llh=train_llh,
        per_item_heldout_llh=per_item,
        fold_coefficients=fold_coefs,
        provenance=getattr(matrix, "provenance", None),
    )
