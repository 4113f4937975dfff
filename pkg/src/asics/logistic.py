"""Logistic regression on the selected support.

Plain maximum likelihood on an n x K design with small K, maximized by damped
Newton with step halving. The parameter space is the box
max_i |x_i' beta| <= xi_tilde: the likelihood of a separable dataset increases
forever along some direction, and capping the linear predictor turns that
failure mode into a finite, flagged fit instead of a diverging loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import expit


class SingularDesignError(ArithmeticError):
    """The selected design is rank deficient; no information matrix exists."""


def softplus(t: np.ndarray | float) -> np.ndarray | float:
    """log(1 + exp(t)) without overflow: max(t, 0) + log1p(exp(-|t|))."""
    t = np.asarray(t, dtype=np.float64)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def sigmoid(t: np.ndarray | float) -> np.ndarray | float:
    """1 / (1 + exp(-t)), evaluated symmetrically around zero."""
    return expit(t)


def sigmoid_deriv(t: np.ndarray | float) -> np.ndarray | float:
    """Derivative p(1-p) of the sigmoid; the Bernoulli variance at eta = t."""
    p = expit(t)
    return p * (1.0 - p)


def log_likelihood(beta: np.ndarray, xs: np.ndarray, y: np.ndarray) -> float:
    """Bernoulli log-likelihood sum_i (y_i eta_i - log(1 + exp(eta_i)))."""
    eta = xs @ beta
    return float(y @ eta - np.sum(softplus(eta)))


def score(beta: np.ndarray, xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood scaled by 1/sqrt(n)."""
    n = xs.shape[0]
    eta = xs @ beta
    return xs.T @ (y - expit(eta)) / math.sqrt(n)


def observed_information(beta: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Averaged negative Hessian (1/n) sum_i w_i x_i x_i', w_i = p_i(1 - p_i)."""
    n = xs.shape[0]
    w = sigmoid_deriv(xs @ beta)
    info = (xs.T * w) @ xs / n
    # matrix products are symmetric only up to rounding; average enforces it
    return (info + info.T) / 2.0


@dataclass(frozen=True)
class FitConfig:
    """Newton solver knobs.

    tol applies to the unnormalized gradient: stop when
    max_j |grad_j| < tol * n, which is scale-free in n. xi_tilde caps the
    linear predictor; sigmoid'(30) rounds to machine zero, so larger boxes
    buy nothing at double precision.
    """

    tol: float = 1e-10
    max_iter: int = 100
    xi_tilde: float = 30.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not (math.isfinite(self.xi_tilde) and self.xi_tilde > 0.0):
            raise ValueError(f"xi_tilde must be positive, got {self.xi_tilde}")


@dataclass(frozen=True, eq=False)
class FittedLogistic:
    """MLE on the selected support with curvature and convergence diagnostics.

    info is the observed information at beta_hat (1/n scaled, symmetric
    positive definite), info_inv its inverse. grad_sup is the sup-norm of the
    unnormalized log-likelihood gradient at exit. bounded means no finite
    maximizer exists: either the linear-predictor box was active at exit or
    every observation sits strictly on its predicted side (complete
    separation); p-values downstream carry that flag.
    """

    beta_hat: np.ndarray
    info: np.ndarray
    info_inv: np.ndarray
    iterations: int
    grad_sup: float
    bounded: bool


def _box_step_limit(eta: np.ndarray, eta_step: np.ndarray, xi_tilde: float) -> float:
    """Largest t with max_i |eta_i + t * eta_step_i| <= xi_tilde, given |eta| <= xi."""
    limit = math.inf
    pos = eta_step > 0.0
    if np.any(pos):
        limit = min(limit, float(np.min((xi_tilde - eta[pos]) / eta_step[pos])))
    neg = eta_step < 0.0
    if np.any(neg):
        limit = min(limit, float(np.min((xi_tilde + eta[neg]) / (-eta_step[neg]))))
    return limit


def fit_mle(
    xs: np.ndarray,
    y: np.ndarray,
    config: FitConfig = FitConfig(),
    start: np.ndarray | None = None,
) -> FittedLogistic:
    """Damped-Newton MLE from beta = 0 (or a feasible start).

    Each iteration solves the Newton system through a Cholesky factorization,
    scales the step so the iterate stays inside the linear-predictor box, and
    halves it until the likelihood is non-decreasing. Concavity makes the
    interior maximizer unique, so any feasible start reaches the same fit.

    Raises SingularDesignError when the curvature matrix cannot be factorized
    (rank-deficient xs).
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, k = xs.shape

    if start is None:
        beta = np.zeros(k)
    else:
        beta = np.ascontiguousarray(start, dtype=np.float64).copy()
        if np.max(np.abs(xs @ beta)) >= config.xi_tilde:
            raise ValueError("start lies outside the linear-predictor box")

    eta = xs @ beta
    ll = float(y @ eta - np.sum(softplus(eta)))
    iterations = 0

    for _ in range(config.max_iter):
        grad = xs.T @ (y - expit(eta))
        if float(np.max(np.abs(grad))) < config.tol * n:
            break
        iterations += 1

        w = sigmoid_deriv(eta)
        hess = (xs.T * w) @ xs
        try:
            factor = cho_factor(hess, lower=True)
        except LinAlgError as exc:
            raise SingularDesignError(
                f"information matrix is singular for the {n}x{k} selected design"
            ) from exc
        step = cho_solve(factor, grad)
        eta_step = xs @ step

        # Shave the boundary scale by one part in 1e12 so rounding in the
        # recomputed eta cannot push an iterate outside the box.
        t_limit = _box_step_limit(eta, eta_step, config.xi_tilde)
        t = min(1.0, t_limit * (1.0 - 1e-12))
        if t <= 0.0:
            break

        accepted = False
        for _ in range(60):
            beta_new = beta + t * step
            eta_new = xs @ beta_new
            ll_new = float(y @ eta_new - np.sum(softplus(eta_new)))
            if ll_new >= ll:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        beta, eta, ll = beta_new, eta_new, ll_new

    grad = xs.T @ (y - expit(eta))
    grad_sup = float(np.max(np.abs(grad)))
    box_active = bool(np.max(np.abs(eta)) >= config.xi_tilde * (1.0 - 1e-9))
    # A strictly positive margin for every observation certifies separation:
    # scaling beta upward then increases the likelihood without bound, so no
    # finite maximizer exists even if the gradient test already fired.
    separated = bool(np.all((2.0 * y - 1.0) * eta > 0.0))
    bounded = box_active or separated

    info = observed_information(beta, xs)
    try:
        factor = cho_factor(info, lower=True)
    except LinAlgError as exc:
        raise SingularDesignError(
            f"observed information is singular at the fitted point ({n}x{k} design)"
        ) from exc
    info_inv = cho_solve(factor, np.eye(k))
    info_inv = (info_inv + info_inv.T) / 2.0

    return FittedLogistic(
        beta_hat=beta,
        info=info,
        info_inv=info_inv,
        iterations=iterations,
        grad_sup=grad_sup,
        bounded=bounded,
    )
