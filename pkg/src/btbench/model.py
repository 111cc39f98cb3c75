"""Log-posterior densities, gradients, and probability maps.

Two generative models over a win table:

* the paired-comparison model: per pair, wins are binomial with win
  probability ``exp(b_i) / (exp(b_i) + exp(b_j))``, merits ``b_i`` drawn
  from Normal(0, sigma), and a hyper-prior on sigma;
* the explicit-ties extension: per pair a trinomial over (win, tie, loss)
  with shared denominator ``exp(b_i) + exp(b_j) + exp(nu + (b_i + b_j)/2)``
  and a tie-propensity parameter ``nu``.

The scale sigma is carried on the log scale, so densities include the
Jacobian of the exp transform and all parameters are unconstrained.
Binomial/trinomial normalizing constants are kept so that pointwise
log-likelihoods are true probabilities (needed for information criteria).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConfigError
from .wintable import WinTable

PRIOR_FAMILIES = ("lognormal", "half_cauchy", "half_normal")

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorConfig:
    """Hyper-prior on the merit scale sigma, plus the tie-model nu prior.

    The default is LogNormal(0, 0.5).  ``half_cauchy`` (scale 1.0) and
    ``half_normal`` (sd 3.0) are the usual alternatives; fits are
    insensitive to the choice.
    """

    family: str = "lognormal"
    scale: float = 0.5
    nu_prior_sd: float = 3.0

    def __post_init__(self):
        if self.family not in PRIOR_FAMILIES:
            raise ConfigError(
                f"unknown hyper-prior family {self.family!r}; valid: {PRIOR_FAMILIES}"
            )
        if self.scale <= 0:
            raise ConfigError("hyper-prior scale must be positive")
        if self.nu_prior_sd <= 0:
            raise ConfigError("nu prior sd must be positive")


def pair_prob(beta_i, beta_j):
    """P(i beats j) = logistic(b_i - b_j), saturating smoothly for large gaps.

    Complementary calls sum to exactly 1: the larger side is computed as a
    logistic value in [0.5, 1] and the smaller side as its exact complement.
    """
    d = np.asarray(beta_i, dtype=float) - np.asarray(beta_j, dtype=float)
    hi = 1.0 / (1.0 + np.exp(-np.abs(d)))
    out = np.where(d >= 0, hi, 1.0 - hi)
    if out.ndim == 0:
        return float(out)
    return out


def davidson_probs(beta_i, beta_j, nu):
    """(P(i wins), P(tie), P(j wins)) under the explicit-ties model."""
    bi, bj, nv = np.broadcast_arrays(
        np.asarray(beta_i, dtype=float),
        np.asarray(beta_j, dtype=float),
        np.asarray(nu, dtype=float),
    )
    exponents = np.stack([bi, bj, nv + (bi + bj) / 2.0])
    e = np.exp(exponents - exponents.max(axis=0))
    denom = e.sum(axis=0)
    p_i, p_j, p_t = e[0] / denom, e[1] / denom, e[2] / denom
    if np.ndim(p_i) == 0:
        return float(p_i), float(p_t), float(p_j)
    return p_i, p_t, p_j


# |log_sigma| is clipped here before exponentiation; beyond this the density
# is below the smallest representable float anyway and proposals get rejected.
_LOG_SIGMA_CAP = 300.0


def _log_sigma_prior_and_grad(s: float, prior: PriorConfig) -> tuple[float, float]:
    """Hyper-prior density of sigma = exp(s) plus the exp-transform Jacobian.

    Returns the contribution to the log posterior and its d/ds.  Constant
    terms are kept so the same prior is comparable across configurations.
    """
    if prior.family == "lognormal":
        # LogNormal(0, tau) on sigma + Jacobian simplifies to Normal(0, tau) on s.
        tau = prior.scale
        logp = -math.log(tau) - 0.5 * _LOG_2PI - 0.5 * s * s / (tau * tau)
        return logp, -s / (tau * tau)
    s = min(max(s, -_LOG_SIGMA_CAP), _LOG_SIGMA_CAP)
    if prior.family == "half_cauchy":
        g = prior.scale
        u = 2.0 * (s - math.log(g))
        logp = math.log(2.0 / (math.pi * g)) - np.logaddexp(0.0, u) + s
        if u > 700.0:
            grad = -1.0
        elif u < -700.0:
            grad = 1.0
        else:
            grad = 1.0 - 2.0 / (1.0 + math.exp(-u))
        return float(logp), grad
    # half_normal
    tau = prior.scale
    ratio = math.exp(2.0 * (s - math.log(tau)))
    logp = 0.5 * math.log(2.0 / math.pi) - math.log(tau) - 0.5 * ratio + s
    grad = 1.0 - ratio
    return logp, grad


def _pair_arrays(wt: WinTable):
    pairs = wt.pairs()
    i_idx = np.array([i for i, _ in pairs], dtype=np.intp)
    j_idx = np.array([j for _, j in pairs], dtype=np.intp)
    w_ij = wt.wins[i_idx, j_idx].astype(float)
    w_ji = wt.wins[j_idx, i_idx].astype(float)
    t_ij = wt.ties[i_idx, j_idx].astype(float)
    return i_idx, j_idx, w_ij, w_ji, t_ij


class BradleyTerryModel:
    """Joint log density of merits and scale given a no-ties win table.

    Parameter vector: ``[beta_0 .. beta_{K-1}, log_sigma]``.
    """

    def __init__(self, wt: WinTable, prior: PriorConfig | None = None):
        if wt.has_ties:
            raise ConfigError(
                "win table still has ties; apply a ties policy before fitting"
            )
        if len(wt.algorithms) < 2:
            raise ConfigError("need at least 2 algorithms")
        self.prior = prior if prior is not None else PriorConfig()
        self.algorithms = wt.algorithms
        self.k = len(wt.algorithms)
        self.i_idx, self.j_idx, self.w_ij, self.w_ji, _ = _pair_arrays(wt)
        self.n_ij = self.w_ij + self.w_ji
        if np.any(self.w_ij > self.n_ij):
            raise ConfigError("wins exceed match count")
        self._log_binom = (
            gammaln(self.n_ij + 1.0)
            - gammaln(self.w_ij + 1.0)
            - gammaln(self.w_ji + 1.0)
        )
        self.param_names = [f"beta[{a}]" for a in wt.algorithms] + ["log_sigma"]

    @property
    def dim(self) -> int:
        return self.k + 1

    def initial_position(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.dim)
        x[: self.k] = rng.uniform(-0.1, 0.1, size=self.k)
        return x

    def _split(self, x: np.ndarray):
        return x[: self.k], x[self.k]

    def log_likelihood(self, x: np.ndarray) -> float:
        beta, _ = self._split(x)
        d = beta[self.i_idx] - beta[self.j_idx]
        log_p = -np.logaddexp(0.0, -d)
        log_q = -np.logaddexp(0.0, d)
        return float(np.sum(self._log_binom + self.w_ij * log_p + self.w_ji * log_q))

    def logpdf_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        beta, s = self._split(x)
        inv_sigma2 = math.exp(-2.0 * min(max(s, -_LOG_SIGMA_CAP), _LOG_SIGMA_CAP))
        d = beta[self.i_idx] - beta[self.j_idx]
        log_p = -np.logaddexp(0.0, -d)
        log_q = -np.logaddexp(0.0, d)
        loglik = np.sum(self._log_binom + self.w_ij * log_p + self.w_ji * log_q)

        resid = self.w_ij - self.n_ij * np.exp(log_p)
        grad = np.zeros(self.dim)
        np.add.at(grad, self.i_idx, resid)
        np.add.at(grad, self.j_idx, -resid)

        # beta_i ~ Normal(0, sigma)
        ss = float(np.dot(beta, beta))
        log_prior_beta = -0.5 * self.k * _LOG_2PI - self.k * s - 0.5 * ss * inv_sigma2
        grad[: self.k] -= beta * inv_sigma2

        logp_s, grad_s = _log_sigma_prior_and_grad(s, self.prior)
        grad[self.k] = -self.k + ss * inv_sigma2 + grad_s
        return float(loglik + log_prior_beta + logp_s), grad

    def pair_win_probs(self, thetas: np.ndarray) -> np.ndarray:
        """Win probability of the lower-index side, one column per pair."""
        thetas = np.atleast_2d(thetas)
        return pair_prob(thetas[:, self.i_idx], thetas[:, self.j_idx])

    def pointwise_loglik(self, thetas: np.ndarray) -> np.ndarray:
        """Per-draw, per-pair binomial log probabilities (constants included)."""
        thetas = np.atleast_2d(thetas)
        d = thetas[:, self.i_idx] - thetas[:, self.j_idx]
        log_p = -np.logaddexp(0.0, -d)
        log_q = -np.logaddexp(0.0, d)
        return self._log_binom + self.w_ij * log_p + self.w_ji * log_q


class DavidsonModel:
    """Joint log density for the explicit-ties model over a kept-ties table.

    Parameter vector: ``[beta_0 .. beta_{K-1}, nu, log_sigma]``.
    """

    def __init__(self, wt: WinTable, prior: PriorConfig | None = None):
        if len(wt.algorithms) < 2:
            raise ConfigError("need at least 2 algorithms")
        self.prior = prior if prior is not None else PriorConfig()
        self.algorithms = wt.algorithms
        self.k = len(wt.algorithms)
        self.i_idx, self.j_idx, self.w_ij, self.w_ji, self.t_ij = _pair_arrays(wt)
        self.n_ij = self.w_ij + self.w_ji + self.t_ij
        self._log_multinom = (
            gammaln(self.n_ij + 1.0)
            - gammaln(self.w_ij + 1.0)
            - gammaln(self.w_ji + 1.0)
            - gammaln(self.t_ij + 1.0)
        )
        self.param_names = (
            [f"beta[{a}]" for a in wt.algorithms] + ["nu", "log_sigma"]
        )

    @property
    def dim(self) -> int:
        return self.k + 2

    def initial_position(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.dim)
        x[: self.k] = rng.uniform(-0.1, 0.1, size=self.k)
        return x

    def _split(self, x: np.ndarray):
        return x[: self.k], x[self.k], x[self.k + 1]

    def _log_probs(self, beta, nu):
        """Stable per-pair log (p_win_i, p_win_j, p_tie)."""
        a = beta[..., self.i_idx]
        b = beta[..., self.j_idx]
        t = nu + (a + b) / 2.0
        m = np.maximum(np.maximum(a, b), t)
        log_denom = m + np.log(
            np.exp(a - m) + np.exp(b - m) + np.exp(t - m)
        )
        return a - log_denom, b - log_denom, t - log_denom

    def log_likelihood(self, x: np.ndarray) -> float:
        beta, nu, _ = self._split(x)
        lp_i, lp_j, lp_t = self._log_probs(beta, nu)
        return float(
            np.sum(
                self._log_multinom
                + self.w_ij * lp_i
                + self.w_ji * lp_j
                + self.t_ij * lp_t
            )
        )

    def logpdf_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        beta, nu, s = self._split(x)
        inv_sigma2 = math.exp(-2.0 * min(max(s, -_LOG_SIGMA_CAP), _LOG_SIGMA_CAP))
        lp_i, lp_j, lp_t = self._log_probs(beta, nu)
        loglik = np.sum(
            self._log_multinom
            + self.w_ij * lp_i
            + self.w_ji * lp_j
            + self.t_ij * lp_t
        )

        p_i, p_j, p_t = np.exp(lp_i), np.exp(lp_j), np.exp(lp_t)
        grad = np.zeros(self.dim)
        g_i = self.w_ij + self.t_ij / 2.0 - self.n_ij * (p_i + p_t / 2.0)
        g_j = self.w_ji + self.t_ij / 2.0 - self.n_ij * (p_j + p_t / 2.0)
        np.add.at(grad, self.i_idx, g_i)
        np.add.at(grad, self.j_idx, g_j)
        grad[self.k] = np.sum(self.t_ij - self.n_ij * p_t)

        ss = float(np.dot(beta, beta))
        log_prior_beta = -0.5 * self.k * _LOG_2PI - self.k * s - 0.5 * ss * inv_sigma2
        grad[: self.k] -= beta * inv_sigma2

        nu_sd = self.prior.nu_prior_sd
        log_prior_nu = (
            -0.5 * _LOG_2PI - math.log(nu_sd) - 0.5 * nu * nu / (nu_sd * nu_sd)
        )
        grad[self.k] += -nu / (nu_sd * nu_sd)

        logp_s, grad_s = _log_sigma_prior_and_grad(s, self.prior)
        grad[self.k + 1] = -self.k + ss * inv_sigma2 + grad_s
        return float(loglik + log_prior_beta + log_prior_nu + logp_s), grad

    def outcome_probs(self, thetas: np.ndarray):
        """(p_win_i, p_tie, p_win_j) arrays, one column per pair."""
        thetas = np.atleast_2d(thetas)
        beta = thetas[:, : self.k]
        nu = thetas[:, self.k : self.k + 1]
        lp_i, lp_j, lp_t = self._log_probs(beta, nu)
        return np.exp(lp_i), np.exp(lp_t), np.exp(lp_j)

    def pointwise_loglik(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(thetas)
        beta = thetas[:, : self.k]
        nu = thetas[:, self.k : self.k + 1]
        lp_i, lp_j, lp_t = self._log_probs(beta, nu)
        return (
            self._log_multinom
            + self.w_ij * lp_i
            + self.w_ji * lp_j
            + self.t_ij * lp_t
        )


def bt_log_posterior(
    beta, log_sigma: float, wt: WinTable, prior: PriorConfig | None = None
) -> tuple[float, np.ndarray]:
    """Log density (up to no constants dropped) and exact gradient.

    Convenience wrapper; batch work should construct a BradleyTerryModel
    once and reuse it.
    """
    model = BradleyTerryModel(wt, prior)
    x = np.concatenate([np.asarray(beta, dtype=float), [float(log_sigma)]])
    return model.logpdf_and_grad(x)


def davidson_log_posterior(
    beta, nu: float, log_sigma: float, wt: WinTable, prior: PriorConfig | None = None
) -> tuple[float, np.ndarray]:
    model = DavidsonModel(wt, prior)
    x = np.concatenate(
        [np.asarray(beta, dtype=float), [float(nu)], [float(log_sigma)]]
    )
    return model.logpdf_and_grad(x)
