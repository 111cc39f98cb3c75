"""Maximum-likelihood merit weights via the minorize-maximize fixed point.

A deterministic cross-check on the Bayesian fit: weights w sum to one and
the plug-in win probability is w_i / (w_i + w_j).  The iteration
``w_i <- W_i / sum_j N_ij / (w_i + w_j)`` increases the likelihood each
sweep and converges whenever the comparison graph gives every algorithm at
least one win and one loss and connects all algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateMleError
from .wintable import WinTable


@dataclass(frozen=True)
class MleResult:
    algorithms: tuple[str, ...]
    weights: np.ndarray
    iterations: int
    converged: bool
    log_likelihood: float

    def weight(self, algorithm: str) -> float:
        return float(self.weights[self.algorithms.index(algorithm)])

    def pair_probability(self, first: str, second: str) -> float:
        wi = self.weight(first)
        wj = self.weight(second)
        return wi / (wi + wj)

    def as_dict(self) -> dict:
        return {
            "weights": {a: float(w) for a, w in zip(self.algorithms, self.weights)},
            "iterations": self.iterations,
            "converged": self.converged,
            "log_likelihood": self.log_likelihood,
        }


def _check_estimable(wt: WinTable) -> None:
    k = len(wt.algorithms)
    total_wins = wt.wins.sum(axis=1)
    total_losses = wt.wins.sum(axis=0)
    for i, name in enumerate(wt.algorithms):
        if total_wins[i] == 0:
            raise DegenerateMleError(
                f"{name} never wins; its ML weight is 0 and no maximum exists. "
                "Use the Bayesian fit, whose prior keeps the weights finite."
            )
        if total_losses[i] == 0:
            raise DegenerateMleError(
                f"{name} never loses; its ML weight diverges. "
                "Use the Bayesian fit, whose prior keeps the weights finite."
            )
    # connectivity of the comparison graph over pairs with any matches
    n = wt.n
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(k):
            if j not in seen and n[i, j] > 0:
                seen.add(j)
                frontier.append(j)
    if len(seen) < k:
        missing = [wt.algorithms[i] for i in range(k) if i not in seen]
        raise DegenerateMleError(
            f"comparison graph is disconnected; unreachable: {missing}"
        )


def _log_likelihood(wt: WinTable, w: np.ndarray) -> float:
    ll = 0.0
    for i, j in wt.pairs():
        p = w[i] / (w[i] + w[j])
        if wt.wins[i, j]:
            ll += wt.wins[i, j] * np.log(p)
        if wt.wins[j, i]:
            ll += wt.wins[j, i] * np.log1p(-p)
    return float(ll)


def mle_mm(wt: WinTable, tol: float = 1e-10, max_iter: int = 10000) -> MleResult:
    """Fixed-point iteration for the ML weights, renormalized each sweep.

    Stops when no weight moves by more than ``tol``.  Raises for win tables
    where the maximum does not exist (see module docstring); ties must have
    been folded in beforehand.
    """
    if wt.has_ties:
        raise ConfigError("apply a ties policy before the ML fit")
    _check_estimable(wt)
    k = len(wt.algorithms)
    n = wt.n.astype(float)
    total_wins = wt.wins.sum(axis=1).astype(float)

    w = np.full(k, 1.0 / k)
    ll = _log_likelihood(wt, w)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        pair_sums = w[:, None] + w[None, :]
        np.fill_diagonal(pair_sums, 1.0)  # diagonal never used: n_ii = 0
        denom = (n / pair_sums).sum(axis=1)
        new_w = total_wins / denom
        new_w /= new_w.sum()
        delta = float(np.max(np.abs(new_w - w)))
        w = new_w
        new_ll = _log_likelihood(wt, w)
        if new_ll < ll - 1e-9:
            raise AssertionError(
                f"likelihood decreased ({ll} -> {new_ll}); this is a bug"
            )
        ll = new_ll
        if delta < tol:
            converged = True
            break
    return MleResult(
        algorithms=wt.algorithms,
        weights=w,
        iterations=iterations,
        converged=converged,
        log_likelihood=ll,
    )
