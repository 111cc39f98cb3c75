"""Gradient-based MCMC over any log-density with gradient, plus diagnostics.

The transition is Hamiltonian: a leapfrog trajectory with a jittered number
of steps, Metropolis-corrected.  Warmup adapts the step size by dual
averaging toward a target acceptance rate and a diagonal mass matrix from
the sample variance of successive adaptation windows (a short fast window,
doubling slow windows, a short fast tail), then is discarded.

Chains draw from independent RNG streams derived from (seed, chain index),
so results are bit-identical whether chains run serially or on threads.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SamplingFailureError

DIVERGENCE_ENERGY = 1000.0  # energy error marking a divergent transition


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup: int = 1000
    draws: int = 1000
    seed: int = 1
    target_accept: float = 0.8
    max_steps: int = 128
    trajectory_length: float = 4.0
    parallel: bool = False

    def __post_init__(self):
        if self.chains < 1:
            raise ConfigError("need at least one chain")
        if self.draws < 1:
            raise ConfigError("need at least one draw")
        if self.warmup < 0:
            raise ConfigError("warmup cannot be negative")
        if not 0.0 < self.target_accept < 1.0:
            raise ConfigError("target_accept must be in (0, 1)")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")


@dataclass
class PosteriorDraws:
    """Post-warmup draws: one (draws, dim) matrix per chain, stacked."""

    param_names: list[str]
    draws: np.ndarray  # (chains, draws, dim)
    divergences: np.ndarray  # per chain
    step_sizes: np.ndarray  # adapted step size per chain
    accept_rates: np.ndarray  # mean post-warmup acceptance per chain
    seed: int

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_draws(self) -> int:
        return self.draws.shape[1]

    @property
    def dim(self) -> int:
        return self.draws.shape[2]

    def pooled(self) -> np.ndarray:
        """All chains concatenated: (chains * draws, dim)."""
        return self.draws.reshape(-1, self.dim)

    def parameter(self, name: str) -> np.ndarray:
        """Pooled draws of one named parameter."""
        return self.pooled()[:, self.param_names.index(name)]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("chain,iteration," + ",".join(self.param_names) + "\n")
        for c in range(self.n_chains):
            for t in range(self.n_draws):
                row = ",".join(repr(float(v)) for v in self.draws[c, t])
                out.write(f"{c},{t},{row}\n")
        return out.getvalue()


def _as_density(density, dim):
    """Accept either a model object or a bare (logp, grad) callable."""
    if hasattr(density, "logpdf_and_grad"):
        fn = density.logpdf_and_grad
        dim = getattr(density, "dim", dim)
        names = list(getattr(density, "param_names", []))
        init = getattr(density, "initial_position", None)
    else:
        fn = density
        names = []
        init = None
    if dim is None:
        raise ConfigError("dim is required for a bare density callable")
    if not names:
        names = [f"p{i}" for i in range(dim)]
    if init is None:
        init = lambda rng: rng.uniform(-0.1, 0.1, size=dim)
    return fn, int(dim), names, init


# --- adaptation -----------------------------------------------------------


def _adaptation_windows(warmup: int) -> tuple[int, list[int], int]:
    """(fast head, slow window lengths, fast tail) summing to ``warmup``.

    Follows the usual windowed scheme: 75 / 25-50-100-... / 50, with the
    last slow window stretched to fill the budget.  Short warmups degrade
    gracefully to proportional windows; adaptation is then simply poor,
    which the convergence report will surface.
    """
    if warmup == 0:
        return 0, [], 0
    head, base, tail = 75, 25, 50
    if warmup < head + base + tail:
        head = max(1, int(0.15 * warmup))
        tail = max(1, int(0.10 * warmup))
        middle = warmup - head - tail
        return (head, [middle] if middle > 0 else [], tail)
    budget = warmup - head - tail
    windows = []
    size = base
    while budget > 0:
        if budget < 2 * size or size * 2 > budget - size:
            windows.append(budget)
            budget = 0
        else:
            windows.append(size)
            budget -= size
            size *= 2
    return head, windows, tail


class _DualAveraging:
    """Nesterov dual averaging of log step size toward a target acceptance."""

    def __init__(self, initial_step: float, target: float,
                 gamma: float = 0.05, t0: float = 10.0, kappa: float = 0.75):
        self.mu = math.log(10.0 * initial_step)
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.h_bar = 0.0
        self.log_eps_bar = math.log(initial_step)
        self.count = 0
        self.step = initial_step

    def update(self, accept_prob: float) -> float:
        self.count += 1
        t = self.count
        eta = 1.0 / (t + self.t0)
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob)
        log_eps = self.mu - math.sqrt(t) / self.gamma * self.h_bar
        w = t ** (-self.kappa)
        self.log_eps_bar = w * log_eps + (1.0 - w) * self.log_eps_bar
        self.step = math.exp(log_eps)
        return self.step

    @property
    def adapted_step(self) -> float:
        return math.exp(self.log_eps_bar)


def _find_initial_step(fn, x, inv_mass, rng) -> float:
    """Double/halve a unit step until one leapfrog crosses 0.5 acceptance."""
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return _find_initial_step_inner(fn, x, inv_mass, rng)


def _find_initial_step_inner(fn, x, inv_mass, rng) -> float:
    step = 1.0
    logp, grad = fn(x)
    p = rng.standard_normal(x.size) / np.sqrt(inv_mass)
    h0 = -logp + 0.5 * np.dot(p * p, inv_mass)
    x1, p1, logp1, _, ok = _leapfrog(fn, x, p, grad, step, 1, inv_mass)
    h1 = -logp1 + 0.5 * np.dot(p1 * p1, inv_mass) if ok else math.inf
    ratio = math.exp(min(0.0, h0 - h1)) if math.isfinite(h1) else 0.0
    direction = 1 if ratio > 0.5 else -1
    for _ in range(50):
        step *= 2.0 ** direction
        x1, p1, logp1, _, ok = _leapfrog(fn, x, p, grad, step, 1, inv_mass)
        h1 = -logp1 + 0.5 * np.dot(p1 * p1, inv_mass) if ok else math.inf
        ratio = math.exp(min(0.0, h0 - h1)) if math.isfinite(h1) else 0.0
        if (direction == 1 and ratio <= 0.5) or (direction == -1 and ratio >= 0.5):
            break
    return step


def _leapfrog(fn, x, p, grad, step, n_steps, inv_mass):
    """Integrate Hamilton's equations; returns (x, p, logp, grad, finite)."""
    x = x.copy()
    p = p + 0.5 * step * grad
    logp = -math.inf
    for i in range(n_steps):
        x = x + step * inv_mass * p
        logp, grad = fn(x)
        if not (math.isfinite(logp) and np.all(np.isfinite(grad))):
            return x, p, -math.inf, grad, False
        if i < n_steps - 1:
            p = p + step * grad
    p = p + 0.5 * step * grad
    return x, p, logp, grad, True


def _run_chain(fn, dim, init, config: SamplerConfig, chain: int):
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return _run_chain_inner(fn, dim, init, config, chain)


def _run_chain_inner(fn, dim, init, config: SamplerConfig, chain: int):
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(chain,))
    )
    x = np.asarray(init(rng), dtype=float)
    logp, grad = fn(x)
    if not (math.isfinite(logp) and np.all(np.isfinite(grad))):
        raise SamplingFailureError(
            f"chain {chain}: log density not finite at the initial position"
        )

    inv_mass = np.ones(dim)
    head, slow_windows, tail = _adaptation_windows(config.warmup)
    boundaries = []
    acc = head
    for w in slow_windows:
        acc += w
        boundaries.append(acc)

    step = _find_initial_step(fn, x, inv_mass, rng)
    da = _DualAveraging(step, config.target_accept)

    window_buffer: list[np.ndarray] = []
    draws = np.empty((config.draws, dim))
    divergences = 0
    accept_sum = 0.0
    total = config.warmup + config.draws

    for t in range(total):
        warming = t < config.warmup
        step = da.step if warming else da.adapted_step

        n_nominal = max(1, int(round(config.trajectory_length / step)))
        n_nominal = min(n_nominal, config.max_steps)
        # jitter the path length to break periodic orbits
        n_steps = int(rng.integers((n_nominal + 1) // 2, n_nominal + 1))
        n_steps = max(1, n_steps)

        z = rng.standard_normal(dim)
        p0 = z / np.sqrt(inv_mass)
        h0 = -logp + 0.5 * np.dot(p0 * p0, inv_mass)

        x1, p1, logp1, grad1, ok = _leapfrog(
            fn, x, p0, grad, step, n_steps, inv_mass
        )
        if ok:
            h1 = -logp1 + 0.5 * np.dot(p1 * p1, inv_mass)
            energy_error = h1 - h0
            divergent = not math.isfinite(energy_error) or energy_error > DIVERGENCE_ENERGY
            accept_prob = math.exp(min(0.0, -energy_error)) if not divergent else 0.0
        else:
            divergent = True
            accept_prob = 0.0

        if not divergent and rng.uniform() < accept_prob:
            x, logp, grad = x1, logp1, grad1

        if warming:
            da.update(accept_prob)
            if slow_windows and head < t + 1 <= boundaries[-1]:
                window_buffer.append(x.copy())
                if (t + 1) in boundaries:
                    buf = np.asarray(window_buffer)
                    n = buf.shape[0]
                    if n >= 2:
                        var = buf.var(axis=0, ddof=1)
                        # shrink toward unit scale, as a guard for short windows
                        inv_mass = (n / (n + 5.0)) * var + (5.0 / (n + 5.0)) * 1e-3
                        inv_mass = np.maximum(inv_mass, 1e-10)
                    window_buffer = []
                    step = _find_initial_step(fn, x, inv_mass, rng)
                    da = _DualAveraging(step, config.target_accept)
        else:
            k = t - config.warmup
            draws[k] = x
            accept_sum += accept_prob
            if divergent:
                divergences += 1

    if divergences >= config.draws:
        raise SamplingFailureError(
            f"chain {chain}: every post-warmup transition diverged"
        )
    return draws, divergences, da.adapted_step, accept_sum / config.draws


def sample(density, config: SamplerConfig, dim: int | None = None) -> PosteriorDraws:
    """Draw from a log density with gradient.

    ``density`` is either a model object exposing ``logpdf_and_grad``,
    ``dim``, ``param_names`` and ``initial_position``, or a bare callable
    ``x -> (logp, grad)`` together with ``dim``.

    Identical (density, config) yield bit-identical draws, with chains run
    serially or in parallel.
    """
    fn, dim, names, init = _as_density(density, dim)

    def one(chain):
        return _run_chain(fn, dim, init, config, chain)

    if config.parallel and config.chains > 1:
        with ThreadPoolExecutor(max_workers=config.chains) as pool:
            results = list(pool.map(one, range(config.chains)))
    else:
        results = [one(c) for c in range(config.chains)]

    return PosteriorDraws(
        param_names=names,
        draws=np.stack([r[0] for r in results]),
        divergences=np.array([r[1] for r in results]),
        step_sizes=np.array([r[2] for r in results]),
        accept_rates=np.array([r[3] for r in results]),
        seed=config.seed,
    )


# --- convergence diagnostics ----------------------------------------------


def _split_chains(chains: np.ndarray) -> np.ndarray:
    """Halve each chain (dropping a trailing odd draw) and stack the halves."""
    m, n = chains.shape
    half = n // 2
    return np.vstack([chains[:, :half], chains[:, n - half:]])


def split_rhat(chains: np.ndarray) -> float:
    """Potential scale reduction on split chains (between/within variance).

    Returns NaN when the within-chain variance is zero (degenerate chains)
    or when fewer than two split halves are available.
    """
    arr = _split_chains(np.asarray(chains, dtype=float))
    m, n = arr.shape
    if m < 2 or n < 2:
        return math.nan
    w = arr.var(axis=1, ddof=1).mean()
    b = n * np.var(arr.mean(axis=1), ddof=1)
    if w == 0.0:
        return math.nan
    var_plus = (n - 1) / n * w + b / n
    return float(math.sqrt(var_plus / w))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of one chain at all lags, via FFT."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real
    return acov / n


def ess_bulk(chains: np.ndarray) -> float:
    """Effective sample size from split chains and paired autocorrelations.

    Correlation sums stop at the first nonpositive pair (initial positive
    sequence) and are forced nonincreasing.  Degenerate (zero variance)
    input reports 0.
    """
    arr = _split_chains(np.asarray(chains, dtype=float))
    m, n = arr.shape
    if n < 4:
        return math.nan
    acov = np.vstack([_autocovariance(arr[c]) for c in range(m)])
    chain_var = acov[:, 0] * n / (n - 1.0)
    w = chain_var.mean()
    mean_var = w
    var_plus = mean_var * (n - 1.0) / n
    if m > 1:
        var_plus += np.var(arr.mean(axis=1), ddof=1)
    if var_plus == 0.0 or not math.isfinite(var_plus):
        return 0.0

    rho = 1.0 - (w - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0

    # Geyer pairing: keep while rho[2k] + rho[2k+1] > 0, then force monotone.
    tau = 0.0
    prev_pair = math.inf
    t = 0
    max_t = n - 2 if n % 2 == 0 else n - 1
    while t + 1 < max_t:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev_pair)
        tau += pair
        prev_pair = pair
        t += 2
    tau = max(2.0 * tau - 1.0, 1.0 / math.log10(m * n + 10.0))
    return float(m * n / tau)


@dataclass
class ConvergenceReport:
    rhat: dict[str, float]
    ess: dict[str, float]
    divergences: int
    passed: bool
    issues: list[str] = field(default_factory=list)
    rhat_threshold: float = 1.01
    ess_threshold: float = 400.0

    def as_dict(self) -> dict:
        return {
            "rhat": self.rhat,
            "ess": self.ess,
            "divergences": self.divergences,
            "passed": self.passed,
            "issues": self.issues,
            "thresholds": {
                "rhat": self.rhat_threshold,
                "ess": self.ess_threshold,
            },
        }


def convergence_report(
    draws: PosteriorDraws,
    rhat_threshold: float = 1.01,
    ess_threshold: float = 400.0,
) -> ConvergenceReport:
    """Per-parameter split R-hat and bulk ESS, with a pass/fail verdict.

    Passes iff every R-hat is below the threshold, every ESS above, and no
    transition diverged.  With a single chain, R-hat is unavailable and the
    verdict rests on ESS and divergences alone.
    """
    issues = []
    rhat: dict[str, float] = {}
    ess: dict[str, float] = {}
    single_chain = draws.n_chains < 2
    if single_chain:
        issues.append("R-hat unavailable: need at least 2 chains")
    for d, name in enumerate(draws.param_names):
        chains = draws.draws[:, :, d]
        ess[name] = ess_bulk(chains)
        if not single_chain:
            rhat[name] = split_rhat(chains)

    passed = True
    if not single_chain:
        for name, value in rhat.items():
            if not (value < rhat_threshold):  # NaN fails too
                issues.append(f"split R-hat for {name} is {value:.4g}")
                passed = False
    for name, value in ess.items():
        if not (value > ess_threshold):
            issues.append(f"ESS for {name} is {value:.4g}")
            passed = False
    total_div = int(draws.divergences.sum())
    if total_div > 0:
        issues.append(f"{total_div} divergent transition(s)")
        passed = False
    return ConvergenceReport(
        rhat=rhat,
        ess=ess,
        divergences=total_div,
        passed=passed,
        issues=issues,
        rhat_threshold=rhat_threshold,
        ess_threshold=ess_threshold,
    )
