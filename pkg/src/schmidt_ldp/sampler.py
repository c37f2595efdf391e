"""Monte Carlo samplers for wall-constrained Schmidt spectra.

Two independent routes to the fixed-trace eigenvalue law

    P({lam}) ~ prod_i lam_i^(beta (m-n+1)/2 - 1) * prod_{i<j} |lam_i - lam_j|^beta,
    sum_i lam_i = 1,

optionally conditioned on a floor/ceiling for the rescaled spectrum:

- a Metropolis chain with symmetric pair-transfer proposals (lam_i += eps,
  lam_j -= eps), which preserves the trace exactly and enforces the wall by
  rejection; and
- exact direct sampling from Gaussian pure states (beta in {1, 2}), used for
  cross-validation and for small-n tail probabilities where the constrained
  event is still resolvable by rejection counting.

One chain "sweep" is n proposal attempts.  All randomness flows through a
numpy Generator, so identical seed + config reproduces the identical sample
stream; the hot loop is JIT-compiled but consumes pre-drawn numpy variates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .params import BarrierSpec, EnsembleParams, WallSide

__all__ = ["Spectrum", "ChainConfig", "ChainDiagnostics", "TailEstimate",
           "log_weight", "propose_pair_transfer", "mcmc_sample",
           "collect_spectra", "direct_pure_state_spectrum", "direct_spectra",
           "estimate_tail_probability", "tail_probability_curve",
           "autocorrelation_time"]


@dataclass(frozen=True)
class Spectrum:
    """An eigenvalue configuration on the unit simplex, stored ascending."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("spectrum entries must lie in [0, 1]")
        if abs(v.sum() - 1.0) > 1e-12:
            raise ValueError(f"spectrum must sum to 1, got {v.sum()!r}")
        if np.any(np.diff(v) < 0):
            object.__setattr__(self, "values", np.sort(v))

    @property
    def n(self) -> int:
        return len(self.values)

    def entropy(self) -> float:
        v = self.values[self.values > 0]
        return float(-np.sum(v * np.log(v)))

    def purity(self) -> float:
        return float(np.sum(self.values ** 2))


@dataclass
class ChainConfig:
    """Metropolis chain settings.

    steps       total sweeps, including burn-in (one sweep = n proposals)
    burn_in     sweeps discarded up front; the proposal half-width is tuned
                toward 20-50% acceptance during burn-in and then frozen
    step_width  initial proposal half-width in lambda units (None: 0.1/n)
    thin        keep every thin-th sweep after burn-in; None derives
                ceil(2 * tau) from the lambda_min autocorrelation time,
                measured on a short calibration segment after burn-in
    seed        RNG seed for the reproducible sample stream
    """

    steps: int
    burn_in: int = 0
    step_width: Optional[float] = None
    thin: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.steps <= self.burn_in or self.burn_in < 0:
            raise ValueError("need steps > burn_in >= 0")
        if self.step_width is not None and not self.step_width > 0:
            raise ValueError("step_width must be positive")
        if self.thin is not None and self.thin < 1:
            raise ValueError("thin must be >= 1")


@dataclass
class ChainDiagnostics:
    acceptance_rate: float
    autocorrelation_time: float
    n_kept: int
    step_width: float = 0.0
    thin: int = 1
    warning: Optional[str] = None


@dataclass(frozen=True)
class TailEstimate:
    """Rejection-counting estimate of P(n * lambda_min > zeta)."""

    p_hat: float
    stderr: float
    n_draws: int
    n_hits: int
    zero_successes: bool = False


# ---------------------------------------------------------------------------
# the eigenvalue log-weight
# ---------------------------------------------------------------------------

def log_weight(spectrum, params: EnsembleParams) -> float:
    """Log of the fixed-trace eigenvalue weight, up to the normalization the
    sampler never needs.  -inf for nonpositive entries or exact degeneracies.
    """
    lam = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    if np.any(lam <= 0):
        return -math.inf
    a_exp = params.beta * (params.m - params.n + 1) / 2.0 - 1.0
    diffs = lam[:, None] - lam[None, :]
    iu = np.triu_indices(len(lam), 1)
    gaps = np.abs(diffs[iu])
    if np.any(gaps == 0):
        return -math.inf
    return float(a_exp * np.sum(np.log(lam)) + params.beta * np.sum(np.log(gaps)))


def propose_pair_transfer(spectrum, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric pair-transfer proposal: move eps ~ U(-delta, delta) from one
    eigenvalue to another, preserving the trace exactly.

    Returns the raw candidate array; out-of-range candidates (negative or
    wall-violating entries) are intentionally representable and are rejected
    by the acceptance step, never here.
    """
    lam = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    n = len(lam)
    i = int(rng.integers(0, n))
    j = int(rng.integers(0, n - 1))
    if j >= i:
        j += 1
    eps = rng.uniform(-delta, delta)
    cand = lam.copy()
    cand[i] += eps
    cand[j] -= eps
    return cand


# ---------------------------------------------------------------------------
# JIT-compiled proposal loop
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pair_transfer_block(lam, a_exp, beta, lo, hi, ii, jj, eps, logu):
    """Run len(ii) sequential pair-transfer proposals in place.

    The log-weight change is accumulated as a running product of distance
    ratios (one log at the end), with an overflow/underflow reset; this is
    algebraically the incremental form of log_weight and was cross-checked
    against full recomputation.
    """
    n = lam.shape[0]
    accepted = 0
    for t in range(ii.shape[0]):
        i = ii[t]
        j = jj[t]
        if j >= i:
            j += 1
        e = eps[t]
        ai = lam[i] + e
        aj = lam[j] - e
        if ai < lo or ai > hi or aj < lo or aj > hi or ai <= 0.0 or aj <= 0.0:
            continue
        li = lam[i]
        lj = lam[j]
        prod = 1.0
        slog = 0.0
        degenerate = False
        for k in range(n):
            if k == i or k == j:
                continue
            lk = lam[k]
            num = abs((ai - lk) * (aj - lk))
            if num == 0.0:
                degenerate = True
                break
            prod *= num / abs((li - lk) * (lj - lk))
            if prod > 1e250 or prod < 1e-250:
                slog += np.log(prod)
                prod = 1.0
        if degenerate:
            continue
        gap_new = abs(ai - aj)
        if gap_new == 0.0:
            continue
        dlog = (a_exp * np.log((ai * aj) / (li * lj))
                + beta * (slog + np.log(prod * gap_new / abs(li - lj))))
        if logu[t] < dlog:
            lam[i] = ai
            lam[j] = aj
            accepted += 1
    return accepted


class _Chain:
    """Mutable chain state; drives the JIT kernel with pre-drawn variates."""

    def __init__(self, params: EnsembleParams, barrier: BarrierSpec,
                 rng: np.random.Generator, step_width: Optional[float]):
        n = params.n
        if n < 2:
            raise ValueError("the pair-transfer chain needs n >= 2")
        if barrier.side is WallSide.MIN:
            if barrier.zeta >= 1.0:
                raise ValueError("a floor at zeta >= 1 leaves no feasible spectra")
            self.lo, self.hi = barrier.zeta / n, math.inf
        elif barrier.side is WallSide.MAX:
            if barrier.zeta <= 1.0:
                raise ValueError("a ceiling at zeta <= 1 leaves no feasible spectra")
            self.lo, self.hi = 0.0, barrier.zeta / n
        else:
            self.lo, self.hi = 0.0, math.inf
        self.n = n
        self.params = params
        self.rng = rng
        self.a_exp = params.beta * (params.m - n + 1) / 2.0 - 1.0
        self.delta = step_width if step_width is not None else 0.1 / n
        # deterministic feasible start: uniform spectrum plus a linear ramp
        # small enough to respect both walls (the ramp sums to zero exactly)
        room = min(1.0 - n * self.lo if math.isfinite(self.lo) else 1.0,
                   n * self.hi - 1.0 if math.isfinite(self.hi) else 1.0,
                   1.0)
        eta = room / (n * (n - 1))
        self.lam = 1.0 / n + eta * (np.arange(n) - (n - 1) / 2.0)

    def run(self, n_sweeps: int) -> float:
        """Advance n_sweeps sweeps; returns the acceptance fraction."""
        if n_sweeps <= 0:
            return 0.0
        n_prop = n_sweeps * self.n
        rng = self.rng
        ii = rng.integers(0, self.n, size=n_prop)
        jj = rng.integers(0, self.n - 1, size=n_prop)
        eps = rng.uniform(-self.delta, self.delta, size=n_prop)
        logu = np.log(rng.random(size=n_prop))
        acc = _pair_transfer_block(self.lam, self.a_exp, self.params.beta,
                                   self.lo, self.hi, ii, jj, eps, logu)
        return acc / n_prop

    def run_tracking_min(self, n_sweeps: int) -> tuple[float, np.ndarray]:
        mins = np.empty(n_sweeps)
        acc = 0.0
        for s in range(n_sweeps):
            acc += self.run(1)
            mins[s] = self.lam.min()
        return acc / max(n_sweeps, 1), mins

    def tune(self, n_blocks: int = 40, block: int = 50) -> None:
        """Scale the proposal width toward 20-50% acceptance, then freeze."""
        for _ in range(n_blocks):
            acc = self.run(block)
            if acc > 0.5:
                self.delta *= 1.3
            elif acc < 0.2:
                self.delta /= 1.3


def autocorrelation_time(series: np.ndarray) -> float:
    """Integrated autocorrelation time by Geyer's initial-positive-sequence
    rule (variance inflation = 2 * tau; white noise gives tau = 1/2)."""
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 4:
        return 0.5
    y = y - y.mean()
    f = np.fft.rfft(y, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    if acov[0] <= 0:
        return 0.5
    rho = acov / acov[0]
    tau = 0.0
    m = 0
    while 2 * m + 1 < n:
        gamma = rho[2 * m] + rho[2 * m + 1]
        if gamma <= 0:
            break
        tau += gamma
        m += 1
    return max(tau - 0.5, 0.5)


def _burn_and_calibrate(chain: "_Chain", burn_in: int, budget: int,
                        thin_opt: Optional[int]):
    """Burn in with width tuning, then measure the lambda_min autocorrelation
    time on a short per-sweep segment.  Returns (thin, tau, calibration sweeps
    consumed, acceptance-weighted sweep count)."""
    tune_sweeps = min(burn_in, 2000)
    blocks = max(tune_sweeps // 50, 1) if burn_in else 0
    if blocks:
        chain.tune(n_blocks=blocks, block=50)
        chain.run(burn_in - blocks * 50)
    if thin_opt is None:
        calib = min(max(budget // 10, 200), 1000, max(budget // 2, 1))
    else:
        calib = min(200, budget // 4)
    acc_sweeps = 0.0
    tau = 0.5
    if calib > 0:
        acc, mins = chain.run_tracking_min(calib)
        acc_sweeps = acc * calib
        tau = autocorrelation_time(mins)
    thin = thin_opt if thin_opt is not None else int(math.ceil(2.0 * tau))
    return thin, tau, calib, acc_sweeps


def _diagnostics(chain: "_Chain", acc_sweeps: float, sampled: int, tau: float,
                 thin: int, n_kept: int) -> ChainDiagnostics:
    acceptance = float(acc_sweeps / max(sampled, 1))
    warning = None
    if not 0.05 <= acceptance <= 0.95:
        warning = f"acceptance rate {acceptance:.3f} outside [0.05, 0.95]"
    return ChainDiagnostics(acceptance_rate=acceptance,
                            autocorrelation_time=float(tau), n_kept=n_kept,
                            step_width=chain.delta, thin=thin, warning=warning)


def mcmc_sample(params: EnsembleParams, barrier: BarrierSpec,
                cfg: ChainConfig) -> tuple[list[Spectrum], ChainDiagnostics]:
    """Metropolis samples of the wall-constrained spectrum.

    Burn-in tunes the proposal width and is discarded; a short calibration
    segment after burn-in estimates the lambda_min autocorrelation time, which
    sets thin = ceil(2 * tau) when cfg.thin is None.  Every emitted spectrum
    satisfies the trace and wall constraints exactly (the proposal preserves
    the trace, the wall rejects).
    """
    rng = np.random.default_rng(cfg.seed)
    chain = _Chain(params, barrier, rng, cfg.step_width)
    budget = cfg.steps - cfg.burn_in
    thin, tau, calib, acc_sweeps = _burn_and_calibrate(chain, cfg.burn_in, budget,
                                                       cfg.thin)
    budget -= calib
    kept: list[Spectrum] = []
    sampled = calib
    while budget >= thin:
        acc_sweeps += chain.run(thin) * thin
        sampled += thin
        budget -= thin
        kept.append(Spectrum(np.sort(chain.lam.copy())))
    return kept, _diagnostics(chain, acc_sweeps, sampled, tau, thin, len(kept))


def collect_spectra(params: EnsembleParams, barrier: BarrierSpec,
                    n_samples: int, *, seed: int, burn_in: int = 2000,
                    step_width: Optional[float] = None,
                    thin: Optional[int] = None
                    ) -> tuple[list[Spectrum], ChainDiagnostics]:
    """Open-ended variant of mcmc_sample: runs the chain until exactly
    n_samples decorrelated spectra have been emitted (burn-in, tuning and
    thinning as in mcmc_sample, without a fixed sweep budget)."""
    rng = np.random.default_rng(seed)
    chain = _Chain(params, barrier, rng, step_width)
    thin, tau, calib, acc_sweeps = _burn_and_calibrate(
        chain, burn_in, max(10 * n_samples, 2000), thin)
    kept: list[Spectrum] = []
    sampled = calib
    for _ in range(n_samples):
        acc_sweeps += chain.run(thin) * thin
        sampled += thin
        kept.append(Spectrum(np.sort(chain.lam.copy())))
    return kept, _diagnostics(chain, acc_sweeps, sampled, tau, thin, len(kept))


# ---------------------------------------------------------------------------
# exact direct sampling from Gaussian pure states
# ---------------------------------------------------------------------------

def direct_spectra(params: EnsembleParams, n_draws: int,
                   rng: np.random.Generator, batch: int = 1024) -> np.ndarray:
    """(n_draws, n) ascending eigenvalue samples of the reduced density matrix
    of Haar-random pure states, from i.i.d. Gaussian amplitudes (beta in {1,2})."""
    if params.beta not in (1, 2):
        raise ValueError("direct sampling supports beta = 1 (real) or 2 (complex)")
    n, m = params.n, params.m
    out = np.empty((n_draws, n))
    done = 0
    while done < n_draws:
        b = min(batch, n_draws - done)
        if params.beta == 2:
            c = rng.standard_normal((b, n, m)) + 1j * rng.standard_normal((b, n, m))
        else:
            c = rng.standard_normal((b, n, m))
        gram = c @ np.conj(np.swapaxes(c, 1, 2))
        evals = np.linalg.eigvalsh(gram)
        traces = np.trace(gram, axis1=1, axis2=2).real
        out[done:done + b] = np.clip(evals.real, 0.0, None) / traces[:, None]
        done += b
    return out


def direct_pure_state_spectrum(params: EnsembleParams,
                               rng: np.random.Generator) -> Spectrum:
    """One exact, chain-independent sample of the fixed-trace eigenvalue law."""
    vals = direct_spectra(params, 1, rng)[0]
    return Spectrum(vals / vals.sum())


def estimate_tail_probability(params: EnsembleParams, zeta: float, n_draws: int,
                              rng: np.random.Generator) -> TailEstimate:
    """P(n * lambda_min > zeta) by direct rejection counting with binomial
    standard error.  Intended for small n, where the tail is resolvable; with
    zero successes the stderr field carries the 95% upper confidence bound."""
    return tail_probability_curve(params, [zeta], n_draws, rng)[0]


def tail_probability_curve(params: EnsembleParams, zetas, n_draws: int,
                           rng: np.random.Generator) -> list[TailEstimate]:
    """Tail estimates over several floor positions from one shared sample set,
    so the curve is monotone non-increasing by construction."""
    if not 0 < n_draws:
        raise ValueError("need a positive number of draws")
    mins = direct_spectra(params, n_draws, rng)[:, 0] * params.n
    out = []
    for z in zetas:
        hits = int(np.sum(mins > z))
        p = hits / n_draws
        if hits == 0:
            out.append(TailEstimate(0.0, 3.0 / n_draws, n_draws, 0, True))
        else:
            se = math.sqrt(p * (1.0 - p) / n_draws)
            out.append(TailEstimate(p, se, n_draws, hits, False))
    return out
