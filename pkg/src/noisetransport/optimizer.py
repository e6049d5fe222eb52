"""Derivative-free tuning of dephasing rates and static-disorder Monte Carlo.

Local mode searches the N site dephasing rates in log10 space.  Correlated
mode searches a full dephasing matrix ``gamma = L L^T`` with ``L`` real lower
triangular: only the real symmetric part of ``gamma`` enters the generator,
and every real symmetric PSD matrix is reachable this way, so candidates are
positive semidefinite by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from ._parallel import chunked, flatten, parallel_map
from .network import ExcitonState, NetworkSpec, build_generator
from .propagator import psink_at

Mode = Literal["local", "correlated"]

RATE_BOUNDS = (1e-4, 1e3)


def transfer_efficiency(spec: NetworkSpec, t: float, initial_site: int = 1, check: bool = True) -> float:
    """p_sink(t) from an excitation on ``initial_site``, by exact propagation."""
    gen = build_generator(spec, check=check)
    return psink_at(gen, ExcitonState.localized(spec.n_sites, initial_site), t, method="expm")


class _BudgetExhausted(Exception):
    pass


class _Objective:
    def __init__(self, func, budget: int):
        self.func = func
        self.budget = budget
        self.calls = 0
        self.best_value = -np.inf
        self.best_x: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> float:
        if self.calls >= self.budget:
            raise _BudgetExhausted
        self.calls += 1
        value = self.func(x)
        if value > self.best_value:
            self.best_value = value
            self.best_x = np.array(x, copy=True)
        return -value

    @property
    def remaining(self) -> int:
        return self.budget - self.calls


@dataclass
class OptimizationResult:
    mode: Mode
    rates: np.ndarray  # length-N vector (local) or N x N matrix (correlated)
    p_sink: float
    start_psink: float
    evaluations: int
    exhausted: bool
    stages: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "rates": self.rates.tolist(),
            "p_sink": self.p_sink,
            "start_p_sink": self.start_psink,
            "evaluations": self.evaluations,
            "budget_exhausted": self.exhausted,
        }


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(x0.size)])


def _nelder_mead(obj: _Objective, x0: np.ndarray, step: float, maxfev: int) -> bool:
    """One simplex run; returns True if the global budget ran out."""
    try:
        minimize(
            obj,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": _simplex(x0, step),
                "maxfev": max(maxfev, x0.size + 2),
                "xatol": 1e-4,
                "fatol": 1e-9,
                "adaptive": True,
            },
        )
    except _BudgetExhausted:
        return True
    return obj.remaining <= 0


def _search_local(spec, t_target, budget, restarts, rng, start, bounds):
    lo, hi = np.log10(bounds[0]), np.log10(bounds[1])

    def rates_of(x):
        return 10.0 ** np.clip(x, lo, hi)

    obj = _Objective(lambda x: transfer_efficiency(spec.with_dephasing(rates_of(x)), t_target), budget)
    if start is None:
        x0 = np.full(spec.n_sites, lo)
    else:
        x0 = np.log10(np.clip(np.asarray(start, dtype=float), *bounds))
    start_value = -obj(x0)
    exhausted = obj.remaining <= 0
    rounds = max(1, restarts)
    for r in range(rounds):
        if exhausted:
            break
        share = obj.remaining // 2 if r == 0 else obj.remaining // (rounds - r)
        if r == 0:
            xs, step = x0, (hi - lo) / 2.0
        elif r % 2 == 1:
            xs, step = obj.best_x, 1.0
        else:
            xs, step = rng.uniform(-1.0, 2.0, spec.n_sites), 1.0
        exhausted = _nelder_mead(obj, xs, step, share)
    return rates_of(obj.best_x), obj.best_value, start_value, obj.calls, exhausted


def _tril_factor(gamma: np.ndarray) -> np.ndarray:
    sym = 0.5 * (gamma + gamma.T).real
    w, v = np.linalg.eigh(sym)
    factor = v * np.sqrt(np.clip(w, 0.0, None))
    # LL^T is unchanged by L -> LQ; QR of L^T gives a triangular factor
    _, r = np.linalg.qr(factor.T)
    return r.T


def _search_correlated(spec, t_target, budget, restarts, rng, start_matrix):
    n = spec.n_sites
    tri = np.tril_indices(n)

    def matrix_of(v):
        low = np.zeros((n, n))
        low[tri] = v
        return low @ low.T

    obj = _Objective(lambda v: transfer_efficiency(spec.with_dephasing(matrix_of(v)), t_target), budget)
    v0 = _tril_factor(start_matrix)[tri]
    start_value = -obj(v0)
    exhausted = obj.remaining <= 0
    step = 0.2 * np.sqrt(max(np.abs(start_matrix).max(), 1.0))
    rounds = max(1, restarts)
    for r in range(rounds):
        if exhausted:
            break
        share = obj.remaining // 2 if r == 0 else obj.remaining // (rounds - r)
        xs = obj.best_x if r == 0 or r % 2 == 1 else obj.best_x + rng.normal(0.0, step, v0.size)
        exhausted = _nelder_mead(obj, xs, step if r == 0 else step / 2.0, share)
    return matrix_of(obj.best_x), obj.best_value, start_value, obj.calls, exhausted


def optimize_dephasing(
    spec: NetworkSpec,
    t_target: float,
    mode: Mode = "local",
    budget: int = 2000,
    restarts: int = 8,
    seed: int = 0,
    start=None,
    rate_bounds: tuple[float, float] = RATE_BOUNDS,
) -> OptimizationResult:
    """Maximize p_sink(t_target) over dephasing rates with multi-start Nelder-Mead.

    Local mode starts from ``start`` (site rates) or from the dephasing-free
    corner of the search box.  Correlated mode starts from ``start`` (a rate
    vector or a dephasing matrix); without one it first runs local mode with
    the same budget and seed and continues from that optimum with a budget of
    its own.  The returned value is the best seen, never below the start.
    """
    if t_target <= 0:
        raise ValueError("t_target must be positive")
    if budget < 1:
        raise ValueError("budget must allow at least one evaluation")
    spec.validate()
    rng = np.random.Generator(np.random.Philox(seed))
    if mode == "local" and rate_bounds[1] <= 0:
        # empty search box: the only admissible point is zero dephasing
        value = transfer_efficiency(spec.with_dephasing(0.0), t_target)
        return OptimizationResult("local", np.zeros(spec.n_sites), value, value, 1, budget == 1)
    if mode == "local":
        rates, value, start_value, calls, exhausted = _search_local(
            spec, t_target, budget, restarts, rng, start, rate_bounds
        )
        return OptimizationResult("local", rates, value, start_value, calls, exhausted)
    if mode != "correlated":
        raise ValueError(f"unknown mode {mode!r}")
    stages = {}
    if start is None:
        local = optimize_dephasing(spec, t_target, "local", budget, restarts, seed, None, rate_bounds)
        stages["local"] = local
        start = local.rates
    start = np.asarray(start, dtype=float)
    start_matrix = np.diag(start) if start.ndim == 1 else start
    gamma, value, start_value, calls, exhausted = _search_correlated(
        spec, t_target, budget, restarts, rng, start_matrix
    )
    total = calls + sum(s.evaluations for s in stages.values())
    return OptimizationResult("correlated", gamma, value, start_value, total, exhausted, stages)


def perturb_hamiltonian(h: np.ndarray, disorder_frac: float, rng: np.random.Generator) -> np.ndarray:
    """Scale every independent entry (diagonal and upper triangle) by ``1 + U(-f, f)``."""
    n = h.shape[0]
    factors = 1.0 + rng.uniform(-disorder_frac, disorder_frac, (n, n))
    upper = np.triu(factors)
    sym = upper + np.triu(factors, 1).T
    return h * sym


@dataclass
class RobustnessResult:
    values: np.ndarray
    baseline: float
    counts: np.ndarray
    edges: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def std(self) -> float:
        return float(self.values.std())


def _robustness_chunk(spec: NetworkSpec, frac: float, t_eval: float, seeds) -> list[float]:
    out = []
    for seq in seeds:
        rng = np.random.Generator(np.random.Philox(seq))
        h = perturb_hamiltonian(np.asarray(spec.hamiltonian), frac, rng)
        out.append(transfer_efficiency(spec.with_hamiltonian(h), t_eval))
    return out


def robustness_sweep(
    spec: NetworkSpec,
    disorder_frac: float,
    samples: int,
    t_eval: float,
    seed: int = 0,
    workers: int | None = None,
    bins: int = 50,
) -> RobustnessResult:
    """p_sink(t_eval) distribution under static multiplicative Hamiltonian disorder."""
    if not 0 <= disorder_frac < 1:
        raise ValueError("disorder_frac must lie in [0, 1)")
    spec.validate()
    seeds = np.random.SeedSequence(seed).spawn(samples)
    parts = parallel_map(
        partial(_robustness_chunk, spec, disorder_frac, t_eval), chunked(seeds, 64), workers=workers
    )
    values = np.array(flatten(parts))
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    return RobustnessResult(values, transfer_efficiency(spec, t_eval), counts, edges)


def dephasing_sensitivity(spec: NetworkSpec, rates, scales, t: float) -> np.ndarray:
    """p_sink(t) with the local dephasing rates multiplied by each factor in ``scales``."""
    rates = np.asarray(rates, dtype=float)
    return np.array([transfer_efficiency(spec.with_dephasing(rates * s), t) for s in scales])
