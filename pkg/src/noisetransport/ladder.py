"""Classical Pauli master equation on an ascending ladder of sites.

Sites 1..N sit on a staircase of energy gaps; site N feeds an absorbing sink
at rate ``sink_rate`` (no factor two here: ``dp_sink/dt = sink_rate * p_N``).
Line broadening is modelled by adding Lorentzian (Cauchy) noise to every gap.
Each ensemble member is one static draw of the gaps (quenched disorder); the
rates then stay fixed during the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Literal

import numpy as np
from scipy.linalg import expm

from ._parallel import chunked, flatten, parallel_map
from .propagator import IntegrationError

HoppingMode = Literal["symmetric", "thermal"]


def lorentzian_rate(gap):
    """Symmetric nearest-neighbour hopping rate ``(1/4pi) / (gap^2 + 1/16)``."""
    gap = np.asarray(gap, dtype=float)
    return 1.0 / (4.0 * np.pi) / (gap**2 + 1.0 / 16.0)


@dataclass(frozen=True)
class LadderSpec:
    n_sites: int = 7
    level_spacing: float = 1.0
    sink_rate: float = 1.0
    hopping_mode: HoppingMode = "symmetric"
    temperature: float = 1.0
    broadening_width: float | None = None  # Cauchy scale; None means no broadening
    samples: int = 10_000
    rng_seed: int = 0
    clip: float = 50.0  # draws are clipped to |delta| <= clip * width

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ValueError("ladder needs at least two sites")
        if self.hopping_mode not in ("symmetric", "thermal"):
            raise ValueError(f"unknown hopping mode {self.hopping_mode!r}")
        if self.broadening_width is not None and self.broadening_width <= 0:
            raise ValueError("broadening width must be positive")
        if self.hopping_mode == "thermal" and self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.sink_rate < 0:
            raise ValueError("sink rate must be non-negative")

    def static_gaps(self) -> np.ndarray:
        return np.full(self.n_sites - 1, float(self.level_spacing))


def rate_matrix(spec: LadderSpec, gaps) -> np.ndarray:
    """Generator ``A`` with ``d(p_1..p_N, p_sink)/dt = A p``.

    ``gaps[i]`` is ``E_{i+2} - E_{i+1}`` (1-based sites).  In thermal mode the
    downhill hop has rate ``f(gap)`` and the uphill one ``f(gap) exp(-|gap|/T)``.
    """
    gaps = np.asarray(gaps, dtype=float)
    n = spec.n_sites
    if gaps.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} gaps, got shape {gaps.shape}")
    a = np.zeros((n + 1, n + 1))
    base = lorentzian_rate(gaps)
    for i, (gap, k) in enumerate(zip(gaps, base)):
        if spec.hopping_mode == "symmetric":
            up = down = k
        else:
            boltzmann = np.exp(-abs(gap) / spec.temperature)
            up, down = (k * boltzmann, k) if gap >= 0 else (k, k * boltzmann)
        # up: i -> i+1, down: i+1 -> i
        a[i + 1, i] += up
        a[i, i] -= up
        a[i, i + 1] += down
        a[i + 1, i + 1] -= down
    a[n, n - 1] += spec.sink_rate
    a[n - 1, n - 1] -= spec.sink_rate
    return a


@dataclass
class LadderTrajectory:
    times: np.ndarray
    populations: np.ndarray  # (T, N)
    p_sink: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.populations.sum(axis=1) + self.p_sink


def ladder_evolve(spec: LadderSpec, gaps, t_grid, tol: float = 1e-9) -> LadderTrajectory:
    """Propagate ``p_1 = 1`` through the rate equations and sample on ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(t < 0):
        raise ValueError("t_grid must be 1-D and non-negative")
    a = rate_matrix(spec, gaps)
    p0 = np.zeros(spec.n_sites + 1)
    p0[0] = 1.0
    ps = np.array([expm(a * ti) @ p0 for ti in t]).reshape(t.size, -1)
    if ps.size and ps.min() < -tol:
        raise IntegrationError(f"negative probability {ps.min():.3e} in the ladder solution")
    return LadderTrajectory(t, ps[:, :-1], ps[:, -1])


def ladder_psink(spec: LadderSpec, gaps, t: float) -> float:
    return float(ladder_evolve(spec, gaps, [t]).p_sink[0])


def sample_gaps(spec: LadderSpec, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """One broadened gap realization and the number of clipped draws."""
    if spec.broadening_width is None:
        return spec.static_gaps(), 0
    w = spec.broadening_width
    delta = rng.standard_cauchy(spec.n_sites - 1) * w
    limit = spec.clip * w
    clipped = int(np.count_nonzero(np.abs(delta) > limit))
    return spec.static_gaps() + np.clip(delta, -limit, limit), clipped


@dataclass
class LadderEnsemble:
    values: np.ndarray
    static_psink: float
    clip_fraction: float
    counts: np.ndarray
    edges: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def std(self) -> float:
        return float(self.values.std())


def _run_chunk(spec: LadderSpec, t_final: float, seeds) -> list[tuple[float, int]]:
    out = []
    for seq in seeds:
        gaps, clipped = sample_gaps(spec, np.random.default_rng(seq))
        out.append((ladder_psink(spec, gaps, t_final), clipped))
    return out


def ladder_broadened_ensemble(
    spec: LadderSpec,
    t_final: float,
    bins: int = 50,
    workers: int | None = None,
) -> LadderEnsemble:
    """Distribution of p_sink(t_final) over independent broadened realizations.

    Sample ``i`` uses the ``i``-th child of ``SeedSequence(rng_seed)``, so the
    result does not depend on ``workers``.
    """
    if spec.broadening_width is None:
        raise ValueError("ensemble requires a broadening width")
    seeds = np.random.SeedSequence(spec.rng_seed).spawn(spec.samples)
    parts = parallel_map(
        partial(_run_chunk, spec, t_final), chunked(seeds, 64), workers=workers
    )
    results = flatten(parts)
    values = np.array([v for v, _ in results])
    n_clipped = sum(c for _, c in results)
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    return LadderEnsemble(
        values=values,
        static_psink=ladder_psink(spec, spec.static_gaps(), t_final),
        clip_fraction=n_clipped / (spec.samples * (spec.n_sites - 1)),
        counts=counts,
        edges=edges,
    )
