"""Time integration of the master equation and sink-population extraction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .network import ExcitonState, Generator

CSV_HEADER = "# noisetransport trajectory v1"

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12

_IMPLICIT = {"Radau", "BDF", "LSODA"}


class IntegrationError(RuntimeError):
    """The integrator failed or the solution broke a conservation law."""


@dataclass
class Trajectory:
    times: np.ndarray
    rho: np.ndarray  # (T, N, N) complex
    p_ground: np.ndarray
    p_sink: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_sites(self) -> int:
        return self.rho.shape[1]

    @property
    def populations(self) -> np.ndarray:
        return np.einsum("tii->ti", self.rho).real

    @property
    def trace_defect(self) -> np.ndarray:
        return np.abs(self.populations.sum(axis=1) + self.p_ground + self.p_sink - 1.0)

    def state(self, i: int) -> ExcitonState:
        return ExcitonState(self.rho[i].copy(), float(self.p_ground[i]), float(self.p_sink[i]))

    @property
    def final(self) -> ExcitonState:
        return self.state(-1)

    def states(self) -> Iterator[ExcitonState]:
        for i in range(len(self)):
            yield self.state(i)

    def to_csv(self, fh: IO[str], coherences: bool = False) -> None:
        write_trajectory_csv(self, fh, coherences=coherences)


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("t_grid must be a non-empty 1-D array")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    return t


def _trajectory_from_packed(gen: Generator, t: np.ndarray, ys: np.ndarray) -> Trajectory:
    n = gen.n_sites
    n2 = n * n
    rho = (ys[:, :n2] + 1j * ys[:, n2 : 2 * n2]).reshape(-1, n, n)
    return Trajectory(t, rho, ys[:, -2].copy(), ys[:, -1].copy())


def _verify(traj: Trajectory, tol: float) -> None:
    bound = 100.0 * tol
    defect = traj.trace_defect
    if defect.max() > bound:
        i = int(defect.argmax())
        raise IntegrationError(
            f"probability conservation broken at t={traj.times[i]:.6g} (defect {defect[i]:.3e})"
        )
    drop = np.diff(traj.p_sink)
    if drop.size and drop.min() < -bound:
        raise IntegrationError("p_sink decreased along the trajectory")


def evolve(
    generator: Generator,
    initial: ExcitonState,
    t_grid,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    method: str = "DOP853",
    check: bool = True,
) -> Trajectory:
    """Integrate from ``t_grid[0]`` and sample the solution on ``t_grid``.

    ``method`` is any explicit or implicit :func:`scipy.integrate.solve_ivp`
    scheme, or ``"expm"`` for exact propagation with the matrix exponential of
    the (time-independent) Liouvillian.  The sink population is carried as a
    state variable, so no quadrature is involved.
    """
    t = _check_grid(t_grid)
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    y0 = generator.pack(initial)
    m = generator.superoperator()
    if t.size == 1:
        ys = y0[None, :]
    elif method == "expm":
        ys = _propagate_expm(m, y0, t)
    else:
        sol = solve_ivp(
            lambda _t, y: m @ y,
            (t[0], t[-1]),
            y0,
            method=method,
            t_eval=t,
            rtol=rtol,
            atol=atol,
            **({"jac": m} if method in _IMPLICIT else {}),
        )
        if sol.status != 0:
            raise IntegrationError(f"integration aborted: {sol.message}")
        ys = sol.y.T
    traj = _trajectory_from_packed(generator, t, ys)
    if check:
        _verify(traj, rtol)
    return traj


def _propagate_expm(m: np.ndarray, y0: np.ndarray, t: np.ndarray) -> np.ndarray:
    ys = np.empty((t.size, y0.size))
    ys[0] = y0
    cache: dict[float, np.ndarray] = {}
    for i, dt in enumerate(np.diff(t), start=1):
        key = round(float(dt), 12)
        step = cache.get(key)
        if step is None:
            step = cache[key] = expm(m * dt)
        ys[i] = step @ ys[i - 1]
    return ys


def psink_at(generator: Generator, initial: ExcitonState, t: float, **kwargs) -> float:
    """Sink population at time ``t`` starting from ``initial`` at time 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return float(initial.p_sink)
    traj = evolve(generator, initial, [0.0, float(t)], **kwargs)
    return float(traj.p_sink[-1])


@dataclass
class SteadyState:
    p_sink: float
    converged: bool
    time: float
    state: ExcitonState


def characteristic_rates(generator: Generator) -> np.ndarray:
    """All non-zero rates entering the generator (couplings, energies and noise)."""
    rates = np.concatenate(
        [
            np.abs(generator.hamiltonian).ravel(),
            np.abs(generator.damping).ravel(),
            generator.dissipation,
            [generator.sink_rate],
        ]
    )
    return rates[rates > 1e-300]


def default_horizon(generator: Generator) -> float:
    rates = characteristic_rates(generator)
    return 1e3 / rates.min() if rates.size else 1.0


def steady_state_psink(
    generator: Generator,
    initial: ExcitonState,
    horizon: float | None = None,
    settle_tol: float = 1e-10,
    windows: int = 50,
    samples_per_window: int = 64,
    **kwargs,
) -> SteadyState:
    """Integrate until the sink inflow stays below ``settle_tol * sink_rate``.

    The horizon is split into ``windows`` consecutive integration windows; the
    run stops at the end of the first window over which the sampled inflow
    ``2 * sink_rate * rho_kk`` never exceeds the threshold.  If the horizon is
    reached first the last value is returned with ``converged=False``.
    """
    if horizon is None:
        horizon = default_horizon(generator)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if generator.sink_rate == 0:
        return SteadyState(float(initial.p_sink), True, 0.0, initial)
    threshold = settle_tol * generator.sink_rate
    width = horizon / windows
    state = initial
    t0 = 0.0
    k = generator.sink_index
    for _ in range(windows):
        grid = t0 + np.linspace(0.0, width, samples_per_window + 1)
        traj = evolve(generator, state, grid, **kwargs)
        state = traj.final
        t0 = float(grid[-1])
        inflow = 2.0 * generator.sink_rate * np.abs(traj.rho[:, k, k].real)
        if inflow.max() < threshold:
            return SteadyState(state.p_sink, True, t0, state)
    return SteadyState(state.p_sink, False, t0, state)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, fh: IO[str], coherences: bool = False) -> None:
    """One row per time: ``t, p_sink, p_ground, rho_i_i..., [abs_rho_i_j...]``."""
    n = traj.n_sites
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)] if coherences else []
    fh.write(CSV_HEADER + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    header = ["t", "p_sink", "p_ground"] + [f"rho_{i + 1}_{i + 1}" for i in range(n)]
    header += [f"abs_rho_{i + 1}_{j + 1}" for i, j in pairs]
    writer.writerow(header)
    pops = traj.populations
    for ti in range(len(traj)):
        row = [_fmt(traj.times[ti]), _fmt(traj.p_sink[ti]), _fmt(traj.p_ground[ti])]
        row += [_fmt(p) for p in pops[ti]]
        row += [_fmt(abs(traj.rho[ti, i, j])) for i, j in pairs]
        writer.writerow(row)


@dataclass
class TrajectoryTable:
    """Contents of a trajectory CSV; ``moduli`` holds |rho_ij| for i < j (0-based keys)."""

    times: np.ndarray
    p_sink: np.ndarray
    p_ground: np.ndarray
    populations: np.ndarray
    moduli: dict[tuple[int, int], np.ndarray]


def read_trajectory_csv(fh: IO[str] | str) -> TrajectoryTable:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    rows = np.array([[float(x) for x in r] for r in reader if r])
    if rows.size == 0:
        rows = rows.reshape(0, len(header))
    col = {name: idx for idx, name in enumerate(header)}
    pop_cols = [c for c in header if c.startswith("rho_")]
    moduli = {}
    for name in header:
        if name.startswith("abs_rho_"):
            _, _, i, j = name.split("_")
            moduli[(int(i) - 1, int(j) - 1)] = rows[:, col[name]]
    return TrajectoryTable(
        times=rows[:, col["t"]],
        p_sink=rows[:, col["p_sink"]],
        p_ground=rows[:, col["p_ground"]],
        populations=rows[:, [col[c] for c in pop_cols]],
        moduli=moduli,
    )
