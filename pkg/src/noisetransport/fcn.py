"""Closed-form and reduced-variable results for uniform fully connected networks.

For a uniform network (all couplings J, equal site energies, equal local
dissipation Gamma and dephasing gamma, sink on site N) the populations that
matter close over six collective variables:

    Lambda = sum_ij rho_ij,  R_N = X + iY = sum_j rho_Nj,  rho_NN,  rho_00,  p_sink.

These results serve as independent oracles for the general propagator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .network import ExcitonState


@dataclass(frozen=True)
class CollectiveState:
    Lambda: float
    X: float
    Y: float
    rho_NN: float
    rho_00: float
    p_sink: float

    @classmethod
    def initial(cls) -> CollectiveState:
        """Excitation localized on site 1."""
        return cls(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.Lambda, self.X, self.Y, self.rho_NN, self.rho_00, self.p_sink])


@dataclass
class CollectiveTrajectory:
    times: np.ndarray
    values: np.ndarray  # (T, 6): Lambda, X, Y, rho_NN, rho_00, p_sink

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> CollectiveState:
        return CollectiveState(*map(float, self.values[i]))

    @property
    def p_sink(self) -> np.ndarray:
        return self.values[:, 5]

    @property
    def rho_NN(self) -> np.ndarray:
        return self.values[:, 3]


def _check_uniform(N: int, J: float, Gamma: float, gamma: float, sink_rate: float) -> None:
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if min(Gamma, gamma, sink_rate) < 0:
        raise ValueError("rates must be non-negative")


def reduced_matrix(N: int, J: float, Gamma: float, gamma: float, sink_rate: float) -> np.ndarray:
    """Affine generator of the collective variables, augmented by a constant 1."""
    _check_uniform(N, J, Gamma, gamma, sink_rate)
    G, g, Gs = Gamma, gamma, sink_rate
    b = 2 * G + 2 * g + Gs
    # columns: Lambda, X, Y, rho_NN, rho_00, p_sink, 1
    return np.array(
        [
            [-2 * (G + g), -2 * Gs, 0, 0, -2 * g, -2 * g, 2 * g],
            [0, -b, -J * N, 2 * g - Gs, 0, 0, 0],
            [-J, J * N, -b, 0, 0, 0, 0],
            [0, 0, -2 * J, -2 * (G + Gs), 0, 0, 0],
            [0, 0, 0, 0, -2 * G, -2 * G, 2 * G],
            [0, 0, 0, 2 * Gs, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, 0],
        ],
        dtype=float,
    )


def fcn_reduced_evolve(
    N: int,
    J: float,
    Gamma: float,
    gamma: float,
    sink_rate: float,
    t_grid,
    initial: CollectiveState | None = None,
) -> CollectiveTrajectory:
    """Solve the closed six-variable system on ``t_grid`` (starting at t = 0).

    The system is linear with constant coefficients, so it is propagated exactly
    with a 7x7 matrix exponential per grid point.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(t < 0):
        raise ValueError("t_grid must be a 1-D array of non-negative times")
    m = reduced_matrix(N, J, Gamma, gamma, sink_rate)
    y0 = np.append((initial or CollectiveState.initial()).as_array(), 1.0)
    values = np.array([expm(m * ti) @ y0 for ti in t])[:, :6]
    return CollectiveTrajectory(t, values)


def _noiseless_roots(N: int, J: float, sink_rate: float):
    gs2 = sink_rate**2
    jn2 = (J * N) ** 2
    radicand = (gs2 + jn2) ** 2 - 16 * (N - 1) * gs2 * J**2
    root = np.sqrt(max(radicand, 0.0))
    d_plus = np.sqrt(complex(0.5 * (gs2 - jn2) + 0.5 * root))
    d_minus = np.sqrt(complex(0.5 * (gs2 - jn2) - 0.5 * root))
    return d_plus, d_minus, root


def fcn_rhoNN(N: int, J: float, sink_rate: float, t):
    """Sink-site population of the noiseless uniform network, excitation starting on site 1."""
    if N < 2 or J <= 0 or sink_rate <= 0:
        raise ValueError("need N >= 2 and positive J, sink_rate")
    t_arr = np.asarray(t, dtype=float)
    d_plus, d_minus, root = _noiseless_roots(N, J, sink_rate)
    envelope = 2 * J**2 * np.exp(-sink_rate * t_arr)
    scale = sink_rate**2 + (J * N) ** 2
    if root < 1e-12 * scale:
        # Coalescing roots (N = 2, sink_rate = 2J): the bracket tends to S t^2 / 2.
        val = envelope * t_arr**2 / 2 + 0j
    else:
        val = envelope * (np.cosh(d_plus * t_arr) - np.cosh(d_minus * t_arr)) / root
    if np.max(np.abs(np.imag(val)), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(val), initial=0.0)):
        raise ArithmeticError("complex branch of rho_NN did not cancel")
    out = np.real(val)
    return float(out) if np.ndim(out) == 0 else out


def fcn_psink_noiseless_quadrature(N: int, J: float, sink_rate: float) -> tuple[float, float]:
    """``2 sink_rate * int_0^inf rho_NN`` by quadrature, with a bound on the omitted tail.

    The integral is truncated where the exponential envelope drops below
    1e-14; the returned bound majorizes the discarded tail.
    """
    d_plus, d_minus, root = _noiseless_roots(N, J, sink_rate)
    decay = sink_rate - max(d_plus.real, d_minus.real)
    if decay <= 0:
        raise ArithmeticError("noiseless modes do not decay")
    t_end = np.log(1e14) / decay
    pieces = np.linspace(0.0, t_end, 65)
    total = sum(
        quad(lambda s: fcn_rhoNN(N, J, sink_rate, s), a, b, limit=200, epsabs=1e-15, epsrel=1e-13)[0]
        for a, b in zip(pieces[:-1], pieces[1:])
    )
    tail = 2 * sink_rate * 4 * J**2 * np.exp(-decay * t_end) / (decay * root)
    return 2 * sink_rate * total, float(tail)


def _rates(Gamma: float, gamma: float, sink_rate: float):
    ga = 2 * gamma + 2 * Gamma
    gb = 2 * gamma + 2 * Gamma + sink_rate
    gc = 2 * Gamma + 2 * sink_rate
    return ga, gb, gc


def laplace_delta(s, N: int, J: float, Gamma: float, gamma: float, sink_rate: float):
    """Characteristic polynomial Delta(s) of the Laplace-domain sink population.

    The second group reads ``4 J^2 Gs (4 gamma (s + gamma + 2 Gamma) - Gs (s - 2 gamma + 2 Gamma))``;
    this was re-derived by eliminating the linear Laplace system symbolically.
    """
    G, g, Gs = Gamma, gamma, sink_rate
    ga, gb, gc = _rates(G, g, Gs)
    return (
        (s + 2 * G) * (s + ga) * (s + gb) ** 2 * (s + gc)
        + 4 * J**2 * Gs * (4 * g * (s + g + 2 * G) - Gs * (s - 2 * g + 2 * G))
        + 4 * J**2 * N * (s + 2 * G) * (g * (s + ga) - Gs * g + Gs**2)
        + J**2 * N**2 * (s + 2 * G) * (s + ga) * (s + gc)
    )


def fcn_psink_laplace(s, N: int, J: float, Gamma: float, gamma: float, sink_rate: float):
    """Laplace transform of p_sink(t) for the uniform network."""
    _check_uniform(N, J, Gamma, gamma, sink_rate)
    ga, gb, _ = _rates(Gamma, gamma, sink_rate)
    delta = laplace_delta(s, N, J, Gamma, gamma, sink_rate)
    return 4 * J**2 * sink_rate * (s + ga) * (s + gb) / (s * delta)


def fcn_psink_infinity(N: int, J: float, Gamma: float, gamma: float, sink_rate: float) -> float:
    """Asymptotic sink population from the final-value theorem, ``lim s * p_sink(s)``."""
    _check_uniform(N, J, Gamma, gamma, sink_rate)
    if Gamma == 0 and gamma == 0:
        # both numerator and Delta(0) vanish; the limit is taken analytically
        if J == 0 or sink_rate == 0:
            raise ZeroDivisionError("degenerate parameters: no transport channel")
        return 1.0 / (N - 1)
    ga, gb, _ = _rates(Gamma, gamma, sink_rate)
    delta0 = laplace_delta(0.0, N, J, Gamma, gamma, sink_rate)
    if delta0 == 0:
        raise ZeroDivisionError("Delta(0) vanishes for these parameters")
    return float(4 * J**2 * sink_rate * ga * gb / delta0)


def fcn_psink_relaxation(N: int, J: float, Gamma: float, sink_rate: float) -> float:
    """Asymptotic sink population with uniform dissipation and no dephasing."""
    G, Gs = Gamma, sink_rate
    phi = (
        4 * G**4
        + 8 * G**3 * Gs
        + 5 * G**2 * Gs**2
        + G * Gs**3
        + Gs**2 * J**2 * (N - 1)
        + G**2 * J**2 * N**2
        + G * Gs * J**2 * N**2
    )
    return float(J**2 * Gs * (2 * G + Gs) / phi)


def fcn_final_state(N: int) -> ExcitonState:
    """Exact t -> infinity state of the noiseless network started on site 1."""
    if N < 3:
        raise ValueError("the trapped final state needs N >= 3")
    rho = np.zeros((N, N), dtype=complex)
    inner = slice(1, N - 1)
    rho[inner, inner] = 1.0 / (N - 1) ** 2
    rho[0, inner] = rho[inner, 0] = -(N - 2) / (N - 1) ** 2
    rho[0, 0] = ((N - 2) / (N - 1)) ** 2
    return ExcitonState(rho, p_ground=0.0, p_sink=1.0 / (N - 1))


def fcn_psink_disorder(N: int, D: int) -> float:
    """Asymptotic transfer with D detuned (non-injection, non-sink) site energies."""
    if not 0 <= D <= N - 2:
        raise ValueError(f"D must lie in 0..{N - 2}, got {D}")
    return 1.0 / (N - D - 1)
