"""Data generators for the reference figures, returned as column tables.

Each function returns ``(header, rows)`` where ``rows`` is a 2-D float array;
the CLI ``fig`` subcommand writes them as CSV.
"""

from __future__ import annotations

import numpy as np

from .entanglement import negativity_timeseries
from .ladder import LadderSpec, ladder_evolve, sample_gaps
from .network import FMO_OPTIMAL_DEPHASING, ExcitonState, NetworkSpec, build_generator, fcn_preset, fmo_preset
from .propagator import evolve

Table = tuple[list[str], np.ndarray]


def _psink_curve(spec: NetworkSpec, t: np.ndarray, initial_site: int = 1) -> np.ndarray:
    gen = build_generator(spec)
    return evolve(gen, ExcitonState.localized(spec.n_sites, initial_site), t, method="expm").p_sink


def fig1_mismatch(t_final: float = 200.0, points: int = 401) -> Table:
    """N = 10 network: no noise, an energy mismatch on site 1, a dephasing mismatch on site 1."""
    t = np.linspace(0.0, t_final, points)
    base = fcn_preset(10)
    h = np.array(base.hamiltonian)
    h[0, 0] = 1.0
    gamma = np.zeros(10)
    gamma[0] = 1.0
    curves = [_psink_curve(s, t) for s in (base, base.with_hamiltonian(h), base.with_dephasing(gamma))]
    return ["t", "p_sink_base", "p_sink_energy_mismatch", "p_sink_dephasing_mismatch"], np.column_stack([t, *curves])


def fig3_dephasing_scan(t_eval: float = 20.0, points: int = 41, N: int = 5) -> Table:
    """p_sink(t_eval) against gamma / sink_rate on a log grid from 1e-2 to 1e2."""
    ratios = np.logspace(-2, 2, points)
    values = [_psink_curve(fcn_preset(N, gamma=g), np.array([0.0, t_eval]))[-1] for g in ratios]
    return ["gamma_over_sink_rate", "p_sink"], np.column_stack([ratios, values])


def fig4_dephasing_curves(
    t_final: float = 500.0, points: int = 501, N: int = 10, gammas=(0.0, 1e-3, 1e-2, 1e-1, 1.0)
) -> Table:
    t = np.linspace(0.0, t_final, points)
    curves = [_psink_curve(fcn_preset(N, gamma=g), t) for g in gammas]
    return ["t", *[f"p_sink_gamma_{g:g}" for g in gammas]], np.column_stack([t, *curves])


def fig5_ladder(t_final: float = 100.0, points: int = 101, samples: int = 1000, seed: int = 0) -> Table:
    """Static ladder against the broadened ensemble mean, for both hopping modes."""
    t = np.linspace(0.0, t_final, points)
    columns = [t]
    header = ["t"]
    for mode in ("symmetric", "thermal"):
        static = LadderSpec(hopping_mode=mode)
        broad = LadderSpec(hopping_mode=mode, broadening_width=1.0, samples=samples, rng_seed=seed)
        columns.append(ladder_evolve(static, static.static_gaps(), t).p_sink)
        total = np.zeros_like(t)
        for seq in np.random.SeedSequence(seed).spawn(samples):
            gaps, _ = sample_gaps(broad, np.random.default_rng(seq))
            total += ladder_evolve(broad, gaps, t).p_sink
        columns.append(total / samples)
        header += [f"p_sink_static_{mode}", f"p_sink_broadened_{mode}"]
    return header, np.column_stack(columns)


def fig6_fmo(t_final: float = 10.0, points: int = 201) -> Table:
    t = np.linspace(0.0, t_final, points)
    fmo = fmo_preset()
    curves = [_psink_curve(fmo, t), _psink_curve(fmo.with_dephasing(FMO_OPTIMAL_DEPHASING), t)]
    return ["t", "p_sink_noiseless", "p_sink_optimal_dephasing"], np.column_stack([t, *curves])


def fig7_negativity(t_final: float = 5.0, points: int = 201) -> Table:
    t = np.linspace(0.0, t_final, points)
    spec = fmo_preset().with_dephasing(FMO_OPTIMAL_DEPHASING)
    traj = evolve(build_generator(spec), ExcitonState.localized(7, 1), t, method="expm")
    ln = negativity_timeseries(traj, range(1, 7))
    header = ["t", "p_sink", *[f"log_negativity_k{k}" for k in range(1, 7)]]
    return header, np.column_stack([t, traj.p_sink, ln])


FIGURES = {
    1: fig1_mismatch,
    3: fig3_dephasing_scan,
    4: fig4_dephasing_curves,
    5: fig5_ladder,
    6: fig6_fmo,
    7: fig7_negativity,
}
