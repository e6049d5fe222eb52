"""Command-line front end: ``noisetransport <subcommand> [options]``.

Sites are 1-based everywhere.  Errors are reported on stderr as a single line
``error code=<n> kind=<kind> message=<json string>`` and map to exit codes
2 (unreadable JSON or bad flags), 3 (invariant violation) and 4 (numerical abort).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from . import experiments
from .entanglement import log_negativity_from_coherences, negativity_timeseries
from .fcn import (
    fcn_final_state,
    fcn_psink_disorder,
    fcn_psink_infinity,
    fcn_psink_relaxation,
    fcn_reduced_evolve,
    fcn_rhoNN,
)
from .invariant import find_invariant_subspace
from .ladder import LadderSpec, ladder_broadened_ensemble, ladder_evolve
from .network import (
    FMO_OPTIMAL_DEPHASING,
    ExcitonState,
    NetworkSpec,
    SpecError,
    build_generator,
    fcn_preset,
    fmo_preset,
    load_network,
)
from .optimizer import optimize_dephasing, robustness_sweep
from .propagator import IntegrationError, evolve, read_trajectory_csv, steady_state_psink, write_trajectory_csv

CSV_VERSION = "v1"

EXIT_BAD_INPUT = 2
EXIT_INVARIANT = 3
EXIT_NUMERICAL = 4


@dataclass(frozen=True)
class ExperimentConfig:
    """Flags common to every subcommand, resolved from the command line."""

    subcommand: str
    output: str | None = None
    output_format: str = "csv"
    initial_site: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.output_format not in ("csv", "json"):
            raise CliError(EXIT_BAD_INPUT, "bad-flag", f"unknown output format {self.output_format!r}")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _fmt(x) -> str:
    return repr(float(x))


def _write_table(fh: IO[str], header: Sequence[str], rows, comments: Sequence[str] = ()) -> None:
    fh.write(f"# noisetransport {CSV_VERSION}\n")
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write(",".join(header) + "\n")
    for row in np.atleast_2d(rows):
        fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(fh: IO[str], obj) -> None:
    json.dump(obj, fh, indent=2, sort_keys=True)
    fh.write("\n")


@contextmanager
def _open_output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_BAD_INPUT, "bad-flag", f"expected a comma-separated list of numbers, got {text!r}")


def _resolve_network(args) -> NetworkSpec:
    if args.network:
        spec = load_network(args.network)
    elif args.preset:
        name = args.preset.lower()
        if name == "fmo":
            spec = fmo_preset()
        elif name.startswith("fcn:"):
            try:
                n = int(name.split(":", 1)[1])
            except ValueError:
                raise CliError(EXIT_BAD_INPUT, "bad-flag", f"bad preset {args.preset!r}")
            spec = fcn_preset(n, J=args.J, Gamma=args.Gamma, gamma=args.gamma, sink_rate=args.sink_rate)
        else:
            raise CliError(EXIT_BAD_INPUT, "bad-flag", f"unknown preset {args.preset!r}; use fmo or fcn:N")
    else:
        raise CliError(EXIT_BAD_INPUT, "bad-flag", "a network source is required (--preset or --network)")
    if args.deph:
        if args.deph == "fmo-optimal":
            rates = list(FMO_OPTIMAL_DEPHASING)
        else:
            rates = _parse_floats(args.deph)
        if len(rates) == 1:
            rates = rates * spec.n_sites
        if len(rates) != spec.n_sites:
            raise SpecError(f"--deph needs {spec.n_sites} rates, got {len(rates)}")
        spec = spec.with_dephasing(rates)
    spec.validate()
    if not 1 <= args.initial <= spec.n_sites:
        raise SpecError(f"initial site must be in 1..{spec.n_sites}")
    return spec


def _time_grid(args) -> np.ndarray:
    if args.t <= 0 or args.points < 2:
        raise CliError(EXIT_BAD_INPUT, "bad-flag", "--t must be positive and --points at least 2")
    return np.linspace(0.0, args.t, args.points)


def cmd_simulate(args, out: IO[str]) -> None:
    spec = _resolve_network(args)
    gen = build_generator(spec)
    initial = ExcitonState.localized(spec.n_sites, args.initial)
    if args.steady:
        ss = steady_state_psink(gen, initial, horizon=args.horizon, method=args.method)
        result = {"p_sink": ss.p_sink, "converged": ss.converged, "time": ss.time}
        if args.format == "json":
            _write_json(out, result)
        else:
            _write_table(out, ["time", "p_sink", "converged"], [[ss.time, ss.p_sink, float(ss.converged)]])
        return
    traj = evolve(gen, initial, _time_grid(args), rtol=args.rtol, atol=args.atol, method=args.method)
    if args.format == "json":
        _write_json(
            out,
            {
                "t": traj.times.tolist(),
                "p_sink": traj.p_sink.tolist(),
                "p_ground": traj.p_ground.tolist(),
                "populations": traj.populations.tolist(),
                "final_p_sink": float(traj.p_sink[-1]),
            },
        )
    else:
        write_trajectory_csv(traj, out, coherences=args.coherences)


def cmd_fcn(args, out: IO[str]) -> None:
    kind = args.quantity
    if kind == "reduced":
        t = _time_grid(args)
        traj = fcn_reduced_evolve(args.N, args.J, args.Gamma, args.gamma, args.sink_rate, t)
        header = ["t", "Lambda", "X", "Y", "rho_NN", "rho_00", "p_sink"]
        _write_table(out, header, np.column_stack([t, traj.values]))
    elif kind == "rhonn":
        t = _time_grid(args)
        _write_table(out, ["t", "rho_NN"], np.column_stack([t, fcn_rhoNN(args.N, args.J, args.sink_rate, t)]))
    elif kind == "psink-inf":
        value = fcn_psink_infinity(args.N, args.J, args.Gamma, args.gamma, args.sink_rate)
        row = {"N": args.N, "J": args.J, "Gamma": args.Gamma, "gamma": args.gamma, "sink_rate": args.sink_rate}
        row["p_sink_inf"] = value
        if args.gamma == 0:
            row["p_sink_inf_relaxation"] = fcn_psink_relaxation(args.N, args.J, args.Gamma, args.sink_rate)
        if args.format == "json":
            _write_json(out, row)
        else:
            _write_table(out, list(row), [list(row.values())])
    elif kind == "final-state":
        state = fcn_final_state(args.N)
        if args.format == "json":
            _write_json(out, {"rho": state.rho.real.tolist(), "p_sink": state.p_sink})
        else:
            header = [f"col_{j + 1}" for j in range(args.N)]
            _write_table(out, header, state.rho.real, comments=[f"p_sink={_fmt(state.p_sink)}"])
    elif kind == "disorder":
        value = fcn_psink_disorder(args.N, args.D)
        _write_table(out, ["N", "D", "p_sink_inf"], [[args.N, args.D, value]])


def cmd_analyze(args, out: IO[str]) -> None:
    spec = _resolve_network(args)
    analysis = find_invariant_subspace(
        np.asarray(spec.hamiltonian), spec.sink_site, degeneracy_tol=args.degeneracy_tol
    )
    psi = np.zeros(spec.n_sites)
    psi[args.initial - 1] = 1.0
    report = analysis.report()
    report["initial_site"] = args.initial
    report["predicted_p_sink"] = analysis.predicted_psink(psi)
    if args.format == "json":
        _write_json(out, report)
        return
    rows = [
        [m["energy"], m["degeneracy"], m["coupled"], m["invariant"], float(m["near_degenerate"])]
        for m in report["manifolds"]
    ]
    comments = [
        f"invariant_dimension={report['invariant_dimension']}",
        f"predicted_p_sink={_fmt(report['predicted_p_sink'])}",
    ]
    _write_table(out, ["energy", "degeneracy", "coupled", "invariant", "near_degenerate"], rows, comments)


def cmd_ladder(args, out: IO[str]) -> None:
    spec = LadderSpec(
        n_sites=args.n_sites,
        level_spacing=args.spacing,
        sink_rate=args.sink_rate,
        hopping_mode=args.mode,
        temperature=args.temperature,
        broadening_width=args.width,
        samples=args.samples,
        rng_seed=args.seed,
    )
    if args.width is None:
        t = _time_grid(args)
        traj = ladder_evolve(spec, spec.static_gaps(), t)
        header = ["t", "p_sink", *[f"p_{i + 1}" for i in range(spec.n_sites)]]
        _write_table(out, header, np.column_stack([t, traj.p_sink, traj.populations]))
        return
    ens = ladder_broadened_ensemble(spec, args.t, bins=args.bins, workers=args.workers)
    summary = {
        "mean": ens.mean,
        "std": ens.std,
        "static_p_sink": ens.static_psink,
        "clip_fraction": ens.clip_fraction,
        "samples": spec.samples,
        "seed": spec.rng_seed,
    }
    if args.format == "json":
        summary["counts"] = ens.counts.tolist()
        summary["edges"] = ens.edges.tolist()
        _write_json(out, summary)
    else:
        rows = np.column_stack([ens.edges[:-1], ens.edges[1:], ens.counts])
        comments = [f"{k}={_fmt(v)}" for k, v in summary.items()]
        _write_table(out, ["bin_lo", "bin_hi", "count"], rows, comments)


def cmd_negativity(args, out: IO[str]) -> None:
    if args.trajectory:
        with open(args.trajectory) as fh:
            table = read_trajectory_csv(fh)
        n = table.populations.shape[1]
        splits = _splits(args, n)
        if not table.moduli:
            raise SpecError("trajectory CSV lacks |rho_ij| columns; write it with --coherences")
        values = np.array(
            [
                [
                    log_negativity_from_coherences(
                        table.p_ground[ti] + table.p_sink[ti],
                        [table.moduli[(i, j)][ti] for i in range(k) for j in range(k, n)],
                    )
                    for k in splits
                ]
                for ti in range(table.times.size)
            ]
        ).reshape(table.times.size, len(splits))
        times, p_sink = table.times, table.p_sink
    else:
        spec = _resolve_network(args)
        traj = evolve(
            build_generator(spec), ExcitonState.localized(spec.n_sites, args.initial), _time_grid(args), method=args.method
        )
        splits = _splits(args, spec.n_sites)
        values = negativity_timeseries(traj, splits)
        times, p_sink = traj.times, traj.p_sink
    header = ["t", "p_sink", *[f"log_negativity_k{k}" for k in splits]]
    _write_table(out, header, np.column_stack([times, p_sink, values]))


def _splits(args, n: int) -> list[int]:
    splits = [int(x) for x in _parse_floats(args.splits)] if args.splits else list(range(1, n))
    for k in splits:
        if not 1 <= k <= n - 1:
            raise SpecError(f"split must lie in 1..{n - 1}, got {k}")
    return splits


def cmd_optimize(args, out: IO[str]) -> None:
    spec = _resolve_network(args)
    res = optimize_dephasing(spec, args.t, args.mode, budget=args.budget, restarts=args.restarts, seed=args.seed)
    obj = res.to_json()
    obj["t_target"] = args.t
    obj["seed"] = args.seed
    if args.format == "json":
        _write_json(out, obj)
    else:
        rates = np.atleast_2d(res.rates)
        _write_table(
            out,
            [f"rate_{j + 1}" for j in range(rates.shape[1])],
            rates,
            comments=[f"p_sink={_fmt(res.p_sink)}", f"evaluations={res.evaluations}", f"exhausted={int(res.exhausted)}"],
        )


def cmd_robustness(args, out: IO[str]) -> None:
    spec = _resolve_network(args)
    res = robustness_sweep(spec, args.disorder, args.samples, args.t, seed=args.seed, workers=args.workers, bins=args.bins)
    summary = {"mean": res.mean, "std": res.std, "baseline": res.baseline, "samples": args.samples, "seed": args.seed}
    if args.format == "json":
        summary["counts"] = res.counts.tolist()
        summary["edges"] = res.edges.tolist()
        _write_json(out, summary)
    else:
        rows = np.column_stack([res.edges[:-1], res.edges[1:], res.counts])
        _write_table(out, ["bin_lo", "bin_hi", "count"], rows, [f"{k}={_fmt(v)}" for k, v in summary.items()])


def cmd_fig(args, out: IO[str]) -> None:
    func = experiments.FIGURES[args.id]
    kwargs = {}
    if args.id == 5:
        kwargs = {"samples": args.samples, "seed": args.seed}
    header, rows = func(**kwargs)
    _write_table(out, header, rows, comments=[f"figure={args.id}"])


def _network_flags(p: argparse.ArgumentParser, t_default: float = 5.0) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="fmo or fcn:N")
    src.add_argument("--network", help="network JSON file")
    p.add_argument("--deph", help="dephasing rates: one value, N comma-separated values, or fmo-optimal")
    p.add_argument("--J", type=float, default=1.0, help="coupling for fcn presets")
    p.add_argument("--Gamma", type=float, default=0.0, help="uniform dissipation for fcn presets")
    p.add_argument("--gamma", type=float, default=0.0, help="uniform dephasing for fcn presets")
    p.add_argument("--sink-rate", dest="sink_rate", type=float, default=1.0, help="sink rate for fcn presets")
    p.add_argument("--initial", type=int, default=1, help="1-based injection site")
    p.add_argument("--t", type=float, default=t_default)
    p.add_argument("--points", type=int, default=101)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisetransport", description=__doc__.splitlines()[0])
    parser.add_argument("--output", "-o", help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="integrate the master equation")
    _network_flags(p)
    p.add_argument("--method", default="DOP853")
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--coherences", action="store_true", help="add |rho_ij| columns")
    p.add_argument("--steady", action="store_true", help="report the asymptotic sink population")
    p.add_argument("--horizon", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fcn", help="closed-form results for uniform fully connected networks")
    p.add_argument("quantity", choices=("reduced", "rhonn", "psink-inf", "final-state", "disorder"))
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--Gamma", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--sink-rate", dest="sink_rate", type=float, default=1.0)
    p.add_argument("--D", type=int, default=1)
    p.add_argument("--t", type=float, default=20.0)
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_fcn)

    p = sub.add_parser("analyze", help="invariant-subspace analysis")
    _network_flags(p)
    p.add_argument("--degeneracy-tol", dest="degeneracy_tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_analyze, default_format="json")

    p = sub.add_parser("ladder", help="classical ladder with optional line broadening")
    p.add_argument("--n-sites", dest="n_sites", type=int, default=7)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--sink-rate", dest="sink_rate", type=float, default=1.0)
    p.add_argument("--mode", choices=("symmetric", "thermal"), default="symmetric")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--width", type=float, default=None, help="Cauchy broadening scale")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--t", type=float, default=100.0)
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("negativity", help="logarithmic negativity per bipartition")
    _network_flags(p)
    p.add_argument("--trajectory", help="trajectory CSV written with --coherences")
    p.add_argument("--splits", help="comma-separated split positions k (default all)")
    p.add_argument("--method", default="expm")
    p.set_defaults(func=cmd_negativity)

    p = sub.add_parser("optimize", help="tune dephasing rates for transfer at a target time")
    _network_flags(p)
    p.add_argument("--mode", choices=("local", "correlated"), default="local")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_optimize, default_format="json")

    p = sub.add_parser("robustness", help="static Hamiltonian disorder Monte Carlo")
    _network_flags(p, t_default=10.0)
    p.add_argument("--disorder", type=float, default=0.2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("fig", help="reference figure data as CSV")
    p.add_argument("--id", type=int, choices=sorted(experiments.FIGURES), required=True)
    p.add_argument("--samples", type=int, default=1000, help="ensemble size for figure 5")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fig)
    return parser


def _report(code: int, kind: str, message: str) -> int:
    sys.stderr.write(f"error code={code} kind={kind} message={json.dumps(message)}\n")
    return code


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = ExperimentConfig(
            subcommand=args.subcommand,
            output=args.output,
            output_format=args.format or getattr(args, "default_format", "csv"),
            initial_site=getattr(args, "initial", 1),
            seed=getattr(args, "seed", 0),
        )
        args.format = config.output_format
        with _open_output(config.output) as out:
            args.func(args, out)
    except CliError as exc:
        return _report(exc.code, exc.kind, str(exc))
    except json.JSONDecodeError as exc:
        return _report(EXIT_BAD_INPUT, "bad-json", str(exc))
    except OSError as exc:
        return _report(EXIT_BAD_INPUT, "io", str(exc))
    except SpecError as exc:
        return _report(EXIT_INVARIANT, "invariant", str(exc))
    except (IntegrationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _report(EXIT_NUMERICAL, "numerical", str(exc))
    except ValueError as exc:
        return _report(EXIT_INVARIANT, "invalid", str(exc))
    return 0


def main() -> None:
    sys.exit(run())
