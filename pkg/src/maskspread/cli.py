"""Command-line experiment runner.

    maskspread run --preset fig2 --out fig2.csv
    maskspread run --config my.toml --analytic-only
    maskspread presets
    maskspread show-preset fig4-md10

Exit codes: 0 ok, 1 configuration error, 2 solver non-convergence,
3 simulation error. Thread count precedence: ``--threads``, then the
``MASKSPREAD_THREADS`` environment variable, then ``simulation.threads``.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import analytic, config, sim
from .errors import ConfigError, ConvergenceError, SimulationError, ValidationError

log = logging.getLogger("maskspread")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SIM = 0, 1, 2, 3
TRUNCATION_MARKER = "#truncated"


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NA"
    return f"{x:.9g}"


def columns(cfg: config.ExperimentConfig, labels) -> list:
    cols = ["parameter", "value"]
    if not cfg.sim_only:
        cols += ["r0", "pe_random"]
        cols += [f"pe_{l}" for l in labels]
        cols += ["es_total"] + [f"es_{l}" for l in labels]
        cols += [f"indiv_{l}" for l in labels]
        if cfg.verbose:
            cols += ["extinction_iterations", "extinction_residual", "size_iterations", "size_residual"]
    if not cfg.analytic_only:
        cols += ["sim_pe_random", "sim_pe_random_se"]
        for l in labels:
            cols += [f"sim_pe_{l}", f"sim_pe_{l}_se"]
        cols += ["sim_es_total", "sim_es_total_se"]
        for l in labels:
            cols += [f"sim_es_{l}", f"sim_es_{l}_se"]
        for l in labels:
            cols += [f"sim_indiv_{l}", f"sim_indiv_{l}_se"]
        cols += ["sim_n_emerged", "master_seed", "trials", "n_nodes"]
    return cols


def sweep_row(cfg, value, threads=1) -> dict:
    """Analytic and Monte Carlo results for one sweep point."""
    model, ens = cfg.point(value)
    labels = ens.labels
    row = {"parameter": cfg.sweep_parameter, "value": value}
    if not cfg.sim_only:
        s = analytic.summarize(ens, model)
        row.update(r0=s.r0, pe_random=s.pe_random_seed, es_total=s.total_epidemic_size)
        for i, l in enumerate(labels):
            row[f"pe_{l}"] = s.pe_by_seed_type[i]
            row[f"es_{l}"] = s.epidemic_size_by_type[i]
            row[f"indiv_{l}"] = s.individual_infection_prob[i]
        if cfg.verbose:
            d = s.diagnostics
            row.update(
                extinction_iterations=d["extinction_iterations"],
                extinction_residual=d["extinction_residual"],
                size_iterations=d["size_iterations"],
                size_residual=d["size_residual"],
            )
    if not cfg.analytic_only:
        sc = cfg.simulation
        policies = cfg.resolve_policies(ens)
        # a type clamped to the prevalence floor is absent by construction; its fixed-type policy reports NA
        absent = [p for p in policies if p != sim.RANDOM and ens.m[p] <= 2 * config.PREVALENCE_FLOOR]
        if absent:
            log.warning("%s=%s: skipping seed policies for absent types %s",
                        cfg.sweep_parameter, value, [labels[p] for p in absent])
            policies = [p for p in policies if p not in absent]
        if policies:
            aggs = sim.monte_carlo_policies(
                model, ens, sc.n_nodes, sc.trials, policies, sc.emergence_threshold, sc.master_seed,
                sc.regenerate_network, threads, sc.absolute_threshold,
            )
            size_src = aggs.get(sim.RANDOM, aggs[policies[0]])
            rand = aggs.get(sim.RANDOM)
            row["sim_pe_random"] = rand.empirical_pe_random if rand else None
            row["sim_pe_random_se"] = rand.empirical_pe_random_se if rand else None
            for i, l in enumerate(labels):
                a = aggs.get(i)
                row[f"sim_pe_{l}"] = a.empirical_pe_by_seed_type[i] if a else None
                row[f"sim_pe_{l}_se"] = a.empirical_pe_by_seed_type_se[i] if a else None
                row[f"sim_es_{l}"] = size_src.mean_es_by_type_given_emergence[i]
                row[f"sim_es_{l}_se"] = size_src.mean_es_by_type_given_emergence_se[i]
                row[f"sim_indiv_{l}"] = size_src.individual_infection_prob[i]
                row[f"sim_indiv_{l}_se"] = size_src.individual_infection_prob_se[i]
            row["sim_es_total"] = size_src.mean_total_es_given_emergence
            row["sim_es_total_se"] = size_src.mean_total_es_given_emergence_se
            row["sim_n_emerged"] = size_src.n_emerged
        row.update(master_seed=sc.master_seed, trials=sc.trials, n_nodes=sc.n_nodes)
    return row


def _summary_line(row) -> str:
    parts = [f"{row['parameter']}={fmt(row['value'])}"]
    for key in ("r0", "pe_random", "es_total", "sim_pe_random", "sim_es_total"):
        if key in row:
            parts.append(f"{key}={fmt(row[key])}")
    return "  ".join(parts)


def run_experiment(cfg: config.ExperimentConfig, out, console=None, threads=1) -> None:
    """Write the CSV for ``cfg`` to the open text stream ``out``.

    Rows are flushed as they complete; on failure a truncation marker line is
    written before the exception propagates.
    """
    labels = cfg.base_ensemble().labels
    cols = columns(cfg, labels)
    out.write(",".join(cols) + "\n")
    out.flush()
    try:
        for value in cfg.sweep_values:
            row = sweep_row(cfg, value, threads)
            out.write(",".join(fmt(row.get(c)) for c in cols) + "\n")
            out.flush()
            if console is not None:
                print(_summary_line(row), file=console, flush=True)
    except Exception as exc:
        out.write(f"{TRUNCATION_MARKER},{type(exc).__name__}: {str(exc).replace(chr(10), ' ')}\n")
        out.flush()
        raise


def _thread_default():
    env = os.environ.get("MASKSPREAD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"MASKSPREAD_THREADS={env!r} is not an integer") from None
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskspread", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an analytic / Monte Carlo sweep and write a CSV")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="TOML experiment config")
    src.add_argument("--preset", metavar="NAME", help="built-in figure preset (see `presets`)")
    run.add_argument("--out", metavar="PATH", help="CSV output path ('-' for stdout)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    run.add_argument("--nodes", type=int, help="network size")
    run.add_argument("--threads", type=int, help="worker threads for Monte Carlo trials")
    engine = run.add_mutually_exclusive_group()
    engine.add_argument("--analytic-only", action="store_true")
    engine.add_argument("--sim-only", action="store_true")
    run.add_argument("--paper-scale", action="store_true", help="use 10^6 nodes and 5000 trials")
    run.add_argument("--verbose", action="store_true", help="add solver diagnostics to the CSV")
    run.add_argument("--quiet", action="store_true", help="no per-point console summary")

    sub.add_parser("presets", help="list built-in presets")
    show = sub.add_parser("show-preset", help="print a preset as a TOML config")
    show.add_argument("name")
    return parser


def _apply_overrides(cfg, args):
    sim_updates = {}
    if args.paper_scale:
        sim_updates.update(config.PAPER_SCALE)
    if args.seed is not None:
        sim_updates["master_seed"] = args.seed
    if args.trials is not None:
        sim_updates["trials"] = args.trials
    if args.nodes is not None:
        sim_updates["n_nodes"] = args.nodes
    d = cfg.to_dict()
    d["simulation"].update(sim_updates)
    if args.out:
        d["output"] = args.out
    if args.analytic_only:
        d["flags"].update(analytic_only=True, sim_only=False)
    if args.sim_only:
        d["flags"].update(sim_only=True, analytic_only=False)
    if args.verbose:
        d["flags"]["verbose"] = True
    return config.ExperimentConfig.from_dict(d)


def _run(args) -> int:
    cfg = config.load(args.config) if args.config else config.preset(args.preset)
    cfg = _apply_overrides(cfg, args)
    threads = args.threads if args.threads is not None else (_thread_default() or cfg.simulation.threads)
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    console = None if args.quiet else sys.stderr
    if cfg.output == "-":
        run_experiment(cfg, sys.stdout, console, threads)
    else:
        with open(cfg.output, "w", newline="") as fh:
            run_experiment(cfg, fh, console, threads)
        if console:
            print(f"wrote {cfg.output}", file=console)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        for name in config.list_presets():
            print(name)
        return EXIT_OK
    try:
        if args.command == "show-preset":
            sys.stdout.write(config.preset(args.name).to_toml())
            return EXIT_OK
        return _run(args)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
