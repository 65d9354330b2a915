"""
LCQP benchmark harness.

    python bench.py gen --n 50 --m 10 --seed 0 --out inst_50_10_0
    python bench.py solve --instance inst_50_10_0 --solver pplag --out run_pplag
    python bench.py compare --n 50 --m 10 --seed 0 --out cmp
    python bench.py sweep-alpha --alphas 1e3 1e5 1e8 --max-iters 100000 --out sweep

Relative --out paths are placed under $PPLAG_BENCH_OUTPUT when it is set.
Exit codes: 0 tolerance reached (or gen done), 2 iteration cap, 3 numerical failure, 64 configuration error.
"""

import argparse
import json
import logging
import os
import sys

from concurrent.futures import ProcessPoolExecutor

from instances.mtx_loader import load_instance
from instances.mtx_writer import save_instance
from src import pplag, sproxalm
from src.problem import GeneratorConfig, generate_lcqp, lcqp_problem
from src.reporting import TraceWriter, write_json
from src.utils import NumericalFailure, StoppingRule, make_directory

logger = logging.getLogger("bench")

EXIT_OK, EXIT_MAX_ITERS, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3, 64

OUTPUT_ENV = "PPLAG_BENCH_OUTPUT"

SOLVERS = ("pplag", "sproxalm")

DEFAULTS = {
    "n": 50,
    "m": 10,
    "seed": 0,
    "init_seed": None, # the instance seed when None
    "lower": 0.,
    "upper": 5.,
    "instance": None,
    "solver": "pplag",
    "alpha": pplag.DEFAULT_ALPHA,
    "beta": pplag.DEFAULT_BETA,
    "r_ratio": pplag.DEFAULT_R_RATIO,
    "delta0": pplag.DEFAULT_DELTA0,
    "safety": pplag.DEFAULT_SAFETY,
    "gamma": None, # 2 L_f when None
    "max_iters": 200000,
    "eps_stat": 1e-3,
    "eps_feas": 1e-3,
    "record_every": None, # 1 for n <= 100, else 10
    "out": None,
    "force": False,
    "no_wallclock": False,
    "alphas": [1e3, 1e5, 1e8],
    "workers": 1,
    "verbose": 0,
}

INSTANCE_KEYS = ("n", "m", "seed", "lower", "upper")

class ConfigError(Exception):
    pass

class ArgumentParser(argparse.ArgumentParser):
    """ argparse exits with status 2, which collides with the iteration cap code """

    def error(self, message):
        raise ConfigError(message)

# ------------------------------------------------------------------------------ CONFIGURATION

def build_parser():

    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with any subset of the option names below")
    common.add_argument("--out", help="output directory")
    common.add_argument("--force", action="store_true", default=None, help="write into a non-empty output directory")
    common.add_argument("-v", "--verbose", action="count", default=None, help="-v info, -vv debug")

    source = ArgumentParser(add_help=False)
    source.add_argument("--n", type=int)
    source.add_argument("--m", type=int)
    source.add_argument("--seed", type=int)
    source.add_argument("--lower", type=float)
    source.add_argument("--upper", type=float)

    run = ArgumentParser(add_help=False)
    run.add_argument("--instance", help="instance directory written by gen, instead of --n/--m/--seed")
    run.add_argument("--init-seed", dest="init_seed", type=int, help="seed of the random starting point")
    run.add_argument("--alpha", type=float)
    run.add_argument("--beta", type=float)
    run.add_argument("--r-ratio", dest="r_ratio", type=float)
    run.add_argument("--delta0", type=float)
    run.add_argument("--safety", type=float, help="fraction of the step size bound used for eta")
    run.add_argument("--gamma", type=float, help="SProx-ALM penalty, 2 L_f by default")
    run.add_argument("--max-iters", dest="max_iters", type=int)
    run.add_argument("--eps-stat", dest="eps_stat", type=float)
    run.add_argument("--eps-feas", dest="eps_feas", type=float)
    run.add_argument("--record-every", dest="record_every", type=int)
    run.add_argument("--no-wallclock", dest="no_wallclock", action="store_true", default=None, help="leave the wallclock column empty")

    parser = ArgumentParser(description="P-Lagrangian and SProx-ALM benchmarks on random LCQPs")
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("gen", parents=[common, source], help="generate an instance directory")

    solve = sub.add_parser("solve", parents=[common, source, run], help="run one solver")
    solve.add_argument("--solver", choices=SOLVERS)

    sub.add_parser("compare", parents=[common, source, run], help="run both solvers on the same instance")

    sweep = sub.add_parser("sweep-alpha", parents=[common, source, run], help="one P-Lagrangian run per alpha")
    sweep.add_argument("--alphas", type=float, nargs="+")
    sweep.add_argument("--workers", type=int, help="parallel runs")

    return parser

def read_config_file(path):

    try:
        with open(path) as f:
            values = json.load(f)

    except (OSError, ValueError) as e:
        raise ConfigError("cannot read config file {}: {}".format(path, e))

    if not isinstance(values, dict):
        raise ConfigError("config file {} must hold a JSON object".format(path))

    unknown = sorted(set(values) - set(DEFAULTS))

    if unknown:
        raise ConfigError("unknown config keys: {}".format(", ".join(unknown)))

    return values

def resolve_config(args):
    """ built-in defaults < config file < explicit flags """

    cfg = dict(DEFAULTS)
    explicit = set()

    if args.config:
        from_file = read_config_file(args.config)
        cfg.update(from_file)
        explicit.update(from_file)

    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
            explicit.add(key)

    cfg["command"] = args.command

    if cfg["instance"] is not None and explicit & set(INSTANCE_KEYS):
        raise ConfigError("give either --instance or --n/--m/--seed/--lower/--upper, not both")

    if cfg["solver"] not in SOLVERS:
        raise ConfigError("unknown solver {!r}".format(cfg["solver"]))

    if not cfg["alphas"]:
        raise ConfigError("the alpha list is empty")

    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")

    return cfg

def output_path(cfg, default_name):

    out = cfg["out"] or default_name

    if os.path.isabs(out):
        return out

    return os.path.join(os.environ.get(OUTPUT_ENV, os.getcwd()), out)

def generator_config(cfg):

    return GeneratorConfig(n=cfg["n"], m=cfg["m"], seed=cfg["seed"], lower_value=cfg["lower"], upper_value=cfg["upper"])

def stopping_rule(cfg, n):

    record_every = cfg["record_every"]

    if record_every is None:
        record_every = 1 if n <= 100 else 10

    return StoppingRule(max_iters=cfg["max_iters"], eps_stat=cfg["eps_stat"], eps_feas=cfg["eps_feas"], record_every=record_every)

def configure_logging(verbose):

    level = logging.WARNING if not verbose else logging.INFO if verbose == 1 else logging.DEBUG

    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")

# ------------------------------------------------------------------------------ RUNS

def prepare_instance(cfg, out_dir):
    """ Loads --instance, or generates one and saves it under out_dir/instance. """

    if cfg["instance"] is not None:
        return load_instance(cfg["instance"])

    inst = generate_lcqp(generator_config(cfg))
    meta = save_instance(inst, os.path.join(out_dir, "instance"), force=cfg["force"])

    return inst, meta

def exit_code(reason):

    return {"tolerance": EXIT_OK, "max_iters": EXIT_MAX_ITERS}.get(reason, EXIT_NUMERICAL)

def run_solver(solver, inst, cfg, out_dir, alpha=None, suffix=""):
    """
    Runs one solver on inst, writing trace_<solver><suffix>.csv and summary_<solver><suffix>.json.
    A numerical failure keeps the partial trace and is reported in the summary.
    :return: the summary dict
    """

    p = lcqp_problem(inst)
    stop = stopping_rule(cfg, inst.n)
    init_seed = inst.seed if cfg["init_seed"] is None else cfg["init_seed"]
    wallclock = not cfg["no_wallclock"]

    if solver == "pplag":
        params = pplag.make_params(p, alpha=cfg["alpha"] if alpha is None else alpha, beta=cfg["beta"],
                                   r_ratio=cfg["r_ratio"], delta0=cfg["delta0"], safety=cfg["safety"])
        solve = pplag.solve
    else:
        params = sproxalm.sprox_defaults(p, cfg["gamma"])
        solve = sproxalm.sprox_solve

    name = solver + suffix
    summary = {"solver": solver, "params": params.as_dict(), "seed": inst.seed, "init_seed": init_seed,
               "stop": {"max_iters": stop.max_iters, "eps_stat": stop.eps_stat, "eps_feas": stop.eps_feas,
                        "record_every": stop.record_every},
               "L_f": p.L_f, "sigma_max": p.sigma_max}

    with TraceWriter(os.path.join(out_dir, "trace_{}.csv".format(name)), wallclock=wallclock) as sink:

        try:
            result = solve(p, params, stop, sink, seed=init_seed)

        except NumericalFailure as e:
            logger.error("%s: %s", name, e)
            summary.update({"reason": "numerical_failure", "step": e.step, "iteration": e.iteration, "rows": sink.rows})

        else:
            summary.update({"reason": result.reason,
                            "iterations": result.iterations,
                            "stationarity": result.stationarity,
                            "feasibility": result.feasibility,
                            "objective": result.objective,
                            "eps_kkt": result.report.as_dict(),
                            "wallclock_s": result.wallclock_s if wallclock else None,
                            "rows": sink.rows})

    write_json(os.path.join(out_dir, "summary_{}.json".format(name)), summary)

    return summary

def print_summary(summary):

    if summary["reason"] == "numerical_failure":
        print("{}: numerical failure in step {} at iteration {}".format(summary["solver"], summary["step"], summary["iteration"]))
        return

    print("{}: {} after {} iterations, stationarity {:.3e}, feasibility {:.3e}, objective {:.6g}".format(
        summary["solver"], summary["reason"], summary["iterations"], summary["stationarity"], summary["feasibility"], summary["objective"]))

def _sweep_run(inst, cfg, out_dir, alpha):
    """ one sweep entry, module level so that it can be sent to a worker process """

    try:
        summary = run_solver("pplag", inst, cfg, out_dir, alpha=alpha, suffix="_alpha{:g}".format(alpha))

    except Exception as e:
        summary = {"solver": "pplag", "reason": "error", "error": repr(e)}

    summary["alpha"] = alpha

    return summary

# ------------------------------------------------------------------------------ COMMANDS

def cmd_gen(cfg):

    gen_cfg = generator_config(cfg)
    path = output_path(cfg, "lcqp_n{}_m{}_seed{}".format(gen_cfg.n, gen_cfg.m, gen_cfg.seed))

    meta = save_instance(generate_lcqp(gen_cfg), path, force=cfg["force"])

    print("n={} m={} seed={} L_Q={:.17g} sigma_max={:.17g}".format(meta["n"], meta["m"], meta["seed"], meta["L_Q"], meta["sigma_max"]))
    print("instance written to {}".format(path))

    return EXIT_OK

def cmd_solve(cfg):

    path = output_path(cfg, "run_{}".format(cfg["solver"]))
    make_directory(path, cfg["force"])

    inst, _ = prepare_instance(cfg, path)
    summary = run_solver(cfg["solver"], inst, cfg, path)

    print_summary(summary)

    return exit_code(summary["reason"])

def cmd_compare(cfg):

    path = output_path(cfg, "compare")
    make_directory(path, cfg["force"])

    inst, meta = prepare_instance(cfg, path)

    # each run catches its own numerical failure, so one never aborts the other
    summaries = {solver: run_solver(solver, inst, cfg, path) for solver in SOLVERS}

    gamma = summaries["sproxalm"]["params"]["gamma"]

    write_json(os.path.join(path, "report.json"), {"instance": meta, "gamma": gamma, "solvers": summaries})

    for solver in SOLVERS:
        print_summary(summaries[solver])

    print("SProx-ALM gamma = {:.17g}".format(gamma))

    return max(exit_code(s["reason"]) for s in summaries.values())

def cmd_sweep_alpha(cfg):

    path = output_path(cfg, "sweep_alpha")
    make_directory(path, cfg["force"])

    inst, meta = prepare_instance(cfg, path)
    alphas = [float(a) for a in cfg["alphas"]]

    if cfg["workers"] == 1:
        runs = [_sweep_run(inst, cfg, path, alpha) for alpha in alphas]

    else:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as executor:
            futures = [executor.submit(_sweep_run, inst, cfg, path, alpha) for alpha in alphas]
            runs = []

            for alpha, future in zip(alphas, futures):
                try:
                    runs.append(future.result())
                except Exception as e:
                    runs.append({"solver": "pplag", "alpha": alpha, "reason": "error", "error": repr(e)})

    write_json(os.path.join(path, "sweep_report.json"), {"instance": meta, "alphas": alphas, "runs": runs})

    for run in runs:
        print("alpha={:g}".format(run["alpha"]), end=": ")

        if run["reason"] == "error":
            print("failed, {}".format(run["error"]))
        else:
            print_summary(run)

    return max(exit_code(run["reason"]) for run in runs)

COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "compare": cmd_compare, "sweep-alpha": cmd_sweep_alpha}

def main(argv=None):

    try:
        args = build_parser().parse_args(argv)

        if args.command is None:
            raise ConfigError("a subcommand is required: {}".format(", ".join(COMMANDS)))

        cfg = resolve_config(args)

    except ConfigError as e:
        print("configuration error: {}".format(e), file=sys.stderr)
        return EXIT_CONFIG

    configure_logging(cfg["verbose"])

    try:
        return COMMANDS[cfg["command"]](cfg)

    except (ConfigError, FileExistsError, FileNotFoundError, ValueError) as e:
        print("configuration error: {}".format(e), file=sys.stderr)
        return EXIT_CONFIG

if __name__ == "__main__":

    sys.exit(main())
