"""Command-line entry point.

    tmodes <command> [--key value]... [--config path] [--out path]
                     [--quick] [--no-timestamp] [--workers n]

Commands write a CSV (to ``--out`` or stdout) whose ``#`` header echoes the
full resolved configuration.  Exit codes: 0 success, 1 verification
failure, 2 configuration error.
"""

import argparse
import sys

import numpy as np

from . import __version__, analytic, ensemble, renewal, verify
from .config import COMMANDS, KEYS, build_config, read_config_file
from .csvio import CsvSeries, write_csv
from .errors import ConfigError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

# g0*tau0 values per figure; inf is encoded as tau0 = 1e12 / g0
FIGURE_SETS = {
    "fig2": (float("inf"), 100.0, 10.0),
    "fig3": (1.0, 0.5, 0.25),
    "fig4": (0.25, 0.01, 0.001, 0.0001),
}
INF_G0TAU0 = 1e12
FIGURE_NB = 2.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def _parser():
    p = _Parser(prog="tmodes", description="Two modes coupled through a telegraph-noise phase.")
    p.add_argument("--version", action="version", version=f"tmodes {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--quick", action="store_true", help="smaller default ensemble (1000)")
    p.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                   help="omit the generated= header line")
    p.add_argument("--workers", type=int, metavar="N", help="Monte Carlo threads")
    for key in KEYS:
        p.add_argument(f"--{key}", dest=f"key_{key}", metavar="VALUE", help=KEY_HELP.get(key))
    return p


def parse_config(argv):
    """:class:`~tmodes.config.RunConfig` from command-line arguments."""
    ns = _parser().parse_args(argv)
    file_values = read_config_file(ns.config) if ns.config else {}
    flags = {k: getattr(ns, f"key_{k}") for k in KEYS if getattr(ns, f"key_{k}") is not None}
    return build_config(ns.command, flags, file_values, out=ns.out, quick=ns.quick,
                        timestamp=ns.timestamp, workers=ns.workers)


def _series(cfg, columns, data):
    s = CsvSeries(columns, data, cfg.echo())
    return s.stamp() if cfg.timestamp else s


def _emit(cfg, series):
    if cfg.out:
        write_csv(cfg.out, series)
    else:
        sys.stdout.write(series.to_text())


def run_analytic(cfg):
    p = cfg.sim_params()
    return _series(cfg, ["t", "mean_na"], {"t": p.t_grid, "mean_na": analytic.mean_na(p.t_grid, p)})


def run_simulate(cfg):
    p = cfg.sim_params()
    if p.ensemble_size < 2:
        raise ConfigError("ensemble", "need at least 2 trajectories for a standard error")
    if p.rho0 is None:
        ts = ensemble.mc_average_occupation(p, cfg.workers)
        return _series(cfg, ["t", "mean_na", "stderr_na"],
                       {"t": ts.times, "mean_na": ts.mean, "stderr_na": ts.stderr})
    ds = ensemble.mc_average_density(p, cfg.workers)
    m, e = ds.mean, ds.stderr
    data = {"t": ds.times,
            "rho11": m[:, 0, 0].real, "stderr_rho11": e[:, 0, 0],
            "rho22": m[:, 1, 1].real, "stderr_rho22": e[:, 1, 1],
            "rho12_re": m[:, 0, 1].real, "rho12_im": m[:, 0, 1].imag, "stderr_rho12": e[:, 0, 1]}
    return _series(cfg, list(data), data)


def run_renewal(cfg):
    p = cfg.sim_params()
    n_steps = int(np.ceil(cfg["t_max"] / cfg["h"] - 1e-9))
    h = cfg["t_max"] / n_steps
    try:
        grid = renewal.solve_populations(p, h, n_steps)
    except DomainError as exc:
        raise ConfigError("h", str(exc)) from None
    data = {"t": grid.times, "rho11": grid.rho11, "rho22": grid.rho22,
            "mean_na": p.N * grid.rho11}
    if p.rho0 is not None:
        x = renewal.solve_coherence(p, h, n_steps)
        data["rho12_re"], data["rho12_im"] = x.real, x.imag
    return _series(cfg, list(data), data)


def _figure_column(x):
    return "g0tau0_inf" if np.isinf(x) else f"g0tau0_{x:g}"


def run_figure(cfg):
    g0 = cfg["g0"]
    big_t = np.linspace(0.0, 20.0, cfg["grid_points"])
    data = {"T": big_t}
    for x in FIGURE_SETS[cfg["figure"]]:
        tau0 = (INF_G0TAU0 if np.isinf(x) else x) / g0
        data[_figure_column(x)] = analytic.occupation(big_t / g0, g0, tau0, 0.0, FIGURE_NB)
    return _series(cfg, list(data), data)


def sweep_values(cfg):
    lo, hi, n = cfg["sweep_min"], cfg["sweep_max"], cfg["sweep_count"]
    if cfg["sweep_scale"] == "log":
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def run_sweep(cfg):
    g0 = cfg["g0"]
    values = sweep_values(cfg)
    tau0s = values / g0 if cfg["sweep_param"] == "g0tau0" else values
    probes = cfg["probes"]
    regimes, omegas, rates = [], [], []
    occ = {p: [] for p in probes}
    for tau0 in tau0s:
        reg = analytic.classify_regime(g0, tau0)
        regimes.append(reg.kind.value)
        omegas.append(reg.signed_omega)
        wcr = reg.kind is analytic.RegimeKind.WCR
        rates.append(float("nan") if wcr else analytic.effective_rate(g0, tau0))
        for p in probes:
            occ[p].append(analytic.occupation(p / g0, g0, tau0, cfg["na0"], cfg["nb0"]))
    data = {cfg["sweep_param"]: values, "regime": regimes, "omega_signed": omegas,
            "effective_rate": rates}
    for p in probes:
        data[f"na_T{p:g}"] = occ[p]
    return _series(cfg, list(data), data)


def run_verify(cfg, out=None):
    """Runs the check suite, prints one line per check, returns the exit code."""
    out = out or sys.stdout
    ensemble_size = cfg["ensemble"] if "ensemble" in cfg.explicit or cfg.quick else None
    checks = verify.run_all(quick=cfg.quick, ensemble_size=ensemble_size, seed=cfg["seed"],
                            order=cfg["order"], workers=cfg.workers,
                            progress=lambda c: print(c.line(), file=out, flush=True))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=out)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.writelines(c.line() + "\n" for c in checks)
    return EXIT_FAIL if failed else EXIT_OK


KEY_HELP = {
    "g0": "coupling amplitude (default 1)",
    "tau0": "mean time between phase jumps (default 1)",
    "na0": "initial occupation of mode a (default 0)",
    "nb0": "initial occupation of mode b (default 2)",
    "rho12_0": "initial coherence; switches to density output (unit trace)",
    "t_max": "end of the time grid (default 20/g0)",
    "grid_points": "time grid size (default 400)",
    "ensemble": "Monte Carlo trajectories (default 10000)",
    "seed": "base seed (default 42)",
    "order": "Laplace inversion order, even, >= 16 (default 32)",
    "h": "renewal step (default min(tau0, 1/g0)/40)",
    "figure": "fig2, fig3 or fig4",
    "sweep_param": "g0tau0 or tau0",
    "sweep_min": "first sweep value (default 0.01)",
    "sweep_max": "last sweep value (default 10)",
    "sweep_count": "number of sweep values, >= 2 (default 50)",
    "sweep_scale": "log or linear",
    "probes": "comma-separated g0*t values sampled by sweep (default 2)",
}

RUNNERS = {"analytic": run_analytic, "simulate": run_simulate, "renewal": run_renewal,
           "figure": run_figure, "sweep": run_sweep}


def main(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        if cfg.command == "verify":
            return run_verify(cfg)
        _emit(cfg, RUNNERS[cfg.command](cfg))
    except (ConfigError, DomainError) as exc:
        print(f"tmodes: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"tmodes: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
