"""Run configuration: ``key = value`` files, command-line overrides, defaults.

Precedence is flags > file > defaults.  Every value is parsed and checked
here so that a bad input is reported against the key that caused it.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

COMMANDS = ("analytic", "simulate", "renewal", "verify", "sweep", "figure")
FIGURES = ("fig2", "fig3", "fig4")
QUICK_ENSEMBLE = 1000


def _float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None
    if not np.isfinite(value):
        raise ConfigError(key, f"must be finite, got {text!r}")
    return value


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        pass
    value = _float(key, text)
    if value != int(value):
        raise ConfigError(key, f"expected an integer, got {text!r}")
    return int(value)


def _complex(key, text):
    try:
        value = complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(key, f"expected a complex number like 0.5+0.1j, got {text!r}") from None
    if not np.isfinite(abs(value)):
        raise ConfigError(key, "must be finite")
    return value


def _choice(options):
    def parse(key, text):
        if text not in options:
            raise ConfigError(key, f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _float_list(key, text):
    return tuple(_float(key, part) for part in text.split(",") if part.strip())


# key -> (parser, default); None means "derived from other keys"
KEYS = {
    "g0": (_float, 1.0),
    "tau0": (_float, 1.0),
    "na0": (_float, 0.0),
    "nb0": (_float, 2.0),
    "rho12_0": (_complex, None),
    "t_max": (_float, None),
    "grid_points": (_int, 400),
    "ensemble": (_int, 10_000),
    "seed": (_int, 42),
    "order": (_int, 32),
    "h": (_float, None),
    "figure": (_choice(FIGURES), "fig2"),
    "sweep_param": (_choice(("g0tau0", "tau0")), "g0tau0"),
    "sweep_min": (_float, 0.01),
    "sweep_max": (_float, 10.0),
    "sweep_count": (_int, 50),
    "sweep_scale": (_choice(("log", "linear")), "log"),
    "probes": (_float_list, (2.0,)),
}


def read_config_file(path):
    """``{key: raw string}`` from a ``key = value`` file; ``#`` starts a comment."""
    raw = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(key or f"line {n}", "expected 'key = value'")
        raw[key] = value.strip()
    return raw


@dataclass
class RunConfig:
    command: str
    values: dict
    out: str | None = None
    quick: bool = False
    timestamp: bool = True
    workers: int | None = None
    explicit: frozenset = field(default_factory=frozenset)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def N(self):
        return self["na0"] + self["nb0"]

    def t_grid(self):
        return np.linspace(0.0, self["t_max"], self["grid_points"])

    def rho0(self):
        """Single-excitation density from the populations and ``rho12_0``."""
        r = self["rho12_0"]
        if r is None:
            return None
        p = np.array([self["na0"], self["nb0"]]) / self.N
        return np.array([[p[0], r], [np.conj(r), p[1]]], dtype=complex)

    def sim_params(self):
        from .ensemble import SimParams
        return SimParams(g0=self["g0"], tau0=self["tau0"], na0=self["na0"], nb0=self["nb0"],
                         rho0=self.rho0(), t_grid=self.t_grid(),
                         ensemble_size=self["ensemble"], base_seed=self["seed"])

    def echo(self):
        """Metadata for output headers: the command, scale flag and every key."""
        meta = {"command": self.command, "quick": str(self.quick).lower()}
        for key in KEYS:
            v = self.values[key]
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, float | complex):
                v = repr(v)
            meta[key] = "none" if v is None else v
        return meta


def _validate(v):
    def need(key, ok, message):
        if not ok:
            raise ConfigError(key, message)

    need("g0", v["g0"] > 0, f"must be > 0, got {v['g0']!r}")
    need("tau0", v["tau0"] > 0, f"must be > 0, got {v['tau0']!r}")
    need("na0", v["na0"] >= 0, f"must be >= 0, got {v['na0']!r}")
    need("nb0", v["nb0"] >= 0, f"must be >= 0, got {v['nb0']!r}")
    need("nb0", v["na0"] + v["nb0"] > 0, "na0 + nb0 must be > 0")
    need("t_max", v["t_max"] > 0, f"must be > 0, got {v['t_max']!r}")
    need("grid_points", v["grid_points"] >= 2, f"must be >= 2, got {v['grid_points']}")
    need("ensemble", v["ensemble"] >= 1, f"must be >= 1, got {v['ensemble']}")
    need("seed", 0 <= v["seed"] < 2**64, "must fit in an unsigned 64-bit integer")
    need("order", v["order"] >= 8 and v["order"] % 2 == 0,
         f"must be even and >= 8, got {v['order']}")
    need("h", v["h"] > 0, f"must be > 0, got {v['h']!r}")
    r = v["rho12_0"]
    if r is not None:
        n = v["na0"] + v["nb0"]
        need("rho12_0", abs(r) ** 2 <= v["na0"] * v["nb0"] / n**2 + 1e-12,
             "|rho12_0|^2 must not exceed rho11*rho22 (positivity)")
    need("sweep_count", v["sweep_count"] >= 2, f"must be >= 2, got {v['sweep_count']}")
    need("sweep_min", v["sweep_min"] > 0, "must be > 0")
    need("sweep_max", v["sweep_max"] > v["sweep_min"], "must exceed sweep_min")
    need("probes", len(v["probes"]) >= 1 and min(v["probes"]) >= 0,
         "need at least one probe time, all >= 0")


def build_config(command, flags=None, file_values=None, *, out=None, quick=False,
                 timestamp=True, workers=None):
    """Merge raw string values (flags over file) onto the defaults and validate."""
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {', '.join(COMMANDS)}, got {command!r}")
    merged = dict(file_values or {})
    merged.update(flags or {})
    values = {}
    for key, raw in merged.items():
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        values[key] = KEYS[key][0](key, str(raw).strip())
    explicit = frozenset(values)
    for key, (_, default) in KEYS.items():
        values.setdefault(key, default)
    if quick and "ensemble" not in explicit:
        values["ensemble"] = QUICK_ENSEMBLE
    if values["t_max"] is None:
        values["t_max"] = 20.0 / values["g0"] if values["g0"] > 0 else 20.0
    if values["h"] is None and values["g0"] > 0 and values["tau0"] > 0:
        values["h"] = min(values["tau0"], 1.0 / values["g0"]) / 40.0
    elif values["h"] is None:
        values["h"] = 1.0
    _validate(values)
    if workers is not None and workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {workers}")
    return RunConfig(command, values, out, quick, timestamp, workers, explicit)
