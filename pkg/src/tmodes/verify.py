"""Cross-checks between the Monte Carlo, renewal, closed-form and Laplace paths.

Each check returns a :class:`Check` carrying the measured value and the
gate it was held to.  Checks that exercise the closed form accept it as a
``closed_form(t, params)`` callable so that a deliberately broken formula
can be fed in and shown to fail.
"""

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, ensemble, laplace, renewal
from .ensemble import SimParams

# absolute floor on MC gates: stderr is exactly 0 at t = 0 and the two
# sides then differ only by rounding
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name}: {self.value:.3e} (tol {self.tol:.3e})"
        return f"{text}  {self.detail}" if self.detail else text


def _check(name, value, tol, detail=""):
    return Check(name, float(value), float(tol), bool(value <= tol) and math.isfinite(value), detail)


def _params(g0tau0, *, g0=1.0, points=200, span=20.0, **kw):
    return SimParams(g0=g0, tau0=g0tau0 / g0, na0=kw.pop("na0", 0.0), nb0=kw.pop("nb0", 2.0),
                     t_grid=np.linspace(0.0, span / g0, points), **kw)


def mc_gate_ratio(series, reference, big_n, k):
    """Largest ``|mean - reference| / (k stderr + floor)``; passing means <= 1."""
    gate = k * series.stderr + ROUNDING_FLOOR * big_n
    return float(np.max(np.abs(series.mean - reference) / gate))


def check_laplace(closed_form=analytic.mean_na, order=32):
    p = SimParams(g0=1.0, tau0=1.0, na0=0.0, nb0=2.0)
    worst = max(abs(float(closed_form(t, p)) - laplace.mean_na_numeric(t, p, order))
                for t in (0.5, 1.0, 2.0))
    return _check("closed form vs inverse Laplace", worst, 1e-6, "t in {0.5, 1, 2}")


def check_mc(closed_form=analytic.mean_na, ensemble_size=10_000, k=4.0, seed=42,
             workers=None, g0tau0s=(10.0, 1.0, 0.25, 0.05)):
    out = []
    for x in g0tau0s:
        p = _params(x, ensemble_size=ensemble_size, base_seed=seed)
        series = ensemble.mc_average_occupation(p, workers)
        ratio = mc_gate_ratio(series, closed_form(p.t_grid, p), p.N, k)
        out.append(_check(f"MC vs closed form, g0tau0={x:g}", ratio, 1.0,
                          f"max |diff| / ({k:g} stderr), M={ensemble_size}"))
    return out


def _renewal_error(closed_form, p, h):
    n = int(round(p.t_grid[-1] / h))
    r = renewal.solve_populations(p, h, n)
    # unit-normalised: populations against n_a / N and n_b / N
    ref = np.asarray(closed_form(r.times, p)) / p.N
    err = max(np.max(np.abs(r.rho11 - ref)), np.max(np.abs(r.rho22 - (1.0 - ref))))
    trace = np.max(np.abs(r.rho11 + r.rho22 - 1.0))
    return err, trace


def check_renewal(closed_form=analytic.mean_na):
    p = _params(1.0, na0=0.0, nb0=1.0, points=2)
    h = min(p.tau0, 1.0 / p.g0) / 40.0
    e1, tr1 = _renewal_error(closed_form, p, h)
    e2, tr2 = _renewal_error(closed_form, p, h / 2.0)
    ratio = e1 / e2 if e2 > 0 else float("inf")
    return [
        _check("renewal vs closed form, g0tau0=1", e1, 1e-3, f"h={h:g}"),
        Check("renewal convergence ratio", ratio, 4.0, 3.5 <= ratio <= 4.5,
              "error(h)/error(h/2), gate [3.5, 4.5]"),
        _check("renewal trace preservation", max(tr1, tr2), 1e-9),
    ]


def check_residual(closed_form=analytic.mean_na, g0tau0s=(10.0, 0.05)):
    out = []
    for x in g0tau0s:
        p = _params(x, points=200)
        res = renewal.residual_check(lambda t, p=p: closed_form(t, p), p)
        out.append(_check(f"integral-equation residual, g0tau0={x:g}", res / p.N, 1e-6,
                          "relative to N"))
    return out


def check_transition(closed_form=analytic.mean_na, eps=1e-6):
    g0 = 1.0
    kinds = [analytic.classify_regime(g0, x).kind
             for x in (0.25 * (1 - 1e-9), 0.25, 0.25 * (1 + 1e-9))]
    flips = kinds == [analytic.RegimeKind.SCR, analytic.RegimeKind.CRITICAL,
                      analytic.RegimeKind.WCR]
    t = np.linspace(0.0, 20.0 * 0.25, 2001)
    lo = SimParams(g0=g0, tau0=0.25 * (1 - eps), na0=0.0, nb0=2.0)
    hi = SimParams(g0=g0, tau0=0.25 * (1 + eps), na0=0.0, nb0=2.0)
    gap = np.max(np.abs(closed_form(t, hi) - closed_form(t, lo))) / lo.N
    return [
        Check("regime flips at g0tau0=0.25", 0.25, 0.25, flips, "SCR | Critical | WCR"),
        _check("continuity across g0tau0=0.25", gap, 1e-5, f"eps={eps:g}, relative to N"),
    ]


def check_pure_oscillation(closed_form=analytic.mean_na):
    p = SimParams(g0=1.0, tau0=1e9, na0=0.0, nb0=2.0)
    t = np.linspace(0.0, 20.0, 2001)
    dev = np.max(np.abs(closed_form(t, p) - p.N * np.sin(t) ** 2))
    return _check("pure oscillation limit, tau0=1e9/g0", dev, 1e-6)


def check_freezing(closed_form=analytic.mean_na, ensemble_size=10_000, seed=42,
                   workers=None):
    g0, tau0, n_b = 1.0, 1e-4, 2.0
    p = SimParams(g0=g0, tau0=tau0, na0=0.0, nb0=n_b, t_grid=np.linspace(0.0, 50.0, 51),
                  ensemble_size=ensemble_size, base_seed=seed)
    ana = float(np.max(closed_form(np.linspace(0.0, 50.0, 2001), p)))
    series = ensemble.mc_average_occupation(p, workers)
    mc = float(np.max(series.mean))
    rate = analytic.effective_rate(g0, tau0)
    rel = abs(rate / (4 * g0 * g0 * tau0) - 1.0)
    return [
        _check("freezing, closed form max n_a / N_b", ana / n_b, 0.05, "g0 t <= 50"),
        _check("freezing, MC max n_a / N_b", mc / n_b, 0.05, f"M={ensemble_size}"),
        _check("effective rate vs 4 g0^2 tau0", rel, 0.01, "relative"),
    ]


def check_conservation(n_traj=200, seed=42):
    p = _params(1.0, points=101, ensemble_size=2, base_seed=seed)
    na, nb = ensemble.trajectory_occupations(p, range(n_traj))
    dev = float(np.max(np.abs(na + nb - p.N)))
    return _check("per-trajectory n_a + n_b conservation", dev, 1e-12, f"{n_traj} trajectories")


def check_determinism(seed=42, ensemble_size=600):
    from . import cli

    texts = []
    with tempfile.TemporaryDirectory() as tmp:
        for w in (1, 3):
            path = Path(tmp) / f"w{w}.csv"
            code = cli.main(["simulate", "--ensemble", str(ensemble_size), "--seed", str(seed),
                             "--grid_points", "50", "--no-timestamp", "--workers", str(w),
                             "--out", str(path)])
            texts.append(path.read_bytes() if code == 0 else b"")
    same = texts[0] == texts[1] and texts[0] != b""
    return Check("byte-identical CSV for 1 and 3 workers", 0.0 if same else 1.0, 0.0, same)


def run_all(*, quick=False, ensemble_size=None, seed=42, order=32, workers=None,
            closed_form=analytic.mean_na, progress=None):
    """Every check in order.  ``quick`` uses M = 1e3 and 5-stderr gates.

    The freezing Monte Carlo needs ~5e5 segments per trajectory, so it
    runs at a tenth of the main ensemble size here (M = 1e3 by default).
    """
    m = ensemble_size or (1000 if quick else 10_000)
    k = 5.0 if quick else 4.0
    steps = [
        lambda: [check_laplace(closed_form, order)],
        lambda: check_mc(closed_form, m, k, seed, workers),
        lambda: check_renewal(closed_form),
        lambda: check_residual(closed_form),
        lambda: check_transition(closed_form),
        lambda: [check_pure_oscillation(closed_form)],
        lambda: check_freezing(closed_form, max(2, m // 10), seed, workers),
        lambda: [check_conservation(seed=seed), check_determinism(seed)],
    ]
    checks = []
    for step in steps:
        for c in step():
            checks.append(c)
            if progress:
                progress(c)
    return checks

