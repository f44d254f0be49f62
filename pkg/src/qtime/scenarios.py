"""Scenario configuration and the per-kind experiment runners used by the CLI.

A scenario is a YAML mapping::

    name: barrier-tunnelling
    kind: dwell
    seed: 0                     # optional, randomized kinds only
    constants: {hbar: 1, mass: 1, c: 1}
    parameters: {E0: 5, sigmaE: 0.1, V0: 10, width: 1}
    grids:
      energy: {start: 4, stop: 6, count: 801}
    output: {path: barrier.csv, format: csv}

Each runner returns a ``ResultTable`` (equal-length columns plus metadata)
and a list of named pass/fail checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from . import discrete as disc
from . import dwell, hamiltonian as ham, moments, photon
from .errors import PreconditionError
from .numerics import Grid1D
from .wavepacket import (ENERGY, MOMENTUM, PhysicalConstants, continuity_residual, density_flux,
                         gaussian_spectrum, momentum_to_energy_amplitude,
                         momentum_to_two_component, synthesize_slice)
from . import numerics

KINDS = ("synthesize", "moments", "uncertainty", "dwell", "photon", "hamiltonianCheck", "discrete")
FORMATS = ("csv", "json")
REQUIRED = object()


class ConfigError(ValueError):
    """Malformed scenario or suite file (maps to exit code 2)."""


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ResultTable:
    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("result columns must have equal length")


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    parameters: dict
    grids: dict
    constants: PhysicalConstants
    seed: int | None = None
    output_path: str | None = None
    output_format: str | None = None
    raw: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------- parsing

_SCHEMAS: dict[str, dict[str, Any]] = {
    "synthesize": {"representation": ENERGY, "center": REQUIRED, "width": REQUIRED, "x": 0.0},
    "moments": {"E0": REQUIRED, "sigmaE": REQUIRED, "x": REQUIRED, "maxOrder": 2},
    "uncertainty": {"samples": 1, "E0": 5.0, "sigmaE": 0.5, "x": 0.0, "E0Range": [2.0, 10.0],
                    "sigmaRange": [0.1, 1.0], "xRange": [0.0, 20.0], "energyWeight": "norm"},
    "dwell": {"E0": REQUIRED, "sigmaE": 0.1, "V0": 0.0, "width": 1.0, "xi": None, "xf": None},
    "photon": {"k0": REQUIRED, "sigmaK": REQUIRED, "x1": 0.0, "x2": 10.0},
    "hamiltonianCheck": {"p0": 5.0, "sigmaP": 0.5, "k": 2.0, "x": 3.0},
    "discrete": {"system": REQUIRED, "nLevels": 2, "coefficients": None, "x": None, "gamma": 0.0,
                 "omega": 1.0, "boxWidth": float(np.pi), "randomSystems": 0},
}
_GRID_KEYS = {"energy", "momentum", "time", "wavenumber"}


def _grid(spec, what: str) -> Grid1D:
    if not isinstance(spec, dict) or set(spec) != {"start", "stop", "count"}:
        raise ConfigError(f"grid {what!r} must have exactly start, stop and count")
    try:
        start, stop, count = float(spec["start"]), float(spec["stop"]), spec["count"]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid {what!r}: {exc}") from None
    if not isinstance(count, int) or isinstance(count, bool):
        raise ConfigError(f"grid {what!r}: count must be an integer")
    if not stop > start:
        raise ConfigError(f"grid {what!r}: stop must exceed start")
    return Grid1D.between(start, stop, count)


def parse_scenario(data: Any, source: str = "<scenario>") -> Scenario:
    """Validate a decoded YAML mapping; raises ``ConfigError`` on any problem."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: scenario must be a mapping")
    unknown = set(data) - {"name", "kind", "parameters", "grids", "constants", "seed", "output"}
    if unknown:
        raise ConfigError(f"{source}: unknown top-level keys {sorted(unknown)}")
    name, kind = data.get("name"), data.get("kind")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError(f"{source}: 'name' must be a non-empty string without path separators")
    if kind not in KINDS:
        raise ConfigError(f"{source}: 'kind' must be one of {list(KINDS)}")
    params = dict(data.get("parameters") or {})
    schema = _SCHEMAS[kind]
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigError(f"{source}: unknown parameters for {kind}: {sorted(unknown)}")
    for key, default in schema.items():
        if key not in params:
            if default is REQUIRED:
                raise ConfigError(f"{source}: missing required parameter {key!r}")
            params[key] = default
    grids_raw = data.get("grids") or {}
    if not isinstance(grids_raw, dict) or set(grids_raw) - _GRID_KEYS:
        raise ConfigError(f"{source}: grids must be a mapping with keys from {sorted(_GRID_KEYS)}")
    grids = {k: _grid(v, k) for k, v in grids_raw.items()}
    try:
        constants = PhysicalConstants(**(data.get("constants") or {}))
    except (TypeError, PreconditionError) as exc:
        raise ConfigError(f"{source}: constants: {exc}") from None
    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ConfigError(f"{source}: seed must be an integer")
    out = data.get("output") or {}
    if not isinstance(out, dict) or set(out) - {"path", "format"}:
        raise ConfigError(f"{source}: output must be a mapping with path and/or format")
    fmt = out.get("format")
    if fmt is not None and fmt not in FORMATS:
        raise ConfigError(f"{source}: output format must be csv or json")
    return Scenario(name, kind, params, grids, constants, seed, out.get("path"), fmt, data)


# --------------------------------------------------------------------- helpers

def _num(params, key) -> float:
    try:
        return float(params[key])
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a number") from None


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _energy_spectrum(e0, sigma, grid, constants):
    if grid is None:
        lo = e0 - 9.0 * sigma
        if lo <= 0.0:
            raise PreconditionError("spectrum support reaches E <= 0")
        grid = Grid1D.between(lo, e0 + 9.0 * sigma, 801)
    return gaussian_spectrum(e0, sigma, ENERGY, grid, constants)


def _check(name, value, threshold, passed=None) -> Check:
    value = float(value)
    if passed is None:
        passed = value < threshold
    return Check(name, value, float(threshold), bool(passed))


# --------------------------------------------------------------------- runners

def run_synthesize(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    rep = p["representation"]
    center, width, x = _num(p, "center"), _num(p, "width"), _num(p, "x")
    checks = []
    if rep == ENERGY:
        spec = _energy_spectrum(center, width, sc.grids.get("energy"), c)
    elif rep == MOMENTUM:
        grid = sc.grids.get("momentum") or Grid1D.between(center - 9 * width, center + 9 * width, 801)
        spec = gaussian_spectrum(center, width, MOMENTUM, grid, c)
        two = momentum_to_two_component(spec, sc.grids.get("energy"), c)
        norm = float(numerics.integrate_array(two.norm_density, two.energy_grid))
        checks.append(_check("two_component_norm_error", abs(norm - 1.0), 1e-4))
    else:
        raise ConfigError("representation must be 'energy' or 'momentum'")
    if rep == ENERGY:
        tgrid = sc.grids.get("time") or moments.auto_time_grid(spec, x, c)
        residual = continuity_residual(spec, x, constants=c)
        checks.append(_check("continuity_residual", residual, 1e-4))
    else:
        tgrid = sc.grids.get("time")
        if tgrid is None:
            # place the window from the forward-moving part's energy amplitude
            egrid = two.energy_grid
            tgrid = moments.auto_time_grid(momentum_to_energy_amplitude(spec, egrid, c), x, c)
    field_ = synthesize_slice(spec, x, tgrid, c)
    rho, j = density_flux(field_, c)
    cols = {"t": tgrid.points, "psi_re": field_.psi.real, "psi_im": field_.psi.imag,
            "rho": rho, "j": j}
    return ResultTable(cols, {"time_grid": tgrid}), checks


def run_moments(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    e0, sigma, x = _num(p, "E0"), _num(p, "sigmaE"), _num(p, "x")
    spec = _energy_spectrum(e0, sigma, sc.grids.get("energy"), c)
    tgrid = sc.grids.get("time") or moments.auto_time_grid(spec, x, c)
    stats = moments.flux_stats(spec, x, tgrid, c)
    orders = list(range(1, int(p["maxOrder"]) + 1))
    trep = [stats.mean, stats.variance + stats.mean**2] + [stats.higher[n] for n in orders[2:]]
    erep = [moments.moment_energy_rep(spec, x, n, c) for n in orders]
    gaps = [_rel(a, b) for a, b in zip(trep, erep)]
    fine = moments.flux_stats(spec, x, tgrid.refined(2), c).mean
    checks = [_check(f"dual_rep_gap_n{n}", g, 1e-3) for n, g in zip(orders, gaps)]
    cols = {"order": orders, "time_rep": trep, "energy_rep": erep, "rel_gap": gaps}
    return ResultTable(cols, {"convergence": {"mean_change_on_refinement": abs(fine - stats.mean)}}), checks


def _random_admissible(rng, p):
    while True:
        e0 = rng.uniform(*p["E0Range"])
        sigma = rng.uniform(*p["sigmaRange"])
        if e0 - 9.0 * sigma > 0.0:
            return e0, sigma, rng.uniform(*p["xRange"])


def run_uncertainty(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    n = int(p["samples"])
    rows = []
    if n <= 1:
        rows.append((_num(p, "E0"), _num(p, "sigmaE"), _num(p, "x")))
    else:
        rows = [_random_admissible(rng, p) for _ in range(n)]
    out = {k: [] for k in ("E0", "sigmaE", "x", "delta_e", "delta_t", "product")}
    for e0, sigma, x in rows:
        spec = _energy_spectrum(e0, sigma, None, c)
        res = moments.uncertainty_product(spec, x, c, energy_weight=p["energyWeight"])
        for key, val in zip(out, (e0, sigma, x, res.delta_e, res.delta_t, res.product)):
            out[key].append(val)
    worst = min(out["product"])
    checks = [_check("min_product_minus_half_hbar", worst - 0.5 * c.hbar, -1e-9,
                     passed=worst >= 0.5 * c.hbar - moments.UNCERTAINTY_SLACK)]
    return ResultTable(out), checks


def _barrier_transmission(v0, a, e, c):
    hbar, mu = c.hbar, c.mass
    if e < v0:
        kappa = np.sqrt(2.0 * mu * (v0 - e)) / hbar
        return 1.0 / (1.0 + v0**2 * np.sinh(kappa * a) ** 2 / (4.0 * e * (v0 - e)))
    if e == v0:
        return 1.0 / (1.0 + mu * v0 * a**2 / (2.0 * hbar**2))
    q = np.sqrt(2.0 * mu * (e - v0)) / hbar
    return 1.0 / (1.0 + v0**2 * np.sin(q * a) ** 2 / (4.0 * e * (e - v0)))


def run_dwell(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    e0, sigma, v0, a = _num(p, "E0"), _num(p, "sigmaE"), _num(p, "V0"), _num(p, "width")
    setup = dwell.ScatteringSetup.free() if v0 == 0.0 else dwell.ScatteringSetup.barrier(v0, a)
    xi = 0.0 if p["xi"] is None else _num(p, "xi")
    xf = a if p["xf"] is None else _num(p, "xf")
    spec = _energy_spectrum(e0, sigma, sc.grids.get("energy"), c)
    tgrid = sc.grids.get("time")
    dens = dwell.mean_dwell_density(spec, setup, xi, xf, c, tgrid)
    flux = dwell.mean_dwell_flux(spec, setup, xi, xf, c, tgrid)
    gap = _rel(dens, flux)
    stationary = dwell.stationary_dwell_time(setup, e0, xi, xf, c)
    st = dwell.solve_stationary(setup, e0, c)
    t2 = abs(st.transmission) ** 2
    checks = [_check("dwell_density_vs_flux_gap", gap, 1e-3)]
    closed = t2
    if not setup.is_free:
        closed = _barrier_transmission(v0, a, e0, c)
        checks.append(_check("transmission_closed_form_error", abs(t2 - closed), 1e-10))
    cols = {"dwell_density": [dens], "dwell_flux": [flux], "rel_gap": [gap],
            "stationary_dwell": [stationary], "transmission": [t2], "transmission_closed_form": [closed]}
    return ResultTable(cols), checks


def run_photon(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    k0, sk, x1, x2 = _num(p, "k0"), _num(p, "sigmaK"), _num(p, "x1"), _num(p, "x2")
    kgrid = sc.grids.get("wavenumber")
    if kgrid is None:
        lo = k0 - 9.0 * sk
        if lo <= 0.0:
            raise PreconditionError("photon spectrum reaches k <= 0")
        kgrid = Grid1D.between(lo, k0 + 9.0 * sk, 801)
    spec = photon.gaussian_photon(k0, sk, kgrid)
    cols = {k: [] for k in ("x", "mean_time", "mean_time_energy_rep", "second_moment",
                            "second_moment_energy_rep")}
    for x in (x1, x2):
        cols["x"].append(x)
        cols["mean_time"].append(photon.photon_mean_time(spec, x, constants=c))
        cols["mean_time_energy_rep"].append(photon.photon_mean_time_energy_rep(spec, x, 1, c))
        cols["second_moment"].append(photon.photon_mean_time(spec, x, constants=c, order=2))
        cols["second_moment_energy_rep"].append(photon.photon_mean_time_energy_rep(spec, x, 2, c))
    travel = (x2 - x1) / c.c
    diff = cols["mean_time"][1] - cols["mean_time"][0]
    dual = max(_rel(a, b) for a, b in zip(cols["mean_time"] + cols["second_moment"],
                                          cols["mean_time_energy_rep"] + cols["second_moment_energy_rep"])
               if abs(b) > 1e-12)
    residual = photon.em_continuity_residual(spec, x1, constants=c)
    checks = [_check("light_speed_passage_error", _rel(diff, travel) if travel else abs(diff), 1e-3),
              _check("dual_rep_gap", dual, 1e-3),
              _check("continuity_residual", residual, 1e-4)]
    return ResultTable(cols), checks


def run_hamiltonian(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    p0, sp = _num(p, "p0"), _num(p, "sigmaP")
    grid = sc.grids.get("momentum") or Grid1D.between(p0 - 9 * sp, p0 + 9 * sp, 4001)
    residuals, equivalence = [], []
    for g in (grid, grid.refined(2)):
        psi = ham.gaussian_momentum(p0, sp, g)
        residuals.append(ham.commutator_residual(psi, c))
        a = ham.apply_T_momentum(psi, c).values
        b = ham.apply_T_via_energy(psi, c).values
        equivalence.append(float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
    action = ham.apply_T_coordinate_planewave(_num(p, "k"), _num(p, "x"), c)
    travel = ham.free_travel_time(_num(p, "k"), _num(p, "x"), c)
    cols = {"step": [grid.step, grid.step / 2], "commutator_residual": residuals,
            "equivalence_error": equivalence}
    meta = {"planewave": {"ratio_re": action.ratio.real, "ratio_im": action.ratio.imag,
                          "travel_time": travel}}
    checks = [_check("planewave_eigenvalue_error", abs(action.eigenvalue - travel), 1e-12),
              _check("commutator_residual", residuals[0], 1e-4),
              _check("commutator_order_ratio", residuals[0] / residuals[1], 3.0,
                     passed=residuals[0] >= 3.0 * residuals[1]),
              _check("energy_derivative_equivalence", equivalence[0], 1e-5)]
    return ResultTable(cols, meta), checks


def _coefficients(raw, n):
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != n:
        raise ConfigError(f"coefficients must be a list of {n} entries")
    out = []
    for item in raw:
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(complex(item))
        elif isinstance(item, list) and len(item) == 2:
            out.append(complex(float(item[0]), float(item[1])))
        else:
            raise ConfigError("each coefficient is a number or a [re, im] pair")
    return out


def run_discrete(sc: Scenario, rng):
    p, c = sc.parameters, sc.constants
    kind = p["system"]
    if kind not in (disc.OSCILLATOR, disc.BOX):
        raise ConfigError(f"system must be {disc.OSCILLATOR!r} or {disc.BOX!r}")
    n_random = int(p["randomSystems"])
    if n_random:
        specs = []
        for _ in range(n_random):
            n = int(rng.integers(2, 9))
            specs.append((n, rng.normal(size=n) + 1j * rng.normal(size=n)))
    else:
        n = int(p["nLevels"])
        specs = [(n, _coefficients(p["coefficients"], n))]
    cols = {k: [] for k in ("system", "gamma", "n_levels", "mean_time", "mean_time_energy_rep",
                            "var_e", "var_t", "rhs_bound", "satisfied", "robertson_bound",
                            "robertson_satisfied", "periodicity_error")}
    gaps = []
    for idx, (n, coeff) in enumerate(specs):
        system = disc.build_catalog_system(kind, n, coeff, c, omega=_num(p, "omega"),
                                           width=_num(p, "boxWidth"))
        x = disc.default_probe(system, c, _num(p, "omega")) if p["x"] is None else _num(p, "x")
        if n_random:
            gammas = [-system.period / 4, 0.0, system.period / 4]
        else:
            gammas = [_num(p, "gamma")]
        t_probe = np.linspace(-system.period, system.period, 17)
        per = float(np.max(np.abs(disc.evolve(system, x, t_probe + system.period)
                                  - disc.evolve(system, x, t_probe))))
        mt = disc.mean_time_discrete(system, x)
        me = disc.time_operator_energy_rep(system, x)
        gaps.append(abs(mt - me) / system.period)
        for g in gammas:
            u = disc.generalized_uncertainty(system, g, x, constants=c)
            row = (idx, g, n, mt, me, u.var_e, u.var_t, u.rhs_bound, int(u.satisfied),
                   u.robertson_bound, int(u.robertson_satisfied), per)
            for key, val in zip(cols, row):
                cols[key].append(val)
    checks = [_check("periodicity_error", max(cols["periodicity_error"]), 1e-12),
              _check("dual_rep_gap_per_period", max(gaps), 1e-3),
              _check("printed_bound_violations", cols["satisfied"].count(0), 0.5,
                     passed=all(cols["satisfied"])),
              _check("robertson_bound_violations", cols["robertson_satisfied"].count(0), 0.5,
                     passed=all(cols["robertson_satisfied"]))]
    return ResultTable(cols), checks


RUNNERS: dict[str, Callable] = {
    "synthesize": run_synthesize, "moments": run_moments, "uncertainty": run_uncertainty,
    "dwell": run_dwell, "photon": run_photon, "hamiltonianCheck": run_hamiltonian,
    "discrete": run_discrete,
}


def run_scenario(sc: Scenario, seed: int = 0):
    """Execute ``sc``; returns ``(ResultTable, checks)`` with full metadata attached."""
    rng = np.random.default_rng(sc.seed if sc.seed is not None else seed)
    table, checks = RUNNERS[sc.kind](sc, rng)
    meta = dict(table.metadata)
    meta.update({"name": sc.name, "kind": sc.kind, "parameters": sc.parameters,
                 "grids": {k: vars(g) for k, g in sorted(sc.grids.items())},
                 "constants": vars(sc.constants),
                 "seed": sc.seed if sc.seed is not None else seed,
                 "version": __version__,
                 "checks": [vars(ch) for ch in checks]})
    if "time_grid" in meta:
        meta["time_grid"] = vars(meta["time_grid"])
    table.metadata = meta
    return table, checks
