"""Command-line front end: config files, runs, figure data, comparisons.

One engine computes any mix of the closed-form fields (q0, q1, qpt) and
the marched reference (qnum) on a shared station list, writing one CSV
per station plus a summary.  Subcommands are thin wrappers: ``analytic``
and ``solve`` restrict the output set, ``fig1``/``fig1b``/``fig2`` bake
in the published-figure configurations, ``invariant`` assembles the
shape-preserving fields, ``profile`` tabulates a duct, and ``compare``
reduces finished station files to relative-difference metrics.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, HornWaveError
from .grid import TWO_PI, TauGrid
from .invariant import (InvariantConfig, assemble_invariant_q,
                        first_integral_solution, integrate_factor_ode,
                        similarity_vars)
from .kernel import InitialCondition
from .profiles import (BetaFamilyProfile, ConstantProfile, ExponentialProfile,
                       PowerLawProfile, Profile, SphericalProfile,
                       TabulatedProfile, load_profile_table)
from .rg import PhysParams, evaluate_station
from .solver import SolverConfig, residual, solve

_FIELD_ORDER = ("q0", "q1", "qpt", "qnum")
_ALLOWED_OUTPUTS = _FIELD_ORDER + ("invariant",)


# ---------------------------------------------------------------------------
# CSV plumbing

def _fmt(value):
    return "%.17g" % float(value)


def _write_csv(path: Path, names, columns):
    """One header row, 17-significant-digit cells, LF endings."""
    columns = [np.atleast_1d(np.asarray(c)) for c in columns]
    rows = [",".join(names)]
    for i in range(columns[0].size):
        rows.append(",".join(_fmt(c[i]) for c in columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(rows) + "\n")
    return path


def read_field_table(path):
    """Station CSV back into named columns (dict of 1-d arrays)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"table {path} does not exist")
    lines = [ln for ln in path.read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ConfigError(f"table {path} is empty")
    names = [c.strip() for c in lines[0].split(",")]
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as err:
        raise ConfigError(f"table {path}: {err}") from err
    if data.ndim != 2 or data.shape[1] != len(names):
        raise ConfigError(f"table {path}: ragged rows")
    return {name: data[:, i].copy() for i, name in enumerate(names)}


def _grid_from_tau(tau, periodic):
    """Rebuild the sampling grid from written tau values.

    Round-tripped floats carry +-1 ulp of noise, so the periodic period
    snaps to 2 pi (the engine's cell) when within 1e-9 of it.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size < 3:
        raise ConfigError("need at least 3 tau samples")
    dt = np.diff(tau)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * abs(dt[0]):
        raise ConfigError("tau samples are not uniformly spaced")
    if not periodic:
        return TauGrid.windowed(float(tau[0]), float(tau[-1]), tau.size)
    period = float(dt.mean() * tau.size)
    if abs(period - TWO_PI) < 1e-9 * TWO_PI:
        period = TWO_PI
    start = float(tau[0])
    if abs(start) < 1e-9 * period:
        start = 0.0
    return TauGrid(n=tau.size, period=period, start=start)


def read_initial_table(path, column="qnum", periodic=True):
    """Initial condition from a station CSV written by this tool."""
    cols = read_field_table(path)
    if "tau" not in cols:
        raise ConfigError(f"{path} has no tau column")
    if column not in cols:
        raise ConfigError(f"{path} has no column {column!r}")
    grid = _grid_from_tau(cols["tau"], periodic)
    return InitialCondition.tabulated(cols[column], grid)


def read_profile_file(path) -> TabulatedProfile:
    """Accepts either the plain two-column ``x S`` format or the CSV the
    ``profile`` subcommand writes (columns x and area)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"profile table {path} does not exist")
    first = ""
    for line in path.read_text().splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            first = line
            break
    if any(ch.isalpha() for ch in first):
        cols = read_field_table(path)
        for need in ("x", "area"):
            if need not in cols:
                raise ConfigError(f"{path} has no column {need!r}")
        return TabulatedProfile(cols["x"], cols["area"])
    return load_profile_table(path)


def station_filename(index):
    return f"station_{index:03d}.csv"


# ---------------------------------------------------------------------------
# Configuration

@dataclass(frozen=True)
class InvariantSpec:
    """Parsed [invariant] section: duct, route, and evaluation patch."""

    config: InvariantConfig
    route: str
    zeta: tuple
    grid: TauGrid
    lambda_pad: float = 1.01


@dataclass(frozen=True)
class RunConfig:
    params: PhysParams
    profile: Profile
    ic: InitialCondition
    stations: tuple
    outputs: tuple
    grid_n: int = 256
    tol: float = 1e-8
    quad_rtol: float = 1e-6
    out: Path = Path("hornwave_out")
    jobs: int = 1
    invariant: InvariantSpec | None = None
    profile_x_stop: float | None = None
    profile_x_count: int = 129

    def __post_init__(self):
        st = tuple(float(s) for s in self.stations)
        if not st:
            raise ConfigError("stations list is empty")
        if any(b <= a for a, b in zip(st, st[1:])) or st[0] < 0.0:
            raise ConfigError("stations must be sorted, distinct, and >= 0")
        outs = tuple(self.outputs)
        if not outs:
            raise ConfigError("no outputs requested")
        for name in outs:
            if name not in _ALLOWED_OUTPUTS:
                raise ConfigError(
                    f"unknown output {name!r}; pick from {_ALLOWED_OUTPUTS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.tol <= 0 or self.quad_rtol <= 0:
            raise ConfigError("tolerances must be positive")
        object.__setattr__(self, "stations", st)
        object.__setattr__(self, "outputs", outs)
        object.__setattr__(self, "out", Path(self.out))


def _need(cp, section, key, cast=float):
    if not cp.has_option(section, key):
        raise ConfigError(f"missing [{section}] {key}")
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {err}") from err


def _opt(cp, section, key, default, cast=float):
    if not cp.has_option(section, key):
        return default
    return _need(cp, section, key, cast)


def _float_list(raw):
    parts = raw.replace(",", " ").split()
    if not parts:
        raise ConfigError("empty list")
    return tuple(float(p) for p in parts)


def _name_list(raw):
    parts = [p.strip() for p in raw.replace(",", " ").split()]
    return tuple(p for p in parts if p)


def _build_profile(cp) -> Profile:
    kind = _need(cp, "profile", "kind", str).strip().lower()
    if kind == "constant":
        return ConstantProfile()
    if kind == "exponential":
        return ExponentialProfile(_need(cp, "profile", "alpha"))
    if kind == "spherical":
        return SphericalProfile(_need(cp, "profile", "radius"))
    if kind == "powerlaw":
        return PowerLawProfile(_need(cp, "profile", "beta0"),
                               _need(cp, "profile", "beta1"),
                               _need(cp, "profile", "m"))
    if kind == "beta":
        cap = _opt(cp, "profile", "zeta_cap", None)
        return BetaFamilyProfile(_need(cp, "profile", "beta0"),
                                 _need(cp, "profile", "beta1"),
                                 _need(cp, "profile", "beta2"),
                                 _need(cp, "profile", "m"),
                                 zeta_cap=cap)
    if kind == "table":
        return read_profile_file(_need(cp, "profile", "path", str).strip())
    raise ConfigError(f"unknown profile kind {kind!r}")


def _build_initial(cp) -> InitialCondition:
    if not cp.has_section("initial"):
        return InitialCondition.harmonic()
    kind = _opt(cp, "initial", "kind", "harmonic", str).strip().lower()
    if kind == "harmonic":
        return InitialCondition.harmonic(
            amplitude=_opt(cp, "initial", "amplitude", 1.0),
            phase=_opt(cp, "initial", "phase", 0.0))
    if kind == "table":
        return read_initial_table(
            _need(cp, "initial", "path", str).strip(),
            column=_opt(cp, "initial", "column", "qnum", str).strip(),
            periodic=_opt(cp, "initial", "periodic", True, _parse_bool))
    raise ConfigError(f"unknown initial kind {kind!r}")


def _parse_bool(raw):
    val = str(raw).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def _build_invariant(cp, params) -> InvariantSpec | None:
    if not cp.has_section("invariant"):
        return None
    betas = (_need(cp, "invariant", "beta0"),
             _opt(cp, "invariant", "beta1", 0.0),
             _opt(cp, "invariant", "beta2", 0.0),
             _need(cp, "invariant", "m"))
    route = _opt(cp, "invariant", "route", "orbit", str).strip().lower()
    if route not in ("orbit", "ode"):
        raise ConfigError(f"invariant route must be 'orbit' or 'ode', got {route!r}")
    kwargs = {}
    if route == "orbit":
        if betas[2] != 0.0 or betas[1] != -betas[3]:
            raise ConfigError(
                "the orbit route needs the constant-flare branch "
                "(beta2 = 0, beta1 = -M)")
        kwargs["c0"] = _need(cp, "invariant", "c0")
        kwargs["c1"] = _opt(cp, "invariant", "c1", 0.0)
    else:
        kwargs["w0"] = _need(cp, "invariant", "w0")
        kwargs["w0_slope"] = _opt(cp, "invariant", "w0_slope", 0.0)
    config = InvariantConfig(betas=betas, params=params, **kwargs)

    start = _need(cp, "invariant", "zeta_start")
    stop = _need(cp, "invariant", "zeta_stop")
    count = _need(cp, "invariant", "zeta_count", int)
    if count < 1 or stop < start:
        raise ConfigError("[invariant] zeta range must be non-empty and ordered")
    zeta = tuple(np.linspace(start, stop, count))

    n = _opt(cp, "invariant", "grid_n", 256, int)
    if cp.has_option("invariant", "window_lo") or cp.has_option("invariant", "window_hi"):
        grid = TauGrid.windowed(_need(cp, "invariant", "window_lo"),
                                _need(cp, "invariant", "window_hi"), n)
    else:
        period = _opt(cp, "invariant", "period", None)
        if period is None:
            if route != "orbit":
                raise ConfigError(
                    "[invariant] needs a window or period for the ode route")
            orbit = first_integral_solution(
                betas[3], params.a, kwargs["c0"], c1=kwargs["c1"], nu=params.nu)
            period = orbit.period * math.sqrt(betas[0])
        grid = TauGrid(n=n, period=period)
    return InvariantSpec(config=config, route=route, zeta=zeta, grid=grid)


def load_config(path, *, jobs=None, out=None, tol=None) -> RunConfig:
    """Parse an INI-style run description; CLI flags override file values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from err

    params = PhysParams(_need(cp, "params", "a"), _opt(cp, "params", "nu", 1.0))
    profile = _build_profile(cp) if cp.has_section("profile") else ConstantProfile()
    ic = _build_initial(cp)

    stations = (1.0,)
    outputs = ("q1", "qnum")
    grid_n, file_tol, quad_rtol = 256, 1e-8, 1e-6
    out_dir = Path("hornwave_out")
    if cp.has_section("run"):
        if cp.has_option("run", "stations"):
            stations = _need(cp, "run", "stations", _float_list)
        if cp.has_option("run", "outputs"):
            outputs = _need(cp, "run", "outputs", _name_list)
        grid_n = _opt(cp, "run", "grid_n", 256, int)
        file_tol = _opt(cp, "run", "tol", 1e-8)
        quad_rtol = _opt(cp, "run", "quad_rtol", 1e-6)
        out_dir = Path(_opt(cp, "run", "out", "hornwave_out", str).strip())

    return RunConfig(
        params=params, profile=profile, ic=ic, stations=stations,
        outputs=outputs, grid_n=grid_n,
        tol=tol if tol is not None else file_tol,
        quad_rtol=quad_rtol,
        out=Path(out) if out is not None else out_dir,
        jobs=jobs if jobs is not None else 1,
        invariant=_build_invariant(cp, params),
        profile_x_stop=_opt(cp, "profile", "x_stop", None)
        if cp.has_section("profile") else None,
        profile_x_count=_opt(cp, "profile", "x_count", 129, int)
        if cp.has_section("profile") else 129)


# ---------------------------------------------------------------------------
# Engine

def run(config: RunConfig):
    """Compute the requested fields at every station and write the CSVs.

    Closed-form fields evaluate station-by-station (parallel across
    ``jobs``); the marched reference is one sweep through all stations.
    Output bytes depend only on the config, never on the job count.
    """
    if "invariant" in config.outputs:
        raise ConfigError("the invariant field has its own subcommand")
    analytic = [f for f in _FIELD_ORDER[:3] if f in config.outputs]
    want_march = "qnum" in config.outputs

    if config.ic.kind == "tabulated":
        if not config.ic.grid.periodic:
            raise ConfigError("station runs need a periodic initial condition")
        grid = config.ic.grid
        if grid.n != config.grid_n:
            raise ConfigError(
                f"tabulated initial condition has {grid.n} samples, "
                f"config asks for {config.grid_n}")
    else:
        grid = TauGrid.periodic_default(config.grid_n)

    nu = config.params.nu
    x_stations = tuple(s / nu for s in config.stations)
    per_station = [{} for _ in x_stations]

    if analytic:
        def one_station(x):
            sol = evaluate_station(config.params, config.profile, config.ic,
                                   x, grid, fields=tuple(analytic),
                                   quad_rtol=config.quad_rtol)
            return {name: getattr(sol, name) for name in analytic}

        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(one_station, x) for x in x_stations]
                gathered = [f.result() for f in futures]
        else:
            gathered = [one_station(x) for x in x_stations]
        for bucket, values in zip(per_station, gathered):
            bucket.update(values)

    if want_march:
        solver_cfg = SolverConfig(n=grid.n, tol=config.tol, stations=x_stations)
        marched = solve(config.ic, config.params, config.profile, solver_cfg)
        for bucket, field in zip(per_station, marched.fields):
            bucket["qnum"] = field

    written = []
    ordered = [f for f in _FIELD_ORDER if f in config.outputs]
    for i, bucket in enumerate(per_station):
        names = ["tau"] + ordered
        cols = [grid.tau] + [bucket[f] for f in ordered]
        written.append(_write_csv(config.out / station_filename(i), names, cols))

    names = ["station", "nu_x", "x"] + [f"max_abs_{f}" for f in ordered]
    cols = [np.arange(len(x_stations)), np.asarray(config.stations),
            np.asarray(x_stations)]
    cols += [np.array([np.max(np.abs(b[f])) for b in per_station])
             for f in ordered]
    written.append(_write_csv(config.out / "summary.csv", names, cols))
    return written


@dataclass(frozen=True)
class StationComparison:
    station: int
    nu_x: float
    max_rel: float
    l2_rel: float


@dataclass(frozen=True)
class ComparisonReport:
    field_a: str
    field_b: str
    stations: tuple

    @property
    def overall_max_rel(self):
        return max(s.max_rel for s in self.stations)


def compare(config: RunConfig, field_a, field_b) -> ComparisonReport:
    """Relative differences of two finished columns, station by station.

    The denominator is max |field_a| over the period, so field_a is the
    reference.  Also writes comparison_<a>_vs_<b>.csv next to the data.
    """
    rows = []
    for i, s in enumerate(config.stations):
        cols = read_field_table(config.out / station_filename(i))
        for name in (field_a, field_b):
            if name not in cols:
                raise ConfigError(
                    f"{station_filename(i)} has no column {name!r}")
        ref = cols[field_a]
        diff = np.abs(cols[field_b] - ref)
        denom = float(np.max(np.abs(ref)))
        if denom == 0.0:
            denom = 1.0
        rows.append(StationComparison(
            i, s, float(np.max(diff) / denom),
            float(math.sqrt(np.mean(diff ** 2)) / denom)))
    report = ComparisonReport(field_a, field_b, tuple(rows))
    _write_csv(config.out / f"comparison_{field_a}_vs_{field_b}.csv",
               ["station", "nu_x", "max_rel", "l2_rel"],
               [np.array([r.station for r in rows]),
                np.array([r.nu_x for r in rows]),
                np.array([r.max_rel for r in rows]),
                np.array([r.l2_rel for r in rows])])
    return report


def run_invariant(config: RunConfig):
    """Assemble the shape-preserving field at each zeta station."""
    spec = config.invariant
    if spec is None:
        raise ConfigError("config has no [invariant] section")
    betas = spec.config.betas
    if spec.route == "orbit":
        if betas[2] != 0.0 or betas[1] != -betas[3]:
            raise ConfigError(
                "the orbit route needs the constant-flare branch "
                "(beta2 = 0, beta1 = -M)")
        table = first_integral_solution(
            betas[3], spec.config.params.a, spec.config.c0,
            c1=spec.config.c1, nu=spec.config.params.nu)
    else:
        lam_lo, lam_hi = 0.0, 0.0
        for z in spec.zeta:
            lam, _ = similarity_vars(betas, z, spec.grid.tau)
            lam_lo = min(lam_lo, float(np.min(lam)))
            lam_hi = max(lam_hi, float(np.max(lam)))
        table = integrate_factor_ode(
            spec.config, max(lam_hi, 1e-6) * spec.lambda_pad,
            lambda_min=min(lam_lo, 0.0) * spec.lambda_pad)

    fields = [assemble_invariant_q(spec.config, z, spec.grid, table)
              for z in spec.zeta]
    written = []
    for i, field in enumerate(fields):
        written.append(_write_csv(config.out / station_filename(i),
                                  ["tau", "qinv"], [spec.grid.tau, field]))
    written.append(_write_csv(
        config.out / "summary.csv",
        ["station", "zeta", "max_abs_qinv"],
        [np.arange(len(spec.zeta)), np.asarray(spec.zeta),
         np.array([np.max(np.abs(f)) for f in fields])]))

    defect = None
    if len(spec.zeta) >= 3:
        defect = residual(fields, np.asarray(spec.zeta), spec.config.params,
                          _DuctFromBetas(betas), spec.grid)
    return written, defect


class _DuctFromBetas:
    """Just enough duct for the residual check: mu(zeta) = nu exp(d)."""

    def __init__(self, betas):
        self.betas = tuple(betas)

    def mu_of_zeta(self, nu, zeta):
        from .profiles import d_of_zeta
        return nu * np.exp(d_of_zeta(self.betas, zeta))


def run_profile(config: RunConfig):
    """Tabulate the duct: x, S, stretched coordinate, mu, and log-gain."""
    if config.profile_x_stop is None:
        raise ConfigError("missing [profile] x_stop for the tabulation range")
    if config.profile_x_count < 4:
        raise ConfigError("[profile] x_count must be at least 4")
    xs = np.linspace(0.0, config.profile_x_stop, config.profile_x_count)
    area = np.asarray(config.profile.area(xs), dtype=float)
    zeta = np.asarray(config.profile.zeta_of_x(xs), dtype=float)
    mu = config.params.nu * np.sqrt(area)
    d = 0.5 * np.log(area)
    return _write_csv(config.out / "profile.csv",
                      ["x", "area", "zeta", "mu", "d"],
                      [xs, area, zeta, mu, d])


# ---------------------------------------------------------------------------
# Figure presets

_FIG_PRESETS = {
    # exponential duct, unit-amplitude cosine signal, nu = 1 throughout:
    # the fields depend only on (a/nu, nu x, alpha/nu)
    "fig1": dict(a=1.0, stations=(0.0, 0.2, 0.5, 1.0, 2.0, 4.0),
                 outputs=("q1", "qnum")),
    "fig1b": dict(a=10.0, stations=(0.0, 0.08, 0.2, 0.5, 1.0, 2.0),
                  outputs=("q1", "qnum")),
    "fig2": dict(a=10.0, stations=(0.2, 0.5, 1.0, 2.0),
                 outputs=("q0", "q1", "qnum")),
}


def fig_config(name, *, out=None, jobs=1, tol=None) -> RunConfig:
    preset = _FIG_PRESETS[name]
    return RunConfig(
        params=PhysParams(preset["a"], 1.0),
        profile=ExponentialProfile(-0.1),
        ic=InitialCondition.harmonic(),
        stations=preset["stations"],
        outputs=preset["outputs"],
        grid_n=256,
        tol=tol if tol is not None else 1e-8,
        out=Path(out) if out is not None else Path(f"{name}_data"),
        jobs=jobs)


# ---------------------------------------------------------------------------
# Entry point

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hornwave",
        description="Weakly nonlinear waves in variable-section ducts: "
                    "closed-form fields, a marched reference, and exact "
                    "shape-preserving solutions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, needs_config, help_text):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, required=needs_config,
                         help="INI-style run description")
        cmd.add_argument("--jobs", type=int, default=1,
                         help="parallel station workers (default 1)")
        cmd.add_argument("--out", type=Path, default=None,
                         help="output directory override")
        cmd.add_argument("--tol", type=float, default=None,
                         help="marching tolerance override")
        return cmd

    add("profile", True, "tabulate S, zeta, mu, and the log-gain")
    add("run", True, "all configured outputs in one pass")
    add("analytic", True, "closed-form fields at the configured stations")
    add("solve", True, "marched reference field at the configured stations")
    add("invariant", True, "assemble shape-preserving fields")
    cmp_cmd = add("compare", True, "relative differences of two columns")
    cmp_cmd.add_argument("field_a", help="reference column")
    cmp_cmd.add_argument("field_b", help="column compared against it")
    add("fig1", False, "signal decay, a/nu = 1 (writes data and comparison)")
    add("fig1b", False, "signal decay, a/nu = 10")
    add("fig2", False, "closed-form orders vs the march, a/nu = 10")
    return parser


def _print_report(report: ComparisonReport):
    for row in report.stations:
        print(f"station {row.station} (nu x = {row.nu_x:g}): "
              f"{report.field_a} vs {report.field_b}  "
              f"max {row.max_rel:.3e}  l2 {row.l2_rel:.3e}")
    print(f"overall max-relative: {report.overall_max_rel:.3e}")


def _dispatch(args) -> int:
    if args.command in _FIG_PRESETS:
        config = fig_config(args.command, out=args.out, jobs=args.jobs,
                            tol=args.tol)
        written = run(config)
        print(f"wrote {len(written)} files to {config.out}")
        for ref in ("q0", "q1"):
            if ref in config.outputs:
                _print_report(compare(config, ref, "qnum"))
        return 0

    config = load_config(args.config, jobs=args.jobs, out=args.out,
                         tol=args.tol)
    if args.command == "profile":
        path = run_profile(config)
        print(f"wrote {path}")
        return 0
    if args.command == "run":
        written = run(config)
        print(f"wrote {len(written)} files to {config.out}")
        return 0
    if args.command == "analytic":
        keep = tuple(f for f in config.outputs if f in _FIELD_ORDER[:3])
        if not keep:
            raise ConfigError("no closed-form outputs requested; "
                              "add q0, q1, or qpt to [run] outputs")
        written = run(replace(config, outputs=keep))
        print(f"wrote {len(written)} files to {config.out}")
        return 0
    if args.command == "solve":
        written = run(replace(config, outputs=("qnum",)))
        print(f"wrote {len(written)} files to {config.out}")
        return 0
    if args.command == "invariant":
        written, defect = run_invariant(config)
        print(f"wrote {len(written)} files to {config.out}")
        if defect is not None:
            print(f"equation residual (central differences): {defect:.3e}")
        return 0
    if args.command == "compare":
        _print_report(compare(config, args.field_a, args.field_b))
        return 0
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except HornWaveError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
