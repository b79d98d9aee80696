"""Command-line harness: config parsing, runs, verification, reports.

Subcommands
-----------
constants  : closed-form decay constants for a strip width
simulate   : run a configured simulation, write manifest + series.csv
verify     : property suites (energy | steklov | gn | sup) on seeded corpora
fit-decay  : fit an exponential rate from a stored run, compare to chi
sweep      : grid of (width, amplitude) cells with per-cell verdicts
cdep       : two-run continuous-dependence experiment

Exit codes: 0 clean, 1 usage/IO error, 2 contamination flag, 3 blow-up.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    CONTAMINATION_THRESHOLD,
    TimeSeries,
    default_fit_window,
    energy_residual,
    fit_decay_rate,
    weighted_inner,
)
from .fields import InitialData, make_initial_field, make_random_field
from .geometry import StripGeometry
from .solver import BlowUpError, SolverConfig, run
from .theory import (
    check_smallness,
    constants_for_width,
    verify_gn,
    verify_steklov,
    verify_sup_lemma,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTAMINATED = 2
EXIT_BLOWUP = 3

CSV_HEADER = "t,l2,diss_cum,w_l2,w_h1,sup_w,tail"
DECAY_TOLERANCE = 0.05  # fitted rate may undershoot chi by at most 5%


def fmt(x: float) -> str:
    """Decimal scientific notation with 17 significant digits."""
    return f"{x:.16e}"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    fit_window: object = "last-half-clean"  # or [t0, t1]
    thresholds: str = "regular"

    def __post_init__(self):
        if self.thresholds not in ("regular", "weak"):
            raise ConfigError(
                f"type mismatch at experiment.thresholds: expected "
                f"'regular' or 'weak', got {self.thresholds!r}"
            )
        w = self.fit_window
        if w != "last-half-clean":
            if (not isinstance(w, (list, tuple)) or len(w) != 2
                    or not all(isinstance(v, (int, float)) for v in w)):
                raise ConfigError(
                    "type mismatch at experiment.fit_window: expected "
                    "'last-half-clean' or [t0, t1]"
                )


@dataclass(frozen=True)
class RunConfig:
    geometry: StripGeometry
    solver: SolverConfig
    initial: InitialData
    experiment: ExperimentConfig
    b_requested: object  # "auto" or the explicit number
    raw: dict

    @property
    def resolved_b(self) -> float:
        return self.geometry.b


_GEOMETRY_KEYS = {"B", "Lx", "Nx", "Ny", "b"}
_SOLVER_KEYS = {
    "dt", "t_end", "scheme", "dealias", "convection", "output_every",
    "nonlinear", "diss_per_step",
}
_INITIAL_KEYS = {"kind", "amplitude", "x0", "s", "j", "k", "values",
                 "target_l2_norm"}
_EXPERIMENT_KEYS = {"fit_window", "thresholds"}
_TOP_KEYS = {"schema", "geometry", "solver", "initial", "experiment"}


def _require(block: dict, path: str, key: str):
    if key not in block:
        raise ConfigError(f"missing required key: {path}{key}")
    return block[key]


def _check_keys(block: dict, allowed: set, path: str):
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key: {path}{key}")


def _number(block: dict, path: str, key: str, default=None, required=False):
    if key not in block:
        if required:
            raise ConfigError(f"missing required key: {path}{key}")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(
            f"type mismatch at {path}{key}: expected number, got {type(v).__name__}"
        )
    return v


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Unknown keys, missing required keys, and type mismatches are rejected
    with the offending path named.  A weight rate of "auto" resolves to
    the optimal rate for the configured width.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "")
    schema = _require(doc, "", "schema")
    if schema != 1:
        raise ConfigError(f"unsupported schema version: {schema!r}")

    geo = _require(doc, "", "geometry")
    if not isinstance(geo, dict):
        raise ConfigError("type mismatch at geometry: expected object")
    _check_keys(geo, _GEOMETRY_KEYS, "geometry.")
    B = _number(geo, "geometry.", "B", required=True)
    Lx = _number(geo, "geometry.", "Lx", required=True)
    Nx = _number(geo, "geometry.", "Nx", required=True)
    Ny = _number(geo, "geometry.", "Ny", required=True)
    for name, v in (("Nx", Nx), ("Ny", Ny)):
        if int(v) != v:
            raise ConfigError(f"type mismatch at geometry.{name}: expected integer")
    b_req = geo.get("b", "auto")
    if b_req == "auto":
        b = constants_for_width(B).b_star if B > 0 else 0.0
    elif isinstance(b_req, (int, float)) and not isinstance(b_req, bool):
        b = float(b_req)
    else:
        raise ConfigError(
            f"type mismatch at geometry.b: expected number or \"auto\", got {b_req!r}"
        )
    try:
        geometry = StripGeometry(B=B, Lx=Lx, Nx=int(Nx), Ny=int(Ny), b=b)
    except ValueError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from exc

    sol = _require(doc, "", "solver")
    if not isinstance(sol, dict):
        raise ConfigError("type mismatch at solver: expected object")
    _check_keys(sol, _SOLVER_KEYS, "solver.")
    scheme = sol.get("scheme", "exponential-RK4")
    if not isinstance(scheme, str):
        raise ConfigError("type mismatch at solver.scheme: expected string")
    for key in ("dealias", "nonlinear", "diss_per_step"):
        if key in sol and not isinstance(sol[key], bool):
            raise ConfigError(f"type mismatch at solver.{key}: expected boolean")
    try:
        solver = SolverConfig(
            dt=_number(sol, "solver.", "dt", required=True),
            t_end=_number(sol, "solver.", "t_end", required=True),
            scheme=scheme,
            dealias=sol.get("dealias", True),
            convection=int(_number(sol, "solver.", "convection", default=0)),
            output_every=int(_number(sol, "solver.", "output_every", default=1)),
            nonlinear=sol.get("nonlinear", True),
            diss_per_step=sol.get("diss_per_step", False),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid solver block: {exc}") from exc

    ini = _require(doc, "", "initial")
    if not isinstance(ini, dict):
        raise ConfigError("type mismatch at initial: expected object")
    _check_keys(ini, _INITIAL_KEYS, "initial.")
    kind = _require(ini, "initial.", "kind")
    if not isinstance(kind, str):
        raise ConfigError("type mismatch at initial.kind: expected string")
    values = ini.get("values")
    if values is not None:
        values = np.asarray(values, dtype=float)
    try:
        initial = InitialData(
            kind=kind,
            amplitude=_number(ini, "initial.", "amplitude", default=1.0),
            x0=_number(ini, "initial.", "x0", default=0.0),
            s=_number(ini, "initial.", "s", default=1.0),
            j=int(_number(ini, "initial.", "j", default=1)),
            k=_number(ini, "initial.", "k", default=1.0),
            values=values,
            target_l2_norm=_number(ini, "initial.", "target_l2_norm", default=None),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid initial block: {exc}") from exc

    exp = doc.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("type mismatch at experiment: expected object")
    _check_keys(exp, _EXPERIMENT_KEYS, "experiment.")
    experiment = ExperimentConfig(
        fit_window=exp.get("fit_window", "last-half-clean"),
        thresholds=exp.get("thresholds", "regular"),
    )

    return RunConfig(
        geometry=geometry, solver=solver, initial=initial,
        experiment=experiment, b_requested=b_req, raw=doc,
    )


def paper_ref_config() -> RunConfig:
    """Built-in reference decay configuration (preset name "paper-ref").

    Width pi, half-length 30, 1024 x 32 modes, optimal weight rate, a
    first-mode gaussian scaled to 90% of the weak-solution threshold,
    dt = 1e-3 to t = 40.  The initial norm satisfies both smallness
    thresholds, so both decay guarantees apply.
    """
    consts = constants_for_width(math.pi)
    doc = {
        "schema": 1,
        "geometry": {"B": math.pi, "Lx": 30.0, "Nx": 1024, "Ny": 32, "b": "auto"},
        "solver": {"dt": 1e-3, "t_end": 40.0, "output_every": 100,
                   "diss_per_step": True},
        "initial": {"kind": "gaussian_mode", "amplitude": 1.0, "x0": 0.0,
                    "s": 2.0, "j": 1,
                    "target_l2_norm": 0.9 * consts.weak_threshold},
        "experiment": {"thresholds": "weak"},
    }
    return parse_config(json.dumps(doc))


def load_config(spec: str) -> RunConfig:
    """Load a config from a file path, or a built-in preset by name."""
    if spec == "paper-ref":
        return paper_ref_config()
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"config not found: {spec} (not a file or known preset)")
    return parse_config(path.read_text(encoding="utf-8"))


_PAPER_REF_CACHE: dict = {}


def paper_ref_run() -> tuple[RunConfig, TimeSeries]:
    """The reference run, with snapshots, computed once per process.

    Shared by the energy suite, the continuous-dependence command, and
    the acceptance tests; the run takes a few minutes.
    """
    if "run" not in _PAPER_REF_CACHE:
        config = paper_ref_config()
        init_field = make_initial_field(config.initial, config.geometry)
        series = run(init_field.field, config.solver, store_snapshots=True)
        _PAPER_REF_CACHE["run"] = (config, series)
    return _PAPER_REF_CACHE["run"]


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_series_csv(series: TimeSeries, path: Path):
    lines = [CSV_HEADER]
    for s in series.samples:
        lines.append(",".join(fmt(v) for v in (
            s.t, s.l2, s.diss_cum, s.w_l2, s.w_h1, s.sup_w, s.tail)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_series_csv(path: Path, geometry: StripGeometry) -> TimeSeries:
    from .diagnostics import NormSample

    lines = path.read_text(encoding="utf-8").strip().splitlines()
    if lines[0] != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header in {path}")
    samples = []
    for line in lines[1:]:
        vals = [float(v) for v in line.split(",")]
        samples.append(NormSample(*vals))
    series = TimeSeries(geometry=geometry, samples=samples)
    series.flag_contamination()
    return series


def write_manifest(out: Path, config: RunConfig, *, status: str, seed=None,
                   started: str, extra: dict | None = None):
    files = {}
    for f in sorted(out.iterdir()):
        if f.is_file() and f.name != "manifest.json":
            files[f.name] = {"sha256": _sha256(f), "bytes": f.stat().st_size}
    manifest = {
        "schema": 1,
        "code_version": __version__,
        "config": config.raw,
        "resolved_b": config.resolved_b,
        "seed": seed,
        "started_at": started,
        "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "status": status,
        "files": files,
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_manifest(out: Path, verify_checksums: bool = True) -> dict:
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    if verify_checksums:
        for name, meta in manifest.get("files", {}).items():
            actual = _sha256(out / name)
            if actual != meta["sha256"]:
                raise ConfigError(f"checksum mismatch for {name} in {out}")
    return manifest


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_constants(args) -> int:
    try:
        consts = constants_for_width(args.B)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "B": consts.B,
        "b_star": consts.b_star,
        "chi": consts.chi,
        "gamma": consts.gamma,
        "reg_threshold": consts.reg_threshold,
        "weak_threshold": consts.weak_threshold,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _execute_run(config: RunConfig, out: Path, *, store_snapshots=False):
    """Build the initial field, run, and persist everything under out."""
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    init_field = make_initial_field(config.initial, config.geometry)
    extra = {
        "initial_l2_norm": init_field.l2_norm,
        "initial_tail_mass": init_field.tail_mass,
    }
    try:
        series = run(init_field.field, config.solver,
                     store_snapshots=store_snapshots)
    except BlowUpError as exc:
        write_series_csv(exc.series, out / "series.csv")
        extra["blow_up_time"] = exc.t
        write_manifest(out, config, status="blow-up", started=started, extra=extra)
        raise
    write_series_csv(series, out / "series.csv")
    if series.contaminated_at is not None:
        extra["contaminated_at"] = series.contaminated_at
    write_manifest(out, config, status=series.status, started=started, extra=extra)
    return series, init_field


def cmd_simulate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    try:
        series, init_field = _execute_run(config, out)
    except BlowUpError as exc:
        print(f"blow-up at t = {exc.t:.6g}; partial results in {out}")
        return EXIT_BLOWUP
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    last = series.samples[-1]
    print(f"run complete: status={series.status}, t_end={last.t:g}, "
          f"||u0||={init_field.l2_norm:.6g}, final l2={last.l2:.6e}")
    if series.status == "contaminated":
        print(f"tail mass exceeded {CONTAMINATION_THRESHOLD:g} at "
              f"t = {series.contaminated_at:g}; weighted-decay verdicts apply "
              f"to the clean prefix only")
        return EXIT_CONTAMINATED
    return EXIT_OK


def _fit_from_dir(run_dir: Path, norm: str, t0, t1):
    manifest = read_manifest(run_dir)
    if manifest["status"] == "blow-up":
        raise ConfigError("run blew up; no decay fit possible")
    config = parse_config(json.dumps(manifest["config"]))
    series = read_series_csv(run_dir / "series.csv", config.geometry)
    if t0 is None or t1 is None:
        w = config.experiment.fit_window
        if w == "last-half-clean":
            d0, d1 = default_fit_window(series)
        else:
            d0, d1 = float(w[0]), float(w[1])
        t0 = d0 if t0 is None else t0
        t1 = d1 if t1 is None else t1
    if series.contaminated_at is not None and t1 > series.clean_end():
        raise ConfigError(
            f"fit window [{t0}, {t1}] reaches into the contaminated segment "
            f"(clean until t = {series.clean_end():g})"
        )
    fit = fit_decay_rate(series, norm, t0, t1)
    chi = constants_for_width(config.geometry.B).chi
    return fit, chi, config


def cmd_fit_decay(args) -> int:
    try:
        fit, chi, _ = _fit_from_dir(Path(args.out), args.norm, args.t0, args.t1)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    compliant = fit.rate >= chi * (1.0 - DECAY_TOLERANCE)
    print(json.dumps({
        "norm": fit.norm,
        "window": [fit.t0, fit.t1],
        "fitted_rate": fit.rate,
        "residual": fit.residual,
        "chi": chi,
        "compliant": bool(compliant),
    }, indent=2))
    return EXIT_OK if compliant else EXIT_USAGE


# -- verification suites ------------------------------------------------

def _verification_geometry() -> StripGeometry:
    consts = constants_for_width(math.pi)
    return StripGeometry(B=math.pi, Lx=10.0, Nx=256, Ny=32, b=consts.b_star)


def verify_suite(suite: str, samples: int, seed: int) -> dict:
    """Run one property suite; returns a report dict with worst margins."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    geom = _verification_geometry()
    b = geom.b
    report = {"suite": suite, "samples": samples, "seed": seed}

    def margin(check):
        return (check.rhs - check.lhs) / check.rhs if check.rhs > 0 else math.inf

    if suite == "steklov":
        results = []
        for i in range(samples):
            u = make_random_field(geom, seed + i)
            results.append(verify_steklov(u, b))
        report["all_hold"] = all(r.holds for r in results)
        report["worst_margin"] = min(margin(r) for r in results)
    elif suite == "gn":
        results = []
        for i in range(samples):
            u = make_random_field(geom, seed + i)
            results.append(verify_gn(u))
        report["all_hold"] = all(r.holds for r in results)
        report["worst_margin"] = min(margin(r) for r in results)
    elif suite == "sup":
        results = []
        for i in range(samples):
            u = make_random_field(geom, seed + i)
            for delta in (0.1, 1.0, 10.0):
                results.append(verify_sup_lemma(u, b, delta, 1.0))
        report["all_hold"] = all(r.holds for r in results)
        report["worst_margin"] = min(margin(r) for r in results)
    elif suite == "energy":
        residuals = [_energy_sample(i, seed) for i in range(samples)]
        report["residuals"] = residuals
        report["worst_residual"] = max(residuals)
        report["all_hold"] = all(r < 1e-6 for r in residuals)
    else:
        raise ValueError(f"unknown suite: {suite!r}")
    return report


def _energy_sample(index: int, seed: int) -> float:
    """Energy-identity residual; sample 0 is the full reference run.

    Further samples integrate seeded smooth localized data (random
    gaussian bumps); rough band-edge data would be dominated by the
    trapezoid error of the dissipation integral rather than the scheme.
    """
    if index == 0:
        _, series = paper_ref_run()
        return energy_residual(series)
    geom = _verification_geometry()
    rng = np.random.default_rng(seed + index)
    init = InitialData(
        kind="gaussian_mode",
        amplitude=float(rng.uniform(0.05, 0.3)),
        x0=float(rng.uniform(-2.0, 2.0)),
        s=float(rng.uniform(1.0, 2.0)),
        j=int(rng.integers(1, 4)),
    )
    u0 = make_initial_field(init, geom).field
    cfg = SolverConfig(dt=1e-3, t_end=1.0, output_every=100, diss_per_step=True)
    return energy_residual(run(u0, cfg))


def cmd_verify(args) -> int:
    try:
        report = verify_suite(args.suite, args.samples, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["all_hold"] else EXIT_USAGE


# -- sweep ----------------------------------------------------------------

def _sweep_cell(template_json: str, B: float, amp_frac: float, out_dir: str):
    """One sweep cell; returns a summary row dict (runs in a worker)."""
    template = parse_config(template_json)
    consts = constants_for_width(B)
    regime = template.experiment.thresholds
    u0_norm = amp_frac * (consts.weak_threshold if regime == "weak"
                          else consts.reg_threshold)
    verdict = check_smallness(u0_norm, B, regime)
    doc = json.loads(template_json)
    doc["geometry"]["B"] = B
    doc.setdefault("initial", {})["target_l2_norm"] = u0_norm
    config = parse_config(json.dumps(doc))

    row = {
        "B": B,
        "amp_frac": amp_frac,
        "u0_norm": u0_norm,
        "threshold": verdict.threshold,
        "within_threshold": verdict.ok,
        "chi": consts.chi,
        "status": "",
        "fitted_rate": math.nan,
        "compliant": "",
    }
    cell_dir = Path(out_dir)
    try:
        series, _ = _execute_run(config, cell_dir)
        row["status"] = series.status
        t0, t1 = default_fit_window(series)
        fit = fit_decay_rate(series, "w_l2", t0, t1)
        row["fitted_rate"] = fit.rate
        passed = fit.rate >= consts.chi * (1.0 - DECAY_TOLERANCE)
        if row["within_threshold"]:
            row["compliant"] = "pass" if passed else "fail"
        else:
            row["compliant"] = "outside theorem scope"
    except BlowUpError:
        row["status"] = "blow-up"
        row["compliant"] = "fail" if row["within_threshold"] else "outside theorem scope"
    except (ValueError, ConfigError) as exc:
        row["status"] = f"error: {exc}"
        row["compliant"] = "fail" if row["within_threshold"] else "outside theorem scope"
    return row


def cmd_sweep(args) -> int:
    try:
        template = load_config(args.config)
        widths = [float(v) for v in args.B.split(",")]
        amps = [float(v) for v in args.amps.split(",")]
        if not widths or not amps:
            raise ConfigError("width and amplitude lists must be nonempty")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    template_json = json.dumps(template.raw)

    cells = [
        (B, amp, str(out / f"cell_B{idx_b}_a{idx_a}"))
        for idx_b, B in enumerate(widths)
        for idx_a, amp in enumerate(amps)
    ]
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(
                _sweep_cell,
                [template_json] * len(cells),
                [c[0] for c in cells],
                [c[1] for c in cells],
                [c[2] for c in cells],
            ))
    else:
        rows = [_sweep_cell(template_json, B, amp, d) for B, amp, d in cells]

    header = ("B,amp_frac,u0_norm,threshold,within_threshold,chi,"
              "status,fitted_rate,compliant")
    lines = [header]
    for r in rows:
        lines.append(",".join([
            fmt(r["B"]), fmt(r["amp_frac"]), fmt(r["u0_norm"]),
            fmt(r["threshold"]), str(r["within_threshold"]).lower(),
            fmt(r["chi"]), r["status"],
            fmt(r["fitted_rate"]) if math.isfinite(r["fitted_rate"]) else "nan",
            r["compliant"],
        ]))
    (out / "summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    failed = any(r["compliant"] == "fail" for r in rows)
    return EXIT_USAGE if failed else EXIT_OK


# -- continuous dependence -------------------------------------------------

def cdep_experiment(config: RunConfig, eps: float,
                    base: TimeSeries | None = None) -> dict:
    """Growth factors of a perturbed run at eps and eps/2.

    The perturbation is a unit-norm first-mode gaussian bump; factors are
    max over the base run's clean samples of the weighted difference norm
    over its initial value.  A precomputed base run (with snapshots) may
    be supplied to avoid recomputation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    geom = config.geometry
    base_init = make_initial_field(config.initial, geom)
    bump_init = make_initial_field(
        InitialData(kind="gaussian_mode", amplitude=1.0, s=1.0,
                    x0=config.initial.x0, j=1, target_l2_norm=1.0),
        geom,
    )

    if base is None:
        base = run(base_init.field, config.solver, store_snapshots=True)
    if base.snapshots is None:
        raise ValueError("base run must carry stored snapshots")
    clean_end = base.clean_end()

    def growth_factor(e: float) -> tuple[float, float]:
        """(max over clean samples, value at the clean end) of the
        weighted difference norm over its initial value."""
        pert0 = base_init.field + e * bump_init.field
        pert = run(pert0, config.solver, store_snapshots=True)
        z0 = pert.snapshots[0] - base.snapshots[0]
        denom = weighted_inner(geom.b, z0, z0)
        worst, final = 0.0, 0.0
        for fb, fp, sample in zip(base.snapshots, pert.snapshots, base.samples):
            if sample.t > clean_end:
                break
            z = fp - fb
            final = weighted_inner(geom.b, z, z) / denom
            worst = max(worst, final)
        return worst, final

    factor_full, final_full = growth_factor(eps)
    factor_half, final_half = growth_factor(eps / 2.0)
    ratio = factor_full / factor_half if factor_half > 0 else math.inf
    final_ratio = final_full / final_half if final_half > 0 else math.inf
    return {
        "eps": eps,
        "growth_factor_eps": factor_full,
        "growth_factor_half_eps": factor_half,
        "ratio": ratio,
        "final_factor_eps": final_full,
        "final_factor_half_eps": final_half,
        "final_ratio": final_ratio,
        "stable": bool(abs(ratio - 1.0) <= 0.10),
        "clean_until": clean_end,
    }


def cmd_cdep(args) -> int:
    try:
        if args.eps == 0:
            print(json.dumps({"eps": 0.0, "note": "identical runs"}, indent=2))
            return EXIT_OK
        if args.config == "paper-ref":
            config, base = paper_ref_run()
        else:
            config, base = load_config(args.config), None
        report = cdep_experiment(config, args.eps, base=base)
    except BlowUpError as exc:
        print(f"blow-up at t = {exc.t:.6g} during continuous-dependence runs",
              file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(report, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "cdep.json").write_text(json.dumps(report, indent=2) + "\n",
                                       encoding="utf-8")
    return EXIT_OK if report["stable"] else EXIT_USAGE


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zkbstrip",
        description="Channel-strip wave simulator and decay-verification harness",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="closed-form decay constants")
    pc.add_argument("--B", type=float, required=True, help="strip width")
    pc.set_defaults(func=cmd_constants)

    ps = sub.add_parser("simulate", help="run a simulation")
    ps.add_argument("--config", required=True,
                    help="config JSON path or preset name (paper-ref)")
    ps.add_argument("--out", required=True, help="output directory")
    ps.set_defaults(func=cmd_simulate)

    pv = sub.add_parser("verify", help="property-test suites")
    pv.add_argument("--suite", required=True,
                    choices=["energy", "steklov", "gn", "sup"])
    pv.add_argument("--samples", type=int, default=100)
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("fit-decay", help="fit decay rate from a stored run")
    pf.add_argument("--out", required=True, help="run directory")
    pf.add_argument("--norm", default="w_l2",
                    choices=["l2", "w_l2", "w_h1", "sup_w"])
    pf.add_argument("--t0", type=float, default=None)
    pf.add_argument("--t1", type=float, default=None)
    pf.set_defaults(func=cmd_fit_decay)

    pw = sub.add_parser("sweep", help="width x amplitude sweep")
    pw.add_argument("--config", required=True, help="template config or preset")
    pw.add_argument("--B", required=True, help="comma-separated widths")
    pw.add_argument("--amps", required=True,
                    help="comma-separated amplitude fractions of the threshold")
    pw.add_argument("--out", required=True)
    pw.add_argument("--workers", type=int, default=1)
    pw.set_defaults(func=cmd_sweep)

    pd = sub.add_parser("cdep", help="continuous-dependence experiment")
    pd.add_argument("--config", required=True)
    pd.add_argument("--eps", type=float, required=True)
    pd.add_argument("--out", default=None)
    pd.set_defaults(func=cmd_cdep)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
