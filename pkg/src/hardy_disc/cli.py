"""Batch runner: ``hardy-disc <config-path> [--out DIR] [--grid N] [--quiet]``.

The config is plain ``key = value`` text with ``#`` comments. Each scenario
writes ``<scenario>.csv`` and ``<scenario>.json`` to the output directory and
the process exits with 0 only when every check passes.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config,
3 a numerical construction failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .demailly import LevelSetError, demailly_pairing, dlj_rhs, level_set
from .disc import AngleGrid, CircleFunction, DiskField, PolarGrid
from .duality import BoundaryFunctional, duality_certificate
from .exhaustion import (
    ConstructionError,
    construct_biharmonic,
    construct_exhaustion_c2,
    green_exhaustion,
    mass_budget,
    required_radii,
    weight_balayage,
    weight_normal_derivative,
    weight_radial,
)
from .hardy import (
    AnalyticFunction,
    blaschke,
    classical_norm,
    compose_factorization,
    context_from_phi,
    context_from_weight,
    outer_from_modulus,
    recover_outer_part,
    singular_inner,
    weighted_norm,
)

SCENARIOS = ("weight", "exhaust", "verify-dlj", "factorize", "extremal", "convergence")
PRESETS = ("green-disk", "biharmonic-const", "exp-weight", "trig-weight", "phi-halfplus")
SEED_ENV = "HARDY_DISC_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "weight"
    preset: str = "exp-weight"
    n_angles: int = 256
    n_radii: int = 128
    p: float = 2.0
    N: int = 32
    iterations: int = 5000
    coefficients: tuple = ()
    functional: tuple = ((-1, 1.0),)
    levels: tuple = (-1.5, -1.0, -0.5, -0.1)
    trials: int = 50
    refinements: int = 3
    output: str = "."
    seed: int = 0


def _power_of_two(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _freq_pairs(text: str) -> tuple:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        k, v = item.split(":")
        out.append((int(k), complex(v.strip().replace(" ", ""))))
    return tuple(out)


_PARSERS = {
    "scenario": str,
    "preset": str,
    "n_angles": int,
    "n_radii": int,
    "p": float,
    "N": int,
    "iterations": int,
    "coefficients": _floats,
    "functional": _freq_pairs,
    "levels": _floats,
    "trials": int,
    "refinements": int,
    "output": str,
    "seed": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; unknown keys and bad values raise ``ConfigError``."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from None
        lines[key] = lineno
    cfg = ExperimentConfig(**values)
    validate(cfg, lines)
    return cfg


def validate(cfg: ExperimentConfig, lines: dict | None = None) -> None:
    lines = lines or {}

    def fail(key, msg):
        where = f"line {lines[key]}: " if key in lines else ""
        raise ConfigError(f"{where}{key}: {msg}")

    if cfg.scenario not in SCENARIOS:
        fail("scenario", f"must be one of {', '.join(SCENARIOS)}")
    if cfg.preset not in PRESETS:
        fail("preset", f"must be one of {', '.join(PRESETS)}")
    for key in ("n_angles", "n_radii"):
        v = getattr(cfg, key)
        if not _power_of_two(v) or not 8 <= v <= 4096:
            fail(key, f"{v} is not a power of two in [8, 4096]")
    if not 1 <= cfg.p <= 16:
        fail("p", f"{cfg.p} outside [1, 16]")
    if cfg.N < 1 or 2 * (cfg.N + 1) > cfg.n_angles:
        fail("N", f"degree {cfg.N} needs 1 <= N and 2(N+1) <= n_angles")
    if cfg.iterations < 1:
        fail("iterations", "must be positive")
    if cfg.trials < 1 or cfg.refinements < 2:
        fail("trials" if cfg.trials < 1 else "refinements", "too small")
    if any(c >= 0 for c in cfg.levels):
        fail("levels", "levels must be negative")
    if cfg.coefficients and len(cfg.coefficients) % 2 == 0:
        fail("coefficients", "expected a0, a1, b1, a2, b2, ...")


# checks and output -------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    reference: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(abs(self.value - self.reference) <= self.tolerance)

    def record(self) -> dict:
        return {"name": self.name, "value": self.value, "reference": self.reference,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class ResultRecord:
    scenario: str
    config: dict
    checks: list = field(default_factory=list)
    runtime: float = 0.0
    version: str = __version__
    header: tuple = ("theta", "value", "reference", "abs_error")
    rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "config": self.config,
                "checks": [c.record() for c in self.checks], "pass": self.passed,
                "runtime": self.runtime, "version": self.version, "extra": self.extra}


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_outputs(rec: ResultRecord, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{rec.scenario}.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rec.header)
        for row in rec.rows:
            w.writerow([_fmt(x) for x in row])
    json_path = out_dir / f"{rec.scenario}.json"
    json_path.write_text(json.dumps(rec.to_json(), indent=2, default=_json_default) + "\n")
    return csv_path, json_path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


# presets -----------------------------------------------------------------------

def preset_weight(cfg: ExperimentConfig, grid: AngleGrid) -> CircleFunction:
    t = grid.theta
    if cfg.preset == "exp-weight":
        return CircleFunction(grid, np.exp(2 - 2 * np.cos(t)))
    if cfg.preset == "trig-weight":
        c = cfg.coefficients or (2.0, 1.0, 0.0)
        vals = np.full(t.shape, c[0])
        for k in range(1, (len(c) - 1) // 2 + 1):
            vals = vals + c[2 * k - 1] * np.cos(k * t) + c[2 * k] * np.sin(k * t)
        return CircleFunction(grid, vals)
    if cfg.preset in ("green-disk", "biharmonic-const"):
        return CircleFunction.constant(grid, 1.0)
    raise ConfigError(f"preset {cfg.preset} has no bounded weight")


def _halfplus(grid: AngleGrid) -> AnalyticFunction:
    return AnalyticFunction.from_taylor([0.5, 0.5], grid)


def preset_exhaustion(cfg: ExperimentConfig):
    """Exhaustion and the reference weight for the preset."""
    grid = PolarGrid(cfg.n_radii, cfg.n_angles)
    ag = grid.angle_grid
    if cfg.preset == "green-disk":
        return green_exhaustion(grid), CircleFunction.constant(ag, 1.0), 1e-10
    if cfg.preset == "biharmonic-const":
        e = construct_biharmonic(CircleFunction.constant(ag, 0.0), M=1.0, grid=grid)
        return e, CircleFunction.constant(ag, 1.0), 1e-6
    if cfg.preset == "phi-halfplus":
        ctx, e = context_from_phi(_halfplus(ag), cfg.p)
        return e, e.info["weight"], 5e-2
    psi = preset_weight(cfg, ag)
    # n_radii is a lower bound: the boundary layer must be resolved
    nr = max(cfg.n_radii, required_radii(psi))
    e = construct_exhaustion_c2(psi, PolarGrid(nr, cfg.n_angles))
    return e, psi, 1e-3


# scenarios -------------------------------------------------------------------------

def _weight(cfg, rec):
    e, ref, tol = preset_exhaustion(cfg)
    V = weight_balayage(e)
    err = np.abs(V.values - ref.values)
    rec.rows = [(t, v, r, a) for t, v, r, a in zip(V.theta, V.values, ref.values, err)]
    rec.checks.append(Check("sup |V_u - reference|", float(np.max(err)), 0.0, tol))
    if cfg.preset == "phi-halfplus":
        rec.checks.append(Check("total Riesz mass diverges", float(np.isinf(e.total_mass)), 1.0, 0.0))
    rec.extra["grid"] = [e.grid.n_radii, e.grid.n_angles]


def _exhaust(cfg, rec):
    e, ref, tol = preset_exhaustion(cfg)
    V = weight_balayage(e)
    if e.tag == "biharmonic":
        W, route = weight_radial(e), "radial"
    elif e.tag == "green":
        W, route = V, "balayage"
    else:
        W, route = weight_normal_derivative(e), "normal derivative"
    err = np.abs(V.values - W.values)
    rec.rows = [(t, v, w, a) for t, v, w, a in zip(V.theta, V.values, W.values, err)]
    mass, integral = mass_budget(e)
    rec.extra.update(route=route, total_mass=mass, grid=[e.grid.n_radii, e.grid.n_angles])
    if np.isfinite(mass):
        rec.checks.append(Check("mass budget", mass, integral, 1e-6 * max(1.0, abs(integral))))
    rec.checks.append(Check("sup |V_u - reference|", float(np.max(np.abs(V.values - ref.values))), 0.0, tol))


def _verify_dlj(cfg, rec):
    e, _, _ = preset_exhaustion(cfg)
    grid = e.grid
    v = DiskField.from_function(grid, lambda r, t: r ** 2 + 0 * t, center=0.0)
    lap_v = DiskField.constant(grid, 4.0)
    rec.header = ("c", "value", "reference", "abs_error")
    tol = 1e-6 if cfg.preset == "green-disk" else 1e-4
    for c in cfg.levels:
        ls = level_set(e, c)
        lhs = demailly_pairing(e, c, v, ls)
        rhs = dlj_rhs(e, c, v, lap_v, ls)
        rec.rows.append((c, lhs, rhs, abs(lhs - rhs)))
        rec.checks.append(Check(f"DLJ c={c}", lhs, rhs, tol))
        if cfg.preset == "green-disk":
            rec.checks.append(Check(f"closed form c={c}", lhs, float(np.exp(2 * c)), tol))


def _context(cfg, grid: AngleGrid):
    if cfg.preset == "phi-halfplus":
        ctx, _ = context_from_phi(_halfplus(grid), cfg.p, build_exhaustion=False)
        return ctx
    return context_from_weight(preset_weight(cfg, grid), cfg.p)


def _random_triple(rng, grid: AngleGrid):
    k = rng.integers(0, 3)
    zeros = [0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()) for _ in range(k)]
    atoms = [(2 * np.pi * rng.uniform(), rng.uniform(0.1, 1.5)) for _ in range(rng.integers(0, 3))]
    trig = 0.3 * rng.normal(size=5)
    t = grid.theta
    logw = trig[0] + trig[1] * np.cos(t) + trig[2] * np.sin(t) + trig[3] * np.cos(2 * t) + trig[4] * np.sin(2 * t)
    F = outer_from_modulus(CircleFunction(grid, np.exp(logw)))
    return blaschke(zeros, grid), singular_inner(atoms, grid), F


def _factorize(cfg, rec):
    rng = np.random.default_rng(cfg.seed)
    grid = AngleGrid(cfg.n_angles)
    ctx = _context(cfg, grid)
    rec.header = ("trial", "value", "reference", "abs_error")
    worst = 0.0
    worst_rt = 0.0
    for i in range(cfg.trials):
        B, S, F = _random_triple(rng, grid)
        f = compose_factorization(B, S, ctx, F)
        lhs, rhs = weighted_norm(f, ctx), classical_norm(F, ctx.p)
        rec.rows.append((i, lhs, rhs, abs(lhs - rhs)))
        worst = max(worst, abs(lhs - rhs))
        R = recover_outer_part(f, B, S, ctx, check=False)
        ok = ~R.excluded
        worst_rt = max(worst_rt, float(np.max(np.abs(R.boundary.values[ok] - F.boundary.values[ok]))))
    rec.checks.append(Check("max | ||f||_{p,u} - ||F||_p |", worst, 0.0, 1e-7))
    rec.checks.append(Check("round-trip recovery of F", worst_rt, 0.0, 1e-7))


def _functional(cfg, grid):
    coeffs = {k: v for k, v in cfg.functional}
    return CircleFunction.from_coefficients(grid, coeffs)


def _extremal(cfg, rec):
    grid = AngleGrid(cfg.n_angles)
    ctx = _context(cfg, grid)
    bf = BoundaryFunctional.from_classical(_functional(cfg, grid), ctx)
    rec.header = ("N", "value", "reference", "abs_error")
    tol = 1e-8 if cfg.p == 2 else 1e-2
    degrees = sorted({max(1, cfg.N // 4), max(1, cfg.N // 2), cfg.N})
    for N in degrees:
        sol = duality_certificate(bf, N, cfg.iterations, cfg.seed)
        rec.rows.append((N, sol.lambda_value, sol.gamma_value, sol.gap))
        rec.checks.append(Check(f"weak duality N={N}",
                                max(0.0, sol.lambda_value - sol.gamma_value), 0.0, 1e-6))
    rec.checks.append(Check(f"duality gap N={cfg.N}", sol.gap, 0.0, tol))
    rec.extra["certified"] = sol.certified


def _convergence(cfg, rec):
    rec.header = ("n_radii", "value", "reference", "abs_error")
    errors = []
    psi = None
    if cfg.preset in ("exp-weight", "trig-weight"):
        psi = preset_weight(cfg, AngleGrid(cfg.n_angles))
        base = required_radii(psi) // 2
    for k in range(cfg.refinements):
        if psi is not None:
            e = construct_exhaustion_c2(psi, PolarGrid(base * 2 ** k, cfg.n_angles))
            ref = psi
        else:
            e, ref, _ = preset_exhaustion(replace(cfg, n_radii=min(4096, cfg.n_radii * 2 ** k)))
        err = float(np.max(np.abs(weight_balayage(e).values - ref.values)))
        errors.append(err)
        rec.rows.append((e.grid.n_radii, err, 0.0, err))
    orders = [float(np.log2(a / b)) if b > 0 and a > 0 else float("inf")
              for a, b in zip(errors, errors[1:])]
    rec.extra["observed_orders"] = orders
    rec.checks.append(Check("finest-level error", errors[-1], 0.0, 1e-3))


_RUNNERS = {"weight": _weight, "exhaust": _exhaust, "verify-dlj": _verify_dlj,
            "factorize": _factorize, "extremal": _extremal, "convergence": _convergence}


def run(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> ResultRecord:
    """Execute the scenario, write CSV and JSON, return the record."""
    validate(cfg)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        cfg = replace(cfg, seed=int(env_seed))
    rec = ResultRecord(cfg.scenario, asdict(cfg))
    t0 = time.perf_counter()
    _RUNNERS[cfg.scenario](cfg, rec)
    rec.runtime = time.perf_counter() - t0
    write_outputs(rec, Path(out_dir if out_dir is not None else cfg.output))
    return rec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hardy-disc", description=__doc__.splitlines()[0])
    ap.add_argument("config", help="path to a key = value config file")
    ap.add_argument("--out", help="output directory (overrides 'output')")
    ap.add_argument("--grid", type=int, help="override n_angles")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
        if args.grid is not None:
            cfg = replace(cfg, n_angles=args.grid)
            validate(cfg)
    except (ConfigError, OSError) as exc:
        print(f"hardy-disc: config error: {exc}", file=sys.stderr)
        return 2
    try:
        rec = run(cfg, args.out)
    except (ConstructionError, LevelSetError, ValueError, ArithmeticError) as exc:
        print(f"hardy-disc: numerical failure in {cfg.scenario}: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        for c in rec.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name}: value={c.value:.6g} reference={c.reference:.6g} tol={c.tolerance:g}")
    failed = [c.name for c in rec.checks if not c.passed]
    if failed:
        print(f"hardy-disc: failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
