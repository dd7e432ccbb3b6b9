"""Command line front end: ``viscowave symbols|solve-linear|solve|validate``.

Runs are described by a TOML file carrying ``schema_version = 1``.  Every
output file is a function of the config alone; wall-clock timings go to a
separate ``timing.json`` so the other files are reproducible byte for byte.

Exit codes: 0 success, 2 validation failure, 3 divergence, 4 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fieldio
from .linear_solver import CompatibilityError, LinearSolver, ParameterError
from .manufactured import random_data
from .nonlinear_solver import (
    ForcingSpec,
    IterationConfig,
    gaussian_bump_stress,
    slice_force,
    solve_traveling_wave,
    traveling_pressure_patch,
)
from .oracles import forward_operator
from .parallel import set_threads
from .spectral_grid import HorizontalGrid, SurfaceSpectrum, VerticalGrid, xs_norm
from .state import DataQuadruple, volume_hs_sq, ys_norm
from .symbols import WaveParams, eval_m, eval_rho, m_asymptotic_infty, m_asymptotic_zero

log = logging.getLogger("viscowave")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGED, EXIT_CONFIG = 0, 2, 3, 4

_SECTIONS = {
    "params": {"gamma", "sigma", "b", "horiz_dim"},
    "grid": {"L", "npts", "nodes"},
    "forcing": {"preset", "amplitude", "width", "bulk_file", "stress_file"},
    "iteration": {"max_iters", "tol", "damping", "eta_cap"},
    "symbols": {"xi_min", "xi_max", "count", "direction"},
    "data": {"source", "kmax", "f", "g", "h", "k"},
    "validate": {"checks"},
    "output": {"dir"},
}
_TOP_KEYS = {"schema_version", "seed"} | set(_SECTIONS)
FORCING_PRESETS = ("none", "gaussian-bump", "pressure-patch", "slice-force", "files")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: WaveParams
    grid: HorizontalGrid
    nodes: int
    forcing: dict
    iteration: IterationConfig
    symbols: dict
    data: dict
    checks: list
    seed: int
    output_dir: Path
    base_dir: Path = field(default=Path("."))

    def vgrid(self) -> VerticalGrid:
        return VerticalGrid(self.params.b, self.nodes)

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p


def _section(raw, name):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return sec


def parse_config(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    """Validate a decoded TOML document before any computation happens."""
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    try:
        p = _section(raw, "params")
        params = WaveParams(
            gamma=float(p.get("gamma", 1.0)),
            sigma=float(p.get("sigma", 1.0)),
            b=float(p.get("b", 1.0)),
            horiz_dim=int(p.get("horiz_dim", 1)),
        )
        if params.sigma == 0 and params.horiz_dim == 2:
            raise ConfigError("sigma = 0 is not supported with two horizontal dimensions")
        g = _section(raw, "grid")
        npts = int(g.get("npts", 64))
        if npts & (npts - 1):
            raise ConfigError(f"grid.npts must be a power of two, got {npts}")
        grid = HorizontalGrid(params.horiz_dim, float(g.get("L", 16.0)), npts)
        nodes = int(g.get("nodes", 48))
        if nodes < 4:
            raise ConfigError("grid.nodes must be at least 4")
        fo = dict(_section(raw, "forcing"))
        fo.setdefault("preset", "none")
        if fo["preset"] not in FORCING_PRESETS:
            raise ConfigError(f"forcing.preset must be one of {FORCING_PRESETS}")
        it = _section(raw, "iteration")
        iteration = IterationConfig(
            max_iters=int(it.get("max_iters", 25)),
            tol=float(it.get("tol", 1e-8)),
            damping=float(it.get("damping", 1.0)),
            eta_cap=float(it["eta_cap"]) if "eta_cap" in it else None,
        )
        sy = dict(_section(raw, "symbols"))
        da = dict(_section(raw, "data"))
        da.setdefault("source", "random")
        if da["source"] not in ("random", "files"):
            raise ConfigError("data.source must be 'random' or 'files'")
        checks = list(_section(raw, "validate").get("checks", []))
        out = _section(raw, "output").get("dir", "out")
        seed = int(raw.get("seed", 0))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(params, grid, nodes, fo, iteration, sy, da, checks, seed, base_dir / out, base_dir)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw, path.parent)


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")
    return path


def build_forcing(cfg: RunConfig) -> ForcingSpec:
    fo, grid = cfg.forcing, cfg.grid
    preset = fo["preset"]
    a = float(fo.get("amplitude", 1e-3))
    w = float(fo.get("width", grid.L / 16))
    if preset == "none":
        return ForcingSpec()
    if preset == "gaussian-bump":
        return gaussian_bump_stress(a, w, grid)
    if preset == "pressure-patch":
        return traveling_pressure_patch(a, w, grid)
    if preset == "slice-force":
        return slice_force(a, w, grid)
    n = grid.d + 1
    spec = ForcingSpec()
    if "bulk_file" in fo:
        arr, _ = _read_matching(cfg.resolve(fo["bulk_file"]), cfg, ncomp=n, nodes=0)
        spec.bulk_slice = grid.to_physical_real(arr)
    if "stress_file" in fo:
        arr, _ = _read_matching(cfg.resolve(fo["stress_file"]), cfg, ncomp=n * n, nodes=0)
        T = grid.to_physical_real(arr).reshape((n, n) + grid.shape)
        spec.stress_slice = 0.5 * (T + np.swapaxes(T, 0, 1))
    return spec


def _read_matching(path: Path, cfg: RunConfig, ncomp: int, nodes: int):
    try:
        arr, hdr = fieldio.read_field(path)
    except OSError as exc:
        raise ConfigError(f"cannot read field file {path}: {exc}") from exc
    except fieldio.FieldFormatError as exc:
        raise ConfigError(str(exc)) from exc
    if (hdr.d, hdr.npts, hdr.nodes, hdr.ncomp) != (cfg.grid.d, cfg.grid.Npts, nodes, ncomp):
        raise ConfigError(f"{path}: header {hdr} does not match the configured grid")
    return arr, hdr


def _write_state(out: Path, state, cfg: RunConfig):
    grid, vg = cfg.grid, state.vgrid
    n = grid.d + 1
    b = cfg.params.b
    fieldio.write_field(out / "u.vwf", state.u, grid.d, grid.L, b, nodes=vg.n, ncomp=n)
    fieldio.write_field(out / "q.vwf", state.q, grid.d, grid.L, b, nodes=vg.n)
    fieldio.write_field(out / "p.vwf", state.p, grid.d, grid.L, b, nodes=vg.n)
    fieldio.write_field(out / "eta.vwf", state.eta, grid.d, grid.L, b)
    fieldio.write_surface_csv(out / "eta_spectrum.csv", state.eta)
    if grid.d == 1:
        fieldio.write_profile_csv(out / "eta_profile.csv", grid.x[0], grid.to_physical_real(state.eta))
    else:
        eta = grid.to_physical_real(state.eta)
        fieldio.write_profile_csv(out / "eta_profile.csv", grid.x[0][:, 0], eta[:, grid.Npts // 2], names=("x1", "eta_midline"))


def _state_norms(state) -> dict:
    grid, vg = state.grid, state.vgrid
    rep = xs_norm(SurfaceSpectrum(state.eta, grid), 2.5)
    return {
        "eta_X_5/2": rep.Xs,
        "u_H2": float(np.sqrt(volume_hs_sq(grid, vg, state.u, 2))),
        "q_H1": float(np.sqrt(volume_hs_sq(grid, vg, state.q, 1))),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_symbols(cfg: RunConfig) -> int:
    sy = cfg.symbols
    prm = cfg.params
    d = prm.horiz_dim
    direction = np.asarray(sy.get("direction", [1.0] + [0.0] * (d - 1)), dtype=float)
    if direction.size != d or not np.linalg.norm(direction) > 0:
        raise ConfigError(f"symbols.direction must be a nonzero vector of length {d}")
    direction = direction / np.linalg.norm(direction)
    mags = np.logspace(np.log10(float(sy.get("xi_min", 1e-3))), np.log10(float(sy.get("xi_max", 1e3))), int(sy.get("count", 121)))
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = [[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, "nan", "nan", "nan"]]
    max_re_m = -np.inf
    for mag in mags:
        xi = mag * direction
        m = eval_m(xi, prm.gamma, prm.b)
        rho = eval_rho(xi, prm)
        az = m_asymptotic_zero(xi, prm)
        ai = m_asymptotic_infty(xi, prm)
        max_re_m = max(max_re_m, m.real)
        rows.append([mag, xi[0], m.real, m.imag, rho.real, rho.imag, az, ai, (m / az).real, (m / ai).real])
    path = out / "symbols.csv"
    header = "xi_norm,xi1,re_m,im_m,re_rho,im_rho,m_asym_zero,m_asym_infty,ratio_zero,ratio_infty"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else repr(float(r)) for r in row) + "\n")
    _write_json(out / "symbols_report.json", {"rows": len(rows), "max_re_m_off_zero": max_re_m, "params": vars(prm)})
    log.info("wrote %s", path)
    return EXIT_OK


def _load_data(cfg: RunConfig) -> DataQuadruple:
    grid, vg = cfg.grid, cfg.vgrid()
    da = cfg.data
    if da["source"] == "random":
        rng = np.random.default_rng(cfg.seed)
        return random_data(rng, grid, vg, kmax=int(da.get("kmax", 4)))
    n = grid.d + 1
    arrays = {}
    for key, ncomp, nodes in (("f", n, vg.n), ("g", 0, vg.n), ("h", 0, 0), ("k", n, 0)):
        if key not in da:
            raise ConfigError(f"data.{key} is required when data.source = 'files'")
        arrays[key], _ = _read_matching(cfg.resolve(da[key]), cfg, ncomp, nodes)
    return DataQuadruple(grid=grid, vgrid=vg, **arrays)


def cmd_solve_linear(cfg: RunConfig) -> int:
    data = _load_data(cfg)
    solver = LinearSolver(cfg.params, cfg.grid, data.vgrid)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        sol = solver.solve_gravity_capillary(data)
    except CompatibilityError as exc:
        _write_json(out / "linear_report.json", {"status": "compatibility_violation", "mode_index": [0] * cfg.grid.d, "message": str(exc)})
        log.error("%s (mode index %s)", exc, [0] * cfg.grid.d)
        return EXIT_VALIDATION
    back = forward_operator(sol, cfg.params.gamma, cfg.params.sigma)
    rt = ys_norm(back - data) / max(ys_norm(data), np.finfo(float).tiny)
    _write_state(out, sol, cfg)
    report = {"status": "ok", "round_trip_relative_residual": rt, "data_Y_norm": ys_norm(data), "norms": _state_norms(sol)}
    _write_json(out / "linear_report.json", report)
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    forcing = build_forcing(cfg)
    vg = cfg.vgrid()
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    state, rep = solve_traveling_wave(forcing, cfg.params, cfg.iteration, cfg.grid, vg)
    conv = rep.as_dict(include_timing=False)
    conv["norms"] = _state_norms(state)
    _write_json(out / "convergence.json", conv)
    _write_json(out / "timing.json", {"solve_wall_time": rep.wall_time})
    _write_state(out, state, cfg)
    log.info("status %s after %d iterations, residual %.3e", rep.status, rep.iterations, rep.final_residual)
    return EXIT_OK if rep.status == "converged" else EXIT_DIVERGED


def cmd_validate(cfg: RunConfig) -> int:
    from .acceptance import run_all

    results = run_all(seed=cfg.seed, only=cfg.checks or None)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        print(r.line())
    verdict = [{k: v for k, v in r.as_dict().items() if k not in ("seconds",)} for r in results]
    for v, r in zip(verdict, results):
        v["detail"] = {k: val for k, val in r.detail.items() if k != "wall_time"}
    _write_json(out / "validation.json", {"all_passed": all(r.passed for r in results), "checks": verdict})
    _write_json(out / "timing.json", {f"check_{r.id}": r.seconds for r in results})
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {"symbols": cmd_symbols, "solve-linear": cmd_solve_linear, "solve": cmd_solve, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="viscowave", description="Traveling viscous surface waves on a periodic slab.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="TOML run description")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (0 = one per CPU; default $VISCOWAVE_THREADS or 1)")
    ap.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        set_threads(args.threads)
    except ValueError as exc:
        print(f"config error: bad thread count: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.output_dir = Path(args.out)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
