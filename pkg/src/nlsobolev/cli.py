"""Config-driven command line runner.

    nlsobolev <subcommand> CONFIG.ini [--set section.key=value ...] [--out DIR]

Subcommands: kernel-check, exponent, assemble, solve, sweep, probe. Every
run writes its CSV outputs and a manifest.txt into the output directory.
Exit codes: 0 success, 2 validation failure, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .assembly import AssemblyConfig, assemble_cached
from .errors import ConfigParseError, NlSobolevError, NumericalError, ValidationError
from .exponent import ExponentReport, full_report
from .grid import make_domain
from .kernels import (
    FAMILIES,
    check_levy_integrability,
    check_monotone,
    read_tabulated,
)
from .probe import compactness_diagnostic, concentration_probe, embedding_sweep, random_bumps
from .solver import SolveConfig, solve, summary_csv

log = logging.getLogger("nlsobolev")

SUBCOMMANDS = ("kernel-check", "exponent", "assemble", "solve", "sweep", "probe")
SECTIONS = ("kernel", "domain", "task", "output")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def load_config(path, overrides=()) -> dict:
    """INI file -> {section: {key: str}} with ``section.key=value`` overrides applied."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigParseError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigParseError(f"{path}: {exc}") from None
    cfg = {s: dict(cp[s]) for s in cp.sections()}
    for s in cfg:
        if s not in SECTIONS:
            raise ConfigParseError(f"{path}: unknown section [{s}]")
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigParseError(f"override {item!r} is not of the form section.key=value")
        if section not in SECTIONS:
            raise ConfigParseError(f"override {item!r}: unknown section {section!r}")
        cfg.setdefault(section, {})[name.strip()] = value.strip()
    cfg["_base_dir"] = str(Path(path).resolve().parent)
    return cfg


def config_fingerprint(cfg: dict) -> str:
    doc = {k: v for k, v in cfg.items() if not k.startswith("_")}
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _get(cfg, section, key, conv=str, default=None):
    try:
        raw = cfg[section][key]
    except KeyError:
        if default is not None:
            return default
        raise ConfigParseError(f"missing [{section}] {key}") from None
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise ConfigParseError(f"[{section}] {key} = {raw!r} is not a valid {conv.__name__}") from None


def _floats(text):
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


_bool.__name__ = "boolean"
_floats.__name__ = "list of numbers"
_ints.__name__ = "list of integers"


def build_kernel(cfg: dict):
    sec = dict(cfg.get("kernel", {}))
    family = sec.pop("family", None)
    if family not in FAMILIES or family == "sum":
        raise ConfigParseError(f"[kernel] family must be one of fractional, log_corrected, lacunary, tabulated; got {family!r}")
    try:
        N = int(sec.pop("n", 2))
        scale = float(sec.pop("scale", 1.0))
    except ValueError as exc:
        raise ConfigParseError(f"[kernel] {exc}") from None
    if family == "tabulated":
        path = sec.pop("samples_file", None)
        if path is None:
            raise ConfigParseError("[kernel] tabulated family needs samples_file")
        path = Path(cfg["_base_dir"]) / path
        if not path.exists():
            raise ConfigParseError(f"samples_file not found: {path}")
        k = read_tabulated(path, N=N)
        return k.scaled(scale) if scale != 1.0 else k
    try:
        params = {key: float(v) for key, v in sec.items()}
    except ValueError as exc:
        raise ConfigParseError(f"[kernel] {exc}") from None
    try:
        return FAMILIES[family](N=N, scale=scale, **params)
    except TypeError as exc:
        raise ConfigParseError(f"[kernel] {exc}") from None


def build_grid(cfg: dict):
    shape = _get(cfg, "domain", "shape", str, "square")
    if shape not in ("square", "disk"):
        raise ConfigParseError(f"[domain] shape must be square or disk, got {shape!r}")
    return make_domain(shape, _get(cfg, "domain", "size", float, 1.0), _get(cfg, "domain", "resolution", int, 17))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cache_dir(cfg, out: Path):
    if not _get(cfg, "output", "cache", _bool, False) and "KS_CACHE_DIR" not in os.environ:
        return None
    return Path(os.environ.get("KS_CACHE_DIR", out / "cache"))


def _assembler(cfg, out, info):
    cache = _cache_dir(cfg, out)

    def build(grid, spec, acfg):
        A, hit = assemble_cached(grid, spec, acfg, cache)
        info.setdefault("cache_hits", []).append(hit)
        return A

    return build


def _assembly_config(cfg):
    return AssemblyConfig(
        delta_factor=_get(cfg, "task", "delta_factor", float, 2.0),
        near_order=_get(cfg, "task", "near_order", int, 4),
        self_correction=_get(cfg, "task", "self_correction", _bool, True),
    )


# ---------------------------------------------------------------------------
# subcommands; each returns {filename: text}
# ---------------------------------------------------------------------------


def cmd_kernel_check(cfg, out, info):
    spec = build_kernel(cfg)
    integ = check_levy_integrability(spec)
    mono = check_monotone(spec)
    rows = [
        ["levy_integrability", int(integ.passed), integ.divergent_piece or "", integ.detail],
        ["symmetry", 1, "", "radial profile"],
        ["monotone", int(mono.passed), "", "" if mono.passed else f"increase at {mono.first_violation}"],
    ]
    files = {"kernel_check.csv": _csv_text(["check", "passed", "divergent_piece", "detail"], rows)}
    info["failed"] = not (integ.passed and mono.passed)
    for r in rows:
        print(f"{r[0]}: {'pass' if r[1] else 'FAIL'} {r[2]} {r[3]}".rstrip())
    return files


def cmd_exponent(cfg, out, info):
    spec = build_kernel(cfg)
    rep = full_report(
        spec,
        r_min=_get(cfg, "task", "r_min", float, 1e-6),
        r_max=_get(cfg, "task", "r_max", float, 1.0),
        points=_get(cfg, "task", "points", int, 241),
    )
    print(f"s0 in [{rep.s0_lo:.6f}, {rep.s0_hi:.6f}] ({rep.regime}); l_inf: {rep.l_inf_class}; 2*: {rep.two_star}")
    slopes = "".join(f"{r:.16e} {s:.16e}\n" for r, s in zip(rep.r_grid, rep.slopes))
    return {
        "exponent.csv": _csv_text(ExponentReport.CSV_HEADER, [rep.csv_row()]),
        "slopes.dat": slopes,
    }


def cmd_assemble(cfg, out, info):
    spec = build_kernel(cfg)
    grid = build_grid(cfg)
    A = _assembler(cfg, out, info)(grid, spec, _assembly_config(cfg))
    ev = np.linalg.eigvalsh(A.matrix)
    rows = [[
        grid.M,
        f"{grid.h:.16e}",
        f"{ev[0]:.16e}",
        f"{ev[-1]:.16e}",
        f"{ev[0] / grid.cell_volume:.16e}",
        int(np.array_equal(A.matrix, A.matrix.T)),
        A.fingerprint,
        int(info["cache_hits"][-1]),
    ]]
    print(f"M = {grid.M}, eig(A) in [{ev[0]:.6g}, {ev[-1]:.6g}], cache hit: {info['cache_hits'][-1]}")
    return {"spectrum.csv": _csv_text(
        ["M", "h", "eig_min", "eig_max", "lambda_2", "symmetric", "fingerprint", "cache_hit"], rows
    )}


def _solve_config(cfg):
    return SolveConfig(
        p=_get(cfg, "task", "p", float, 3.0),
        method=_get(cfg, "task", "method", str, "nehari"),
        grad_tol=_get(cfg, "task", "grad_tol", float, 1e-8),
        max_iters=_get(cfg, "task", "max_iters", int, 500),
        path_points=_get(cfg, "task", "path_points", int, 21),
    )


def cmd_solve(cfg, out, info):
    spec = build_kernel(cfg)
    grid = build_grid(cfg)
    scfg = _solve_config(cfg)
    A = _assembler(cfg, out, info)(grid, spec, _assembly_config(cfg))
    sol = solve(A, grid, scfg)
    print(
        f"{sol.method}: energy {sol.energy:.10g}, residual {sol.residual:.3g}, "
        f"nehari gap {sol.nehari_gap:.3g}, {sol.iterations} iterations, {sol.sign_pattern()}"
    )
    return {"solution.csv": sol.u.to_csv(), "summary.csv": summary_csv(sol, A.fingerprint)}


def cmd_sweep(cfg, out, info):
    spec = build_kernel(cfg)
    shape = _get(cfg, "domain", "shape", str, "square")
    size = _get(cfg, "domain", "size", float, 1.0)
    rep = embedding_sweep(
        spec,
        (shape, size),
        _get(cfg, "task", "resolutions", _ints, [9, 17]),
        _get(cfg, "task", "q", _floats, [2.0]),
        cfg=_assembly_config(cfg),
        seed=info["seed"],
        assembler=_assembler(cfg, out, info),
    )
    for q in rep.q_values:
        cs = ", ".join(f"{rep.C(q, r):.6g}" for r in rep.resolutions)
        print(f"q = {q:g}: C_q = [{cs}] ({rep.trends[q]})")
    return {"embedding.csv": rep.to_csv(), "embedding_plot.dat": rep.plot_data()}


def cmd_probe(cfg, out, info):
    spec = build_kernel(cfg)
    grid = build_grid(cfg)
    build = _assembler(cfg, out, info)
    acfg = _assembly_config(cfg)
    A = build(grid, spec, acfg)
    rho = _get(cfg, "task", "rho_cells", int, 4) * grid.h
    fns = random_bumps(grid, _get(cfg, "task", "samples", int, 10), seed=info["seed"])
    diag = compactness_diagnostic(A, grid, spec, rho, fns)
    print(f"compactness: {sum(diag.passed)}/{len(diag.passed)} pass, min slack {min(diag.slack):.4g}")
    files = {"compactness.csv": diag.to_csv()}
    if "widths" in cfg.get("task", {}):
        tab = concentration_probe(lambda k: A, spec, _get(cfg, "task", "q", float, 2.0), _get(cfg, "task", "widths", _floats))
        print(f"concentration q = {tab.q:g}: {tab.trend}")
        files["concentration.dat"] = tab.plot_data()
    info["failed"] = not all(diag.passed)
    return files


COMMANDS = {
    "kernel-check": cmd_kernel_check,
    "exponent": cmd_exponent,
    "assemble": cmd_assemble,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
}


def _write_manifest(out: Path, subcommand, cfg, overrides, info, files, wall, status):
    lines = [
        f"subcommand: {subcommand}",
        f"config_fingerprint: {config_fingerprint(cfg)}",
        f"overrides: {list(overrides)}",
        f"seed: {info['seed']}",
        f"nlsobolev: {__version__}",
        f"python: {platform.python_version()}",
        f"numpy: {np.__version__}",
        f"scipy: {scipy.__version__}",
        f"status: {status}",
        f"wall_time_s: {wall:.3f}",
        f"outputs: {sorted(files)}",
    ]
    if "cache_hits" in info:
        lines.append(f"cache_hits: {info['cache_hits']}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def run(subcommand: str, config_path, overrides=(), out_dir=None) -> int:
    """Run one subcommand; returns the process exit code."""
    t0 = time.perf_counter()
    if subcommand not in COMMANDS:
        print(f"unknown subcommand {subcommand!r}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(config_path, overrides)
        out = Path(out_dir or cfg.get("output", {}).get("dir", "out"))
        if not out.is_absolute() and out_dir is None:
            out = Path(cfg["_base_dir"]) / out
        seed = _get(cfg, "output", "seed", int, 0)
    except NlSobolevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    info = {"seed": seed}
    files, status, code = {}, "ok", 0
    try:
        files = COMMANDS[subcommand](cfg, out, info)
        if info.get("failed"):
            status, code = "check failed", 2
    except ValidationError as exc:
        status, code = f"validation error: {exc}", 2
    except NumericalError as exc:
        status, code = f"numerical error: {exc}", 1
    for name, text in files.items():
        with open(out / name, "w", newline="") as fh:
            fh.write(text)
    _write_manifest(out, subcommand, cfg, overrides, info, files, time.perf_counter() - t0, status)
    if code:
        print(f"error: {status}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nlsobolev", description=__doc__.split("\n\n")[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("config", help="INI configuration file")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    ap.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return run(args.subcommand, args.config, args.overrides, args.out)


if __name__ == "__main__":
    sys.exit(main())
