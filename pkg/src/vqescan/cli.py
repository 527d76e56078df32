"""Command-line entry point.

Subcommands: energy, scan, grad, dump-hamiltonian, fcidump-roundtrip.
Runs are configured by flat key-value files plus ``--set key=value``
overrides; every run writes its resolved configuration and result files
into the output directory.

Exit codes: 0 success, 1 input error, 2 VQE non-convergence, 3 partial
scan (some points failed).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfgmod
from .config import ConfigError, format_config, get_bool, get_float, get_int
from .constants import HARTREE_TO_KJMOL
from .fcidump import FcidumpError, format_fcidump, load_fcidump
from .fermion import build_hamiltonian
from .geometry import GeometryError, MolecularGeometry, load_xyz
from .integrals import IntegralError, ScfConvergenceError
from .mapping import (EncodingSpec, MappingError, hartree_fock_occupations,
                      map_operator, taper_two_qubits)
from .pathfinder import (BUILTIN_SOURCE, FCIDUMP_SOURCE, PathPoint, PointSolver,
                         ReactionPath, ScanError, generate_scan, trace_path)
from .presets import available_presets, load_preset, scan_spec_from_config
from .simulator import RNG_ALGORITHM, ShotPlan, exact_ground_energy
from .vqe import (CENTRAL_FD, HELLMANN_FEYNMAN_FD, VqeConfig, VqeError, displace,
                  gradient_central_fd, gradient_hellmann_feynman_fd)

INPUT_ERRORS = (ConfigError, GeometryError, IntegralError, FcidumpError,
                MappingError, ScanError, ScfConvergenceError, FileNotFoundError,
                KeyError, ValueError)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_PARTIAL = 3

_COMMON_DEFAULTS = {
    "source": BUILTIN_SOURCE,
    "encoding": "parity",
    "taper": "true",
    "ansatz": "uccsd",
    "hea_layers": "1",
    "optimizer": "simplex",
    "max_iterations": "2000",
    "energy_tolerance": "1e-8",
    "restarts": "1",
    "shots": "0",
    "seed": "0",
    "threads": "1",
    "output_dir": "vqescan-out",
    "figure": "true",
}


def _resolve_config(args, defaults: dict[str, str]) -> dict[str, str]:
    resolved = dict(_COMMON_DEFAULTS)
    resolved.update(defaults)
    if getattr(args, "preset", None):
        preset = load_preset(args.preset)
        resolved.update(preset.config)
        resolved["preset"] = args.preset
    if args.config:
        resolved.update(cfgmod.load_config(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        resolved[key.strip()] = value.strip()
    if args.output_dir:
        resolved["output_dir"] = args.output_dir
    if args.seed is not None:
        resolved["seed"] = str(args.seed)
    if args.threads is not None:
        resolved["threads"] = str(args.threads)
    return resolved


def _prepare_output_dir(cfg: dict[str, str]) -> str:
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "resolved.conf"), "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))
    return out


def _vqe_config(cfg: dict[str, str]) -> VqeConfig:
    shots = get_int(cfg, "shots", 0)
    seed = get_int(cfg, "seed", 0)
    return VqeConfig(
        max_iterations=get_int(cfg, "max_iterations", 2000),
        energy_tolerance=get_float(cfg, "energy_tolerance", 1e-8),
        optimizer=cfg.get("optimizer", "simplex"),
        restarts=get_int(cfg, "restarts", 1),
        shot_plan=ShotPlan(shots, seed) if shots else None,
        seed=seed,
    )


def _solver(cfg: dict[str, str]) -> PointSolver:
    template = cfg.get("fcidump_template") or None
    if template and cfg.get("fcidump_dir"):
        template = os.path.join(cfg["fcidump_dir"], template)
    return PointSolver(
        source=cfg.get("source", BUILTIN_SOURCE),
        n_active_electrons=get_int(cfg, "active_electrons"),
        n_active_orbitals=get_int(cfg, "active_orbitals"),
        encoding_kind=cfg.get("encoding", "parity"),
        taper=get_bool(cfg, "taper", True),
        ansatz_kind=cfg.get("ansatz", "uccsd"),
        hea_layers=get_int(cfg, "hea_layers", 1),
        vqe=_vqe_config(cfg),
        fcidump_path=cfg.get("fcidump") or None,
        fcidump_template=template,
        scan_label=cfg.get("scan_label", ""),
    )


def _load_geometry(cfg: dict[str, str]) -> MolecularGeometry | None:
    if cfg.get("preset"):
        return load_preset(cfg["preset"]).geometry
    if cfg.get("geometry"):
        return load_xyz(cfg["geometry"])
    return None


def _geometry_required(cfg: dict[str, str]) -> MolecularGeometry:
    geom = _load_geometry(cfg)
    if geom is None:
        raise ConfigError("config must name a geometry (or a preset)")
    return geom


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def cmd_energy(args) -> int:
    cfg = _resolve_config(args, {"trace": "false", "sector_search": "false"})
    solver = _solver(cfg)
    geom = _load_geometry(cfg)
    if solver.source == BUILTIN_SOURCE and geom is None:
        raise ConfigError("builtin source needs a geometry file")
    if solver.source == FCIDUMP_SOURCE and not cfg.get("fcidump"):
        raise ConfigError("fcidump source needs an fcidump path")
    out = _prepare_output_dir(cfg)
    solution = solver.solve(geom)
    result = solution.vqe
    sector_search = None
    if get_bool(cfg, "sector_search", False):
        sector_search = _sector_search(solver, geom)
    payload = {
        "energy": result.energy,
        "theta": [float(t) for t in result.theta],
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "n_qubits": solution.n_qubits,
        "n_parameters": solution.n_parameters,
        "circuit_depth": solution.depth,
        "n_hamiltonian_terms": len(solution.hamiltonian),
        "encoding": cfg["encoding"],
        "taper": get_bool(cfg, "taper", True),
        "ansatz": cfg["ansatz"],
        "optimizer": cfg["optimizer"],
        "seed": get_int(cfg, "seed", 0),
        "shots": get_int(cfg, "shots", 0),
        "rng_algorithm": RNG_ALGORITHM if get_int(cfg, "shots", 0) else None,
        "source": cfg.get("fcidump") or cfg.get("geometry") or cfg.get("preset"),
        "sector_search": sector_search,
        "trace_file": "trace.csv" if get_bool(cfg, "trace", False) else None,
        "created_utc": _timestamp(),
    }
    _write_json(os.path.join(out, "energy.json"), payload)
    if get_bool(cfg, "trace", False):
        _write_trace(os.path.join(out, "trace.csv"), result.trace)
        if get_bool(cfg, "figure", True):
            from .plotting import render_trace_figure
            render_trace_figure(result.trace, os.path.join(out, "trace.png"),
                                title="VQE convergence")
    print(f"energy = {result.energy:.9f} Hartree "
          f"({solution.n_qubits} qubits, {solution.n_parameters} parameters, "
          f"depth {solution.depth}, converged={result.converged})")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _sector_search(solver: PointSolver, geom) -> dict:
    """Exact tapered ground energies in all four symmetry sectors.

    Verifies that the reference-occupation sector (the one the solver uses)
    is the right one; exposed behind the sector_search config flag.
    """
    if not solver.taper:
        raise ConfigError("sector_search needs taper=true")
    ints = solver.integrals_for(geom)
    asi = solver.active_space(ints)
    n_modes = asi.n_spin_orbitals
    mapped = map_operator(build_hamiltonian(asi),
                          EncodingSpec(solver.encoding_kind, n_modes))
    occ = hartree_fock_occupations(asi.n_active_electrons, n_modes)
    reference = taper_two_qubits(mapped, n_modes, asi.n_active_electrons, occ)
    search = {}
    for z_mid in (1, -1):
        for z_last in (1, -1):
            reduced = taper_two_qubits(mapped, n_modes, asi.n_active_electrons, occ,
                                       sector=(z_mid, z_last)).reduced
            energy, _ = exact_ground_energy(reduced)
            search[f"({z_mid:+d},{z_last:+d})"] = energy
    return {"reference_sector": f"({reference.sector[0]:+d},{reference.sector[1]:+d})",
            "sector_ground_energies": search}


def _write_trace(path: str, trace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "energy_hartree", "parameter_norm"])
        for n, (theta, energy) in enumerate(trace):
            writer.writerow([n, f"{energy:.12f}", f"{np.linalg.norm(theta):.12f}"])


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def _trace_path_parallel(geom, spec, solver, threads: int) -> ReactionPath:
    """Cold-start scan: points are independent, solved in a thread pool."""
    geometries = generate_scan(geom, spec)
    angles = spec.grid()

    def solve_point(item):
        angle, point_geom = item
        try:
            solution = solver.solve(point_geom, angle=float(angle))
            return PathPoint(float(angle), point_geom, solution.energy, solution.vqe), None
        except Exception as exc:  # noqa: BLE001 - per-point manifest
            return None, (float(angle), f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes = list(pool.map(solve_point, zip(angles, geometries)))
    points = [p for p, _ in outcomes if p is not None]
    failures = [f for _, f in outcomes if f is not None]
    return ReactionPath(points, failures)


def cmd_scan(args) -> int:
    cfg = _resolve_config(args, {"warm_start": "true"})
    if "torsion" not in cfg:
        raise ConfigError("scan needs a preset or a torsion specification")
    geom = _geometry_required(cfg)
    spec = scan_spec_from_config(cfg)
    if len(spec.grid()) < 2:
        raise ConfigError("scan grid must contain at least two points")
    solver = _solver(cfg)
    out = _prepare_output_dir(cfg)
    threads = get_int(cfg, "threads", 1)
    if get_bool(cfg, "warm_start", True):
        path = trace_path(geom, spec, solver)  # sequential by construction
    else:
        if spec.relax_bonds:
            raise ConfigError("bond relaxation needs warm_start=true")
        path = _trace_path_parallel(geom, spec, solver, max(threads, 1))

    _write_path_csv(os.path.join(out, "path.csv"), path)
    manifest = {
        "preset": cfg.get("preset"),
        "scan_label": cfg.get("scan_label", ""),
        "torsion_atoms": list(spec.torsion_atoms),
        "grid": {"start": spec.start, "stop": spec.stop, "step": spec.step},
        "n_points": len(path.points),
        "n_failures": len(path.failures),
        "failures": [{"angle_deg": a, "error": msg} for a, msg in path.failures],
        "barrier_hartree": path.barrier_hartree,
        "barrier_kjmol": path.barrier_kjmol,
        "hartree_to_kjmol": HARTREE_TO_KJMOL,
        "minima_deg": path.minima,
        "seed": get_int(cfg, "seed", 0),
        "shots": get_int(cfg, "shots", 0),
        "rng_algorithm": RNG_ALGORITHM if get_int(cfg, "shots", 0) else None,
        "warm_start": get_bool(cfg, "warm_start", True),
        "source": cfg.get("source"),
        "created_utc": _timestamp(),
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)
    if path.points and get_bool(cfg, "figure", True):
        from .plotting import render_path_figure
        render_path_figure(path, os.path.join(out, "path.png"),
                           title=cfg.get("scan_label", ""))
    if path.points:
        print(f"scan: {len(path.points)} points, barrier "
              f"{path.barrier_hartree:.9f} Hartree = {path.barrier_kjmol:.6f} kJ/mol")
    if path.failures:
        print(f"scan: {len(path.failures)} point(s) failed; see manifest.json",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _write_path_csv(path_file: str, path: ReactionPath) -> None:
    e_min = float(path.energies.min()) if path.points else 0.0
    with open(path_file, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle_deg", "energy_hartree", "relative_energy_kjmol",
                         "converged", "iterations"])
        for point in path.points:
            writer.writerow([
                f"{point.coordinate:g}",
                f"{point.energy:.9f}",
                f"{(point.energy - e_min) * HARTREE_TO_KJMOL:.6f}",
                point.vqe.converged,
                point.vqe.iterations,
            ])


# ---------------------------------------------------------------------------
# grad
# ---------------------------------------------------------------------------

def cmd_grad(args) -> int:
    cfg = _resolve_config(args, {"dr": "1e-3", "method": CENTRAL_FD,
                                 "coordinates": "all"})
    geom = _geometry_required(cfg)
    solver = _solver(cfg)
    if solver.source != BUILTIN_SOURCE:
        raise ConfigError("gradients need geometry-dependent (builtin) integrals")
    dR = get_float(cfg, "dr")
    if dR is None or dR <= 0:
        raise ConfigError("dr must be a positive finite-difference step in Bohr")
    method = cfg.get("method", CENTRAL_FD)
    if method not in (CENTRAL_FD, HELLMANN_FEYNMAN_FD):
        raise ConfigError(f"unknown gradient method {method!r}")
    if cfg["coordinates"].strip() == "all":
        coordinates = list(range(3 * geom.n_atoms))
    else:
        coordinates = cfgmod.get_int_list(cfg, "coordinates")
        if not coordinates:
            raise ConfigError("no coordinates requested")
    out = _prepare_output_dir(cfg)
    threads = get_int(cfg, "threads", 1)

    center = solver.solve(geom)
    warm = center.vqe.theta

    if method == CENTRAL_FD:
        energy_fn = solver.energy_fn(warm_theta=warm)
        if threads > 1:
            result = _central_fd_parallel(energy_fn, geom, coordinates, dR, threads)
        else:
            result = gradient_central_fd(energy_fn, geom, coordinates, dR)
        gradient, errors = result.gradient, result.fd_error_estimate
    else:
        state_theta = center.vqe.theta
        from .ansatz import prepare
        state = prepare(center.circuit, state_theta)
        gradient = np.zeros(len(coordinates))
        errors = np.zeros(len(coordinates))
        for n, coord in enumerate(coordinates):
            def hf_value(step):
                h_plus = solver.qubit_hamiltonian(solver.active_space(
                    solver.integrals_for(displace(geom, coord, +0.5 * step))))
                h_minus = solver.qubit_hamiltonian(solver.active_space(
                    solver.integrals_for(displace(geom, coord, -0.5 * step))))
                return gradient_hellmann_feynman_fd(h_plus, h_minus, state, step)
            g1 = hf_value(dR)
            g2 = hf_value(2.0 * dR)
            gradient[n] = g1
            errors[n] = abs(g1 - g2) / 3.0

    payload = {
        "coordinates": coordinates,
        "gradient_hartree_per_bohr": [float(g) for g in gradient],
        "fd_error_estimate": [float(e) for e in errors],
        "dr_bohr": dR,
        "method": method,
        "center_energy": center.energy,
        "seed": get_int(cfg, "seed", 0),
        "created_utc": _timestamp(),
    }
    _write_json(os.path.join(out, "gradient.json"), payload)
    norm = float(np.linalg.norm(gradient))
    print(f"gradient norm = {norm:.9f} Hartree/Bohr over {len(coordinates)} "
          f"coordinate(s), method {method}")
    return EXIT_OK if center.vqe.converged else EXIT_NOT_CONVERGED


def _central_fd_parallel(energy_fn, geom, coordinates, dR, threads):
    from .vqe import GradientResult

    def one(coord):
        return gradient_central_fd(energy_fn, geom, [coord], dR)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(one, coordinates))
    gradient = np.array([p.gradient[0] for p in parts])
    errors = np.array([p.fd_error_estimate[0] for p in parts])
    return GradientResult(gradient, dR, CENTRAL_FD, errors, tuple(coordinates))


# ---------------------------------------------------------------------------
# dump-hamiltonian / fcidump-roundtrip
# ---------------------------------------------------------------------------

def cmd_dump_hamiltonian(args) -> int:
    cfg = _resolve_config(args, {})
    solver = _solver(cfg)
    geom = _load_geometry(cfg)
    if solver.source == BUILTIN_SOURCE and geom is None:
        raise ConfigError("builtin source needs a geometry file")
    out = _prepare_output_dir(cfg)
    ints = solver.integrals_for(geom)
    asi = solver.active_space(ints)
    fermionic = build_hamiltonian(asi)
    qubit = solver.qubit_hamiltonian(asi)
    with open(os.path.join(out, "fermionic.txt"), "w", encoding="utf-8") as fh:
        fh.write(fermionic.format() + "\n")
    with open(os.path.join(out, "qubit.txt"), "w", encoding="utf-8") as fh:
        fh.write(qubit.format() + "\n")
    with open(os.path.join(out, "qubit.json"), "w", encoding="utf-8") as fh:
        fh.write(qubit.to_json() + "\n")
    print(f"fermionic terms: {len(fermionic)}; qubit terms: {len(qubit)} "
          f"on {qubit.n_qubits} qubit(s)")
    return EXIT_OK


def cmd_fcidump_roundtrip(args) -> int:
    cfg = _resolve_config(args, {})
    if not cfg.get("fcidump"):
        raise ConfigError("fcidump-roundtrip needs fcidump=<path>")
    out = _prepare_output_dir(cfg)
    original = load_fcidump(cfg["fcidump"])
    rewritten_path = os.path.join(out, "roundtrip.fcidump")
    with open(rewritten_path, "w", encoding="utf-8") as fh:
        fh.write(format_fcidump(original))
    reparsed = load_fcidump(rewritten_path)
    dh = float(np.max(np.abs(original.h - reparsed.h)))
    dg = float(np.max(np.abs(original.g - reparsed.g)))
    de = abs(original.e_nn - reparsed.e_nn)
    ok = dh <= 1e-12 and dg <= 1e-12 and de <= 1e-12
    print(f"roundtrip max deviations: h {dh:.3e}, g {dg:.3e}, core {de:.3e} -> "
          f"{'OK' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_INPUT


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqescan",
        description="Torsional reaction-path scans with a statevector VQE.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_preset=False):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--output-dir", help="where result files go")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--threads", type=int, help="worker threads (default 1)")
        if with_preset:
            p.add_argument("--preset", choices=available_presets(),
                           help="bundled scan preset")

    common(sub.add_parser("energy", help="single-point VQE energy"), with_preset=True)
    common(sub.add_parser("scan", help="torsion scan / reaction path"),
           with_preset=True)
    common(sub.add_parser("grad", help="nuclear energy gradient"), with_preset=True)
    common(sub.add_parser("dump-hamiltonian",
                          help="write fermionic and qubit Hamiltonians"),
           with_preset=True)
    common(sub.add_parser("fcidump-roundtrip",
                          help="parse and rewrite an FCIDUMP, check identity"))
    return parser


_COMMANDS = {
    "energy": cmd_energy,
    "scan": cmd_scan,
    "grad": cmd_grad,
    "dump-hamiltonian": cmd_dump_hamiltonian,
    "fcidump-roundtrip": cmd_fcidump_roundtrip,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except VqeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
