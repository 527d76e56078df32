"""Bundled scan presets: named geometry + scan configuration pairs."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .config import get_followers, get_int_list, get_pairs, load_config
from .geometry import MolecularGeometry, parse_xyz
from .pathfinder import ScanSpec

PRESETS = {
    "ethane_cas22": "ethane_cas22.conf",
    "ethane_cas44": "ethane_cas44.conf",
    "dichloroethylene_cas22": "dichloroethylene_cas22.conf",
}


@dataclass(frozen=True)
class Preset:
    name: str
    geometry: MolecularGeometry
    scan: ScanSpec
    config: dict  # raw key-value pairs, feed for the point solver


def available_presets() -> list[str]:
    return sorted(PRESETS)


def _presets_dir():
    return resources.files(__package__) / "presets"


def load_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(available_presets())}")
    base = _presets_dir()
    cfg = load_config(base / PRESETS[name])
    geometry = parse_xyz((base / cfg["geometry"]).read_text(encoding="utf-8"))
    scan = scan_spec_from_config(cfg)
    return Preset(name, geometry, scan, cfg)


def scan_spec_from_config(cfg: dict) -> ScanSpec:
    torsion = get_int_list(cfg, "torsion")
    if len(torsion) != 4:
        raise ValueError("torsion must list four atom indices")
    return ScanSpec(
        torsion_atoms=tuple(torsion),
        start=float(cfg["start"]),
        stop=float(cfg["stop"]),
        step=float(cfg["step"]),
        moving_set=frozenset(get_int_list(cfg, "moving_set")),
        counter_rotating_set=frozenset(get_int_list(cfg, "counter_set")),
        rigid_followers=get_followers(cfg),
        relax_bonds=get_pairs(cfg, "relax_pairs") if cfg.get("relax", "false").lower()
        in ("true", "yes", "1", "on") else (),
    )
