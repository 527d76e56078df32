"""Flat key-value run configuration.

Config files hold one ``key = value`` pair per line with ``#`` comments;
command-line flags override file values. Every run writes its resolved
configuration back into the output directory so it can be re-run verbatim.
"""
from __future__ import annotations


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {n}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def format_config(values: dict[str, str]) -> str:
    return "\n".join(f"{key} = {values[key]}" for key in sorted(values)) + "\n"


def get_bool(cfg: dict, key: str, default: bool = False) -> bool:
    raw = cfg.get(key, "")
    if raw == "":
        return default
    if raw.lower() in ("true", "yes", "1", "on"):
        return True
    if raw.lower() in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def get_int(cfg: dict, key: str, default: int | None = None) -> int | None:
    raw = cfg.get(key, "")
    if raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def get_float(cfg: dict, key: str, default: float | None = None) -> float | None:
    raw = cfg.get(key, "")
    if raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def get_int_list(cfg: dict, key: str) -> list[int]:
    raw = cfg.get(key, "")
    if raw == "":
        return []
    try:
        return [int(tok) for tok in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: expected integers, got {raw!r}") from None


def get_followers(cfg: dict, key: str = "followers") -> dict[int, tuple[int, ...]]:
    """Parse "leader:f1+f2;leader2:f3" into {leader: (followers...)}."""
    raw = cfg.get(key, "")
    if raw == "":
        return {}
    result: dict[int, tuple[int, ...]] = {}
    try:
        for group in raw.split(";"):
            group = group.strip()
            if not group:
                continue
            leader, _, tail = group.partition(":")
            result[int(leader)] = tuple(int(f) for f in tail.split("+") if f)
    except ValueError:
        raise ConfigError(f"{key}: expected 'leader:f1+f2;...', got {raw!r}") from None
    return result


def get_pairs(cfg: dict, key: str) -> tuple[tuple[int, int], ...]:
    """Parse "0-1,2-3" into ((0, 1), (2, 3))."""
    raw = cfg.get(key, "")
    if raw == "":
        return ()
    pairs = []
    try:
        for token in raw.split(","):
            token = token.strip()
            if not token:
                continue
            a, _, b = token.partition("-")
            pairs.append((int(a), int(b)))
    except ValueError:
        raise ConfigError(f"{key}: expected 'a-b,c-d', got {raw!r}") from None
    return tuple(pairs)
