"""FCIDUMP reading and writing.

Free-format records ``value i j k l`` with 1-based indices and
chemist-notation two-electron values; ``(i j 0 0)`` records carry the
one-electron matrix and ``(0 0 0 0)`` the core/nuclear energy. Both the
``&FCI ... &END`` namelist header and bare ``NORB=...`` headers are accepted.
"""
from __future__ import annotations

import re

import numpy as np

from .integrals import IntegralSet


class FcidumpError(ValueError):
    """Malformed FCIDUMP content."""


_HEADER_FIELD = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^,\s/]+)")


def parse_fcidump(text: str) -> IntegralSet:
    """Parse FCIDUMP text into an IntegralSet.

    Every record fills all eight permutation images of the two-electron
    tensor; unlisted integrals are zero. A duplicate record whose value
    conflicts with an earlier one (beyond 1e-10) is an error.
    """
    lines = text.splitlines()
    header_parts: list[str] = []
    body_start = 0
    in_header = True
    for idx, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        if in_header:
            header_parts.append(stripped)
            first = stripped.split()[0]
            # A data record starts with a number; header lines carry KEY=VALUE.
            try:
                float(first)
            except ValueError:
                if stripped.endswith(("&END", "/")) or stripped in ("&END", "/"):
                    body_start = idx + 1
                    in_header = False
                continue
            header_parts.pop()
            body_start = idx
            in_header = False
            break
    fields = {}
    for part in header_parts:
        for key, value in _HEADER_FIELD.findall(part):
            fields[key.upper()] = value
    if "NORB" not in fields:
        raise FcidumpError("header is missing NORB")
    if "NELEC" not in fields:
        raise FcidumpError("header is missing NELEC")
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
        int(fields.get("MS2", "0"))
    except ValueError as exc:
        raise FcidumpError(f"bad header field: {exc}") from None
    if norb < 1:
        raise FcidumpError(f"NORB must be positive, got {norb}")

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    h_seen = np.zeros((norb, norb), dtype=bool)
    g_seen = np.zeros((norb, norb, norb, norb), dtype=bool)
    e_core = 0.0
    core_seen = False

    for n, line in enumerate(lines[body_start:], start=body_start + 1):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 5:
            raise FcidumpError(f"line {n}: expected 'value i j k l', got {stripped!r}")
        try:
            # Fortran writers may emit D exponents.
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FcidumpError(f"line {n}: malformed record {stripped!r}") from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"line {n}: orbital index {idx} out of range 0..{norb}")
        if i == j == k == l == 0:
            if core_seen and abs(e_core - value) > 1e-10:
                raise FcidumpError(f"line {n}: conflicting core energy record")
            e_core = value
            core_seen = True
        elif k == 0 and l == 0:
            if j == 0:
                continue  # (i,0,0,0) orbital-energy record: accepted, ignored
            if i == 0:
                raise FcidumpError(f"line {n}: one-electron record with zero index")
            p, q = i - 1, j - 1
            if h_seen[p, q] and abs(h[p, q] - value) > 1e-10:
                raise FcidumpError(f"line {n}: conflicting one-electron record ({i},{j})")
            h[p, q] = h[q, p] = value
            h_seen[p, q] = h_seen[q, p] = True
        elif 0 in (i, j, k, l):
            raise FcidumpError(f"line {n}: two-electron record with zero index")
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            images = ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                      (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p))
            if g_seen[p, q, r, s] and abs(g[p, q, r, s] - value) > 1e-10:
                raise FcidumpError(
                    f"line {n}: conflicting two-electron record ({i},{j},{k},{l})")
            for img in images:
                g[img] = value
                g_seen[img] = True
    return IntegralSet(norb, h, g, e_core, nelec)


def format_fcidump(ints: IntegralSet, ms2: int = 0) -> str:
    """Render an IntegralSet as FCIDUMP text (16 significant digits).

    Only the canonical representative of each 8-fold-symmetric two-electron
    value is written; zeros are skipped.
    """
    m = ints.n_spatial
    out = [f" &FCI NORB={m:4d},NELEC={ints.n_electrons:3d},MS2={ms2:d},",
           "  ORBSYM=" + "1," * m,
           "  ISYM=1,",
           " &END"]
    fmt = "{0: .16e} {1:4d} {2:4d} {3:4d} {4:4d}"
    for i in range(m):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = ints.g[i, j, k, l]
                    if abs(val) > 1e-16:
                        out.append(fmt.format(val, i + 1, j + 1, k + 1, l + 1))
    for i in range(m):
        for j in range(i + 1):
            if abs(ints.h[i, j]) > 1e-16:
                out.append(fmt.format(ints.h[i, j], i + 1, j + 1, 0, 0))
    out.append(fmt.format(ints.e_nn, 0, 0, 0, 0))
    return "\n".join(out) + "\n"


def load_fcidump(path) -> IntegralSet:
    with open(path, encoding="utf-8") as fh:
        return parse_fcidump(fh.read())


def save_fcidump(ints: IntegralSet, path, ms2: int = 0) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_fcidump(ints, ms2))
