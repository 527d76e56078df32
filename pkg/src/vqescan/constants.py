"""Physical constants, unit conversions and per-element data.

Internal length unit is Bohr throughout the package; file I/O (XYZ) is in
Angstrom. Energies are Hartree unless a conversion is explicit.
"""

BOHR_PER_ANGSTROM = 1.8897259886
ANGSTROM_PER_BOHR = 1.0 / BOHR_PER_ANGSTROM

HARTREE_TO_KJMOL = 2625.4996394799

# symbol -> (atomic number, mass in amu). Masses are standard atomic weights.
ELEMENTS = {
    "H": (1, 1.00782503207),
    "He": (2, 4.002602),
    "Li": (3, 6.94),
    "Be": (4, 9.0121831),
    "B": (5, 10.81),
    "C": (6, 12.011),
    "N": (7, 14.007),
    "O": (8, 15.999),
    "F": (9, 18.998403163),
    "Ne": (10, 20.1797),
    "Na": (11, 22.98976928),
    "Mg": (12, 24.305),
    "Al": (13, 26.9815385),
    "Si": (14, 28.085),
    "P": (15, 30.973761998),
    "S": (16, 32.06),
    "Cl": (17, 35.45),
    "Ar": (18, 39.948),
    "K": (19, 39.0983),
    "Ca": (20, 40.078),
    "Br": (35, 79.904),
    "I": (53, 126.90447),
}

_BY_NUMBER = {z: sym for sym, (z, _) in ELEMENTS.items()}


def element_data(symbol: str) -> tuple[int, float]:
    """Return (atomic_number, mass) for a chemical symbol; KeyError if unknown."""
    key = symbol.strip().capitalize()
    if key not in ELEMENTS:
        raise KeyError(f"unknown element symbol {symbol!r}")
    return ELEMENTS[key]


def element_symbol(atomic_number: int) -> str:
    return _BY_NUMBER[atomic_number]
