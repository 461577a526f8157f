import logging

from thefuzz import fuzz, process

log = logging.getLogger(__name__)

# Aliases accepted for regime names in config.ini and on the command line.
REGIME_ALIASES = {
    'outer': 'outer', 'outeri': 'outer', 'region1': 'outer',
    'inner1': 'inner1', 'painleveii': 'inner1', 'painleve': 'inner1', 'p1': 'inner1',
    'inner2': 'inner2', 'poleiii': 'inner2', 'pole': 'inner2',
    'elliptic': 'elliptic', 'ellipticii_inf': 'elliptic', 'boutroux': 'elliptic',
    'kuzmak': 'kuzmak', 'kuzmakiv': 'kuzmak', 'whitham': 'kuzmak',
}


def suggest(name, choices, min_ratio=70):
    """
    Closest entry of `choices` to a mistyped `name` using fuzzy string matching.

    Args:
        name (str): the name as typed.
        choices (iterable of str): valid names.
        min_ratio (int): minimum fuzz.ratio (0-100) for a suggestion.

    Returns:
        str or None: best match, or None when nothing is close enough.
    """
    choices = list(choices)
    if not choices or not name:
        return None
    best, ratio = process.extractOne(name.lower(), choices, scorer=fuzz.ratio)
    log.debug(f"Fuzz check: best match for '{name}' is '{best}' (ratio={ratio}, min={min_ratio})")
    return best if ratio >= min_ratio else None


def normalize_regime(name):
    """Canonical plugin name for a regime name or alias, or None."""
    key = name.strip().lower().replace(' ', '').replace('-', '_')
    return REGIME_ALIASES.get(key)
