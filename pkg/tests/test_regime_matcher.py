import pytest

from config_manager import DEFAULT_REGIMES
from main_painleve import COMMANDS
from regime_matcher import normalize_regime, suggest


@pytest.mark.parametrize("raw, name", [
    ("outer", "outer"),
    (" OuterI ", "outer"),
    ("PainleveII", "inner1"),
    ("pole", "inner2"),
    ("EllipticII_inf", "elliptic"),
    ("ellipticII-inf", "elliptic"),
    ("Whitham", "kuzmak"),
    ("region 1", "outer"),
])
def test_aliases(raw, name):
    assert normalize_regime(raw) == name


def test_unknown_alias():
    assert normalize_regime("oracle") is None


def test_suggest_close_match():
    assert suggest("kuzmack", DEFAULT_REGIMES) == "kuzmak"
    assert suggest("Figure1", COMMANDS) == "figure1"
    assert suggest("compsite", COMMANDS) == "composite"


def test_suggest_nothing_close():
    assert suggest("zzz", DEFAULT_REGIMES) is None
    assert suggest("", DEFAULT_REGIMES) is None
    assert suggest("outer", []) is None
