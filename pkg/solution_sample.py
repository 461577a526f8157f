"""The common output row of every evaluator, the oracle and the exporters."""
from dataclasses import dataclass, field

# Regime tags used on SolutionSample.regime.
OUTER = "OuterI"
PAINLEVE = "PainleveII"
POLE = "PoleIII"
ELLIPTIC = "EllipticII_inf"
KUZMAK = "KuzmakIV"
ORACLE = "Oracle"

REGIME_TAGS = (OUTER, PAINLEVE, POLE, ELLIPTIC, KUZMAK)


def overlap_tag(a, b):
    return f"Overlap({a},{b})"


@dataclass(frozen=True)
class SolutionSample:
    t: float
    u: float
    regime: str
    residual: float
    source: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def as_row(self):
        return {'t': self.t, 'u': self.u, 'regime': self.regime,
                'residual': self.residual, 'source': self.source}


@dataclass(frozen=True)
class ValidityCheck:
    """Outcome of a validity predicate: truth value, measured margin, inequality text."""
    ok: bool
    margin: float
    inequality: str

    def __bool__(self):
        return bool(self.ok)
