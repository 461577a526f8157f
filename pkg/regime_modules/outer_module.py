import logging

from .base_regime import BaseRegime
from outer_expansion import outer_eval, outer_validity
from solution_sample import OUTER

log = logging.getLogger(__name__)


class OuterRegime(BaseRegime):
    """Region I: u0 + eps^2 u1c + eps^4 u2c on the stable least branch."""

    tag = OUTER

    def __init__(self, run_config=None):
        super().__init__(OUTER, run_config)

    def validity(self, t, eps):
        rc = self.run_config
        return outer_validity(t, eps, rc.m_outer, rc.a_default)

    def _evaluate(self, t, eps):
        rc = self.run_config
        return outer_eval(t, eps, rc.m_outer, rc.a_default)
