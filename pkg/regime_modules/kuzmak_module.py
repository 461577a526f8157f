import logging

from .base_regime import BaseRegime
from .layer_cache import modulation_table_for
from kuzmak import kuzmak_eval, kuzmak_validity
from solution_sample import KUZMAK

log = logging.getLogger(__name__)


class KuzmakRegime(BaseRegime):
    """Region IV: modulated oscillations around the lost equilibrium."""

    tag = KUZMAK

    def __init__(self, run_config=None):
        super().__init__(KUZMAK, run_config)

    def validity(self, t, eps):
        rc = self.run_config
        return kuzmak_validity(t, eps, rc.m_kuz, rc.a_default)

    def _evaluate(self, t, eps):
        rc = self.run_config
        return kuzmak_eval(t, eps, modulation_table_for(rc), rc.m_kuz, rc.a_default)
