import logging

from .base_regime import BaseRegime
from .layer_cache import elliptic_setup_for
from boutroux import TAU_MIN, elliptic_leading_eval, elliptic_validity
from p1_layer import InnerScale
from solution_sample import ELLIPTIC, ValidityCheck

log = logging.getLogger(__name__)


class EllipticRegime(BaseRegime):
    """Region II at large tau: Boutroux elliptic asymptotics of the P1 layer."""

    tag = ELLIPTIC

    def __init__(self, run_config=None):
        super().__init__(ELLIPTIC, run_config)

    def validity(self, t, eps):
        if eps <= 0:
            return ValidityCheck(False, 0.0, "eps > 0")
        rc = self.run_config
        tau = InnerScale(eps).tau_of_t(t)
        # cheap range gate before the Boutroux and P1 setup
        if tau < TAU_MIN:
            return ValidityCheck(False, tau, f"tau >= {TAU_MIN}")
        if tau * eps ** 0.8 > rc.tau_far:
            return ValidityCheck(False, tau * eps ** 0.8, f"tau eps^(4/5) < {rc.tau_far}")
        params, offset, _ = elliptic_setup_for(rc, eps)
        return elliptic_validity(t, eps, params, offset, rc.m_pole, TAU_MIN, rc.tau_far)

    def _evaluate(self, t, eps):
        rc = self.run_config
        params, offset, table = elliptic_setup_for(rc, eps)
        return elliptic_leading_eval(t, eps, params, table, offset, rc.m_pole, TAU_MIN, rc.tau_far)
