import logging

from .base_regime import BaseRegime
from .layer_cache import trajectory_for
from p1_layer import InnerScale, inner1_eval, inner1_validity
from solution_sample import PAINLEVE, ValidityCheck

log = logging.getLogger(__name__)


class Inner1Regime(BaseRegime):
    """Region II: u* + eps^(2/5) v0(tau) + eps^(4/5) v1(tau) away from the poles."""

    tag = PAINLEVE

    def __init__(self, run_config=None):
        super().__init__(PAINLEVE, run_config)
        self._trajectory = None

    @property
    def trajectory(self):
        if self._trajectory is None:
            self._trajectory = trajectory_for(self.run_config)
            log.info(f"[{self.regime_name}] P1 trajectory with {len(self._trajectory.poles)} poles, "
                     f"tau in [{self._trajectory.seed_tau:.2f}, {self._trajectory.end_tau:.2f}]")
        return self._trajectory

    def validity(self, t, eps):
        rc = self.run_config
        far = abs(InnerScale(eps).tau_of_t(t)) * eps ** 0.8 if eps > 0 else 0.0
        if far > rc.tau_far:
            return ValidityCheck(False, far, f"|tau| eps^(4/5) < {rc.tau_far}")
        return inner1_validity(t, eps, self.trajectory, rc.m_pole, rc.tau_far)

    def _evaluate(self, t, eps):
        rc = self.run_config
        return inner1_eval(t, eps, self.trajectory, rc.m_pole, rc.tau_far)
