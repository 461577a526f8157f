import logging

from .base_regime import BaseRegime
from .layer_cache import trajectory_for
from painleve_errors import OutOfRange
from p1_layer import InnerScale
from pole_layer import PoleLayerFrame, inner2_eval, inner2_validity
from solution_sample import POLE, ValidityCheck

log = logging.getLogger(__name__)


class Inner2Regime(BaseRegime):
    """Region III: the pole layer around the nearest tabulated P1 pole."""

    tag = POLE

    def __init__(self, run_config=None):
        super().__init__(POLE, run_config)
        self._frames = None
        # pins evaluation to one pole (k) instead of the nearest
        self.pole_index = None

    @property
    def frames(self):
        if self._frames is None:
            poles = trajectory_for(self.run_config).poles
            self._frames = tuple(PoleLayerFrame.from_pole(p) for p in poles)
        return self._frames

    def frame_near(self, t, eps):
        if not self.frames:
            return None
        if self.pole_index is not None:
            for f in self.frames:
                if f.k == self.pole_index:
                    return f
            raise OutOfRange(f"pole {self.pole_index} is not in the table of {len(self.frames)} poles")
        tau = InnerScale(eps).tau_of_t(t)
        return min(self.frames, key=lambda f: abs(tau - f.tau_k))

    def validity(self, t, eps):
        if eps <= 0:
            return ValidityCheck(False, 0.0, "eps > 0")
        far = abs(InnerScale(eps).tau_of_t(t)) * eps ** 0.8
        if far > self.run_config.tau_far:
            return ValidityCheck(False, far, f"|tau| eps^(4/5) < {self.run_config.tau_far}")
        frame = self.frame_near(t, eps)
        if frame is None:
            return ValidityCheck(False, 0.0, "pole table is empty")
        return inner2_validity(t, eps, frame, self.run_config.m_inner2)

    def _evaluate(self, t, eps):
        return inner2_eval(t, eps, self.frame_near(t, eps), self.run_config.m_inner2)
