import logging
from abc import ABC, abstractmethod

from config_manager import RunConfig
from painleve_errors import OutOfValidity, PainleveError

log = logging.getLogger(__name__)


class BaseRegime(ABC):
    """Abstract base class for every asymptotic regime plugin."""

    tag = None

    def __init__(self, regime_name, run_config=None):
        self.regime_name = regime_name
        self.run_config = run_config or RunConfig()

    @abstractmethod
    def validity(self, t, eps):
        """
        Evaluates the regime's validity predicate.

        Returns:
            ValidityCheck: truth value, margin and the inequality tested.
        """

    @abstractmethod
    def _evaluate(self, t, eps):
        """Regime formula at (t, eps); may assume validity holds."""

    def evaluate(self, t, eps):
        """Gated evaluation: never returns a sample outside the validity domain."""
        check = self.validity(t, eps)
        if not check:
            raise OutOfValidity(f"[{self.regime_name}] {check.inequality}", check.margin)
        return self._evaluate(t, eps)

    def try_evaluate(self, t, eps):
        """Like evaluate, but logs the failure and returns None."""
        try:
            return self.evaluate(t, eps)
        except OutOfValidity as e:
            log.debug(f"[{self.regime_name}] t={t}: {e}")
            return None
        except PainleveError as e:
            log.warning(f"[{self.regime_name}] evaluation failed at t={t}, eps={eps}: {e}")
            return None

    def sweep(self, ts, eps):
        """Samples at every t of ts where the regime holds and evaluates cleanly."""
        samples = [s for s in (self.try_evaluate(t, eps) for t in ts) if s is not None]
        log.info(f"[{self.regime_name}] {len(samples)}/{len(ts)} points evaluated at eps={eps}")
        return samples
