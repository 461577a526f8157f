"""Regime classification and composite evaluation over the loaded plugins."""
import logging
from dataclasses import replace
from importlib import import_module

import config_manager as cfg
from painleve_errors import NoValidRegime, PainleveError
from regime_matcher import normalize_regime, suggest
from regime_modules.base_regime import BaseRegime
from solution_sample import ELLIPTIC, KUZMAK, OUTER, PAINLEVE, POLE, overlap_tag

log = logging.getLogger(__name__)

# innermost first
PRECEDENCE = (POLE, PAINLEVE, ELLIPTIC, OUTER, KUZMAK)


def load_regime_modules(names=None, run_config=None):
    """Dynamically loads the enabled regime plugins.

    Returns:
        dict: plugin name -> BaseRegime instance, in config order.
    """
    regimes = {}
    names = names if names is not None else cfg.get_enabled_regimes()
    if not names:
        log.warning("No regimes enabled in config.ini. Nothing to evaluate.")
        return regimes

    for raw in names:
        name = normalize_regime(raw)
        if name is None:
            hint = suggest(raw, cfg.DEFAULT_REGIMES)
            extra = f" Did you mean '{hint}'?" if hint else ""
            log.error(f"Unknown regime '{raw}'.{extra} Skipping.")
            continue
        module_name = f"regime_modules.{name}_module"
        class_name = f"{name.capitalize()}Regime"
        try:
            module = import_module(module_name)
            regime_class = getattr(module, class_name)
            if issubclass(regime_class, BaseRegime):
                regimes[name] = regime_class(run_config)
                log.debug(f"Loaded regime module: {name}")
            else:
                log.error(f"Class '{class_name}' in '{module_name}' does not inherit from BaseRegime. Skipping.")
        except ImportError as e:
            log.error(f"ImportError importing module '{module_name}': {e}. Skipping regime '{name}'.", exc_info=True)
        except AttributeError:
            log.error(f"Could not find class '{class_name}' in module '{module_name}'. Skipping regime '{name}'.")
    if not regimes:
        log.error("No regime modules loaded successfully. Check configuration and logs.")
    return regimes


def _rank(tag):
    return PRECEDENCE.index(tag) if tag in PRECEDENCE else len(PRECEDENCE)


def valid_regimes(t, eps, regimes):
    """Plugins whose validity predicate holds at (t, eps), innermost first."""
    holding = []
    for regime in regimes.values():
        try:
            check = regime.validity(t, eps)
        except PainleveError as e:
            log.warning(f"[{regime.regime_name}] validity check failed at t={t}: {e}")
            continue
        if check:
            holding.append(regime)
    return sorted(holding, key=lambda r: _rank(r.tag))


def classify(t, eps, regimes):
    """RegimeTag at (t, eps): a single tag, or Overlap(a, b) with a the innermost.

    Raises:
        NoValidRegime: no validity predicate holds.
    """
    holding = valid_regimes(t, eps, regimes)
    if not holding:
        raise NoValidRegime(f"no asymptotic regime is valid at t={t!r}, eps={eps!r}")
    if len(holding) == 1:
        return holding[0].tag
    return overlap_tag(holding[0].tag, holding[1].tag)


def composite_eval(t, eps, regimes):
    """Evaluates every valid regime at (t, eps) and returns the smallest-residual sample.

    The returned sample records the classification tag and every candidate
    (u, residual) in `extra`.

    Raises:
        NoValidRegime: no regime is valid at (t, eps).
        PainleveError: every valid regime failed; the last failure is re-raised.
    """
    tag = classify(t, eps, regimes)
    candidates = {}
    best, last_error = None, None
    for regime in valid_regimes(t, eps, regimes):
        try:
            sample = regime.evaluate(t, eps)
        except PainleveError as e:
            log.error(f"[{regime.regime_name}] failed at t={t}, eps={eps}: {e}", exc_info=True)
            last_error = e
            continue
        candidates[regime.tag] = (sample.u, sample.residual)
        if best is None or sample.residual < best.residual:
            best = sample
    if best is None:
        raise last_error
    extra = dict(best.extra, tag=tag, candidates=candidates)
    return replace(best, extra=extra)


def composite_sweep(ts, eps, regimes):
    """composite_eval over ts; points in a validity gap are logged and skipped.

    Returns:
        (list of SolutionSample, list of t where no regime holds)
    """
    samples, gaps = [], []
    for t in ts:
        try:
            samples.append(composite_eval(t, eps, regimes))
        except NoValidRegime as e:
            log.warning(str(e))
            gaps.append(t)
        except PainleveError as e:
            log.error(f"composite evaluation failed at t={t}: {e}")
            gaps.append(t)
    log.info(f"composite sweep at eps={eps}: {len(samples)} samples, {len(gaps)} gaps")
    return samples, gaps


def boundary_jumps(samples):
    """(t, |u jump|, residual sum) at each handover between winning regimes.

    Both regimes are compared at one t, using the candidates that
    composite_eval recorded at the neighbour where both hold.  A handover
    across a validity gap has no such point and is skipped.
    """
    out = []
    for a, b in zip(samples, samples[1:]):
        if a.regime == b.regime:
            continue
        for s in (a, b):
            candidates = s.extra.get('candidates', {})
            if a.regime in candidates and b.regime in candidates:
                (ua, ra), (ub, rb) = candidates[a.regime], candidates[b.regime]
                out.append((s.t, abs(ub - ua), ra + rb))
                break
        else:
            log.debug(f"{a.regime} -> {b.regime} between t={a.t:.6f} and t={b.t:.6f} has no common point")
    return out
