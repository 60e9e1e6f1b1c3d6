"""Single-trial execution: concurrent parallel priority dynamics and the
serial attentional phase machine.

Each iteration advances the clock by exactly 1 and consists of:

1. A parallel pass (skipped while an eye movement is in flight): each item
   independently draws its own sampled dimension set, every active item's priority
   decays and is boosted by its distance-weighted match to the template, and
   items whose priority falls below ``p_min`` are rejected.
2. One step of the serial phase machine:
   ``Selecting -> Shifting(covert) | MovingEyes(overt) -> Scrutinizing ->
   Accept / Reject -> Selecting``.  Selection consumes the first countdown
   tick of the attention shift it starts, so a covert inspection costs
   ``covert_cost + 1`` iterations from selection to verdict.  An overt
   inspection additionally pays ``eye_cost`` frozen iterations up front: the
   fixation jumps to the chosen item and the clock advances by ``eye_cost``
   with no processing of any kind, after which the attention shift proceeds
   normally (total ``eye_cost + covert_cost + 1``).  Scrutiny is an exact,
   role-tag-inclusive comparison and is the only path to acceptance.

Priorities are retained (frozen, not decayed) across the eye-movement window,
which elapses as a single clock jump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .features import FeatureClassification, classify_features
from .stimuli import SearchItem, TargetTemplate, with_role_tags

__all__ = [
    "EngineParams",
    "TrialResult",
    "distance_weight",
    "sample_dimensions",
    "pair_match_matrix",
    "parallel_match",
    "update_priority",
    "luce_select",
    "scrutinize",
    "run_trial",
]

# Serial phases.
SELECTING, SHIFTING, MOVING_EYES, SCRUTINIZING = range(4)
_PHASE_NAMES = ("Selecting", "Shifting", "MovingEyes", "Scrutinizing")

# Item states.
ACTIVE, REJECTED_PARALLEL, REJECTED_SERIAL, ACCEPTED = range(4)
_STATE_NAMES = ("Active", "RejectedParallel", "RejectedSerial", "Accepted")


@dataclass(frozen=True)
class EngineParams:
    """Model and display-geometry parameters with canonical defaults."""

    delta: float = 0.5              # priority decay factor per iteration
    tau: float = 3.0                # parallel match strength
    p_min: float = 0.001            # rejection threshold on priority
    d_max: float = 4.0              # processing horizon, visual-field radii
    w_present: float = 3.0          # match weight when the template has the feature
    w_absent: float = 0.1           # weight when only the item has it
    p_sample_relevant: float = 0.85
    p_sample_irrelevant: float = 0.15
    eye_cost: int = 30              # iterations per overt (eye) movement
    covert_cost: int = 2            # iterations per covert attention shift
    eyes_enabled: bool = True
    init_jitter: float = 0.1        # priorities start at 1 +- uniform jitter
    iteration_cap: int = 100_000
    # Display-geometry convention (the stimulus papers do not specify radii).
    ring_radius: float = 0.6
    ring_capacity: int = 12
    ring_gap: float = 0.85

    def __post_init__(self) -> None:
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must be in (0, 1)")
        if self.tau < 0 or self.p_min <= 0 or self.d_max <= 0:
            raise ValueError("tau, p_min, d_max must be positive")
        for p in (self.p_sample_relevant, self.p_sample_irrelevant):
            if not (0.0 <= p <= 1.0):
                raise ValueError("sampling probabilities must be in [0, 1]")

    def override(self, overrides: dict) -> "EngineParams":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown engine parameter(s): {sorted(unknown)}")
        return replace(self, **overrides)


@dataclass
class TrialResult:
    rt_iterations: int
    outcome: str  # TargetFound | AllRejected | IterationCap
    n_serial_inspections: int
    n_parallel_rejections: int
    fixation_trace: list[tuple[float, float]] = field(default_factory=list)


def distance_weight(position, fixation, d_max: float) -> float:
    """Eccentricity weight: 1 at fixation, linearly down to 0 at ``d_max``."""
    dx = position[0] - fixation[0]
    dy = position[1] - fixation[1]
    return max(0.0, 1.0 - math.hypot(dx, dy) / d_max)


def sample_dimensions(classification: FeatureClassification, params: EngineParams,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw the per-iteration sampled dimension set (bool mask).

    Relevant dimensions are sampled with ``p_sample_relevant``, irrelevant
    with ``p_sample_irrelevant``; absent dimensions are never sampled.
    """
    probs = np.where(classification.relevant, params.p_sample_relevant,
                     np.where(classification.irrelevant,
                              params.p_sample_irrelevant, 0.0))
    return rng.random(probs.shape[0]) < probs


def pair_match_matrix(item_parts: np.ndarray, template_parts: np.ndarray,
                      eta: np.ndarray, params: EngineParams) -> np.ndarray:
    """Per-dimension match contributions, summed over all role pairs.

    Binding is invisible to the parallel process: every template role vector
    is compared against every item role vector, so role-swapped items receive
    exactly the target's contributions.  Returns shape (n_items, n_dims);
    entry [i, k] is sum over pairs of m * w * eta_k.  Template-present
    dimensions score m = +1 on an exact value match and -1 otherwise, at
    weight w_present.  Template-absent dimensions score -1 at weight w_absent
    when the item carries the feature the template lacks, and nothing when
    both sides lack it: a shared absence is no evidence either way.
    """
    item_parts = np.asarray(item_parts, dtype=np.int8)
    template_parts = np.atleast_2d(np.asarray(template_parts, dtype=np.int8))
    n_items = item_parts.shape[0]
    n_dims = template_parts.shape[1]
    M = np.zeros((n_items, n_dims))
    for f in template_parts:
        w = np.where(f != 0, params.w_present, params.w_absent)
        for r in range(item_parts.shape[1]):
            v = item_parts[:, r, :]
            m = np.where(v == f[None, :], 1.0, -1.0)
            m[(v == 0) & (f[None, :] == 0)] = 0.0
            M += m * w[None, :]
    return M * np.asarray(eta, dtype=float)[None, :]


def _relevance_norm(classification: FeatureClassification, eta: np.ndarray) -> float:
    """Salience-weighted relevant-dimension count normalizing the match sum.

    Displays whose items all equal the template role-for-role (e.g. the
    target-only set size) have no relevant dimensions; the normalizer then
    falls back to 1 so the match remains defined.
    """
    total = float(np.sum(np.asarray(eta, dtype=float)[classification.relevant]))
    return total if total > 0.0 else 1.0


def parallel_match(item_parts: np.ndarray, template_parts: np.ndarray,
                   classification: FeatureClassification, sampled: np.ndarray,
                   eta: np.ndarray, params: EngineParams) -> float:
    """Match quality of one item against the template over the sampled set."""
    item_parts = np.atleast_2d(np.asarray(item_parts, dtype=np.int8))
    M = pair_match_matrix(item_parts[None, :, :], template_parts, eta, params)
    norm = _relevance_norm(classification, eta)
    return params.tau * float(M[0] @ np.asarray(sampled, dtype=float)) / norm


def update_priority(priority: float, eps: float, phi: float, rho: float,
                    params: EngineParams) -> float:
    """One parallel-pass priority update: decay plus distance-weighted boost."""
    return priority * (1.0 - params.delta) + eps * phi * rho


def luce_select(priorities: np.ndarray, epsilons: np.ndarray,
                rng: np.random.Generator) -> int | None:
    """Draw an index with probability proportional to priority x eccentricity
    weight; None when no candidate has positive weight."""
    weights = np.asarray(priorities, dtype=float) * np.asarray(epsilons, dtype=float)
    weights = np.where(weights > 0.0, weights, 0.0)
    total = weights.sum()
    if total <= 0.0:
        return None
    cumulative = np.cumsum(weights)
    return int(np.searchsorted(cumulative, rng.random() * total, side="right"))


def maybe_move_eyes(position, fixation, params: EngineParams,
                    rng: np.random.Generator) -> str:
    """Decide the attention-relocation mode for a newly chosen item.

    Overt (fixation-moving) with probability equal to the item's eccentricity
    weight, covert otherwise; always covert when eye movements are disabled.
    """
    if not params.eyes_enabled:
        return "Covert"
    eps = distance_weight(position, fixation, params.d_max)
    return "Overt" if rng.random() < eps else "Covert"


def scrutinize(item_parts: np.ndarray, template_parts: np.ndarray,
               layout) -> bool:
    """Strict serial comparison: every role-bound vector, role tags included."""
    return bool(np.array_equal(with_role_tags(item_parts, layout),
                               with_role_tags(template_parts, layout)))


class DegenerateDisplayError(ValueError):
    """Display has distractors yet no relevant dimension to sample."""


def run_trial(items: list[SearchItem], template: TargetTemplate,
              params: EngineParams, rng: np.random.Generator,
              trace: list | None = None) -> TrialResult:
    """Run one trial to termination; see the module docstring for the cycle.

    RNG draw order per unfrozen iteration: one block of sampled-dimension
    uniforms per item (items in display order), then one boost uniform (rho)
    per display item, then the selection and eye-movement uniforms when the
    phase machine selects.
    """
    layout = template.layout
    n = len(items)
    item_array = np.stack([it.parts for it in items]).astype(np.int8)
    classification = classify_features(template.parts, item_array)
    eta = template.salience.eta
    relsum = float(np.sum(eta[classification.relevant]))
    if relsum <= 0.0 and any(
            not np.array_equal(it.parts, template.parts) for it in items):
        raise DegenerateDisplayError(
            "display has non-matching items but no relevant dimensions")
    norm = relsum if relsum > 0.0 else 1.0

    sample_probs = np.where(classification.relevant, params.p_sample_relevant,
                            np.where(classification.irrelevant,
                                     params.p_sample_irrelevant, 0.0))
    M = pair_match_matrix(item_array, template.parts, eta, params)
    positions = np.stack([it.position for it in items])

    priorities = 1.0 + rng.uniform(-params.init_jitter, params.init_jitter, n)
    states = np.full(n, ACTIVE, dtype=np.int8)
    fixation = np.zeros(2)
    eps = np.maximum(0.0, 1.0 - np.hypot(positions[:, 0] - fixation[0],
                                         positions[:, 1] - fixation[1]) / params.d_max)

    clock = 0
    phase = SELECTING
    attended = -1
    remaining = 0
    n_inspections = 0
    n_parallel_rejections = 0
    fixation_trace = [(0.0, 0.0)]

    tau_over_norm = params.tau / norm
    one_minus_delta = 1.0 - params.delta

    def finish(rt: int, outcome: str) -> TrialResult:
        for i, it in enumerate(items):
            it.priority = float(priorities[i])
            it.state = _STATE_NAMES[states[i]]
        return TrialResult(rt, outcome, n_inspections, n_parallel_rejections,
                           fixation_trace)

    def emit_trace(event: str) -> None:
        if trace is not None:
            trace.append({
                "iteration": clock,
                "phase": _PHASE_NAMES[phase],
                "event": event,
                "attended": attended,
                "fixation_x": float(fixation[0]),
                "fixation_y": float(fixation[1]),
                "priorities": ";".join(f"{p:.6g}" for p in priorities),
                "states": ";".join(_STATE_NAMES[s] for s in states),
            })

    while True:
        if clock >= params.iteration_cap:
            return finish(clock, "IterationCap")

        sampled = rng.random((n, sample_probs.shape[0])) < sample_probs[None, :]
        phi = tau_over_norm * (M * sampled).sum(axis=1)
        rho = rng.random(n)
        alive = states == ACTIVE
        priorities[alive] = (priorities[alive] * one_minus_delta
                             + eps[alive] * phi[alive] * rho[alive])
        dropped = alive & (priorities < params.p_min)
        if dropped.any():
            states[dropped] = REJECTED_PARALLEL
            n_parallel_rejections += int(dropped.sum())
            if attended >= 0 and states[attended] != ACTIVE:
                # The item under scrutiny fell out of the race; restart.
                attended = -1
                phase = SELECTING
                remaining = 0
        emit_trace("parallel")

        if phase == SELECTING:
            weights = np.where(states == ACTIVE, priorities * eps, 0.0)
            weights = np.where(weights > 0.0, weights, 0.0)
            total = weights.sum()
            if total <= 0.0:
                emit_trace("all_rejected")
                return finish(clock + 1, "AllRejected")
            cumulative = np.cumsum(weights)
            attended = int(np.searchsorted(cumulative, rng.random() * total,
                                           side="right"))
            n_inspections += 1
            if maybe_move_eyes(positions[attended], fixation, params,
                               rng) == "Overt":
                # Frozen eye-movement window: the fixation jumps and the
                # clock pays eye_cost with no processing of any kind.
                phase = MOVING_EYES
                fixation = positions[attended].copy()
                eps = np.maximum(0.0, 1.0 - np.hypot(
                    positions[:, 0] - fixation[0],
                    positions[:, 1] - fixation[1]) / params.d_max)
                fixation_trace.append((float(fixation[0]), float(fixation[1])))
                clock += params.eye_cost
            else:
                phase = SHIFTING
            # The attention shift follows; selection consumes its first tick.
            remaining = params.covert_cost - 1
            if remaining == 0:
                phase = SCRUTINIZING
            emit_trace("select")
        elif phase in (SHIFTING, MOVING_EYES):
            remaining -= 1
            if remaining == 0:
                phase = SCRUTINIZING
            emit_trace("shift")
        elif phase == SCRUTINIZING:
            if scrutinize(items[attended].parts, template.parts, layout):
                states[attended] = ACCEPTED
                emit_trace("accept")
                return finish(clock + 1, "TargetFound")
            states[attended] = REJECTED_SERIAL
            emit_trace("reject")
            attended = -1
            phase = SELECTING

        clock += 1
