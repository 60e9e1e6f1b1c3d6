"""Executable experiment presets and the virtual-subject runner.

Each preset returns a fully resolved :class:`ExperimentSpec`.  Running an
experiment executes every (condition x set size x subject) cell with a private
RNG stream derived from ``(master seed, subject, condition index, trial
index)``, where the trial index enumerates trials across the set-size sweep
(``set_size_index * trials_per_cell + trial``).  Results are therefore a pure
function of (spec, seed), independent of execution schedule or worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import EngineParams, TrialResult, run_trial
from .features import SalienceMap, UnknownNameError, VectorLayout
from .stimuli import (
    ConditionSpec,
    ExperimentSpec,
    ItemDef,
    SearchItem,
    TargetTemplate,
    attach_emergent,
    attach_higher_order,
    item_parts,
    layout_for_experiment,
    layout_radial,
)

__all__ = [
    "PRESET_IDS",
    "preset",
    "CellResult",
    "CompiledCondition",
    "compile_conditions",
    "run_experiment",
    "results_csv",
    "aggregate_csv",
]

PRESET_IDS = tuple(f"sim{i}" for i in range(1, 11))


def _item(color: str, shape: str) -> ItemDef:
    return ItemDef(parts=((color, shape),))


def _rel(above_part: tuple[str, str], below_part: tuple[str, str]) -> ItemDef:
    return ItemDef(parts=(above_part, below_part), relation="above")


def _relational_conditions(x_color: str, o_color: str, off_x_color: str,
                           off_o_color: str, *, emergent: float | None = None,
                           emergent_only_relation: bool = False,
                           suffix: str = "") -> list[ConditionSpec]:
    """The three relational search conditions shared by the later presets.

    The target is always an X above an O.  Relation-only swaps the role
    bindings; Feature-only substitutes off-hue fillers; relation+feature does
    both.
    """
    target = _rel((x_color, "X"), (o_color, "O"))
    e_other = None if emergent_only_relation else emergent
    return [
        ConditionSpec(name="relation_only" + suffix, target=target,
                      distractors=(_rel((o_color, "O"), (x_color, "X")),),
                      emergent=emergent),
        ConditionSpec(name="feature_only" + suffix, target=target,
                      distractors=(_rel((off_x_color, "X"), (o_color, "O")),),
                      emergent=e_other),
        ConditionSpec(name="relation_feature" + suffix, target=target,
                      distractors=(_rel((o_color, "O"), (off_x_color, "X")),),
                      emergent=e_other),
    ]


def preset(sim_id: str) -> ExperimentSpec:
    """Exact configuration of one of the ten shipped simulations."""
    if sim_id == "sim1":
        # Feature vs. conjunction search among mixed distractors.  The
        # conjunction target's green is encoded with the dark-green row so
        # that it shares its full color vector with the green-X distractors.
        distractors = (_item("dark-green", "X"), _item("brown", "T1"))
        conditions = (
            ConditionSpec(name="feature", target=_item("blue", "X"),
                          distractors=distractors),
            ConditionSpec(name="conjunction", target=_item("dark-green", "T1"),
                          distractors=distractors),
        )
        # Dense display geometry: this study's displays pack items tightly
        # around fixation, which keeps eccentricity weights (and therefore
        # overt-movement rates) high at the larger set sizes.
        return ExperimentSpec(name="sim1", conditions=conditions,
                              set_sizes=(1, 5, 15, 30), trials_per_cell=52,
                              n_subjects=100, seed=1,
                              params={"ring_radius": 0.45, "ring_gap": 0.1})
    if sim_id == "sim2":
        conditions = (
            ConditionSpec(name="conjunction", target=_item("green", "horizontal"),
                          distractors=(_item("green", "vertical"),
                                       _item("red", "horizontal"))),
            ConditionSpec(name="feature", target=_item("green", "horizontal"),
                          distractors=(_item("red", "vertical"),)),
        )
        return ExperimentSpec(name="sim2", conditions=conditions,
                              set_sizes=(1, 3, 5, 9, 17, 25, 37),
                              trials_per_cell=52, n_subjects=100, seed=2)
    if sim_id == "sim3":
        shape_boost = (("shape", 1.5),)
        target = _item("red", "vertical")
        conditions = (
            ConditionSpec(name="low", target=target, salience=shape_boost,
                          distractors=(_item("light-blue", "horizontal"),)),
            ConditionSpec(name="intermediate", target=target, salience=shape_boost,
                          distractors=(_item("yellow", "vertical"),)),
            ConditionSpec(name="high", target=target, salience=shape_boost,
                          distractors=(_item("orange", "vertical"),)),
        )
        return ExperimentSpec(name="sim3", conditions=conditions,
                              set_sizes=(1, 2, 5, 10, 20, 32),
                              trials_per_cell=52, n_subjects=100, seed=3)
    if sim_id == "sim4":
        conditions = (
            ConditionSpec(name="extra_feature", target=_item("white", "Q"),
                          distractors=(_item("white", "O"),)),
            ConditionSpec(name="no_extra_feature", target=_item("white", "O"),
                          distractors=(_item("white", "Q"),)),
        )
        return ExperimentSpec(name="sim4", conditions=conditions,
                              set_sizes=(1, 6, 12), trials_per_cell=52,
                              n_subjects=100, seed=4)
    if sim_id == "sim5":
        conditions = [
            ConditionSpec(name="none", target=_item("none", "diag45"),
                          distractors=(_item("none", "diag135"),)),
        ]
        # The unit-count sweep: n extra units yield a 2n:1 strength ratio of
        # the higher-order block to a single low-level unit.
        for n in (16, 32, 64, 128):
            ratio = 2 * n
            conditions.append(ConditionSpec(
                name=f"good_{ratio}", target=_item("none", "G1"),
                distractors=(_item("none", "G2"),),
                higher_order=("arrow", "triangle", n)))
            conditions.append(ConditionSpec(
                name=f"poor_{ratio}", target=_item("none", "P1"),
                distractors=(_item("none", "P2"),),
                higher_order=("triangle", "triangle", n)))
        return ExperimentSpec(name="sim5", conditions=tuple(conditions),
                              set_sizes=(1, 2, 4, 6), trials_per_cell=100,
                              n_subjects=64, seed=5)
    if sim_id == "sim6":
        return ExperimentSpec(
            name="sim6",
            conditions=tuple(_relational_conditions("red", "green", "orange", "green")),
            set_sizes=(1, 2, 4, 8, 16), trials_per_cell=52, n_subjects=32, seed=6)
    if sim_id == "sim7":
        return ExperimentSpec(
            name="sim7",
            conditions=tuple(_relational_conditions("red", "red", "orange", "orange")),
            set_sizes=(1, 2, 4, 8, 16), trials_per_cell=52, n_subjects=32, seed=7)
    if sim_id == "sim8":
        conditions = (
            _relational_conditions("red", "green", "orange", "green",
                                   emergent=1.0, suffix="_eta100")
            + _relational_conditions("red", "green", "orange", "green",
                                     emergent=0.33, suffix="_eta033"))
        return ExperimentSpec(name="sim8", conditions=tuple(conditions),
                              set_sizes=(1, 2, 4, 8, 16), trials_per_cell=52,
                              n_subjects=32, seed=8)
    if sim_id == "sim9":
        conditions = (
            _relational_conditions("red", "red", "orange", "orange",
                                   emergent=1.0, suffix="_all")
            + _relational_conditions("red", "red", "orange", "orange",
                                     emergent=1.0, emergent_only_relation=True,
                                     suffix="_sel"))
        return ExperimentSpec(name="sim9", conditions=tuple(conditions),
                              set_sizes=(1, 2, 4, 8, 16), trials_per_cell=52,
                              n_subjects=32, seed=9)
    if sim_id == "sim10":
        return ExperimentSpec(
            name="sim10",
            conditions=tuple(_relational_conditions("red", "green", "orange", "green",
                                                    emergent=0.33)),
            set_sizes=(1, 2, 4, 8, 16), trials_per_cell=52, n_subjects=32,
            seed=10, params={"p_sample_relevant": 0.95})
    raise ValueError(f"unknown preset id: {sim_id!r}")


@dataclass
class CompiledCondition:
    """A condition resolved to concrete vectors ready for trial execution."""

    index: int
    name: str
    layout: VectorLayout
    template: TargetTemplate
    target_parts: np.ndarray
    distractor_parts: list[np.ndarray]


def compile_conditions(spec: ExperimentSpec) -> list[CompiledCondition]:
    layout = layout_for_experiment(spec)
    compiled = []
    for index, cond in enumerate(spec.conditions):
        salience = SalienceMap(layout)
        for label, factor in cond.salience:
            try:
                salience.scale_segment(label, factor)
            except UnknownNameError:
                salience.scale_dimension(label, factor)
        target_parts = item_parts(cond.target, layout)
        distractor_parts = [item_parts(d, layout) for d in cond.distractors]
        if cond.higher_order is not None:
            kind_t, kind_d, n = cond.higher_order
            attach_higher_order(target_parts, kind_t, n, layout)
            for parts in distractor_parts:
                attach_higher_order(parts, kind_d, n, layout)
        template = TargetTemplate(layout=layout, parts=target_parts.copy(),
                                  salience=salience)
        if cond.emergent is not None:
            pseudo = [SearchItem(parts=target_parts, position=np.zeros(2),
                                 is_target=True)]
            pseudo += [SearchItem(parts=parts, position=np.zeros(2))
                       for parts in distractor_parts]
            attach_emergent(pseudo, template, cond.emergent)
        compiled.append(CompiledCondition(
            index=index, name=cond.name, layout=layout, template=template,
            target_parts=target_parts, distractor_parts=distractor_parts))
    return compiled


def _distractor_counts(n_distractors: int, n_types: int) -> list[int]:
    base, extra = divmod(n_distractors, n_types)
    return [base + (1 if k < extra else 0) for k in range(n_types)]


def run_one_trial(cond: CompiledCondition, set_size: int, params: EngineParams,
                  rng: np.random.Generator, trace: list | None = None) -> TrialResult:
    geometry = layout_radial(set_size, rng, ring_radius=params.ring_radius,
                             ring_capacity=params.ring_capacity,
                             ring_gap=params.ring_gap, d_max=params.d_max)
    slot_of = rng.permutation(set_size)
    items = [SearchItem(parts=cond.target_parts,
                        position=geometry.positions[slot_of[0]], is_target=True)]
    counts = _distractor_counts(set_size - 1, len(cond.distractor_parts))
    j = 1
    for parts, count in zip(cond.distractor_parts, counts):
        for _ in range(count):
            items.append(SearchItem(parts=parts,
                                    position=geometry.positions[slot_of[j]]))
            j += 1
    return run_trial(items, cond.template, params, rng, trace=trace)


@dataclass
class CellResult:
    """All trials of one (condition, set size, subject) cell."""

    condition: str
    condition_index: int
    set_size: int
    subject: int
    rts: list[int]
    outcomes: list[str]

    @property
    def mean_rt(self) -> float:
        return float(np.mean(self.rts))

    @property
    def n_timeout(self) -> int:
        return sum(1 for o in self.outcomes if o == "IterationCap")


def trial_rng(seed: int, subject: int, condition_index: int,
              trial_index: int) -> np.random.Generator:
    """The documented RNG stream-splitting rule."""
    return np.random.default_rng(
        np.random.SeedSequence([seed, subject, condition_index, trial_index]))


def run_cell(spec: ExperimentSpec, cond: CompiledCondition, set_size_index: int,
             subject: int, params: EngineParams) -> CellResult:
    set_size = spec.set_sizes[set_size_index]
    rts: list[int] = []
    outcomes: list[str] = []
    for t in range(spec.trials_per_cell):
        trial_index = set_size_index * spec.trials_per_cell + t
        rng = trial_rng(spec.seed, subject, cond.index, trial_index)
        result = run_one_trial(cond, set_size, params, rng)
        rts.append(result.rt_iterations)
        outcomes.append(result.outcome)
    return CellResult(condition=cond.name, condition_index=cond.index,
                      set_size=set_size, subject=subject, rts=rts,
                      outcomes=outcomes)


def _cell_task(args) -> CellResult:
    spec, cond, set_size_index, subject, params = args
    return run_cell(spec, cond, set_size_index, subject, params)


def run_experiment(spec: ExperimentSpec, progress=None,
                   workers: int = 1) -> list[CellResult]:
    """Execute every cell; output order is (condition, set size, subject)."""
    params = EngineParams().override(spec.params)
    compiled = compile_conditions(spec)
    tasks = [(spec, cond, ssi, subject, params)
             for cond in compiled
             for ssi in range(len(spec.set_sizes))
             for subject in range(spec.n_subjects)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_task, tasks, chunksize=4))
    else:
        results = []
        for task in tasks:
            results.append(_cell_task(task))
            if progress is not None:
                progress(len(results), len(tasks))
    results.sort(key=lambda c: (c.condition_index, c.set_size, c.subject))
    return results


def results_csv(spec: ExperimentSpec, cells: list[CellResult]) -> str:
    """Per-trial results as CSV text (the source-of-truth export)."""
    lines = ["experiment,condition,set_size,subject,trial,rt_iterations,outcome"]
    for cell in cells:
        for t, (rt, outcome) in enumerate(zip(cell.rts, cell.outcomes)):
            lines.append(f"{spec.name},{cell.condition},{cell.set_size},"
                         f"{cell.subject},{t},{rt},{outcome}")
    return "\n".join(lines) + "\n"


def aggregate_csv(spec: ExperimentSpec, cells: list[CellResult]) -> str:
    """Per-cell means: grand mean over subject means plus SEM."""
    lines = ["experiment,condition,set_size,n_subjects,mean_rt,sem"]
    seen: dict[tuple[int, int], list[CellResult]] = {}
    for cell in cells:
        seen.setdefault((cell.condition_index, cell.set_size), []).append(cell)
    for (_, set_size), group in sorted(seen.items()):
        means = np.array([c.mean_rt for c in group])
        sem = float(np.std(means, ddof=1) / np.sqrt(len(means))) if len(means) > 1 else 0.0
        lines.append(f"{spec.name},{group[0].condition},{set_size},{len(means)},"
                     f"{means.mean():.6f},{sem:.6f}")
    return "\n".join(lines) + "\n"
