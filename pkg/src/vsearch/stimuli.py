"""Display construction: role-bound items, radial geometry, emergent and
higher-order feature units, and the experiment-definition data model.

Items are represented as arrays of role-bound stripped vectors with shape
(n_roles, stripped_width); non-relational items use a single role row.  The
one-hot role tag block is only materialized where binding matters (serial
scrutiny); see :func:`with_role_tags`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import (
    SalienceMap,
    UnknownNameError,
    VectorLayout,
    encode_color,
    encode_shape,
    superimpose_roles,
)

__all__ = [
    "RELATIONS",
    "ItemDef",
    "ConditionSpec",
    "ExperimentSpec",
    "SearchItem",
    "TargetTemplate",
    "DisplayLayout",
    "make_item",
    "build_part_vector",
    "with_role_tags",
    "layout_radial",
    "attach_emergent",
    "attach_higher_order",
    "superimpose_roles",
]

# Known binary spatial relations and their role names, in argument order.
RELATIONS: dict[str, tuple[str, ...]] = {
    "above": ("above", "below"),
}


@dataclass(frozen=True)
class ItemDef:
    """Symbolic item description: one (color, shape) pair per role."""

    parts: tuple[tuple[str, str], ...]
    relation: str | None = None

    def __post_init__(self) -> None:
        if self.relation is not None:
            roles = RELATIONS.get(self.relation)
            if roles is None:
                raise UnknownNameError(f"unknown relation name: {self.relation!r}")
            if len(self.parts) != len(roles):
                raise ValueError(
                    f"relation {self.relation!r} takes {len(roles)} fillers, "
                    f"got {len(self.parts)}"
                )
        elif len(self.parts) != 1:
            raise ValueError("non-relational items take exactly one (color, shape) pair")

    @property
    def shapes(self) -> tuple[str, ...]:
        return tuple(shape for _, shape in self.parts)


@dataclass(frozen=True)
class ConditionSpec:
    """One search condition: a target, one or more distractor types, and
    optional representational add-ons."""

    name: str
    target: ItemDef
    distractors: tuple[ItemDef, ...]
    # (segment-or-dimension-label, multiplier) pairs, applied in order.
    salience: tuple[tuple[str, float], ...] = ()
    # Salience of the two emergent-configuration units, or None for no units.
    emergent: float | None = None
    # (target kind, distractor kind, block width n), kinds in {arrow, triangle}.
    higher_order: tuple[str, str, int] | None = None


@dataclass(eq=True)
class ExperimentSpec:
    """Fully resolved experiment: conditions x set sizes x trials x subjects."""

    name: str
    conditions: tuple[ConditionSpec, ...]
    set_sizes: tuple[int, ...]
    trials_per_cell: int = 52
    n_subjects: int = 100
    seed: int = 1
    params: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.conditions:
            raise ValueError("experiment declares no conditions")
        if not self.set_sizes:
            raise ValueError("experiment declares no set sizes")
        if self.trials_per_cell < 1 or self.n_subjects < 1:
            raise ValueError("trials_per_cell and n_subjects must be >= 1")
        names = [c.name for c in self.conditions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate condition name")


@dataclass
class SearchItem:
    """One display element: role-bound vectors plus position and lifecycle.

    ``priority`` and ``state`` are written back by the engine at trial end for
    inspection; during the trial the engine tracks them in arrays.
    """

    parts: np.ndarray  # (n_roles or 1, stripped_width) int8
    position: np.ndarray  # (2,) in visual-field-radius units
    is_target: bool = False
    priority: float = 0.0
    state: str = "Active"


@dataclass
class TargetTemplate:
    """The sought item: role-bound stripped vectors plus per-dimension salience."""

    layout: VectorLayout
    parts: np.ndarray  # (n_roles or 1, stripped_width) int8
    salience: SalienceMap


@dataclass
class DisplayLayout:
    """Radial item geometry around a central fixation origin."""

    positions: np.ndarray  # (n, 2)
    ring_radii: tuple[float, ...]


def build_part_vector(color: str, shape: str, layout: VectorLayout) -> np.ndarray:
    """Stripped feature vector for one role filler; optional segments zeroed."""
    vec = np.zeros(layout.stripped_width, dtype=np.int8)
    vec[layout.color_slice] = encode_color(color)
    vec[layout.shape_slice] = encode_shape(shape)
    return vec


def item_parts(item: ItemDef, layout: VectorLayout) -> np.ndarray:
    """Role-bound stripped vectors, one row per role in relation order."""
    if item.relation is not None:
        roles = RELATIONS[item.relation]
        if tuple(roles) != layout.role_names:
            raise ValueError(
                f"item relation {item.relation!r} does not match the "
                f"experiment roles {layout.role_names}"
            )
    elif layout.n_roles:
        raise ValueError("non-relational item in a relational experiment layout")
    return np.stack([build_part_vector(c, s, layout) for c, s in item.parts])


def make_item(item: ItemDef, layout: VectorLayout, position,
              is_target: bool = False) -> SearchItem:
    """Instantiate a display element from its symbolic description."""
    return SearchItem(
        parts=item_parts(item, layout),
        position=np.asarray(position, dtype=float),
        is_target=is_target,
    )


def with_role_tags(parts: np.ndarray, layout: VectorLayout) -> np.ndarray:
    """Prefix each role row with its one-hot role tag block.

    The tagged form is what serial scrutiny compares; parallel processing
    reads only the stripped rows.
    """
    parts = np.atleast_2d(parts)
    n_roles = layout.n_roles
    if n_roles == 0:
        return parts
    tags = np.eye(n_roles, dtype=np.int8)
    return np.concatenate([tags, parts], axis=1)


def layout_radial(set_size: int, rng: np.random.Generator, *,
                  ring_radius: float = 1.0, ring_capacity: int = 12,
                  ring_gap: float = 0.85, d_max: float = 4.0) -> DisplayLayout:
    """Place ``set_size`` items at equal angular spacing on concentric rings.

    A single ring at ``ring_radius`` is used up to ``ring_capacity`` items;
    beyond that, additional rings are added at ``ring_gap`` increments and the
    items are split across rings as evenly as possible.  Each ring gets an
    independent random rotation.  All positions must remain processable
    (strictly inside ``d_max``).
    """
    if set_size < 1:
        raise ValueError("set_size must be >= 1")
    n_rings = math.ceil(set_size / ring_capacity)
    base, extra = divmod(set_size, n_rings)
    ring_sizes = [base + (1 if k < extra else 0) for k in range(n_rings)]
    radii = tuple(ring_radius + k * ring_gap for k in range(n_rings))
    if radii[-1] >= d_max:
        raise ValueError("outermost ring reaches the processing horizon")
    chunks = []
    for count, radius in zip(ring_sizes, radii):
        rotation = rng.uniform(0.0, 2.0 * math.pi)
        angles = rotation + 2.0 * math.pi * np.arange(count) / count
        chunks.append(np.column_stack([radius * np.cos(angles),
                                       radius * np.sin(angles)]))
    return DisplayLayout(positions=np.concatenate(chunks), ring_radii=radii)


def attach_emergent(items: list[SearchItem], template: TargetTemplate,
                    unit_salience: float) -> None:
    """Fill the two emergent-configuration units on every item in place.

    The emergent feature is a display-consistent cue carried by the whole
    arrangement of an item: an item whose role-aligned shape segments all
    equal the template's gets the target-configuration unit {1, 0}; any other
    arrangement gets the distractor-configuration unit {0, 1}.  Both units'
    salience is set to ``unit_salience``.
    """
    layout = template.layout
    if layout.emergent_width != 2:
        raise ValueError("emergent segment (width 2) not declared in the layout")
    sl = layout.emergent_slice
    shape_sl = layout.shape_slice
    target_shapes = template.parts[:, shape_sl]
    for item in items:
        matches = np.array_equal(item.parts[:, shape_sl], target_shapes)
        item.parts[:, sl] = (1, 0) if matches else (0, 1)
    template.parts[:, sl] = (1, 0)
    template.salience.set_segment("emergent", unit_salience)


def higher_order_block(kind: str, n: int, width: int) -> np.ndarray:
    """The higher-order unit pattern for one role vector.

    The segment is split into two non-overlapping halves: the triangle
    occupies the first ``n`` units of the first half, the arrow the first
    ``n`` units of the second half (zeros then ones, per the canonical
    pattern).  ``width`` is the full declared segment width.
    """
    half = width // 2
    if n < 1 or n > half:
        raise ValueError(f"higher-order block width {n} exceeds segment half {half}")
    block = np.zeros(width, dtype=np.int8)
    if kind == "triangle":
        block[:n] = 1
    elif kind == "arrow":
        block[half:half + n] = 1
    else:
        raise UnknownNameError(f"unknown higher-order kind: {kind!r}")
    return block


def attach_higher_order(parts: np.ndarray, kind: str, n: int,
                        layout: VectorLayout) -> None:
    """Write a higher-order unit block into every role row of ``parts`` in place."""
    if layout.higher_order_width == 0:
        raise ValueError("higher-order segment not declared in the layout")
    parts[:, layout.higher_order_slice] = higher_order_block(
        kind, n, layout.higher_order_width)


def layout_for_experiment(spec: ExperimentSpec) -> VectorLayout:
    """Derive the single vector layout shared by every condition of a spec."""
    relations = {c.target.relation for c in spec.conditions}
    for cond in spec.conditions:
        for d in cond.distractors:
            relations.add(d.relation)
    if len(relations) > 1:
        raise ValueError("all items in one experiment must share one relation (or none)")
    relation = relations.pop()
    role_names = RELATIONS[relation] if relation else ()
    max_n = max((c.higher_order[2] for c in spec.conditions if c.higher_order),
                default=0)
    emergent = any(c.emergent is not None for c in spec.conditions)
    return VectorLayout(
        role_names=role_names,
        higher_order_width=2 * max_n,
        emergent_width=2 if emergent else 0,
    )
