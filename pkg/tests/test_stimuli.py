"""Display-construction tests: items, geometry, emergent and higher-order units."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vsearch.features import UnknownNameError, VectorLayout, encode_color, encode_shape
from vsearch.stimuli import (
    RELATIONS,
    ConditionSpec,
    ExperimentSpec,
    ItemDef,
    SearchItem,
    TargetTemplate,
    attach_emergent,
    attach_higher_order,
    higher_order_block,
    item_parts,
    layout_for_experiment,
    layout_radial,
    make_item,
    with_role_tags,
)
from vsearch.features import SalienceMap


def test_itemdef_validates_arity():
    with pytest.raises(ValueError):
        ItemDef(parts=(("red", "X"), ("green", "O")))  # two parts, no relation
    with pytest.raises(ValueError):
        ItemDef(parts=(("red", "X"),), relation="above")  # one part, binary rel
    with pytest.raises(UnknownNameError):
        ItemDef(parts=(("red", "X"), ("green", "O")), relation="beside")


def test_make_item_vector_content():
    layout = VectorLayout()
    item = make_item(ItemDef(parts=(("red", "vertical"),)), layout, (0.3, -0.4))
    assert item.parts.shape == (1, layout.stripped_width)
    assert np.array_equal(item.parts[0, layout.color_slice], encode_color("red"))
    assert np.array_equal(item.parts[0, layout.shape_slice], encode_shape("vertical"))
    assert tuple(item.position) == (0.3, -0.4)
    assert not item.is_target


def test_item_parts_role_order_follows_relation():
    layout = VectorLayout(role_names=RELATIONS["above"])
    rel = ItemDef(parts=(("red", "X"), ("green", "O")), relation="above")
    parts = item_parts(rel, layout)
    assert np.array_equal(parts[0, layout.color_slice], encode_color("red"))
    assert np.array_equal(parts[1, layout.color_slice], encode_color("green"))


def test_item_parts_layout_mismatch_errors():
    rel_layout = VectorLayout(role_names=RELATIONS["above"])
    flat_layout = VectorLayout()
    rel = ItemDef(parts=(("red", "X"), ("green", "O")), relation="above")
    flat = ItemDef(parts=(("red", "X"),))
    with pytest.raises(ValueError):
        item_parts(rel, flat_layout)
    with pytest.raises(ValueError):
        item_parts(flat, rel_layout)


def test_with_role_tags_one_hot_prefix():
    layout = VectorLayout(role_names=RELATIONS["above"])
    parts = np.zeros((2, layout.stripped_width), dtype=np.int8)
    tagged = with_role_tags(parts, layout)
    assert tagged.shape == (2, layout.full_width)
    assert np.array_equal(tagged[:, :2], np.eye(2, dtype=np.int8))
    # role-swapping the rows changes the tagged form even for equal features
    swapped = with_role_tags(parts[::-1], layout)
    assert np.array_equal(tagged, swapped)  # features equal here
    flat = VectorLayout()
    assert with_role_tags(parts, flat).shape == (2, flat.stripped_width)


def test_layout_radial_single_item_on_canonical_ring():
    rng = np.random.default_rng(0)
    geom = layout_radial(1, rng, ring_radius=0.8)
    assert geom.positions.shape == (1, 2)
    assert math.isclose(np.hypot(*geom.positions[0]), 0.8, rel_tol=1e-9)


def test_layout_radial_eight_items_equal_spacing():
    rng = np.random.default_rng(1)
    geom = layout_radial(8, rng, ring_radius=1.0)
    assert geom.positions.shape == (8, 2)
    assert geom.ring_radii == (1.0,)
    angles = np.sort(np.arctan2(geom.positions[:, 1], geom.positions[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))
    assert np.allclose(gaps, 2 * math.pi / 8, atol=1e-9)


def test_layout_radial_overflow_uses_second_ring():
    rng = np.random.default_rng(2)
    geom = layout_radial(13, rng, ring_radius=0.6, ring_capacity=12, ring_gap=0.2)
    assert geom.ring_radii == (0.6, 0.8)
    radii = np.hypot(geom.positions[:, 0], geom.positions[:, 1])
    # balanced split: 7 + 6
    assert np.sum(np.isclose(radii, 0.6)) == 7
    assert np.sum(np.isclose(radii, 0.8)) == 6


def test_layout_radial_horizon_error():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        layout_radial(40, rng, ring_radius=3.9, ring_capacity=12,
                      ring_gap=0.5, d_max=4.0)
    with pytest.raises(ValueError):
        layout_radial(0, rng)


@settings(max_examples=25)
@given(st.integers(1, 40), st.integers(0, 1000))
def test_layout_radial_positions_inside_horizon(set_size, seed):
    rng = np.random.default_rng(seed)
    geom = layout_radial(set_size, rng, ring_radius=0.6, ring_gap=0.1)
    assert geom.positions.shape == (set_size, 2)
    assert np.all(np.hypot(geom.positions[:, 0], geom.positions[:, 1]) < 4.0)


def _template(layout, parts):
    return TargetTemplate(layout=layout, parts=parts, salience=SalienceMap(layout))


def test_attach_emergent_configuration_rule():
    layout = VectorLayout(role_names=RELATIONS["above"], emergent_width=2)
    tdef = ItemDef(parts=(("red", "X"), ("green", "O")), relation="above")
    swap = ItemDef(parts=(("green", "O"), ("red", "X")), relation="above")
    template = _template(layout, item_parts(tdef, layout))
    items = [make_item(tdef, layout, (0, 0), is_target=True),
             make_item(swap, layout, (1, 0))]
    attach_emergent(items, template, 0.33)
    sl = layout.emergent_slice
    assert np.all(template.parts[:, sl] == (1, 0))
    assert np.all(items[0].parts[:, sl] == (1, 0))
    # role-swapped arrangement is a different configuration
    assert np.all(items[1].parts[:, sl] == (0, 1))
    assert np.all(template.salience.eta[sl] == 0.33)


def test_attach_emergent_requires_declared_segment():
    layout = VectorLayout(role_names=RELATIONS["above"])
    tdef = ItemDef(parts=(("red", "X"), ("green", "O")), relation="above")
    template = _template(layout, item_parts(tdef, layout))
    with pytest.raises(ValueError):
        attach_emergent([], template, 1.0)


def test_higher_order_block_disjoint_halves():
    tri = higher_order_block("triangle", 3, 16)
    arr = higher_order_block("arrow", 3, 16)
    assert tri.sum() == 3 and arr.sum() == 3
    assert not np.any(tri & arr)
    assert list(np.flatnonzero(tri)) == [0, 1, 2]
    assert list(np.flatnonzero(arr)) == [8, 9, 10]


def test_higher_order_block_validation():
    with pytest.raises(UnknownNameError):
        higher_order_block("circle", 2, 8)
    with pytest.raises(ValueError):
        higher_order_block("arrow", 5, 8)  # exceeds half width
    with pytest.raises(ValueError):
        higher_order_block("arrow", 0, 8)


def test_attach_higher_order_writes_every_role():
    layout = VectorLayout(higher_order_width=8)
    parts = np.zeros((1, layout.stripped_width), dtype=np.int8)
    attach_higher_order(parts, "triangle", 4, layout)
    assert parts[0, layout.higher_order_slice].sum() == 4
    with pytest.raises(ValueError):
        attach_higher_order(parts, "triangle", 4, VectorLayout())


def test_experiment_spec_validation():
    cond = ConditionSpec(name="a", target=ItemDef(parts=(("red", "X"),)),
                         distractors=(ItemDef(parts=(("green", "X"),)),))
    with pytest.raises(ValueError):
        ExperimentSpec(name="e", conditions=(), set_sizes=(1,))
    with pytest.raises(ValueError):
        ExperimentSpec(name="e", conditions=(cond,), set_sizes=())
    with pytest.raises(ValueError):
        ExperimentSpec(name="e", conditions=(cond, cond), set_sizes=(1,))
    with pytest.raises(ValueError):
        ExperimentSpec(name="e", conditions=(cond,), set_sizes=(1,),
                       trials_per_cell=0)


def test_layout_for_experiment_merges_condition_needs():
    rel = ItemDef(parts=(("red", "X"), ("green", "O")), relation="above")
    swap = ItemDef(parts=(("green", "O"), ("red", "X")), relation="above")
    spec = ExperimentSpec(
        name="e",
        conditions=(ConditionSpec(name="a", target=rel, distractors=(swap,),
                                  emergent=1.0),),
        set_sizes=(1, 2))
    layout = layout_for_experiment(spec)
    assert layout.role_names == RELATIONS["above"]
    assert layout.emergent_width == 2
    mixed = ExperimentSpec(
        name="e",
        conditions=(ConditionSpec(name="a", target=rel, distractors=(swap,)),
                    ConditionSpec(name="b",
                                  target=ItemDef(parts=(("red", "X"),)),
                                  distractors=(ItemDef(parts=(("green", "X"),)),))),
        set_sizes=(1,))
    with pytest.raises(ValueError):
        layout_for_experiment(mixed)
