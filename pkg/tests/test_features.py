"""Feature-space tests: canonical encodings, layout, salience, classification."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from vsearch.features import (
    ABSENT,
    ACHROMATIC_NAMES,
    COLOR_NAMES,
    COLOR_TABLE,
    COLOR_WIDTH,
    IRRELEVANT,
    RELEVANT,
    SHAPE_NAMES,
    SHAPE_TABLE,
    SHAPE_WIDTH,
    SalienceMap,
    UnknownNameError,
    VectorLayout,
    classify_features,
    count_overlap,
    encode_color,
    encode_shape,
    export_tables_csv,
    superimpose_roles,
)

# Frozen oracle rows, transcribed independently of the table constants so a
# silent edit to the canonical tables is caught.
ORACLE_COLORS = {
    "white": (1, 1, 1, -1, -1, -1) + (0,) * 12,
    "red": (0,) * 6 + (1, 1, 1, -1, -1, -1) + (0,) * 6,
    "green": (0,) * 6 + (-1, -1, -1, 1, 1, 1) + (0,) * 6,
    "blue": (0,) * 12 + (1, 1, 1, -1, -1, -1),
    "light-blue": (1, 1, 1, 1, 1, 1) + (0,) * 6 + (1, 1, 1, -1, -1, -1),
    "orange": (0,) * 6 + (1, 1, 0, -1, -1, 0) + (-1, 0, 0, 1, 0, 0),
    "dark-green": (1, 1, 1, -1, -1, 0) + (-1, -1, -1, 1, 1, 1) + (0,) * 6,
    "brown": (1, 1, 1, -1, -1, 0) + (1, 1, -1, -1, -1, 1) + (0,) * 6,
}
ORACLE_SHAPES = {
    "horizontal": (1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0)
    + (0,) * 9,
    "vertical": (0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0)
    + (0,) * 9,
    "X": (0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0)
    + (0, 0, 0, 0, 0, 0, 0, 0, 1),
    "O": (1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0) + (0,) * 9,
    "Q": (1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1, 0, 0, 0) + (0,) * 9,
}


def test_color_width_and_trinary_values():
    for name in COLOR_NAMES:
        vec = encode_color(name)
        assert vec.shape == (COLOR_WIDTH,)
        assert set(np.unique(vec)).issubset({-1, 0, 1})


def test_shape_width_and_trinary_values():
    for name in SHAPE_NAMES:
        vec = encode_shape(name)
        assert vec.shape == (SHAPE_WIDTH,)
        assert set(np.unique(vec)).issubset({0, 1})


@pytest.mark.parametrize("name,row", sorted(ORACLE_COLORS.items()))
def test_color_oracle_rows(name, row):
    assert tuple(encode_color(name)) == row


@pytest.mark.parametrize("name,row", sorted(ORACLE_SHAPES.items()))
def test_shape_oracle_rows(name, row):
    assert tuple(encode_shape(name)) == row


def test_q_is_o_plus_vertical_stem():
    # Q differs from O only by the full vertical triple and shares all else.
    o, q = encode_shape("O"), encode_shape("Q")
    diff = np.flatnonzero(o != q)
    assert list(diff) == [10, 11]
    assert all(q[d] == 1 and o[d] == 0 for d in diff)


def test_achromatic_names_encode_zero():
    for name in ACHROMATIC_NAMES:
        assert not encode_color(name).any()
    assert "none" not in COLOR_TABLE


def test_unknown_names_raise():
    with pytest.raises(UnknownNameError):
        encode_color("mauve")
    with pytest.raises(UnknownNameError):
        encode_shape("heptagon")


def test_layout_slices_partition_stripped_vector():
    layout = VectorLayout(role_names=("above", "below"),
                          higher_order_width=6, emergent_width=2)
    sls = [layout.color_slice, layout.shape_slice,
           layout.higher_order_slice, layout.emergent_slice]
    covered = []
    for sl in sls:
        covered.extend(range(sl.start, sl.stop))
    assert covered == list(range(layout.stripped_width))
    assert layout.full_width == layout.stripped_width + 2
    assert len(layout.labels()) == layout.stripped_width


def test_layout_unknown_segment_and_label():
    layout = VectorLayout()
    with pytest.raises(UnknownNameError):
        layout.segment_slice("texture")
    with pytest.raises(UnknownNameError):
        layout.label_index("zz9")


def test_salience_defaults_and_scaling():
    layout = VectorLayout()
    sal = SalienceMap(layout)
    assert np.all(sal.eta == 1.0)
    sal.scale_segment("shape", 1.5)
    assert np.all(sal.eta[layout.shape_slice] == 1.5)
    assert np.all(sal.eta[layout.color_slice] == 1.0)
    sal.scale_dimension("wb0", 2.0)
    assert sal.eta[0] == 2.0


def test_salience_rejects_negative_and_wrong_length():
    layout = VectorLayout()
    with pytest.raises(ValueError):
        SalienceMap(layout, eta=-np.ones(layout.stripped_width))
    with pytest.raises(ValueError):
        SalienceMap(layout, eta=np.ones(3))


def _parts(*names, layout=None):
    layout = layout or VectorLayout()
    out = np.zeros((len(names), layout.stripped_width), dtype=np.int8)
    for i, (color, shape) in enumerate(names):
        out[i, layout.color_slice] = encode_color(color)
        out[i, layout.shape_slice] = encode_shape(shape)
    return out


def test_classification_identical_display_has_no_relevant_dims():
    tmpl = _parts(("red", "vertical"))
    items = np.stack([tmpl, tmpl])
    cls = classify_features(tmpl, items)
    assert not cls.relevant.any()
    # template-present dims are irrelevant, untouched dims absent
    assert cls.irrelevant[np.flatnonzero(tmpl[0])].all()
    assert cls.absent[np.flatnonzero(tmpl[0] == 0)].all()


def test_classification_role_swap_is_relevant():
    # Role-swapped items match after superposition but still differ from the
    # template part-for-part, so dimensions remain classified Relevant.
    layout = VectorLayout(role_names=("above", "below"))
    tmpl = _parts(("red", "X"), ("green", "O"), layout=layout)
    swapped = _parts(("green", "O"), ("red", "X"), layout=layout)
    assert np.array_equal(superimpose_roles(tmpl), superimpose_roles(swapped))
    cls = classify_features(tmpl, swapped[None, :, :])
    assert cls.relevant.any()


def test_classification_is_blind_to_role_bindings():
    # The comparison crosses roles: displays whose items carry the same
    # multiset of parts classify identically, whichever roles the parts fill.
    layout = VectorLayout(role_names=("above", "below"))
    tmpl = _parts(("red", "X"), ("green", "O"), layout=layout)
    off_hue = _parts(("orange", "X"), ("green", "O"), layout=layout)
    off_hue_swapped = _parts(("green", "O"), ("orange", "X"), layout=layout)
    cls_a = classify_features(tmpl, np.stack([tmpl, off_hue]))
    cls_b = classify_features(tmpl, np.stack([tmpl, off_hue_swapped]))
    assert np.array_equal(cls_a.classes, cls_b.classes)
    # a multi-part template's own cross-role differences are already relevant
    cls_self = classify_features(tmpl, tmpl[None, :, :])
    assert cls_self.relevant.any()


def test_classification_shape_errors():
    tmpl = _parts(("red", "vertical"))
    with pytest.raises(ValueError):
        classify_features(tmpl[0], tmpl[None, :, :])
    with pytest.raises(ValueError):
        classify_features(tmpl, np.zeros((2, 1, 3), dtype=np.int8))


@given(st.integers(0, 10))
def test_classes_partition(seed):
    rng = np.random.default_rng(seed)
    tmpl = rng.integers(-1, 2, size=(2, 12)).astype(np.int8)
    items = rng.integers(-1, 2, size=(3, 2, 12)).astype(np.int8)
    cls = classify_features(tmpl, items)
    total = (cls.classes == RELEVANT) | (cls.classes == IRRELEVANT) | (
        cls.classes == ABSENT)
    assert total.all()
    assert int(cls.relevant.sum() + cls.irrelevant.sum() + cls.absent.sum()) == 12


def test_superimpose_clamps_opposing_poles():
    layout = VectorLayout(role_names=("above", "below"))
    parts = _parts(("red", "X"), ("green", "X"), layout=layout)
    pooled = superimpose_roles(parts)
    # red and green oppose on every red/green unit: the pooled value is 0
    rg = pooled[layout.color_slice][6:12]
    assert not rg.any()
    assert set(np.unique(pooled)).issubset({-1, 0, 1})


def test_count_overlap_identical_pair_has_no_differing():
    layout = VectorLayout()
    tmpl = _parts(("green", "horizontal"))
    res = count_overlap(tmpl, tmpl, layout)
    assert res["color"][1] == 0 and res["shape"][1] == 0


def test_count_overlap_green_vertical_vs_green_horizontal():
    # Shares color exactly; differs on 10 shape dimensions.
    layout = VectorLayout()
    tmpl = _parts(("green", "horizontal"))
    item = _parts(("green", "vertical"))
    res = count_overlap(tmpl, item, layout)
    assert res["color"] == (6, 0)
    assert res["shape"][1] == 10


@given(st.integers(0, 25))
def test_count_overlap_partition_identity(seed):
    rng = np.random.default_rng(seed)
    layout = VectorLayout()
    tmpl = rng.integers(-1, 2, size=(1, layout.stripped_width)).astype(np.int8)
    item = rng.integers(-1, 2, size=(1, layout.stripped_width)).astype(np.int8)
    res = count_overlap(tmpl, item, layout)
    for segment in ("color", "shape"):
        sl = layout.segment_slice(segment)
        ts, vs = tmpl[0, sl], item[0, sl]
        non_double_zero = int(np.sum((ts != 0) | (vs != 0)))
        shared, differing = res[segment]
        assert shared + differing == non_double_zero


def test_export_tables_csv_roundtrip():
    color_csv, shape_csv = export_tables_csv()
    color_rows = color_csv.strip().splitlines()
    shape_rows = shape_csv.strip().splitlines()
    assert len(color_rows) == 1 + len(COLOR_TABLE)
    assert len(shape_rows) == 1 + len(SHAPE_TABLE)
    header = color_rows[0].split(",")
    assert header[0] == "name" and len(header) == 1 + COLOR_WIDTH
    row = dict(zip(header[1:], color_rows[1 + list(COLOR_TABLE).index("red")]
                   .split(",")[1:]))
    assert row["rg0"] == "1" and row["rg3"] == "-1"
