"""Trinary feature space: canonical color/shape encodings, salience, and
display-wide feature classification.

Every feature dimension takes a value in {-1, 0, +1} (opposition, absence,
presence).  A full per-role vector is laid out as:

    [role tag | color (18) | shape (27) | higher-order (optional) | emergent (optional)]

The role tag is a one-hot block identifying the relational role a vector is
bound to; it exists only in relational experiments.  All functions in this
module operate on "stripped" vectors, i.e. the feature dimensions without the
role tag.  Dimension order is frozen and used for all serialization.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLOR_WIDTH = 18  # 3 opponent channels (white/black, red/green, blue/yellow) x 6 units
SHAPE_WIDTH = 27  # 18 orientation units + 4 L-vertex + 4 T-junction + 1 X-junction

# Opponent-channel color encodings, row order: white/black, red/green, blue/yellow.
COLOR_TABLE: dict[str, tuple[int, ...]] = {
    "white": (1, 1, 1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "black": (-1, -1, -1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "red": (0, 0, 0, 0, 0, 0, 1, 1, 1, -1, -1, -1, 0, 0, 0, 0, 0, 0),
    "green": (0, 0, 0, 0, 0, 0, -1, -1, -1, 1, 1, 1, 0, 0, 0, 0, 0, 0),
    "blue": (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, -1, -1, -1),
    "light-blue": (1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1, -1, -1, -1),
    "yellow": (0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1),
    "orange": (0, 0, 0, 0, 0, 0, 1, 1, 0, -1, -1, 0, -1, 0, 0, 1, 0, 0),
    "pink": (1, 1, 0, -1, -1, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0),
    "dark-green": (1, 1, 1, -1, -1, 0, -1, -1, -1, 1, 1, 1, 0, 0, 0, 0, 0, 0),
    "brown": (1, 1, 1, -1, -1, 0, 1, 1, -1, -1, -1, 1, 0, 0, 0, 0, 0, 0),
}

# "none" encodes the absence of any color information (all 18 units zero).  It
# is not one of the 11 canonical colors and is excluded from table exports.
ACHROMATIC_NAMES = ("none", "achromatic-none")

# Low-level shape encodings.  Orientation is coded in pi/8 steps across eight
# columns with unit counts (3,2,2,2,3,2,2,2) -- horizontal and vertical get an
# extra unit -- followed by 4 L-vertex units, 4 T-junction units, and one
# X-junction unit.
SHAPE_TABLE: dict[str, tuple[int, ...]] = {
    "horizontal": (1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0,
                   0, 0, 0, 0, 0, 0, 0, 0, 0),
    "vertical": (0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0,
                 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "diag45": (0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
               0, 0, 0, 0, 0, 0, 0, 0, 0),
    "diag135": (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0,
                0, 0, 0, 0, 0, 0, 0, 0, 0),
    "T1": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           0, 0, 0, 0, 1, 0, 0, 0, 0),
    "T2": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           0, 0, 0, 0, 0, 1, 0, 0, 0),
    "T3": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           0, 0, 0, 0, 0, 0, 1, 0, 0),
    "T4": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           0, 0, 0, 0, 0, 0, 0, 1, 0),
    "L1": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0,
           1, 0, 0, 0, 0, 0, 0, 0, 0),
    "L2": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0,
           0, 1, 0, 0, 0, 0, 0, 0, 0),
    "L3": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0,
           0, 0, 1, 0, 0, 0, 0, 0, 0),
    "L4": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0,
           0, 0, 0, 1, 0, 0, 0, 0, 0),
    "X": (0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0,
          0, 0, 0, 0, 0, 0, 0, 0, 1),
    "O": (1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0,
          0, 0, 0, 0, 0, 0, 0, 0, 0),
    "Q": (1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1, 0, 0, 0,
          0, 0, 0, 0, 0, 0, 0, 0, 0),
    "G1": (1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           1, 0, 0, 0, 0, 0, 0, 0, 1),
    "G2": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0,
           1, 0, 0, 0, 0, 0, 0, 0, 0),
    "P1": (1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 0,
           1, 0, 1, 0, 0, 0, 0, 0, 1),
    "P2": (1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0,
           1, 0, 1, 0, 0, 0, 0, 0, 0),
}

COLOR_NAMES: tuple[str, ...] = tuple(COLOR_TABLE)
SHAPE_NAMES: tuple[str, ...] = tuple(SHAPE_TABLE)

_COLOR_LABELS = tuple(f"{ch}{u}" for ch in ("wb", "rg", "by") for u in range(6))
_SHAPE_LABELS = (
    tuple(f"or{u}" for u in range(18))
    + tuple(f"lv{u}" for u in range(4))
    + tuple(f"tj{u}" for u in range(4))
    + ("xj0",)
)


class UnknownNameError(ValueError):
    """Raised for color/shape/relation identifiers not in the canonical sets."""


def encode_color(name: str) -> np.ndarray:
    """Return the 18-unit opponent-channel encoding for a canonical color name.

    ``"none"`` (alias ``"achromatic-none"``) yields all zeros: no color
    information requested.
    """
    if name in ACHROMATIC_NAMES:
        return np.zeros(COLOR_WIDTH, dtype=np.int8)
    try:
        return np.array(COLOR_TABLE[name], dtype=np.int8)
    except KeyError:
        raise UnknownNameError(f"unknown color name: {name!r}") from None


def encode_shape(name: str) -> np.ndarray:
    """Return the 27-unit low-level shape encoding for a canonical shape name."""
    try:
        return np.array(SHAPE_TABLE[name], dtype=np.int8)
    except KeyError:
        raise UnknownNameError(f"unknown shape name: {name!r}") from None


@dataclass(frozen=True)
class VectorLayout:
    """Frozen dimension layout shared by every vector in one experiment.

    ``role_names`` is empty for non-relational experiments.  The stripped
    (feature-only) width excludes the one-hot role tag block that prefixes
    each role-bound vector.
    """

    role_names: tuple[str, ...] = ()
    higher_order_width: int = 0
    emergent_width: int = 0

    @property
    def n_roles(self) -> int:
        return len(self.role_names)

    @property
    def stripped_width(self) -> int:
        return COLOR_WIDTH + SHAPE_WIDTH + self.higher_order_width + self.emergent_width

    @property
    def full_width(self) -> int:
        return self.n_roles + self.stripped_width

    # Slices into stripped vectors.
    @property
    def color_slice(self) -> slice:
        return slice(0, COLOR_WIDTH)

    @property
    def shape_slice(self) -> slice:
        return slice(COLOR_WIDTH, COLOR_WIDTH + SHAPE_WIDTH)

    @property
    def higher_order_slice(self) -> slice:
        lo = COLOR_WIDTH + SHAPE_WIDTH
        return slice(lo, lo + self.higher_order_width)

    @property
    def emergent_slice(self) -> slice:
        lo = COLOR_WIDTH + SHAPE_WIDTH + self.higher_order_width
        return slice(lo, lo + self.emergent_width)

    def segment_slice(self, segment: str) -> slice:
        try:
            return {
                "color": self.color_slice,
                "shape": self.shape_slice,
                "higher_order": self.higher_order_slice,
                "emergent": self.emergent_slice,
            }[segment]
        except KeyError:
            raise UnknownNameError(f"unknown segment name: {segment!r}") from None

    def labels(self) -> tuple[str, ...]:
        """Stable labels for the stripped feature dimensions."""
        out = list(_COLOR_LABELS) + list(_SHAPE_LABELS)
        out += [f"ho{u}" for u in range(self.higher_order_width)]
        if self.emergent_width:
            out += ["em_t", "em_d"][: self.emergent_width]
        return tuple(out)

    def label_index(self, label: str) -> int:
        try:
            return self.labels().index(label)
        except ValueError:
            raise UnknownNameError(f"unknown dimension label: {label!r}") from None


@dataclass
class SalienceMap:
    """Per-dimension nonnegative multiplier over the stripped feature dims."""

    layout: VectorLayout
    eta: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.eta is None:
            self.eta = np.ones(self.layout.stripped_width, dtype=float)
        else:
            self.eta = np.asarray(self.eta, dtype=float)
            if self.eta.shape != (self.layout.stripped_width,):
                raise ValueError("salience map length does not match layout")
        if np.any(self.eta < 0):
            raise ValueError("salience multipliers must be nonnegative")

    def scale_segment(self, segment: str, factor: float) -> None:
        self.eta[self.layout.segment_slice(segment)] *= factor

    def scale_dimension(self, label: str, factor: float) -> None:
        self.eta[self.layout.label_index(label)] *= factor

    def set_segment(self, segment: str, value: float) -> None:
        self.eta[self.layout.segment_slice(segment)] = value


RELEVANT, IRRELEVANT, ABSENT = 2, 1, 0


@dataclass(frozen=True)
class FeatureClassification:
    """Display-level partition of stripped dimensions, fixed at trial start.

    A dimension is Relevant when any template part disagrees with any part
    of any display item on it (roles crossed; see :func:`classify_features`);
    Absent when it is zero in every role of the template and of every item;
    Irrelevant otherwise.
    """

    classes: np.ndarray  # int8 per stripped dimension

    @property
    def relevant(self) -> np.ndarray:
        return self.classes == RELEVANT

    @property
    def irrelevant(self) -> np.ndarray:
        return self.classes == IRRELEVANT

    @property
    def absent(self) -> np.ndarray:
        return self.classes == ABSENT


def classify_features(template_parts: np.ndarray, item_parts: np.ndarray) -> FeatureClassification:
    """Classify stripped dimensions as relevant / irrelevant / absent.

    ``template_parts`` has shape (n_roles, n_dims); ``item_parts`` has shape
    (n_items, n_roles, n_dims).  Non-relational displays use n_roles = 1.

    A dimension is relevant when any template part differs from any part of
    any display item on it.  The comparison deliberately crosses roles: the
    preattentive stage has no access to role bindings, so two conditions
    whose items carry the same multiset of parts (for example, a role-swapped
    version of a feature distractor) receive identical classifications and
    are indistinguishable to the parallel process.  For single-part displays
    this reduces to plain per-dimension comparison.
    """
    template_parts = np.asarray(template_parts)
    item_parts = np.asarray(item_parts)
    if template_parts.ndim != 2 or item_parts.ndim != 3:
        raise ValueError("expected (roles, dims) template and (items, roles, dims) display")
    if item_parts.shape[1:] != template_parts.shape:
        raise ValueError("display items do not share the template's dimension layout")
    flat_items = item_parts.reshape(-1, template_parts.shape[1])
    mismatch = (flat_items[:, None, :] != template_parts[None, :, :]).any(axis=(0, 1))
    all_zero = (template_parts == 0).all(axis=0) & (item_parts == 0).all(axis=(0, 1))
    classes = np.full(template_parts.shape[1], IRRELEVANT, dtype=np.int8)
    classes[all_zero] = ABSENT
    classes[mismatch] = RELEVANT
    return FeatureClassification(classes)


def superimpose_roles(parts: np.ndarray) -> np.ndarray:
    """Pool role-bound stripped vectors into one display vector per item.

    Element-wise sum across roles, clamped to {-1, 0, +1}.  This is the
    binding-free pooling that makes role-swapped items preattentively
    indistinguishable.  Accepts (roles, dims) or (items, roles, dims).
    """
    parts = np.asarray(parts)
    summed = parts.sum(axis=-2)
    return np.clip(summed, -1, 1).astype(np.int8)


def count_overlap(template_parts: np.ndarray, item_parts: np.ndarray,
                  layout: VectorLayout) -> dict[str, tuple[int, int]]:
    """Diagnostic (shared, differing) dimension counts per color/shape segment.

    Computed on role-superimposed vectors.  Shared counts dimensions with
    equal values where at least one side is nonzero; differing counts unequal
    dimensions.  shared + differing = number of non-double-zero dimensions.
    """
    t = superimpose_roles(np.atleast_2d(template_parts))
    v = superimpose_roles(np.atleast_2d(item_parts))
    if t.shape != v.shape:
        raise ValueError("template and item do not share a dimension layout")
    out: dict[str, tuple[int, int]] = {}
    for segment in ("color", "shape"):
        sl = layout.segment_slice(segment)
        ts, vs = t[sl], v[sl]
        differing = int(np.sum(ts != vs))
        shared = int(np.sum((ts == vs) & ((ts != 0) | (vs != 0))))
        out[segment] = (shared, differing)
    return out


def export_tables_csv() -> tuple[str, str]:
    """Render the canonical color and shape encodings as CSV text for audit."""
    color_lines = ["name," + ",".join(_COLOR_LABELS)]
    for name, row in COLOR_TABLE.items():
        color_lines.append(name + "," + ",".join(str(v) for v in row))
    shape_lines = ["name," + ",".join(_SHAPE_LABELS)]
    for name, row in SHAPE_TABLE.items():
        shape_lines.append(name + "," + ",".join(str(v) for v in row))
    return "\n".join(color_lines) + "\n", "\n".join(shape_lines) + "\n"
