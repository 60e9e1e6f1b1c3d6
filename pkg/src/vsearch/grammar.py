"""Line-oriented text grammar for experiment definitions.

Document form (UTF-8, ``#`` starts a comment)::

    experiment <name>
    seed <u64>
    subjects <n>
    trials <n>
    set_sizes <n,...>
    param <key> <value>
    condition <name> {
      target = <itemexpr>
      distractor = <itemexpr>          # repeatable for mixed distractor types
      salience <segment|dimension> <float>
      emergent <float>
      higher_order <kind> [<distractor-kind>] <n>
    }

    <itemexpr> := <color> <shape> | <relation>(<color> <shape>, <color> <shape>)

``higher_order`` with one kind applies that kind to target and distractors
alike; with two kinds the first is the target's, the second the distractors'.
Resolved specs serialize canonically (stable key order) and round-trip through
:func:`parse_experiment`.
"""
from __future__ import annotations

import re

from .features import UnknownNameError, encode_color, encode_shape
from .stimuli import RELATIONS, ConditionSpec, ExperimentSpec, ItemDef

__all__ = ["ParseError", "parse_experiment", "serialize_experiment", "PARAM_TYPES"]

# Engine/geometry parameter keys accepted by `param` lines, with value parsers.
PARAM_TYPES: dict[str, type] = {
    "delta": float,
    "tau": float,
    "p_min": float,
    "d_max": float,
    "w_present": float,
    "w_absent": float,
    "p_sample_relevant": float,
    "p_sample_irrelevant": float,
    "eye_cost": int,
    "covert_cost": int,
    "eyes_enabled": bool,
    "init_jitter": float,
    "iteration_cap": int,
    "ring_radius": float,
    "ring_capacity": int,
    "ring_gap": float,
}

_HIGHER_KINDS = ("arrow", "triangle")


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _checked_part(color: str, shape: str) -> tuple[str, str]:
    encode_color(color)  # raises UnknownNameError for names outside the tables
    encode_shape(shape)
    return (color, shape)


def _parse_itemexpr(text: str, line: int) -> ItemDef:
    text = text.strip()
    m = re.fullmatch(r"(\w+)\s*\((.*)\)", text)
    try:
        if m:
            relation, inner = m.group(1), m.group(2)
            if relation not in RELATIONS:
                raise UnknownNameError(f"unknown relation name: {relation!r}")
            fillers = [p.strip() for p in inner.split(",")]
            parts = []
            for filler in fillers:
                tokens = filler.split()
                if len(tokens) != 2:
                    raise ParseError(f"expected '<color> <shape>', got {filler!r}", line)
                parts.append(_checked_part(tokens[0], tokens[1]))
            return ItemDef(parts=tuple(parts), relation=relation)
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(f"expected '<color> <shape>', got {text!r}", line)
        return ItemDef(parts=(_checked_part(tokens[0], tokens[1]),))
    except (UnknownNameError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), line) from None


def _coerce_param(key: str, raw: str, line: int):
    if key not in PARAM_TYPES:
        raise ParseError(f"unknown param key: {key!r}", line)
    typ = PARAM_TYPES[key]
    if typ is bool:
        if raw not in ("true", "false"):
            raise ParseError(f"expected true/false for {key!r}, got {raw!r}", line)
        return raw == "true"
    try:
        return typ(raw)
    except ValueError:
        raise ParseError(f"bad {typ.__name__} value for {key!r}: {raw!r}", line) from None


def parse_experiment(text: str) -> ExperimentSpec:
    """Parse a definition document into a fully resolved ExperimentSpec."""
    name = None
    seed = 1
    subjects = 100
    trials = 52
    set_sizes: tuple[int, ...] = ()
    params: dict[str, object] = {}
    conditions: list[ConditionSpec] = []
    cond_names: set[str] = set()

    # Per-open-condition accumulator state.
    in_cond = False
    cond: dict = {}
    cond_line = 0

    def finish_condition(line: int) -> None:
        nonlocal in_cond
        if cond.get("target") is None:
            raise ParseError(f"condition {cond['name']!r} has no target", line)
        if not cond["distractors"]:
            raise ParseError(f"condition {cond['name']!r} has no distractor", line)
        try:
            conditions.append(ConditionSpec(
                name=cond["name"],
                target=cond["target"],
                distractors=tuple(cond["distractors"]),
                salience=tuple(cond["salience"]),
                emergent=cond["emergent"],
                higher_order=cond["higher_order"],
            ))
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        in_cond = False

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if in_cond:
            if line == "}":
                finish_condition(lineno)
                continue
            m = re.fullmatch(r"(target|distractor)\s*=\s*(.+)", line)
            if m:
                item = _parse_itemexpr(m.group(2), lineno)
                if m.group(1) == "target":
                    if cond.get("target") is not None:
                        raise ParseError("duplicate target definition", lineno)
                    cond["target"] = item
                else:
                    cond["distractors"].append(item)
                continue
            tokens = line.split()
            if tokens[0] == "salience" and len(tokens) == 3:
                try:
                    cond["salience"].append((tokens[1], float(tokens[2])))
                except ValueError:
                    raise ParseError(f"bad salience value: {tokens[2]!r}", lineno) from None
                continue
            if tokens[0] == "emergent" and len(tokens) == 2:
                try:
                    cond["emergent"] = float(tokens[1])
                except ValueError:
                    raise ParseError(f"bad emergent salience: {tokens[1]!r}", lineno) from None
                continue
            if tokens[0] == "higher_order" and len(tokens) in (3, 4):
                kinds = tokens[1:-1]
                if any(k not in _HIGHER_KINDS for k in kinds):
                    raise ParseError(f"unknown higher-order kind in {line!r}", lineno)
                try:
                    n = int(tokens[-1])
                except ValueError:
                    raise ParseError(f"bad higher-order width: {tokens[-1]!r}", lineno) from None
                if n < 1:
                    raise ParseError("higher-order width must be >= 1", lineno)
                kind_t = kinds[0]
                kind_d = kinds[1] if len(kinds) == 2 else kinds[0]
                cond["higher_order"] = (kind_t, kind_d, n)
                continue
            raise ParseError(f"unrecognized condition directive: {line!r}", lineno)

        tokens = line.split()
        keyword = tokens[0]
        if keyword == "experiment" and len(tokens) == 2:
            name = tokens[1]
        elif keyword == "seed" and len(tokens) == 2:
            seed = int(tokens[1])
            if seed < 0:
                raise ParseError("seed must be nonnegative", lineno)
        elif keyword == "subjects" and len(tokens) == 2:
            subjects = int(tokens[1])
        elif keyword == "trials" and len(tokens) == 2:
            trials = int(tokens[1])
        elif keyword == "set_sizes" and len(tokens) == 2:
            try:
                set_sizes = tuple(int(v) for v in tokens[1].split(","))
            except ValueError:
                raise ParseError(f"bad set size list: {tokens[1]!r}", lineno) from None
        elif keyword == "param" and len(tokens) == 3:
            params[tokens[1]] = _coerce_param(tokens[1], tokens[2], lineno)
        elif keyword == "condition" and len(tokens) == 3 and tokens[2] == "{":
            if tokens[1] in cond_names:
                raise ParseError(f"duplicate condition name: {tokens[1]!r}", lineno)
            cond_names.add(tokens[1])
            in_cond = True
            cond_line = lineno
            cond = {"name": tokens[1], "target": None, "distractors": [],
                    "salience": [], "emergent": None, "higher_order": None}
        else:
            raise ParseError(f"unrecognized directive: {line!r}", lineno)

    if in_cond:
        raise ParseError("condition opened here is never closed", cond_line)
    if name is None:
        raise ParseError("missing 'experiment <name>' declaration", 1)
    try:
        return ExperimentSpec(
            name=name,
            conditions=tuple(conditions),
            set_sizes=set_sizes,
            trials_per_cell=trials,
            n_subjects=subjects,
            seed=seed,
            params=params,
        )
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None


def _serialize_item(item: ItemDef) -> str:
    if item.relation is None:
        color, shape = item.parts[0]
        return f"{color} {shape}"
    inner = ", ".join(f"{c} {s}" for c, s in item.parts)
    return f"{item.relation}({inner})"


def serialize_experiment(spec: ExperimentSpec) -> str:
    """Canonical text form of a resolved spec (stable key order)."""
    lines = [
        f"experiment {spec.name}",
        f"seed {spec.seed}",
        f"subjects {spec.n_subjects}",
        f"trials {spec.trials_per_cell}",
        "set_sizes " + ",".join(str(n) for n in spec.set_sizes),
    ]
    for key in sorted(spec.params):
        value = spec.params[key]
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"param {key} {value}")
    for cond in spec.conditions:
        lines.append(f"condition {cond.name} {{")
        lines.append(f"  target = {_serialize_item(cond.target)}")
        for d in cond.distractors:
            lines.append(f"  distractor = {_serialize_item(d)}")
        for label, factor in cond.salience:
            lines.append(f"  salience {label} {factor}")
        if cond.emergent is not None:
            lines.append(f"  emergent {cond.emergent}")
        if cond.higher_order is not None:
            kind_t, kind_d, n = cond.higher_order
            if kind_t == kind_d:
                lines.append(f"  higher_order {kind_t} {n}")
            else:
                lines.append(f"  higher_order {kind_t} {kind_d} {n}")
        lines.append("}")
    return "\n".join(lines) + "\n"
