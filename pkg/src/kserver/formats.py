"""Text formats: metric descriptions, request sequences and trajectory dumps.

Metric description (JSON object)::

    {"kind": "circle", "num_points": 16, "circumference": "8", "scale": 2}
    {"kind": "line", "num_points": 9, "step": "1"}
    {"kind": "tree", "edges": [["a", "b", "1"], ["b", "c", "2.5"]], "scale": 2}
    {"kind": "multiray", "rays": ["2", "2", "2"], "step": "1"}
    {"kind": "star", "leaves": ["2", "3", "1"]}
    {"kind": "general", "matrix": [["0", "1"], ["1", "0"]], "labels": ["a", "b"]}

Lengths may be integers or decimal/fraction strings; ``scale`` defaults to 1
(the circle picks the smallest exact scale when omitted).

Request sequence: one event per line, ``r <point>`` or ``taxi <s> <t>``;
``#`` starts a comment.  Points are labels of the space (positions on circles
and lines, ``c``/``<ray>:<pos>`` on multirays, vertex names on trees).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

from . import metric as M


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = ""):
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + msg)
        self.line = line


def _text(path_or_text: Union[str, Path]) -> tuple[str, str]:
    p = Path(str(path_or_text))
    if "\n" not in str(path_or_text) and p.exists():
        return p.read_text(), str(p)
    return str(path_or_text), "<string>"


def space_from_dict(desc: dict) -> M.MetricSpace:
    kind = desc.get("kind")
    scale = desc.get("scale")
    try:
        if kind == "circle":
            return M.build_circle(int(desc["num_points"]), desc.get("circumference"), scale)
        scale = int(scale or 1)
        if kind == "line":
            return M.build_line(int(desc["num_points"]), desc.get("step", 1), scale)
        if kind == "tree":
            return M.build_tree([tuple(e) for e in desc["edges"]], scale)
        if kind == "multiray":
            return M.build_multiray(desc["rays"], desc.get("step", 1), scale)
        if kind == "star":
            return M.build_star(desc["leaves"], scale)
        if kind == "general":
            return M.build_general(desc["matrix"], scale, desc.get("labels", ()))
    except KeyError as e:
        raise ParseError(f"metric of kind {kind!r} needs field {e.args[0]!r}") from None
    raise ParseError(f"unknown metric kind {kind!r}")


def load_space(path_or_text) -> M.MetricSpace:
    text, src = _text(path_or_text)
    try:
        desc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, src) from None
    if not isinstance(desc, dict):
        raise ParseError("metric description must be a JSON object", None, src)
    try:
        return space_from_dict(desc)
    except M.MetricError as e:
        raise ParseError(str(e), None, src) from None


def space_to_dict(space: M.MetricSpace) -> dict:
    """Self-contained description (as a general matrix) that reloads to the same space."""
    return {
        "kind": "general",
        "scale": space.scale,
        "labels": list(space.labels),
        "matrix": [[str(Fraction(int(v), space.scale)) for v in row] for row in space.dist],
    }


@dataclass(frozen=True)
class Event:
    line: int
    points: tuple  # (r,) for a server request, (s, t) for a taxi request

    @property
    def is_taxi(self) -> bool:
        return len(self.points) == 2


def parse_sequence(path_or_text, space: M.MetricSpace) -> list:
    text, src = _text(path_or_text)
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if not body:
            continue
        op, args = body[0], body[1:]
        want = {"r": 1, "taxi": 2}.get(op)
        if want is None:
            raise ParseError(f"unknown event {op!r} (expected 'r' or 'taxi')", lineno, src)
        if len(args) != want:
            raise ParseError(f"'{op}' takes {want} point(s), got {len(args)}", lineno, src)
        try:
            pts = tuple(space.point(a) for a in args)
        except M.MetricError as e:
            raise ParseError(str(e), lineno, src) from None
        events.append(Event(lineno, pts))
    return events


def format_sequence(events, space: M.MetricSpace) -> str:
    lines = []
    for ev in events:
        if ev.is_taxi:
            lines.append(f"taxi {space.label(ev.points[0])} {space.label(ev.points[1])}")
        else:
            lines.append(f"r {space.label(ev.points[0])}")
    return "\n".join(lines) + ("\n" if lines else "")


def trajectory_to_dict(traj, space: M.MetricSpace, ledger: dict) -> dict:
    val = lambda v: str(space.value(v))  # noqa: E731
    steps = []
    for t, r in enumerate(traj.requests, start=1):
        steps.append({
            "request": space.label(r),
            "config": [space.label(p) for p in traj.configs[t]],
            "cost": val(traj.costs[t - 1]),
            "extended": val(ledger["extended"][t - 1]),
            "pinned": val(ledger["pinned"][t - 1]),
        })
    return {
        "space": space_to_dict(space),
        "scale": space.scale,
        "tie": traj.tie.policy,
        "start": [space.label(p) for p in traj.configs[0]],
        "steps": steps,
        "wfa_cost": val(traj.total_cost),
        "extended_total": val(ledger["total"]),
        "opt": val(ledger["opt"]),
    }


def trajectory_from_dict(data: dict) -> tuple:
    """``(space, start, requests, tie policy)`` recovered from a dump, for re-validation."""
    space = space_from_dict(data["space"])
    start = [space.point(p) for p in data["start"]]
    requests = [space.point(s["request"]) for s in data["steps"]]
    return space, start, requests, data.get("tie", "lexicographic")


def format_trajectory(data: dict) -> str:
    lines = [f"scale {data['scale']} (values in original units); tie-break {data['tie']}",
             f"start {{{','.join(data['start'])}}}"]
    for t, s in enumerate(data["steps"], start=1):
        lines.append(f"{t:>4}  r={s['request']:<6} C={{{','.join(s['config'])}}}  cost={s['cost']}"
                     f"  ext={s['extended']}  pinned={s['pinned']}")
    lines.append(f"WFA cost {data['wfa_cost']}, extended total {data['extended_total']}, OPT {data['opt']}")
    return "\n".join(lines)
