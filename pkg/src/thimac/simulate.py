"""Deterministic tick engine: things flowing through the stage graph.

The chronology rules, all of them:

* A thing occupies exactly one stage per tick and its stay is the
  interval [t, t+1): one tick per action.
* Things appear at create stages — by scenario injection or because a
  trigger asked for a fresh thing.
* A thing moves one flow per tick.  At a branch the scenario may pin a
  choice per (stage, departure number); otherwise the lowest anchor
  wins, then declaration order.
* A stage that is the target of a trigger (and is not a create stage)
  is a gate: arrivals rest there until a trigger wakes them.
* Entering a process stage fires every trigger sourced at it.  Effects
  land one tick later: a create target births a new thing, any other
  target wakes the things resting there — or lapses if nobody is.
* A stage with no outgoing flow is terminal; arrivals rest for good.
* The run ends when nothing can move any more (or at the tick cap).

With a fixed model and scenario the trace is bit-for-bit reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import ActionKind, StaticModel
from .events import TimeSubthimac


class SimulationError(Exception):
    pass


class ScenarioError(SimulationError):
    """Bad scenario text; carries the 1-based source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class StuckThing(SimulationError):
    """An explicit branch choice named a flow that cannot be taken."""

    def __init__(self, tick: int, stage_ref: str, message: str):
        super().__init__(message)
        self.tick = tick
        self.stage_ref = stage_ref


@dataclass
class ThingInstance:
    label: str
    stage: str | None
    born_at: int
    entered_at: int
    resting: bool = False


@dataclass(frozen=True)
class Scenario:
    """Injections, branch choices, and a tick cap for one run."""

    injections: tuple[tuple[int, str, str], ...]  # (tick, thimac id, label)
    choices: dict[tuple[str, int], str]  # (stage id, departure #) -> flow id
    max_ticks: int = 1000


@dataclass(frozen=True)
class GenericEventInstance:
    """One thing at one stage for one tick — the atom of a trace."""

    thing: str
    stage: str
    kind: ActionKind
    time: TimeSubthimac


@dataclass(frozen=True)
class Trace:
    entries: tuple[GenericEventInstance, ...]
    things: dict[str, ThingInstance]
    final_tick: int


def load_scenario(model: StaticModel, text: str) -> Scenario:
    """Parse scenario text.

    Directives, one per line (# comments allowed):

    .. code-block:: text

        inject <tick> <thimac-path> <label>
        choose <stage-ref> <occurrence> <flow-anchor-or-id>
        max <ticks>
    """
    injections: list[tuple[int, str, str]] = []
    choices: dict[tuple[str, int], str] = {}
    max_ticks = 1000
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        word = toks[0]
        if word == "inject":
            if len(toks) != 4:
                raise ScenarioError("expected: inject <tick> <path> <label>", lineno)
            if not toks[1].isdigit():
                raise ScenarioError(f"bad tick {toks[1]!r}", lineno)
            tid = model.resolve_thimac_path(toks[2])
            if tid is None:
                raise ScenarioError(f"unknown thimac {toks[2]!r}", lineno)
            if ActionKind.CREATE not in model.thimacs[tid].stages:
                raise ScenarioError(
                    f"thimac {toks[2]!r} has no create stage to inject at", lineno
                )
            injections.append((int(toks[1]), tid, toks[3]))
        elif word == "choose":
            if len(toks) != 4:
                raise ScenarioError(
                    "expected: choose <stage-ref> <occurrence> <flow>", lineno
                )
            sid = model.resolve_stage_ref(toks[1])
            if sid is None:
                raise ScenarioError(f"unknown stage {toks[1]!r}", lineno)
            if not toks[2].isdigit():
                raise ScenarioError(f"bad occurrence {toks[2]!r}", lineno)
            spec = toks[3]
            if spec.isdigit():
                anchor = int(spec)
                fid = next(
                    (f.id for f in model.flows.values() if f.anchor == anchor), None
                )
                if fid is None:
                    raise ScenarioError(f"no flow has anchor {anchor}", lineno)
            elif spec in model.flows:
                fid = spec
            else:
                raise ScenarioError(f"unknown flow {spec!r}", lineno)
            key = (sid, int(toks[2]))
            if key in choices:
                raise ScenarioError(
                    f"duplicate choice for {toks[1]} occurrence {toks[2]}", lineno
                )
            choices[key] = fid
        elif word == "max":
            if len(toks) != 2 or not toks[1].isdigit() or int(toks[1]) < 1:
                raise ScenarioError("expected: max <ticks>", lineno)
            max_ticks = int(toks[1])
        else:
            raise ScenarioError(f"unknown directive {word!r}", lineno)
    return Scenario(tuple(injections), choices, max_ticks)


@dataclass
class SimState:
    model: StaticModel
    scenario: Scenario
    time: int = 0
    things: list[ThingInstance] = field(default_factory=list)
    entries: list[GenericEventInstance] = field(default_factory=list)
    births: dict[int, list[tuple[str, str]]] = field(default_factory=dict)
    awakenings: dict[int, list[str]] = field(default_factory=dict)
    departures: dict[str, int] = field(default_factory=dict)
    birth_counts: dict[str, int] = field(default_factory=dict)
    gates: frozenset[str] = frozenset()


def new_state(model: StaticModel, scenario: Scenario) -> SimState:
    state = SimState(model=model, scenario=scenario)
    state.gates = frozenset(
        g.dst
        for g in model.triggers.values()
        if model.stages[g.dst].kind is not ActionKind.CREATE
    )
    for tick, tid, label in scenario.injections:
        create_sid = model.thimacs[tid].stages[ActionKind.CREATE]
        state.births.setdefault(tick, []).append((create_sid, label))
    return state


def _enter(state: SimState, thing: ThingInstance, sid: str, t: int) -> None:
    """Put a thing at a stage for tick t and apply the stage's effects."""
    model = state.model
    thing.stage = sid
    thing.entered_at = t
    stage = model.stages[sid]
    state.entries.append(
        GenericEventInstance(thing.label, sid, stage.kind, TimeSubthimac(t, t + 1))
    )
    if stage.kind is ActionKind.PROCESS:
        for trig in model.triggers.values():
            if trig.src != sid:
                continue
            target = model.stages[trig.dst]
            if target.kind is ActionKind.CREATE:
                owner = model.thimacs[target.owner]
                n = state.birth_counts.get(trig.dst, 0) + 1
                state.birth_counts[trig.dst] = n
                state.births.setdefault(t + 1, []).append(
                    (trig.dst, f"{owner.name}-{n}")
                )
            else:
                state.awakenings.setdefault(t + 1, []).append(trig.dst)
    if sid in state.gates or not model.outgoing_flows(sid):
        thing.resting = True


def _choose_flow(state: SimState, sid: str, t: int):
    outs = state.model.outgoing_flows(sid)
    occ = state.departures.get(sid, 0)
    state.departures[sid] = occ + 1
    chosen = state.scenario.choices.get((sid, occ))
    if chosen is not None:
        flow = state.model.flows[chosen]
        if flow.src != sid:
            ref = state.model.stage_ref(sid)
            raise StuckThing(
                t,
                ref,
                f"tick {t}: choice for {ref} occurrence {occ} names flow "
                f"{chosen}, which does not leave that stage",
            )
        return flow
    if len(outs) == 1:
        return outs[0]
    anchored = [f for f in outs if f.anchor is not None]
    if anchored:
        return min(anchored, key=lambda f: f.anchor)
    return outs[0]


def step(state: SimState) -> None:
    """Advance one tick: births, awakenings, then ordinary moves."""
    t = state.time
    for sid, label in state.births.pop(t, []):
        thing = ThingInstance(label, None, born_at=t, entered_at=t)
        state.things.append(thing)
        _enter(state, thing, sid, t)
    for sid in state.awakenings.pop(t, []):
        sleepers = [
            th
            for th in state.things
            if th.stage == sid and th.resting and th.entered_at < t
        ]
        if not state.model.outgoing_flows(sid):
            continue  # the awakening lapses: nowhere to go
        for th in sleepers:
            th.resting = False
            flow = _choose_flow(state, sid, t)
            _enter(state, th, flow.dst, t)
    for th in list(state.things):
        if th.resting or th.stage is None or th.entered_at >= t:
            continue
        flow = _choose_flow(state, th.stage, t)
        _enter(state, th, flow.dst, t)
    state.time = t + 1


def _has_pending(state: SimState) -> bool:
    if state.births or state.awakenings:
        return True
    return any(not th.resting for th in state.things)


_ID_NUM = re.compile(r"^([a-z]+)(\d+)$")


def _stage_sort_key(sid: str):
    m = _ID_NUM.match(sid)
    return (m.group(1), int(m.group(2))) if m else (sid, 0)


def run(model: StaticModel, scenario: Scenario) -> Trace:
    """Run to quiescence (or the tick cap) and return the sorted trace."""
    state = new_state(model, scenario)
    while state.time < scenario.max_ticks and _has_pending(state):
        step(state)
    entries = tuple(
        sorted(
            state.entries,
            key=lambda e: (e.time.start, _stage_sort_key(e.stage), e.thing),
        )
    )
    final = entries[-1].time.start if entries else 0
    return Trace(
        entries=entries,
        things={th.label: th for th in state.things},
        final_tick=final,
    )


def render_trace(model: StaticModel, trace: Trace) -> str:
    """One line per entry: ``<tick> <thing> <stage-ref> <kind>``."""
    return "\n".join(
        f"{e.time.start} {e.thing} {model.stage_ref(e.stage)} {e.kind.value}"
        for e in trace.entries
    )


# ---------------------------------------------------------------------------
# projection: reading a trace back as a chain of declared events


class UnknownEventInProjection(SimulationError):
    pass


@dataclass(frozen=True)
class ProjectionResult:
    events: tuple  # EventDef, in chronology order
    uncovered: tuple[str, ...]  # stage refs no declared event covers


def project(model: StaticModel, trace: Trace, events) -> ProjectionResult:
    """Collapse a trace into the declared events it walks through.

    Greedy maximal runs: keep absorbing consecutive entries while at
    least one declared region covers everything absorbed so far; when no
    region can take the next entry, close the run as the first-declared
    surviving candidate and start a new run.  Entries no region covers
    at all are reported as uncovered stage references.
    """
    events = list(events)
    projected = []
    uncovered: list[str] = []
    candidates: list = []
    for entry in trace.entries:
        sid = entry.stage
        if candidates:
            narrowed = [ev for ev in candidates if sid in ev.region]
            if narrowed:
                candidates = narrowed
                continue
            projected.append(candidates[0])
            candidates = []
        starters = [ev for ev in events if sid in ev.region]
        if starters:
            candidates = starters
        else:
            ref = model.stage_ref(sid)
            if ref not in uncovered:
                uncovered.append(ref)
    if candidates:
        projected.append(candidates[0])
    return ProjectionResult(tuple(projected), tuple(uncovered))


@dataclass(frozen=True)
class ConformanceReport:
    ok: bool
    problems: tuple[str, ...]


def conforms(behavior, projected, transitive: bool = False) -> ConformanceReport:
    """Check a projected event sequence against a chronology model.

    Every adjacent pair must be a declared precedence edge; with
    ``transitive`` a pair may also be bridged by a directed path.  A
    repeated event needs an explicit cycle to conform.
    """
    for ev in projected:
        if ev.id not in behavior.events:
            raise UnknownEventInProjection(
                f"projected event {ev.id!r} is not part of the chronology model"
            )
    succ: dict[str, set[str]] = {}
    for a, b in behavior.edges:
        succ.setdefault(a, set()).add(b)

    def reachable(a: str, b: str) -> bool:
        seen = {a}
        stack = [a]
        while stack:
            for nxt in succ.get(stack.pop(), ()):
                if nxt == b:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    problems: list[str] = []
    ids = [ev.id for ev in projected]
    for a, b in zip(ids, ids[1:]):
        if b in succ.get(a, ()):
            continue
        if transitive and reachable(a, b):
            continue
        problems.append(f"{a} -> {b} is not an allowed succession")
    return ConformanceReport(not problems, tuple(problems))
