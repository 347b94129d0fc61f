"""In-memory representation of thing/machine (thimac) static models.

A static model is a timeless diagram: a forest of nested thimacs, each
owning at most one stage per generic action kind, wired together by flows
(solid arrows that carry a thing from one potentiality to the next) and
triggers (dashed arrows that activate another machine without moving a
thing).  Construction enforces the structural rules; whole-model semantic
checks live in :mod:`thimac.validate`.

Models are plain data.  Once built (and validated) they are meant to be
treated as immutable; every downstream operation is a pure function of the
model, so sharing a model across threads is safe as long as nobody keeps
calling the ``add_*`` methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ActionKind(Enum):
    """The five generic actions.

    The enumeration is closed: any domain verb a model needs must be
    expressed as a combination of these five.  States such as "low" or
    "high" are values carried by things, never action kinds.
    """

    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"

    @property
    def letter(self) -> str:
        """One-letter abbreviation; release and receive share ``R``."""
        return _LETTERS[self]

    def __str__(self) -> str:
        return self.value


_LETTERS = {
    ActionKind.CREATE: "C",
    ActionKind.PROCESS: "P",
    ActionKind.RELEASE: "R",
    ActionKind.TRANSFER: "T",
    ActionKind.RECEIVE: "R",
}

#: Canonical ordering for stages inside one machine.
KIND_ORDER = (
    ActionKind.CREATE,
    ActionKind.PROCESS,
    ActionKind.RELEASE,
    ActionKind.TRANSFER,
    ActionKind.RECEIVE,
)

_C = ActionKind.CREATE
_P = ActionKind.PROCESS
_REL = ActionKind.RELEASE
_T = ActionKind.TRANSFER
_RCV = ActionKind.RECEIVE

#: The complete succession table as (from, to, same_machine) triples.
#: Exactly eight triples are legal.  Within one machine a created or
#: received thing may be processed or released, a processed thing may be
#: released, a released thing may be transferred, and an inbound transfer
#: may be received.  The only legal boundary crossing is transfer-to-
#: transfer (output of one machine into the input of another).  Creation
#: is fed by triggers only, so no flow ends at a Create stage.
LEGAL_SUCCESSIONS: frozenset[tuple[ActionKind, ActionKind, bool]] = frozenset(
    {
        (_C, _P, True),
        (_C, _REL, True),
        (_RCV, _P, True),
        (_RCV, _REL, True),
        (_P, _REL, True),
        (_REL, _T, True),
        (_T, _RCV, True),
        (_T, _T, False),
    }
)


def legal_successor(
    from_kind: ActionKind, to_kind: ActionKind, same_machine: bool
) -> bool:
    """True iff a flow from ``from_kind`` to ``to_kind`` is legal.

    ``same_machine`` says whether both stages belong to the same scope: the
    same machine, or a machine and one of its own (transitively) nested
    submachines.  Flows between unrelated machines must pair two Transfer
    stages.
    """
    return (from_kind, to_kind, bool(same_machine)) in LEGAL_SUCCESSIONS


class ModelError(Exception):
    """Base class for structural model-construction errors."""


class UnknownParent(ModelError):
    pass


class DuplicateSiblingName(ModelError):
    pass


class UnknownThimac(ModelError):
    pass


class DuplicateKindInMachine(ModelError):
    pass


class UnknownStage(ModelError):
    pass


class IllegalSuccession(ModelError):
    def __init__(self, from_kind: ActionKind, to_kind: ActionKind, same_machine: bool):
        self.from_kind = from_kind
        self.to_kind = to_kind
        self.same_machine = same_machine
        scope = "within one machine" if same_machine else "across machines"
        super().__init__(
            f"a {from_kind.value} stage may not flow into a {to_kind.value} stage {scope}"
        )


class UnpairedBoundaryCrossing(ModelError):
    def __init__(self, from_ref: str, to_ref: str):
        super().__init__(
            f"flow {from_ref} -> {to_ref} crosses a machine boundary without "
            "pairing two transfer stages"
        )


class SelfTrigger(ModelError):
    pass


class EmptyRegion(ModelError):
    pass


@dataclass
class Thimac:
    """A thing/machine: one node of the nesting forest."""

    id: str
    name: str
    parent: str | None = None
    stages: dict[ActionKind, str] = field(default_factory=dict)
    children: list[str] = field(default_factory=list)


@dataclass
class Stage:
    """One generic action slot owned by a thimac."""

    id: str
    kind: ActionKind
    owner: str
    alias: str | None = None


@dataclass
class Flow:
    """Solid arrow: the thing at ``src`` becomes the thing at ``dst``."""

    id: str
    src: str
    dst: str
    carries: str | None = None
    anchor: int | None = None


@dataclass
class Trigger:
    """Dashed arrow: activation that starts another machine's flow."""

    id: str
    src: str
    dst: str


@dataclass(frozen=True)
class Region:
    """A stage set together with its induced flows and triggers."""

    stages: frozenset[str]
    flows: tuple[str, ...]
    triggers: tuple[str, ...]
    connected: bool


class StaticModel:
    """A mutable-while-building container for one static model."""

    def __init__(self) -> None:
        self.thimacs: dict[str, Thimac] = {}
        self.stages: dict[str, Stage] = {}
        self.flows: dict[str, Flow] = {}
        self.triggers: dict[str, Trigger] = {}
        self.roots: list[str] = []
        # source positions (entity id -> (line, col)), filled by the parser
        self.origin: dict[str, tuple[int, int]] = {}
        self._counters = {"t": 0, "s": 0, "f": 0, "g": 0}

    # -- construction -------------------------------------------------

    def _next_id(self, prefix: str) -> str:
        self._counters[prefix] += 1
        return f"{prefix}{self._counters[prefix]}"

    def add_thimac(self, name: str, parent: str | None = None) -> str:
        """Add a thimac under ``parent`` (a root when parent is None)."""
        if parent is not None and parent not in self.thimacs:
            raise UnknownParent(f"unknown parent thimac {parent!r}")
        siblings = self.roots if parent is None else self.thimacs[parent].children
        for sib in siblings:
            if self.thimacs[sib].name == name:
                raise DuplicateSiblingName(
                    f"thimac name {name!r} already used at this level"
                )
        tid = self._next_id("t")
        self.thimacs[tid] = Thimac(id=tid, name=name, parent=parent)
        if parent is None:
            self.roots.append(tid)
        else:
            self.thimacs[parent].children.append(tid)
        return tid

    def add_stage(
        self, thimac_id: str, kind: ActionKind, alias: str | None = None
    ) -> str:
        """Add the ``kind`` stage to a thimac; at most one per kind."""
        thimac = self.thimacs.get(thimac_id)
        if thimac is None:
            raise UnknownThimac(f"unknown thimac {thimac_id!r}")
        if kind in thimac.stages:
            raise DuplicateKindInMachine(
                f"{self.thimac_path(thimac_id)} already has a {kind.value} stage"
            )
        sid = self._next_id("s")
        self.stages[sid] = Stage(id=sid, kind=kind, owner=thimac_id, alias=alias)
        thimac.stages[kind] = sid
        return sid

    def add_flow(
        self,
        src: str,
        dst: str,
        carries: str | None = None,
        anchor: int | None = None,
    ) -> str:
        """Add a flow after checking boundary pairing and succession."""
        for sid in (src, dst):
            if sid not in self.stages:
                raise UnknownStage(f"unknown stage {sid!r}")
        a, b = self.stages[src], self.stages[dst]
        same_scope = a.owner == b.owner or self.nesting_related(a.owner, b.owner)
        if not same_scope and not (
            a.kind is ActionKind.TRANSFER and b.kind is ActionKind.TRANSFER
        ):
            raise UnpairedBoundaryCrossing(self.stage_ref(src), self.stage_ref(dst))
        if not legal_successor(a.kind, b.kind, same_scope):
            raise IllegalSuccession(a.kind, b.kind, same_scope)
        fid = self._next_id("f")
        self.flows[fid] = Flow(id=fid, src=src, dst=dst, carries=carries, anchor=anchor)
        return fid

    def add_trigger(self, src: str, dst: str) -> str:
        """Add a trigger; any two kinds may be linked, but not a stage to itself."""
        for sid in (src, dst):
            if sid not in self.stages:
                raise UnknownStage(f"unknown stage {sid!r}")
        if src == dst:
            raise SelfTrigger(f"stage {self.stage_ref(src)} cannot trigger itself")
        gid = self._next_id("g")
        self.triggers[gid] = Trigger(id=gid, src=src, dst=dst)
        return gid

    # -- structure queries --------------------------------------------

    def is_ancestor(self, ancestor: str, descendant: str) -> bool:
        """True iff ``ancestor`` encloses ``descendant`` (any depth)."""
        seen = set()
        cur = self.thimacs[descendant].parent
        while cur is not None and cur not in seen:
            if cur == ancestor:
                return True
            seen.add(cur)
            cur = self.thimacs[cur].parent
        return False

    def nesting_related(self, a: str, b: str) -> bool:
        """True iff one thimac is nested (at any depth) inside the other."""
        return self.is_ancestor(a, b) or self.is_ancestor(b, a)

    def thimac_path(self, thimac_id: str) -> str:
        """Dotted root-to-thimac name path, e.g. ``librarian.request``."""
        parts: list[str] = []
        seen = set()
        cur: str | None = thimac_id
        while cur is not None and cur not in seen:
            seen.add(cur)
            t = self.thimacs[cur]
            parts.append(t.name)
            cur = t.parent
        return ".".join(reversed(parts))

    def stage_ref(self, stage_id: str) -> str:
        """Dotted reference ending in the stage's kind keyword."""
        stage = self.stages[stage_id]
        return f"{self.thimac_path(stage.owner)}.{stage.kind.value}"

    def resolve_thimac_path(self, path: str) -> str | None:
        """Resolve a dotted name path to a thimac id, or None."""
        parts = path.split(".")
        scope = self.roots
        cur: str | None = None
        for part in parts:
            cur = None
            for tid in scope:
                if self.thimacs[tid].name == part:
                    cur = tid
                    break
            if cur is None:
                return None
            scope = self.thimacs[cur].children
        return cur

    def resolve_stage_ref(self, ref: str) -> str | None:
        """Resolve ``path.kind`` (or ``path.alias``) to a stage id, or None."""
        if "." not in ref:
            return None
        path, last = ref.rsplit(".", 1)
        tid = self.resolve_thimac_path(path)
        if tid is None:
            return None
        thimac = self.thimacs[tid]
        try:
            kind = ActionKind(last)
        except ValueError:
            kind = None
        if kind is not None:
            return thimac.stages.get(kind)
        for sid in thimac.stages.values():
            if self.stages[sid].alias == last:
                return sid
        return None

    def iter_thimacs_depth_first(self):
        """Yield thimac ids, roots first, children in declaration order."""
        stack = list(reversed(self.roots))
        while stack:
            tid = stack.pop()
            yield tid
            stack.extend(reversed(self.thimacs[tid].children))

    def outgoing_flows(self, stage_id: str) -> list[Flow]:
        return [f for f in self.flows.values() if f.src == stage_id]

    # -- regions -------------------------------------------------------

    def subdiagram(self, stage_ids) -> Region:
        """Induced subdiagram over a stage set, with a connectivity verdict.

        Flows and triggers are included when both endpoints lie in the set;
        connectivity is judged over the undirected union of both edge kinds.
        A single stage is trivially connected.
        """
        stage_set = frozenset(stage_ids)
        if not stage_set:
            raise EmptyRegion("a region must contain at least one stage")
        for sid in stage_set:
            if sid not in self.stages:
                raise UnknownStage(f"unknown stage {sid!r}")
        flows = tuple(
            f.id
            for f in self.flows.values()
            if f.src in stage_set and f.dst in stage_set
        )
        triggers = tuple(
            g.id
            for g in self.triggers.values()
            if g.src in stage_set and g.dst in stage_set
        )
        adj: dict[str, set[str]] = {sid: set() for sid in stage_set}
        for fid in flows:
            f = self.flows[fid]
            adj[f.src].add(f.dst)
            adj[f.dst].add(f.src)
        for gid in triggers:
            g = self.triggers[gid]
            adj[g.src].add(g.dst)
            adj[g.dst].add(g.src)
        start = next(iter(stage_set))
        seen = {start}
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return Region(
            stages=stage_set,
            flows=flows,
            triggers=triggers,
            connected=len(seen) == len(stage_set),
        )


def new_model() -> StaticModel:
    """Create an empty static model."""
    return StaticModel()
