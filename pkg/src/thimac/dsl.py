"""The textual model language: parser, canonical serializer, DOT export.

One document describes one static model plus its declared events and
chronologies.  The format is line-oriented and deliberately small:

.. code-block:: text

    # comments run to end of line
    thimac librarian {
      thimac request { create; release; transfer; }
    }
    thimac system {
      thimac request { transfer; receive; process as triage; }
    }
    flow librarian.request.create -> librarian.request.release anchor 1;
    flow librarian.request.transfer -> system.request.transfer
        carries "access request" anchor 2;
    trigger system.request.process => librarian.request.create;
    event request_granted { region [system.request.receive,
                                    system.request.process] time 0..2 }
    behavior main { request_granted -> request_granted_next; }

Parsing never raises for bad input: every problem becomes a
ParseDiagnostic with a 1-based line and column, and a document with any
error yields no model.  Serialization is canonical (stages in kind order,
flows by anchor then declaration), so parse-serialize-parse is the
identity on models and re-serialization is byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import events as events_mod
from .model import ActionKind, KIND_ORDER, ModelError, Region, StaticModel, new_model
from .events import BehaviorModel, EventDef, TimeSubthimac

STAGE_KEYWORDS = {kind.value: kind for kind in ActionKind}
STRUCTURE_KEYWORDS = {
    "thimac",
    "flow",
    "trigger",
    "event",
    "behavior",
    "region",
    "time",
    "carries",
    "anchor",
    "as",
}
#: Reserved words: the five generic actions plus the structural keywords.
RESERVED_WORDS = frozenset(STAGE_KEYWORDS) | frozenset(STRUCTURE_KEYWORDS)

_PUNCT = ("->", "=>", "..", "{", "}", "[", "]", ";", ",", ".")


@dataclass(frozen=True)
class SourceDocument:
    text: str
    path: str = "<string>"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int
    column: int

    def render(self, path: str = "<string>") -> str:
        return f"{path}:{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    """Everything one document declares; ``model`` is None on any error."""

    model: StaticModel | None
    events: list[EventDef] = field(default_factory=list)
    behaviors: dict[str, BehaviorModel] = field(default_factory=dict)
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "int" | "string" | "eof" | one of _PUNCT
    value: str
    line: int
    column: int


def _tokenize(text: str) -> tuple[list[_Token], list[ParseDiagnostic]]:
    toks: list[_Token] = []
    diags: list[ParseDiagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def bump(ch: str) -> None:
        nonlocal line, col
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            bump(ch)
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                bump(text[i])
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            i += 1
            bump(ch)
            buf: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                bump(c)
                i += 1
                if c == "\\" and i < n and text[i] in '"\\':
                    buf.append(text[i])
                    bump(text[i])
                    i += 1
                elif c == '"':
                    closed = True
                    break
                else:
                    buf.append(c)
            if not closed:
                diags.append(
                    ParseDiagnostic(
                        "error", "unterminated string", start_line, start_col
                    )
                )
            toks.append(_Token("string", "".join(buf), start_line, start_col))
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            for c in word:
                bump(c)
            i = j
            toks.append(_Token("ident", word, start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            word = text[i:j]
            for c in word:
                bump(c)
            i = j
            toks.append(_Token("int", word, start_line, start_col))
            continue
        two = text[i : i + 2]
        if two in ("->", "=>", ".."):
            toks.append(_Token(two, two, start_line, start_col))
            bump(ch)
            bump(text[i + 1])
            i += 2
            continue
        if ch in "{}[];,.":
            toks.append(_Token(ch, ch, start_line, start_col))
            bump(ch)
            i += 1
            continue
        diags.append(
            ParseDiagnostic(
                "error", f"unexpected character {ch!r}", start_line, start_col
            )
        )
        bump(ch)
        i += 1
    toks.append(_Token("eof", "", line, col))
    return toks, diags


@dataclass
class _PendingFlow:
    src: str
    dst: str
    carries: str | None
    anchor: int | None
    line: int
    column: int


@dataclass
class _PendingTrigger:
    src: str
    dst: str
    line: int
    column: int


@dataclass
class _PendingEvent:
    name: str
    refs: list[str]
    time: TimeSubthimac | None
    line: int
    column: int


@dataclass
class _PendingBehavior:
    name: str
    edges: list[tuple[str, str, int, int]]  # (pred, succ, line, col)
    line: int
    column: int


class _Parser:
    def __init__(self, toks: list[_Token], diags: list[ParseDiagnostic]):
        self.toks = toks
        self.i = 0
        self.diags = diags
        self.model = new_model()
        self.flows: list[_PendingFlow] = []
        self.triggers: list[_PendingTrigger] = []
        self.events: list[_PendingEvent] = []
        self.behaviors: list[_PendingBehavior] = []

    # -- token plumbing -------------------------------------------------

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> None:
        tok = tok or self.peek()
        self.diags.append(ParseDiagnostic("error", message, tok.line, tok.column))

    def expect(self, kind: str, what: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == kind:
            return self.advance()
        shown = tok.value or tok.kind
        self.error(f"expected {what}, found {shown!r}")
        return None

    def sync(self, *stops: str) -> None:
        """Panic-mode recovery: skip to just past one of ``stops``."""
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            self.advance()
            if tok.kind in stops:
                return

    # -- grammar ---------------------------------------------------------

    def parse_document(self) -> None:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "ident" and tok.value == "thimac":
                self.parse_thimac(parent=None, build=True)
            elif tok.kind == "ident" and tok.value == "flow":
                self.parse_flow()
            elif tok.kind == "ident" and tok.value == "trigger":
                self.parse_trigger()
            elif tok.kind == "ident" and tok.value == "event":
                self.parse_event()
            elif tok.kind == "ident" and tok.value == "behavior":
                self.parse_behavior()
            else:
                shown = tok.value or tok.kind
                self.error(
                    f"expected thimac, flow, trigger, event, or behavior, "
                    f"found {shown!r}"
                )
                self.sync(";", "}")

    def parse_name(self, what: str) -> _Token | None:
        tok = self.peek()
        if tok.kind != "ident":
            self.error(f"expected {what}, found {tok.value or tok.kind!r}")
            return None
        if tok.value in RESERVED_WORDS:
            self.error(f"{tok.value!r} is a reserved word and cannot name a {what}")
            self.advance()
            return None
        return self.advance()

    def parse_thimac(self, parent: str | None, build: bool) -> None:
        kw = self.advance()  # "thimac"
        name = self.parse_name("thimac")
        tid: str | None = None
        if name is not None and build:
            try:
                tid = self.model.add_thimac(name.value, parent)
                self.model.origin[tid] = (name.line, name.column)
            except ModelError as exc:
                self.error(str(exc), name)
        if self.expect("{", "'{'") is None:
            self.sync("}")
            return
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.advance()
                return
            if tok.kind == "eof":
                self.error("unclosed thimac block (missing '}')", kw)
                return
            if tok.kind == "ident" and tok.value == "thimac":
                self.parse_thimac(parent=tid, build=tid is not None)
            elif tok.kind == "ident" and tok.value in STAGE_KEYWORDS:
                self.parse_stage(tid)
            else:
                shown = tok.value or tok.kind
                self.error(
                    f"{shown!r} is not a generic action (expected create, "
                    "process, release, transfer, or receive)"
                )
                self.sync(";", "}")
                if self.toks[self.i - 1].kind == "}":
                    return

    def parse_stage(self, owner: str | None) -> None:
        kw = self.advance()
        kind = STAGE_KEYWORDS[kw.value]
        alias: str | None = None
        if self.peek().kind == "ident" and self.peek().value == "as":
            self.advance()
            alias_tok = self.parse_name("stage alias")
            if alias_tok is not None:
                alias = alias_tok.value
        self.expect(";", "';'")
        if owner is None:
            return
        try:
            sid = self.model.add_stage(owner, kind, alias)
            self.model.origin[sid] = (kw.line, kw.column)
        except ModelError as exc:
            self.error(str(exc), kw)

    def parse_stage_ref(self) -> str | None:
        """Collect a dotted reference; returns its text, resolution later."""
        parts: list[str] = []
        tok = self.peek()
        if tok.kind != "ident":
            self.error(f"expected a stage reference, found {tok.value or tok.kind!r}")
            return None
        parts.append(self.advance().value)
        while self.peek().kind == ".":
            self.advance()
            tok = self.peek()
            if tok.kind != "ident":
                self.error(
                    f"expected a name after '.', found {tok.value or tok.kind!r}"
                )
                return None
            parts.append(self.advance().value)
        if len(parts) < 2:
            self.error("a stage reference needs a thimac path and a stage", tok)
            return None
        return ".".join(parts)

    def parse_flow(self) -> None:
        kw = self.advance()
        src = self.parse_stage_ref()
        if src is None or self.expect("->", "'->'") is None:
            self.sync(";", "}")
            return
        dst = self.parse_stage_ref()
        if dst is None:
            self.sync(";", "}")
            return
        carries: str | None = None
        anchor: int | None = None
        while self.peek().kind == "ident" and self.peek().value in (
            "carries",
            "anchor",
        ):
            opt = self.advance()
            if opt.value == "carries":
                s = self.expect("string", "a quoted thing label")
                if s is None:
                    self.sync(";", "}")
                    return
                carries = s.value
            else:
                num = self.expect("int", "an anchor number")
                if num is None:
                    self.sync(";", "}")
                    return
                anchor = int(num.value)
        self.expect(";", "';'")
        self.flows.append(_PendingFlow(src, dst, carries, anchor, kw.line, kw.column))

    def parse_trigger(self) -> None:
        kw = self.advance()
        src = self.parse_stage_ref()
        if src is None or self.expect("=>", "'=>'") is None:
            self.sync(";", "}")
            return
        dst = self.parse_stage_ref()
        if dst is None:
            self.sync(";", "}")
            return
        self.expect(";", "';'")
        self.triggers.append(_PendingTrigger(src, dst, kw.line, kw.column))

    def parse_event(self) -> None:
        kw = self.advance()
        name = self.parse_name("event")
        if name is None or self.expect("{", "'{'") is None:
            self.sync("}")
            return
        tok = self.peek()
        if not (tok.kind == "ident" and tok.value == "region"):
            self.error("an event block starts with 'region'")
            self.sync("}")
            return
        self.advance()
        if self.expect("[", "'['") is None:
            self.sync("}")
            return
        refs: list[str] = []
        while True:
            ref = self.parse_stage_ref()
            if ref is None:
                self.sync("}")
                return
            refs.append(ref)
            if self.peek().kind == ",":
                self.advance()
                continue
            break
        if self.expect("]", "']'") is None:
            self.sync("}")
            return
        time: TimeSubthimac | None = None
        tok = self.peek()
        if tok.kind == "ident" and tok.value == "time":
            self.advance()
            lo = self.expect("int", "a start tick")
            if lo is None or self.expect("..", "'..'") is None:
                self.sync("}")
                return
            hi = self.expect("int", "an end tick")
            if hi is None:
                self.sync("}")
                return
            try:
                time = TimeSubthimac(int(lo.value), int(hi.value))
            except ValueError as exc:
                self.error(str(exc), lo)
        if self.expect("}", "'}'") is None:
            self.sync("}")
            return
        self.events.append(_PendingEvent(name.value, refs, time, name.line, name.column))

    def parse_behavior(self) -> None:
        kw = self.advance()
        name = self.parse_name("behavior")
        if name is None or self.expect("{", "'{'") is None:
            self.sync("}")
            return
        edges: list[tuple[str, str, int, int]] = []
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.advance()
                break
            if tok.kind == "eof":
                self.error("unclosed behavior block (missing '}')", kw)
                return
            pred = self.expect("ident", "an event name")
            if pred is None or self.expect("->", "'->'") is None:
                self.sync(";", "}")
                if self.toks[self.i - 1].kind == "}":
                    break
                continue
            succ = self.expect("ident", "an event name")
            if succ is None:
                self.sync(";", "}")
                if self.toks[self.i - 1].kind == "}":
                    break
                continue
            self.expect(";", "';'")
            edges.append((pred.value, succ.value, pred.line, pred.column))
        self.behaviors.append(
            _PendingBehavior(name.value, edges, name.line, name.column)
        )

    # -- late resolution ---------------------------------------------------

    def resolve(self) -> tuple[list[EventDef], dict[str, BehaviorModel]]:
        model = self.model
        for pf in self.flows:
            src = model.resolve_stage_ref(pf.src)
            dst = model.resolve_stage_ref(pf.dst)
            missing = pf.src if src is None else (pf.dst if dst is None else None)
            if missing is not None:
                self.diags.append(
                    ParseDiagnostic(
                        "error",
                        f"unknown stage reference {missing!r}",
                        pf.line,
                        pf.column,
                    )
                )
                continue
            try:
                fid = model.add_flow(src, dst, pf.carries, pf.anchor)
                model.origin[fid] = (pf.line, pf.column)
            except ModelError as exc:
                self.diags.append(
                    ParseDiagnostic("error", str(exc), pf.line, pf.column)
                )
        for pt in self.triggers:
            src = model.resolve_stage_ref(pt.src)
            dst = model.resolve_stage_ref(pt.dst)
            missing = pt.src if src is None else (pt.dst if dst is None else None)
            if missing is not None:
                self.diags.append(
                    ParseDiagnostic(
                        "error",
                        f"unknown stage reference {missing!r}",
                        pt.line,
                        pt.column,
                    )
                )
                continue
            try:
                gid = model.add_trigger(src, dst)
                model.origin[gid] = (pt.line, pt.column)
            except ModelError as exc:
                self.diags.append(
                    ParseDiagnostic("error", str(exc), pt.line, pt.column)
                )

        defined_events: list[EventDef] = []
        seen_events: dict[str, _PendingEvent] = {}
        for pe in self.events:
            if pe.name in seen_events:
                self.diags.append(
                    ParseDiagnostic(
                        "error",
                        f"event {pe.name!r} is already declared",
                        pe.line,
                        pe.column,
                    )
                )
                continue
            sids: list[str] = []
            bad = False
            for ref in pe.refs:
                sid = model.resolve_stage_ref(ref)
                if sid is None:
                    self.diags.append(
                        ParseDiagnostic(
                            "error",
                            f"unknown stage reference {ref!r}",
                            pe.line,
                            pe.column,
                        )
                    )
                    bad = True
                else:
                    sids.append(sid)
            if bad:
                continue
            try:
                ev = events_mod.define_event(model, pe.name, sids, pe.time)
            except (events_mod.EventError, ModelError) as exc:
                self.diags.append(
                    ParseDiagnostic("error", str(exc), pe.line, pe.column)
                )
                continue
            seen_events[pe.name] = pe
            defined_events.append(ev)

        behaviors: dict[str, BehaviorModel] = {}
        by_id = {ev.id: ev for ev in defined_events}
        for pb in self.behaviors:
            if pb.name in behaviors:
                self.diags.append(
                    ParseDiagnostic(
                        "error",
                        f"behavior {pb.name!r} is already declared",
                        pb.line,
                        pb.column,
                    )
                )
                continue
            edges: list[tuple[str, str]] = []
            for pred, succ, line, col in pb.edges:
                bad = False
                for end in (pred, succ):
                    if end not in by_id:
                        self.diags.append(
                            ParseDiagnostic(
                                "error", f"unknown event {end!r}", line, col
                            )
                        )
                        bad = True
                if pred == succ:
                    self.diags.append(
                        ParseDiagnostic(
                            "error",
                            f"event {pred!r} cannot precede itself",
                            line,
                            col,
                        )
                    )
                    bad = True
                if not bad:
                    edges.append((pred, succ))
            behaviors[pb.name] = events_mod.build_behavior(
                defined_events, edges
            )
        return defined_events, behaviors


def parse(doc: SourceDocument | str) -> ParseResult:
    """Parse one document; never raises on malformed input."""
    if isinstance(doc, str):
        doc = SourceDocument(doc)
    toks, diags = _tokenize(doc.text)
    parser = _Parser(toks, diags)
    parser.parse_document()
    events, behaviors = parser.resolve()
    if any(d.severity == "error" for d in parser.diags):
        return ParseResult(model=None, diagnostics=parser.diags)
    return ParseResult(
        model=parser.model,
        events=events,
        behaviors=behaviors,
        diagnostics=parser.diags,
    )


# ---------------------------------------------------------------------------
# canonical serialization


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _flow_sort_key(model: StaticModel):
    order = {fid: n for n, fid in enumerate(model.flows)}

    def key(fid: str):
        anchor = model.flows[fid].anchor
        return (anchor is None, anchor if anchor is not None else 0, order[fid])

    return key


def serialize(model: StaticModel, events=(), behaviors=None) -> str:
    """Render the canonical text for a model and its declarations.

    Canonical means: thimacs depth-first in declaration order, stages in
    the fixed kind order, flows sorted by anchor then declaration, region
    references sorted; the output is a fixed point of parse-serialize.
    """
    sections: list[str] = []

    def thimac_block(tid: str, depth: int) -> list[str]:
        pad = "  " * depth
        t = model.thimacs[tid]
        lines = [f"{pad}thimac {t.name} {{"]
        for kind in KIND_ORDER:
            sid = t.stages.get(kind)
            if sid is None:
                continue
            alias = model.stages[sid].alias
            suffix = f" as {alias}" if alias else ""
            lines.append(f"{pad}  {kind.value}{suffix};")
        for child in t.children:
            lines.extend(thimac_block(child, depth + 1))
        lines.append(f"{pad}}}")
        return lines

    for root in model.roots:
        sections.append("\n".join(thimac_block(root, 0)))

    flow_lines = []
    for fid in sorted(model.flows, key=_flow_sort_key(model)):
        f = model.flows[fid]
        line = f"flow {model.stage_ref(f.src)} -> {model.stage_ref(f.dst)}"
        if f.carries is not None:
            line += f" carries {_quote(f.carries)}"
        if f.anchor is not None:
            line += f" anchor {f.anchor}"
        flow_lines.append(line + ";")
    if flow_lines:
        sections.append("\n".join(flow_lines))

    trigger_lines = [
        f"trigger {model.stage_ref(g.src)} => {model.stage_ref(g.dst)};"
        for g in model.triggers.values()
    ]
    if trigger_lines:
        sections.append("\n".join(trigger_lines))

    event_lines = []
    for ev in events:
        refs = ", ".join(sorted(model.stage_ref(sid) for sid in ev.region))
        time = f" time {ev.time.start}..{ev.time.end}" if ev.time else ""
        event_lines.append(f"event {ev.name} {{ region [{refs}]{time} }}")
    if event_lines:
        sections.append("\n".join(event_lines))

    for name, beh in (behaviors or {}).items():
        lines = [f"behavior {name} {{"]
        lines.extend(f"  {a} -> {b};" for a, b in beh.edges)
        lines.append("}")
        sections.append("\n".join(lines))

    if not sections:
        return ""
    return "\n\n".join(sections) + "\n"


# ---------------------------------------------------------------------------
# DOT export


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit_dot(model: StaticModel, highlight: Region | None = None) -> str:
    """Graphviz rendering: nested clusters, solid flows, dashed triggers.

    ``highlight`` fills the given region's stages so one event can be
    picked out of the full diagram.
    """
    lit = highlight.stages if highlight is not None else frozenset()
    out: list[str] = [
        "digraph tm {",
        "  rankdir=LR;",
        "  compound=true;",
        "  node [shape=box, fontsize=10];",
    ]

    def cluster(tid: str, depth: int) -> None:
        pad = "  " * (depth + 1)
        t = model.thimacs[tid]
        out.append(f"{pad}subgraph cluster_{tid} {{")
        out.append(f'{pad}  label="{_dot_escape(t.name)}";')
        for kind in KIND_ORDER:
            sid = t.stages.get(kind)
            if sid is None:
                continue
            label = model.stages[sid].alias or kind.value
            attrs = [f'label="{_dot_escape(label)}"']
            if sid in lit:
                attrs.append('style=filled, fillcolor="gold"')
            out.append(f"{pad}  {sid} [{', '.join(attrs)}];")
        for child in t.children:
            cluster(child, depth + 1)
        out.append(f"{pad}}}")

    for root in model.roots:
        cluster(root, 0)

    for fid in sorted(model.flows, key=_flow_sort_key(model)):
        f = model.flows[fid]
        parts = []
        if f.anchor is not None:
            parts.append(f"({f.anchor})")
        if f.carries is not None:
            parts.append(f.carries)
        label = f' [label="{_dot_escape(" ".join(parts))}"]' if parts else ""
        out.append(f"  {f.src} -> {f.dst}{label};")
    for g in model.triggers.values():
        out.append(f"  {g.src} -> {g.dst} [style=dashed];")
    out.append("}")
    return "\n".join(out) + "\n"
