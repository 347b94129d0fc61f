"""Executable thing/machine diagrams.

A thimac is simultaneously a thing and a machine; a machine handles
things through at most five generic actions (create, process, release,
transfer, receive).  This package parses a textual notation for such
diagrams, audits their action grammar, defines events as timed connected
regions, assembles event chronologies, runs deterministic thing-flow
ticks, and checks runs against a chronology.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    ActionKind,
    Flow,
    KIND_ORDER,
    LEGAL_SUCCESSIONS,
    ModelError,
    Region,
    Stage,
    StaticModel,
    Thimac,
    Trigger,
    legal_successor,
    new_model,
)
from .validate import (
    Diagnostic,
    UNVERIFIED_VERBS,
    UnknownVerb,
    VerbLexicon,
    default_lexicon,
    normalize_verb,
    validate,
)
from .events import (
    AmbiguousReading,
    BehaviorModel,
    EventDef,
    EventError,
    NoLegalReading,
    NonLinearRegion,
    TimeSubthimac,
    build_behavior,
    chain_legal,
    check_behavior,
    decode_actions,
    decompose,
    define_event,
    encode_actions,
    event_action_sequence,
    event_moved,
    iter_legal_chains,
)
from .dsl import (
    ParseDiagnostic,
    ParseResult,
    SourceDocument,
    emit_dot,
    parse,
    serialize,
)
from .simulate import (
    ConformanceReport,
    GenericEventInstance,
    ProjectionResult,
    Scenario,
    ScenarioError,
    SimulationError,
    StuckThing,
    ThingInstance,
    Trace,
    conforms,
    load_scenario,
    project,
    render_trace,
    run,
)

__all__ = [
    "ActionKind",
    "AmbiguousReading",
    "BehaviorModel",
    "ConformanceReport",
    "Diagnostic",
    "EventDef",
    "EventError",
    "Flow",
    "GenericEventInstance",
    "KIND_ORDER",
    "LEGAL_SUCCESSIONS",
    "ModelError",
    "NoLegalReading",
    "NonLinearRegion",
    "ParseDiagnostic",
    "ParseResult",
    "ProjectionResult",
    "Region",
    "Scenario",
    "ScenarioError",
    "SimulationError",
    "SourceDocument",
    "Stage",
    "StaticModel",
    "StuckThing",
    "Thimac",
    "ThingInstance",
    "TimeSubthimac",
    "Trace",
    "Trigger",
    "UNVERIFIED_VERBS",
    "UnknownVerb",
    "VerbLexicon",
    "build_behavior",
    "chain_legal",
    "check_behavior",
    "conforms",
    "decode_actions",
    "decompose",
    "default_lexicon",
    "define_event",
    "emit_dot",
    "encode_actions",
    "event_action_sequence",
    "event_moved",
    "iter_legal_chains",
    "legal_successor",
    "load_scenario",
    "new_model",
    "normalize_verb",
    "parse",
    "project",
    "render_trace",
    "run",
    "serialize",
    "validate",
    "__version__",
]
