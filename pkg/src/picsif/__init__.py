"""picsif: an applied pi-calculus engine and bounded accountability checker
for boutique-SCIF messaging scenarios."""

from .terms import (  # noqa: F401
    CHANNEL,
    MESSAGE,
    Call,
    ChannelId,
    Choice,
    FunctionCall,
    Hole,
    Inaction,
    Match,
    Name,
    Parallel,
    Receive,
    Replication,
    Restriction,
    Send,
    Term,
    Variable,
    alpha_equivalent,
    free_names,
    substitute,
)
from .vclock import VectorClockList, Ordering, happened_before, inc_ele, init_clock, max_vec  # noqa: F401
from .congruence import CongruenceProof, RewriteStep, apply_axiom, congruent, insert_into_hole, normalize  # noqa: F401
from .surface import ParseError, ScenarioFile, SourceSpan, parse, parse_process, pretty, pretty_process  # noqa: F401
from .semantics import (  # noqa: F401
    AuthorizationRegistry,
    EventRecord,
    ScenarioState,
    enabled_redexes,
    run,
    step,
)
from .auditor import Verdict, audit  # noqa: F401
from .explorer import SearchConfig, Witness, explore, replay  # noqa: F401

__version__ = "0.1.0"
