"""tracefix: repair small imperative programs by editing their traces.

Load a program, run it to get a configuration trace, pick a step and say
what a variable should have been, and search a bounded space of expression
rewrites for the cheapest program that reaches the edited state."""

from .lang import parse_program, pretty_print, diff_programs, apply_patch
from .tracer import (execute, satisfies_partial, satisfying_indices,
                     run_test, Manipulation, Test, Trace, Configuration,
                     RuntimeFault, UNDEF, WILDCARD)
from .sketcher import sketch, original_assignment, instantiate
from .distances import (Cost, syntactic_distance, config_distance,
                        trace_distance, semantic_distance, aggregate)
from .solver import (repair, repair_single_line, RepairOptions, RepairResult,
                     NoRepair, Session, open_session, next_repair,
                     RejectPatch, DisallowLocation, evaluate_candidate)
from .extfun import (cegis_repair, harvest_interpretation, verify_guesses,
                     DEFAULT_REGISTRY, PartialInterpretation, CegisResult)
from .slicer import backward_slice, forward_reachable, summarize, SliceResult

__version__ = "0.1.0"
