"""circkit: hierarchical quantum circuit generation, rewriting, resource
counting and statevector simulation."""

from .builder import BuildContext, Finished, LiftRequest, Suspended, build, generate, new_context
from .circuit import (
    C, H, Q, S, SDG, SWAP, T, TDG, X, Y, Z, Call, Circuit, Control, Discard, Init, Kind, Measure,
    SubroutineDef, Term, Unitary, Violation, WireKind, inline, neg, phase, phase_dg, reverse, rz, validate,
)
from .resources import CountVector, count, peak_width, report
from .sim import RunResult, StateVector, equiv_up_to_phase, run, run_interactive, unitary_of
from .text import parse, serialize
from .transform import PRESETS, BaseSet, decompose_to_base, lower_controls, transform

__version__ = "0.1.0"
