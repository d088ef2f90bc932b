"""Reward-script language: parser, validation and cost compilation."""

from .compiler import (
    SATISFACTION_TOLERANCE,
    CompileError,
    CostSpec,
    CostTerm,
    compile_program,
    primary_satisfied,
)
from .parser import ParseError, parse_reward_program
from .program import (
    DEFAULT_DURATION,
    DEFAULT_MAX_DISTANCE,
    EXECUTE,
    FUNCTIONS,
    MAXIMIZE_L2,
    MINIMIZE_L2,
    RESET,
    SET_JOINT,
    SET_ORIENTATION,
    SET_Z,
    TERM_FUNCTIONS,
    RewardCall,
    RewardProgram,
)
from .validation import (
    IMPLICIT_NAMES,
    UnknownJoint,
    UnknownObject,
    ValidationError,
    validate_names,
)

__all__ = [
    "DEFAULT_DURATION",
    "DEFAULT_MAX_DISTANCE",
    "EXECUTE",
    "FUNCTIONS",
    "IMPLICIT_NAMES",
    "MAXIMIZE_L2",
    "MINIMIZE_L2",
    "RESET",
    "SATISFACTION_TOLERANCE",
    "SET_JOINT",
    "SET_ORIENTATION",
    "SET_Z",
    "TERM_FUNCTIONS",
    "CompileError",
    "CostSpec",
    "CostTerm",
    "ParseError",
    "RewardCall",
    "RewardProgram",
    "UnknownJoint",
    "UnknownObject",
    "ValidationError",
    "compile_program",
    "parse_reward_program",
    "primary_satisfied",
    "validate_names",
]
