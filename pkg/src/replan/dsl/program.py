"""AST for the restricted reward-script language.

A program is a flat sequence of calls: one reset up front, reward terms in
the middle, one execute at the end.  No variables, arithmetic or control
flow exist in the language.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

Literal = Union[str, int, float, bool]

RESET = "reset_reward"
EXECUTE = "execute_plan"
MINIMIZE_L2 = "minimize_l2_distance_reward"
MAXIMIZE_L2 = "maximize_l2_distance_reward"
SET_JOINT = "set_joint_fraction_reward"
SET_Z = "set_obj_z_position_reward"
SET_ORIENTATION = "set_obj_orientation_reward"

FUNCTIONS = (RESET, EXECUTE, MINIMIZE_L2, MAXIMIZE_L2, SET_JOINT, SET_Z, SET_ORIENTATION)
TERM_FUNCTIONS = (MINIMIZE_L2, MAXIMIZE_L2, SET_JOINT, SET_Z, SET_ORIENTATION)

DEFAULT_MAX_DISTANCE = 0.5
DEFAULT_DURATION = 2.0


@dataclass(frozen=True, slots=True)
class RewardCall:
    """One call statement, e.g. minimize_l2_distance_reward("palm", "kettle")."""

    function: str
    args: tuple[Literal, ...] = ()
    kwargs: tuple[tuple[str, Literal], ...] = ()
    line: int = 0

    def kwarg(self, name: str, default: Optional[Literal] = None) -> Optional[Literal]:
        for key, value in self.kwargs:
            if key == name:
                return value
        return default

    @property
    def is_term(self) -> bool:
        return self.function in TERM_FUNCTIONS

    @property
    def inline_primary(self) -> bool:
        return bool(self.kwarg("primary_reward", False))

    def object_args(self) -> tuple[str, ...]:
        """String arguments naming scene objects (joint names excluded)."""
        if self.function in (MINIMIZE_L2, MAXIMIZE_L2):
            return tuple(a for a in self.args[:2] if isinstance(a, str))
        if self.function in (SET_Z, SET_ORIENTATION):
            return tuple(a for a in self.args[:1] if isinstance(a, str))
        return ()

    def joint_args(self) -> tuple[str, ...]:
        if self.function == SET_JOINT:
            return tuple(a for a in self.args[:1] if isinstance(a, str))
        return ()

    def to_source(self) -> str:
        parts = [_render_literal(a) for a in self.args]
        parts += [f"{k}={_render_literal(v)}" for k, v in self.kwargs]
        return f"{self.function}({', '.join(parts)})"

    def to_json(self) -> dict:
        return {
            "function": self.function,
            "args": list(self.args),
            "kwargs": {k: v for k, v in self.kwargs},
            "line": self.line,
        }


def _render_literal(value: Literal) -> str:
    if isinstance(value, str):
        return f'"{value}"'
    return repr(value)


@dataclass(frozen=True, slots=True)
class RewardProgram:
    """Parsed program: ordered calls with an optional primary-term marker."""

    calls: tuple[RewardCall, ...]
    primary_index: Optional[int] = None
    source: str = field(default="", compare=False)

    @property
    def term_calls(self) -> tuple[RewardCall, ...]:
        return tuple(c for c in self.calls if c.is_term)

    @property
    def duration(self) -> float:
        for call in self.calls:
            if call.function == EXECUTE:
                if call.args:
                    return float(call.args[0])
                kw = call.kwarg("duration")
                if kw is not None:
                    return float(kw)
        return DEFAULT_DURATION

    def with_primary(self, index: Optional[int]) -> "RewardProgram":
        if index is not None:
            call = self.calls[index]
            if not call.is_term:
                raise ValueError(f"call {index} ({call.function}) cannot be primary")
        return replace(self, primary_index=index)

    def without_calls(self, indices: set[int]) -> "RewardProgram":
        """Drop the given reward-term calls, keeping reset/execute and order."""
        kept = tuple(c for i, c in enumerate(self.calls)
                     if i not in indices or not c.is_term)
        primary = None
        if self.primary_index is not None and self.primary_index not in indices:
            primary = sum(1 for i in range(self.primary_index)
                          if i not in indices or not self.calls[i].is_term)
        return RewardProgram(calls=kept, primary_index=primary, source=self.source)

    def to_source(self) -> str:
        return "\n".join(call.to_source() for call in self.calls)

    def to_json(self) -> dict:
        return {
            "calls": [c.to_json() for c in self.calls],
            "primary_index": self.primary_index,
            "source": self.source,
        }
