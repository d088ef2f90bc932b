"""Compilation of validated programs to residual cost terms.

The running cost is c(x, u) = -sum_i w_i * r_i(x, u, params_i): each call
maps to one residual term with unit weight, and improving any single
residual strictly decreases the cost.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from ..world.scene import WorldState, distance, wrap_angle
from .program import (
    DEFAULT_MAX_DISTANCE,
    MAXIMIZE_L2,
    MINIMIZE_L2,
    SET_JOINT,
    SET_ORIENTATION,
    SET_Z,
    RewardCall,
    RewardProgram,
)

# Residual magnitudes below these count as "satisfied" for the primary term.
SATISFACTION_TOLERANCE = {
    MINIMIZE_L2: 0.06,
    SET_JOINT: 0.3,
    SET_Z: 0.05,
    SET_ORIENTATION: 0.15,
}


class CompileError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CostTerm:
    """One residual: kind, its parameters and a positive weight."""

    kind: str
    subject: str
    reference: str = ""
    target: float = 0.0
    weight: float = 1.0

    def reward(self, state: WorldState) -> float:
        """Reward value r_i(x); the cost contribution is -weight * reward."""
        if self.kind == MINIMIZE_L2:
            return -distance(state.object_position(self.subject),
                             state.object_position(self.reference))
        if self.kind == MAXIMIZE_L2:
            d = distance(state.object_position(self.subject),
                         state.object_position(self.reference))
            return min(d, self.target)
        if self.kind == SET_JOINT:
            return -abs(state.joint_fraction(self.subject) - self.target)
        if self.kind == SET_Z:
            return -abs(state.object_position(self.subject)[2] - self.target)
        if self.kind == SET_ORIENTATION:
            scene = state.scene
            idx = scene.object_index(scene.resolve_name(self.subject))
            return -abs(wrap_angle(state.orientations[idx] - self.target))
        raise CompileError(f"unknown term kind {self.kind!r}")

    def residual(self, state: WorldState) -> float:
        """Distance from satisfaction; zero means the term is fully met."""
        if self.kind == MAXIMIZE_L2:
            return self.target - self.reward(state)
        return -self.reward(state)

    def satisfied(self, state: WorldState) -> bool:
        if self.kind == MAXIMIZE_L2:
            return self.residual(state) <= 0.0
        return self.residual(state) <= SATISFACTION_TOLERANCE[self.kind]


@dataclass(frozen=True, slots=True)
class CostSpec:
    """Compiled cost: residual terms, execution duration, primary marker."""

    terms: tuple[CostTerm, ...]
    duration: float
    primary_term: Optional[int] = None

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise CompileError(f"duration {self.duration} must be positive")
        if any(t.weight <= 0.0 for t in self.terms):
            raise CompileError("weights must be positive")
        if self.primary_term is not None and not (
            0 <= self.primary_term < len(self.terms)
        ):
            raise CompileError(f"primary term {self.primary_term} out of range")

    def cost(self, state: WorldState) -> float:
        return -sum(t.weight * t.reward(state) for t in self.terms)

    def with_primary(self, index: Optional[int]) -> "CostSpec":
        return replace(self, primary_term=index)


def _term_for(call: RewardCall) -> CostTerm:
    if call.function == MINIMIZE_L2:
        return CostTerm(MINIMIZE_L2, subject=str(call.args[0]),
                        reference=str(call.args[1]))
    if call.function == MAXIMIZE_L2:
        target = call.args[2] if len(call.args) > 2 else call.kwarg("distance")
        if target is None:
            target = DEFAULT_MAX_DISTANCE
        return CostTerm(MAXIMIZE_L2, subject=str(call.args[0]),
                        reference=str(call.args[1]), target=float(target))
    if call.function == SET_JOINT:
        target = call.args[1] if len(call.args) > 1 else call.kwarg("fraction")
        return CostTerm(SET_JOINT, subject=str(call.args[0]), target=float(target))
    if call.function == SET_Z:
        return CostTerm(SET_Z, subject=str(call.args[0]), target=float(call.args[1]))
    if call.function == SET_ORIENTATION:
        return CostTerm(SET_ORIENTATION, subject=str(call.args[0]),
                        target=float(call.args[1]))
    raise CompileError(f"{call.function} is not a reward term")


def compile_program(program: RewardProgram) -> CostSpec:
    """Lower a validated program to a CostSpec, term i per reward call i."""
    terms = tuple(_term_for(c) for c in program.term_calls)
    primary = None
    if program.primary_index is not None:
        primary = sum(1 for c in program.calls[: program.primary_index] if c.is_term)
    return CostSpec(terms=terms, duration=program.duration, primary_term=primary)


def primary_satisfied(spec: CostSpec, state: WorldState) -> bool:
    """True when the primary residual is inside its satisfaction tolerance."""
    if spec.primary_term is None:
        raise ValueError("cost spec has no primary term")
    return spec.terms[spec.primary_term].satisfied(state)
