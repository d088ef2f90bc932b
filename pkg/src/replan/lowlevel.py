"""Motion-plan prompting and reward-code generation for one motion subtask."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backends.base import Role
from .chat import ChatSession
from .prompts import (
    Prompt,
    render_motion_plan,
    render_relocation_check,
    render_reward_code,
    render_reward_code_fix,
)


class MotionPlanParseError(ValueError):
    pass


class CodegenFailed(RuntimeError):
    def __init__(self, message: str, source: str = ""):
        self.source = source
        super().__init__(message)


@dataclass(frozen=True, slots=True)
class MotionPlan:
    lines: tuple[str, ...]
    relocation: bool

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    def numbered(self) -> str:
        return "\n".join(f"{i}. {line}" for i, line in enumerate(self.lines, start=1))


def _yes_no(response: str) -> bool | None:
    lead = response.strip().lower()
    if lead.startswith("yes"):
        return True
    if lead.startswith("no"):
        return False
    return None


def needs_relocation(session: ChatSession, action: str) -> bool:
    """Does the subtask move an object other than the arm? Defaults to False
    (logged by the caller) when the backend will not give a yes/no lead."""
    prompt = render_relocation_check(action)
    for _ in range(2):
        verdict = _yes_no(session.ask(Role.PLANNER, prompt))
        if verdict is not None:
            return verdict
    return False


def parse_motion_plan(response: str, relocation: bool) -> MotionPlan:
    start = response.find("[start of description]")
    end = response.find("[end of description]")
    if start < 0 or end < 0 or end <= start:
        raise MotionPlanParseError("missing [start of description] markers")
    body = response[start + len("[start of description]"):end]
    lines = tuple(line.strip() for line in body.splitlines() if line.strip())
    if not lines:
        raise MotionPlanParseError("empty motion plan")
    return MotionPlan(lines=lines, relocation=relocation)


def generate_motion_plan(session: ChatSession, action: str, objects: list[str],
                         joints: list[str], full_plan: list[str],
                         observations: list[tuple[str, str]],
                         relocation: bool) -> MotionPlan:
    prompt = render_motion_plan(objects, joints, relocation, full_plan,
                                observations, action)
    response = session.ask(Role.PLANNER, prompt)
    try:
        return parse_motion_plan(response, relocation)
    except MotionPlanParseError:
        response = session.ask(Role.PLANNER, prompt)
        return parse_motion_plan(response, relocation)


def generate_reward_code(session: ChatSession, action: str, motion_plan: MotionPlan,
                         objects: list[str], joints: list[str]) -> tuple[str, Prompt]:
    """Raw reward-script text for one motion plan; parsing and validation are
    the reward-language module's job.  Returns (source, prompt) so the caller
    can issue one corrective re-prompt via ``regenerate_reward_code``."""
    prompt = render_reward_code(objects, joints, action, motion_plan.text)
    return session.ask(Role.PLANNER, prompt), prompt


def regenerate_reward_code(session: ChatSession, previous_prompt: Prompt,
                           bad_source: str, error: str) -> str:
    """Corrective re-prompt carrying the exact parser error and the offending
    program text."""
    prompt = render_reward_code_fix(previous_prompt, bad_source, error)
    return session.ask(Role.PLANNER, prompt)
