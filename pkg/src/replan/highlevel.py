"""High-level planning prompts and their response parsers.

Plan text is parsed leniently around the markers and strictly inside them:
whatever prose surrounds it, the steps must sit between [start plan] and
[end plan], one per ">"-prefixed line.  Every parse failure earns exactly
one automatic re-prompt before surfacing an error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .backends.base import Role
from .chat import ChatSession
from .prompts import (
    FailedActionAttempt,
    FailedPlanAttempt,
    HistoryEntry,
    Prompt,
    render_action_completion,
    render_action_type,
    render_perceiver_question,
    render_plan,
    render_question_type,
)


class ParsePlanError(ValueError):
    pass


class PlanBudgetExhausted(RuntimeError):
    pass


class ClassifyError(ValueError):
    pass


class NoQuestions(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Plan:
    thought: str
    steps: tuple[str, ...]
    attempt_index: int = 1

    def to_json(self) -> dict:
        return {"thought": self.thought, "steps": list(self.steps),
                "attempt_index": self.attempt_index}


@dataclass
class AttemptHistory:
    """Ordered failure records feeding replanning prompts."""

    entries: list[HistoryEntry] = field(default_factory=list)
    action_retries: dict[str, int] = field(default_factory=dict)

    def add_action_failure(self, failed_step: str, executed_action: str,
                           reason: str) -> None:
        self.entries.append(FailedActionAttempt(
            failed_step=failed_step, executed_action=executed_action, reason=reason))
        self.action_retries[failed_step] = self.action_retries.get(failed_step, 0) + 1

    def add_plan_failure(self, plan: Plan, reason: str) -> None:
        self.entries.append(FailedPlanAttempt(
            thought=plan.thought, steps=plan.steps, reason=reason))

    def retries_for(self, step: str) -> int:
        return self.action_retries.get(step, 0)


def parse_plan(response: str, attempt_index: int = 1) -> Plan:
    thought_match = re.search(r"<thought>(.*?)</thought>", response, re.DOTALL)
    thought = thought_match.group(1).strip() if thought_match else ""
    start = response.find("[start plan]")
    end = response.find("[end plan]")
    if start < 0 or end < 0 or end <= start:
        raise ParsePlanError("missing [start plan]/[end plan] markers")
    body = response[start + len("[start plan]"):end]
    steps = []
    for line in body.splitlines():
        stripped = line.strip()
        if stripped.startswith(">"):
            step = stripped[1:].strip()
            if step:
                steps.append(step)
    if not steps:
        raise ParsePlanError("no >-prefixed steps between plan markers")
    return Plan(thought=thought, steps=tuple(steps), attempt_index=attempt_index)


def generate_plan(session: ChatSession, goal: str, visible_objects: list[str],
                  history: Optional[list[HistoryEntry]] = None,
                  attempt_index: int = 1, max_attempts: int = 3,
                  images: tuple[str, ...] = ()) -> Plan:
    """Ask for a plan; one re-prompt on a malformed response."""
    if not visible_objects:
        raise ValueError("visible object list must be non-empty")
    if attempt_index > max_attempts:
        raise PlanBudgetExhausted(f"plan attempt {attempt_index} > budget "
                                  f"{max_attempts}")
    prompt = render_plan(visible_objects, goal, history, images=images)
    response = session.ask(Role.PLANNER, prompt)
    try:
        return parse_plan(response, attempt_index)
    except ParsePlanError:
        response = session.ask(Role.PLANNER, prompt)
        return parse_plan(response, attempt_index)


def _yes_no(response: str) -> Optional[bool]:
    lead = response.strip().lower()
    if lead.startswith("yes"):
        return True
    if lead.startswith("no"):
        return False
    return None


def classify_action(session: ChatSession, action: str) -> str:
    """Classify a subtask as "vision" or "motion" from a yes/no lead."""
    if not action.strip():
        raise ValueError("action text must be non-empty")
    prompt = render_action_type(action)
    for _ in range(2):
        verdict = _yes_no(session.ask(Role.PLANNER, prompt))
        if verdict is not None:
            return "vision" if verdict else "motion"
    raise ClassifyError(f"no yes/no lead classifying {action!r}")


def generate_questions(session: ChatSession, goal: str, plan: Plan, action: str,
                       observed_objects: list[str]) -> list[str]:
    """Questions for the perception model (at most two, typed and filtered)."""
    prompt = render_perceiver_question(goal, list(plan.steps), action,
                                       observed_objects)
    response = session.ask(Role.PLANNER, prompt)
    raw = re.findall(r"<question>(.*?)</question>", response, re.DOTALL)
    questions = [q.strip() for q in raw if q.strip()][:2]
    kept = []
    for question in questions:
        type_response = session.ask(Role.PLANNER, render_question_type(question))
        if "NEITHER" in type_response.upper():
            continue
        kept.append(question)
    if not kept:
        raise NoQuestions(f"no usable questions for {action!r}")
    return kept


def check_action_complete(session: ChatSession, plan: Plan, action: str,
                          qa_pairs: list[tuple[str, str]],
                          ) -> tuple[bool, Optional[str], str]:
    """Completion check: (done, residual motion action, raw response).

    A malformed response counts as not-done with no residual.
    """
    if not qa_pairs:
        raise ValueError("completion check needs at least one QA pair")
    prompt = render_action_completion(list(plan.steps), action, qa_pairs)
    response = session.ask(Role.PLANNER, prompt)
    verdict = _yes_no(response)
    if verdict is None:
        return False, None, response
    if verdict:
        return True, None, response
    residual_match = re.search(r"<Action>(.*?)</Action>", response, re.DOTALL)
    residual = residual_match.group(1).strip() if residual_match else None
    return False, residual or None, response
