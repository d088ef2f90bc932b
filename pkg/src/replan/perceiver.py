"""Perception protocol: presence sweep, state queries and failure diagnosis.

A failure diagnosis always gathers exactly six explanations (one per probe
phrasing), routes each through object remapping, and consolidates them into
at most two summary reasons.  Reasons about the robot itself never reach the
replanner.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backends.base import Role
from .chat import ChatSession
from .prompts import (
    DIAGNOSIS_VARIANTS,
    render_failure_probe,
    render_failure_summary,
    render_presence,
    render_state_query,
)
from .verifier import remap_objects

_ROBOT_WORDS = ("robot", "arm", "gripper", "manipulator", "palm")


class UndiagnosedFailure(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Diagnosis:
    raw_explanations: tuple[str, ...]
    remapped_explanations: tuple[str, ...]
    reasons: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "raw_explanations": list(self.raw_explanations),
            "remapped_explanations": list(self.remapped_explanations),
            "reasons": list(self.reasons),
        }


def presence_sweep(session: ChatSession, vocabulary: list[str],
                   images: tuple[str, ...] = ()) -> list[str]:
    """One presence query per published name; yes-leading answers collected.
    Anything that is not a clean yes counts as unseen."""
    seen = []
    for name in vocabulary:
        response = session.ask(Role.PERCEIVER, render_presence(name))
        if response.strip().lower().startswith("yes"):
            seen.append(name)
    return seen


def query_state(session: ChatSession, question: str, vocabulary: list[str],
                context: str = "", images: tuple[str, ...] = ()) -> str:
    prompt = render_state_query(question, vocabulary, context, images=images)
    return session.ask(Role.PERCEIVER, prompt)


def _robot_only(reason: str, vocabulary: list[str]) -> bool:
    mentions_scene = any(
        re.search(rf"(?<![\w]){re.escape(name)}(?![\w])", reason)
        for name in vocabulary
    )
    if mentions_scene:
        return False
    return any(word in reason.lower() for word in _ROBOT_WORDS)


def diagnose_failure(session: ChatSession, failed_action: str,
                     vocabulary: list[str], remap: bool = True,
                     images: tuple[str, ...] = ()) -> Diagnosis:
    """Probe why a motion failed: six phrasings, remap, then summarize."""
    raw = []
    for variant in range(DIAGNOSIS_VARIANTS):
        prompt = render_failure_probe(variant, failed_action, vocabulary,
                                      images=images)
        raw.append(session.ask(Role.PERCEIVER, prompt))

    remapped = []
    for explanation in raw:
        if remap:
            text, _ = remap_objects(session, explanation, vocabulary)
        else:
            text = explanation
        remapped.append(text)

    summary_prompt = render_failure_summary(failed_action, remapped)
    summary = session.ask(Role.PLANNER, summary_prompt)
    reasons = [r.strip() for r in
               re.findall(r"<reason>(.*?)</reason>", summary, re.DOTALL)]
    reasons = [r for r in reasons if r and not _robot_only(r, vocabulary)][:2]
    if not reasons:
        raise UndiagnosedFailure(f"no usable reasons diagnosing {failed_action!r}")
    return Diagnosis(raw_explanations=tuple(raw),
                     remapped_explanations=tuple(remapped),
                     reasons=tuple(reasons))
