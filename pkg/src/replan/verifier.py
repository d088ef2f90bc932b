"""Reward-term filtering, primary-reward selection and object remapping.

Filtering queries the backend once per reward term and removes terms the
motion plan never asked for; selection marks the single term whose
satisfaction defines subtask success.  Filter-then-select ordering follows
the control-flow diagram this pipeline implements.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .backends.base import Role
from .chat import ChatSession
from .dsl.program import RewardProgram
from .lowlevel import MotionPlan
from .prompts import render_remap_detect, render_remap_rewrite, render_select_primary, render_verify_term

logger = logging.getLogger(__name__)

_STEP_RE = re.compile(r"<step>\s*(-?\d+)\s*</step>")


class VerifierParseError(ValueError):
    pass


@dataclass
class FilterOutcome:
    program: RewardProgram
    # surviving call index -> 1-based motion plan step (None when unparsed)
    step_of_call: dict[int, int | None] = field(default_factory=dict)
    removed: list[str] = field(default_factory=list)


def _single_step(response: str) -> int:
    matches = _STEP_RE.findall(response)
    if len(matches) != 1:
        raise VerifierParseError(f"expected exactly one <step> tag, got "
                                 f"{len(matches)}")
    return int(matches[0])


def filter_reward_terms(session: ChatSession, motion_plan: MotionPlan,
                        program: RewardProgram) -> FilterOutcome:
    """Drop reward terms that map to no motion-plan step.

    reset/execute always survive and survivors keep their order.  A term
    whose verifier response stays unparseable after one retry is retained
    conservatively.
    """
    removals: set[int] = set()
    steps: dict[int, int | None] = {}
    for index, call in enumerate(program.calls):
        if not call.is_term:
            continue
        prompt = render_verify_term(motion_plan.text, call.to_source())
        step: int | None = None
        for _ in range(2):
            try:
                step = _single_step(session.ask(Role.VERIFIER, prompt))
                break
            except VerifierParseError:
                continue
        if step is None:
            logger.warning("verifier response unparseable for %s; term retained",
                           call.to_source())
            steps[index] = None
            continue
        if step == -1:
            removals.add(index)
        else:
            steps[index] = step

    filtered = program.without_calls(removals)
    removed_sources = [program.calls[i].to_source() for i in sorted(removals)]
    remapped: dict[int, int | None] = {}
    surviving = [i for i, c in enumerate(program.calls)
                 if not (c.is_term and i in removals)]
    for new_index, old_index in enumerate(surviving):
        if old_index in steps:
            remapped[new_index] = steps[old_index]
    return FilterOutcome(program=filtered, step_of_call=remapped,
                         removed=removed_sources)


def select_primary(session: ChatSession, action: str, motion_plan: MotionPlan,
                   outcome: FilterOutcome) -> RewardProgram:
    """Mark the primary reward call.

    An inline primary flag wins outright.  Otherwise the backend names the
    plan step after which the task is satisfied; the call mapped to that
    step becomes primary.  Anything unusable falls back to the last reward
    call, so every filtered program ends up with a valid primary.
    """
    program = outcome.program
    if program.primary_index is not None:
        return program
    term_indices = [i for i, c in enumerate(program.calls) if c.is_term]
    if not term_indices:
        return program
    if len(term_indices) == 1:
        return program.with_primary(term_indices[0])

    prompt = render_select_primary(action, motion_plan.text)
    chosen: int | None = None
    for _ in range(2):
        try:
            step = _single_step(session.ask(Role.VERIFIER, prompt))
        except VerifierParseError:
            continue
        candidates = [i for i, s in outcome.step_of_call.items() if s == step]
        if candidates:
            chosen = candidates[0]
            break
    if chosen is None:
        chosen = term_indices[-1]
    return program.with_primary(chosen)


def fallback_primary(program: RewardProgram) -> RewardProgram:
    """Primary selection with no verifier in the loop: the inline flag if
    present, else the last reward call."""
    if program.primary_index is not None:
        return program
    term_indices = [i for i, c in enumerate(program.calls) if c.is_term]
    if not term_indices:
        return program
    return program.with_primary(term_indices[-1])


def remap_objects(session: ChatSession, sentence: str,
                  vocabulary: list[str]) -> tuple[str, bool]:
    """Rewrite off-vocabulary object mentions onto scene names.

    Two stages: a detection query, then a rewrite that is re-checked once.
    Returns (sentence, flagged); flagged means the rewrite still references
    unknown names and the original text was kept.
    """
    detect = session.ask(Role.VERIFIER, render_remap_detect(vocabulary, sentence))
    if not detect.strip().lower().startswith("yes"):
        return sentence, False
    rewritten = session.ask(Role.VERIFIER,
                            render_remap_rewrite(vocabulary, sentence)).strip()
    recheck = session.ask(Role.VERIFIER, render_remap_detect(vocabulary, rewritten))
    if recheck.strip().lower().startswith("yes"):
        logger.warning("remap left off-vocabulary names; keeping original: %r",
                       sentence)
        return sentence, True
    return rewritten, False
