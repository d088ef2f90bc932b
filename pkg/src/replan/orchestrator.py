"""Closed-loop episode control: plan, classify, execute, diagnose, replan.

One episode walks the three-level loop: a plan is generated from the goal
and the visible objects; each subtask is classified and executed through the
vision path (questions, state queries, completion check) or the motion path
(relocation check, motion plan, reward code, verification, sampling MPC).
A failed motion gets diagnosed and triggers an action-level replan within
the attempt budget R; a completed-but-unsuccessful plan triggers a new plan
with full failure history within the plan budget P.  The episode always
terminates, whatever the backend returns, and reported success comes from
the ground-truth predicate only.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import highlevel, lowlevel, perceiver, verifier
from .backends.base import Backend
from .chat import ChatSession
from .dsl import compiler as dsl_compiler
from .dsl import parser as dsl_parser
from .dsl import validation as dsl_validation
from .highlevel import AttemptHistory, Plan
from .mpc import MpcConfig, run_mpc
from .perceiver import Diagnosis, UndiagnosedFailure
from .rollout import RolloutLog
from .world.dynamics import step, visible_objects
from .world.scene import Control, WorldState
from .world.tasks import TaskDefinition, check_success, load_task

logger = logging.getLogger(__name__)

ABLATIONS = ("verifier", "perceiver", "replan")

BackendFactory = Callable[[TaskDefinition, Callable[[], WorldState]], Backend]


@dataclass(frozen=True)
class EpisodeConfig:
    seed: int = 0
    max_plan_attempts: int = 3   # P
    max_action_retries: int = 2  # R, action-level replans per plan attempt
    noise_rate: float = 0.0
    ablations: frozenset = frozenset()
    mpc_horizon: int = 20
    mpc_samples: int = 32
    mpc_noise_sigma: float = 0.15
    mpc_dt: float = 0.05
    eval_threads: int = 1
    max_steps_per_plan: int = 12

    def ablated(self, name: str) -> bool:
        return name in self.ablations


def apply_ablation(config: EpisodeConfig, flags) -> EpisodeConfig:
    """Disable modules: -verifier skips filtering/selection/remapping,
    -perceiver freezes vision at the initial view, -replan forces P=1, R=0."""
    flags = frozenset(flags)
    unknown = flags - set(ABLATIONS)
    if unknown:
        raise ValueError(f"unknown ablation flags: {sorted(unknown)}")
    config = replace(config, ablations=config.ablations | flags)
    if "replan" in flags:
        config = replace(config, max_plan_attempts=1, max_action_retries=0)
    return config


@dataclass
class RolloutState:
    task: TaskDefinition
    world: WorldState
    plan: Optional[Plan] = None
    subtask_cursor: int = 0
    history: AttemptHistory = field(default_factory=AttemptHistory)
    observations: list = field(default_factory=list)
    perceiver_actions: int = 0
    mpc_actions: int = 0
    plan_attempts: int = 0
    outcome: str = "running"
    failure_reason: str = ""
    agent_believed_done: bool = False

    @property
    def action_count(self) -> int:
        return self.perceiver_actions + self.mpc_actions


def derive_seed(*parts) -> int:
    digest = hashlib.sha256(repr(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class _Episode:
    def __init__(self, task: TaskDefinition, backend: Backend,
                 config: EpisodeConfig):
        self.task = task
        self.config = config
        self.state = RolloutState(task=task, world=task.initial_state)
        self.session = ChatSession(backend)
        self.log = RolloutLog()
        # the frozen view used when the perceiver is ablated
        self.initial_view = visible_objects(self.state.world)
        self.agent_view = list(self.initial_view)

    # -- small helpers ---------------------------------------------------------

    @property
    def world(self) -> WorldState:
        return self.state.world

    @world.setter
    def world(self, value: WorldState) -> None:
        self.state.world = value

    def emit(self, event: str, payload: dict) -> None:
        payload = dict(payload)
        payload["exchanges"] = self.session.drain()
        self.log.emit(event, self.state.world.time, payload)

    def current_view(self) -> list[str]:
        if self.config.ablated("perceiver"):
            return list(self.initial_view)
        return visible_objects(self.world)

    def _strip_verdict(self, response: str) -> str:
        text = response.strip()
        for lead in ("yes,", "yes.", "yes", "no,", "no.", "no"):
            if text.lower().startswith(lead):
                text = text[len(lead):].strip()
                break
        return text or response.strip()

    # -- perception ------------------------------------------------------------

    def sweep(self) -> list[str]:
        if self.config.ablated("perceiver"):
            self.emit("presence", {"visible": list(self.initial_view),
                                   "ablated": True})
            return list(self.initial_view)
        seen = perceiver.presence_sweep(self.session,
                                        list(self.task.interactable_objects))
        self.state.perceiver_actions += 1
        self.agent_view = seen
        self.emit("presence", {"visible": seen, "ablated": False})
        return seen

    def diagnose(self, action: str) -> Optional[Diagnosis]:
        if self.config.ablated("perceiver"):
            self.emit("diagnosis", {"action": action, "ablated": True,
                                    "reasons": []})
            return None
        try:
            diagnosis = perceiver.diagnose_failure(
                self.session, action, self.current_view(),
                remap=not self.config.ablated("verifier"))
        except UndiagnosedFailure as exc:
            self.state.perceiver_actions += 1
            self.emit("diagnosis", {"action": action, "error": str(exc),
                                    "reasons": []})
            return None
        self.state.perceiver_actions += 1
        self.emit("diagnosis", {"action": action, **diagnosis.to_json()})
        return diagnosis

    # -- planning ----------------------------------------------------------------

    def new_plan(self, attempt: int) -> Optional[Plan]:
        visible = self.sweep()
        if not visible:
            visible = list(self.task.interactable_objects)
        try:
            plan = highlevel.generate_plan(
                self.session, self.task.instruction, visible,
                history=self.state.history.entries, attempt_index=attempt,
                max_attempts=self.config.max_plan_attempts)
        except highlevel.ParsePlanError as exc:
            self.emit("plan", {"attempt": attempt, "error": str(exc)})
            return None
        self.state.plan = plan
        self.state.subtask_cursor = 0
        self.emit("plan", {"attempt": attempt, **plan.to_json()})
        return plan

    def goal_check(self, plan: Plan) -> tuple[bool, str]:
        """Agent-level belief that the overall goal is accomplished."""
        qa = self.state.observations or [("Is the goal accomplished?",
                                          "(no observations recorded)")]
        try:
            done, _, response = highlevel.check_action_complete(
                self.session, plan, self.task.instruction, qa)
        except Exception as exc:  # malformed backend output is a failure path
            logger.warning("goal check failed: %s", exc)
            return False, "the goal check could not be parsed"
        return done, self._strip_verdict(response)

    # -- vision path ---------------------------------------------------------------

    def vision_action(self, plan: Plan, action: str) -> tuple[bool, str]:
        if self.config.ablated("perceiver"):
            self.emit("qa", {"action": action, "ablated": True, "auto_done": True})
            return True, ""

        qa_pairs = self._ask_questions(plan, action)
        done, residual, response = self._completion(plan, action, qa_pairs)
        if done:
            return True, ""
        if residual:
            self.emit("replan", {"kind": "residual", "action": action,
                                 "residual": residual})
            ok, reason, _ = self.motion_action(plan, residual)
            if not ok:
                return False, f"residual action failed: {reason}"
            qa_pairs = self._ask_questions(plan, action)
            done, _, response = self._completion(plan, action, qa_pairs)
            if done:
                return True, ""
        return False, self._strip_verdict(response)

    def _ask_questions(self, plan: Plan, action: str) -> list[tuple[str, str]]:
        try:
            questions = highlevel.generate_questions(
                self.session, self.task.instruction, plan, action,
                self.agent_view)
        except highlevel.NoQuestions:
            self.emit("question", {"action": action, "questions": []})
            return []
        self.emit("question", {"action": action, "questions": questions})
        qa_pairs = []
        for question in questions:
            answer = perceiver.query_state(
                self.session, question, list(self.task.interactable_objects))
            self.state.perceiver_actions += 1
            qa_pairs.append((question, answer))
            self.state.observations.append((question, answer))
            self.emit("qa", {"question": question, "answer": answer})
        return qa_pairs

    def _completion(self, plan: Plan, action: str,
                    qa_pairs: list[tuple[str, str]]) -> tuple[bool, Optional[str], str]:
        pairs = qa_pairs or self.state.observations
        if not pairs:
            return False, None, "no observations were available"
        return highlevel.check_action_complete(self.session, plan, action, pairs)

    # -- motion path -------------------------------------------------------------------

    def motion_action(self, plan: Plan, action: str,
                      ) -> tuple[bool, str, Optional[Diagnosis]]:
        relocation = lowlevel.needs_relocation(self.session, action)
        view = self.current_view()
        try:
            motion_plan = lowlevel.generate_motion_plan(
                self.session, action, view, list(self.task.joints),
                list(plan.steps), self.state.observations, relocation)
        except lowlevel.MotionPlanParseError as exc:
            self.emit("motion-plan", {"action": action, "error": str(exc)})
            return False, f"motion plan unparseable: {exc}", None
        self.emit("motion-plan", {"action": action, "relocation": relocation,
                                  "lines": list(motion_plan.lines)})

        program = self._reward_program(action, motion_plan, view)
        if program is None:
            return False, "reward code invalid", None

        if not self.config.ablated("verifier"):
            outcome = verifier.filter_reward_terms(self.session, motion_plan,
                                                   program)
            program = verifier.select_primary(self.session, action, motion_plan,
                                              outcome)
            self.emit("verify", {"action": action, "removed": outcome.removed,
                                 "primary_index": program.primary_index})
        else:
            program = verifier.fallback_primary(program)
            self.emit("verify", {"action": action, "ablated": True,
                                 "primary_index": program.primary_index})

        spec = dsl_compiler.compile_program(program)
        mpc_config = MpcConfig(
            horizon=self.config.mpc_horizon,
            samples=self.config.mpc_samples,
            noise_sigma=self.config.mpc_noise_sigma,
            dt=self.config.mpc_dt,
            max_wall_duration=spec.duration * 4.0,
            rng_seed=derive_seed(self.config.seed, "mpc", self.state.mpc_actions),
            eval_threads=self.config.eval_threads,
        )
        result = run_mpc(self.world, spec, mpc_config)
        self.world = result.final_state
        # open the gripper so the carried object settles before the next skill
        self.world = step(self.world, Control(grab=False), self.config.mpc_dt)
        self.state.mpc_actions += 1
        self.emit("mpc", {
            "action": action,
            "success": result.success,
            "reason": result.reason,
            "steps_used": result.steps_used,
            "cost_trace": [round(c, 6) for c in result.cost_trace],
            "trajectory": result.trajectory_summary(),
            "state": self.world.snapshot(),
        })
        if result.success:
            return True, "", None
        diagnosis = self.diagnose(action)
        return False, result.reason, diagnosis

    def _reward_program(self, action: str, motion_plan, view):
        source, code_prompt = lowlevel.generate_reward_code(
            self.session, action, motion_plan, view, list(self.task.joints))
        for attempt in range(2):
            try:
                program = dsl_parser.parse_reward_program(source)
                dsl_validation.validate_names(
                    program, self.task.reward_vocabulary, self.task.joints)
                self.emit("reward-code", {"action": action, "source": source,
                                          "calls": len(program.calls)})
                return program
            except (dsl_parser.ParseError, dsl_validation.ValidationError) as exc:
                if attempt == 0:
                    source = lowlevel.regenerate_reward_code(
                        self.session, code_prompt, source, str(exc))
                else:
                    self.emit("reward-code", {"action": action, "source": source,
                                              "error": str(exc)})
        return None

    # -- the loop ---------------------------------------------------------------------

    def run(self) -> RolloutState:
        state = self.state
        plan_attempt = 0
        while plan_attempt < self.config.max_plan_attempts:
            plan_attempt += 1
            state.plan_attempts = plan_attempt
            state.observations = []
            action_replans = 0
            try:
                done = self._run_attempt(plan_attempt)
            except Exception as exc:
                # adversarial or exhausted backends fail the attempt, never
                # the process
                logger.warning("plan attempt %d aborted: %s", plan_attempt, exc)
                state.failure_reason = f"attempt aborted: {exc}"
                self.emit("replan", {"kind": "plan", "attempt": plan_attempt,
                                     "reason": state.failure_reason})
                continue
            if done:
                break

        env_ok = check_success(self.task, self.world)
        state.outcome = "success" if env_ok else "failure"
        if env_ok:
            state.failure_reason = ""
        self.emit("outcome", {
            "outcome": state.outcome,
            "success": env_ok,
            "reason": state.failure_reason,
            "action_count": state.action_count,
            "perceiver_actions": state.perceiver_actions,
            "mpc_actions": state.mpc_actions,
            "plan_attempts": state.plan_attempts,
            "agent_believed_done": state.agent_believed_done,
            "state": self.world.snapshot(),
        })
        return state

    def _run_attempt(self, plan_attempt: int) -> bool:
        """Execute one plan attempt; True ends the episode successfully."""
        state = self.state
        action_replans = 0
        plan = self.new_plan(plan_attempt)
        if plan is None:
            state.failure_reason = "the plan could not be parsed"
            return False

        plan_failed = False
        failure_reason = ""
        executed = 0
        index = 0
        while index < len(plan.steps):
                if executed >= self.config.max_steps_per_plan:
                    plan_failed = True
                    failure_reason = "the plan exceeded the step budget"
                    break
                action = plan.steps[index]
                state.subtask_cursor = index
                executed += 1
                kind = self._classify(action)

                if kind == "vision":
                    done, reason = self.vision_action(plan, action)
                    if not done:
                        plan_failed = True
                        failure_reason = reason or f"the action '{action}' was " \
                                                   f"not completed"
                        break
                    index += 1
                    continue

                ok, reason, diagnosis = self.motion_action(plan, action)
                if ok:
                    index += 1
                    continue

                diagnosed = diagnosis.reasons[0] if diagnosis and \
                    diagnosis.reasons else "no reason could be identified"
                if action_replans < self.config.max_action_retries:
                    action_replans += 1
                    state.history.add_action_failure(action, action, diagnosed)
                    self.emit("replan", {"kind": "action", "action": action,
                                         "reason": diagnosed,
                                         "retry": action_replans})
                    new_plan = self.new_plan(plan_attempt)
                    if new_plan is None:
                        plan_failed = True
                        failure_reason = "the replanned plan could not be parsed"
                        break
                    plan = new_plan
                    index = 0
                    continue

                plan_failed = True
                failure_reason = (f"the robot was not able to execute the action "
                                  f"'{action}': {diagnosed}")
                break

        env_ok = check_success(self.task, self.world)
        if plan_failed:
            state.history.add_plan_failure(plan, failure_reason)
            state.failure_reason = failure_reason
            self.emit("replan", {"kind": "plan", "attempt": plan_attempt,
                                 "reason": failure_reason})
            return False

        agent_done, agent_reason = self.goal_check(plan)
        state.agent_believed_done = agent_done
        if env_ok and agent_done:
            return True
        reason = agent_reason or "the goal was not accomplished"
        state.history.add_plan_failure(plan, reason)
        state.failure_reason = reason
        self.emit("replan", {"kind": "plan", "attempt": plan_attempt,
                             "reason": reason, "agent_believed_done": agent_done,
                             "goal_reached": env_ok})
        return False

    def _classify(self, action: str) -> str:
        try:
            kind = highlevel.classify_action(self.session, action)
        except highlevel.ClassifyError:
            kind = "motion"
        self.emit("classify", {"action": action, "kind": kind})
        return kind


def run_episode(task: TaskDefinition | str, backend_factory: BackendFactory,
                config: EpisodeConfig) -> tuple[RolloutState, RolloutLog]:
    """Run one full episode; every backend/module error becomes a logged
    failure path, never an unhandled exception."""
    if isinstance(task, str):
        task = load_task(task)
    episode_holder: dict = {}

    def world_provider() -> WorldState:
        return episode_holder["episode"].world

    backend = backend_factory(task, world_provider)
    episode = _Episode(task, backend, config)
    episode_holder["episode"] = episode
    state = episode.run()
    return state, episode.log
