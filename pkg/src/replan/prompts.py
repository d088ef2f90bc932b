"""Versioned prompt template library.

Every prompt the planners, perceiver and verifier exchange is rendered from
one of these templates; golden-file tests pin the exact bytes.  Canonical
rendering rules: templates carry no trailing whitespace at line ends, and a
fully assembled prompt is stripped of leading/trailing blank lines.  Slot
text is substituted verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

PROMPT_VERSION = "1.0"

PERCEIVE_PRESENCE = "perceive_presence"
PLAN_GENERATION = "plan_generation"
ACTION_TYPE = "action_type"
MOTION_PLAN = "motion_plan"
RELOCATION_CHECK = "relocation_check"
REWARD_CODE = "reward_code"
VERIFY_REWARD_TERM = "verify_reward_term"
SELECT_PRIMARY_STEP = "select_primary_step"
FAILURE_PROBE = "failure_probe"
REMAP_DETECT = "remap_detect"
REMAP_REWRITE = "remap_rewrite"
FAILURE_SUMMARY = "failure_summary"
REPLAN_ACTION_FAILURE = "replan_action_failure"
PERCEIVER_QUESTION = "perceiver_question"
QUESTION_TYPE = "question_type"
STATE_QUERY = "state_query"
ACTION_COMPLETION = "action_completion"
REPLAN_PLAN_FAILURE = "replan_plan_failure"

# Internal plumbing template (not part of the published library).
REWARD_CODE_FIX = "reward_code_fix"

TEMPLATE_IDS = (
    PERCEIVE_PRESENCE,
    PLAN_GENERATION,
    ACTION_TYPE,
    MOTION_PLAN,
    RELOCATION_CHECK,
    REWARD_CODE,
    VERIFY_REWARD_TERM,
    SELECT_PRIMARY_STEP,
    FAILURE_PROBE,
    REMAP_DETECT,
    REMAP_REWRITE,
    FAILURE_SUMMARY,
    REPLAN_ACTION_FAILURE,
    PERCEIVER_QUESTION,
    QUESTION_TYPE,
    STATE_QUERY,
    ACTION_COMPLETION,
    REPLAN_PLAN_FAILURE,
)


@dataclass(frozen=True, slots=True)
class Prompt:
    """A rendered prompt: template id, final text and the slot values used."""

    template_id: str
    text: str
    slots: tuple[tuple[str, str], ...] = ()
    images: tuple[str, ...] = ()


def _finalize(template_id: str, text: str, slots: dict[str, str],
              images: tuple[str, ...] = ()) -> Prompt:
    lines = [line.rstrip() for line in text.splitlines()]
    cleaned = "\n".join(lines).strip("\n")
    return Prompt(template_id=template_id, text=cleaned,
                  slots=tuple(sorted(slots.items())), images=images)


_PRESENCE = "Do you see a(n) {0}?"

_PLAN = """\
A stationary robot arm is in a location where it sees the following list of objects:

{0}

The robot has the following goal: {1}

Propose high-level, abstract subtasks of what the robot needs to do to {1}. The plan can only use one object.

For example, if the goal is to find a fork, one plan might be:

<thought>To find the fork, I will start by looking inside the drawer.</thought>
[start plan]
    >Open the drawer
    >Look inside the drawer
    >Grab the fork
[end plan]

Rules:
1. You have access to the following objects: {0}. Do not create new objects.
2. Generate a plan that interacts with only one object from the list at a time. Keep it as short as possible. Most plans should be under 5 steps.
3. Assume that every action is completed successfully.
4. Assume the first thing you try works.
5. Your plan should only propose one way of accomplishing the task.
6. The robot only has one arm and it cannot hold two things at a time. Remember that when you are deciding on the order of actions.
7. Enclose your thought process with a single pair of tag <thought> and </thought>
8. Enclose your plan with the a single pair of tag [start plan] and [end plan]

{2}"""

_ACTION_TYPE = """\
A robot was asked to do this action:
    > {0}
If the central verb is related to vision, answer yes."""

_MOTION_PLAN = """\
We have a stationary robot arm and we want you to help plan how it should move to perform tasks using the following template:
[start of description]
The manipulator's palm should move close to {{{{CHOICE: {0}}}}}.{1}{2}
[end of description]
Rules:
0. You cannot use one line twice!!!!
1. If you see phrases like [NUM: default_value], replace the entire phrase with a numerical value.
2. If you see phrases like {{{{CHOICE: choice1, choice2, ...}}}}, it means you should replace the entire phrase with one of the choices listed.
3. If you see [optional], it means you only add that line if necessary for the task, otherwise remove that line.
4. The environment contains {0}. Do not invent new objects not listed here.
5. I will tell you a behavior/skill/task that I want the manipulator to perform and you will provide the full plan, even if you may only need to change a few lines. Always start the description with [start of description] and end it with [end of description].
6. You can assume that the robot is capable of doing anything, even for the most challenging task.
7. Your plan should be as close to the provided template as possible. Do not include additional details.
8. Your plan should be as concise as possible. Do not include or make up unncessary tasks.
9. Each object can only be close to or far from one thing.

This is the entire procedure:
{4}

These are the observations we have made so far:
{5}

Create a plan for the following action:
    > {6}"""

_RELOCATION_LINE = ("\nobject1={{CHOICE: %s}} should be {{CHOICE: close to, far from}} "
                    "object2={{CHOICE: %s}}.")
_OPTIONAL_LINES = ("\n[optional] object1={{CHOICE: %s}} should be close to "
                   "object2={{CHOICE: %s}}."
                   "\n[optional] object1={{CHOICE: %s}} should be far from "
                   "object2={{CHOICE: %s}}.")
_JOINT_LINE = "\n[optional] joint={{CHOICE: %s}} needs to be {{CHOICE: open, closed}}."

_RELOCATION_CHECK = """\
A robot arm has to do this action:
    > {0}
Does this action necessarily involve relocating an object to a different location that does not involve the robot arm? Answer with yes or no."""

_REWARD_CODE = """\
We have a plan of a robot arm with palm to manipulate objects and we want you to turn that into the corresponding program with following functions:

    def minimize_l2_distance_reward(name_obj_A, name_obj_B)

where name_obj_A and name_obj_B are selected from {0}. This term sets a reward for minimizing l2 distance between name_obj_A and name_obj_B so they get closer to each other. rest_position is the default position for the palm when it's holding in the air.

    def maximize_l2_distance_reward(name_obj_A, name_obj_B, distance=0.5)

This term encourages the orientation of name_obj to be close to the target (specified by x_axis_rotation_radians).

    def execute_plan(duration=2)

This function sends the parameters to the robot and execute the plan for "duration" seconds, default to be 2.

    def set_joint_fraction_reward(name_joint, fraction)

This function sets the joint to a certain value between 0 and 1. 0 means close and 1 means open. name_joint needs to be select from {1}.

    def reset_reward()

This function resets the reward to default values.
Example plan: To perform this task, the manipulator's palm should move close to object1=faucet_handle. object1 needs to be lifted to a height of 1.0.
This is the first plan for a new task.
Example answer code:

    import numpy as np

    reset_reward()
        # This is a new task so reset reward; otherwise we don't need it
    minimize_l2_distance_reward("palm", "faucet_handle")
    set_joint_fraction_reward("faucet", 1.0)

    execute_plan(4)

Remember:
1. Always format the code in code blocks. In your response execute_plan should be called exactly once at the end.
2. Do not invent new functions or classes. The only allowed functions you can call are the ones listed above. Do not leave unimplemented code blocks in your response.
3. The only allowed library is numpy. Do not import or use any other library.
4. If you are not sure what value to use, just use your best judge. Do not use None for anything.
5. Do not calculate the position or direction of any object (except for the ones provided above). Just use a number directly based on your best guess.
6. You do not need to make the robot do extra things not mentioned in the plan such as stopping the robot.

The action to perform is {2} and the plan is:
{3}"""

_VERIFY_TERM = """\
This is a motion plan generated for a robot:

{0}

This is a reward function generated to complete one step in the motion plan:

{1}

The function minimize_l2_distance_reward() refers to bringing two objects close together.
The function maximize_l2_distance_reward() refers to moving two objects further apart.
The function set_joint_fraction_reward() refers to opening or closing an object (0 for closed, 1 for open)
The function set_obj_z_position_reward() specifies the target height of an object.
The function set_obj_orientation_reward() specifies the target rotation of an object.

Which step in the motion plan is the function referring to? Return the step using <step></step> tags. If it does not refer to any of them, return <step>-1</step>"""

_SELECT_PRIMARY = """\
A stationary robot arm was asked to do the following motion plan to complete the task '{0}':

{1}

After which step in the motion plan will the task '{0}' be satisfied? First, explain your thought then answer the step number enclosed with the tag <step> and </step>. Opening a joint can also mean activating it depending on the context. You must select one. If you think none of the steps does, select the closest one."""

_FAILURE_PROBES = (
    "A robot is in a simulation environment where it can interact with any object "
    "like in the real world. The robot would like to {0} but it cannot. Is there "
    "something in this scene preventing that, other than the robot? Assume the robot "
    "can interact with anything. These are the names of the objects in our scene: {1}",
    "In a simulation, a robot wants to {0} but can't. Is anything else, besides the "
    "robot, blocking it? Check the objects in the scene: {1}.",
    "Robot in a simulation wants to {0}, can't. Something else stopping it? Objects "
    "in scene: {1}.",
    "A robot can engage with any item. It wants to {0} but can't. Is an object in "
    "this scene, apart from the robot, hindering it? Objects present: {1}",
    "I would like to {0} but I cannot. Is there something in this scene preventing "
    "that, other than the robot? These are the objects in the scene: {1}",
    "I would like to {0} but I am unable to. Is there something in this scene "
    "preventing me from doing that? Ignore the robot. These are the names of the "
    "objects: {1}",
)

DIAGNOSIS_VARIANTS = len(_FAILURE_PROBES)

_REMAP_DETECT = """\
We have access to the following objects in our scene: {0}

You are given a sentence describing an image of the scene, but it may have gotten the names of the objects wrong. Does this sentence contain objects that are not in our scene or get the names of the objects wrong? Start your answer with yes or no.

{1}"""

_REMAP_REWRITE = """\
We have access to the following objects in our scene: {0}

You are given a sentence describing an image of the scene, but got the names of the objects wrong. Rewrite this sentence using the closest object(s) in our environment:

{1}

Rules:
You can only use objects in the scene. Use your best judgement."""

_SUMMARY = """\
The stationary robot arm would like to {0} but it cannot. Here are possible reasons why based on images of the scene:

{1}

Based on the above explanations, what are the top reason(s) why the robot cannot {0}? List each reason on a separate line, enclosed with the tag <reason> </reason>. Provide up to two reasons. Be as succinct as possible. You must not include any reasons related to the robot, only reasons related to objects in the scene."""

_QUESTION = """\
You are a robot in the process of executing this plan, with the overall goal to '{0}':

{1}

You are currently performing this action: '{2}'. You have access to a perception model that can answer your questions related to vision.

{3}

What question do you want to ask the perception model in order to get the answer to '{2}'? You can ask up to two questions. You don't have to ask if the information is already sufficient. Avoid asking the vision model to compare things. Enclose each of your questions with the tag <question> </question>."""

_QUESTION_TYPE = ("What type of question is this asking perception model: '{0}'? "
                  "Choose your answer from [OBJECT_PRESENCE, OBJECT_ATTRIBUTE, NEITHER]")

_STATE_QUERY = "{0} The names of the objects in our scene are: {1}. {2}"

_COMPLETION = """\
A robot was tasked to do this plan:

{0}

The robot is currently doing this action: '{1}'.

To do the action, the robot asked a perception model the following questions (Q) and got the answers (A):

{2}

After receiving this answer, has the robot completed the action '{1}'?  Begin your answer with yes or no. If your answer begins with no, write the remaining action that needs to be completed using <Action></Action> tags."""

_ATTEMPT_RULE = ("-" * 34) + " attempt #{n} " + ("-" * 34)
_END_RULE = ("-" * 28) + " end of failed attempts " + ("-" * 32)
_REMINDER = "Reminder to propose a different plan than the above failed attempts."

_ACTION_ATTEMPT = ("This attempt failed when executing '{0}'.The plan failed because "
                   "the robot was not able to execute this action: '{1}'. This was "
                   "identified as a possible reason the action failed: '{2}'.")

_PLAN_ATTEMPT = """\
The proposed plan was:
<thought>{0}</thought>
[start plan]
{1}
[end plan]
The plan failed because {2}."""

_CODE_FIX = """\
{0}

The previous program you wrote was rejected:

{1}

The error was: {2}
Rewrite the full program, fixing this error. Follow the same rules as before."""


@dataclass(frozen=True, slots=True)
class FailedActionAttempt:
    """History record for a subtask the motion controller could not finish."""

    failed_step: str
    executed_action: str
    reason: str


@dataclass(frozen=True, slots=True)
class FailedPlanAttempt:
    """History record for a completed plan that did not reach the goal."""

    thought: str
    steps: tuple[str, ...]
    reason: str


HistoryEntry = FailedActionAttempt | FailedPlanAttempt


def format_object_list(names: list[str] | tuple[str, ...]) -> str:
    return "[" + ", ".join(names) + "]"


def format_plan_steps(steps: list[str] | tuple[str, ...]) -> str:
    return "\n".join(f"    >{s}" for s in steps)


def format_qa_pairs(pairs: list[tuple[str, str]]) -> str:
    if not pairs:
        return "(no observations yet)"
    return "\n".join(f"Q: {q}, A: {a}" for q, a in pairs)


def _history_block(history: list[HistoryEntry]) -> str:
    if not history:
        return ""
    parts = ["One or more previous attempts failed. Below are the details."]
    for n, entry in enumerate(history, start=1):
        parts.append(_ATTEMPT_RULE.format(n=n))
        if isinstance(entry, FailedActionAttempt):
            parts.append(_ACTION_ATTEMPT.format(entry.failed_step,
                                                entry.executed_action, entry.reason))
        else:
            parts.append(_PLAN_ATTEMPT.format(entry.thought,
                                              format_plan_steps(entry.steps),
                                              entry.reason))
    parts.append(_END_RULE)
    parts.append(_REMINDER)
    return "\n".join(parts)


def render_presence(name: str) -> Prompt:
    return _finalize(PERCEIVE_PRESENCE, _PRESENCE.format(name), {"0": name})


def render_plan(objects: list[str], goal: str,
                history: Optional[list[HistoryEntry]] = None,
                images: tuple[str, ...] = ()) -> Prompt:
    history = history or []
    block = _history_block(history)
    obj = format_object_list(objects)
    text = _PLAN.format(obj, goal, block)
    template_id = PLAN_GENERATION
    if history:
        template_id = (REPLAN_ACTION_FAILURE
                       if isinstance(history[-1], FailedActionAttempt)
                       else REPLAN_PLAN_FAILURE)
    return _finalize(template_id, text, {"0": obj, "1": goal, "2": block}, images)


def render_action_type(action: str) -> Prompt:
    return _finalize(ACTION_TYPE, _ACTION_TYPE.format(action), {"0": action})


def render_motion_plan(objects: list[str], joints: list[str], relocation: bool,
                       full_plan: list[str], observations: list[tuple[str, str]],
                       action: str) -> Prompt:
    obj = ", ".join(objects)
    if relocation:
        modifier = _RELOCATION_LINE % (obj, obj)
    else:
        modifier = _OPTIONAL_LINES % (obj, obj, obj, obj)
    joint_clause = _JOINT_LINE % ", ".join(joints) if joints else ""
    text = _MOTION_PLAN.format(obj, modifier, joint_clause,
                               "{3}",  # joints appear only inside the clause
                               format_plan_steps(full_plan),
                               format_qa_pairs(observations),
                               action)
    return _finalize(MOTION_PLAN, text, {
        "0": obj, "1": modifier, "2": joint_clause, "3": ", ".join(joints),
        "4": format_plan_steps(full_plan),
        "5": format_qa_pairs(observations), "6": action,
    })


def render_relocation_check(action: str) -> Prompt:
    return _finalize(RELOCATION_CHECK, _RELOCATION_CHECK.format(action), {"0": action})


def render_reward_code(objects: list[str], joints: list[str], action: str,
                       motion_plan: str) -> Prompt:
    obj = format_object_list(list(objects) + ["palm"])
    jnt = format_object_list(joints)
    text = _REWARD_CODE.format(obj, jnt, action, motion_plan)
    return _finalize(REWARD_CODE, text,
                     {"0": obj, "1": jnt, "2": action, "3": motion_plan})


def render_reward_code_fix(previous: Prompt, bad_source: str, error: str) -> Prompt:
    text = _CODE_FIX.format(previous.text, bad_source, error)
    return _finalize(REWARD_CODE_FIX, text,
                     {"0": previous.text, "1": bad_source, "2": error})


def render_verify_term(motion_plan: str, function_source: str) -> Prompt:
    text = _VERIFY_TERM.format(motion_plan, function_source)
    return _finalize(VERIFY_REWARD_TERM, text,
                     {"0": motion_plan, "1": function_source})


def render_select_primary(action: str, motion_plan: str) -> Prompt:
    text = _SELECT_PRIMARY.format(action, motion_plan)
    return _finalize(SELECT_PRIMARY_STEP, text, {"0": action, "1": motion_plan})


def render_failure_probe(variant: int, action: str, objects: list[str],
                         images: tuple[str, ...] = ()) -> Prompt:
    obj = ", ".join(objects)
    text = _FAILURE_PROBES[variant].format(action, obj)
    return _finalize(f"{FAILURE_PROBE}_{variant}", text,
                     {"0": action, "1": obj}, images)


def render_remap_detect(objects: list[str], sentence: str) -> Prompt:
    obj = ", ".join(objects)
    text = _REMAP_DETECT.format(obj, sentence)
    return _finalize(REMAP_DETECT, text, {"0": obj, "1": sentence})


def render_remap_rewrite(objects: list[str], sentence: str) -> Prompt:
    obj = ", ".join(objects)
    text = _REMAP_REWRITE.format(obj, sentence)
    return _finalize(REMAP_REWRITE, text, {"0": obj, "1": sentence})


def render_failure_summary(action: str, explanations: list[str]) -> Prompt:
    body = "\n".join(f"    {e}" for e in explanations)
    text = _SUMMARY.format(action, body)
    return _finalize(FAILURE_SUMMARY, text, {"0": action, "1": body})


def render_perceiver_question(goal: str, plan_steps: list[str], action: str,
                              observed_objects: list[str]) -> Prompt:
    plan = format_plan_steps(plan_steps)
    obj = format_object_list(observed_objects)
    text = _QUESTION.format(goal, plan, action, obj)
    return _finalize(PERCEIVER_QUESTION, text,
                     {"0": goal, "1": plan, "2": action, "3": obj})


def render_question_type(question: str) -> Prompt:
    return _finalize(QUESTION_TYPE, _QUESTION_TYPE.format(question), {"0": question})


def render_state_query(question: str, objects: list[str], context: str = "",
                       images: tuple[str, ...] = ()) -> Prompt:
    obj = ", ".join(objects)
    text = _STATE_QUERY.format(question, obj, context)
    return _finalize(STATE_QUERY, text,
                     {"0": question, "1": obj, "2": context}, images)


def render_action_completion(plan_steps: list[str], action: str,
                             qa_pairs: list[tuple[str, str]]) -> Prompt:
    plan = format_plan_steps(plan_steps)
    qa = "\n".join(f"Q: {q}\nA: {a}" for q, a in qa_pairs)
    text = _COMPLETION.format(plan, action, qa)
    return _finalize(ACTION_COMPLETION, text, {"0": plan, "1": action, "2": qa})
