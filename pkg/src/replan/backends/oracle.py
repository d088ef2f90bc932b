"""Rule-based oracle backend: a deterministic stand-in for hosted models.

Perception-style prompts (presence, state queries, failure probes) are
answered from ground-truth world state, giving the ceiling against which
noisy backends are measured.  Planning-style prompts are answered by fixed
heuristics over the prompt contents plus the currently visible scene, so a
full closed-loop episode runs with no model in the loop and is reproducible
byte for byte.

With noise-rate p > 0, each failure-probe explanation is independently
corrupted (the obstructing object is swapped for another scene object) from
a seeded stream; p = 0 keeps every answer a pure function of world state.
"""

from __future__ import annotations

import re
import threading
from typing import Callable, Optional

import numpy as np

from .. import prompts as P
from ..world.dynamics import crate_occupant, visible_objects
from ..world.scene import OPEN_THRESHOLD, LockKind, ObjectKind, WorldState
from ..world.tasks import TaskDefinition
from .base import BackendError, Role

VISION_VERBS = ("look", "check", "identify", "compare", "inspect", "examine",
                "observe", "verify", "see", "search")

RELOCATION_VERBS = ("move", "place", "put", "remove", "bring", "carry")

# Canonical name -> off-vocabulary synonym used by one probe variant, plus
# the reverse map the verifier rules use for detection and rewriting.
SYNONYMS = {
    "kettle": "teapot",
    "microwave": "oven",
    "wooden_cabinet": "cupboard",
    "kitchen_cabinet": "pantry",
    "stone_cabinet": "stone cupboard",
    "red_block_right_side": "red rod",
    "lever": "switch",
    "crate": "box",
    "yellow_cube": "yellow block",
    "red_cube": "crimson block",
    "blue_cube": "azure block",
    "weight_sensor": "pressure plate",
    "green_apple": "green fruit",
}
REVERSE_SYNONYMS = {v: k for k, v in SYNONYMS.items()}

_COLOR_WORDS = ("red", "green", "blue", "yellow", "white", "black", "silver")


def _mentions(text: str, name: str) -> bool:
    return re.search(rf"(?<![\w]){re.escape(name)}(?![\w])", text) is not None


def _mentioned_names(text: str, names: tuple[str, ...]) -> list[str]:
    found = []
    for name in names:
        match = re.search(rf"(?<![\w]){re.escape(name)}(?![\w])", text)
        if match:
            found.append((match.start(), name))
    return [name for _, name in sorted(found)]


class OracleBackend:
    def __init__(self, task: TaskDefinition,
                 world_provider: Callable[[], WorldState],
                 noise_rate: float = 0.0, seed: int = 0):
        self.task = task
        self.world = world_provider
        self.noise_rate = noise_rate
        self._rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, 0xD1A6))))
        self._lock = threading.Lock()

    # -- dispatch -------------------------------------------------------------

    def complete(self, role: Role, prompt: P.Prompt) -> str:
        slots = dict(prompt.slots)
        tid = prompt.template_id
        if tid == P.PERCEIVE_PRESENCE:
            return self._presence(slots["0"])
        if tid in (P.PLAN_GENERATION, P.REPLAN_ACTION_FAILURE, P.REPLAN_PLAN_FAILURE):
            return self._plan(slots)
        if tid == P.ACTION_TYPE:
            return self._action_type(slots["0"])
        if tid == P.PERCEIVER_QUESTION:
            return self._question(slots)
        if tid == P.QUESTION_TYPE:
            return self._question_type(slots["0"])
        if tid == P.STATE_QUERY:
            return self._state_query(slots["0"])
        if tid == P.ACTION_COMPLETION:
            return self._completion(slots)
        if tid == P.RELOCATION_CHECK:
            return self._relocation(slots["0"])
        if tid == P.MOTION_PLAN:
            return self._motion_plan(slots)
        if tid == P.REWARD_CODE:
            return self._reward_code(slots["3"])
        if tid == P.REWARD_CODE_FIX:
            return self._reward_code_fix(slots["0"])
        if tid.startswith(P.FAILURE_PROBE):
            variant = int(tid.rsplit("_", 1)[1])
            return self._failure_probe(variant, slots["0"])
        if tid == P.REMAP_DETECT:
            return self._remap_detect(slots["1"])
        if tid == P.REMAP_REWRITE:
            return self._remap_rewrite(slots["1"])
        if tid == P.FAILURE_SUMMARY:
            return self._summary(slots)
        if tid == P.VERIFY_REWARD_TERM:
            return self._verify_term(slots)
        if tid == P.SELECT_PRIMARY_STEP:
            return self._select_primary(slots)
        raise BackendError(f"oracle cannot answer template {tid!r}")

    # -- shared helpers -------------------------------------------------------

    @property
    def _vocab(self) -> tuple[str, ...]:
        return self.task.interactable_objects

    def _resolve(self, token: str) -> Optional[str]:
        """Map a goal token to the closest scene name (exact, then shared
        color/noun token)."""
        token = token.strip().strip(".'\"").replace(" ", "_")
        if token in self._vocab:
            return token
        pieces = set(token.split("_"))
        color_matches = []
        token_matches = []
        for name in self._vocab:
            name_pieces = set(name.split("_"))
            shared = pieces & name_pieces
            if not shared:
                continue
            if shared & set(_COLOR_WORDS):
                color_matches.append(name)
            else:
                token_matches.append(name)
        if color_matches:
            return color_matches[0]
        if token_matches:
            return token_matches[0]
        return None

    def _handle_of(self, container: str) -> str:
        scene = self.task.scene
        for joint in scene.joints:
            if joint.name == container:
                return joint.handle
        return container

    def _containers(self) -> list[str]:
        """Searchable containers in task joint order; lever-style joints
        (their own handle) are not containers."""
        names = []
        for jname in self.task.joints:
            if self._handle_of(jname) == jname:
                continue
            names.append(jname)
        return names

    def _find_target(self) -> Optional[str]:
        instruction = self.task.instruction
        match = re.search(r"find the ([\w ]+)", instruction)
        if match:
            return self._resolve(match.group(1))
        match = re.search(r"putting the ([\w ]+?) on", instruction)
        if match:
            return self._resolve(match.group(1))
        return None

    # -- perception rules -----------------------------------------------------

    def _presence(self, name: str) -> str:
        if name in visible_objects(self.world()):
            return "Yes"
        return "No"

    def _question(self, slots: dict[str, str]) -> str:
        action = slots["2"]
        match = re.search(r"[Ll]ook inside the (\w+)", action)
        if match:
            target = self._find_target() or "anything"
            return f"<question>Do you see a(n) {target} in the {match.group(1)}?</question>"
        match = re.search(r"[Cc]heck the color of the (\w+)", action)
        if match:
            return f"<question>What is the color of the {match.group(1)}?</question>"
        return "I have no questions."

    def _question_type(self, question: str) -> str:
        q = question.lower()
        if q.startswith(("do you see", "is there", "look for", "can you see")):
            return "OBJECT_PRESENCE"
        if "color" in q or "what is the" in q:
            return "OBJECT_ATTRIBUTE"
        return "NEITHER"

    def _state_query(self, question: str) -> str:
        world = self.world()
        match = re.search(r"[Dd]o you see a\(n\) (\w+) in the (\w+)\?", question)
        if match:
            target, container = match.groups()
            resolved = self._resolve(target)
            if resolved is None:
                return "No, I do not see it."
            if resolved in visible_objects(world):
                inside = self.task.scene.hidden_in.get(resolved)
                if inside is None or inside == container:
                    return f"Yes, the {resolved} is in the {container}."
                return f"No, the {resolved} is not in the {container}."
            return f"No, I do not see the {resolved} in the {container}."
        match = re.search(r"[Ww]hat is the color of the (\w+)\?", question)
        if match:
            obj = match.group(1)
            color = self.task.colors.get(obj)
            if color is None:
                return f"I cannot tell the color of the {obj}."
            return f"The {obj} is {color}."
        return "I cannot tell."

    def _failure_probe(self, variant: int, action: str) -> str:
        core = self._obstruction_clause(action)
        with self._lock:
            if self.noise_rate > 0.0 and self._rng.random() < self.noise_rate:
                core = self._corrupt(core)
        if variant == 0:
            return core[0].upper() + core[1:] + "."
        if variant == 1:
            return f"I can see that {core}."
        if variant == 2:
            return f"It looks like {core}."
        if variant == 3:
            return self._apply_synonyms(f"A problem is visible: {core}.")
        if variant == 4:
            return f"Based on the image, {core}."
        return f"Yes, {core}."

    def _obstruction_clause(self, action: str) -> str:
        """The constraint currently preventing the failed action, phrased on
        the scene vocabulary."""
        world = self.world()
        scene = self.task.scene
        action_l = action.lower()

        joint_name = None
        for jname in self.task.joints:
            if _mentions(action, jname) and ("open" in action_l or "pull" in action_l):
                joint_name = jname
                break
        if joint_name is not None and world.joint_locked(joint_name):
            joint = scene.joints[scene.joint_index(joint_name)]
            lock = joint.lock
            if lock is not None:
                if lock.kind is LockKind.BAR_ACROSS_HANDLES:
                    blocker = lock.blocker
                    kind = scene.objects[scene.object_index(blocker)].kind
                    relation = ("in front of" if kind is ObjectKind.KETTLE
                                else "blocking")
                    return f"the {blocker} is {relation} the {joint_name}"
                if lock.kind is LockKind.LEVER_UNLOCKED:
                    return f"the {joint_name} is locked by the {lock.lever_joint}"
                if lock.kind is LockKind.WEIGHT_ON_SENSOR:
                    return f"the {joint_name} is locked by the {lock.sensor}"

        for crate in scene.crates:
            if _mentions(action, crate):
                occupant = crate_occupant(world, crate)
                if occupant >= 0:
                    return f"the {scene.objects[occupant].name} is on the {crate}"

        for marker, container in scene.interior_of.items():
            if _mentions(action, container) or _mentions(action, marker):
                if world.joint_fraction(container) < OPEN_THRESHOLD:
                    return f"the {container} is closed"

        return "nothing in the scene is preventing it"

    def _corrupt(self, core: str) -> str:
        mentioned = _mentioned_names(core, self._vocab)
        if not mentioned:
            return core
        victim = mentioned[0]
        others = [n for n in self._vocab if n != victim]
        substitute = others[int(self._rng.integers(len(others)))]
        return re.sub(rf"(?<![\w]){re.escape(victim)}(?![\w])", substitute, core,
                      count=1)

    def _apply_synonyms(self, text: str) -> str:
        for canonical, synonym in SYNONYMS.items():
            if canonical in self._vocab:
                text = re.sub(rf"(?<![\w]){re.escape(canonical)}(?![\w])",
                              synonym, text)
        return text

    # -- verifier rules ---------------------------------------------------------

    def _remap_detect(self, sentence: str) -> str:
        for synonym in REVERSE_SYNONYMS:
            if re.search(rf"(?<![\w]){re.escape(synonym)}(?![\w])", sentence,
                         re.IGNORECASE):
                return "Yes, the sentence names objects that are not in our scene."
        return "No, the sentence only uses objects from the scene."

    def _remap_rewrite(self, sentence: str) -> str:
        for synonym, canonical in REVERSE_SYNONYMS.items():
            if canonical not in self._vocab:
                continue
            sentence = re.sub(rf"(?<![\w]){re.escape(synonym)}(?![\w])",
                              canonical, sentence, flags=re.IGNORECASE)
        return sentence

    def _verify_term(self, slots: dict[str, str]) -> str:
        plan_lines = [ln for ln in slots["0"].splitlines() if ln.strip()]
        source = slots["1"]
        names = re.findall(r'"([^"]+)"', source)
        wants_open = None
        if "set_joint_fraction_reward" in source:
            value = re.search(r",\s*([\d.]+)", source)
            wants_open = value is not None and float(value.group(1)) >= 0.5
        for i, line in enumerate(plan_lines, start=1):
            if not all(_mentions(line, n) for n in names):
                continue
            if wants_open is not None:
                state_word = "open" if wants_open else "closed"
                if state_word not in line:
                    continue
            return f"<step>{i}</step>"
        return "<step>-1</step>"

    def _select_primary(self, slots: dict[str, str]) -> str:
        plan_lines = [ln for ln in slots["1"].splitlines() if ln.strip()]
        chosen = len(plan_lines)
        for i, line in enumerate(plan_lines, start=1):
            if line.strip().startswith("joint=") or "object1=" in line:
                chosen = i
        return (f"The task is accomplished once step {chosen} holds. "
                f"<step>{chosen}</step>")

    # -- planner rules ----------------------------------------------------------

    def _action_type(self, action: str) -> str:
        first = action.strip().split(" ", 1)[0].lower()
        return "Yes" if first in VISION_VERBS else "No"

    def _relocation(self, action: str) -> str:
        first = action.strip().split(" ", 1)[0].lower()
        return "Yes" if first in RELOCATION_VERBS else "No"

    def _plan(self, slots: dict[str, str]) -> str:
        goal = slots["1"]
        visible = [n.strip() for n in slots["0"].strip("[]").split(",") if n.strip()]
        history = slots.get("2", "")
        steps = self._fix_steps(history) + self._base_plan(goal, visible, history)
        if not steps:
            steps = [f"Attempt to {goal}"]
        thought = f"I will start by trying to {steps[0][0].lower()}{steps[0][1:]}."
        body = "\n".join(f"    >{s}" for s in steps)
        return f"<thought>{thought}</thought>\n[start plan]\n{body}\n[end plan]"

    def _fix_steps(self, history: str) -> list[str]:
        """Obstacle-removal steps derived from the latest action failure."""
        reasons = re.findall(
            r"possible reason the action failed: '([^']*)'", history)
        if not reasons:
            return []
        reason = reasons[-1]
        if "lever" in reason:
            return ["Pull the lever"]
        if "weight_sensor" in reason or "weight sensor" in reason:
            weight = self._find_target()
            sensor = next((n for n in self._vocab if "sensor" in n), None)
            if weight and sensor:
                return [f"Place the {weight} on the {sensor}"]
            return []
        mentioned = _mentioned_names(reason, self._vocab)
        if "is closed" in reason and mentioned:
            return [f"Open the {mentioned[0]}"]
        if len(mentioned) >= 2 and any(k in reason for k in
                                       ("blocking", "in front of", "is on the",
                                        "preventing", "in the way")):
            obstacle, site = mentioned[0], mentioned[1]
            return [f"Move the {obstacle} away from the {site}"]
        return []

    def _base_plan(self, goal: str, visible: list[str], history: str) -> list[str]:
        world = self.world()
        goal_l = goal.lower()

        match = re.search(r"move the (\w+) to \w+ inside the (\w+)", goal_l)
        if match:
            obj, container = match.groups()
            steps = []
            if world.joint_fraction(container) < OPEN_THRESHOLD:
                steps.append(f"Open the {container}")
            steps.append(f"Place the {obj} inside the {container}")
            return steps

        if "same color as the crate" in goal_l:
            return ["Check the color of the crate",
                    "Place the cube with the same color as the crate on the crate"]

        match = re.search(r"place the ([\w ]+?) on the (\w+)", goal_l)
        if match:
            obj = self._resolve(match.group(1))
            if obj:
                return [f"Place the {obj} on the {match.group(2)}"]

        match = re.search(r"open the (\w+)", goal_l)
        if match:
            container = match.group(1)
            weight = self._find_target()
            if weight and weight not in visible:
                return self._search_plan(world, history, exclude=container)
            sensor = next((n for n in self._vocab if "sensor" in n), None)
            steps = []
            if weight and sensor:
                steps.append(f"Place the {weight} on the {sensor}")
            steps.append(f"Open the {container}")
            return steps

        if "find the" in goal_l:
            return self._search_plan(world, history)

        return []

    def _search_plan(self, world: WorldState, history: str,
                     exclude: str = "") -> list[str]:
        containers = [c for c in self._containers() if c != exclude]
        searched = set(re.findall(r">?\s*Look inside the (\w+)", history))
        remaining = [c for c in containers if c not in searched]
        target = remaining[0] if remaining else (containers[0] if containers else "")
        if not target:
            return []
        steps = []
        if world.joint_fraction(target) < OPEN_THRESHOLD:
            steps.append(f"Open the {target}")
        steps.append(f"Look inside the {target}")
        return steps

    def _completion(self, slots: dict[str, str]) -> str:
        action = slots["1"]
        qa = slots["2"]
        if action == self.task.instruction:
            return self._goal_check(qa)
        if "A:" in qa or qa.strip():
            return "Yes, the robot has completed the action."
        return "No, the action is not complete."

    def _goal_check(self, qa: str) -> str:
        world = self.world()
        instruction = self.task.instruction.lower()

        target = self._find_target()
        if instruction.startswith("find the") and target:
            for line in qa.splitlines():
                if line.startswith("A: Yes") and _mentions(line, target):
                    return f"Yes, the {target} has been found."
            return f"No, the {target} has not been found yet."

        match = re.search(r"move the (\w+) to \w+ inside the (\w+)", instruction)
        if match:
            obj, container = match.groups()
            marker = next((m for m in self.task.scene.interior_of), None)
            if marker and self._near(world, obj, marker):
                return f"Yes, the {obj} is inside the {container}."
            return f"No, the {obj} is not inside the {container} yet."

        if "same color as the crate" in instruction:
            crate_color = self.task.colors.get("crate", "")
            cube = next((n for n in self._vocab
                         if self.task.colors.get(n) == crate_color
                         and n != "crate"), None)
            if cube and self._on_crate(world, cube):
                return f"Yes, the {cube} is on the crate."
            return "No, the matching cube is not on the crate yet."

        match = re.search(r"place the ([\w ]+?) on the (\w+)", instruction)
        if match:
            obj = self._resolve(match.group(1))
            if obj and self._on_crate(world, obj):
                return f"Yes, the {obj} is on the {match.group(2)}."
            return f"No, the {obj} is not on the {match.group(2)} yet."

        match = re.search(r"open the (\w+)", instruction)
        if match:
            container = match.group(1)
            if world.joint_fraction(container) >= OPEN_THRESHOLD:
                return f"Yes, the {container} is open."
            return f"No, the {container} is still closed."

        return "No, I cannot confirm the goal was reached."

    def _near(self, world: WorldState, obj: str, marker: str) -> bool:
        from ..world.scene import PLACE_REGION_RADIUS, distance

        return distance(world.object_position(obj),
                        world.object_position(marker)) <= PLACE_REGION_RADIUS

    def _on_crate(self, world: WorldState, obj: str) -> bool:
        scene = self.task.scene
        for crate in scene.crates:
            occupant = crate_occupant(world, crate)
            if occupant >= 0 and scene.objects[occupant].name == obj:
                return True
        return False

    # -- low-level planner rules --------------------------------------------------

    def _motion_plan(self, slots: dict[str, str]) -> str:
        action = slots["6"]
        observations = slots["5"]
        lines = self._motion_lines(action, observations)
        body = "\n".join(lines)
        return f"[start of description]\n{body}\n[end of description]"

    def _motion_lines(self, action: str, observations: str) -> list[str]:
        action_l = action.lower()

        match = re.search(r"(?:open|pull) the (\w+)", action_l)
        if match and match.group(1) in self.task.joints:
            joint = match.group(1)
            handle = self._handle_of(joint)
            return [f"The manipulator's palm should move close to {handle}.",
                    f"joint={joint} needs to be open."]

        match = re.search(r"(?:move|remove) the (\w+) (?:away )?from the (\w+)",
                          action_l)
        if match:
            obj, site = match.groups()
            anchor = self._handle_of(site) if site in self.task.joints else site
            return [f"The manipulator's palm should move close to {obj}.",
                    f"object1={obj} should be far from object2={anchor}."]

        if "same color as the crate" in action_l:
            cube = self._matching_cube(observations)
            return [f"The manipulator's palm should move close to {cube}.",
                    f"object1={cube} should be close to object2=crate."]

        match = re.search(r"(?:place|put) the (\w+) (?:inside|in|into) the (\w+)",
                          action_l)
        if match:
            obj, container = match.groups()
            marker = next((m for m, c in self.task.scene.interior_of.items()
                           if c == container), container)
            return [f"The manipulator's palm should move close to {obj}.",
                    f"object1={obj} should be close to object2={marker}."]

        match = re.search(r"(?:place|put) the (\w+) on(?:to)? the (\w+)", action_l)
        if match:
            obj, site = match.groups()
            return [f"The manipulator's palm should move close to {obj}.",
                    f"object1={obj} should be close to object2={site}."]

        return ["The manipulator's palm should move close to rest_position."]

    def _matching_cube(self, observations: str) -> str:
        match = re.search(r"crate is (\w+)", observations)
        cubes = [n for n in self._vocab if n.endswith("_cube")]
        if match:
            color = match.group(1)
            for cube in cubes:
                if self.task.colors.get(cube) == color:
                    return cube
        return cubes[0] if cubes else "cube"

    def _reward_code(self, motion_plan: str) -> str:
        calls = ["reset_reward()"]
        has_joint = False
        for raw in motion_plan.splitlines():
            line = raw.strip()
            match = re.search(r"palm should move close to (\w+)\.", line)
            if match:
                calls.append(f'minimize_l2_distance_reward("palm", "{match.group(1)}")')
                continue
            match = re.search(r"object1=(\w+) should be close to object2=(\w+)\.", line)
            if match:
                calls.append(f'minimize_l2_distance_reward("{match.group(1)}", '
                             f'"{match.group(2)}")')
                continue
            match = re.search(r"object1=(\w+) should be far from object2=(\w+)\.", line)
            if match:
                calls.append(f'maximize_l2_distance_reward("{match.group(1)}", '
                             f'"{match.group(2)}")')
                continue
            match = re.search(r"joint=(\w+) needs to be (open|closed)\.", line)
            if match:
                has_joint = True
                value = "1.0" if match.group(2) == "open" else "0.0"
                calls.append(f'set_joint_fraction_reward("{match.group(1)}", {value})')
        if has_joint:
            # verbose habit: park the arm once the joint target is reached
            calls.append('minimize_l2_distance_reward("palm", "rest_position")')
        calls.append("execute_plan(2)")
        body = "\n".join(calls)
        return f"```python\nimport numpy as np\n\n{body}\n```"

    def _reward_code_fix(self, original_prompt: str) -> str:
        marker = "the plan is:\n"
        idx = original_prompt.find(marker)
        plan = original_prompt[idx + len(marker):] if idx >= 0 else ""
        return self._reward_code(plan)

    # -- diagnosis summary ----------------------------------------------------------

    def _summary(self, slots: dict[str, str]) -> str:
        explanations = [ln.strip() for ln in slots["1"].splitlines() if ln.strip()]
        votes: dict[str, int] = {}
        clauses: dict[str, str] = {}
        for text in explanations:
            clause = self._classify_explanation(text)
            if clause is None:
                continue
            key, rendered = clause
            votes[key] = votes.get(key, 0) + 1
            clauses.setdefault(key, rendered)
        if not votes:
            return "<reason>no obstruction was identified</reason>"
        ranked = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))
        reasons = [clauses[key] for key, _ in ranked[:2]]
        return "\n".join(f"<reason>{r}</reason>" for r in reasons)

    def _classify_explanation(self, text: str) -> Optional[tuple[str, str]]:
        mentioned = _mentioned_names(text, self._vocab)
        if not mentioned:
            return None
        if "locked by" in text and len(mentioned) >= 2:
            subject, lock = mentioned[0], mentioned[1]
            return (f"locked:{subject}:{lock}",
                    f"the {subject} is locked by the {lock}")
        if "in front of" in text and len(mentioned) >= 2:
            return (f"front:{mentioned[0]}:{mentioned[1]}",
                    f"there is a {mentioned[0]} in front of the {mentioned[1]}")
        if ("blocking" in text or "in the way" in text or "preventing" in text) \
                and len(mentioned) >= 2:
            return (f"block:{mentioned[0]}:{mentioned[1]}",
                    f"the {mentioned[0]} is blocking the {mentioned[1]}")
        if "is on the" in text and len(mentioned) >= 2:
            return (f"on:{mentioned[0]}:{mentioned[1]}",
                    f"the {mentioned[0]} is on the {mentioned[1]}")
        if "closed" in text:
            return (f"closed:{mentioned[0]}", f"the {mentioned[0]} is closed")
        return None
