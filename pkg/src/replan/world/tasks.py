"""The eight benchmark tasks: scenes, instructions and success predicates.

Scene geometry preserves the topological relations that matter (what blocks
what, what hides what); exact furniture dimensions are not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .dynamics import crate_occupant
from .scene import (
    OPEN_THRESHOLD,
    PLACE_REGION_RADIUS,
    SENSOR_RADIUS,
    UNBLOCK_DISTANCE,
    JointDef,
    LockCondition,
    LockKind,
    ObjectDef,
    ObjectKind,
    SceneSpec,
    WorldState,
    distance,
)

TASK_IDS = (
    "cabinet-open",
    "cabinet-closed",
    "cabinet-blocked",
    "cabinet-locked",
    "cubes-color",
    "cubes-blocked",
    "kitchen-explore",
    "composite-explore",
)


class UnknownTaskError(ValueError):
    pass


@dataclass(frozen=True)
class TaskDefinition:
    """One benchmark task: scene, instruction and goal predicate."""

    task_id: str
    scene: SceneSpec
    instruction: str
    interactable_objects: tuple[str, ...]
    joints: tuple[str, ...]
    hidden_objects: tuple[str, ...]
    success_predicate: Callable[[WorldState], bool] = field(repr=False)
    colors: dict[str, str] = field(default_factory=dict)

    @property
    def initial_state(self) -> WorldState:
        return self.scene.initial_state()

    @property
    def reward_vocabulary(self) -> tuple[str, ...]:
        """Names reward code may reference: interactables plus accepted aliases."""
        return self.interactable_objects + tuple(self.scene.aliases)


def check_success(task: TaskDefinition, state: WorldState) -> bool:
    """Ground-truth goal predicate; pure function of the state."""
    return task.success_predicate(state)


_GRIPPER_START = (0.0, -0.4, 0.5)


def _cabinet_scene(door_fraction: float, with_bar: bool, with_lever: bool,
                   hidden_cube: str | None) -> SceneSpec:
    objects = [
        ObjectDef("wooden_cabinet", ObjectKind.FIXED_FIXTURE, False, (0.15, 0.85, 0.3)),
        ObjectDef("wooden_cabinet_handle", ObjectKind.FIXED_FIXTURE, True,
                  (0.083, 0.502, 0.21)),
        ObjectDef("target_position_in_wooden_cabinet", ObjectKind.FIXED_FIXTURE, False,
                  (0.2, 0.85, 0.0775)),
    ]
    lock = None
    if with_bar:
        objects.append(
            ObjectDef("red_block_right_side", ObjectKind.BAR, True,
                      (0.216, 0.551, 0.151))
        )
        lock = LockCondition(LockKind.BAR_ACROSS_HANDLES,
                             blocker="red_block_right_side",
                             threshold=UNBLOCK_DISTANCE)
    joints = [
        JointDef("wooden_cabinet", handle="wooden_cabinet_handle",
                 anchor=(0.083, 0.502, 0.21), travel=(0.0, -0.30, 0.0),
                 initial_fraction=door_fraction, lock=lock),
    ]
    hidden: dict[str, str] = {"target_position_in_wooden_cabinet": "wooden_cabinet"}
    if with_lever:
        objects.append(ObjectDef("lever", ObjectKind.LEVER, True, (0.45, 0.3, 0.3)))
        joints[0] = JointDef(
            "wooden_cabinet", handle="wooden_cabinet_handle",
            anchor=(0.083, 0.502, 0.21), travel=(0.0, -0.30, 0.0),
            initial_fraction=door_fraction,
            lock=LockCondition(LockKind.LEVER_UNLOCKED, lever_joint="lever",
                               threshold=OPEN_THRESHOLD),
        )
        joints.append(
            JointDef("lever", handle="lever", anchor=(0.45, 0.3, 0.3),
                     travel=(0.0, -0.25, 0.0))
        )
    else:
        objects.append(ObjectDef("yellow_cube", ObjectKind.CUBE, True,
                                 (-0.245, 0.016, 0.036)))
    if hidden_cube:
        objects.append(ObjectDef(hidden_cube, ObjectKind.CUBE, True, (0.2, 0.85, 0.11)))
        hidden[hidden_cube] = "wooden_cabinet"
    return SceneSpec(
        objects=tuple(objects),
        joints=tuple(joints),
        gripper_start=_GRIPPER_START,
        rest_position=_GRIPPER_START,
        hidden_in=hidden,
        interior_of={"target_position_in_wooden_cabinet": "wooden_cabinet"},
        aliases={"target_position_in_cabinet": "target_position_in_wooden_cabinet"},
    )


def _cube_in_region(state: WorldState, cube: str, marker: str) -> bool:
    if state.held_object == cube:
        return False
    return distance(state.object_position(cube),
                    state.object_position(marker)) <= PLACE_REGION_RADIUS


def _cabinet_place_task(task_id: str, door_fraction: float, with_bar: bool) -> TaskDefinition:
    scene = _cabinet_scene(door_fraction, with_bar, with_lever=False, hidden_cube=None)
    interactables = ("yellow_cube", "wooden_cabinet", "wooden_cabinet_handle",
                     "target_position_in_wooden_cabinet")
    if with_bar:
        interactables = interactables + ("red_block_right_side",)

    def success(state: WorldState) -> bool:
        return _cube_in_region(state, "yellow_cube", "target_position_in_wooden_cabinet")

    return TaskDefinition(
        task_id=task_id,
        scene=scene,
        instruction="move the yellow_cube to target_position inside the wooden_cabinet",
        interactable_objects=interactables,
        joints=("wooden_cabinet",),
        hidden_objects=("target_position_in_wooden_cabinet",),
        success_predicate=success,
        colors={"yellow_cube": "yellow"},
    )


def _cabinet_locked_task() -> TaskDefinition:
    scene = _cabinet_scene(0.0, with_bar=False, with_lever=True,
                           hidden_cube="blue_cube")

    def success(state: WorldState) -> bool:
        return state.joint_fraction("wooden_cabinet") >= OPEN_THRESHOLD

    return TaskDefinition(
        task_id="cabinet-locked",
        scene=scene,
        instruction="find the blue_cube",
        interactable_objects=("wooden_cabinet", "wooden_cabinet_handle", "lever",
                              "blue_cube"),
        joints=("wooden_cabinet", "lever"),
        hidden_objects=("blue_cube", "target_position_in_wooden_cabinet"),
        success_predicate=success,
        colors={"blue_cube": "blue"},
    )


def _cubes_scene(yellow_on_crate: bool) -> SceneSpec:
    crate_top = (0.3, 0.4, 0.10)
    yellow_pos = (crate_top[0], crate_top[1], crate_top[2] + 0.03) if yellow_on_crate \
        else (0.0, 0.3, 0.03)
    return SceneSpec(
        objects=(
            ObjectDef("crate", ObjectKind.CRATE, False, crate_top),
            ObjectDef("yellow_cube", ObjectKind.CUBE, True, yellow_pos),
            ObjectDef("red_cube", ObjectKind.CUBE, True, (-0.3, 0.2, 0.03)),
        ),
        joints=(),
        gripper_start=_GRIPPER_START,
        rest_position=_GRIPPER_START,
        crates=("crate",),
    )


def _cubes_task(task_id: str, yellow_on_crate: bool, instruction: str) -> TaskDefinition:
    scene = _cubes_scene(yellow_on_crate)

    def success(state: WorldState) -> bool:
        red_on = _cube_in_region(state, "red_cube", "crate")
        yellow_off = distance(state.object_position("yellow_cube"),
                              state.object_position("crate")) > PLACE_REGION_RADIUS
        return red_on and yellow_off

    return TaskDefinition(
        task_id=task_id,
        scene=scene,
        instruction=instruction,
        interactable_objects=("crate", "yellow_cube", "red_cube"),
        joints=(),
        hidden_objects=(),
        success_predicate=success,
        colors={"crate": "red", "yellow_cube": "yellow", "red_cube": "red"},
    )


def _kitchen_task() -> TaskDefinition:
    scene = SceneSpec(
        objects=(
            ObjectDef("kitchen_cabinet", ObjectKind.FIXED_FIXTURE, False, (-0.5, 0.8, 0.4)),
            ObjectDef("kitchen_cabinet_handle", ObjectKind.FIXED_FIXTURE, True,
                      (-0.5, 0.5, 0.35)),
            ObjectDef("microwave", ObjectKind.FIXED_FIXTURE, False, (0.5, 0.7, 0.25)),
            ObjectDef("microwave_handle", ObjectKind.FIXED_FIXTURE, True,
                      (0.5, 0.42, 0.18)),
            ObjectDef("kettle", ObjectKind.KETTLE, True, (0.5, 0.35, 0.12)),
            ObjectDef("green_apple", ObjectKind.APPLE, True, (0.5, 0.7, 0.12)),
        ),
        joints=(
            JointDef("kitchen_cabinet", handle="kitchen_cabinet_handle",
                     anchor=(-0.5, 0.5, 0.35), travel=(0.0, -0.28, 0.0),
                     initial_fraction=1.0),
            JointDef("microwave", handle="microwave_handle",
                     anchor=(0.5, 0.42, 0.18), travel=(0.0, -0.30, 0.0),
                     lock=LockCondition(LockKind.BAR_ACROSS_HANDLES,
                                        blocker="kettle",
                                        threshold=UNBLOCK_DISTANCE)),
        ),
        gripper_start=_GRIPPER_START,
        rest_position=_GRIPPER_START,
        hidden_in={"green_apple": "microwave"},
    )

    def success(state: WorldState) -> bool:
        return state.joint_fraction("microwave") >= OPEN_THRESHOLD

    return TaskDefinition(
        task_id="kitchen-explore",
        scene=scene,
        instruction="find the green_cube",
        interactable_objects=("kitchen_cabinet", "kitchen_cabinet_handle", "microwave",
                              "microwave_handle", "kettle", "green_apple"),
        joints=("kitchen_cabinet", "microwave"),
        hidden_objects=("green_apple",),
        success_predicate=success,
        colors={"green_apple": "green", "kettle": "silver"},
    )


def _composite_task() -> TaskDefinition:
    scene = SceneSpec(
        objects=(
            ObjectDef("stone_cabinet", ObjectKind.FIXED_FIXTURE, False, (-0.5, 0.8, 0.3)),
            ObjectDef("stone_cabinet_handle", ObjectKind.FIXED_FIXTURE, True,
                      (-0.35, 0.55, 0.3)),
            ObjectDef("weight_sensor", ObjectKind.FIXED_FIXTURE, False, (0.1, 0.55, 0.02)),
            ObjectDef("wooden_cabinet", ObjectKind.FIXED_FIXTURE, False, (0.55, 0.85, 0.3)),
            ObjectDef("wooden_cabinet_handle", ObjectKind.FIXED_FIXTURE, True,
                      (0.55, 0.52, 0.21)),
            ObjectDef("red_cube", ObjectKind.CUBE, True, (0.55, 0.8, 0.08)),
        ),
        joints=(
            JointDef("stone_cabinet", handle="stone_cabinet_handle",
                     anchor=(-0.35, 0.55, 0.3), travel=(-0.30, 0.0, 0.0),
                     lock=LockCondition(LockKind.WEIGHT_ON_SENSOR,
                                        sensor="weight_sensor",
                                        threshold=SENSOR_RADIUS)),
            JointDef("wooden_cabinet", handle="wooden_cabinet_handle",
                     anchor=(0.55, 0.52, 0.21), travel=(0.0, -0.30, 0.0)),
        ),
        gripper_start=_GRIPPER_START,
        rest_position=_GRIPPER_START,
        hidden_in={"red_cube": "wooden_cabinet"},
    )

    def success(state: WorldState) -> bool:
        return state.joint_fraction("stone_cabinet") >= OPEN_THRESHOLD

    return TaskDefinition(
        task_id="composite-explore",
        scene=scene,
        instruction=("open the stone_cabinet. The weight sensor lock can be unlocked "
                     "by putting the red_cube on it."),
        interactable_objects=("stone_cabinet", "stone_cabinet_handle", "weight_sensor",
                              "wooden_cabinet", "wooden_cabinet_handle", "red_cube"),
        joints=("stone_cabinet", "wooden_cabinet"),
        hidden_objects=("red_cube",),
        success_predicate=success,
        colors={"red_cube": "red"},
    )


_BUILDERS: dict[str, Callable[[], TaskDefinition]] = {
    "cabinet-open": lambda: _cabinet_place_task("cabinet-open", 1.0, with_bar=False),
    "cabinet-closed": lambda: _cabinet_place_task("cabinet-closed", 0.0, with_bar=False),
    "cabinet-blocked": lambda: _cabinet_place_task("cabinet-blocked", 0.0, with_bar=True),
    "cabinet-locked": _cabinet_locked_task,
    "cubes-color": lambda: _cubes_task(
        "cubes-color", False,
        "place the cube with the same color as the crate on the crate"),
    "cubes-blocked": lambda: _cubes_task(
        "cubes-blocked", True, "place the red cube on the crate"),
    "kitchen-explore": _kitchen_task,
    "composite-explore": _composite_task,
}


def load_task(task_id: str) -> TaskDefinition:
    """Build the named task with its deterministic initial layout."""
    try:
        builder = _BUILDERS[task_id]
    except KeyError:
        raise UnknownTaskError(
            f"unknown task {task_id!r}; expected one of {', '.join(TASK_IDS)}"
        ) from None
    return builder()
