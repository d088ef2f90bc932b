"""Kinematic world model and the benchmark task scenes."""

from .dynamics import crate_occupant, evaluate_locks, step, visible_objects
from .scene import (
    GRASP_RADIUS,
    MAX_GRIPPER_SPEED,
    OPEN_THRESHOLD,
    PALM,
    PLACE_REGION_RADIUS,
    REST_POSITION,
    SENSOR_RADIUS,
    UNBLOCK_DISTANCE,
    Control,
    JointDef,
    LockCondition,
    LockKind,
    ObjectDef,
    ObjectKind,
    Pose,
    SceneSpec,
    SimJoint,
    SimObject,
    WorldState,
    distance,
    wrap_angle,
)
from .tasks import TASK_IDS, TaskDefinition, UnknownTaskError, check_success, load_task

__all__ = [
    "GRASP_RADIUS",
    "MAX_GRIPPER_SPEED",
    "OPEN_THRESHOLD",
    "PALM",
    "PLACE_REGION_RADIUS",
    "REST_POSITION",
    "SENSOR_RADIUS",
    "UNBLOCK_DISTANCE",
    "TASK_IDS",
    "Control",
    "JointDef",
    "LockCondition",
    "LockKind",
    "ObjectDef",
    "ObjectKind",
    "Pose",
    "SceneSpec",
    "SimJoint",
    "SimObject",
    "TaskDefinition",
    "UnknownTaskError",
    "WorldState",
    "check_success",
    "crate_occupant",
    "distance",
    "evaluate_locks",
    "load_task",
    "step",
    "visible_objects",
    "wrap_angle",
]
