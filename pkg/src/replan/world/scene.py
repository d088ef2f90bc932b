"""Scene description and immutable world state for the kinematic simulator.

A scene is split into two pieces: a static ``SceneSpec`` (object names, kinds,
joint geometry, lock wiring) shared by every state of an episode, and a small
immutable ``WorldState`` snapshot (positions, joint fractions, gripper, held
object) that the simulator advances step by step.  Keeping the snapshot tiny
makes state copies cheap enough for sampling-based control rollouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional


Vec3 = tuple[float, float, float]

# Geometric thresholds shared across scenes (meters / joint fraction).
GRASP_RADIUS = 0.10
OPEN_THRESHOLD = 0.7
UNBLOCK_DISTANCE = 0.25
PLACE_REGION_RADIUS = 0.08
OCCUPIED_EXCLUSION_RADIUS = 0.12
INTERIOR_EXCLUSION_RADIUS = 0.12
SENSOR_RADIUS = 0.15
MAX_GRIPPER_SPEED = 1.0
WORKSPACE_MIN = (-1.2, -1.2, 0.0)
WORKSPACE_MAX = (1.2, 1.2, 1.2)

# Rest height above the floor for released objects, by kind.
_REST_HEIGHT = {
    "cube": 0.03,
    "bar": 0.03,
    "kettle": 0.10,
    "apple": 0.03,
    "weight": 0.03,
}

PALM = "palm"
REST_POSITION = "rest_position"


def vec_add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vec_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vec_scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vec_norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def distance(a: Vec3, b: Vec3) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    theta = math.fmod(theta, 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    elif theta > math.pi:
        theta -= 2.0 * math.pi
    return theta


class ObjectKind(str, Enum):
    CUBE = "cube"
    BAR = "bar"
    KETTLE = "kettle"
    APPLE = "apple"
    CRATE = "crate"
    LEVER = "lever"
    WEIGHT = "weight"
    FIXED_FIXTURE = "fixed-fixture"


class LockKind(str, Enum):
    BAR_ACROSS_HANDLES = "bar-across-handles"
    LEVER_UNLOCKED = "lever-unlocked"
    WEIGHT_ON_SENSOR = "weight-on-sensor"
    NONE = "none"


@dataclass(frozen=True, slots=True)
class Pose:
    """Position in meters plus rotation about the vertical axis in radians."""

    position: Vec3
    orientation: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in self.position):
            raise ValueError(f"non-finite position {self.position}")
        object.__setattr__(self, "orientation", wrap_angle(self.orientation))


@dataclass(frozen=True, slots=True)
class LockCondition:
    """Pure predicate gating a joint.

    kind selects the rule; the parameters are geometric thresholds plus the
    names of the scene entities the rule reads:

    - bar-across-handles: locked while ``blocker`` is within ``threshold`` of
      the joint's handle object.
    - lever-unlocked: locked while joint ``lever_joint`` has fraction below
      ``threshold``.
    - weight-on-sensor: locked unless some cube/weight object rests within
      ``threshold`` of object ``sensor``.
    """

    kind: LockKind
    blocker: str = ""
    lever_joint: str = ""
    sensor: str = ""
    threshold: float = 0.0


@dataclass(frozen=True, slots=True)
class ObjectDef:
    """Static description of one scene object."""

    name: str
    kind: ObjectKind
    graspable: bool
    initial_position: Vec3
    initial_orientation: float = 0.0


@dataclass(frozen=True, slots=True)
class JointDef:
    """1-DOF articulated joint with a linear handle path.

    The handle object sits at ``anchor + fraction * travel``; pulling a
    grasped handle along the path drives the fraction.
    """

    name: str
    handle: str
    anchor: Vec3
    travel: Vec3
    initial_fraction: float = 0.0
    lock: Optional[LockCondition] = None


@dataclass(frozen=True, slots=True)
class SceneSpec:
    """Static scene layout: objects, joints, containers and lock wiring."""

    objects: tuple[ObjectDef, ...]
    joints: tuple[JointDef, ...]
    gripper_start: Vec3
    rest_position: Vec3
    # object name -> joint name of the container concealing it
    hidden_in: dict[str, str] = field(default_factory=dict)
    # crate-like drop targets enforcing single occupancy (object names)
    crates: tuple[str, ...] = ()
    # interior markers blocked while their container joint is closed:
    # marker object name -> container joint name
    interior_of: dict[str, str] = field(default_factory=dict)
    # alternate spellings accepted by reward code: alias -> canonical name
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = [o.name for o in self.objects]
        if len(names) != len(set(names)):
            raise ValueError("duplicate object names in scene")
        handles = {j.handle for j in self.joints}
        missing = handles - set(names)
        if missing:
            raise ValueError(f"joint handles without objects: {missing}")
        object.__setattr__(
            self, "_index", {o.name: i for i, o in enumerate(self.objects)}
        )
        object.__setattr__(
            self, "_joint_index", {j.name: i for i, j in enumerate(self.joints)}
        )

    @property
    def object_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.objects)

    @property
    def joint_names(self) -> tuple[str, ...]:
        return tuple(j.name for j in self.joints)

    def object_index(self, name: str) -> int:
        try:
            return self._index[name]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown object {name!r}") from None

    def joint_index(self, name: str) -> int:
        try:
            return self._joint_index[name]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown joint {name!r}") from None

    def joint_for_handle(self, handle_name: str) -> Optional[JointDef]:
        for j in self.joints:
            if j.handle == handle_name:
                return j
        return None

    def resolve_name(self, name: str) -> str:
        return self.aliases.get(name, name)

    def initial_state(self) -> "WorldState":
        positions = []
        for obj in self.objects:
            positions.append(obj.initial_position)
        for j in self.joints:
            hidx = self.object_index(j.handle)
            positions[hidx] = vec_add(j.anchor, vec_scale(j.travel, j.initial_fraction))
        state = WorldState(
            scene=self,
            positions=tuple(positions),
            orientations=tuple(o.initial_orientation for o in self.objects),
            fractions=tuple(j.initial_fraction for j in self.joints),
            locked=tuple(False for _ in self.joints),
            gripper=self.gripper_start,
            held=-1,
            time=0.0,
        )
        # Evaluate locks once so the initial snapshot is consistent.
        from .dynamics import evaluate_locks

        return replace(state, locked=evaluate_locks(state))


@dataclass(frozen=True, slots=True)
class SimObject:
    """Read-only view of one object in a state snapshot."""

    name: str
    kind: ObjectKind
    graspable: bool
    pose: Pose


@dataclass(frozen=True, slots=True)
class SimJoint:
    """Read-only view of one joint in a state snapshot."""

    name: str
    fraction: float
    lock: Optional[LockCondition]
    locked: bool


@dataclass(frozen=True, slots=True)
class Control:
    """One simulator command: bounded gripper velocity plus grasp intent.

    ``grab`` True closes the gripper (grasping the nearest graspable object
    in range, or keeping the current hold); False opens it, releasing any
    held object.
    """

    velocity: Vec3 = (0.0, 0.0, 0.0)
    grab: bool = False


@dataclass(frozen=True, slots=True)
class WorldState:
    """Immutable snapshot of the simulated world."""

    scene: SceneSpec
    positions: tuple[Vec3, ...]
    orientations: tuple[float, ...]
    fractions: tuple[float, ...]
    locked: tuple[bool, ...]
    gripper: Vec3
    held: int
    time: float

    # -- name-based accessors -------------------------------------------------

    def object_position(self, name: str) -> Vec3:
        name = self.scene.resolve_name(name)
        if name == PALM:
            return self.gripper
        if name == REST_POSITION:
            return self.scene.rest_position
        return self.positions[self.scene.object_index(name)]

    def joint_fraction(self, name: str) -> float:
        return self.fractions[self.scene.joint_index(name)]

    def joint_locked(self, name: str) -> bool:
        return self.locked[self.scene.joint_index(name)]

    @property
    def held_object(self) -> Optional[str]:
        if self.held < 0:
            return None
        return self.scene.objects[self.held].name

    @property
    def objects(self) -> tuple[SimObject, ...]:
        return tuple(
            SimObject(
                name=o.name,
                kind=o.kind,
                graspable=o.graspable,
                pose=Pose(self.positions[i], self.orientations[i]),
            )
            for i, o in enumerate(self.scene.objects)
        )

    @property
    def joints(self) -> tuple[SimJoint, ...]:
        return tuple(
            SimJoint(
                name=j.name,
                fraction=self.fractions[i],
                lock=j.lock,
                locked=self.locked[i],
            )
            for i, j in enumerate(self.scene.joints)
        )

    def snapshot(self) -> dict:
        """JSON-ready snapshot: {"joints": {name: fraction}, "objects": {name: [x,y,z]}}."""
        return {
            "joints": {j.name: round(self.fractions[i], 6) for i, j in enumerate(self.scene.joints)},
            "objects": {
                o.name: [round(c, 6) for c in self.positions[i]]
                for i, o in enumerate(self.scene.objects)
            }
            | {PALM: [round(c, 6) for c in self.gripper]},
        }


def rest_height(kind: ObjectKind) -> float:
    return _REST_HEIGHT.get(kind.value, 0.03)
