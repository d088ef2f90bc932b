"""Kinematic transition function and visibility rules.

The gripper is a velocity-controlled point with a grasp radius.  A grasped
handle constrains motion to its joint's linear travel path; a grasped free
object rigidly tracks the gripper.  Physically impossible commands clamp
instead of raising.  ``step`` is a pure function of (state, control, dt):
identical inputs produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import replace

from .scene import (
    GRASP_RADIUS,
    INTERIOR_EXCLUSION_RADIUS,
    MAX_GRIPPER_SPEED,
    OCCUPIED_EXCLUSION_RADIUS,
    OPEN_THRESHOLD,
    PLACE_REGION_RADIUS,
    WORKSPACE_MAX,
    WORKSPACE_MIN,
    Control,
    LockKind,
    ObjectKind,
    Vec3,
    WorldState,
    distance,
    rest_height,
    vec_add,
    vec_scale,
)


def _clamp_workspace(p: Vec3) -> Vec3:
    return (
        min(max(p[0], WORKSPACE_MIN[0]), WORKSPACE_MAX[0]),
        min(max(p[1], WORKSPACE_MIN[1]), WORKSPACE_MAX[1]),
        min(max(p[2], WORKSPACE_MIN[2]), WORKSPACE_MAX[2]),
    )


def _clamp_speed(v: Vec3, max_speed: float) -> Vec3:
    speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) ** 0.5
    if speed <= max_speed or speed == 0.0:
        return v
    s = max_speed / speed
    return (v[0] * s, v[1] * s, v[2] * s)


def visible_objects(state: WorldState) -> list[str]:
    """Object names currently visible: hidden contents stay out of the list
    until their container joint opens past the visibility threshold."""
    scene = state.scene
    out = []
    for obj in scene.objects:
        container = scene.hidden_in.get(obj.name)
        if container is not None:
            if state.joint_fraction(container) < OPEN_THRESHOLD:
                continue
        out.append(obj.name)
    return out


def _is_visible(state: WorldState, idx: int) -> bool:
    scene = state.scene
    container = scene.hidden_in.get(scene.objects[idx].name)
    if container is None:
        return True
    return state.joint_fraction(container) >= OPEN_THRESHOLD


def crate_occupant(state: WorldState, crate: str, ignore: int = -1) -> int:
    """Index of the settled cube/weight occupying ``crate``, or -1."""
    scene = state.scene
    target = state.object_position(crate)
    for i, obj in enumerate(scene.objects):
        if i == state.held or i == ignore:
            continue
        if obj.kind not in (ObjectKind.CUBE, ObjectKind.WEIGHT):
            continue
        if distance(state.positions[i], target) <= PLACE_REGION_RADIUS:
            return i
    return -1


def _forbidden(state: WorldState, held_idx: int, p: Vec3) -> bool:
    """Placement exclusion for the held object at candidate position ``p``.

    A held cube cannot enter the region of a crate already occupied by
    another cube (the occupant would be displaced; instead entry clamps),
    and nothing can enter a cabinet interior whose door is still closed.
    """
    scene = state.scene
    kind = scene.objects[held_idx].kind
    if kind in (ObjectKind.CUBE, ObjectKind.WEIGHT):
        for crate in scene.crates:
            if crate_occupant(state, crate, ignore=held_idx) >= 0:
                if distance(p, state.object_position(crate)) < OCCUPIED_EXCLUSION_RADIUS:
                    return True
    for marker, joint in scene.interior_of.items():
        if state.joint_fraction(joint) < OPEN_THRESHOLD:
            if distance(p, state.object_position(marker)) < INTERIOR_EXCLUSION_RADIUS:
                return True
    return False


def _settle(state: WorldState, idx: int) -> Vec3:
    """Resting position for a just-released object: onto a free crate target
    when inside its place region, otherwise straight down to rest height."""
    scene = state.scene
    pos = state.positions[idx]
    kind = scene.objects[idx].kind
    if kind in (ObjectKind.CUBE, ObjectKind.WEIGHT):
        for crate in scene.crates:
            target = state.object_position(crate)
            if distance(pos, target) <= PLACE_REGION_RADIUS:
                if crate_occupant(state, crate, ignore=idx) < 0:
                    return (target[0], target[1], target[2] + rest_height(kind))
    return (pos[0], pos[1], rest_height(kind))


def evaluate_locks(state: WorldState) -> tuple[bool, ...]:
    scene = state.scene
    flags = []
    for j in scene.joints:
        lock = j.lock
        if lock is None or lock.kind is LockKind.NONE:
            flags.append(False)
        elif lock.kind is LockKind.BAR_ACROSS_HANDLES:
            handle_pos = state.object_position(j.handle)
            blocker_pos = state.object_position(lock.blocker)
            flags.append(distance(blocker_pos, handle_pos) < lock.threshold)
        elif lock.kind is LockKind.LEVER_UNLOCKED:
            flags.append(state.joint_fraction(lock.lever_joint) < lock.threshold)
        elif lock.kind is LockKind.WEIGHT_ON_SENSOR:
            sensor_pos = state.object_position(lock.sensor)
            pressed = False
            for i, obj in enumerate(scene.objects):
                if obj.kind in (ObjectKind.CUBE, ObjectKind.WEIGHT):
                    if distance(state.positions[i], sensor_pos) <= lock.threshold:
                        pressed = True
                        break
            flags.append(not pressed)
        else:  # pragma: no cover - enum is closed
            flags.append(False)
    return tuple(flags)


def step(state: WorldState, control: Control, dt: float) -> WorldState:
    """Advance the world by ``dt`` seconds under one control command."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    scene = state.scene
    velocity = _clamp_speed(control.velocity, MAX_GRIPPER_SPEED)

    positions = list(state.positions)
    fractions = list(state.fractions)
    gripper = state.gripper
    held = state.held

    # Release first so a release+move command settles before moving away.
    if held >= 0 and not control.grab:
        positions[held] = _settle(state, held)
        held = -1

    held_joint = None
    if held >= 0:
        held_joint = scene.joint_for_handle(scene.objects[held].name)

    if held_joint is not None:
        # Handle in hand: motion projects onto the joint travel path.
        jidx = scene.joint_index(held_joint.name)
        travel = held_joint.travel
        travel_len_sq = travel[0] ** 2 + travel[1] ** 2 + travel[2] ** 2
        if travel_len_sq > 0.0 and not state.locked[jidx]:
            disp = vec_scale(velocity, dt)
            delta = (
                disp[0] * travel[0] + disp[1] * travel[1] + disp[2] * travel[2]
            ) / travel_len_sq
            fractions[jidx] = min(max(fractions[jidx] + delta, 0.0), 1.0)
        handle_pos = vec_add(held_joint.anchor, vec_scale(travel, fractions[jidx]))
        positions[held] = handle_pos
        gripper = handle_pos
    else:
        candidate = _clamp_workspace(vec_add(gripper, vec_scale(velocity, dt)))
        if held >= 0 and _forbidden(state, held, candidate):
            candidate = gripper  # entry rejected; the move clamps to a no-op
        gripper = candidate
        if held >= 0:
            positions[held] = gripper

    # Grasp attempt: nearest visible graspable object within reach
    # (ties resolve to the lowest object index).
    if held < 0 and control.grab:
        best = -1
        best_dist = GRASP_RADIUS
        for i, obj in enumerate(scene.objects):
            if not obj.graspable:
                continue
            if not _is_visible(state, i):
                continue
            d = distance(positions[i], gripper)
            if d <= GRASP_RADIUS and (best < 0 or d < best_dist):
                best = i
                best_dist = d
        if best >= 0:
            held = best
            joint = scene.joint_for_handle(scene.objects[best].name)
            if joint is not None:
                gripper = positions[best]
            else:
                positions[best] = gripper

    # Keep every handle at its joint's current position.
    for j in scene.joints:
        hidx = scene.object_index(j.handle)
        positions[hidx] = vec_add(
            j.anchor, vec_scale(j.travel, fractions[scene.joint_index(j.name)])
        )
    if held >= 0 and scene.joint_for_handle(scene.objects[held].name) is not None:
        gripper = positions[held]

    new_state = replace(
        state,
        positions=tuple(positions),
        fractions=tuple(fractions),
        gripper=gripper,
        held=held,
        time=state.time + dt,
    )
    return replace(new_state, locked=evaluate_locks(new_state))
