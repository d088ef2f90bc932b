"""Semantic checks binding a parsed program to one scene's vocabulary."""

from __future__ import annotations

from collections.abc import Sequence

from .program import RewardProgram

IMPLICIT_NAMES = ("palm", "rest_position")


class ValidationError(ValueError):
    pass


class UnknownObject(ValidationError):
    def __init__(self, name: str, line: int = 0):
        self.name = name
        self.line = line
        super().__init__(f"line {line}: unknown object {name!r}")


class UnknownJoint(ValidationError):
    def __init__(self, name: str, line: int = 0):
        self.name = name
        self.line = line
        super().__init__(f"line {line}: unknown joint {name!r}")


def validate_names(program: RewardProgram, vocabulary: Sequence[str],
                   joints: Sequence[str]) -> RewardProgram:
    """Check every object/joint argument against the published name lists.

    Returns the program unchanged on success; raises UnknownObject or
    UnknownJoint naming the first offender otherwise.
    """
    allowed = set(vocabulary) | set(IMPLICIT_NAMES)
    allowed_joints = set(joints)
    for call in program.calls:
        for name in call.object_args():
            if name not in allowed:
                raise UnknownObject(name, call.line)
        for name in call.joint_args():
            if name not in allowed_joints:
                raise UnknownJoint(name, call.line)
    return program
