"""Parser for reward scripts emitted by a language model.

The surface syntax is a restricted subset of Python: call statements over a
fixed function roster with literal arguments.  Comments, blank lines, import
lines and code-fence markers are tolerated and ignored; anything else is a
parse error naming the first offending line.
"""

from __future__ import annotations

import ast

from .program import (
    EXECUTE,
    FUNCTIONS,
    MAXIMIZE_L2,
    MINIMIZE_L2,
    RESET,
    SET_JOINT,
    SET_ORIENTATION,
    SET_Z,
    Literal,
    RewardCall,
    RewardProgram,
)


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


# function -> (min positional args, max positional args, allowed keywords)
_SIGNATURES: dict[str, tuple[int, int, frozenset[str]]] = {
    RESET: (0, 0, frozenset()),
    EXECUTE: (0, 1, frozenset({"duration"})),
    MINIMIZE_L2: (2, 2, frozenset({"primary_reward"})),
    MAXIMIZE_L2: (2, 3, frozenset({"distance", "primary_reward"})),
    SET_JOINT: (1, 2, frozenset({"fraction", "primary_reward"})),
    SET_Z: (2, 2, frozenset({"primary_reward"})),
    SET_ORIENTATION: (2, 2, frozenset({"primary_reward"})),
}

_STRING_ARGS: dict[str, int] = {MINIMIZE_L2: 2, MAXIMIZE_L2: 2, SET_JOINT: 1,
                                SET_Z: 1, SET_ORIENTATION: 1}


def _strip_fences(source: str) -> str:
    lines = []
    for line in source.splitlines():
        if line.strip().startswith("```"):
            lines.append("")
        else:
            lines.append(line)
    return "\n".join(lines)


def _literal(node: ast.expr, line: int) -> Literal:
    if isinstance(node, ast.Constant) and isinstance(node.value, (str, int, float, bool)):
        return node.value
    if (isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub)
            and isinstance(node.operand, ast.Constant)
            and isinstance(node.operand.value, (int, float))):
        return -node.operand.value
    raise ParseError(line, "arguments must be string or numeric literals")


def _check_call(call: RewardCall) -> None:
    lo, hi, keywords = _SIGNATURES[call.function]
    if not lo <= len(call.args) <= hi:
        raise ParseError(call.line,
                         f"{call.function} takes {lo}-{hi} positional arguments, "
                         f"got {len(call.args)}")
    for key, _ in call.kwargs:
        if key not in keywords:
            raise ParseError(call.line, f"unknown keyword argument {key!r} "
                                        f"for {call.function}")
    n_str = _STRING_ARGS.get(call.function, 0)
    for arg in call.args[:n_str]:
        if not isinstance(arg, str):
            raise ParseError(call.line, f"{call.function} expects name strings first, "
                                        f"got {arg!r}")
    for arg in call.args[n_str:]:
        if isinstance(arg, str):
            raise ParseError(call.line, f"{call.function} expects a number, got {arg!r}")
    if call.function == SET_JOINT:
        target = call.args[1] if len(call.args) > 1 else call.kwarg("fraction")
        if target is None:
            raise ParseError(call.line, "set_joint_fraction_reward needs a fraction")
        if not 0.0 <= float(target) <= 1.0:
            raise ParseError(call.line, f"joint fraction {target} outside [0, 1]")
    if call.function == MAXIMIZE_L2:
        dist = call.args[2] if len(call.args) > 2 else call.kwarg("distance")
        if dist is not None and float(dist) <= 0.0:
            raise ParseError(call.line, f"distance target {dist} must be positive")


def parse_reward_program(source: str) -> RewardProgram:
    """Parse source text into a structurally valid program.

    Raises ParseError for unknown functions, bad arity, non-literal
    arguments, unknown keywords, or a malformed reset/execute skeleton.
    """
    cleaned = _strip_fences(source)
    try:
        tree = ast.parse(cleaned)
    except SyntaxError as exc:
        raise ParseError(exc.lineno or 0, f"invalid syntax: {exc.msg}") from None

    calls: list[RewardCall] = []
    for node in tree.body:
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            continue
        if not isinstance(node, ast.Expr) or not isinstance(node.value, ast.Call):
            raise ParseError(node.lineno, "only reward function calls are allowed")
        call_node = node.value
        if not isinstance(call_node.func, ast.Name):
            raise ParseError(node.lineno, "only plain function calls are allowed")
        name = call_node.func.id
        if name not in FUNCTIONS:
            raise ParseError(node.lineno, f"unknown function {name!r}")
        args = tuple(_literal(a, node.lineno) for a in call_node.args)
        kwargs = []
        for kw in call_node.keywords:
            if kw.arg is None:
                raise ParseError(node.lineno, "**kwargs is not allowed")
            kwargs.append((kw.arg, _literal(kw.value, node.lineno)))
        call = RewardCall(function=name, args=args, kwargs=tuple(kwargs),
                          line=node.lineno)
        _check_call(call)
        calls.append(call)

    _check_structure(calls)
    primary = _inline_primary(calls)
    return RewardProgram(calls=tuple(calls), primary_index=primary, source=source)


def _check_structure(calls: list[RewardCall]) -> None:
    resets = [i for i, c in enumerate(calls) if c.function == RESET]
    executes = [i for i, c in enumerate(calls) if c.function == EXECUTE]
    if not executes:
        line = calls[-1].line if calls else 0
        raise ParseError(line, "missing execute_plan")
    if len(executes) > 1:
        raise ParseError(calls[executes[1]].line, "duplicate execute_plan")
    if not resets:
        raise ParseError(calls[0].line, "missing reset_reward")
    if len(resets) > 1:
        raise ParseError(calls[resets[1]].line, "duplicate reset_reward")
    if resets[0] != 0:
        raise ParseError(calls[resets[0]].line, "reset_reward must come first")
    if executes[0] != len(calls) - 1:
        raise ParseError(calls[executes[0]].line, "execute_plan must come last")


def _inline_primary(calls: list[RewardCall]) -> int | None:
    flagged = [i for i, c in enumerate(calls) if c.is_term and c.inline_primary]
    if not flagged:
        return None
    if len(flagged) > 1:
        raise ParseError(calls[flagged[1]].line, "multiple primary_reward flags")
    return flagged[0]
