"""Typed expression language shared by guards, action effects and invariants.

Values are unsigned fixed-width integers (8, 16 or 32 bit) or booleans.
Integer arithmetic wraps modulo 2**width. Integer literals are polymorphic:
they adopt the width of the variables they are combined with, and an
all-literal expression defaults to 32 bit at the point a width is required.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

INT_WIDTHS = {"int8": 8, "int16": 16, "int32": 32}
TYPES = ("int8", "int16", "int32", "bool")

CMP_OPS = ("<", "<=", "==", "!=", ">=", ">")

DEFAULT_INT = "int32"


class ExprError(Exception):
    """Type error or evaluation error in the expression layer."""


def bits_of(ty: str) -> int:
    """Number of payload bits for a declared type (bool counts as one)."""
    if ty == "bool":
        return 1
    return INT_WIDTHS[ty]


def max_of(ty: str) -> int:
    return (1 << bits_of(ty)) - 1


@dataclass(frozen=True)
class Value:
    tag: str
    payload: int

    def __post_init__(self):
        if self.tag not in TYPES:
            raise ExprError(f"unknown type tag {self.tag!r}")
        if not 0 <= self.payload <= max_of(self.tag):
            raise ExprError(
                f"payload {self.payload} out of range for {self.tag}")

    def as_bool(self) -> bool:
        if self.tag != "bool":
            raise ExprError(f"expected bool, got {self.tag}")
        return bool(self.payload)


def default_value(ty: str) -> Value:
    return Value(ty, 0)


def int_value(ty: str, n: int) -> Value:
    """Wrap an arbitrary integer into the given integer type."""
    if ty == "bool":
        raise ExprError("int_value on bool type")
    return Value(ty, n & max_of(ty))


# --- abstract syntax ------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Sub:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Mul:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    width: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class And:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Or:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Not:
    arg: "Expr"


Expr = Union[IntLit, BoolLit, Var, Add, Sub, Mul, Cmp, And, Or, Not]

Memory = dict  # variable name -> Value


def vars_of(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (IntLit, BoolLit)):
        return set()
    if isinstance(e, Not):
        return vars_of(e.arg)
    return vars_of(e.lhs) | vars_of(e.rhs)


# --- type checking --------------------------------------------------------

def _join(a: str | None, b: str | None, what: str) -> str | None:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise ExprError(f"width mismatch in {what}: {a} vs {b}")


def _check_int(e: Expr, env: dict[str, str]):
    """Return (annotated expr, width-or-None) for an integer expression."""
    if isinstance(e, IntLit):
        if e.value < 0:
            raise ExprError("negative literal")
        return e, None
    if isinstance(e, Var):
        ty = env.get(e.name)
        if ty is None:
            raise ExprError(f"unbound variable {e.name!r}")
        if ty == "bool":
            raise ExprError(f"boolean variable {e.name!r} in arithmetic")
        return e, ty
    if isinstance(e, (Add, Sub, Mul)):
        lhs, wl = _check_int(e.lhs, env)
        rhs, wr = _check_int(e.rhs, env)
        w = _join(wl, wr, type(e).__name__.lower())
        return type(e)(lhs, rhs), w
    raise ExprError(f"expected integer expression, got {type(e).__name__}")


def typecheck(e: Expr, env: dict[str, str]) -> tuple[Expr, str]:
    """Check *e* against variable declarations.

    Returns the annotated expression (comparison widths filled in) and its
    type: one of the integer type names or "bool".
    """
    if isinstance(e, BoolLit):
        return e, "bool"
    if isinstance(e, Var):
        ty = env.get(e.name)
        if ty is None:
            raise ExprError(f"unbound variable {e.name!r}")
        return e, ty
    if isinstance(e, (IntLit, Add, Sub, Mul)):
        ann, w = _check_int(e, env)
        return ann, w or DEFAULT_INT
    if isinstance(e, Cmp):
        lhs, wl = _check_int(e.lhs, env)
        rhs, wr = _check_int(e.rhs, env)
        w = _join(wl, wr, f"comparison {e.op!r}") or DEFAULT_INT
        return Cmp(e.op, lhs, rhs, w), "bool"
    if isinstance(e, (And, Or)):
        lhs, tl = typecheck(e.lhs, env)
        rhs, tr = typecheck(e.rhs, env)
        if tl != "bool" or tr != "bool":
            raise ExprError("logical operator on non-boolean operand")
        return type(e)(lhs, rhs), "bool"
    if isinstance(e, Not):
        arg, t = typecheck(e.arg, env)
        if t != "bool":
            raise ExprError("'!' on non-boolean operand")
        return Not(arg), "bool"
    raise ExprError(f"unknown expression node {type(e).__name__}")


# --- evaluation -----------------------------------------------------------

def _eval_int(e: Expr, m: Memory) -> tuple[str | None, int]:
    """Evaluate an integer expression to (tag, value).

    The tag is None while only literals have been seen; the value is then
    exact.  As soon as a tagged operand joins, results wrap at its width.
    """
    if isinstance(e, IntLit):
        return None, e.value
    if isinstance(e, Var):
        v = m.get(e.name)
        if v is None:
            raise ExprError(f"unbound variable {e.name!r}")
        if v.tag == "bool":
            raise ExprError(f"boolean variable {e.name!r} in arithmetic")
        return v.tag, v.payload
    if isinstance(e, (Add, Sub, Mul)):
        tl, a = _eval_int(e.lhs, m)
        tr, b = _eval_int(e.rhs, m)
        tag = _join(tl, tr, "arithmetic")
        if isinstance(e, Add):
            n = a + b
        elif isinstance(e, Sub):
            n = a - b
        else:
            n = a * b
        if tag is not None:
            n &= max_of(tag)
        return tag, n
    raise ExprError(f"expected integer expression, got {type(e).__name__}")


_CMP_FUNCS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_expr(e: Expr, m: Memory) -> Value:
    """Evaluate an expression against a memory of tagged values."""
    if isinstance(e, BoolLit):
        return Value("bool", int(e.value))
    if isinstance(e, Var):
        v = m.get(e.name)
        if v is None:
            raise ExprError(f"unbound variable {e.name!r}")
        return v
    if isinstance(e, (IntLit, Add, Sub, Mul)):
        tag, n = _eval_int(e, m)
        tag = tag or DEFAULT_INT
        return Value(tag, n & max_of(tag))
    if isinstance(e, Cmp):
        tl, a = _eval_int(e.lhs, m)
        tr, b = _eval_int(e.rhs, m)
        tag = _join(tl, tr, "comparison") or e.width or DEFAULT_INT
        a &= max_of(tag)
        b &= max_of(tag)
        return Value("bool", int(_CMP_FUNCS[e.op](a, b)))
    if isinstance(e, And):
        return Value("bool", int(eval_expr(e.lhs, m).as_bool()
                                 and eval_expr(e.rhs, m).as_bool()))
    if isinstance(e, Or):
        return Value("bool", int(eval_expr(e.lhs, m).as_bool()
                                 or eval_expr(e.rhs, m).as_bool()))
    if isinstance(e, Not):
        return Value("bool", int(not eval_expr(e.arg, m).as_bool()))
    raise ExprError(f"unknown expression node {type(e).__name__}")


def apply_effect(assigns, m: Memory) -> Memory:
    """Apply an ordered assignment list to memory, left to right.

    Each assignment sees the updates made by the previous ones.  The result
    is a fresh memory; the input is not modified.
    """
    out = dict(m)
    for name, e in assigns:
        old = out.get(name)
        if old is None:
            raise ExprError(f"assignment to undeclared variable {name!r}")
        v = eval_expr(e, out)
        if old.tag == "bool":
            if v.tag != "bool":
                raise ExprError(f"assigning integer to boolean {name!r}")
            out[name] = v
        else:
            if v.tag == "bool":
                raise ExprError(f"assigning boolean to integer {name!r}")
            out[name] = int_value(old.tag, v.payload)
    return out


# --- printing -------------------------------------------------------------

_PREC = {"||": 1, "&&": 2, "!": 3, "cmp": 4, "+": 5, "-": 5, "*": 6}


def _show(e: Expr, parent: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        mine = _PREC["+"]
        s = f"{_show(e.lhs, mine)} + {_show(e.rhs, mine + 1)}"
    elif isinstance(e, Sub):
        mine = _PREC["-"]
        s = f"{_show(e.lhs, mine)} - {_show(e.rhs, mine + 1)}"
    elif isinstance(e, Mul):
        mine = _PREC["*"]
        s = f"{_show(e.lhs, mine)} * {_show(e.rhs, mine + 1)}"
    elif isinstance(e, Cmp):
        mine = _PREC["cmp"]
        s = f"{_show(e.lhs, mine + 1)} {e.op} {_show(e.rhs, mine + 1)}"
    elif isinstance(e, And):
        mine = _PREC["&&"]
        s = f"{_show(e.lhs, mine)} && {_show(e.rhs, mine)}"
    elif isinstance(e, Or):
        mine = _PREC["||"]
        s = f"{_show(e.lhs, mine)} || {_show(e.rhs, mine)}"
    elif isinstance(e, Not):
        mine = _PREC["!"]
        s = f"!{_show(e.arg, mine + 1)}"
    else:
        raise ExprError(f"unknown expression node {type(e).__name__}")
    return f"({s})" if mine < parent else s


def pretty(e: Expr) -> str:
    """Canonical text form; re-parsing it yields an equal expression."""
    return _show(e, 0)
