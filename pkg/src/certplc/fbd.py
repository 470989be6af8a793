"""Dataflow bodies for action blocks.

A diagram is a set of blocks wired by port references.  Blocks read global
variables, combine values and write results back.  Cycles are legal only
through delay blocks, which emit the value captured in the previous
iteration and start from the type default.  A diagram runs for exactly
``time_slice`` iterations; globals are read at iteration start and written
back from the final iteration only.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as E
from .linear import LinForm
from .parsing import ParseError, TokenStream

ARITH_KINDS = ("add", "sub", "mul")
CMP_KINDS = ("lt", "le", "eq", "ne", "ge", "gt")
KINDS = ARITH_KINDS + CMP_KINDS + ("mux", "const", "read", "write", "delay")

_ARITY = {"add": 2, "sub": 2, "mul": 2, "lt": 2, "le": 2, "eq": 2, "ne": 2,
          "ge": 2, "gt": 2, "mux": 3, "const": 0, "read": 0, "write": 1,
          "delay": 1}

_CMP_OPS = {"lt": "<", "le": "<=", "eq": "==", "ne": "!=", "ge": ">=",
            "gt": ">"}


class FbdError(Exception):
    """Structural or type error in a diagram."""


@dataclass(frozen=True)
class PortRef:
    block: str


@dataclass(frozen=True)
class ConstIn:
    value: int | bool


Operand = PortRef | ConstIn


@dataclass(frozen=True)
class Block:
    id: str
    kind: str
    inputs: tuple[Operand, ...] = ()
    var: str | None = None       # read/write target
    value: int | bool | None = None  # const payload


@dataclass(frozen=True)
class Fbd:
    name: str
    blocks: tuple[Block, ...]  # sorted by id
    time_slice: int

    def block(self, bid: str) -> Block:
        for b in self.blocks:
            if b.id == bid:
                return b
        raise FbdError(f"unknown block {bid!r}")


def _dependencies(f: Fbd) -> dict[str, list[str]]:
    """Evaluation dependencies with delay outputs cut.

    A block depends on the producers of its input ports, except that a
    delay's output is available at iteration start and induces no edge.
    """
    deps = {b.id: [] for b in f.blocks}
    byid = {b.id: b for b in f.blocks}
    for b in f.blocks:
        for op in b.inputs:
            if isinstance(op, PortRef):
                src = byid.get(op.block)
                if src is None:
                    raise FbdError(f"block {b.id!r} reads unknown block "
                                   f"{op.block!r}")
                if src.kind == "write":
                    raise FbdError(f"block {b.id!r} reads write block "
                                   f"{op.block!r}")
                if src.kind != "delay":
                    deps[b.id].append(src.id)
    return deps


def topo_order(f: Fbd) -> list[str]:
    """Topological order of the delay-cut dependency graph.

    Raises FbdError when a cycle survives the cut, i.e. some cycle has no
    delay block on it.
    """
    deps = _dependencies(f)
    order: list[str] = []
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(bid, chain):
        mark = state.get(bid)
        if mark == 1:
            return
        if mark == 0:
            raise FbdError("cycle without a delay block: "
                           + " -> ".join(chain + [bid]))
        state[bid] = 0
        for d in deps[bid]:
            visit(d, chain + [bid])
        state[bid] = 1
        order.append(bid)

    for b in f.blocks:
        visit(b.id, [])
    return order


def has_delay(f: Fbd) -> bool:
    return any(b.kind == "delay" for b in f.blocks)


def validate_fbd(f: Fbd, env: dict[str, str]) -> dict[str, str]:
    """Check structure and infer port types; returns block id -> type."""
    if f.time_slice < 1:
        raise FbdError(f"time slice must be positive, got {f.time_slice}")
    seen = set()
    for b in f.blocks:
        if b.id in seen:
            raise FbdError(f"duplicate block id {b.id!r}")
        seen.add(b.id)
        if b.kind not in KINDS:
            raise FbdError(f"unknown block kind {b.kind!r}")
        if len(b.inputs) != _ARITY[b.kind]:
            raise FbdError(f"block {b.id!r}: {b.kind} takes "
                           f"{_ARITY[b.kind]} inputs")
        if b.kind in ("read", "write"):
            if b.var not in env:
                raise FbdError(f"block {b.id!r} uses undeclared variable "
                               f"{b.var!r}")
    targets = [b.var for b in f.blocks if b.kind == "write"]
    for v in targets:
        if targets.count(v) > 1:
            raise FbdError(f"variable {v!r} written by more than one block")
    topo_order(f)  # rejects undelayed cycles

    types: dict[str, str] = {}

    def op_type(op):
        if isinstance(op, ConstIn):
            return "bool" if isinstance(op.value, bool) else None
        return types.get(op.block)

    # Fixpoint over the finite type lattice (unknown -> concrete), forward
    # through the dataflow plus backward from write targets, which ground
    # delay loops that never read a global.
    changed = True
    while changed:
        changed = False
        for b in f.blocks:
            if b.id in types or b.kind == "write":
                continue
            t = None
            if b.kind == "read":
                t = env[b.var]
            elif b.kind == "const":
                t = "bool" if isinstance(b.value, bool) else None
            elif b.kind in CMP_KINDS:
                t = "bool"
            elif b.kind in ARITH_KINDS or b.kind == "delay":
                ins = [op_type(op) for op in b.inputs]
                known = [x for x in ins if x is not None]
                t = known[0] if known else None
            elif b.kind == "mux":
                ins = [op_type(op) for op in b.inputs[1:]]
                known = [x for x in ins if x is not None]
                t = known[0] if known else None
            if t is not None:
                types[b.id] = t
                changed = True
        for b in f.blocks:
            targets = None
            if b.kind == "write":
                targets = ((b.inputs[0], env[b.var]),)
            elif b.kind in ARITH_KINDS and b.id in types:
                targets = tuple((op, types[b.id]) for op in b.inputs)
            elif b.kind == "delay" and b.id in types:
                targets = ((b.inputs[0], types[b.id]),)
            if not targets:
                continue
            for op, want in targets:
                if isinstance(op, PortRef) and op.block not in types:
                    src = next(x for x in f.blocks if x.id == op.block)
                    if src.kind != "write":
                        types[op.block] = want
                        changed = True
    for b in f.blocks:
        if b.kind != "write" and b.id not in types:
            types[b.id] = E.DEFAULT_INT  # const-only island

    def check_int(b, t):
        if t == "bool":
            raise FbdError(f"block {b.id!r}: boolean input to {b.kind}")

    for b in f.blocks:
        ins = [op_type(op) for op in b.inputs]
        if b.kind in ARITH_KINDS or b.kind in CMP_KINDS:
            for t in ins:
                check_int(b, t)
            if ins[0] and ins[1] and ins[0] != ins[1]:
                raise FbdError(f"block {b.id!r}: width mismatch "
                               f"{ins[0]} vs {ins[1]}")
        elif b.kind == "mux":
            if ins[0] is not None and ins[0] != "bool":
                raise FbdError(f"block {b.id!r}: mux selector must be bool")
            if ins[1] and ins[2] and ins[1] != ins[2]:
                raise FbdError(f"block {b.id!r}: mux arm type mismatch")
        elif b.kind == "write":
            want = env[b.var]
            got = ins[0]
            if got is not None and got != want:
                raise FbdError(f"block {b.id!r}: writing {got} into "
                               f"{want} variable {b.var!r}")
    return types


# --- evaluation -----------------------------------------------------------

def _coerce(value, ty: str) -> E.Value:
    if isinstance(value, E.Value):
        if value.tag == ty:
            return value
        if value.tag != "bool" and ty != "bool":
            return E.int_value(ty, value.payload)
        raise FbdError(f"cannot coerce {value.tag} to {ty}")
    if isinstance(value, bool):
        if ty != "bool":
            raise FbdError("boolean constant in integer position")
        return E.Value("bool", int(value))
    if ty == "bool":
        raise FbdError("integer constant in boolean position")
    return E.int_value(ty, value)


def eval_iterative(f: Fbd, m: E.Memory) -> E.Memory:
    """Run the diagram for exactly its time slice and write back results."""
    env = {name: v.tag for name, v in m.items()}
    types = validate_fbd(f, env)
    order = topo_order(f)
    byid = {b.id: b for b in f.blocks}
    delays = {b.id: E.default_value(types[b.id])
              for b in f.blocks if b.kind == "delay"}
    writes: dict[str, E.Value] = {}

    for _ in range(f.time_slice):
        vals: dict[str, E.Value] = dict(delays)

        def operand(op, ty):
            if isinstance(op, ConstIn):
                return _coerce(op.value, ty)
            return _coerce(vals[op.block], ty)

        writes = {}
        for bid in order:
            b = byid[bid]
            if b.kind == "delay":
                continue
            if b.kind == "read":
                vals[bid] = m[b.var]
            elif b.kind == "const":
                vals[bid] = _coerce(b.value, types[bid])
            elif b.kind in ARITH_KINDS:
                ty = types[bid]
                a = operand(b.inputs[0], ty).payload
                c = operand(b.inputs[1], ty).payload
                n = a + c if b.kind == "add" else a - c if b.kind == "sub" else a * c
                vals[bid] = E.int_value(ty, n)
            elif b.kind in CMP_KINDS:
                tys = [types[op.block] for op in b.inputs
                       if isinstance(op, PortRef)]
                ty = tys[0] if tys else E.DEFAULT_INT
                a = operand(b.inputs[0], ty).payload
                c = operand(b.inputs[1], ty).payload
                vals[bid] = E.Value("bool", int(
                    E._CMP_FUNCS[_CMP_OPS[b.kind]](a, c)))
            elif b.kind == "mux":
                sel = operand(b.inputs[0], "bool").as_bool()
                ty = types[bid]
                vals[bid] = operand(b.inputs[1 if sel else 2], ty)
            elif b.kind == "write":
                ty = env[b.var]
                writes[b.var] = operand(b.inputs[0], ty)
        for bid in delays:
            blk = byid[bid]
            delays[bid] = operand(blk.inputs[0], types[bid])

    out = dict(m)
    out.update(writes)
    return out


def eval_acyclic(f: Fbd, m: E.Memory) -> E.Memory:
    """Single-pass evaluation; rejects diagrams that need iteration."""
    if has_delay(f):
        raise FbdError("diagram has delay blocks, use eval_iterative")
    return eval_iterative(Fbd(f.name, f.blocks, 1), m)


def fbd_to_action(f: Fbd):
    """Compile the diagram to an opaque memory-to-memory effect."""
    def effect(m: E.Memory) -> E.Memory:
        return eval_iterative(f, m)
    return effect


def linear_summary(f: Fbd, env: dict[str, str]):
    """Exact parallel update computed by the diagram, when it is linear.

    Returns written-variable -> raw linear form over the pre-state, or None
    when the diagram uses comparisons, muxes or non-constant multiplication.
    Raw forms defer wrapping: all block arithmetic is congruent mod 2**w, so
    a single wrap at the end is exact.
    """
    try:
        validate_fbd(f, env)
    except FbdError:
        return None
    order = topo_order(f)
    byid = {b.id: b for b in f.blocks}
    delays = {b.id: LinForm.of_const(0) for b in f.blocks if b.kind == "delay"}
    writes: dict[str, LinForm] = {}

    def operand(op, vals):
        if isinstance(op, ConstIn):
            if isinstance(op.value, bool):
                return LinForm.of_const(int(op.value))
            return LinForm.of_const(op.value)
        return vals[op.block]

    for _ in range(f.time_slice):
        vals = dict(delays)
        writes = {}
        for bid in order:
            b = byid[bid]
            if b.kind == "delay":
                continue
            if b.kind == "read":
                vals[bid] = LinForm.of_var(b.var)
            elif b.kind == "const":
                v = int(b.value) if isinstance(b.value, bool) else b.value
                vals[bid] = LinForm.of_const(v)
            elif b.kind == "add":
                vals[bid] = operand(b.inputs[0], vals).add(
                    operand(b.inputs[1], vals))
            elif b.kind == "sub":
                vals[bid] = operand(b.inputs[0], vals).sub(
                    operand(b.inputs[1], vals))
            elif b.kind == "mul":
                a = operand(b.inputs[0], vals)
                c = operand(b.inputs[1], vals)
                if a.is_const():
                    vals[bid] = c.scale(a.const)
                elif c.is_const():
                    vals[bid] = a.scale(c.const)
                else:
                    return None
            elif b.kind == "write":
                writes[b.var] = operand(b.inputs[0], vals)
            else:
                return None  # comparisons and muxes are not linear
        for bid in delays:
            delays[bid] = operand(byid[bid].inputs[0], vals)
    return writes


# --- surface syntax -------------------------------------------------------
#
# fbd NAME {
#   block ID = read VAR
#   block ID = write VAR (PORT)
#   block ID = const LIT
#   block ID = add(PORT, PORT)        # likewise sub/mul/lt/le/eq/ne/ge/gt
#   block ID = mux(PORT, PORT, PORT)
#   block ID = delay(PORT)
#   timeslice N
# }
#
# PORT is either `ID.out` or an inline `const LIT`.

def _parse_operand(ts: TokenStream) -> Operand:
    if ts.at("const"):
        ts.next()
        return ConstIn(_parse_const_lit(ts))
    name = ts.ident()
    ts.expect(".")
    out = ts.ident()
    if out.text != "out":
        raise ParseError(f"expected port 'out', found {out.text!r}",
                         out.line, out.col)
    return PortRef(name.text)


def _parse_const_lit(ts: TokenStream):
    t = ts.peek()
    if t.kind == "int":
        return ts.integer()
    if ts.accept("true"):
        return True
    if ts.accept("false"):
        return False
    ts.error("expected constant literal")


def parse_fbd(ts: TokenStream, name: str) -> Fbd:
    ts.expect("{")
    blocks = []
    time_slice = None
    while not ts.accept("}"):
        if ts.accept("timeslice"):
            t = ts.peek()
            n = ts.integer()
            if n < 1:
                raise ParseError("time slice must be positive", t.line, t.col)
            time_slice = n
            continue
        ts.expect("block")
        bid = ts.ident().text
        ts.expect("=")
        kw = ts.ident()
        kind = kw.text
        if kind not in KINDS:
            raise ParseError(f"unknown block kind {kind!r}", kw.line, kw.col)
        if kind == "read":
            blocks.append(Block(bid, kind, var=ts.ident().text))
        elif kind == "write":
            var = ts.ident().text
            ts.expect("(")
            src = _parse_operand(ts)
            ts.expect(")")
            blocks.append(Block(bid, kind, inputs=(src,), var=var))
        elif kind == "const":
            blocks.append(Block(bid, kind, value=_parse_const_lit(ts)))
        else:
            ts.expect("(")
            ops = [_parse_operand(ts)]
            while ts.accept(","):
                ops.append(_parse_operand(ts))
            ts.expect(")")
            if len(ops) != _ARITY[kind]:
                raise ParseError(f"{kind} takes {_ARITY[kind]} inputs",
                                 kw.line, kw.col)
            blocks.append(Block(bid, kind, inputs=tuple(ops)))
    return Fbd(name, tuple(sorted(blocks, key=lambda b: b.id)),
               time_slice if time_slice is not None else 1)


def _show_operand(op: Operand) -> str:
    if isinstance(op, ConstIn):
        if isinstance(op.value, bool):
            return f"const {'true' if op.value else 'false'}"
        return f"const {op.value}"
    return f"{op.block}.out"


def fbd_lines(f: Fbd) -> list[str]:
    lines = [f"fbd {f.name} {{"]
    for b in f.blocks:
        if b.kind == "read":
            body = f"read {b.var}"
        elif b.kind == "write":
            body = f"write {b.var} ({_show_operand(b.inputs[0])})"
        elif b.kind == "const":
            lit = ("true" if b.value else "false") \
                if isinstance(b.value, bool) else str(b.value)
            body = f"const {lit}"
        else:
            args = ", ".join(_show_operand(op) for op in b.inputs)
            body = f"{b.kind}({args})"
        lines.append(f"  block {b.id} = {body}")
    lines.append(f"  timeslice {f.time_slice}")
    lines.append("}")
    return lines
