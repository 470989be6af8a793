"""Mechanical replay of infeasibility witnesses.

A witness is an ordered list of derivation steps over a growing context of
linear constraints.  The context starts as the cube under refutation (plus
any case-split assumptions); each step appends one derived constraint:

* combine: an integer combination of earlier constraints; multipliers on
  inequalities must be non-negative, multipliers on equalities are free.
* tighten: divide an inequality by the gcd of its coefficients, flooring
  the right-hand side; an equality whose gcd does not divide its right-hand
  side derives the canonical contradiction 0 <= -1.
* split: exhaustive case distinction over an integer range.  The referenced
  bound constraints must already pin the variable to [lo, hi]; one branch
  witness per value refutes the cube extended with `var == value`.

Replay accepts when a constant-false constraint appears (a split accepts
when every branch accepts).  There is no search: cost is linear in the
size of the witness.  Replay never raises; malformed input is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from ..linear import Cube, LinCon


@dataclass(frozen=True)
class Combine:
    terms: tuple[tuple[int, int], ...]  # (context index, multiplier)


@dataclass(frozen=True)
class Tighten:
    index: int


@dataclass(frozen=True)
class RangeSplit:
    var: str
    lo: int
    hi: int
    lo_index: int
    hi_index: int
    branches: tuple["Witness", ...]


Step = Combine | Tighten | RangeSplit


@dataclass(frozen=True)
class Witness:
    steps: tuple[Step, ...]


class _Reject(Exception):
    pass


def _combine(ctx: list[LinCon], terms) -> LinCon:
    if not terms:
        raise _Reject("empty combination")
    coeffs: dict[str, int] = {}
    rhs = 0
    rel = "=="
    for idx, mult in terms:
        if not 0 <= idx < len(ctx):
            raise _Reject("index out of range")
        con = ctx[idx]
        if con.rel == "<=":
            if mult < 0:
                raise _Reject("negative multiplier on inequality")
            rel = "<="
        for v, c in con.coeffs:
            coeffs[v] = coeffs.get(v, 0) + mult * c
        rhs += mult * con.rhs
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    return LinCon(items, rel, rhs)


def _tighten(ctx: list[LinCon], index: int) -> LinCon:
    if not 0 <= index < len(ctx):
        raise _Reject("index out of range")
    con = ctx[index]
    if not con.coeffs:
        raise _Reject("tighten on constant constraint")
    g = 0
    for _, c in con.coeffs:
        g = gcd(g, abs(c))
    coeffs = tuple((v, c // g) for v, c in con.coeffs)
    if con.rel == "<=":
        return LinCon(coeffs, "<=", con.rhs // g)
    if con.rhs % g != 0:
        return LinCon((), "<=", -1)  # no integer solution exists
    return LinCon(coeffs, "==", con.rhs // g)


def _is_lower_bound(con: LinCon, var: str, lo: int) -> bool:
    return con == LinCon(((var, -1),), "<=", -lo)


def _is_upper_bound(con: LinCon, var: str, hi: int) -> bool:
    return con == LinCon(((var, 1),), "<=", hi)


def _replay(base: list[LinCon], base_len: int, w: Witness) -> bool:
    """`base[:base_len]` is cube plus assumptions; the rest is derived."""
    ctx = list(base)
    if any(con.const_false() for con in ctx):
        return True
    for pos, step in enumerate(w.steps):
        if isinstance(step, Combine):
            derived = _combine(ctx, step.terms)
        elif isinstance(step, Tighten):
            derived = _tighten(ctx, step.index)
        elif isinstance(step, RangeSplit):
            if pos != len(w.steps) - 1:
                raise _Reject("split must be the final step")
            if step.lo > step.hi:
                raise _Reject("empty split range")
            if len(step.branches) != step.hi - step.lo + 1:
                raise _Reject("branch count does not match range")
            if not 0 <= step.lo_index < len(ctx):
                raise _Reject("index out of range")
            if not 0 <= step.hi_index < len(ctx):
                raise _Reject("index out of range")
            if not _is_lower_bound(ctx[step.lo_index], step.var, step.lo):
                raise _Reject("lower bound constraint does not match")
            if not _is_upper_bound(ctx[step.hi_index], step.var, step.hi):
                raise _Reject("upper bound constraint does not match")
            prefix = ctx[:base_len]
            for k, value in enumerate(range(step.lo, step.hi + 1)):
                assumption = LinCon(((step.var, 1),), "==", value)
                branch_base = prefix + [assumption]
                if not _replay(branch_base, len(branch_base),
                               step.branches[k]):
                    return False
            return True
        else:
            raise _Reject(f"unknown step {type(step).__name__}")
        ctx.append(derived)
        if derived.const_false():
            return True
    return False


def replay_witness(cube: Cube, witness: Witness) -> bool:
    """True when the witness mechanically refutes the cube."""
    try:
        return _replay(list(cube), len(cube), witness)
    except (_Reject, TypeError, ValueError, AttributeError, IndexError):
        return False


# --- text form --------------------------------------------------------------
#
# steps N
# combine IDX*MULT IDX*MULT ...
# tighten IDX
# split VAR LO HI LOIDX HIIDX     (followed by one block per branch)

def witness_lines(w: Witness) -> list[str]:
    out = [f"steps {len(w.steps)}"]
    for step in w.steps:
        if isinstance(step, Combine):
            out.append("combine " + " ".join(f"{i}*{m}" for i, m in step.terms))
        elif isinstance(step, Tighten):
            out.append(f"tighten {step.index}")
        elif isinstance(step, RangeSplit):
            out.append(f"split {step.var} {step.lo} {step.hi} "
                       f"{step.lo_index} {step.hi_index}")
            for branch in step.branches:
                out.extend(witness_lines(branch))
        else:
            raise ValueError(f"unknown step {type(step).__name__}")
    return out


class WitnessSyntaxError(Exception):
    pass


def parse_witness_lines(lines: list[str], at: int = 0) -> tuple[Witness, int]:
    """Parse one witness block starting at `lines[at]`; returns (witness, next)."""
    def fail(msg):
        raise WitnessSyntaxError(f"witness line {at}: {msg}")

    if at >= len(lines):
        raise WitnessSyntaxError("missing witness block")
    head = lines[at].split()
    if len(head) != 2 or head[0] != "steps":
        raise WitnessSyntaxError(f"expected 'steps N', got {lines[at]!r}")
    try:
        count = int(head[1])
    except ValueError:
        raise WitnessSyntaxError(f"bad step count {head[1]!r}")
    at += 1
    steps: list[Step] = []
    for _ in range(count):
        if at >= len(lines):
            raise WitnessSyntaxError("truncated witness")
        parts = lines[at].split()
        at += 1
        if not parts:
            raise WitnessSyntaxError("blank witness line")
        if parts[0] == "combine":
            terms = []
            for item in parts[1:]:
                idx, _, mult = item.partition("*")
                terms.append((int(idx), int(mult)))
            if not terms:
                raise WitnessSyntaxError("combine without terms")
            steps.append(Combine(tuple(terms)))
        elif parts[0] == "tighten":
            if len(parts) != 2:
                raise WitnessSyntaxError("tighten takes one index")
            steps.append(Tighten(int(parts[1])))
        elif parts[0] == "split":
            if len(parts) != 6:
                raise WitnessSyntaxError("split takes 5 arguments")
            var, lo, hi, lo_idx, hi_idx = (parts[1], int(parts[2]),
                                           int(parts[3]), int(parts[4]),
                                           int(parts[5]))
            if hi < lo or hi - lo > 1_000_000:
                raise WitnessSyntaxError("bad split range")
            branches = []
            for _ in range(hi - lo + 1):
                branch, at = parse_witness_lines(lines, at)
                branches.append(branch)
            steps.append(RangeSplit(var, lo, hi, lo_idx, hi_idx,
                                    tuple(branches)))
        else:
            raise WitnessSyntaxError(f"unknown step {parts[0]!r}")
    return Witness(tuple(steps)), at
