"""Satisfiability of linear integer constraint conjunctions.

Variable elimination in the style of the Omega test: unit equalities are
substituted away, every derived inequality is gcd-tightened, and variables
are eliminated by combining lower and upper bounds (variables with a unit
coefficient on one side go first, where the shadow is exact for integers).
Because every cube carries finite width bounds, an integrality gap left by
inexact elimination is closed by an exhaustive case split over the
variable's bounded range, so the procedure is complete on the fragment.

Every derived constraint remembers its provenance; refutations unwind into
witnesses that `witness.replay_witness` checks without search.  Satisfying
assignments are re-checked against the input cube before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from ..linear import Cube, Dnf, LinCon, clean_cube
from .witness import Combine, RangeSplit, Tighten, Witness


class DeciderResourceError(Exception):
    """Configured search limits exceeded; the query stays undecided."""


class FragmentViolation(Exception):
    """Cube is outside the bounded linear fragment."""


@dataclass
class Sat:
    assignment: dict


@dataclass
class Unsat:
    witness: Witness


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _floor_div(a: int, b: int) -> int:
    return a // b


class _Node:
    """A constraint plus how it was obtained."""

    __slots__ = ("con", "kind", "args")

    def __init__(self, con: LinCon, kind: str, args):
        self.con = con
        self.kind = kind  # orig | assume | combine | tighten
        self.args = args  # orig: cube index; assume: depth;
        #                   combine: ((node, mult), ...); tighten: node

    def __repr__(self):
        return f"_Node({self.con.pretty()}, {self.kind})"


def _combine_nodes(terms) -> _Node:
    coeffs: dict[str, int] = {}
    rhs = 0
    rel = "=="
    for node, mult in terms:
        con = node.con
        if con.rel == "<=":
            rel = "<="
        for v, c in con.coeffs:
            coeffs[v] = coeffs.get(v, 0) + mult * c
        rhs += mult * con.rhs
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    return _Node(LinCon(items, rel, rhs), "combine", tuple(terms))


def _tighten_node(node: _Node) -> _Node:
    con = node.con
    g = 0
    for _, c in con.coeffs:
        g = gcd(g, abs(c))
    if g <= 1:
        return node
    coeffs = tuple((v, c // g) for v, c in con.coeffs)
    if con.rel == "<=":
        tight = LinCon(coeffs, "<=", _floor_div(con.rhs, g))
    elif con.rhs % g != 0:
        tight = LinCon((), "<=", -1)
    else:
        tight = LinCon(coeffs, "==", con.rhs // g)
    if tight == con:
        return node
    return _Node(tight, "tighten", node)


def _emit(node: _Node, steps: list, index: dict, n_orig: int,
          n_assume: int) -> int:
    """Append the derivation chain of `node`, returning its context index."""
    got = index.get(id(node))
    if got is not None:
        return got
    if node.kind == "orig":
        idx = node.args
    elif node.kind == "assume":
        idx = n_orig + node.args
    elif node.kind == "combine":
        terms = tuple((_emit(p, steps, index, n_orig, n_assume), m)
                      for p, m in node.args)
        steps.append(Combine(terms))
        idx = n_orig + n_assume + len(steps) - 1
    elif node.kind == "tighten":
        parent = _emit(node.args, steps, index, n_orig, n_assume)
        steps.append(Tighten(parent))
        idx = n_orig + n_assume + len(steps) - 1
    else:
        raise AssertionError(node.kind)
    index[id(node)] = idx
    return idx


def _extract(node: _Node, n_orig: int, n_assume: int) -> Witness:
    steps: list = []
    _emit(node, steps, {}, n_orig, n_assume)
    return Witness(tuple(steps))


class _Limits:
    def __init__(self, max_derived: int, split_limit: int):
        self.max_derived = max_derived
        self.split_limit = split_limit
        self.derived = 0
        self.split_values = 0

    def count(self, n: int = 1):
        self.derived += n
        if self.derived > self.max_derived:
            raise DeciderResourceError(
                f"more than {self.max_derived} derived constraints")

    def count_split(self, n: int):
        self.split_values += n
        if self.split_values > self.split_limit:
            raise DeciderResourceError(
                f"case split budget {self.split_limit} exceeded")


def _simplify(cons: list[_Node], limits: _Limits):
    """Tighten, deduplicate and substitute unit equalities away.

    Returns (active nodes, eliminated (var, eq-node) stack, contradiction
    node or None).
    """
    eliminated: list[tuple[str, _Node]] = []
    work = list(cons)
    while True:
        best: dict[tuple, _Node] = {}
        for nd in work:
            nd = _tighten_node(nd)
            con = nd.con
            if con.is_const():
                if con.const_false():
                    return [], eliminated, nd
                continue
            key = (con.coeffs, con.rel)
            other = best.get(key)
            if other is None:
                best[key] = nd
            elif con.rel == "<=":
                if con.rhs < other.con.rhs:
                    best[key] = nd
            elif con.rhs != other.con.rhs:
                limits.count()
                return [], eliminated, _combine_nodes(((nd, 1), (other, -1)))
        active = sorted(best.values(),
                        key=lambda nd: (nd.con.coeffs, nd.con.rel, nd.con.rhs))
        pick = None
        for nd in active:
            if nd.con.rel != "==":
                continue
            units = [v for v, c in nd.con.coeffs if abs(c) == 1]
            if units:
                pick = (nd, min(units))
                break
        if pick is None:
            return active, eliminated, None
        eq, var = pick
        c_eq = dict(eq.con.coeffs)[var]
        work = []
        for nd in active:
            if nd is eq:
                continue
            c = dict(nd.con.coeffs).get(var, 0)
            if c == 0:
                work.append(nd)
            else:
                limits.count()
                work.append(_combine_nodes(((nd, 1), (eq, -c // c_eq))))
        eliminated.append((var, eq))


class _Solver:
    def __init__(self, cube: Cube, limits: _Limits):
        self.n_orig = len(cube)
        self.limits = limits
        self.roots = [_Node(con, "orig", i) for i, con in enumerate(cube)]

    def solve(self):
        return self._solve(list(self.roots), 0)

    def _solve(self, cons: list[_Node], n_assume: int):
        """Returns ("sat", assignment) or ("unsat", witness)."""
        active, eliminated, clash = _simplify(cons, self.limits)
        if clash is not None:
            return "unsat", _extract(clash, self.n_orig, n_assume)
        result = self._eliminate(active, n_assume)
        if result[0] == "unsat":
            return result
        assignment = result[1]
        for var, eq in reversed(eliminated):
            coeffs = dict(eq.con.coeffs)
            c = coeffs.pop(var)
            rest = sum(k * assignment[v] for v, k in coeffs.items())
            assignment[var] = (eq.con.rhs - rest) // c
        return "sat", assignment

    # An "entry" reads a node as the inequality sign*con: equalities give
    # entries of both signs, inequalities only sign +1.  Combining entry
    # weights w >= 0 translates to node multipliers w*sign, which replay
    # accepts (equalities take either sign).

    @staticmethod
    def _entries(nodes, var):
        lowers, uppers, rest = [], [], []
        for nd in nodes:
            c = dict(nd.con.coeffs).get(var, 0)
            if c == 0:
                rest.append(nd)
                continue
            signs = (1, -1) if nd.con.rel == "==" else (1,)
            for sign in signs:
                eff = c * sign
                entry = (nd, sign, eff)
                if eff > 0:
                    uppers.append(entry)
                else:
                    lowers.append(entry)
        return lowers, uppers, rest

    def _eliminate(self, active: list[_Node], n_assume: int):
        variables = sorted({v for nd in active for v, _ in nd.con.coeffs})
        if not variables:
            return "sat", {}
        var = self._pick_var(active, variables)
        lowers, uppers, rest = self._entries(active, var)

        derived = list(rest)
        for lnd, lsign, leff in lowers:
            for und, usign, ueff in uppers:
                if lnd is und:
                    continue
                self.limits.count()
                combo = _combine_nodes(((lnd, ueff * lsign),
                                        (und, -leff * usign)))
                combo = _tighten_node(combo)
                if combo.con.const_false():
                    return "unsat", _extract(combo, self.n_orig, n_assume)
                if not (combo.con.is_const() and combo.con.const_true()):
                    derived.append(combo)

        sub = self._solve(derived, n_assume)
        if sub[0] == "unsat":
            return sub
        assignment = sub[1]
        value = self._pick_value(var, lowers, uppers, assignment)
        if value is not None:
            assignment[var] = value
            return "sat", assignment
        # rational interval holds no integer: exhaust the bounded range
        return self._range_split(active, var, n_assume)

    @staticmethod
    def _pick_var(active, variables):
        """Prefer exact eliminations, then fewest bound pairs, then name."""
        scored = []
        for var in variables:
            lo_coefs, up_coefs = [], []
            for nd in active:
                c = dict(nd.con.coeffs).get(var, 0)
                if c == 0:
                    continue
                if nd.con.rel == "==":
                    lo_coefs.append(abs(c))
                    up_coefs.append(abs(c))
                elif c > 0:
                    up_coefs.append(c)
                else:
                    lo_coefs.append(-c)
            exact = (not lo_coefs or not up_coefs
                     or all(c == 1 for c in lo_coefs)
                     or all(c == 1 for c in up_coefs))
            scored.append((not exact, len(lo_coefs) * len(up_coefs), var))
        scored.sort()
        return scored[0][2]

    def _pick_value(self, var, lowers, uppers, assignment):
        """Integer in the interval the bounds leave for var, or None."""
        def rest_of(nd):
            total = 0
            for v, k in nd.con.coeffs:
                if v == var:
                    continue
                if v not in assignment:
                    raise FragmentViolation(
                        f"variable {v!r} has no bounds in the cube")
                total += k * assignment[v]
            return total

        lo = None
        for nd, sign, eff in lowers:
            num = sign * (nd.con.rhs - rest_of(nd))
            b = _ceil_div(num, eff)  # dividing by eff < 0 flips the relation
            if lo is None or b > lo:
                lo = b
        hi = None
        for nd, sign, eff in uppers:
            num = sign * (nd.con.rhs - rest_of(nd))
            b = _floor_div(num, eff)
            if hi is None or b < hi:
                hi = b
        if lo is None or hi is None:
            raise FragmentViolation(f"variable {var!r} is unbounded")
        if lo > hi:
            return None
        return lo

    def _unit_bounds(self, active, var):
        """Tightened single-variable bounds on var, as unit-coefficient nodes."""
        lo = hi = None
        lo_nd = hi_nd = None
        for nd in active:
            con = nd.con
            if con.rel != "<=" or len(con.coeffs) != 1:
                continue
            if con.coeffs[0][0] != var:
                continue
            unit = _tighten_node(nd)
            v, c = unit.con.coeffs[0]
            if c == 1:
                if hi is None or unit.con.rhs < hi:
                    hi, hi_nd = unit.con.rhs, unit
            else:
                b = -unit.con.rhs
                if lo is None or b > lo:
                    lo, lo_nd = b, unit
        return lo, hi, lo_nd, hi_nd

    def _range_split(self, active: list[_Node], var: str, n_assume: int):
        lo, hi, lo_nd, hi_nd = self._unit_bounds(active, var)
        if lo is None or hi is None:
            raise FragmentViolation(f"variable {var!r} is unbounded")
        if lo > hi:
            self.limits.count()
            combo = _tighten_node(_combine_nodes(((lo_nd, 1), (hi_nd, 1))))
            if not combo.con.const_false():
                raise AssertionError("expected contradiction from bounds")
            return "unsat", _extract(combo, self.n_orig, n_assume)
        self.limits.count_split(hi - lo + 1)
        branches = []
        for value in range(lo, hi + 1):
            assume = _Node(LinCon(((var, 1),), "==", value), "assume",
                           n_assume)
            sub = self._solve(active + [assume], n_assume + 1)
            if sub[0] == "sat":
                return sub
            branches.append(sub[1])
        steps: list = []
        index: dict = {}
        lo_idx = _emit(lo_nd, steps, index, self.n_orig, n_assume)
        hi_idx = _emit(hi_nd, steps, index, self.n_orig, n_assume)
        steps.append(RangeSplit(var, lo, hi, lo_idx, hi_idx, tuple(branches)))
        return "unsat", Witness(tuple(steps))


def decide_sat(cube: Cube, *, max_derived: int = 50_000,
               split_limit: int = 4096):
    """Sat with a checked assignment, or Unsat with a replayable witness."""
    limits = _Limits(max_derived, split_limit)
    solver = _Solver(tuple(cube), limits)
    kind, payload = solver.solve()
    if kind == "unsat":
        return Unsat(payload)
    for con in cube:
        if not con.evaluate(payload):
            raise AssertionError(
                f"internal error: model fails {con.pretty()}")
    return Sat(payload)


@dataclass
class Valid:
    witnesses: tuple[Witness, ...]


@dataclass
class Invalid:
    assignment: dict


def negate_constraint(con: LinCon) -> tuple[LinCon, ...]:
    """Negation as a disjunction of constraints."""
    flipped = tuple((v, -c) for v, c in con.coeffs)
    if con.rel == "<=":
        return (LinCon(flipped, "<=", -con.rhs - 1),)
    return (LinCon(con.coeffs, "<=", con.rhs - 1),
            LinCon(flipped, "<=", -con.rhs - 1))


def negate_dnf(dnf: Dnf, cap: int = 1024) -> Dnf:
    """Negation of a disjunction of cubes, again in disjunctive form."""
    acc: list = [()]
    for cube in dnf:
        nxt = []
        for prefix in acc:
            for con in cube:
                for neg in negate_constraint(con):
                    merged = clean_cube(prefix + (neg,))
                    if merged is not None:
                        nxt.append(merged)
                    if len(nxt) > cap:
                        raise DeciderResourceError(
                            "negation exceeds the disjunct cap")
        acc = nxt
        if not acc:
            return ()
    return tuple(acc)


def decide_valid_implication(hyp: Dnf, concl: Dnf, *, cap: int = 1024,
                             max_derived: int = 50_000,
                             split_limit: int = 4096):
    """Valid when hyp and the negated conclusion cannot meet.

    Valid carries one witness per counterexample cube (hypothesis cube
    joined with one negated-conclusion cube, constant-false joins skipped);
    Invalid carries a falsifying assignment.
    """
    neg = negate_dnf(concl, cap)
    witnesses = []
    for h in hyp:
        for n in neg:
            cube = clean_cube(h + n)
            if cube is None:
                continue
            res = decide_sat(cube, max_derived=max_derived,
                             split_limit=split_limit)
            if isinstance(res, Sat):
                return Invalid(res.assignment)
            witnesses.append(res.witness)
    return Valid(tuple(witnesses))
