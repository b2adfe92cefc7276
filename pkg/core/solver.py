"""
Satisfiability solvers for gibbssat.
Polynomial 2-SAT through implication-graph components, DPLL for k-SAT, and a
brute-force MAX-SAT scan used as an oracle.

Work counters are deterministic functions of the formula; wall time is
informational only.
"""

import time
from collections import deque
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from core.errors import InvalidParameterError, TooLargeError, WidthError
from core.logger import get_logger
from core.sat_core import Assignment, CnfFormula, violations_for_configs


DEFAULT_EXHAUSTIVE_LIMIT = 30
SCAN_CHUNK_BITS = 20

UNASSIGNED = -1


@dataclass(frozen=True)
class WorkStats:
    """Deterministic solver effort plus informational wall time (seconds)."""

    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    wall_time: float = 0.0

    @property
    def total(self) -> int:
        """Run-time proxy reported in sweeps: decisions + propagations."""
        return self.decisions + self.propagations


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: Optional[Assignment]
    work: WorkStats


class MaxSatResult(NamedTuple):
    lambda_min: int
    degeneracy: int


def solve_2sat(formula: CnfFormula) -> SatResult:
    """
    Decide a 2-CNF formula in time linear in N + M.

    Literal x_v is node 2v, its negation node 2v + 1. Clause (a or b) adds the
    implications not-a -> b and not-b -> a. The formula is unsatisfiable iff a
    variable shares a strongly connected component with its negation; otherwise
    a variable is true iff its component comes after its negation's component
    in topological order of the condensation.
    """
    if formula.k != 2:
        raise WidthError(f"solve_2sat needs k = 2, got k = {formula.k}")

    start = time.perf_counter()
    n, m = formula.n_vars, formula.n_clauses
    nodes = 2 * formula.variables + formula.negated.astype(np.int64)
    a, b = nodes[:, 0], nodes[:, 1]
    sources = np.concatenate([a ^ 1, b ^ 1])
    targets = np.concatenate([b, a])
    graph = csr_matrix(
        (np.ones(sources.shape[0], dtype=np.int8), (sources, targets)),
        shape=(2 * n, 2 * n)
    )
    n_components, labels = connected_components(graph, directed=True, connection='strong')

    positive, negative = labels[0::2], labels[1::2]
    clashes = int(np.count_nonzero(positive == negative))
    satisfiable = clashes == 0
    witness = None
    steps = 0
    if satisfiable:
        order, steps = _topological_positions(n_components, labels[sources], labels[targets])
        witness = tuple(bool(x) for x in order[positive] > order[negative])

    # Stored implication edges plus Kahn steps; conflicts are self-opposed variables
    work = WorkStats(
        decisions=0,
        propagations=int(graph.nnz) + steps,
        conflicts=clashes,
        wall_time=time.perf_counter() - start
    )
    get_logger().debug(f"2-SAT N={n} M={m}: {'SAT' if satisfiable else 'UNSAT'}")
    return SatResult(satisfiable, witness, work)


def _topological_positions(n_components: int, heads: np.ndarray,
                           tails: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Kahn's algorithm over the condensation.

    Returns:
        (position of each component, components dequeued plus edges relaxed)
    """
    keep = heads != tails
    heads, tails = heads[keep], tails[keep]
    order = np.argsort(heads, kind='stable')
    heads, tails = heads[order], tails[order]
    starts = np.searchsorted(heads, np.arange(n_components + 1)).tolist()
    indegree = np.bincount(tails, minlength=n_components).tolist()
    tails = tails.tolist()

    position = np.empty(n_components, dtype=np.int64)
    queue = deque(c for c in range(n_components) if indegree[c] == 0)
    next_position = 0
    relaxed = 0
    while queue:
        component = queue.popleft()
        position[component] = next_position
        next_position += 1
        for edge in range(starts[component], starts[component + 1]):
            target = tails[edge]
            relaxed += 1
            indegree[target] -= 1
            if indegree[target] == 0:
                queue.append(target)
    return position, next_position + relaxed


# Slots of the scalar state vector shared by the DPLL kernels
_UNRESOLVED, _SHORTENED, _CONFLICT, _N_UNITS, _N_PURE, _TRAIL = range(6)
# Slots of the work vector
_DECISIONS, _PROPAGATIONS, _CONFLICTS = range(3)


@njit(cache=True)
def _assign(var, val, k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
            length_count, cand, units, pure, trail, st):
    """
    Set var and update clause counters.

    cand[l, u] counts unresolved clauses of current length l in which the
    unassigned variable u occurs; it drives the branching rule.
    """
    value[var] = val
    trail[st[_TRAIL]] = var
    st[_TRAIL] += 1
    true_lit = 2 * var + (1 - val)
    false_lit = true_lit ^ 1

    for p in range(occ_ptr[true_lit], occ_ptr[true_lit + 1]):
        c = occ_idx[p]
        tc = true_count[c]
        true_count[c] = tc + 1
        if tc == 0:
            st[_UNRESOLVED] -= 1
            fc = false_count[c]
            length = k - fc
            length_count[length] -= 1
            if fc > 0:
                st[_SHORTENED] -= 1
            for j in range(k):
                lit = lits[c, j]
                u = lit >> 1
                occ[lit] -= 1
                if occ[lit] == 0:
                    pure[st[_N_PURE]] = u
                    st[_N_PURE] += 1
                if u == var or value[u] == UNASSIGNED:
                    cand[length, u] -= 1

    for p in range(occ_ptr[false_lit], occ_ptr[false_lit + 1]):
        c = occ_idx[p]
        fc = false_count[c] + 1
        false_count[c] = fc
        if true_count[c] == 0:
            length_count[k - fc + 1] -= 1
            length_count[k - fc] += 1
            if fc == 1:
                st[_SHORTENED] += 1
            for j in range(k):
                u = lits[c, j] >> 1
                if u == var:
                    cand[k - fc + 1, u] -= 1
                elif value[u] == UNASSIGNED:
                    cand[k - fc + 1, u] -= 1
                    cand[k - fc, u] += 1
            if fc == k:
                st[_CONFLICT] = 1
            elif fc == k - 1:
                units[st[_N_UNITS]] = c
                st[_N_UNITS] += 1


@njit(cache=True)
def _unassign(var, k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
              length_count, cand, st):
    """Exact inverse of _assign for the most recent trail entry."""
    true_lit = 2 * var + (1 - value[var])
    false_lit = true_lit ^ 1

    for p in range(occ_ptr[false_lit], occ_ptr[false_lit + 1]):
        c = occ_idx[p]
        fc = false_count[c]
        false_count[c] = fc - 1
        if true_count[c] == 0:
            length_count[k - fc] -= 1
            length_count[k - fc + 1] += 1
            if fc == 1:
                st[_SHORTENED] -= 1
            for j in range(k):
                u = lits[c, j] >> 1
                if u == var:
                    cand[k - fc + 1, u] += 1
                elif value[u] == UNASSIGNED:
                    cand[k - fc, u] -= 1
                    cand[k - fc + 1, u] += 1

    for p in range(occ_ptr[true_lit], occ_ptr[true_lit + 1]):
        c = occ_idx[p]
        tc = true_count[c] - 1
        true_count[c] = tc
        if tc == 0:
            st[_UNRESOLVED] += 1
            fc = false_count[c]
            length_count[k - fc] += 1
            if fc > 0:
                st[_SHORTENED] += 1
            for j in range(k):
                lit = lits[c, j]
                u = lit >> 1
                occ[lit] += 1
                if u == var or value[u] == UNASSIGNED:
                    cand[k - fc, u] += 1

    value[var] = UNASSIGNED


@njit(cache=True)
def _propagate(k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
               length_count, cand, units, pure, trail, st, work):
    """Unit propagation, then pure-literal elimination. False on conflict."""
    while st[_N_UNITS] > 0:
        if st[_CONFLICT]:
            return False
        st[_N_UNITS] -= 1
        c = units[st[_N_UNITS]]
        if true_count[c] > 0 or false_count[c] != k - 1:
            continue
        for j in range(k):
            lit = lits[c, j]
            if value[lit >> 1] == UNASSIGNED:
                _assign(lit >> 1, 1 - (lit & 1), k, lits, occ_ptr, occ_idx, value, true_count,
                        false_count, occ, length_count, cand, units, pure, trail, st)
                work[_PROPAGATIONS] += 1
                break
    if st[_CONFLICT]:
        return False

    # Pure assignments only satisfy clauses, so they cannot create units
    while st[_N_PURE] > 0:
        st[_N_PURE] -= 1
        var = pure[st[_N_PURE]]
        if value[var] != UNASSIGNED:
            continue
        positive, negative = occ[2 * var], occ[2 * var + 1]
        if positive > 0 and negative == 0:
            val = 1
        elif negative > 0 and positive == 0:
            val = 0
        else:
            continue
        _assign(var, val, k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
                length_count, cand, units, pure, trail, st)
        work[_PROPAGATIONS] += 1
    return True


@njit(cache=True)
def _pick_branch(n, k, length_count, cand):
    """Lowest-index unassigned variable occurring in a shortest unresolved clause."""
    for length in range(1, k + 1):
        if length_count[length] > 0:
            for var in range(n):
                if cand[length, var] > 0:
                    return var
    return -1


@njit(cache=True)
def _dpll_kernel(n, k, lits, occ_ptr, occ_idx):
    m = lits.shape[0]
    value = np.full(n, UNASSIGNED, dtype=np.int64)
    true_count = np.zeros(m, dtype=np.int64)
    false_count = np.zeros(m, dtype=np.int64)
    occ = occ_ptr[1:] - occ_ptr[:-1]
    length_count = np.zeros(k + 1, dtype=np.int64)
    length_count[k] = m
    cand = np.zeros((k + 1, n), dtype=np.int64)
    for c in range(m):
        for j in range(k):
            cand[k, lits[c, j] >> 1] += 1

    st = np.zeros(6, dtype=np.int64)
    st[_UNRESOLVED] = m
    trail = np.empty(n, dtype=np.int64)
    # A clause turns unit at most once, a literal loses its last occurrence at
    # most once, between two clears of these stacks
    units = np.empty(m + 1, dtype=np.int64)
    if k == 1:
        for c in range(m):
            units[c] = c
        st[_N_UNITS] = m
    pure = np.empty(3 * n + 1, dtype=np.int64)
    for i in range(n):
        pure[i] = n - 1 - i
    st[_N_PURE] = n
    work = np.zeros(3, dtype=np.int64)

    if not _propagate(k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
                      length_count, cand, units, pure, trail, st, work):
        work[_CONFLICTS] += 1
        return False, value, work

    frame_mark = np.empty(n, dtype=np.int64)
    frame_var = np.empty(n, dtype=np.int64)
    frame_flipped = np.zeros(n, dtype=np.bool_)
    depth = 0
    while st[_UNRESOLVED] > 0:
        var = _pick_branch(n, k, length_count, cand)
        work[_DECISIONS] += 1
        frame_mark[depth] = st[_TRAIL]
        frame_var[depth] = var
        frame_flipped[depth] = False
        depth += 1
        _assign(var, 1, k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
                length_count, cand, units, pure, trail, st)
        ok = _propagate(k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
                        length_count, cand, units, pure, trail, st, work)
        while not ok:
            work[_CONFLICTS] += 1
            while depth > 0 and frame_flipped[depth - 1]:
                depth -= 1
            if depth == 0:
                return False, value, work
            mark = frame_mark[depth - 1]
            while st[_TRAIL] > mark:
                st[_TRAIL] -= 1
                _unassign(trail[st[_TRAIL]], k, lits, occ_ptr, occ_idx, value, true_count,
                          false_count, occ, length_count, cand, st)
            st[_N_UNITS] = 0
            st[_N_PURE] = 0
            st[_CONFLICT] = 0
            frame_flipped[depth - 1] = True
            _assign(frame_var[depth - 1], 0, k, lits, occ_ptr, occ_idx, value, true_count,
                    false_count, occ, length_count, cand, units, pure, trail, st)
            ok = _propagate(k, lits, occ_ptr, occ_idx, value, true_count, false_count, occ,
                            length_count, cand, units, pure, trail, st, work)
        if st[_SHORTENED] == 0:
            # Autarky: every touched clause is satisfied, so the residual
            # formula is satisfiable iff the input is. Commit to it.
            depth = 0
    return True, value, work


def _occurrence_index(codes: np.ndarray, n_literals: int) -> Tuple[np.ndarray, np.ndarray]:
    """CSR index of the clauses each literal code occurs in, clause order kept."""
    flat = codes.reshape(-1)
    clause_of = np.repeat(np.arange(codes.shape[0], dtype=np.int64), codes.shape[1])
    order = np.argsort(flat, kind='stable')
    ptr = np.zeros(n_literals + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(np.bincount(flat, minlength=n_literals))
    return ptr, clause_of[order]


def solve_dpll(formula: CnfFormula) -> SatResult:
    """
    Complete DPLL search.

    Unit propagation and pure-literal elimination run after every assignment.
    Branching picks the lowest-index unassigned variable occurring in a shortest
    unresolved clause and tries true first. When the partial assignment becomes
    an autarky the search commits to it, which keeps 2-SAT inputs polynomial.
    Unassigned variables in the witness are false.

    Literal code 2v + neg is true iff value[v] == 1 - neg. The search runs as a
    compiled kernel over a trail with per-clause true/false counters.
    """
    start = time.perf_counter()
    codes = np.ascontiguousarray(2 * formula.variables + formula.negated.astype(np.int64), dtype=np.int64)
    occ_ptr, occ_idx = _occurrence_index(codes, 2 * formula.n_vars)
    satisfiable, value, counters = _dpll_kernel(
        np.int64(formula.n_vars), np.int64(formula.k), codes, occ_ptr, occ_idx)
    decisions, propagations, conflicts = (int(x) for x in counters)
    work = WorkStats(
        decisions=decisions,
        propagations=propagations,
        conflicts=conflicts,
        wall_time=time.perf_counter() - start
    )
    get_logger().debug(
        f"DPLL N={formula.n_vars} M={formula.n_clauses}: {'SAT' if satisfiable else 'UNSAT'} "
        f"decisions={work.decisions} propagations={work.propagations}")
    witness = tuple(bool(v == 1) for v in value.tolist()) if satisfiable else None
    return SatResult(bool(satisfiable), witness, work)


def solve(formula: CnfFormula, method: str = 'auto') -> SatResult:
    """
    Dispatch to a solver.

    Args:
        formula: Input formula
        method: 'auto' (2-SAT components for k = 2, DPLL otherwise), '2sat' or 'dpll'
    """
    if method == 'auto':
        method = '2sat' if formula.k == 2 else 'dpll'
    if method == '2sat':
        return solve_2sat(formula)
    if method == 'dpll':
        return solve_dpll(formula)
    raise InvalidParameterError(f"unknown solver '{method}'")


def max_sat_bruteforce(formula: CnfFormula, limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> MaxSatResult:
    """
    Scan all 2^N assignments for the minimum violated-clause count.

    Returns:
        (lambda_min, degeneracy); lambda_min == 0 iff the formula is
        satisfiable, in which case degeneracy counts satisfying assignments
    """
    if formula.n_vars > limit:
        raise TooLargeError(formula.n_vars, limit)

    total = 1 << formula.n_vars
    chunk = 1 << SCAN_CHUNK_BITS
    best = formula.n_clauses + 1
    degeneracy = 0
    for first in range(0, total, chunk):
        configs = np.arange(first, min(first + chunk, total), dtype=np.int64)
        counts = violations_for_configs(formula, configs)
        low = int(counts.min())
        if low < best:
            best = low
            degeneracy = int(np.count_nonzero(counts == low))
        elif low == best:
            degeneracy += int(np.count_nonzero(counts == low))
    return MaxSatResult(best, degeneracy)
