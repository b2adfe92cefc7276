"""
CNF data model for gibbssat.
Handles random k-SAT generation, assignment evaluation and DIMACS interchange.

Variables are 1-indexed in the public types (DIMACS convention) and 0-indexed
in every array view. An assignment doubles as a spin configuration: bit j of a
configuration index is the value of variable j + 1.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import (
    DimacsError, InvalidParameterError, LengthMismatchError,
    LiteralOutOfRangeError, MalformedHeaderError, WrongClauseWidthError
)
from core.logger import get_logger


class Literal(NamedTuple):
    """A possibly negated Boolean variable."""

    variable: int
    negated: bool = False

    def to_dimacs(self) -> int:
        return -self.variable if self.negated else self.variable

    @classmethod
    def from_dimacs(cls, value: int) -> 'Literal':
        return cls(abs(value), value < 0)


Clause = Tuple[Literal, ...]
Assignment = Tuple[bool, ...]


@dataclass(frozen=True)
class CnfFormula:
    """A uniform-width CNF instance. Clause density is derived, never stored."""

    n_vars: int
    k: int
    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.n_vars < 1:
            raise InvalidParameterError(f"n_vars must be positive, got {self.n_vars}")
        if self.k < 1:
            raise InvalidParameterError(f"clause width must be positive, got {self.k}")
        object.__setattr__(self, 'clauses', tuple(
            tuple(Literal(int(lit[0]), bool(lit[1])) for lit in clause) for clause in self.clauses))
        for index, clause in enumerate(self.clauses):
            if len(clause) != self.k:
                raise InvalidParameterError(
                    f"clause {index} has width {len(clause)}, formula width is {self.k}")
            seen = set()
            for literal in clause:
                if not 1 <= literal.variable <= self.n_vars:
                    raise InvalidParameterError(
                        f"clause {index} references x{literal.variable} outside 1..{self.n_vars}")
                if literal.variable in seen:
                    raise InvalidParameterError(
                        f"clause {index} repeats variable x{literal.variable}")
                seen.add(literal.variable)

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    @property
    def clause_density(self) -> float:
        return self.n_clauses / self.n_vars

    @cached_property
    def variables(self) -> np.ndarray:
        """(M, k) array of 0-indexed variables."""
        if not self.clauses:
            return np.zeros((0, self.k), dtype=np.int64)
        return np.array([[lit.variable - 1 for lit in c] for c in self.clauses], dtype=np.int64)

    @cached_property
    def negated(self) -> np.ndarray:
        """(M, k) boolean array of literal polarities."""
        if not self.clauses:
            return np.zeros((0, self.k), dtype=bool)
        return np.array([[lit.negated for lit in c] for c in self.clauses], dtype=bool)

    @cached_property
    def clause_masks(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Bitmask form of the clauses.

        A configuration index s violates clause c iff (s & masks[c]) == patterns[c]:
        the mask selects the clause's variables, the pattern holds the unique
        violating bit values (1 where the literal is negated).
        """
        weights = np.left_shift(np.int64(1), self.variables)
        masks = weights.sum(axis=1, dtype=np.int64)
        patterns = np.where(self.negated, weights, 0).sum(axis=1, dtype=np.int64)
        return masks, patterns

    def conjoin(self, other: 'CnfFormula') -> 'CnfFormula':
        """Concatenate the clause lists of two formulas over the same variables."""
        if other.n_vars != self.n_vars or other.k != self.k:
            raise InvalidParameterError("can only conjoin formulas with equal n_vars and k")
        return CnfFormula(self.n_vars, self.k, self.clauses + other.clauses)

    def to_dimacs_clauses(self) -> list:
        return [[lit.to_dimacs() for lit in clause] for clause in self.clauses]

    @classmethod
    def from_dimacs_clauses(cls, n_vars: int, k: int, clauses: Iterable[Sequence[int]]) -> 'CnfFormula':
        return cls(n_vars, k, tuple(tuple(Literal.from_dimacs(v) for v in c) for c in clauses))

    @classmethod
    def from_arrays(cls, n_vars: int, k: int, variables: np.ndarray, negated: np.ndarray) -> 'CnfFormula':
        clauses = tuple(
            tuple(Literal(int(v) + 1, bool(n)) for v, n in zip(row_v, row_n))
            for row_v, row_n in zip(variables.tolist(), negated.tolist())
        )
        return cls(n_vars, k, clauses)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for one instance."""
    if seed < 0:
        raise InvalidParameterError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for an ensemble member, independent of execution order."""
    sequence = np.random.SeedSequence([int(master_seed)] + [int(i) for i in indices])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def generate_instance(n_vars: int, n_clauses: int, k: int, seed: int) -> CnfFormula:
    """
    Draw a random k-SAT formula.

    Each clause takes k distinct variables uniformly without replacement and
    negates each independently with probability 1/2. Clauses are independent,
    so duplicates across the formula are allowed.

    Args:
        n_vars: Number of variables N (must exceed k)
        n_clauses: Number of clauses M
        k: Clause width (at least 2)
        seed: Non-negative 64-bit seed

    Returns:
        CnfFormula with exactly n_clauses clauses
    """
    if k < 2:
        raise InvalidParameterError(f"clause width must be at least 2, got {k}")
    if n_vars <= k:
        raise InvalidParameterError(f"need n_vars > k, got n_vars={n_vars}, k={k}")
    if n_clauses < 0:
        raise InvalidParameterError(f"n_clauses must be non-negative, got {n_clauses}")

    rng = make_rng(seed)
    variables = rng.integers(0, n_vars, size=(n_clauses, k), dtype=np.int64)
    # Rejection keeps each row uniform over ordered k-tuples of distinct variables
    while n_clauses:
        ordered = np.sort(variables, axis=1)
        repeated = np.any(ordered[:, 1:] == ordered[:, :-1], axis=1)
        n_bad = int(repeated.sum())
        if n_bad == 0:
            break
        variables[repeated] = rng.integers(0, n_vars, size=(n_bad, k), dtype=np.int64)
    negated = rng.integers(0, 2, size=(n_clauses, k)).astype(bool)

    get_logger().debug(f"Generated {k}-SAT instance N={n_vars} M={n_clauses} seed={seed}")
    return CnfFormula.from_arrays(n_vars, k, variables, negated)


def _as_bits(formula: CnfFormula, assignment: Union[Sequence[bool], np.ndarray]) -> np.ndarray:
    bits = np.asarray(assignment, dtype=bool).reshape(-1)
    if bits.shape[0] != formula.n_vars:
        raise LengthMismatchError(formula.n_vars, bits.shape[0])
    return bits


def evaluate(formula: CnfFormula, assignment: Union[Sequence[bool], np.ndarray]) -> int:
    """
    Count violated clauses, with multiplicity.

    Returns:
        0 iff the assignment satisfies the formula
    """
    bits = _as_bits(formula, assignment)
    if formula.n_clauses == 0:
        return 0
    literal_true = bits[formula.variables] ^ formula.negated
    return int(np.count_nonzero(~literal_true.any(axis=1)))


def violations_for_configs(formula: CnfFormula, configs: np.ndarray) -> np.ndarray:
    """Violated-clause counts for a batch of configuration indices."""
    configs = np.asarray(configs, dtype=np.int64)
    counts = np.zeros(configs.shape, dtype=np.int64)
    masks, patterns = formula.clause_masks
    for mask, pattern in zip(masks.tolist(), patterns.tolist()):
        counts += (configs & mask) == pattern
    return counts


def assignment_from_index(index: int, n_vars: int) -> Assignment:
    return tuple(bool((index >> j) & 1) for j in range(n_vars))


def assignment_to_index(assignment: Sequence[bool]) -> int:
    return sum(1 << j for j, bit in enumerate(assignment) if bit)


_HEADER = re.compile(r'^p\s+cnf\s+(\d+)\s+(\d+)\s*$')
_WIDTH_COMMENT = re.compile(r'^c\s+width\s+(\d+)\s*$')


def parse_dimacs(text: Union[bytes, str], k: Optional[int] = None) -> CnfFormula:
    """
    Parse DIMACS CNF.

    Args:
        text: DIMACS document
        k: When given, every clause must have exactly this width (strict mode).
           Otherwise all clauses must share the width of the first one.

    Returns:
        Parsed CnfFormula
    """
    if isinstance(text, bytes):
        try:
            text = text.decode('utf-8')
        except UnicodeDecodeError as e:
            raise DimacsError(f"not UTF-8 text: {e}")

    header = None
    declared_width = None
    clauses = []
    pending = []
    pending_line = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('c'):
            match = _WIDTH_COMMENT.match(line)
            if match:
                declared_width = int(match.group(1))
            continue
        if line.startswith('%'):
            break
        if line.startswith('p'):
            if header is not None:
                raise MalformedHeaderError("second header line", line_number)
            match = _HEADER.match(line)
            if match is None:
                raise MalformedHeaderError(f"expected 'p cnf <vars> <clauses>', got '{line}'", line_number)
            header = (int(match.group(1)), int(match.group(2)))
            if header[0] < 1:
                raise MalformedHeaderError("variable count must be positive", line_number)
            continue
        if header is None:
            raise MalformedHeaderError("clause before header", line_number)

        try:
            values = [int(token) for token in line.split()]
        except ValueError:
            raise DimacsError("non-integer field", line_number)
        for value in values:
            if not pending:
                pending_line = line_number
            if value == 0:
                clauses.append((pending_line, pending))
                pending = []
                continue
            if abs(value) > header[0]:
                raise LiteralOutOfRangeError(
                    f"literal {value} outside 1..{header[0]}", line_number)
            pending.append(value)

    if header is None:
        raise MalformedHeaderError("missing 'p cnf' header")
    if pending:
        raise DimacsError("last clause is not terminated by 0", pending_line)
    n_vars, n_clauses = header
    if len(clauses) != n_clauses:
        raise MalformedHeaderError(f"header declares {n_clauses} clauses, found {len(clauses)}")

    width = k
    if width is None:
        width = len(clauses[0][1]) if clauses else (declared_width or 2)
    for line_number, values in clauses:
        if len(values) != width:
            raise WrongClauseWidthError(
                f"clause has width {len(values)}, expected {width}", line_number)
        if len({abs(v) for v in values}) != len(values):
            raise DimacsError("repeated variable in clause", line_number)

    return CnfFormula.from_dimacs_clauses(n_vars, width, (values for _, values in clauses))


def write_dimacs(formula: CnfFormula) -> bytes:
    """Serialize a formula as DIMACS CNF; the width comment keeps k for empty formulas."""
    lines = [f"c width {formula.k}", f"p cnf {formula.n_vars} {formula.n_clauses}"]
    for clause in formula.to_dimacs_clauses():
        lines.append(' '.join(str(v) for v in clause) + ' 0')
    return ('\n'.join(lines) + '\n').encode('ascii')
