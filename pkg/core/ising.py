"""
Ising embedding for gibbssat.
Maps a CNF formula onto a penalty Hamiltonian whose diagonal equals the
violated-clause count, expanded into constant, field, pair and triple terms.

Spin convention: z_j = (-1)^bit_j, so logical 0 is z = +1. A literal x_j maps to
the projector P_j^0 and a negated literal to P_j^1, with
P_j^a = (1 + (-1)^a z_j) / 2. Each clause contributes the product of its
literal projectors, i.e. the projector onto its unique violating assignment.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from core.errors import InvalidParameterError, LengthMismatchError, OutputError, TooLargeError, WidthError
from core.sat_core import CnfFormula, violations_for_configs
from core.solver import DEFAULT_EXHAUSTIVE_LIMIT, SCAN_CHUNK_BITS


MAX_EMBED_WIDTH = 3

Pair = Tuple[int, int]
Triple = Tuple[int, int, int]


@dataclass(frozen=True, eq=True)
class IsingHamiltonian:
    """
    Diagonal k-body Ising Hamiltonian with exact dyadic coefficients.

    Spins are 0-indexed. Zero coefficients are not stored.
    """

    n_spins: int
    constant: Fraction = Fraction(0)
    fields: Tuple[Fraction, ...] = ()
    pair_couplings: Dict[Pair, Fraction] = field(default_factory=dict)
    triple_couplings: Dict[Triple, Fraction] = field(default_factory=dict)

    __hash__ = None

    def coefficients(self) -> Dict[tuple, Fraction]:
        """Every non-zero term keyed by its sorted spin tuple; () is the constant."""
        terms = {}
        if self.constant:
            terms[()] = self.constant
        for i, value in enumerate(self.fields):
            if value:
                terms[(i,)] = value
        terms.update(self.pair_couplings)
        terms.update(self.triple_couplings)
        return terms

    @property
    def denominator(self) -> int:
        """Least common denominator of all coefficients."""
        return lcm(1, *(value.denominator for value in self.coefficients().values()))

    def __add__(self, other: 'IsingHamiltonian') -> 'IsingHamiltonian':
        if other.n_spins != self.n_spins:
            raise ValueError("cannot add Hamiltonians over different spin counts")
        terms = self.coefficients()
        for key, value in other.coefficients().items():
            terms[key] = terms.get(key, Fraction(0)) + value
        return _from_terms(self.n_spins, terms)

    def to_json_dict(self) -> dict:
        """Document for annealer toolchains; every value is an exact 'p/q' string."""
        return {
            'n_spins': self.n_spins,
            'constant': _fraction_text(self.constant),
            'fields': [_fraction_text(value) for value in self.fields],
            'pair_couplings': [
                {'i': i, 'j': j, 'value': _fraction_text(value)}
                for (i, j), value in sorted(self.pair_couplings.items())
            ],
            'triple_couplings': [
                {'i': i, 'j': j, 'l': l, 'value': _fraction_text(value)}
                for (i, j, l), value in sorted(self.triple_couplings.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> 'IsingHamiltonian':
        n_spins = int(data['n_spins'])
        terms = {(): Fraction(data['constant'])}
        for i, value in enumerate(data.get('fields', [])):
            terms[(i,)] = Fraction(value)
        for entry in data.get('pair_couplings', []):
            terms[(int(entry['i']), int(entry['j']))] = Fraction(entry['value'])
        for entry in data.get('triple_couplings', []):
            terms[(int(entry['i']), int(entry['j']), int(entry['l']))] = Fraction(entry['value'])
        return _from_terms(n_spins, terms)


def _fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _from_terms(n_spins: int, terms: Dict[tuple, Fraction]) -> IsingHamiltonian:
    fields = [Fraction(0)] * n_spins
    pairs: Dict[Pair, Fraction] = {}
    triples: Dict[Triple, Fraction] = {}
    constant = Fraction(0)
    for key, value in terms.items():
        if not value and key:
            continue
        if len(key) == 0:
            constant = value
        elif len(key) == 1:
            fields[key[0]] = value
        elif len(key) == 2:
            pairs[key] = value
        elif len(key) == 3:
            triples[key] = value
        else:
            raise WidthError(f"{len(key)}-body term is not representable")
    return IsingHamiltonian(n_spins, constant, tuple(fields), pairs, triples)


def embed(formula: CnfFormula) -> IsingHamiltonian:
    """
    Build the penalty Hamiltonian of a formula.

    Clause with literal signs s_j (+1 plain, -1 negated) expands to
    2^-k * sum over subsets S of prod_{j in S} s_j z_j; clauses add with
    multiplicity.
    """
    if formula.k > MAX_EMBED_WIDTH:
        raise WidthError(f"embedding supports k <= {MAX_EMBED_WIDTH}, got k = {formula.k}")

    scale = Fraction(1, 2 ** formula.k)
    terms: Dict[tuple, Fraction] = {}
    for clause in formula.clauses:
        spins = [(lit.variable - 1, -1 if lit.negated else 1) for lit in clause]
        spins.sort()
        for size in range(len(spins) + 1):
            for subset in combinations(spins, size):
                sign = 1
                for _, s in subset:
                    sign *= s
                key = tuple(spin for spin, _ in subset)
                terms[key] = terms.get(key, Fraction(0)) + sign * scale
    return _from_terms(formula.n_vars, terms)


def energy(hamiltonian: IsingHamiltonian, assignment: Union[Sequence[bool], np.ndarray]) -> Fraction:
    """Exact energy of one configuration (bit j sets z_j = (-1)^bit_j)."""
    bits = np.asarray(assignment, dtype=bool).reshape(-1)
    if bits.shape[0] != hamiltonian.n_spins:
        raise LengthMismatchError(hamiltonian.n_spins, bits.shape[0])
    z = [1 - 2 * int(b) for b in bits]

    total = hamiltonian.constant
    for i, value in enumerate(hamiltonian.fields):
        total += value * z[i]
    for (i, j), value in hamiltonian.pair_couplings.items():
        total += value * z[i] * z[j]
    for (i, j, l), value in hamiltonian.triple_couplings.items():
        total += value * z[i] * z[j] * z[l]
    return total


def scaled_energies(hamiltonian: IsingHamiltonian, configs: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Energies of many configuration indices as exact integers.

    Returns:
        (numerators, denominator) with energy = numerators / denominator
    """
    configs = np.asarray(configs, dtype=np.int64)
    denominator = hamiltonian.denominator
    z = 1 - 2 * ((configs[:, None] >> np.arange(hamiltonian.n_spins, dtype=np.int64)) & 1)
    totals = np.zeros(configs.shape[0], dtype=np.int64)
    for key, value in hamiltonian.coefficients().items():
        weight = int(value * denominator)
        if not key:
            totals += weight
            continue
        product = np.ones(configs.shape[0], dtype=np.int64)
        for spin in key:
            product *= z[:, spin]
        totals += weight * product
    return totals, denominator


def verify_embedding(formula: CnfFormula, hamiltonian: IsingHamiltonian,
                     limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> bool:
    """True iff energy equals the violated-clause count on all 2^N configurations."""
    if formula.n_vars > limit:
        raise TooLargeError(formula.n_vars, limit)
    if hamiltonian.n_spins != formula.n_vars:
        return False

    total = 1 << formula.n_vars
    chunk = 1 << SCAN_CHUNK_BITS
    for first in range(0, total, chunk):
        configs = np.arange(first, min(first + chunk, total), dtype=np.int64)
        numerators, denominator = scaled_energies(hamiltonian, configs)
        if not np.array_equal(numerators, violations_for_configs(formula, configs) * denominator):
            return False
    return True


def save_hamiltonian(hamiltonian: IsingHamiltonian, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(json.dumps(hamiltonian.to_json_dict(), indent=2) + '\n', encoding='utf-8')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def load_hamiltonian(path: Union[str, Path]) -> IsingHamiltonian:
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise OutputError(path, str(e))
    try:
        return IsingHamiltonian.from_json_dict(data)
    except (IndexError, KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidParameterError(f"{path}: not an Ising Hamiltonian ({e})")
