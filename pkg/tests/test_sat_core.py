import numpy as np
import pytest

from core.errors import (
    DimacsError, InvalidParameterError, LengthMismatchError,
    LiteralOutOfRangeError, MalformedHeaderError, WrongClauseWidthError
)
from core.sat_core import (
    CnfFormula, Literal, assignment_from_index, assignment_to_index, derive_seed,
    evaluate, generate_instance, parse_dimacs, violations_for_configs, write_dimacs
)


def test_generate_empty_formula():
    formula = generate_instance(5, 0, 3, seed=11)
    assert formula.n_vars == 5
    assert formula.n_clauses == 0
    assert formula.clause_density == 0


def test_generate_density_and_distinct_variables():
    formula = generate_instance(1000, 1000, 2, seed=123)
    assert formula.clause_density == 1.0
    for clause in formula.clauses:
        assert len(clause) == 2
        assert clause[0].variable != clause[1].variable
        assert all(1 <= lit.variable <= 1000 for lit in clause)


def test_generate_is_reproducible():
    first = generate_instance(40, 120, 3, seed=99)
    second = generate_instance(40, 120, 3, seed=99)
    other = generate_instance(40, 120, 3, seed=100)
    assert first == second
    assert first != other


def test_generate_polarity_is_balanced():
    formula = generate_instance(200, 5000, 3, seed=5)
    share = formula.negated.mean()
    assert 0.47 < share < 0.53


def test_generate_2sat_polarity_patterns_are_uniform():
    formula = generate_instance(100, 10000, 2, seed=13)
    patterns = formula.negated.astype(np.int64) @ np.array([2, 1])
    shares = np.bincount(patterns, minlength=4) / formula.n_clauses
    assert np.all(np.abs(shares - 0.25) <= 0.02)


@pytest.mark.parametrize('n_vars, n_clauses, k', [(3, 5, 3), (10, -1, 2), (10, 5, 1)])
def test_generate_rejects_bad_parameters(n_vars, n_clauses, k):
    with pytest.raises(InvalidParameterError):
        generate_instance(n_vars, n_clauses, k, seed=0)


def test_derive_seed_depends_on_every_index():
    base = derive_seed(7, 16, 0, 0)
    assert base == derive_seed(7, 16, 0, 0)
    assert len({base, derive_seed(8, 16, 0, 0), derive_seed(7, 17, 0, 0),
                derive_seed(7, 16, 1, 0), derive_seed(7, 16, 0, 1)}) == 5
    assert 0 <= base < 2 ** 64


def test_formula_rejects_repeated_variable():
    with pytest.raises(InvalidParameterError):
        CnfFormula.from_dimacs_clauses(3, 2, [[1, -1]])


def test_formula_rejects_out_of_range_literal():
    with pytest.raises(InvalidParameterError):
        CnfFormula.from_dimacs_clauses(3, 2, [[1, 4]])


def test_evaluate_satisfying_assignment(two_clause_formula):
    assert evaluate(two_clause_formula, (1, 1, 0, 0, 0)) == 0


def test_evaluate_single_clause(single_clause):
    assert evaluate(single_clause, (0, 0)) == 1
    assert evaluate(single_clause, (1, 0)) == 0


def test_evaluate_counts_duplicate_clauses():
    formula = CnfFormula.from_dimacs_clauses(3, 2, [[1, 2], [1, 2], [2, 3]])
    assert evaluate(formula, (0, 0, 0)) == 3
    assert evaluate(formula, (0, 0, 1)) == 2


def test_evaluate_length_mismatch(two_clause_formula):
    with pytest.raises(LengthMismatchError):
        evaluate(two_clause_formula, (1, 0, 1))


def test_violations_for_configs_matches_evaluate(make_instance):
    formula = make_instance(8, 30, k=3, seed=4)
    configs = np.arange(1 << 8)
    counts = violations_for_configs(formula, configs)
    for index in range(1 << 8):
        assert counts[index] == evaluate(formula, assignment_from_index(index, 8))


def test_assignment_index_convention():
    assert assignment_from_index(0b101, 3) == (True, False, True)
    assert assignment_to_index((True, False, True)) == 5


def test_parse_two_clause_formula(two_clause_formula):
    parsed = parse_dimacs(b"p cnf 5 2\n1 -2 3 0\n1 4 -5 0\n")
    assert parsed == two_clause_formula
    assert parsed.clauses[0] == (Literal(1), Literal(2, True), Literal(3))


def test_parse_empty_formula():
    parsed = parse_dimacs(b"p cnf 3 0\n")
    assert parsed.n_vars == 3
    assert parsed.n_clauses == 0


def test_parse_comments_and_split_clauses():
    text = "c generated\np cnf 4 2\n1 -2\n 0 3\n4 0\n%\n0\n"
    parsed = parse_dimacs(text)
    assert parsed.to_dimacs_clauses() == [[1, -2], [3, 4]]


def test_write_then_parse_keeps_width_of_empty_formula():
    empty = CnfFormula(6, 3)
    assert parse_dimacs(write_dimacs(empty)) == empty


def test_write_dimacs_layout(two_clause_formula):
    assert write_dimacs(two_clause_formula) == b"c width 3\np cnf 5 2\n1 -2 3 0\n1 4 -5 0\n"


def test_parse_literal_out_of_range_reports_line():
    with pytest.raises(LiteralOutOfRangeError) as info:
        parse_dimacs(b"p cnf 2 1\n1 3 0\n")
    assert info.value.line == 2
    assert "Line 2" in str(info.value)


@pytest.mark.parametrize('text', [
    b"1 2 0\n",
    b"p cnf x 1\n1 2 0\n",
    b"p cnf 2 2\n1 2 0\n",
])
def test_parse_malformed_header(text):
    with pytest.raises(MalformedHeaderError):
        parse_dimacs(text)


def test_parse_wrong_width():
    with pytest.raises(WrongClauseWidthError):
        parse_dimacs(b"p cnf 3 2\n1 2 0\n1 2 3 0\n")
    with pytest.raises(WrongClauseWidthError):
        parse_dimacs(b"p cnf 3 1\n1 2 0\n", k=3)


def test_parse_rejects_unterminated_and_garbage():
    with pytest.raises(DimacsError):
        parse_dimacs(b"p cnf 3 1\n1 2\n")
    with pytest.raises(DimacsError):
        parse_dimacs(b"p cnf 3 1\n1 two 0\n")
    with pytest.raises(DimacsError):
        parse_dimacs(b"p cnf 3 1\n1 -1 0\n")


def test_clause_masks_mark_violating_pattern(single_clause):
    masks, patterns = single_clause.clause_masks
    assert masks.tolist() == [0b11]
    assert patterns.tolist() == [0]
    negated = CnfFormula.from_dimacs_clauses(3, 2, [[-1, 3]])
    masks, patterns = negated.clause_masks
    assert masks.tolist() == [0b101]
    assert patterns.tolist() == [0b001]
