import pytest

from core.logger import get_logger
from core.sat_core import CnfFormula, Literal, generate_instance


@pytest.fixture
def two_clause_formula():
    """(x1 or not x2 or x3) and (x1 or x4 or not x5), satisfied by x1 = 1."""
    return CnfFormula.from_dimacs_clauses(5, 3, [[1, -2, 3], [1, 4, -5]])


@pytest.fixture
def contradiction():
    """All four polarity patterns over x1, x2."""
    return CnfFormula.from_dimacs_clauses(2, 2, [[1, 2], [-1, 2], [1, -2], [-1, -2]])


@pytest.fixture
def single_clause():
    return CnfFormula(2, 2, ((Literal(1), Literal(2)),))


@pytest.fixture
def make_instance():
    def factory(n_vars, n_clauses, k=2, seed=0):
        return generate_instance(n_vars, n_clauses, k, seed)
    return factory


@pytest.fixture
def log_records():
    """Collect (level, message) pairs emitted through the package logger."""
    records = []
    get_logger().set_progress_handler(lambda level, message: records.append((level, message)))
    yield records
    get_logger().set_progress_handler(None)
