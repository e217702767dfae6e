import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homfib.engine import DiskCaseError, problem_from_decomposition
from homfib.linalg import DimensionError, IntMatrix
from homfib.linking import A, E0, LinkingDecomposition
from homfib.problem import (BlockProblem, CandidateSolution, FiberType, ProblemValidationError, assemble,
                            e_matrix, evaluate, verify)
from oracles import block_matrix, cofactor_det, unpack


def e0_problem(k):
    return problem_from_decomposition(LinkingDecomposition(0, (E0(k),)), FiberType(1, 0))


def sol7(x, y, z, w, a, b, c):
    return CandidateSolution.from_vector([x, y, z, w, a, b, c], 2, 2)


def test_fiber_type():
    f = FiberType(2, 1)
    assert f.d == 5 and not f.is_disk and FiberType(0, 0).is_disk
    assert str(f) == "Σ_{2,2}"
    with pytest.raises(ProblemValidationError):
        FiberType(-1, 0)


def test_e_matrix():
    assert e_matrix(FiberType(2, 1)).rows() == [[0, 1, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 1, 0],
                                               [0, 0, 0, 0, 0], [0, 0, 0, 0, 0]]


def test_problem_validation():
    with pytest.raises(ProblemValidationError):
        BlockProblem(IntMatrix.identity(2), IntMatrix.zeros(2), FiberType(1, 0))
    with pytest.raises(ProblemValidationError):
        BlockProblem(IntMatrix.identity(2), IntMatrix.identity(3), FiberType(1, 0))
    with pytest.raises(ProblemValidationError):
        BlockProblem(IntMatrix.identity(1), IntMatrix.identity(1), FiberType(1, 0), "folklore")


def test_disk_fiber_rejected_by_builders():
    with pytest.raises(DiskCaseError):
        problem_from_decomposition(LinkingDecomposition(1), FiberType(0, 0))


def test_candidate_validation():
    with pytest.raises(ProblemValidationError):
        CandidateSolution(IntMatrix.identity(1), IntMatrix.from_rows([[0, 1], [2, 0]]))
    with pytest.raises(DimensionError):
        CandidateSolution.from_vector([1, 2, 3], 2, 2)
    p = e0_problem(1)
    with pytest.raises(DimensionError):
        evaluate(p, CandidateSolution(IntMatrix.identity(2), IntMatrix.zeros(3)))


def test_e0_1_solution():
    p = e0_problem(1)
    assert evaluate(p, sol7(3, 1, 0, 1, -1, 0, 0)) == -1


@pytest.mark.parametrize("k", range(3, 9))
def test_e0_template(k):
    c = sol7(2**(k - 1), 1, 1, 1, 2**(k - 3) + 1, 0, 0)
    assert evaluate(e0_problem(k), c) == 1


def test_lens_example():
    # L(3,1) at fiber (0,1): det [[3, -1], [1, 0]] = 1
    p = problem_from_decomposition(LinkingDecomposition(0, (A(3, 1),)), FiberType(0, 1))
    assert evaluate(p, CandidateSolution(IntMatrix.from_rows([[1]]), IntMatrix.from_rows([[0]]))) == 1
    # S2xS1 at genus one: X = (1, 1), Y = 0
    p = problem_from_decomposition(LinkingDecomposition(1), FiberType(1, 0))
    c = CandidateSolution(IntMatrix.from_rows([[1, 1]]), IntMatrix.zeros(2))
    assert evaluate(p, c) == 1 and verify(p, c)


def test_empty_block_problem():
    p = BlockProblem(IntMatrix.zeros(0), IntMatrix.zeros(0), FiberType(1, 0))
    c = CandidateSolution(IntMatrix.zeros(0, 2), IntMatrix.identity(2))
    assert evaluate(p, c) == 1


def test_canonical_string_and_fingerprint():
    p = e0_problem(1)
    assert p.canonical_string() == "2x2:0,2,2,0|2x2:1,0,0,1|g=1|n=0"
    assert p.fingerprint() == e0_problem(1).fingerprint() != e0_problem(2).fingerprint()
    assert len(p.fingerprint()) == 64


def test_vector_round_trip():
    c = sol7(1, 2, 3, 4, 5, 6, 7)
    assert c.Y.rows() == [[5, 6], [6, 7]]
    assert c.to_vector() == (1, 2, 3, 4, 5, 6, 7)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2), st.integers(0, 2), st.integers(0, 3))
def test_assemble_matches_oracle(seed, g, n, m):
    rng = random.Random(seed)
    f = FiberType(g, n)
    M0 = [[rng.randint(-4, 4) for _ in range(m)] for _ in range(m)]
    M0 = [[M0[i][j] if i <= j else M0[j][i] for j in range(m)] for i in range(m)]
    W = [[int(i == j) * rng.choice([-3, -1, 1, 2]) + (rng.randint(-1, 1) if j > i else 0) for j in range(m)]
         for i in range(m)]
    p = BlockProblem(IntMatrix.from_rows(M0, ncols=m), IntMatrix.from_rows(W, ncols=m), f)
    vec = [rng.randint(-3, 3) for _ in range(p.num_variables)]
    c = CandidateSolution.from_vector(vec, m, f.d)
    X, Y = unpack(vec, m, f.d)
    ref = block_matrix(M0, W, X, Y, g)
    assert assemble(p, c).rows() == ref
    assert evaluate(p, c) == cofactor_det(ref)
