import itertools
import random

import pytest

from homfib.engine import (DiskCaseError, Exists, NotExists, ObstructionCertificate, ObstructionInapplicable,
                           ReductionError, Unknown, attainable_residues, decide, disk_case, find_obstruction,
                           modular_obstruction, obstruction_moduli, problem_from_decomposition, problem_from_diagram, reduced_fiber,
                           search, square_block_obstruction, stabilization_reduce)
from homfib.linalg import AbelianGroupData, IntMatrix
from homfib.linking import A, E0, E1, CapacityError, LinkingDecomposition
from homfib.problem import CandidateSolution, FiberType, evaluate, verify
from homfib.surgery import SurgeryDiagram, connected_sum, lens_diagram, unknot
from oracles import brute_attainable

G1 = FiberType(1, 0)


def dec(*terms, r=0):
    return LinkingDecomposition(r, tuple(terms))


def plain(p):
    return p.M0.rows(), p.W.rows(), p.fiber.g, p.fiber.n


def test_disk_case():
    assert disk_case(AbelianGroupData())
    assert not disk_case(AbelianGroupData(0, (2,)))
    with pytest.raises(DiskCaseError):
        problem_from_diagram(unknot(1), FiberType(0, 0))


# -- obstructions -------------------------------------------------------------

@pytest.mark.parametrize("d, f, q", [
    (dec(A(3, 1)), FiberType(0, 2), 4),
    (dec(A(3, 1)), FiberType(0, 2), 3),
    (dec(E0(1)), FiberType(0, 1), 8),
    (dec(E1(2)), FiberType(0, 1), 9),
    (dec(r=1), G1, 4),
])
def test_attainable_matches_brute_force(d, f, q):
    p = problem_from_decomposition(d, f)
    assert attainable_residues(p, q, fresh=True) == brute_attainable(*plain(p), q)


def test_e0_2_genus_one_mod_8():
    p = problem_from_decomposition(dec(E0(2)), G1)
    assert attainable_residues(p, 8) == {0, 4, 5}
    cert = modular_obstruction(p, 8)
    assert cert.kind == "full-modular" and cert.attainable == (0, 4, 5)
    assert cert.recheck(p)


def test_capacity():
    p = problem_from_decomposition(dec(E0(2)), G1)
    with pytest.raises(CapacityError):
        attainable_residues(p, 8, budget=1000)


def test_certificate_validation():
    with pytest.raises(ValueError):
        ObstructionCertificate("full-modular", 8, (0, 1))
    with pytest.raises(ValueError):
        ObstructionCertificate("guess", 8, (0,))
    with pytest.raises(ValueError):
        ObstructionCertificate("square-block", 8, (0,))
    assert ObstructionCertificate("full-modular", 8, (12, 0, 4)).attainable == (0, 4)


def test_tampered_certificate_fails_recheck():
    p = problem_from_decomposition(dec(E0(2)), G1)
    assert not ObstructionCertificate("full-modular", 8, (0, 4)).recheck(p)


@pytest.mark.parametrize("k", [3, 4])
def test_square_block_agrees_with_enumeration(k):
    p = problem_from_decomposition(dec(E1(k)), G1)
    sq = square_block_obstruction(p, 8)
    full = modular_obstruction(p, 8)
    assert sq is not None and full is not None
    assert set(full.attainable) <= set(sq.attainable)
    assert sq.attainable == (0, 3, 4, 5)


def test_square_block_applicability():
    with pytest.raises(ObstructionInapplicable):
        square_block_obstruction(problem_from_decomposition(dec(E1(3)), FiberType(2, 0)), 8)
    with pytest.raises(ObstructionInapplicable):
        square_block_obstruction(problem_from_decomposition(dec(E1(2)), G1), 8)
    # det W = 3 for E1: ±3·squares mod 8 = {0, 3, 4, 5}
    p = problem_from_decomposition(dec(E1(3), r=2), FiberType(2, 0))
    cert = square_block_obstruction(p, 8)
    assert cert.attainable == (0, 3, 4, 5) and cert.det_w == 3


def test_square_block_none_when_units_reachable():
    p = problem_from_decomposition(dec(E0(3)), G1)
    assert square_block_obstruction(p, 8) is None  # det W = 1


@pytest.mark.parametrize("d", [dec(E0(2)), dec(E1(3))])
def test_search_never_contradicts_certificate(d):
    p = problem_from_decomposition(d, G1)
    assert isinstance(decide(p), NotExists)
    for bound in range(7):
        assert isinstance(search(p, bound), Unknown)


def flip_first_fiber_index(c):
    X = [[-x if j == 0 else x for j, x in enumerate(r)] for r in c.X.rows()]
    Y = [[-y if (i == 0) != (j == 0) else y for j, y in enumerate(r)] for i, r in enumerate(c.Y.rows())]
    return CandidateSolution(IntMatrix.from_rows(X, ncols=c.X.ncols), IntMatrix.from_rows(Y, ncols=c.Y.ncols))


def test_congruence_invariance_and_non_closure():
    # on an index outside the E block, negating X's column (and Y's row/column) is a congruence
    rng = random.Random(11)
    q = problem_from_decomposition(dec(A(5, 2), E1(2)), FiberType(0, 2))
    for _ in range(200):
        c = CandidateSolution.from_vector([rng.randint(-3, 3) for _ in range(q.num_variables)], q.m, q.d)
        assert evaluate(q, flip_first_fiber_index(c)) == evaluate(q, c)
    # so attainable sets need not be closed under r -> q - r
    att = attainable_residues(problem_from_decomposition(dec(E0(2)), G1), 8)
    assert 5 in att and 3 not in att


def test_torsion_prime_moduli():
    p = problem_from_decomposition(dec(A(5, 2), A(7, 1), A(9, 2), r=1), G1)
    assert obstruction_moduli(p) == (8, 9, 5, 7)
    # S2xS1 # L(5,2): neither 2 nor -2 is a square mod 5, and mod 5 certifies genus one is impossible
    q = problem_from_decomposition(dec(A(5, 2), r=1), G1)
    cert = find_obstruction(q)
    assert cert.modulus == 5 and cert.attainable == (0, 2, 3) and cert.recheck(q)


# -- decide -----------------------------------------------------------------

def test_decide_exists_for_template():
    v = decide(problem_from_decomposition(dec(E0(3)), G1), entry_bound=4)
    assert isinstance(v, Exists) and v.recheck(problem_from_decomposition(dec(E0(3)), G1))


def test_decide_unknown_when_bound_small():
    p = problem_from_decomposition(dec(E0(3)), G1)
    v = decide(p, entry_bound=0)
    assert isinstance(v, Unknown) and v.entry_bound == 0 and not v.budget_exhausted


def test_find_obstruction_skips_over_budget():
    p = problem_from_decomposition(dec(E0(2)), G1)
    assert find_obstruction(p, budget=100) is None


def test_exists_recheck_rejects_wrong_det():
    p = problem_from_decomposition(dec(r=1), G1)
    c = CandidateSolution(IntMatrix.from_rows([[1, 1]]), IntMatrix.zeros(2))
    assert Exists(c, 1).recheck(p)
    assert not Exists(c, -1).recheck(p)


# -- reduction ----------------------------------------------------------------

def test_reduced_fiber():
    assert reduced_fiber(G1) == FiberType(0, 1)
    assert reduced_fiber(FiberType(0, 3)) == FiberType(0, 2)
    with pytest.raises(ReductionError):
        reduced_fiber(FiberType(2, 0))


def test_reduce_s2s1_to_s3():
    p = problem_from_diagram(unknot(0), G1)
    c = CandidateSolution(IntMatrix.from_rows([[1, 1]]), IntMatrix.zeros(2))
    red, out = stabilization_reduce(p, c)
    assert red.m == 0 and red.fiber == FiberType(0, 1) and red.provenance == "reduced"
    assert out.Y.rows() == [[-1]]
    assert verify(red, out)


def test_reduce_search_found_solution():
    p = problem_from_diagram(connected_sum(unknot(0), lens_diagram(3, 1)), G1)
    v = search(p, 3)
    assert isinstance(v, Exists)
    red, out = stabilization_reduce(p, v.solution)
    assert red.fiber == FiberType(0, 1) and red.M0.rows() == [[3]]
    assert verify(red, out)


def test_reduce_every_small_solution():
    # every solution in the box [-1, 1]^7 reduces
    base = problem_from_diagram(connected_sum(unknot(0), lens_diagram(5, 1)), FiberType(0, 2))
    found = 0
    for vec in itertools.product((-1, 0, 1), repeat=base.num_variables):
        c = CandidateSolution.from_vector(vec, base.m, base.d)
        if verify(base, c):
            red, out = stabilization_reduce(base, c)
            assert red.fiber == FiberType(0, 1) and verify(red, out)
            found += 1
    assert found > 5


def test_reduce_rejects_bad_inputs():
    p = problem_from_diagram(lens_diagram(3, 1), G1)
    with pytest.raises(ReductionError):
        stabilization_reduce(p, CandidateSolution(IntMatrix.from_rows([[1, 0]]), IntMatrix.zeros(2)))
    q = problem_from_diagram(unknot(0), G1)
    with pytest.raises(ReductionError):
        stabilization_reduce(q, CandidateSolution(IntMatrix.from_rows([[2, 0]]), IntMatrix.zeros(2)))
    linked = problem_from_diagram(SurgeryDiagram.from_data([(0, 1), (3, 1)], [[0, 1], [1, 0]]), G1)
    with pytest.raises(ReductionError):
        stabilization_reduce(linked, CandidateSolution(IntMatrix.zeros(2, 2), IntMatrix.zeros(2)))
