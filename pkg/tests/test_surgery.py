import random
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homfib.engine import problem_from_decomposition, problem_from_diagram
from homfib.linalg import AbelianGroupData, IntMatrix
from homfib.linking import E0, LinkingDecomposition, homology_of, theorem_matrices
from homfib.problem import CandidateSolution, FiberType, evaluate, verify
from homfib.surgery import (DiagramValidationError, SurgeryComponent, SurgeryDiagram, connected_sum,
                            first_homology, lens_diagram, orientation_flip, phi_psi, representative_diagram,
                            transport_solution, unknot)
from pools import POOL, fibers, random_diagram, verified_instances


def test_component_validation():
    with pytest.raises(DiagramValidationError):
        SurgeryComponent(1, 0)
    with pytest.raises(DiagramValidationError):
        SurgeryComponent(4, 2)
    SurgeryComponent(0, 1)


def test_diagram_validation():
    with pytest.raises(DiagramValidationError):
        SurgeryDiagram.from_data([(1, 1), (1, 1)], [[0, 1], [2, 0]])
    with pytest.raises(DiagramValidationError):
        SurgeryDiagram.from_data([(1, 1)], [[1]])


def test_phi_psi_example():
    d = SurgeryDiagram.from_data([(2, 3), (5, -1)], [[0, 4], [4, 0]])
    phi, psi = phi_psi(d)
    assert phi.rows() == [[2, 12], [-4, 5]]
    assert psi.rows() == [[3, 0], [0, -1]]


def test_lens_homology():
    assert first_homology(lens_diagram(5, 2)) == AbelianGroupData(0, (5,))
    assert first_homology(unknot(0)) == AbelianGroupData(1)
    assert first_homology(unknot(1)).is_trivial


def test_orientation_flip():
    d = SurgeryDiagram.from_data([(1, 1), (2, 1)], [[0, 3], [3, 0]])
    f = orientation_flip(d, 1)
    assert f.lk == ((0, -3), (-3, 0))
    assert orientation_flip(f, 1) == d
    with pytest.raises(IndexError):
        orientation_flip(d, 2)


def test_connected_sum_homology():
    d1, d2 = lens_diagram(4, 1), representative_diagram(LinkingDecomposition(1, (E0(1),)))
    assert first_homology(connected_sum(d1, d2)) == first_homology(d1) + first_homology(d2)


@pytest.mark.parametrize("d", POOL, ids=str)
def test_representative_blocks_equal_theorem_blocks(d):
    assert phi_psi(representative_diagram(d)) == theorem_matrices(d)
    assert first_homology(representative_diagram(d)) == homology_of(d)


@pytest.mark.parametrize("d", [x for x in POOL if x.free_rank + len(x.terms)], ids=str)
def test_theorem_surgery_coherence(d):
    rng = random.Random(zlib.crc32(str(d).encode()))
    for f in fibers():
        pt = problem_from_decomposition(d, f)
        ps = problem_from_diagram(representative_diagram(d), f)
        # the representative keeps the block order, so the matching permutation is the identity
        perm = list(range(pt.m))
        assert [pt.M0.rows()[i] for i in perm] == ps.M0.rows()
        for _ in range(25):
            c = CandidateSolution.from_vector([rng.randint(-2, 2) for _ in range(pt.num_variables)], pt.m, pt.d)
            cs = CandidateSolution(IntMatrix.from_rows([c.X.rows()[i] for i in perm], ncols=pt.d), c.Y)
            assert verify(pt, c) == verify(ps, cs)
            assert evaluate(pt, c) == evaluate(ps, cs)


def test_transport_preserves_det_on_verified_instances():
    instances = verified_instances(100)
    assert len(instances) == 100
    for d, sol in instances:
        f = FiberType(1, 0)
        before = evaluate(problem_from_diagram(d, f), sol)
        assert abs(before) == 1
        for i in range(d.size):
            after = evaluate(problem_from_diagram(orientation_flip(d, i), f), transport_solution(sol, i))
            assert after == before


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 3), st.sampled_from(fibers(3)))
def test_transport_preserves_det_on_random_candidates(seed, m, f):
    rng = random.Random(seed)
    d = random_diagram(rng, m)
    p = problem_from_diagram(d, f)
    c = CandidateSolution.from_vector([rng.randint(-3, 3) for _ in range(p.num_variables)], p.m, p.d)
    i = rng.randrange(m)
    assert evaluate(problem_from_diagram(orientation_flip(d, i), f), transport_solution(c, i)) == evaluate(p, c)
    assert first_homology(orientation_flip(d, i)) == first_homology(d)
    assert transport_solution(transport_solution(c, i), i) == c


def test_transport_zero_row_unchanged():
    c = CandidateSolution(IntMatrix.from_rows([[0, 0], [1, 2]]), IntMatrix.zeros(2))
    assert transport_solution(c, 0) == c
