"""Deciding one fiber type
=======================

Bounded search for a unimodular completion, or a modular certificate that none exists.
"""

from homfib.engine import decide, modular_obstruction, problem_from_decomposition, square_block_obstruction
from homfib.linking import E0, E1, LinkingDecomposition
from homfib.problem import FiberType

g1 = FiberType(1, 0)

# %% E0(3) has a genus-one solution; E0(2) is obstructed mod 8
for k in (2, 3):
    print(f"E0({k}):", decide(problem_from_decomposition(LinkingDecomposition(0, (E0(k),)), g1), entry_bound=4))

# %% attainable determinant residues mod 8
p = problem_from_decomposition(LinkingDecomposition(0, (E1(3),)), g1)
print("enumeration:", modular_obstruction(p, 8).attainable)
print("square-block rule:", square_block_obstruction(p, 8).attainable)
