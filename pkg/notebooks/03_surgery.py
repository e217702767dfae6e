"""Surgery diagrams
================

Rational surgery diagrams, their homology, orientation flips and solution transport.
"""

from homfib.engine import problem_from_diagram, search
from homfib.problem import FiberType, evaluate
from homfib.surgery import connected_sum, first_homology, lens_diagram, orientation_flip, phi_psi, \
    transport_solution, unknot

d = connected_sum(lens_diagram(5, 2), unknot(0))
print("H1:", first_homology(d))
print("phi, psi:", phi_psi(d))

# %% a solution survives reversing a component's orientation
p = problem_from_diagram(lens_diagram(7, 3), FiberType(1, 0))
sol = search(p, 4).solution
flipped = problem_from_diagram(orientation_flip(lens_diagram(7, 3), 0), FiberType(1, 0))
print("det before/after flip:", evaluate(p, sol), evaluate(flipped, transport_solution(sol, 0)))
