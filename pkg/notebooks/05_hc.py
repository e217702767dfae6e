"""The invariant hc
================

Lower bounds from homology and obstructions, upper bounds from explicit witnesses.
"""

from homfib.hc import hc_compute
from homfib.linking import E0, E1, LinkingDecomposition

for term in (E0(1), E0(2), E1(2), E1(3)):
    row = [hc_compute(LinkingDecomposition(r, (term,))).exact for r in range(4)]
    print(f"{term}: hc for r = 0..3 free S2xS1 summands:", row)
