"""Homologically fibered links and knots in closed 3-manifolds, decided by exact integer linear algebra.

Modules, bottom-up:

* :mod:`homfib.linalg` - integer matrices, determinants, Smith normal form, cokernels
* :mod:`homfib.linking` - linking forms, their generators and Heegaard data
* :mod:`homfib.surgery` - rational surgery diagrams
* :mod:`homfib.problem` - the block determinant equation
* :mod:`homfib.engine` - verdicts, obstructions, search, reduction
* :mod:`homfib.hc` - bounds and exact values of hc(M)
* :mod:`homfib.cli` - the ``homfib`` command
"""

__version__ = "0.1.0"

from .linalg import AbelianGroupData, IntMatrix, cokernel, determinant, smith_normal_form  # noqa: E402
from .linking import (A, E0, E1, HeegaardGluingData, LinkingDecomposition, LinkingGram,  # noqa: E402
                      gram_equivalent, gram_of_decomposition, linking_form_from_heegaard, normalize)
from .problem import BlockProblem, CandidateSolution, FiberType, assemble, verify  # noqa: E402
from .surgery import SurgeryDiagram, first_homology, representative_diagram  # noqa: E402
from .engine import (Exists, NotExists, ObstructionCertificate, Unknown, decide, disk_case,  # noqa: E402
                     modular_obstruction, problem_from_decomposition, problem_from_diagram, search,
                     square_block_obstruction, stabilization_reduce)
from .hc import HcBounds, genus_lower_bound, hc_compute, known_upper_bounds, sigma12_witness  # noqa: E402

__all__ = [
    "__version__", "AbelianGroupData", "IntMatrix", "cokernel", "determinant", "smith_normal_form", "A", "E0",
    "E1", "HeegaardGluingData", "LinkingDecomposition", "LinkingGram", "gram_equivalent",
    "gram_of_decomposition", "linking_form_from_heegaard", "normalize", "BlockProblem", "CandidateSolution",
    "FiberType", "assemble", "verify", "SurgeryDiagram", "first_homology", "representative_diagram", "Exists",
    "NotExists", "ObstructionCertificate", "Unknown", "decide", "disk_case", "modular_obstruction",
    "problem_from_decomposition", "problem_from_diagram", "search", "square_block_obstruction",
    "stabilization_reduce", "HcBounds", "genus_lower_bound", "hc_compute", "known_upper_bounds",
    "sigma12_witness",
]
