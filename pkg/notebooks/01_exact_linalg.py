"""Exact integer linear algebra
============================

Smith normal form, fraction-free determinants and cokernels on big integers.
"""

from homfib.linalg import IntMatrix, cokernel, determinant, smith_normal_form

# %% Smith normal form with its unimodular witnesses
M = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
snf = smith_normal_form(M)
print("diagonal:", snf.diagonal)
print("U M V == D:", snf.U @ M @ snf.V == snf.D)

# %% Bareiss determinant stays exact for large entries
big = IntMatrix.from_rows([[10**30, 1], [1, 10**30]])
print("det:", determinant(big))

# %% cokernel: rows are relations on column generators
print("coker:", cokernel(IntMatrix.from_rows([[4, 0], [0, 6]])))
