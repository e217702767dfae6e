"""Linking forms from Heegaard data
================================

Compute -B^-1 A on Z^g / B^t Z^g and match it to a generator.
"""

from homfib.linking import (E0, E1, e0_heegaard, e1_heegaard, gram_equivalent, gram_of_generator,
                            heegaard_pairing_matrix, lens_heegaard, linking_form_from_heegaard)

# %% lens space L(5,2)
h = lens_heegaard(5, 2)
print("L(5,2) pairing:", heegaard_pairing_matrix(h))

# %% the two exceptional 2-primary families
for k in (2, 3):
    for name, heeg, gen in (("E0", e0_heegaard, E0), ("E1", e1_heegaard, E1)):
        form = linking_form_from_heegaard(heeg(k))
        print(f"{name}({k}):", heegaard_pairing_matrix(heeg(k)),
              "equivalent to generator:", gram_equivalent(form, gram_of_generator(gen(k))))
