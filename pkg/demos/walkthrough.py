"""Short tour: solve a family, inspect its spectrum, compare with the series.

Run with ``python3 demos/walkthrough.py``.
"""

import numpy as np

from relu_landscape.families import FamilyId
from relu_landscape.fps import reference_expansion
from relu_landscape.kernel import gradient, loss
from relu_landscape.solver import solve_family
from relu_landscape.spectrum import adapted_spectrum, full_spectrum
from relu_landscape.symmetry import embed


def main():
    fam = FamilyId("II", 1, 1)
    for d in (12, 200):
        pt = solve_family(fam, d)
        W = embed(pt).W
        print(f"{fam.label} d={d}: loss {loss(W):.6e}, |grad| {np.abs(gradient(W)).max():.1e}")
        rep = full_spectrum(W, pt.descriptor) if W.size <= 4000 else adapted_spectrum(W, pt.descriptor, trivial_from=pt)
        for irrep in rep.groups:
            vals = ", ".join(f"{v:.4f}" for v in rep.eigenvalues(irrep))
            print(f"  {irrep} (degree {rep.degrees[irrep]}): {vals}")

    exp = reference_expansion(fam, J=10)
    for d in (1e2, 1e3, 1e4):
        err = np.abs(exp.evaluate(d) - solve_family(fam, d).xi).max()
        print(f"series truncated at order 10 vs Newton at d={d:g}: {err:.1e}")


if __name__ == "__main__":
    main()
