"""Scaling exponent of the quench pairing correction on a (theta0, zeta) grid."""

import time

import numpy as np

from bft_entropy.correlators import light_cone_scan
from bft_entropy.state import QuenchSpec

theta0 = 0.1 + 0.2 * np.arange(12)
zeta = np.linspace(0.2, 4.6, 12)
start = time.perf_counter()
scan = light_cone_scan(QuenchSpec.gaussian_quench(1.5), theta0, 0.2, zeta, np.geomspace(50, 800, 8))
print(f"scan took {time.perf_counter() - start:.1f} s; rows theta0, columns zeta")
print("        " + " ".join(f"{z:6.2f}" for z in zeta))
for i, th in enumerate(theta0):
    cells = []
    for j in range(zeta.size):
        e = scan.exponent[i, j]
        mark = "*" if scan.predicted[i, j] else (" " if scan.agrees[i, j] else "!")
        cells.append(("  -inf" if np.isinf(e) else f"{e:6.2f}") + mark)
    print(f"{th:6.2f}  " + "".join(cells))
print("* predicted inside the cone, ! disagreement;"
      f" {scan.disagreements_off_boundary} disagreements off the boundary")
