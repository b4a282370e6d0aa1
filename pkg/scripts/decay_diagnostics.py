"""Late-time current-current and large-distance density-density decay in a GGE."""

import numpy as np

from bft_entropy.correlators import decay_exponent_fit, gge_current_current, gge_density_density
from bft_entropy.dispersion import Dispersion
from bft_entropy.state import GGEState, QuenchSpec, gge_from_quench

thermal = GGEState.thermal(Dispersion.continuum_quadratic(), beta=1.0, mu=-0.5)
dts = np.geomspace(20, 640, 11)
jj = np.array([gge_current_current(thermal, 0.0, t) for t in dts])
fit = decay_exponent_fit(dts, np.abs(jj))
print("continuum thermal state, j-j at zero separation")
for t, v in zip(dts, jj):
    print(f"  t = {t:8.2f}   |<jj>| = {abs(v):.6e}")
print(f"  power-law exponent {fit.exponent:.4f}  (R^2 {fit.r2:.6f})\n")

quench = gge_from_quench(QuenchSpec.gamma_quench(0.8))
dxs = np.arange(2, 22, 2).astype(float)
dd = np.array([gge_density_density(quench, x) for x in dxs])
fit = decay_exponent_fit(dxs, np.abs(dd), model="exponential")
print("lattice gamma = 0.8 stationary state, equal-time n-n")
for x, v in zip(dxs, dd):
    print(f"  dx = {x:5.1f}   |<nn>| = {abs(v):.6e}")
print(f"  exponential rate {fit.exponent:.4f}  (R^2 {fit.r2:.6f})")
