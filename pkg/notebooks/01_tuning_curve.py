# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Flux tuning of a SQUID-array resonator
#
# A single DC SQUID in the middle of a 1.8 GHz half-wave line. Its Josephson
# inductance grows as the applied flux approaches half a flux quantum and
# pulls the mode down.

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidres import (
    CouplingSpec,
    DeviceModel,
    SquidParams,
    bare_from_impedance,
    participation,
    resonance_frequency,
    squid_linear_inductance,
)

dev = DeviceModel(
    bare_from_impedance(1.805e9, 50.0),
    CouplingSpec(27e-15),
    n_squids=1,
    squid=SquidParams(Ic0=330e-9, Ll=40e-12),
)
print(f"beta = {dev.squid.beta():.4f}, line inductance L = {dev.bare.L * 1e9:.2f} nH")

# %% [markdown]
# The SQUID inductance at zero flux is a few percent of the line inductance,
# so the zero-flux mode already sits below the bare 1.805 GHz.

# %%
phi = np.linspace(-0.48, 0.48, 481)
f0 = resonance_frequency(dev, phi) / (2 * np.pi)
eps = participation(dev, phi)
print(f"eps(0) = {participation(dev, 0.0):.4f}")
print(f"f0 from {f0.min() / 1e9:.3f} to {f0.max() / 1e9:.3f} GHz")

# %%
fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(5, 5))
ax1.plot(phi, f0 / 1e9)
ax1.set_ylabel("f0 (GHz)")
ax2.semilogy(phi, squid_linear_inductance(dev.squid, phi) * 1e9)
ax2.set_ylabel("L_J0 (nH)")
ax2.set_xlabel("flux (Phi0)")
fig.savefig("tuning_curve.png", dpi=120, bbox_inches="tight")

# %% [markdown]
# Close to half a quantum the first-order expansion of the SQUID inductance
# stops being meaningful. Evaluations inside |cos(pi Phi/Phi0)| <= 1e-3 raise
# instead of returning a large number.

# %%
from squidres import FluxTooCloseToHalfQuantum

try:
    resonance_frequency(dev, 0.4999)
except FluxTooCloseToHalfQuantum as exc:
    print("refused:", exc)
