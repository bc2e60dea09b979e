# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Q budget versus flux and temperature
#
# The loaded Q combines the coupling-limited external Q with a thermal
# broadening term. Thermal photon-number fluctuations shift the mode through
# the Duffing nonlinearity, and that shift grows steeply near half a flux
# quantum.

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidres import (
    ThermalEnv,
    dbm_to_watts,
    external_q,
    flux_map,
    photons_from_input_power,
    thermal_occupation,
)
from squidres.io import config_to_model, load_config

dev, env = config_to_model(load_config("sample_a"))
print(f"T = {env.T * 1e3:.0f} mK")

# %%
phi = np.linspace(-0.47, 0.47, 189)
rows = flux_map(dev, env, phi)
q_ext = np.array([r.q_ext for r in rows])
q_inh = np.array([r.q_inh for r in rows])
q_tot = np.array([r.q_total for r in rows])
i0, i45 = np.argmin(np.abs(phi)), np.argmin(np.abs(phi - 0.45))
print(f"flux 0:    Q_ext = {q_ext[i0]:.0f}, Q_inh = {q_inh[i0]:.3g}, Q = {q_tot[i0]:.0f}")
print(f"flux 0.45: Q_ext = {q_ext[i45]:.0f}, Q_inh = {q_inh[i45]:.3g}, Q = {q_tot[i45]:.0f}")

# %% [markdown]
# Warmer samples dip deeper. The thermal occupation at 60 mK is already a
# third of a photon at these frequencies.

# %%
fig, ax = plt.subplots(figsize=(5, 3.5))
for T in (0.02, 0.06, 0.12):
    q = [r.q_total for r in flux_map(dev, ThermalEnv(T), phi)]
    ax.semilogy(phi, q, label=f"{T * 1e3:.0f} mK")
ax.semilogy(phi, q_ext, "k--", label="Q_ext")
ax.set_xlabel("flux (Phi0)")
ax.set_ylabel("loaded Q")
ax.legend()
fig.savefig("q_budget.png", dpi=120, bbox_inches="tight")

w0 = 2 * np.pi * 1.741e9
print(f"n_th(60 mK) = {thermal_occupation(w0, env):.3f}")

# %% [markdown]
# Drive photons at -143 dBm, using a measured loaded Q of 3300 rather than the
# model value.

# %%
print(f"n = {photons_from_input_power(float(dbm_to_watts(-143)), dev, 0.0, env, q=3300):.2f}")
print(f"Q_ext rises with flux too: {external_q(dev, 0.0):.0f} -> {external_q(dev, 0.3):.0f}")
