# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Extracting the junction critical current from a tuning curve
#
# Resonance frequencies measured at a set of fluxes pin down the bare line
# frequency and the SQUID critical current. The line inductance and the
# number of SQUIDs come from the design (the prior device). The loop
# inductance is held fixed by default because beta and Ic0 trade off against
# each other over a limited flux range.

# %%
import numpy as np

from squidres import (
    FluxDataset,
    NoiseModel,
    SweepSpec,
    external_q,
    fit_flux_curve,
    fit_resonance,
    resonance_frequency,
    synth_sweep,
    total_q,
)
from squidres.io import config_to_model, load_config

truth, env = config_to_model(load_config("sample_b"))
print(f"truth: N = {truth.n_squids}, Ic0 = {truth.squid.Ic0 * 1e6:.2f} uA")

# %% [markdown]
# Every point comes from a fit to a noisy trace, as it would in a
# measurement. This sample is strongly undercoupled, so its peak transmission
# Q/Q_ext is only a few percent; the noise is set to 1% of that peak.

# %%
phi = np.linspace(-0.45, 0.45, 19)
f0_meas = []
for k, p in enumerate(phi):
    f0 = resonance_frequency(truth, p) / (2 * np.pi)
    q = total_q(truth, p, env)
    spec = SweepSpec(f0 * (1 - 7 / q), f0 * (1 + 7 / q), 801, p, env)
    sigma = 0.01 * q / external_q(truth, p)
    f0_meas.append(fit_resonance(synth_sweep(truth, spec, NoiseModel(sigma, seed=k))).f0)
data = FluxDataset.from_arrays(phi, f0_meas)

# %%
prior, _ = config_to_model({**load_config("sample_b"), "ic0_a": 1.5e-6})
fit = fit_flux_curve(data, prior)
print(f"fit:  f_r = {fit.f_r / 1e9:.6f} GHz, Ic0 = {fit.Ic0 * 1e6:.4f} uA, beta = {fit.beta:.4f}")
print(f"rms relative residual {fit.residual_norm:.1e}")

# %%
fit_b = fit_flux_curve(data, prior, free_beta=True)
print(f"free beta: Ic0 = {fit_b.Ic0 * 1e6:.5f} uA (stderr {fit_b.stderr['ic0_a'] * 1e9:.2g} nA), "
      f"beta = {fit_b.beta:.4f} (stderr {fit_b.stderr['beta']:.1g})")
