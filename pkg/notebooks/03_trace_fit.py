# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Fitting a noisy transmission trace
#
# Synthesize S21 around the zero-flux resonance, add seeded complex noise,
# then recover f0 and Q. The fit works on the complex trace, so amplitude
# and phase both constrain it, and an overall complex gain does not matter.

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidres import NoiseModel, S21Trace, SweepSpec, fit_resonance, initial_guess, lorentzian, resonance_frequency, synth_sweep, total_q
from squidres.io import config_to_model, load_config

dev, env = config_to_model(load_config("sample_a"))
f0 = resonance_frequency(dev, 0.0) / (2 * np.pi)
q = total_q(dev, 0.0, env)
spec = SweepSpec(f0 * (1 - 7 / q), f0 * (1 + 7 / q), 1601, env=env)
trace = synth_sweep(dev, spec, NoiseModel(sigma=0.02, seed=7))

# %%
guess = initial_guess(trace)
fit = fit_resonance(trace)
print(f"model: f0 = {f0 / 1e9:.6f} GHz, Q = {q:.1f}")
print(f"guess: f0 = {guess.f0 / 1e9:.6f} GHz, Q = {guess.Q:.1f}")
print(f"fit:   f0 = {fit.f0 / 1e9:.6f} GHz +/- {fit.stderr['f0']:.0f} Hz, Q = {fit.Q:.1f} +/- {fit.stderr['q']:.1f}")
print(f"converged = {fit.converged} after {fit.n_iter} evaluations")

# %%
model = lorentzian(trace.freqs, fit.f0, fit.Q, fit.scale)
fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(5, 5))
df = (trace.freqs - fit.f0) / 1e6
a1.plot(df, 20 * np.log10(np.abs(trace.values)), ".", ms=2)
a1.plot(df, 20 * np.log10(np.abs(model)))
a1.set_ylabel("|S21| (dB)")
a2.plot(df, np.angle(trace.values), ".", ms=2)
a2.plot(df, np.angle(model))
a2.set_ylabel("phase (rad)")
a2.set_xlabel("f - f0 (MHz)")
fig.savefig("trace_fit.png", dpi=120, bbox_inches="tight")

# %% [markdown]
# A rotated and attenuated copy gives the same f0 and Q.

# %%
rotated = S21Trace(trace.freqs, 0.03 * np.exp(1.1j) * trace.values)
fit2 = fit_resonance(rotated)
print(f"relative change: f0 {fit2.f0 / fit.f0 - 1:.1e}, Q {fit2.Q / fit.Q - 1:.1e}")
