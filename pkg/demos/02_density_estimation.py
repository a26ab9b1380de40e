"""Density estimation with a two-wire qudit circuit.

Samples from a two-component Gaussian mixture are mapped to 18-level
qudit states with random Fourier features, averaged into a density
matrix, and the density at each grid point is read off as the
probability that the first wire ends in |0>.
"""
from scipy.integrate import trapezoid

from quditqmc.experiments import run_density_experiment

exp = run_density_experiment(n_train=1000, n_test=1000, dim=18)

print("gamma search (pearson vs analytic pdf):")
for g, r in exp.scores.items():
    print(f"  gamma={g:<5g} r={r:.4f}")
print(f"chosen gamma: {exp.gamma:g}")
print(f"circuit pearson: {exp.report['pearson']:.4f}, mae: {exp.report['mae']:.4f}")

# Circuit outputs are unnormalized; rescale to compare shapes.
x = exp.grid[:, 0]
scaled = exp.density / trapezoid(exp.density, x)

# Coarse text plot: '#' is the estimate, '.' the true pdf.
width = 60
for i in range(0, len(x), 50):
    est = int(width * scaled[i] / scaled.max())
    true = int(width * exp.pdf[i] / scaled.max())
    row = [" "] * (width + 1)
    row[:est] = "#" * est
    row[min(true, width)] = "."
    print(f"{x[i]:6.2f} |{''.join(row)}")
