"""1D Helmholtz with local ELMs: accuracy versus resolution.

The domain [0, 8] is split into sub-domains, each carrying one tanh network
with fixed random hidden coefficients.  Only the output weights are trained,
by a single linear least-squares solve.

    python3 demos/helmholtz_convergence.py
"""

from locelm import BlockConfig, error_report, get_problem, march

problem = get_problem("helmholtz1d")

# A single run: 4 sub-domains, 100 collocation points and 100 features each.
cfg = BlockConfig(counts=(4,), q=(100,), hidden_widths=(100,), r_m=3.0, seed=1)
res = march(problem, None, 1, cfg)
rep = error_report(res)
print(f"4 sub-domains: max error {rep.max_error:.2e}, rms {rep.rms_error:.2e}, "
      f"{res.solve_time * 1e3:.1f} ms to assemble and solve")

# Errors drop quickly as collocation points are added, then level off once
# the network width becomes the limiting factor.
print("\nQ    max error")
for q in range(10, 101, 15):
    cfg = BlockConfig(counts=(2,), q=(q,), hidden_widths=(200,), r_m=3.0, seed=1)
    print(f"{q:<4d} {error_report(march(problem, None, 1, cfg)).max_error:.2e}")

# The range of the random coefficients matters: very small values give
# nearly linear features, very large ones give features that are too steep.
print("\nR_m    max error")
for r_m in (0.01, 0.5, 3.0, 30.0, 100.0):
    cfg = BlockConfig(counts=(4,), q=(100,), hidden_widths=(100,), r_m=r_m, seed=1)
    print(f"{r_m:<6g} {error_report(march(problem, None, 1, cfg)).max_error:.2e}")
