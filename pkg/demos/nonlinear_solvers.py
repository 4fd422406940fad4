"""Nonlinear problems: perturbed Levenberg-Marquardt versus Newton.

For a nonlinear PDE the collocation residual is nonlinear in the output
weights.  The perturbation strategy restarts Levenberg-Marquardt from random
perturbations of the best point so far; the Newton variant solves a linear
least-squares problem per step.

    python3 demos/nonlinear_solvers.py
"""

from locelm import BlockConfig, NlsqOptions, error_report, get_problem, march

problem = get_problem("nlhelmholtz1d")
base = dict(counts=(4,), q=(100,), hidden_widths=(200,), r_m=5.0, seed=1)

runs = {
    "perturbed LM": BlockConfig(**base, solver="nlsq_perturb",
                                nlsq=NlsqOptions(delta=0.2, xi2_mode="fixed_one")),
    "Newton": BlockConfig(**base, solver="newton_llsq"),
}
for label, cfg in runs.items():
    res = march(problem, None, 1, cfg)
    blk = res.blocks[0]
    print(f"{label:13s} max error {error_report(res).max_error:.2e}  cost {blk.cost:.1e}  "
          f"iterations {blk.iterations}  restarts {blk.subiterations}  {res.solve_time:.2f} s")

# A cheaper Burgers run (the full-size one takes about half a minute).
cfg = BlockConfig(counts=(5, 1), q=(15, 15), hidden_widths=(120,), r_m=0.75, seed=1,
                  solver="nlsq_perturb", nlsq=NlsqOptions(delta=0.5, xi2_mode="fixed_zero"))
res = march(get_problem("burgers1d"), 0.25, 1, cfg)
print(f"\nBurgers, reduced size: max error {error_report(res).max_error:.2e} "
      f"in {res.solve_time:.1f} s")
