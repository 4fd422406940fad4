"""Acceptance criteria, one test per criterion.

Each test prints a ``CRITERION n: PASS|FAIL ...`` line, and the lines are
collected again in the pytest terminal summary.  The file can also be run
directly: ``python3 tests/test_acceptance.py``.
"""

import numpy as np
import pytest

from locelm import BlockConfig, NlsqOptions, error_report, get_problem, march

import _properties
import conftest


def record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def solve(name, t_final, n_blocks, cfg, **params):
    res = march(get_problem(name, **params), t_final, n_blocks, cfg)
    return error_report(res).max_error, res.solve_time, res


def check_solve(n, name, t_final, n_blocks, cfg, tol, limit):
    err, t, _ = solve(name, t_final, n_blocks, cfg)
    ok = err <= tol and t <= limit
    return record(n, ok, f"{name}: max error {err:.3e} (<= {tol:g}), solve time {t:.2f} s (<= {limit:g} s)")


def test_criterion_1_helmholtz1d():
    cfg = BlockConfig(counts=(4,), q=(100,), hidden_widths=(100,), r_m=3.0, seed=1)
    assert check_solve(1, "helmholtz1d", None, 1, cfg, 1e-6, 30)


def test_criterion_2_helmholtz2d():
    cfg = BlockConfig(counts=(2, 2), q=(25, 25), hidden_widths=(400,), r_m=1.5, seed=1)
    assert check_solve(2, "helmholtz2d", None, 1, cfg, 1e-3, 120)


def test_criterion_3_diffusion():
    cfg = BlockConfig(counts=(5, 1), q=(30, 30), hidden_widths=(300,), r_m=1.0, seed=1)
    assert check_solve(3, "diffusion1d", 1.0, 1, cfg, 1e-5, 120)


def test_criterion_4_advection_two_blocks():
    cfg = BlockConfig(counts=(4, 2), q=(20, 20), hidden_widths=(250,), r_m=2.0, seed=1)
    assert check_solve(4, "advection1d", 2.0, 2, cfg, 1e-2, 120)


def test_criterion_5_nonlinear_helmholtz():
    base = dict(counts=(4,), q=(100,), hidden_widths=(200,), r_m=5.0, seed=1)
    nlsq = BlockConfig(**base, solver="nlsq_perturb", nlsq=NlsqOptions(delta=0.2, xi2_mode="fixed_one"))
    newton = BlockConfig(**base, solver="newton_llsq")
    e1, t1, _ = solve("nlhelmholtz1d", None, 1, nlsq)
    e2, t2, _ = solve("nlhelmholtz1d", None, 1, newton)
    ok = e1 <= 1e-6 and e2 <= 1e-3 and t1 <= 120 and t2 <= 120
    assert record(5, ok, f"nlhelmholtz1d: NLSQ-perturb {e1:.3e} (<= 1e-6) in {t1:.2f} s, "
                         f"Newton-LLSQ {e2:.3e} (<= 1e-3) in {t2:.2f} s")


def test_criterion_6_burgers():
    cfg = BlockConfig(counts=(5, 1), q=(20, 20), hidden_widths=(200,), r_m=0.75, seed=1,
                      solver="nlsq_perturb", nlsq=NlsqOptions(delta=0.5, xi2_mode="fixed_zero"))
    assert check_solve(6, "burgers1d", 0.25, 1, cfg, 1e-5, 300)


def test_criterion_7_wave():
    cfg = BlockConfig(counts=(4, 2), q=(25, 25), hidden_widths=(350,), r_m=1.0, seed=1)
    assert check_solve(7, "wave2nd1d", 1.0, 1, cfg, 1e-2, 300)


def convergence_ok(errs, factor=10.0, allowed=1, span=1e4):
    """Plateau onset is the first error within ``factor`` of the sweep minimum.

    Up to the onset the sequence may rise at most ``allowed`` times and must
    fall by at least ``span`` overall.
    """
    errs = np.asarray(errs)
    onset = int(np.argmax(errs <= factor * errs.min()))
    pre = errs[: onset + 1]
    rises = int(np.sum(np.diff(pre) > 0))
    drop = pre[0] / pre[-1]
    return rises <= allowed and drop >= span, onset, rises, drop


def test_criterion_8_convergence():
    helm = get_problem("helmholtz1d")

    def err(q, m, r_m):
        cfg = BlockConfig(counts=(2,), q=(q,), hidden_widths=(m,), r_m=r_m, seed=1)
        return error_report(march(helm, None, 1, cfg)).max_error

    qs = list(range(10, 101, 10))
    ms = list(range(25, 251, 25))
    q_err = [err(q, 200, 3.0) for q in qs]
    m_err = [err(100, m, 3.0) for m in ms]
    okq, oq, rq, dq = convergence_ok(q_err)
    okm, om, rm, dm = convergence_ok(m_err)
    detail = (f"Q-sweep drop {dq:.1e} to plateau at Q={qs[oq]} with {rq} rise(s); "
              f"M-sweep drop {dm:.1e} to plateau at M={ms[om]} with {rm} rise(s)")
    assert record(8, okq and okm, detail)


def test_criterion_9_property_suites():
    checks = {
        "network derivatives": lambda: _properties.check_network_fd(100),
        "row counts": lambda: _properties.check_row_counts(20),
        "block sparsity": _properties.check_block_sparsity,
        "min-norm oracle": lambda: _properties.check_min_norm(50),
        "Jacobian": _properties.check_jacobian_fd,
        "manufactured forcing": _properties.check_forcing_identity,
        "cross-block continuity": _properties.check_chaining,
        "determinism": _properties.check_determinism,
    }
    failed = []
    for name, fn in checks.items():
        ok, detail = fn()
        print(f"  {name}: {'ok' if ok else 'FAILED'} ({detail})")
        if not ok:
            failed.append(name)
    assert record(9, not failed, f"{len(checks) - len(failed)}/{len(checks)} property suites green"
                                 + (f"; failed: {', '.join(failed)}" if failed else ""))


def test_criterion_10_subdomain_economy(repeats=7):
    helm = get_problem("helmholtz1d")
    rows = []
    for n_e, r_m in ((1, 6.0), (2, 4.5), (4, 3.0)):
        cfg = BlockConfig(counts=(n_e,), q=(200 // n_e,), hidden_widths=(400 // n_e,), r_m=r_m, seed=1)
        times, err = [], None
        for _ in range(repeats):
            res = march(helm, None, 1, cfg)
            times.append(res.solve_time)
            err = error_report(res).max_error
        rows.append((n_e, min(times), err))
    t = [r[1] for r in rows]
    e = [r[2] for r in rows]
    ok = t[0] > t[1] > t[2] and all(x <= 100 * e[0] for x in e)
    detail = ", ".join(f"N_e={n}: {tt * 1e3:.1f} ms, {ee:.2e}" for n, tt, ee in rows)
    assert record(10, ok, detail)


if __name__ == "__main__":
    import sys

    raise SystemExit(pytest.main([__file__, "-q", "-s", *sys.argv[1:]]))
