"""Acceptance criteria, one test per criterion. Each test prints a single
PASS/FAIL line (visible through pytest's capture) and asserts on the same
flag, reusing the harness suites so the CLI `verify` / `decay` / `convergence`
paths exercise identical code.
"""

import pytest

from primeq.harness import (cancellation_suite, classifier_suite,
                            convergence_study, decay_suite,
                            energy_identity_suite, gronwall_suite,
                            picard_suite, projection_suite, semigroup_suite,
                            spectra_suite)

_CACHE = {}


def _run(name, fn):
    if name not in _CACHE:
        _CACHE[name] = fn()
    return _CACHE[name]


def _announce(capsys, criterion, passed, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {criterion}: "
              f"{detail}")


def test_criterion_1_projection(capsys):
    # div_H avg(Pv) <= 1e-10 |v|, idempotence <= 1e-12, gradients to <= 1e-10
    res = _run("projection", projection_suite)
    _announce(capsys, 1,
              res.passed,
              f"projection div={res.values['div']:.2e} "
              f"idem={res.values['idem']:.2e} grad={res.values['grad']:.2e}")
    assert res.values["div"] <= 1e-10
    assert res.values["idem"] <= 1e-12
    assert res.values["grad"] <= 1e-10


def test_criterion_2_operator_spectra(capsys):
    # rates within 2% of pi^2/4h^2 and mu^2 at nz=64; salinity rate <= 1e-12;
    # mean(sigma) drift <= 1e-12 over 1e4 steps
    res = _run("spectra", spectra_suite)
    _announce(capsys, 2, res.passed,
              f"spectra err_v={res.values['err_v']:.2e} "
              f"err_t={res.values['err_t']:.2e} "
              f"rate_s={res.values['rate_s']:.2e} "
              f"drift={res.values['drift']:.2e}")
    assert res.values["err_v"] <= 0.02
    assert res.values["err_t"] <= 0.02
    assert res.values["rate_s"] <= 1e-12
    assert res.values["drift"] <= 1e-12


def test_criterion_3_semigroup_laws(capsys):
    # composition to 1e-12, L2 contractivity, smoothing slope -0.5 +/- 0.05
    res = _run("semigroup", semigroup_suite)
    slopes = [res.values[f"slope_{k}"]
              for k in ("velocity", "temperature", "salinity")]
    _announce(capsys, 3, res.passed,
              f"semigroup comp={res.values['composition']:.2e} "
              f"slopes={['%.3f' % s for s in slopes]}")
    assert res.values["composition"] <= 1e-12
    assert res.values["contractivity"] <= 1e-12
    for s in slopes:
        assert abs(s + 0.5) <= 0.05


def test_criterion_4_nonlinear_cancellation(capsys):
    # pairing decreases at order >= 1 under 8->64 refinement, <= 1e-3 at 64
    res = _run("cancellation", cancellation_suite)
    _announce(capsys, 4, res.passed,
              f"cancellation orders scalar={res.values['order_s']:.2f} "
              f"velocity={res.values['order_v']:.2f}")
    assert res.values["order_s"] >= 1.0
    assert res.values["order_v"] >= 1.0
    assert res.values["scalar"][-1] <= 1e-3
    assert res.values["velocity"][-1] <= 1e-3


def test_criterion_5_energy_identity(capsys):
    # residual order 2 +/- 0.2 in dt; pressure orthogonality <= 1e-10
    res = _run("energy-identity", energy_identity_suite)
    _announce(capsys, 5, res.passed,
              f"energy identity order={res.values['order']:.3f} "
              f"orthogonality={res.values['orthogonality']:.2e}")
    assert abs(res.values["order"] - 2.0) <= 0.2
    assert res.values["orthogonality"] <= 1e-10


def test_criterion_6_gronwall_bounds(capsys):
    # 20 random small-data runs to T=5 never exceed the B-bound curves
    res = _run("gronwall", gronwall_suite)
    _announce(capsys, 6, res.passed,
              f"gronwall worst slack={res.values['worst_slack']:.2e}")
    assert res.passed
    assert res.values["worst_slack"] >= 0.0


def test_criterion_7_picard(capsys):
    # contraction < 1 every sweep, < 1/2 in the final three,
    # O(dt) Picard-IMEX agreement with slope 1 +/- 0.2
    res = _run("picard", picard_suite)
    ratios = res.values["ratios"]
    _announce(capsys, 7, res.passed,
              f"picard ratios={['%.3f' % r for r in ratios]} "
              f"slope={res.values['slope']:.3f}")
    assert all(r < 1 for r in ratios)
    final = ratios[-3:] if len(ratios) >= 3 else ratios
    assert final and all(r < 0.5 for r in final)
    assert abs(res.values["slope"] - 1.0) <= 0.2


def test_criterion_8_forced_decay(capsys):
    # fitted rates >= 0.95 beta on window [2/beta, 5/beta]
    res = _run("decay", decay_suite)
    _announce(capsys, 8, res.passed,
              f"decay rate_v={res.values['rate_v']:.4f} "
              f"rate_tau={res.values['rate_tau']:.4f} "
              f"rate_pi={res.values['rate_pi']:.4f}")
    assert res.values["rate_v"] >= 0.95 * res.values["beta_v"]
    assert res.values["rate_tau"] >= 0.95 * res.values["beta_tau"]
    assert res.values["rate_pi"] >= 0.95 * min(res.values["beta_v"],
                                               res.values["beta_tau"])


def test_criterion_9_convergence(capsys):
    # spectral horizontal (ratio > 4), vertical 2 +/- 0.2, temporal 1 +/- 0.2
    rep = _run("convergence", lambda: convergence_study("all"))
    _announce(capsys, 9, rep.passed,
              f"convergence ratio={rep.values['horizontal']['ratio']:.0f} "
              f"vert={rep.values['vertical']['order']:.2f} "
              f"temp={rep.values['temporal']['order']:.2f}")
    assert rep.values["horizontal"]["ratio"] > 4
    assert abs(rep.values["vertical"]["order"] - 2.0) <= 0.2
    assert abs(rep.values["temporal"]["order"] - 1.0) <= 0.2


def test_criterion_10_classifier(capsys):
    # zero false band assignments at tol = 1e-8
    res = _run("classifier", classifier_suite)
    _announce(capsys, 10, res.passed,
              f"classifier false assignments={len(res.values['wrong'])}")
    assert res.values["wrong"] == []
