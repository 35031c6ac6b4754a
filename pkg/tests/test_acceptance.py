"""Exit criteria, one test each. Every test prints a single pass/fail line."""
import subprocess
import sys

import pytest

from cohfluct import acceptance
from cohfluct.acceptance import CriterionResult

pytestmark = pytest.mark.acceptance


def check(number, record_acceptance, extra=None):
    res = acceptance.CRITERIA[number]()
    if extra is not None:
        ok, note = extra()
        res = CriterionResult(res.number, res.title, res.passed and ok,
                              f"{res.detail}; {note}", res.metrics, res.seconds)
    line = res.line()
    print(line)
    record_acceptance(line)
    assert res.passed, line


def test_criterion_01_su2_product_series(record_acceptance):
    check(1, record_acceptance)


def test_criterion_02_oscillator_variance_first_term(record_acceptance):
    check(2, record_acceptance)


def test_criterion_03_coherence_identities(record_acceptance):
    check(3, record_acceptance)


def test_criterion_04_lmg_decomposition(record_acceptance):
    check(4, record_acceptance)


def test_criterion_05_fluctuation_scaling(record_acceptance):
    check(5, record_acceptance)


def test_criterion_06_isotropic_lmg_dynamics(record_acceptance):
    check(6, record_acceptance)


def test_criterion_07_dicke_decomposition(record_acceptance):
    check(7, record_acceptance)


def test_criterion_08_intertwiner_projector(record_acceptance):
    check(8, record_acceptance)


def test_criterion_09_coefficients(record_acceptance):
    check(9, record_acceptance)


def test_criterion_10_saddle_norm_convergence(record_acceptance):
    check(10, record_acceptance)


def test_criterion_11_triple_product_convergence(record_acceptance):
    check(11, record_acceptance)


def _selfcheck_exit():
    res = subprocess.run([sys.executable, "-m", "cohfluct", "selfcheck"],
                         capture_output=True, text=True, timeout=600)
    return res.returncode == 0, f"selfcheck exit status {res.returncode}"


def test_criterion_12_property_suite_and_selfcheck(record_acceptance):
    check(12, record_acceptance, extra=_selfcheck_exit)
