"""Acceptance gate: one test per release criterion.

Each test executes the corresponding criterion at its stated tolerance
and prints a single PASS/FAIL line (visible with pytest -s or on
failure).  Run the same suite from the command line with
``bhdimer verify``.
"""

import pytest

from bhdimer import acceptance


def _run(criterion):
    result = criterion()
    verdict = "PASS" if result.passed else "FAIL"
    print(f"criterion {result.number:02d} {result.name}: {verdict} ({result.detail})")
    assert result.passed, f"criterion {result.number:02d}: {result.detail}"


def test_criterion_01_fixed_point_residuals():
    _run(acceptance.criterion_01)


def test_criterion_02_region_counts():
    _run(acceptance.criterion_02)


def test_criterion_03_stability_typing():
    _run(acceptance.criterion_03)


def test_criterion_04_root_values():
    _run(acceptance.criterion_04)


def test_criterion_05_limit_cycle():
    _run(acceptance.criterion_05)


def test_criterion_06_sphere_laws():
    _run(acceptance.criterion_06)


def test_criterion_07_representation_equivalence():
    _run(acceptance.criterion_07)


def test_criterion_08_coherent_state_algebra():
    _run(acceptance.criterion_08)


def test_criterion_09_many_particle_norm_law():
    _run(acceptance.criterion_09)


def test_criterion_10_mean_field_convergence():
    _run(acceptance.criterion_10)


def test_criterion_11_master_equation_suite():
    _run(acceptance.criterion_11)


def test_criterion_12_self_trapping_limit():
    _run(acceptance.criterion_12)
