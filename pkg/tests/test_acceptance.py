"""Acceptance suite: one test per criterion, each printing its PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
summary, or `frachelm verify --suite acceptance` for the standalone runner.
Criterion 10 is the long one (a full nonlinear reconstruction sweep,
~2 minutes on one core).
"""
import sys

import pytest

from frachelm import acceptance


def _run(fn):
    res = fn()
    status = "PASS" if res.passed else "FAIL"
    print(f"{status} criterion {res.number:2d} [{res.name}] "
          f"({res.seconds:.1f}s): {res.detail}")
    sys.stdout.flush()
    assert res.passed, res.detail


def test_criterion_01_s1_collapse():
    _run(acceptance.criterion_01_s1_collapse)


def test_criterion_02_cross_oracle():
    _run(acceptance.criterion_02_cross_oracle)


def test_criterion_03_correction_decay():
    _run(acceptance.criterion_03_correction_decay)


def test_criterion_04_limiting_absorption():
    _run(acceptance.criterion_04_limiting_absorption)


def test_criterion_05_resolvent_scaling():
    _run(acceptance.criterion_05_resolvent_scaling)


def test_criterion_06_forward_contract():
    _run(acceptance.criterion_06_forward_contract)


def test_criterion_07_k_decay():
    _run(acceptance.criterion_07_k_decay)


def test_criterion_08_near_far():
    _run(acceptance.criterion_08_near_far)


def test_criterion_09_born_round_trip():
    _run(acceptance.criterion_09_born_round_trip)


def test_criterion_10_end_to_end():
    _run(acceptance.criterion_10_end_to_end)


def test_criterion_11_uniqueness():
    _run(acceptance.criterion_11_uniqueness)
