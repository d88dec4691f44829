"""Shared oracles: direct brute force over {0,1}^n, written independently of the package."""
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def feasible(bits, beta):
    on = [k for k, b in enumerate(bits) if b]
    return all(b - a > beta for a, b in zip(on, on[1:]))


def brute_throughput(rho, beta):
    """theta_i = sum over feasible states containing i of prod rho / Z, by direct summation."""
    n = len(rho)
    z = 0
    num = [0] * n
    for bits in product((0, 1), repeat=n):
        if not feasible(bits, beta):
            continue
        w = Fraction(1)
        for r, b in zip(rho, bits):
            if b:
                w *= r
        z += w
        for i, b in enumerate(bits):
            if b:
                num[i] += w
    return [x / z for x in num], z


@pytest.fixture
def brute():
    return brute_throughput


ACCEPTANCE_LINES = []


def record(label, ok, detail):
    """Remember one acceptance verdict; printed after the run and returned for asserting."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
