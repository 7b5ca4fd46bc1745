import math

import pytest

from goldbach_ap import build_lambda_table


def trial_lambda(n: int) -> float:
    """Lambda(n) by trial division; independent of the sieve."""
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


def units(q):
    return [r for r in range(q) if math.gcd(r, q) == 1] if q > 1 else [0]


@pytest.fixture(scope="session")
def table_small():
    return build_lambda_table(30_000)


@pytest.fixture(scope="session")
def table_big():
    return build_lambda_table(300_002)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        if n in mod.RESULTS:
            ok, detail = mod.RESULTS[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN")
