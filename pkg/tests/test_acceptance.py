"""Every acceptance criterion at its stated tolerance.

Run with pytest (the per-criterion lines are printed in the terminal
summary) or directly: ``python tests/test_acceptance.py [--quick]``.
"""

import sys

import pytest

from unitri import acceptance

LINES = []
SETTINGS = acceptance.Settings()


@pytest.fixture(scope="module", autouse=True)
def fresh_cache():
    acceptance._cache.clear()
    yield
    acceptance._cache.clear()


@pytest.mark.parametrize("cid", list(acceptance.CRITERIA))
def test_criterion(cid):
    check = acceptance.CRITERIA[cid](SETTINGS)
    line = check.line()
    LINES.append(line)
    print(line)
    assert check.passed, line


def main(argv):
    quick = "--quick" in argv
    s = acceptance.Settings(n=acceptance.QUICK_N, quick=True) if quick else acceptance.Settings()
    checks = acceptance.run_all(s)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
