import time

import pytest

ACCEPTANCE_LINES: list[str] = []


class Criterion:
    """Times one acceptance criterion and records its PASS/FAIL line."""

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.parts: list[tuple[str, float, float, bool]] = []
        self.start = time.perf_counter()

    def measure(self, label: str, deviation: float, tolerance: float):
        """Record a quantity that must stay below ``tolerance``."""
        self.parts.append((label, float(deviation), float(tolerance), False))

    def measure_above(self, label: str, value: float, floor: float):
        """Record a quantity that must exceed ``floor`` (a form expected to fail)."""
        self.parts.append((label, float(value), float(floor), True))

    def finish(self) -> bool:
        elapsed = time.perf_counter() - self.start
        ok = all((v > lim) if above else (v < lim) for _, v, lim, above in self.parts) \
            and elapsed < self.budget
        detail = "; ".join(f"{label} {v:.3g} {'>' if above else '<'} {lim:.3g}"
                           for label, v, lim, above in self.parts)
        line = (f"{'PASS' if ok else 'FAIL'} criterion {self.number:2d} {self.title}: {detail}; "
                f"time {elapsed:.2f} s < {self.budget:g} s")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
