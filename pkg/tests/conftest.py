from __future__ import annotations

import numpy as np
import pytest

from dnlslab.torus import TorusField, wavenumbers

_ACCEPTANCE_LINES: list = []


def random_field(rng, n=32, band=None, scale=1.0, decay=0.0) -> TorusField:
    """Random band-limited field with the Nyquist mode left empty."""
    band = n // 2 - 1 if band is None else band
    xi = wavenumbers(n)
    sel = np.abs(xi) <= band
    c = np.zeros(n, dtype=complex)
    k = int(sel.sum())
    c[sel] = (rng.normal(size=k) + 1j * rng.normal(size=k)) * np.exp(-decay * np.abs(xi[sel]))
    return TorusField.from_coeffs(scale * c)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {number:2d}: {title} :: {detail}")
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
