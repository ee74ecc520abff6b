import numpy as np
import pytest

from ioncv import fock
from ioncv.hamiltonians import QubitPrep, analyze_tones


@pytest.fixture
def trap1():
    return fock.TrapSpec((1.0,), 0.05, 12, guard=6)


@pytest.fixture
def trap2():
    return fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 8, guard=4)


def eigen_prep(config, trap, sign=+1):
    """Qubit prep on the drive's own axis."""
    return QubitPrep(analyze_tones(config, trap).axis, sign)


def vacuum(layout, q="g"):
    return fock.basis_state(q, [0] * layout.n_modes, layout)


def random_state(layout, rng, cap=None):
    """Random normalised state supported below ``cap`` (default the cutoff)."""
    cap = layout.cutoff if cap is None else cap
    amps = np.zeros(layout.total_dim, dtype=complex)
    keep = ~layout.guard_mask
    if cap < layout.cutoff:
        grids = np.indices(layout.dims).reshape(len(layout.dims), -1)
        keep &= np.all(grids[1:] <= cap, axis=0)
    n = int(keep.sum())
    amps[keep] = rng.normal(size=n) + 1j * rng.normal(size=n)
    return fock.StateVector(amps / np.linalg.norm(amps), layout)


ACCEPTANCE = []


def report(criterion, ok, detail):
    """Record and print one acceptance line."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
