import math

import numpy as np
import pytest

from ioncv import fock
from ioncv import gates as G
from ioncv import hamiltonians as H
from ioncv.errors import DriveError, LayoutError, TruncationError
from ioncv.evolution import evolve_static, prepare_qubit, state_fidelity

from conftest import eigen_prep, vacuum


def coherent(alpha, levels):
    n = np.arange(levels)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    return np.exp(-abs(alpha) ** 2 / 2) * alpha ** n / np.sqrt(fact)


def test_gate_params_validation():
    G.GateParams("displacement", ("a",), alpha=0.1)
    with pytest.raises(DriveError, match="missing"):
        G.GateParams("displacement", ("a",))
    with pytest.raises(DriveError, match="not allowed"):
        G.GateParams("displacement", ("a",), alpha=0.1, xi=0.2)
    with pytest.raises(DriveError):
        G.GateParams("warp", ())


def test_displacement_makes_coherent_state():
    lay = fock.HilbertLayout(1, 20, guard=5)
    alpha = 0.8 - 0.3j
    out = G.displacement(alpha, "a", lay).matrix @ vacuum(lay).amplitudes
    ref = fock.product_state("g", [coherent(alpha, 20)], lay)
    assert abs(np.vdot(ref.amplitudes, out)) ** 2 == pytest.approx(1, abs=1e-10)


def test_displacement_leak_guard():
    lay = fock.HilbertLayout(1, 4, guard=4)
    with pytest.raises(TruncationError) as err:
        G.displacement(2.0, "a", lay)
    assert err.value.leak > 1e-8


def test_squeezer_variances():
    lay = fock.HilbertLayout(1, 30, guard=8)
    xi = 0.2
    s = fock.StateVector(G.squeezer(xi, "a", lay).matrix @ vacuum(lay).amplitudes, lay)
    x, p = fock.quadratures("a", lay)
    vx = s.expect(x @ x).real
    vp = s.expect(p @ p).real
    assert vx == pytest.approx(np.exp(-4 * xi), rel=1e-8)
    assert vp == pytest.approx(np.exp(4 * xi), rel=1e-8)


def test_squeezer_phase_rotates_axis():
    lay = fock.HilbertLayout(1, 30, guard=8)
    theta = 0.4
    s = fock.StateVector(G.squeezer(0.15 * np.exp(2j * theta), "a", lay).matrix @ vacuum(lay).amplitudes, lay)
    xt = fock.rotated_quadrature("a", lay, theta)
    assert s.expect(xt @ xt).real == pytest.approx(np.exp(-0.6), rel=1e-8)


def test_fourier_rotates_coherent_amplitude():
    lay = fock.HilbertLayout(1, 20, guard=5)
    d = G.displacement(0.6, "a", lay)
    f = G.fourier(0.9, "a", lay)
    s = fock.StateVector((f @ d).matrix @ vacuum(lay).amplitudes, lay)
    a = fock.annihilation("a", lay)
    assert s.expect(a) == pytest.approx(0.6 * np.exp(0.9j), abs=1e-10)


def test_beamsplitter_swaps_single_phonon():
    lay = fock.HilbertLayout(2, 3, guard=1)
    u = G.beamsplitter(np.pi / 2, 0.4, ("a", "b"), lay).matrix
    out = u @ fock.basis_state("g", [1, 0], lay).amplitudes
    assert abs(out[lay.flat_index(0, (0, 1))]) ** 2 == pytest.approx(1, abs=1e-12)


def test_beamsplitter_rejects_identical_modes():
    lay = fock.HilbertLayout(2, 3, guard=1)
    with pytest.raises(LayoutError, match="identical"):
        G.beamsplitter(0.1, 0.0, ("a", "a"), lay)


def test_two_mode_squeezer_statistics():
    lay = fock.HilbertLayout(2, 20, guard=4)
    r = 0.3
    s = fock.StateVector(G.two_mode_squeezer(r, ("a", "b"), lay).matrix @ vacuum(lay).amplitudes, lay)
    pops = s.populations()
    for n in range(4):
        assert pops[n, n] == pytest.approx(np.tanh(r) ** (2 * n) / np.cosh(r) ** 2, abs=1e-10)
    assert pops.sum() - np.trace(pops) < 1e-20


def test_controlled_displacement_shifts_target():
    lay = fock.HilbertLayout(2, 16, guard=4)
    g = 0.15
    prep = G.displacement(0.5, "a", lay) @ G.displacement(0.2j, "b", lay)
    u = G.controlled_displacement(g, "a", "b", lay)
    s0 = fock.StateVector(prep.matrix @ vacuum(lay).amplitudes, lay)
    s1 = fock.StateVector(u.matrix @ s0.amplitudes, lay)
    xa, _ = fock.quadratures("a", lay)
    xb, pb = fock.quadratures("b", lay)
    assert s1.expect(xb).real == pytest.approx(s0.expect(xb).real + 2 * g * s0.expect(xa).real, abs=1e-9)
    assert s1.expect(pb).real == pytest.approx(s0.expect(pb).real, abs=1e-9)
    assert s1.expect(xa).real == pytest.approx(s0.expect(xa).real, abs=1e-9)


def test_multi_mode_embedding_order():
    lay = fock.HilbertLayout(3, 2, guard=0)
    u = G.beamsplitter(np.pi / 2, 0.0, ("c", "a"), lay).matrix
    out = u @ fock.basis_state("e", [0, 1, 1], lay).amplitudes
    assert abs(out[lay.flat_index(1, (1, 1, 0))]) == pytest.approx(1)


def test_sideband_pulses():
    lay = fock.HilbertLayout(1, 3, guard=1)
    blue = G.sideband_pulse("blue", np.pi, 0.0, "a", lay).matrix
    out = blue @ fock.basis_state("g", [0], lay).amplitudes
    assert abs(out[lay.flat_index(1, (1,))]) ** 2 == pytest.approx(1)
    red = G.sideband_pulse("red", np.pi, 0.0, "a", lay).matrix
    out = red @ fock.basis_state("g", [1], lay).amplitudes
    assert abs(out[lay.flat_index(1, (0,))]) ** 2 == pytest.approx(1)


def test_carrier_pulse_flips():
    lay = fock.HilbertLayout(1, 1, guard=0)
    out = G.carrier_pulse(np.pi, 0.3, lay).matrix @ vacuum(lay).amplitudes
    assert abs(out[lay.flat_index(1, (0,))]) == pytest.approx(1)


def test_eigen_sign():
    assert G.eigen_sign(0.3, None) == 1
    assert G.eigen_sign(0.3, H.QubitPrep(0.3, 1)) == 1
    assert G.eigen_sign(0.3, H.QubitPrep(0.3 + np.pi, 1)) == -1
    assert G.eigen_sign(0.3, H.QubitPrep(0.3, -1)) == -1
    with pytest.raises(DriveError):
        G.eigen_sign(0.3, H.QubitPrep(1.0, 1))
    with pytest.raises(DriveError):
        G.eigen_sign(0.3, H.QubitPrep(None, 1))


def test_laser_to_gate_displacement_example():
    trap = fock.TrapSpec((1.0,), 0.05, 10)
    cfg = H.drive_config("displacement", "a", 1.0, np.pi / 2, 2.0, trap)
    cfg = H.DriveConfig(cfg.tones, cfg.duration, cfg.kind, cfg.modes, eigen_prep(cfg, trap))
    gp = G.laser_to_gate(cfg, trap)
    assert gp.alpha == pytest.approx(0.1)


def test_laser_to_gate_sign_flip_on_opposite_prep():
    trap = fock.TrapSpec((1.0,), 0.05, 10)
    cfg = H.drive_config("squeezer", "a", 1.0, 0.2, 2.0, trap)
    up = G.laser_to_gate(H.DriveConfig(cfg.tones, 2.0, "squeezer", ("a",), eigen_prep(cfg, trap, 1)), trap)
    dn = G.laser_to_gate(H.DriveConfig(cfg.tones, 2.0, "squeezer", ("a",), eigen_prep(cfg, trap, -1)), trap)
    assert up.xi == pytest.approx(-dn.xi)


CASES = [
    ("displacement", ("a",), 0.7), ("squeezer", ("a",), -1.2), ("fourier", ("a",), 0.4),
    ("beamsplitter", ("a", "b"), 2.1), ("tms", ("a", "b"), 0.9), ("conditional", ("a", "b"), -0.5),
]


@pytest.mark.parametrize("kind,modes,phase", CASES)
@pytest.mark.parametrize("sign", [1, -1])
def test_rwa_evolution_matches_ideal_gate(kind, modes, phase, sign):
    trap = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 8, guard=4)
    lay = trap.layout()
    t = {"displacement": 4.0, "squeezer": 20.0, "fourier": 300.0}.get(kind, 25.0)
    cfg = H.drive_config(kind, modes, 1.0, phase, t, trap)
    cfg = H.DriveConfig(cfg.tones, t, kind, modes, eigen_prep(cfg, trap, sign))
    psi = prepare_qubit(fock.basis_state("g", [1, 0], lay), cfg.qubit_prep)
    rwa = H.rwa_from_config(cfg, trap, lay)
    got = evolve_static(rwa.operator, rwa.effective_coupling, t, psi).final_state
    u = G.ideal_unitary(G.laser_to_gate(cfg, trap), lay)
    want = fock.StateVector(u.matrix @ psi.amplitudes, lay)
    assert state_fidelity(got, want) > 1 - 1e-10
