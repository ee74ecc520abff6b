import numpy as np
import pytest

from ioncv import fock
from ioncv import hamiltonians as H
from ioncv.errors import DriveError, LayoutError

KINDS_1 = ["displacement", "squeezer", "fourier", "blue", "red"]
KINDS_2 = ["beamsplitter", "tms", "conditional"]


def test_wrap_phase():
    assert H.wrap_phase(3 * np.pi) == pytest.approx(np.pi)
    assert H.wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert H.wrap_phase(0.5 + 2 * np.pi) == pytest.approx(0.5)


def test_tone_validation():
    with pytest.raises(DriveError):
        H.LaserTone(0.0, 0.0, 0.0)
    tone = H.LaserTone(0.0, 0.0, 1.0)
    with pytest.raises(DriveError):
        H.DriveConfig((tone,), 1.0, "teleport")
    with pytest.raises(DriveError):
        H.DriveConfig((tone,), -1.0, "carrier")
    with pytest.raises(DriveError):
        H.DriveConfig((tone,) * 5, 1.0, "carrier")


@pytest.mark.parametrize("kind", KINDS_1 + ["carrier"])
def test_single_mode_rwa_is_hermitian(kind, trap1):
    modes = () if kind == "carrier" else ("a",)
    cfg = H.drive_config(kind, modes, 1.0, 0.37, 1.0, trap1)
    rwa = H.rwa_from_config(cfg, trap1)
    assert rwa.operator.hermiticity_error() < 1e-12
    assert rwa.gate_kind == kind


@pytest.mark.parametrize("kind", KINDS_2)
def test_two_mode_rwa_is_hermitian(kind, trap2):
    cfg = H.drive_config(kind, ("a", "b"), 1.0, -0.8, 1.0, trap2)
    rwa = H.rwa_from_config(cfg, trap2)
    assert rwa.operator.hermiticity_error() < 1e-12
    assert rwa.effective_coupling == pytest.approx(2 * 0.05 * 0.06)


def test_coupling_orders(trap1):
    d = H.displacement_drive(trap1, "a", 1.0, 0.0)
    assert d.effective_coupling == pytest.approx(0.05)
    d2 = H.displacement_drive(trap1, "a", 1.0, 0.0, paper_eta_power=True)
    assert d2.effective_coupling == pytest.approx(0.05 ** 2)
    assert H.squeezer_drive(trap1, "a", 1.0, 0.0).effective_coupling == pytest.approx(0.0025)


def test_displacement_drive_commutes_with_its_qubit_axis(trap1):
    lay = trap1.layout()
    d = H.displacement_drive(trap1, "a", 1.0, 0.9, layout=lay)
    sig = fock.pauli(d.axis, lay)
    assert fock.max_abs(fock.commutator(d.operator, sig)) < 1e-12


def test_beamsplitter_conserves_total_phonons(trap2):
    lay = trap2.layout()
    bs = H.beamsplitter_drive(trap2, "a", "b", 1.0, 0.3, layout=lay)
    ntot = fock.number("a", lay) + fock.number("b", lay)
    assert fock.max_abs(fock.commutator(bs.operator, ntot)) < 1e-12
    tms = H.tms_drive(trap2, "a", "b", 1.0, 0.3, layout=lay)
    ndiff = fock.number("a", lay) - fock.number("b", lay)
    assert fock.max_abs(fock.commutator(tms.operator, ndiff)) < 1e-12


@pytest.mark.parametrize("kind", ["displacement", "squeezer"])
def test_analyze_recovers_rate_and_phase(kind, trap1):
    cfg = H.drive_config(kind, "a", 0.3, 1.1, 1.0, trap1)
    info = H.analyze_tones(cfg, trap1)
    assert info.rabi == pytest.approx(0.3)
    assert info.kind == kind


def test_unequal_intensities_rejected(trap1):
    cfg = H.drive_config("displacement", "a", 0.3, 0.0, 1.0, trap1)
    t0, t1 = cfg.tones
    bad = H.DriveConfig((t0, H.LaserTone(t1.detuning, t1.phase, 0.5)), 1.0, "displacement", ("a",))
    with pytest.raises(DriveError, match="unequal"):
        H.analyze_tones(bad, trap1)


def test_identical_modes_rejected(trap2):
    with pytest.raises(LayoutError, match="identical"):
        H.drive_config("beamsplitter", ("a", "a"), 1.0, 0.0, 1.0, trap2)


def test_wrong_mode_count_rejected(trap2):
    tones = H.toolbox_tones("beamsplitter", ("a", "b"), 1.0, 0.0, trap2)
    with pytest.raises(DriveError):
        H.analyze_tones(H.DriveConfig(tones, 1.0, "beamsplitter", ("a",)), trap2)


def test_lamb_dicke_override(trap2):
    cfg = H.drive_config("fourier", ("a",), 1.0, 0.0, 1.0, trap2, lamb_dicke_override={"b": 0.0})
    assert cfg.etas(trap2) == (0.05, 0.0)
    with pytest.raises(DriveError):
        H.drive_config("fourier", ("a",), 1.0, 0.0, 1.0, trap2, lamb_dicke_override={"b": -1}).etas(trap2)


@pytest.mark.parametrize("kind,modes", [("displacement", ("a",)), ("squeezer", ("a",)),
                                        ("beamsplitter", ("a", "b")), ("tms", ("a", "b")),
                                        ("conditional", ("a", "b")), ("blue", ("a",)), ("red", ("b",))])
def test_secular_part_matches_rwa(kind, modes):
    trap = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 3, guard=1)
    lay = trap.layout()
    cfg = H.drive_config(kind, modes, 0.2, 0.6, 1.0, trap)
    full = H.full_timedep(cfg, trap, lay)
    rwa = H.rwa_from_config(cfg, trap, lay)
    diff = full.secular_part().matrix - rwa.effective_coupling * rwa.operator.matrix
    assert np.abs(diff).max() < 1e-12


def test_fourier_secular_part_is_rwa_plus_carrier():
    trap = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 3, guard=1)
    lay = trap.layout()
    cfg = H.drive_config("fourier", ("a", "b"), 0.2, 0.6, 1.0, trap)
    sec = H.full_timedep(cfg, trap, lay).secular_part().matrix
    rwa = H.rwa_from_config(cfg, trap, lay)
    car = H.carrier(trap, 0.2, 0.6, lay)
    expect = rwa.effective_coupling * rwa.operator.matrix + car.effective_coupling * car.operator.matrix
    assert np.abs(sec - expect).max() < 1e-12


def test_full_hamiltonian_is_hermitian(trap2):
    lay = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 3, guard=1).layout()
    trap = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 3, guard=1)
    cfg = H.drive_config("conditional", ("a", "b"), 0.2, 0.6, 1.0, trap)
    full = H.full_timedep(cfg, trap, lay)
    for t in (0.0, 0.37, 5.1):
        assert full(t).hermiticity_error() < 1e-14
        psi = np.arange(lay.total_dim, dtype=complex)
        assert np.allclose(full.apply(t, psi), full(t).matrix @ psi)
    assert full.norm_bound > 0
