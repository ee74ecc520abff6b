"""Acceptance criteria 1-9, one PASS/FAIL line each (see the summary section)."""

import time
from pathlib import Path

import numpy as np

from ioncv import compiler as C
from ioncv import fock
from ioncv import gates as G
from ioncv import hamiltonians as H
from ioncv import readout as R
from ioncv import schwinger as S
from ioncv.evolution import evolve_static, prepare_qubit, run_gate, state_fidelity

from conftest import eigen_prep, random_state, report

PROGRAMS = sorted((Path(__file__).parent / "programs").glob("*.dsl"))
ONE = fock.TrapSpec((1.0,), 0.05, 20, guard=8)
TWO = fock.TrapSpec((1.0, 0.7), 0.05, 20, guard=8)

# kind, modes, trap, laser phase, five gate durations (rabi = 1)
SWEEPS = [
    ("displacement", ("a",), ONE, 0.9, np.linspace(2, 20, 5)),
    ("squeezer", ("a",), ONE, -0.6, np.linspace(10, 100, 5)),
    ("fourier", ("a",), ONE, 0.0, np.linspace(100, 2000, 5)),
    ("beamsplitter", ("a", "b"), TWO, 1.3, np.linspace(50, 600, 5)),
    ("tms", ("a", "b"), TWO, -2.2, np.linspace(5, 60, 5)),
    ("conditional", ("a", "b"), TWO, 0.4, np.linspace(5, 40, 5)),
]


def _ideal_on(cfg, trap, psi):
    u = G.ideal_unitary(G.laser_to_gate(cfg, trap), psi.layout)
    return fock.StateVector(u.matrix @ psi.amplitudes, psi.layout)


def test_criterion_1_rwa_gate_equivalence():
    start = time.perf_counter()
    worst, worst_purity = 0.0, 1.0
    for kind, modes, trap, phase, durations in SWEEPS:
        lay = trap.layout()
        base = H.drive_config(kind, modes, 1.0, phase, 1.0, trap)
        rwa = H.rwa_from_config(base, trap, lay)
        motion = fock.basis_state("g", [1] + [0] * (trap.n_modes - 1), lay)
        for i, t in enumerate(durations):
            sign = 1 if i % 2 == 0 else -1
            cfg = H.DriveConfig(base.tones, float(t), kind, modes, eigen_prep(base, trap, sign))
            psi = prepare_qubit(motion, cfg.qubit_prep)
            got = evolve_static(rwa.operator, rwa.effective_coupling, t, psi).final_state
            worst = max(worst, 1 - state_fidelity(got, _ideal_on(cfg, trap, psi)))
            worst_purity = min(worst_purity, fock.qubit_separability(got))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 30
    report(1, ok, f"RWA evolution vs ideal gate, 6 kinds x 5 points at N=20: worst infidelity {worst:.2e}, "
                  f"{elapsed:.1f} s")
    assert ok


def test_criterion_2_qubit_factorisation():
    trap = fock.TrapSpec((1.0, 0.7), 0.05, 10, guard=4)
    lay = trap.layout()
    motion = fock.product_state("g", [np.array([0.6, 0.8]), np.array([0.8, 0, 0.6])], lay)
    purities = {}
    for kind, modes, _, phase, durations in SWEEPS:
        base = H.drive_config(kind, modes, 1.0, phase, float(durations[1]) / 2, trap)
        cfg = H.DriveConfig(base.tones, base.duration, kind, modes, eigen_prep(base, trap))
        purities[kind] = run_gate(cfg, trap, motion, "rwa", check_separability=False).qubit_purity
    side = {}
    sup = fock.product_state(fock.qubit_eigenstate(0.0), [np.array([0.6, 0.8])], lay)
    for color in ("blue", "red"):
        cfg = H.drive_config(color, "a", 1.0, 0.0, np.pi / 2 / 0.05, trap)
        side[color] = run_gate(cfg, trap, sup, "rwa").qubit_purity
    gmin = min(purities.values())
    smax = max(side.values())
    ok = gmin >= 1 - 1e-9 and smax < 1 - 1e-3
    report(2, ok, f"min reduced-qubit purity after Gaussian gates {gmin:.12f}; "
                  f"sideband purities blue {side['blue']:.4f} red {side['red']:.4f}")
    assert ok


def test_criterion_3_beamsplitter_swap_and_schwinger():
    trap = fock.TrapSpec((1.0, 0.7), 0.05, 6, guard=4)
    lay = trap.layout()
    t = np.pi / (4 * 0.05 * 0.05)  # mixing angle pi/2
    base = H.drive_config("beamsplitter", ("a", "b"), 1.0, 0.7, t, trap)
    cfg = H.DriveConfig(base.tones, t, "beamsplitter", ("a", "b"), eigen_prep(base, trap))
    assert abs(abs(G.laser_to_gate(cfg, trap).mix_angle) - np.pi / 2) < 1e-12
    rep = run_gate(cfg, trap, fock.basis_state("g", [1, 0], lay), "rwa")
    p_swap = float(rep.final_state.populations()[0, 1])
    dev = max(S.verify_bs_rotation(mu, th, ("a", "b"), lay, 4)
              for mu in (0.0, 0.7, -2.1) for th in (0.2, np.pi / 2, 2.5))
    ok = p_swap >= 1 - 1e-8 and dev < 1e-9
    report(3, ok, f"|1,0> -> |0,1> probability {p_swap:.12f}; worst Schwinger block deviation {dev:.1e}")
    assert ok


def test_criterion_4_two_mode_squeezed_vacuum():
    trap = fock.TrapSpec((1.0, 0.7), 0.05, 25, guard=8)
    lay = trap.layout()
    r = 0.3
    t = r / (2 * 0.05 * 0.05)
    base = H.drive_config("tms", ("a", "b"), 1.0, 0.3, t, trap)
    cfg = H.DriveConfig(base.tones, t, "tms", ("a", "b"), eigen_prep(base, trap))
    assert abs(abs(G.laser_to_gate(cfg, trap).tms_param) - r) < 1e-12
    pops = run_gate(cfg, trap, fock.basis_state("g", [0, 0], lay), "rwa").final_state.populations()
    diag = np.array([pops[n, n] for n in range(4)])
    oracle = np.tanh(r) ** (2 * np.arange(4))
    err = float(np.max(np.abs(diag / diag[0] - oracle)))
    off = float(pops.sum() - np.trace(pops))
    ok = err <= 1e-6 and off < 1e-10
    report(4, ok, f"P(n,n)/P(0,0) vs tanh^2n r (n<=3) max error {err:.1e}; off-diagonal population {off:.1e}")
    assert ok


def _full_mode_infidelity(ratio):
    eta, alpha = 0.05, 0.25
    trap = fock.TrapSpec((1.0,), eta, 6, guard=4)
    lay = trap.layout()
    rabi = ratio * 1.0
    t = alpha / (eta * rabi)
    base = H.drive_config("displacement", "a", rabi, np.pi / 2, t, trap)
    cfg = H.DriveConfig(base.tones, t, "displacement", ("a",), eigen_prep(base, trap))
    vac = fock.basis_state("g", [0], lay)
    rep = run_gate(cfg, trap, vac, "full", tol=1e-10)
    return 1 - state_fidelity(rep.final_state, _ideal_on(cfg, trap, prepare_qubit(vac, cfg.qubit_prep)))


def test_criterion_5_full_time_dependent_validation():
    start = time.perf_counter()
    infid = {r: _full_mode_infidelity(r) for r in (0.02, 0.01, 0.005)}
    elapsed = time.perf_counter() - start
    monotone = infid[0.02] > infid[0.01] > infid[0.005]
    ok = infid[0.01] <= 1e-3 and monotone and elapsed < 300
    report(5, ok, "full-drive infidelity at Omega/omega = 0.02, 0.01, 0.005: "
                  + ", ".join(f"{v:.2e}" for v in infid.values()) + f" (monotone {monotone}, {elapsed:.1f} s)")
    assert ok


def test_criterion_6_readout_round_trip():
    trap = fock.TrapSpec((7.0, 5.0, 4.0), (0.1, 0.11, 0.12), 4, guard=0)
    rng = np.random.default_rng(11)
    labels = [tuple(int(v) for v in rng.integers(0, 5, 3)) for _ in range(6)] + [(4, 4, 4), (0, 0, 0)]
    w = rng.random(len(labels))
    pops = {}
    for l, p in zip(labels, w / w.sum()):
        pops[l] = pops.get(l, 0.0) + p
    est = R.infer_populations(R.simulate_rabi(pops, trap, 1.0, 6000.0, 2.0), trap, 4)
    linf = max(abs(est.populations.get(l, 0.0) - pops.get(l, 0.0)) for l in est.populations)
    one_mode = fock.TrapSpec((1.0,), 0.05, 4, guard=0)
    lay = one_mode.layout()
    w_vac = R.parity_protocol(fock.basis_state("g", [0], lay), one_mode, 1.0).w_estimate
    w_one = R.parity_protocol(fock.basis_state("g", [1], lay), one_mode, 1.0).w_estimate
    perr = max(abs(w_vac - 2 / np.pi), abs(w_one + 2 / np.pi))
    ok = linf <= 1e-3 and perr <= 2e-3
    report(6, ok, f"population inference l_inf error {linf:.1e}; parity W(0) vacuum {w_vac:.6f}, "
                  f"|1> {w_one:.6f} (max error {perr:.1e})")
    assert ok


def test_criterion_7_paper_arithmetic():
    q100 = C.capacity(phonons=100).equivalent_qubits
    c_eta = C.capacity(eta=1e-3)
    q_len = C.capacity(length_ratio=1e4).equivalent_qubits
    spec = C.spectrum_check((7.0, 5.0, 4.0))
    ok = (round(q100) == 20 and c_eta.dim_paper == 10 ** 12 and round(c_eta.equivalent_qubits) == 40
          and round(q_len) == 80 and len(spec.detunings) == 12 and abs(spec.min_gap - 1.0) < 1e-12)
    report(7, ok, f"qubits: N=100 -> {q100:.2f}, eta=1e-3 -> D={c_eta.dim_paper:.0e}, "
                  f"{c_eta.equivalent_qubits:.2f}, l/x=1e4 -> {q_len:.2f}; 7:5:4 spectrum "
                  f"{len(spec.detunings)} lines, min gap {spec.min_gap:g}")
    assert ok


def test_criterion_8_compiler_round_trip():
    worst, identical = 0.0, True
    for path in PROGRAMS:
        text = path.read_text()
        a = C.schedule_to_json(C.compile_program(C.parse_program(text)))
        b = C.schedule_to_json(C.compile_program(C.parse_program(text)))
        identical &= a == b == path.with_suffix(".json").read_text()
        identical &= C.schedule_to_json(C.schedule_from_json(a)) == a
        _, results = C.execute(C.schedule_from_json(a))
        worst = max([worst] + [1 - r.fidelity for r in results])
    ok = identical and worst <= 1e-8 and len(PROGRAMS) >= 5
    report(8, ok, f"{len(PROGRAMS)} golden programs: byte-identical {identical}; worst step infidelity {worst:.1e}")
    assert ok


def test_criterion_9_numerical_hygiene():
    rng = np.random.default_rng(2024)
    trap = fock.TrapSpec((1.0, 0.7), (0.05, 0.06), 5, guard=3)
    lay = trap.layout()
    kinds = [("carrier", ()), ("displacement", ("a",)), ("squeezer", ("b",)), ("fourier", ("a",)),
             ("blue", ("a",)), ("red", ("b",)), ("beamsplitter", ("a", "b")), ("tms", ("b", "a")),
             ("conditional", ("a", "b"))]
    herm = unit = drift = leak = 0.0
    low = ~lay.guard_mask
    for _ in range(10):
        for kind, modes in kinds:
            phase = rng.uniform(-np.pi, np.pi)
            rwa = H.rwa_from_config(H.drive_config(kind, modes, rng.uniform(0.1, 2), phase, 1.0, trap), trap, lay)
            herm = max(herm, rwa.operator.hermiticity_error())
            rep = evolve_static(rwa.operator, rwa.effective_coupling, rng.uniform(0, 20), random_state(lay, rng))
            drift = max(drift, rep.norm_drift)
        gates = [G.displacement(complex(*rng.normal(0, 0.05, 2)), "a", lay),
                 G.squeezer(complex(*rng.normal(0, 0.005, 2)), "b", lay),
                 G.fourier(rng.uniform(-np.pi, np.pi), "a", lay),
                 G.beamsplitter(rng.uniform(-3, 3), rng.uniform(-3, 3), ("a", "b"), lay),
                 G.two_mode_squeezer(complex(*rng.normal(0, 0.005, 2)), ("a", "b"), lay),
                 G.controlled_displacement(rng.normal(0, 0.005), "a", "b", lay)]
        for u in gates:
            m = u.matrix
            unit = max(unit, np.abs((m.conj().T @ m - np.eye(m.shape[0]))[np.ix_(low, low)]).max())
            v = fock.basis_state("g", [0, 0], lay)
            leak = max(leak, fock.StateVector(m @ v.amplitudes, lay).leak)
    ok = herm <= 1e-10 and unit < 1e-9 and drift < 1e-8 and leak < fock.DEFAULT_LEAK_TOL
    report(9, ok, f"Hermiticity {herm:.1e}, unitarity {unit:.1e}, norm drift {drift:.1e}, "
                  f"guard leak {leak:.1e} over 90 drives and 60 gates (property suite in test_properties.py)")
    assert ok
