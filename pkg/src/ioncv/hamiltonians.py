"""Laser-drive Hamiltonians in the interaction picture.

Two families live here:

* RWA builders (``carrier``, ``sideband``, ``displacement_drive``, ...) that
  return the time-independent resonant Hamiltonian of each toolbox gate
  together with its Lamb-Dicke coupling prefactor. The evolution operator is
  always ``exp(-i * coupling * H * t)``.
* ``full_timedep`` which keeps every term of the second-order Lamb-Dicke
  expansion with its oscillating phase, for validating the RWA.

Tone convention: a tone ``(detuning, phase, rabi)`` contributes
``rabi/2 * exp(-i phase) * exp(-i detuning t) * sigma_+ * M(t) + h.c.`` where
``M(t) = (1 - sum eta^2) + sum eta_s X_s(t) - sum eta_s^2 Y_s(t)
- 2 sum eta_s eta_s' X_s(t) X_s'(t)``, ``X_s(t) = s e^{-i w_s t} + h.c.`` and
``Y_s(t) = s^dag s + s^2 e^{-2i w_s t} + s^dag^2 e^{2i w_s t}``. Bichromatic
toolbox drives therefore use tones of Rabi frequency ``2 * Omega`` so that
the resonant part has the gate rate ``Omega``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import DriveError, LayoutError
from .fock import HilbertLayout, LinearOperator, TrapSpec

GAUSSIAN_KINDS = ("displacement", "squeezer", "fourier", "beamsplitter", "tms", "conditional")
SIDEBAND_KINDS = ("blue", "red")
ALL_KINDS = ("carrier",) + GAUSSIAN_KINDS + SIDEBAND_KINDS
TWO_MODE_KINDS = ("beamsplitter", "tms", "conditional")
INTENSITY_RTOL = 1e-9


def wrap_phase(phi: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = float(np.angle(np.exp(1j * phi)))
    return np.pi if np.isclose(w, -np.pi, atol=1e-15) else w


@dataclass(frozen=True)
class LaserTone:
    detuning: float
    phase: float
    rabi: float

    def __post_init__(self):
        if not self.rabi > 0:
            raise DriveError("tone Rabi frequency must be positive")


@dataclass(frozen=True)
class QubitPrep:
    """Qubit preparation in the ``sign`` eigenstate of ``sigma_angle``.

    ``angle=None`` selects ``sigma_z`` (``+`` is ``|e>``, ``-`` is ``|g>``).
    """

    angle: Optional[float]
    sign: int = +1

    def vector(self) -> np.ndarray:
        if self.angle is None:
            return np.array([0, 1] if self.sign >= 0 else [1, 0], dtype=complex)
        return fock.qubit_eigenstate(self.angle, self.sign)


@dataclass(frozen=True)
class DriveConfig:
    """A laser drive: tone set, duration and bookkeeping tags.

    ``lamb_dicke_override`` maps mode ids to the effective eta seen by this
    beam (a zero switches the mode off, which models the propagation
    direction).
    """

    tones: tuple
    duration: float
    kind: str
    modes: tuple = ()
    qubit_prep: Optional[QubitPrep] = None
    lamb_dicke_override: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(self.tones))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.lamb_dicke_override is not None:
            ov = self.lamb_dicke_override
            items = ov.items() if isinstance(ov, dict) else ov
            object.__setattr__(self, "lamb_dicke_override", tuple(sorted(items)))
        if self.kind not in ALL_KINDS:
            raise DriveError(f"unknown drive kind {self.kind!r}")
        if not 1 <= len(self.tones) <= 4:
            raise DriveError("a drive has 1 to 4 tones")
        if self.duration < 0:
            raise DriveError("duration must be non-negative")

    def etas(self, trap: TrapSpec) -> tuple:
        etas = list(trap.lamb_dicke)
        for mode, eta in self.lamb_dicke_override or ():
            if eta < 0:
                raise DriveError("Lamb-Dicke override must be >= 0")
            etas[fock._mode_pos(mode, trap.n_modes)] = float(eta)
        return tuple(etas)


@dataclass(frozen=True, eq=False)
class RwaHamiltonian:
    """Resonant Hamiltonian of one toolbox drive.

    ``coupling_order`` records the Lamb-Dicke power per mode that
    ``effective_coupling`` carries (two-mode kinds also carry a factor 2).
    """

    operator: LinearOperator
    gate_kind: str
    modes: tuple
    effective_coupling: float
    coupling_order: tuple
    rabi: float
    phase: float
    axis: Optional[float] = None

    @property
    def layout(self) -> HilbertLayout:
        return self.operator.layout


def _layout(trap: TrapSpec, layout: Optional[HilbertLayout]) -> HilbertLayout:
    return trap.layout() if layout is None else layout


def _eta(trap, mode, etas):
    return (etas or trap.lamb_dicke)[fock._mode_pos(mode, trap.n_modes)]


def _ops(layout, mode):
    a = fock.annihilation(mode, layout)
    return a, a.dag()


def _distinct(mode_a, mode_b, layout):
    if layout.mode_index(mode_a) == layout.mode_index(mode_b):
        raise LayoutError("two-mode drive needs distinct modes (identical modes given)")


# -- RWA builders ------------------------------------------------------------

def carrier(trap: TrapSpec, rabi: float, phase: float = 0.0, layout=None, etas=None) -> RwaHamiltonian:
    """``1/2 Omega' sigma_phi`` with ``Omega' = (1 - sum eta^2) Omega``."""
    layout = _layout(trap, layout)
    eff = (1.0 - sum(e * e for e in (etas or trap.lamb_dicke))) * rabi
    op = fock.pauli(phase, layout) * (0.5 * eff)
    return RwaHamiltonian(op, "carrier", (), 1.0, (), eff, phase, phase)


def sideband(trap, mode, color: str, rabi: float, phase: float = 0.0, layout=None, etas=None):
    """Blue: ``Omega/2 (e^{-i phi} sigma_+ s^dag + h.c.)``; red swaps ``s`` and ``s^dag``."""
    layout = _layout(trap, layout)
    s, sd = _ops(layout, mode)
    sp_ = fock.pauli("+", layout) * np.exp(-1j * phase)
    if color == "blue":
        term = sp_ @ sd
    elif color == "red":
        term = sp_ @ s
    else:
        raise DriveError(f"sideband color must be 'blue' or 'red', got {color!r}")
    op = (term + term.dag()) * (0.5 * rabi)
    name = layout.modes[layout.mode_index(mode)]
    return RwaHamiltonian(op, color, (name,), _eta(trap, mode, etas), ((name, 1),), rabi, phase)


def displacement_drive(trap, mode, rabi, phase, layout=None, etas=None,
                       paper_eta_power=False, amp_phase=None):
    """``i sigma_{phi - pi/2} (A s^dag - A* s)`` with ``A = Omega e^{i(phi - pi/2)}``.

    The coupling is ``eta`` by default; ``paper_eta_power`` selects ``eta^2``.
    ``amp_phase`` overrides the phase of ``A`` (defaults to ``phi - pi/2``).
    """
    layout = _layout(trap, layout)
    s, sd = _ops(layout, mode)
    axis = phase - np.pi / 2
    amp = rabi * np.exp(1j * (axis if amp_phase is None else amp_phase))
    op = (fock.pauli(axis, layout) @ (sd * amp - s * np.conj(amp))) * 1j
    name = layout.modes[layout.mode_index(mode)]
    power = 2 if paper_eta_power else 1
    eta = _eta(trap, mode, etas)
    return RwaHamiltonian(op, "displacement", (name,), eta ** power, ((name, power),),
                          rabi, phase, axis)


def squeezer_drive(trap, mode, rabi, phase, layout=None, etas=None, amp_phase=None):
    """``i sigma_phi (X* s^2 - X s^dag^2)`` with ``X = Omega e^{i(phi - pi/2)}``; coupling eta^2."""
    layout = _layout(trap, layout)
    s, sd = _ops(layout, mode)
    amp = rabi * np.exp(1j * (phase - np.pi / 2 if amp_phase is None else amp_phase))
    op = (fock.pauli(phase, layout) @ (s @ s * np.conj(amp) - sd @ sd * amp)) * 1j
    name = layout.modes[layout.mode_index(mode)]
    eta = _eta(trap, mode, etas)
    return RwaHamiltonian(op, "squeezer", (name,), eta ** 2, ((name, 2),), rabi, phase, phase)


def fourier_drive(trap, modes, rabi, phase, layout=None, etas=None):
    """``-1/2 Omega sigma_phi sum_s (eta_s/eta_ref)^2 n_s``; coupling ``eta_ref^2``.

    The minus sign comes from the second-order term of the expansion, so that
    on ``|+>_phi`` the evolution is ``exp(+i theta n)`` with
    ``theta = eta^2 Omega t / 2``. ``eta_ref`` is the first listed mode.
    """
    layout = _layout(trap, layout)
    if isinstance(modes, (str, int)):
        modes = (modes,)
    names = tuple(layout.modes[layout.mode_index(m)] for m in modes)
    ref = _eta(trap, names[0], etas)
    gen = sum(
        (fock.number(m, layout) * (_eta(trap, m, etas) / ref) ** 2 for m in names[1:]),
        fock.number(names[0], layout),
    )
    op = (fock.pauli(phase, layout) @ gen) * (-0.5 * rabi)
    return RwaHamiltonian(op, "fourier", names, ref ** 2, tuple((m, 2) for m in names),
                          rabi, phase, phase)


def _two_mode(trap, mode_a, mode_b, layout, etas):
    _distinct(mode_a, mode_b, layout)
    names = tuple(layout.modes[layout.mode_index(m)] for m in (mode_a, mode_b))
    coupling = 2.0 * _eta(trap, mode_a, etas) * _eta(trap, mode_b, etas)
    return names, coupling, ((names[0], 1), (names[1], 1))


def beamsplitter_drive(trap, mode_a, mode_b, rabi, phase, layout=None, etas=None, mode_phase=None):
    """``Omega sigma_phi (e^{-i mu} a b^dag + e^{i mu} a^dag b)``; coupling ``2 eta_a eta_b``.

    ``mu`` defaults to the laser phase ``phi``.
    """
    layout = _layout(trap, layout)
    names, coupling, order = _two_mode(trap, mode_a, mode_b, layout, etas)
    mu = phase if mode_phase is None else mode_phase
    a, ad = _ops(layout, mode_a)
    b, bd = _ops(layout, mode_b)
    gen = a @ bd * np.exp(-1j * mu) + ad @ b * np.exp(1j * mu)
    op = fock.pauli(phase, layout) @ gen * rabi
    return RwaHamiltonian(op, "beamsplitter", names, coupling, order, rabi, phase, phase)


def tms_drive(trap, mode_a, mode_b, rabi, phase, layout=None, etas=None, mode_phase=None):
    """``Omega sigma_phi (e^{-i mu} a b + e^{i mu} a^dag b^dag)``; coupling ``2 eta_a eta_b``."""
    layout = _layout(trap, layout)
    names, coupling, order = _two_mode(trap, mode_a, mode_b, layout, etas)
    mu = phase if mode_phase is None else mode_phase
    a, ad = _ops(layout, mode_a)
    b, bd = _ops(layout, mode_b)
    gen = a @ b * np.exp(-1j * mu) + ad @ bd * np.exp(1j * mu)
    op = fock.pauli(phase, layout) @ gen * rabi
    return RwaHamiltonian(op, "tms", names, coupling, order, rabi, phase, phase)


def conditional_drive(trap, mode_a, mode_b, rabi, phase, layout=None, etas=None, quad_phase=None):
    """``Omega sigma_phi x_a x_{phi,b}``; coupling ``2 eta_a eta_b``.

    ``quad_phase`` sets the rotated target quadrature (defaults to ``phi``).
    """
    layout = _layout(trap, layout)
    names, coupling, order = _two_mode(trap, mode_a, mode_b, layout, etas)
    mu = phase if quad_phase is None else quad_phase
    xa, _ = fock.quadratures(mode_a, layout)
    xb = fock.rotated_quadrature(mode_b, layout, mu)
    op = fock.pauli(phase, layout) @ xa @ xb * rabi
    return RwaHamiltonian(op, "conditional", names, coupling, order, rabi, phase, phase)


# -- tone sets ---------------------------------------------------------------

def toolbox_tones(kind: str, modes: Sequence, rabi: float, phase: float, trap: TrapSpec) -> tuple:
    """Tone set realising ``kind`` with gate rate ``rabi`` and laser phase ``phase``."""
    modes = tuple(modes)
    w = [trap.freq(m) for m in modes]
    if kind in ("carrier", "fourier"):
        spec = [(0.0, phase, rabi)]
    elif kind == "blue":
        spec = [(w[0], phase, rabi)]
    elif kind == "red":
        spec = [(-w[0], phase, rabi)]
    elif kind == "displacement":
        spec = [(w[0], -np.pi / 2, 2 * rabi), (-w[0], 2 * phase - np.pi / 2, 2 * rabi)]
    elif kind == "squeezer":
        spec = [(2 * w[0], 0.0, 2 * rabi), (-2 * w[0], 2 * phase, 2 * rabi)]
    elif kind in ("beamsplitter", "tms", "conditional"):
        if len(modes) != 2 or modes[0] == modes[1]:
            raise LayoutError("two-mode drive needs distinct modes (identical modes given)")
        diff, tot = w[0] - w[1], w[0] + w[1]
        pair = [(np.pi), (2 * phase + np.pi)]
        if kind == "beamsplitter":
            spec = [(diff, pair[0], 2 * rabi), (-diff, pair[1], 2 * rabi)]
        elif kind == "tms":
            spec = [(tot, pair[0], 2 * rabi), (-tot, pair[1], 2 * rabi)]
        else:
            spec = [(diff, pair[1], 2 * rabi), (-diff, pair[0], 2 * rabi),
                    (tot, pair[0], 2 * rabi), (-tot, pair[1], 2 * rabi)]
    else:
        raise DriveError(f"unknown drive kind {kind!r}")
    return tuple(LaserTone(float(d), wrap_phase(p), float(r)) for d, p, r in spec)


@dataclass(frozen=True)
class ToneAnalysis:
    """Resonant content of a tone set.

    ``axis`` is the qubit Pauli angle the Hamiltonian is proportional to (one
    representative modulo pi), ``mode_phase`` the phase of the motional
    generator and ``rabi`` the gate rate.
    """

    kind: str
    modes: tuple
    rabi: float
    axis: float
    mode_phase: float


def _find(tones, detuning, scale):
    for t in tones:
        if abs(t.detuning - detuning) <= 1e-9 * max(scale, 1.0):
            return t
    return None


def analyze_tones(config: DriveConfig, trap: TrapSpec) -> ToneAnalysis:
    """Check that the tones match the tagged kind and extract the gate rate and phases."""
    kind, modes, tones = config.kind, config.modes, config.tones
    rabis = [t.rabi for t in tones]
    if max(rabis) - min(rabis) > INTENSITY_RTOL * max(rabis):
        raise DriveError("toolbox drives need tones of equal intensity (unequal tone intensities)")
    need = {"carrier": 0, "fourier": 1, "blue": 1, "red": 1, "displacement": 1, "squeezer": 1,
            "beamsplitter": 2, "tms": 2, "conditional": 2}[kind]
    bad = len(modes) < need if kind == "fourier" else len(modes) != need
    if bad:
        raise DriveError(f"{kind} drive needs {need} mode(s), got {modes}")
    if need == 2 and fock._mode_pos(modes[0], trap.n_modes) == fock._mode_pos(modes[1], trap.n_modes):
        raise LayoutError("two-mode drive needs distinct modes (identical modes given)")
    w = [trap.freq(m) for m in modes]
    scale = max(trap.mode_freqs)
    n_tones = {"carrier": 1, "fourier": 1, "blue": 1, "red": 1, "conditional": 4}.get(kind, 2)
    if len(tones) != n_tones:
        raise DriveError(f"{kind} drive needs {n_tones} tone(s), got {len(tones)}")

    def pair(nu):
        t1, t2 = _find(tones, nu, scale), _find(tones, -nu, scale)
        if t1 is None or t2 is None:
            raise DriveError(f"{kind} drive needs a tone pair at +/-{nu:g}")
        return t1.phase, t2.phase

    if kind in ("carrier", "fourier", "blue", "red"):
        nu = {"carrier": 0.0, "fourier": 0.0, "blue": w[0] if w else 0.0,
              "red": -w[0] if w else 0.0}[kind]
        t = _find(tones, nu, scale)
        if t is None:
            raise DriveError(f"{kind} drive needs a tone at detuning {nu:g}")
        return ToneAnalysis(kind, modes, t.rabi, t.phase, t.phase)
    rabi = tones[0].rabi / 2
    if kind == "displacement":
        p1, p2 = pair(w[0])
        axis = (p1 + p2) / 2
        return ToneAnalysis(kind, modes, rabi, axis, axis - p1 - np.pi / 2)
    if kind == "squeezer":
        p1, p2 = pair(2 * w[0])
        axis = (p1 + p2) / 2
        return ToneAnalysis(kind, modes, rabi, axis, axis - p1 - np.pi / 2)
    if kind in ("beamsplitter", "tms"):
        p1, p2 = pair(w[0] - w[1] if kind == "beamsplitter" else w[0] + w[1])
        return ToneAnalysis(kind, modes, rabi, (p1 + p2) / 2 - np.pi, (p2 - p1) / 2)
    # conditional: a beam-splitter pair and a two-mode-squeezer pair sharing one axis
    p1, p2 = pair(w[0] - w[1])
    p3, p4 = pair(w[0] + w[1])
    ax_b, mu_b = (p1 + p2) / 2 - np.pi, (p2 - p1) / 2
    ax_t, mu_t = (p3 + p4) / 2 - np.pi, (p4 - p3) / 2
    d = wrap_phase(ax_t - ax_b)
    if np.isclose(abs(d), np.pi, atol=1e-9):
        ax_t, mu_t = ax_t + np.pi, mu_t + np.pi
    elif abs(d) > 1e-9:
        raise DriveError("conditional drive tone pairs address different qubit axes")
    if abs(wrap_phase(mu_b + mu_t)) > 1e-9:
        raise DriveError("conditional drive tone phases do not form x_a x_phi,b")
    return ToneAnalysis(kind, modes, rabi, ax_b, mu_t)


def rwa_from_config(config: DriveConfig, trap: TrapSpec, layout=None,
                    paper_eta_power=False) -> RwaHamiltonian:
    """RWA Hamiltonian selected by a drive configuration."""
    info = analyze_tones(config, trap)
    etas = config.etas(trap)
    kw = dict(layout=layout, etas=etas)
    m = info.modes
    if config.kind == "carrier":
        return carrier(trap, info.rabi, info.axis, **kw)
    if config.kind in SIDEBAND_KINDS:
        return sideband(trap, m[0], config.kind, info.rabi, info.axis, **kw)
    if config.kind == "fourier":
        return fourier_drive(trap, m, info.rabi, info.axis, **kw)
    if config.kind == "displacement":
        return displacement_drive(trap, m[0], info.rabi, info.axis + np.pi / 2,
                                  paper_eta_power=paper_eta_power, amp_phase=info.mode_phase, **kw)
    if config.kind == "squeezer":
        return squeezer_drive(trap, m[0], info.rabi, info.axis, amp_phase=info.mode_phase, **kw)
    if config.kind == "beamsplitter":
        return beamsplitter_drive(trap, m[0], m[1], info.rabi, info.axis, mode_phase=info.mode_phase, **kw)
    if config.kind == "tms":
        return tms_drive(trap, m[0], m[1], info.rabi, info.axis, mode_phase=info.mode_phase, **kw)
    return conditional_drive(trap, m[0], m[1], info.rabi, info.axis, quad_phase=info.mode_phase, **kw)


# -- full time-dependent Hamiltonian ----------------------------------------

def _sparse_embed(layout: HilbertLayout, factor_ops: dict) -> sp.csr_matrix:
    mats = [sp.identity(d, dtype=complex, format="csr") for d in layout.dims]
    for key, m in factor_ops.items():
        mats[layout.factor_index(key)] = sp.csr_matrix(np.asarray(m, dtype=complex))
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


class TimeDependentHamiltonian:
    """``H(t) = sum_k (e^{-i nu_k t} K_k + h.c.)`` with sparse ``K_k``.

    Calling the object returns the dense LinearOperator at time ``t``;
    ``apply`` gives ``H(t) @ psi`` without densifying.
    """

    def __init__(self, layout: HilbertLayout, terms):
        self.layout = layout
        merged = {}
        for nu, k in terms:
            key = round(float(nu), 9)
            merged[key] = merged[key] + k if key in merged else k
        self.frequencies = np.array(sorted(merged))
        self._k = [merged[nu].tocsr() for nu in self.frequencies]
        self._kh = [k.conj().T.tocsr() for k in self._k]

    def __call__(self, t: float) -> LinearOperator:
        m = sp.csr_matrix((self.layout.total_dim,) * 2, dtype=complex)
        for nu, k, kh in zip(self.frequencies, self._k, self._kh):
            ph = np.exp(-1j * nu * t)
            m = m + k * ph + kh * np.conj(ph)
        return LinearOperator(m.toarray(), self.layout)

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi, dtype=complex)
        for nu, k, kh in zip(self.frequencies, self._k, self._kh):
            ph = np.exp(-1j * nu * t)
            out += ph * (k @ psi) + np.conj(ph) * (kh @ psi)
        return out

    def secular_part(self, tol: float = 1e-9) -> LinearOperator:
        """Time average: the zero-frequency terms."""
        m = np.zeros((self.layout.total_dim,) * 2, dtype=complex)
        for nu, k, kh in zip(self.frequencies, self._k, self._kh):
            if abs(nu) <= tol:
                m += (k + kh).toarray()
        return LinearOperator(m, self.layout)

    @property
    def norm_bound(self) -> float:
        return float(sum(2 * abs(k).sum(axis=1).max() for k in self._k))


def full_timedep(config: DriveConfig, trap: TrapSpec, layout=None) -> TimeDependentHamiltonian:
    """Second-order Lamb-Dicke Hamiltonian of ``config`` with all oscillating terms."""
    layout = _layout(trap, layout)
    etas = config.etas(trap)
    names = layout.modes
    w = trap.mode_freqs
    ladders = {m: fock.ladder_matrix(layout.levels) for m in names}
    num = np.diag(np.arange(layout.levels, dtype=float)).astype(complex)

    # (frequency nu, coefficient, {factor: matrix}) for M(t) = sum c e^{-i nu t} O
    m_terms = [(0.0, 1.0 - sum(e * e for e in etas), {})]
    for i, m in enumerate(names):
        e = etas[i]
        if e == 0:
            continue
        s = ladders[m]
        sd = s.conj().T
        m_terms += [
            (w[i], e, {m: s}), (-w[i], e, {m: sd}),
            (0.0, -e * e, {m: num}), (2 * w[i], -e * e, {m: s @ s}), (-2 * w[i], -e * e, {m: sd @ sd}),
        ]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            c = -2 * etas[i] * etas[j]
            if c == 0:
                continue
            a, b = ladders[names[i]], ladders[names[j]]
            ad, bd = a.conj().T, b.conj().T
            ma, mb = names[i], names[j]
            m_terms += [
                (w[i] + w[j], c, {ma: a, mb: b}), (w[i] - w[j], c, {ma: a, mb: bd}),
                (-(w[i] - w[j]), c, {ma: ad, mb: b}), (-(w[i] + w[j]), c, {ma: ad, mb: bd}),
            ]
    sigma_plus = fock.sigma_matrix("+")
    blocks = [(nu, c, _sparse_embed(layout, {fock.QUBIT: sigma_plus, **ops})) for nu, c, ops in m_terms]
    terms = []
    for tone in config.tones:
        beta = 0.5 * tone.rabi * np.exp(-1j * tone.phase)
        for nu, c, k in blocks:
            terms.append((tone.detuning + nu, beta * c * k))
    return TimeDependentHamiltonian(layout, terms)


def drive_config(kind, modes, rabi, phase, duration, trap, qubit_prep=None,
                 lamb_dicke_override=None) -> DriveConfig:
    """Toolbox drive with tones from :func:`toolbox_tones`."""
    if isinstance(modes, (str, int)):
        modes = (modes,)
    tones = toolbox_tones(kind, modes, rabi, phase, trap)
    return DriveConfig(tones, duration, kind, tuple(modes), qubit_prep, lamb_dicke_override)
