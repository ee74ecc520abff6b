"""Ideal toolbox unitaries and the map from laser drives to gate parameters.

Gate definitions (``s`` is the mode's annihilation operator):

========================  ==============================================
displacement(alpha)       ``exp(alpha s^dag - alpha* s)``
squeezer(xi)              ``exp(xi* s^2 - xi s^dag^2)``
fourier(theta)            ``exp(i theta s^dag s)``
beamsplitter(th, mu)      ``exp(-i th (e^{-i mu} a b^dag + e^{i mu} a^dag b))``
two_mode_squeezer(zeta)   ``exp(zeta* a b - zeta a^dag b^dag)``
controlled_displacement   ``exp(-i g x_a x_{phi,b})`` (``phi = pi/2`` gives ``x_a p_b``)
========================  ==============================================

The squeezer carries no factor 1/2, so ``S(xi)`` squeezes the quadrature
``x_theta`` (``xi = r e^{2 i theta}``) by ``e^{-2r}`` in amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from . import fock
from .errors import DriveError, LayoutError, TruncationError
from .fock import DEFAULT_LEAK_TOL, HilbertLayout, LinearOperator
from .hamiltonians import (
    DriveConfig,
    GAUSSIAN_KINDS,
    analyze_tones,
    wrap_phase,
)


@dataclass(frozen=True)
class GateParams:
    kind: str
    modes: tuple
    alpha: Optional[complex] = None
    xi: Optional[complex] = None
    theta: Optional[tuple] = None
    mix_angle: Optional[float] = None
    mix_phase: Optional[float] = None
    tms_param: Optional[complex] = None
    cond_strength: Optional[float] = None
    cond_phase: Optional[float] = None
    area: Optional[float] = None
    phase: Optional[float] = None

    _FIELDS = {
        "displacement": ("alpha",),
        "squeezer": ("xi",),
        "fourier": ("theta",),
        "beamsplitter": ("mix_angle", "mix_phase"),
        "tms": ("tms_param",),
        "conditional": ("cond_strength", "cond_phase"),
        "blue": ("area", "phase"),
        "red": ("area", "phase"),
        "carrier": ("area", "phase"),
    }

    def __post_init__(self):
        if self.kind not in self._FIELDS:
            raise DriveError(f"unknown gate kind {self.kind!r}")
        wanted = set(self._FIELDS[self.kind])
        for name in {f for fs in self._FIELDS.values() for f in fs}:
            is_set = getattr(self, name) is not None
            if is_set != (name in wanted):
                raise DriveError(f"{self.kind} gate: field {name!r} {'missing' if not is_set else 'not allowed'}")


def _mode_space(layout: HilbertLayout, modes) -> tuple:
    idx = [layout.mode_index(m) for m in modes]
    if len(set(idx)) != len(idx):
        raise LayoutError("gate needs distinct modes (identical modes given)")
    return tuple(layout.modes[i] for i in idx)


def _embed_modes(layout: HilbertLayout, names: tuple, u: np.ndarray) -> LinearOperator:
    """Embed a unitary acting on the listed modes (in that order) into the full space."""
    lv = layout.levels
    k = len(names)
    pos = [layout.factor_index(m) for m in names]
    if k == 1:
        return fock.embed(layout, {names[0]: u})
    # build on qubit ⊗ all modes by permuting axes of the small tensor
    dims = layout.dims
    rest = [i for i in range(len(dims)) if i not in pos]
    d_rest = int(np.prod([dims[i] for i in rest]))
    big = np.kron(u, np.eye(d_rest, dtype=complex))
    order = pos + rest
    t = big.reshape([lv] * k + [dims[i] for i in rest] + [lv] * k + [dims[i] for i in rest])
    inv = np.argsort(order)
    n = len(dims)
    t = np.transpose(t, list(inv) + [n + i for i in inv])
    return LinearOperator(t.reshape(layout.total_dim, layout.total_dim), layout)


def _ladder(levels):
    a = fock.ladder_matrix(levels)
    return a, a.conj().T


def _check_leak(u: np.ndarray, layout: HilbertLayout, k: int, leak_tol: float, what: str):
    """Population that the gate pushes from vacuum into the guard band."""
    lv = layout.levels
    col = u[:, 0].reshape([lv] * k)
    grids = np.indices(col.shape)
    mask = np.any(grids > layout.cutoff, axis=0)
    leak = float(np.sum(np.abs(col[mask]) ** 2))
    if leak > leak_tol:
        raise TruncationError(
            f"{what} too strong for truncation N={layout.cutoff}: guard-band leak {leak:.2e} > {leak_tol:.0e}",
            leak=leak,
        )
    return leak


def displacement(alpha, mode, layout: HilbertLayout, leak_tol=DEFAULT_LEAK_TOL) -> LinearOperator:
    names = _mode_space(layout, [mode])
    a, ad = _ladder(layout.levels)
    u = fock.expi_hermitian(1j * (alpha * ad - np.conj(alpha) * a))
    _check_leak(u, layout, 1, leak_tol, "displacement amplitude")
    return _embed_modes(layout, names, u)


def squeezer(xi, mode, layout: HilbertLayout, leak_tol=DEFAULT_LEAK_TOL) -> LinearOperator:
    names = _mode_space(layout, [mode])
    a, ad = _ladder(layout.levels)
    u = fock.expi_hermitian(1j * (np.conj(xi) * a @ a - xi * ad @ ad))
    _check_leak(u, layout, 1, leak_tol, "squeezing")
    return _embed_modes(layout, names, u)


def fourier(theta, mode, layout: HilbertLayout) -> LinearOperator:
    names = _mode_space(layout, [mode])
    u = np.diag(np.exp(1j * theta * np.arange(layout.levels)))
    return _embed_modes(layout, names, u)


def beamsplitter(mix_angle, mix_phase, modes, layout: HilbertLayout) -> LinearOperator:
    names = _mode_space(layout, modes)
    if len(names) != 2:
        raise LayoutError("beam splitter acts on two modes")
    a, ad = _ladder(layout.levels)
    g = np.exp(-1j * mix_phase) * np.kron(a, ad) + np.exp(1j * mix_phase) * np.kron(ad, a)
    return _embed_modes(layout, names, fock.expi_hermitian(mix_angle * g))


def two_mode_squeezer(tms_param, modes, layout: HilbertLayout, leak_tol=DEFAULT_LEAK_TOL) -> LinearOperator:
    names = _mode_space(layout, modes)
    if len(names) != 2:
        raise LayoutError("two-mode squeezer acts on two modes")
    a, ad = _ladder(layout.levels)
    g = np.conj(tms_param) * np.kron(a, a) - tms_param * np.kron(ad, ad)
    u = fock.expi_hermitian(1j * g)
    _check_leak(u, layout, 2, leak_tol, "two-mode squeezing")
    return _embed_modes(layout, names, u)


def controlled_displacement(strength, control_mode, target_mode, layout: HilbertLayout,
                            phase=np.pi / 2, leak_tol=DEFAULT_LEAK_TOL) -> LinearOperator:
    """``exp(-i strength x_control x_{phase,target})``."""
    names = _mode_space(layout, [control_mode, target_mode])
    a, ad = _ladder(layout.levels)
    x = a + ad
    xphi = np.exp(-1j * phase) * a + np.exp(1j * phase) * ad
    u = fock.expi_hermitian(strength * np.kron(x, xphi))
    _check_leak(u, layout, 2, leak_tol, "controlled displacement")
    return _embed_modes(layout, names, u)


def sideband_pulse(color, area, phase, mode, layout: HilbertLayout) -> LinearOperator:
    """``exp(-i area H_sb)`` with ``H_sb = 1/2 (e^{-i phase} sigma_+ s^dag + h.c.)`` (blue)."""
    mode_name = _mode_space(layout, [mode])[0]
    a = fock.annihilation(mode_name, layout)
    op = a.dag() if color == "blue" else a
    term = fock.pauli("+", layout) @ op * np.exp(-1j * phase)
    h = (term + term.dag()).matrix * 0.5
    return LinearOperator(fock.expi_hermitian(area * h), layout)


def carrier_pulse(area, phase, layout: HilbertLayout) -> LinearOperator:
    """``exp(-i area sigma_phase / 2)`` on the qubit."""
    return fock.embed(layout, {fock.QUBIT: expm(-0.5j * area * fock.sigma_matrix(phase))})


def ideal_unitary(params: GateParams, layout: HilbertLayout, leak_tol=DEFAULT_LEAK_TOL) -> LinearOperator:
    k, m = params.kind, params.modes
    if k == "displacement":
        return displacement(params.alpha, m[0], layout, leak_tol)
    if k == "squeezer":
        return squeezer(params.xi, m[0], layout, leak_tol)
    if k == "fourier":
        u = fock.identity(layout)
        for mode, th in params.theta:
            u = fourier(th, mode, layout) @ u
        return u
    if k == "beamsplitter":
        return beamsplitter(params.mix_angle, params.mix_phase, m, layout)
    if k == "tms":
        return two_mode_squeezer(params.tms_param, m, layout, leak_tol)
    if k == "conditional":
        return controlled_displacement(params.cond_strength, m[0], m[1], layout,
                                       params.cond_phase, leak_tol)
    if k in ("blue", "red"):
        return sideband_pulse(k, params.area, params.phase, m[0], layout)
    return carrier_pulse(params.area, params.phase, layout)


def eigen_sign(axis: float, prep) -> int:
    """Eigenvalue of ``sigma_axis`` on the prepared qubit state (+1 if no prep given)."""
    if prep is None:
        return 1
    if prep.angle is None:
        raise DriveError("a sigma_z qubit prep is not an eigenstate of an equatorial drive axis")
    d = wrap_phase(prep.angle - axis)
    if abs(d) < 1e-9:
        return 1 if prep.sign >= 0 else -1
    if abs(abs(d) - np.pi) < 1e-9:
        return -1 if prep.sign >= 0 else 1
    raise DriveError(
        f"qubit prep at angle {prep.angle:.6g} is not an eigenstate of sigma_{axis:.6g}"
    )


def laser_to_gate(config: DriveConfig, trap, paper_eta_power=False) -> GateParams:
    """Ideal gate parameters realised by ``config`` acting on its prepared qubit.

    The mapping uses the coupling conventions of the RWA builders: eta for
    displacements (eta^2 with ``paper_eta_power``), eta^2 for squeezers and
    Fourier gates, and ``2 eta_a eta_b`` for the two-mode kinds.
    """
    info = analyze_tones(config, trap)
    etas = config.etas(trap)
    eta = {name: etas[i] for i, name in enumerate(fock.MODE_NAMES[: trap.n_modes])}
    modes = tuple(fock.MODE_NAMES[fock._mode_pos(m, trap.n_modes)] for m in info.modes)
    t = config.duration
    kind = config.kind
    if kind in GAUSSIAN_KINDS:
        lam = eigen_sign(info.axis, config.qubit_prep)
    if kind == "displacement":
        c = eta[modes[0]] ** (2 if paper_eta_power else 1)
        return GateParams(kind, modes, alpha=complex(lam * c * info.rabi * t * np.exp(1j * info.mode_phase)))
    if kind == "squeezer":
        c = eta[modes[0]] ** 2
        return GateParams(kind, modes, xi=complex(lam * c * info.rabi * t * np.exp(1j * info.mode_phase)))
    if kind == "fourier":
        return GateParams(kind, modes, theta=tuple(
            (m, float(lam * eta[m] ** 2 * info.rabi * t / 2)) for m in modes))
    if kind in ("beamsplitter", "tms", "conditional"):
        g = lam * 2 * eta[modes[0]] * eta[modes[1]] * info.rabi * t
        if kind == "beamsplitter":
            return GateParams(kind, modes, mix_angle=float(g), mix_phase=float(info.mode_phase))
        if kind == "tms":
            return GateParams(kind, modes, tms_param=complex(1j * g * np.exp(1j * info.mode_phase)))
        return GateParams(kind, modes, cond_strength=float(g), cond_phase=float(info.mode_phase))
    if kind in ("blue", "red"):
        return GateParams(kind, modes, area=float(eta[modes[0]] * info.rabi * t), phase=float(info.axis))
    omega_eff = (1 - sum(e * e for e in etas)) * info.rabi
    return GateParams("carrier", (), area=float(omega_eff * t), phase=float(info.axis))
