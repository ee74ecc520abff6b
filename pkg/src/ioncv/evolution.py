"""Time evolution under static RWA and full time-dependent Hamiltonians."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

from . import fock
from .errors import (
    DriveError,
    IntegrationError,
    LayoutError,
    SeparabilityError,
    TruncationError,
)
from .fock import DEFAULT_LEAK_TOL, HilbertLayout, LinearOperator, StateVector
from .gates import carrier_pulse
from .hamiltonians import (
    GAUSSIAN_KINDS,
    DriveConfig,
    TimeDependentHamiltonian,
    full_timedep,
    rwa_from_config,
)

DEFAULT_TOL = 1e-9
HERMITICITY_TOL = 1e-10
PURITY_FLAG = 1e-6


@dataclass(frozen=True)
class EvolutionReport:
    """Outcome of one evolution.

    ``norm_drift`` is ``|norm - 1|`` before renormalisation, ``steps`` the
    number of accepted integrator steps (0 on the static path) and
    ``est_error`` an error estimate: the norm drift on the static path and
    ``max(norm_drift, tol)`` on the integrated path.
    """

    final_state: StateVector
    leak: float
    steps: int = 0
    est_error: float = 0.0
    norm_drift: float = 0.0
    qubit_purity: Optional[float] = None
    flagged: bool = False


def _check_layouts(*objs):
    layouts = [o.layout for o in objs]
    for other in layouts[1:]:
        if other != layouts[0]:
            raise LayoutError("state and operator live on different layouts")


def _finish(psi: np.ndarray, layout: HilbertLayout, **kw) -> EvolutionReport:
    norm = float(np.linalg.norm(psi))
    final = StateVector(psi / norm, layout)
    return EvolutionReport(final, final.leak, norm_drift=abs(norm - 1.0), **kw)


def _qubit_split(m: np.ndarray, tol: float = 1e-12):
    """Hermitian ``(A, K)`` with ``m = A (x) K`` over qubit and motion, or None."""
    d = m.shape[0] // 2
    t = m.reshape(2, d, 2, d).transpose(0, 2, 1, 3).reshape(4, d * d)
    w, u = np.linalg.eigh(t @ t.conj().T)  # rank-1 test through the 4x4 Gram matrix
    if w[-1] <= 0:
        return None
    a = u[:, -1].reshape(2, 2)
    k = (u[:, -1].conj() @ t).reshape(d, d)
    # fix the free phase so that both factors are Hermitian
    lam = np.vdot(a, a.conj().T) / np.vdot(a, a)
    ph = np.exp(0.5j * np.angle(lam))
    a, k = a * ph, k / ph
    a, k = 0.5 * (a + a.conj().T), 0.5 * (k + k.conj().T)
    if np.abs(np.kron(a, k) - m).max() > tol * max(1.0, np.abs(m).max()):
        return None
    return a, k


_SPECTRA: dict = {}


def _spectrum(h: LinearOperator):
    """Eigen-decomposition of ``h`` (factored when possible), cached for the last few operators."""
    hit = _SPECTRA.get(id(h))
    if hit is not None and hit[0] is h:
        return hit[1]
    m = 0.5 * (h.matrix + h.matrix.conj().T)
    split = _qubit_split(m)
    if split is None:
        spec = ("full", fock.block_eigh(m))
    else:
        spec = ("split", np.linalg.eigh(split[0]), fock.block_eigh(split[1]))
    if len(_SPECTRA) >= 4:
        _SPECTRA.pop(next(iter(_SPECTRA)))
    _SPECTRA[id(h)] = (h, spec)
    return spec


def evolve_static(h: LinearOperator, coupling: float, t: float, state: StateVector) -> EvolutionReport:
    """Apply ``exp(-i coupling H t)`` by diagonalising the Hermitian ``H``.

    When ``H`` factors as (qubit operator) x (motional operator), which every
    Gaussian RWA drive does, the two factors are diagonalised separately.
    Each factor is split into the connected blocks of its sparsity pattern.
    """
    _check_layouts(h, state)
    herm = h.hermiticity_error()
    scale = max(1.0, float(np.abs(h.matrix).max()))
    if herm > HERMITICITY_TOL * scale:
        raise ValueError(f"Hamiltonian is not Hermitian (deviation {herm:.2e})")
    psi = state.amplitudes
    if t == 0 or coupling == 0:
        out = psi.copy()
    else:
        spec = _spectrum(h)
        if spec[0] == "full":
            w, v = spec[1]
            out = v @ (np.exp(-1j * coupling * t * w) * (v.conj().T @ psi))
        else:
            (wa, va), (wk, vk) = spec[1], spec[2]
            y = va.conj().T @ psi.reshape(2, -1) @ vk.conj()
            y *= np.exp(-1j * coupling * t * np.outer(wa, wk))
            out = (va @ y @ vk.T).reshape(-1)
    rep = _finish(out, state.layout)
    return replace(rep, est_error=rep.norm_drift)


HamiltonianLike = Union[TimeDependentHamiltonian, Callable[[float], LinearOperator]]


def evolve_timedep(h: HamiltonianLike, t_final: float, tol: float, state: StateVector,
                   max_step: float = np.inf) -> EvolutionReport:
    """Integrate ``i d psi/dt = H(t) psi`` from 0 to ``t_final``.

    Uses an adaptive 8th-order Runge-Kutta scheme (DOP853) with relative
    tolerance ``tol``. ``h`` is a :class:`TimeDependentHamiltonian` (applied
    sparsely) or any callable returning a LinearOperator.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    if isinstance(h, TimeDependentHamiltonian):
        _check_layouts(h, state)
        apply = h.apply
    else:
        def apply(t, psi):
            op = h(t)
            _check_layouts(op, state)
            return op.matrix @ psi

    psi0 = np.array(state.amplitudes, dtype=complex)
    if t_final == 0:
        return _finish(psi0, state.layout)

    def rhs(t, y):
        dy = -1j * apply(t, y)
        if not np.all(np.isfinite(dy)):
            raise IntegrationError(f"non-finite derivative at t={t:.6g}")
        return dy

    sol = solve_ivp(rhs, (0.0, t_final), psi0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2, max_step=max_step)
    if sol.status != 0:
        raise IntegrationError(
            f"integrator failed at t={sol.t[-1]:.6g} of {t_final:.6g} after {len(sol.t) - 1} steps: {sol.message}"
        )
    rep = _finish(sol.y[:, -1], state.layout, steps=len(sol.t) - 1)
    return replace(rep, est_error=max(rep.norm_drift, tol))


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2`` for normalised inputs."""
    _check_layouts(a, b)
    ov = np.vdot(a.amplitudes, b.amplitudes) / (a.norm * b.norm)
    return float(min(1.0, abs(ov) ** 2))


def _motional_factor(state: StateVector) -> np.ndarray:
    """Motional vector of a qubit-separable state."""
    t = state.amplitudes.reshape(2, -1)
    u, s, vh = np.linalg.svd(t, full_matrices=False)
    if s[1] > 1e-6 * s[0]:
        raise SeparabilityError("qubit is entangled with the motion; cannot re-prepare it",
                                purity=fock.qubit_separability(state))
    return vh[0] * s[0]


def prepare_qubit(state: StateVector, prep, method: str = "direct", carrier_rabi: float = 1.0,
                  trap=None) -> StateVector:
    """Put the qubit into ``prep``.

    ``direct`` replaces the qubit factor (the state must be qubit-separable).
    ``carrier`` applies a carrier pi/2 pulse of phase ``angle -+ pi/2`` and
    duration ``pi / (2 Omega')``; it requires the qubit to start in ``|g>``.
    """
    if prep is None:
        return state
    if method == "direct":
        motion = _motional_factor(state)
        return StateVector(np.kron(prep.vector(), motion), state.layout).normalized()
    if method != "carrier":
        raise ValueError(f"unknown prep method {method!r}")
    t = state.amplitudes.reshape(2, -1)
    if np.linalg.norm(t[1]) > 1e-9:
        raise DriveError("carrier preparation needs the qubit in |g>")
    if prep.angle is None:
        if prep.sign >= 0:
            return StateVector(carrier_pulse(np.pi, 0.0, state.layout).matrix @ state.amplitudes, state.layout)
        return state
    phase = prep.angle - np.pi / 2 if prep.sign >= 0 else prep.angle + np.pi / 2
    u = carrier_pulse(np.pi / 2, phase, state.layout)
    return StateVector(u.matrix @ state.amplitudes, state.layout)


def carrier_prep_duration(trap, rabi: float) -> float:
    eff = (1.0 - sum(e * e for e in trap.lamb_dicke)) * rabi
    return np.pi / (2 * eff)


def run_gate(config: DriveConfig, trap, state: StateVector, mode: str = "rwa", *,
             tol: float = DEFAULT_TOL, leak_tol: float = DEFAULT_LEAK_TOL,
             prep_method: str = "direct", paper_eta_power: bool = False,
             check_separability: bool = True) -> EvolutionReport:
    """Prepare the qubit, evolve under the drive and score qubit separability.

    In ``rwa`` mode a Gaussian drive that leaves the reduced qubit purity
    below ``1 - 1e-6`` raises :class:`SeparabilityError`; in ``full`` mode the
    purity is only reported (``flagged`` is set).
    """
    layout = state.layout
    psi = prepare_qubit(state, config.qubit_prep, prep_method)
    if mode == "rwa":
        rwa = rwa_from_config(config, trap, layout, paper_eta_power)
        rep = evolve_static(rwa.operator, rwa.effective_coupling, config.duration, psi)
    elif mode == "full":
        rep = evolve_timedep(full_timedep(config, trap, layout), config.duration, tol, psi)
    else:
        raise ValueError(f"mode must be 'rwa' or 'full', got {mode!r}")
    if rep.leak > leak_tol:
        raise TruncationError(
            f"guard-band leak {rep.leak:.2e} exceeds {leak_tol:.0e}; raise the truncation", leak=rep.leak
        )
    pur = fock.qubit_separability(rep.final_state)
    bad = config.kind in GAUSSIAN_KINDS and pur < 1.0 - PURITY_FLAG
    if bad and mode == "rwa" and check_separability:
        raise SeparabilityError(f"{config.kind} gate left qubit purity {pur:.9f}", purity=pur)
    return replace(rep, qubit_purity=pur, flagged=bad)
