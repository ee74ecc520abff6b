"""Motional-state readout through the qubit.

Two protocols are simulated:

* carrier Rabi spectroscopy, where each Fock component flops at its own
  frequency ``Omega_n = Omega' - Omega sum_s eta_s^2 n_s`` and populations are
  recovered by a non-negative least-squares fit over the known frequencies;
* displaced-parity Wigner sampling, either computed directly from the
  state or through the commensurate carrier pulse that maps phonon parity
  onto the qubit.

Rabi frequencies here are full flopping rates: a carrier ``1/2 Omega sigma_x``
gives ``P_e = sin^2(Omega t / 2)``.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.optimize import brentq, nnls
from scipy.special import eval_laguerre

from .errors import IllConditionedError, LayoutError, SamplingWarning, TruncationError
from .fock import HilbertLayout, StateVector, TrapSpec
from .gates import displacement

COND_LIMIT = 1e10
WIGNER_LEAK_TOL = 1e-6


@dataclass(frozen=True)
class RabiTrace:
    times: np.ndarray
    p_excited: np.ndarray
    rabi: float
    lamb_dicke: tuple

    def __post_init__(self):
        p = np.asarray(self.p_excited, dtype=float)
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("P_e must lie in [0, 1]")

    def to_csv(self, path) -> None:
        write_csv(path, ("t", "p_excited"), zip(self.times, self.p_excited))


@dataclass(frozen=True)
class PopulationEstimate:
    populations: dict
    residual: float
    condition: float

    def as_array(self, labels) -> np.ndarray:
        return np.array([self.populations.get(tuple(l), 0.0) for l in labels])


@dataclass(frozen=True)
class ParityReadout:
    p_excited: float
    p_ground: float
    w_estimate: float
    w_exact: float
    t0: float
    m: int


def write_csv(path, header, rows) -> None:
    """CSV with 17 significant digits per float."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(v), ".17g") for v in row])


# -- frequencies -------------------------------------------------------------

def carrier_rabi_eff(trap: TrapSpec, rabi: float) -> float:
    """``Omega' = (1 - sum eta^2) Omega``."""
    return (1.0 - sum(e * e for e in trap.lamb_dicke)) * rabi


def rabi_frequencies(trap: TrapSpec, rabi: float, cap: Optional[int] = None) -> dict:
    """First-order carrier frequencies ``Omega' - Omega sum eta_s^2 n_s`` for ``n_s <= cap``."""
    cap = trap.truncation if cap is None else cap
    eta2 = np.array(trap.lamb_dicke) ** 2
    base = carrier_rabi_eff(trap, rabi)
    return {n: base - rabi * float(eta2 @ np.array(n))
            for n in itertools.product(range(cap + 1), repeat=trap.n_modes)}


def exact_carrier_factor(eta: float, n: int) -> float:
    """``<n| exp(i eta x) |n> = exp(-eta^2/2) L_n(eta^2)`` for ``x = a + a^dag``."""
    return float(np.exp(-eta * eta / 2) * eval_laguerre(n, eta * eta))


def min_frequency_gap(freqs: Mapping) -> float:
    v = np.sort(np.array(list(freqs.values())))
    return float(np.min(np.diff(v))) if v.size > 1 else np.inf


def split_lamb_dicke(n_flops: float, delta_n_flops: float = 1.0, cap: int = 4,
                     n_modes: int = 3) -> tuple:
    """Lamb-Dicke parameters ``eta_a < eta_b < eta_c`` spaced by a constant step.

    Chosen so that ``Delta Omega_{0..01} = Omega'/n_flops`` and
    ``Delta Omega_{10..0} = Omega'/(n_flops + delta_n_flops)``. Raises
    ``ValueError`` if any two frequencies for ``n_s <= cap`` coincide.
    """
    if n_flops <= 1 or delta_n_flops <= 0:
        raise ValueError("need n_flops > 1 and delta_n_flops > 0")

    def etas_for(k):
        hi, lo = np.sqrt(k / n_flops), np.sqrt(k / (n_flops + delta_n_flops))
        return np.linspace(lo, hi, n_modes) if n_modes > 1 else np.array([hi])

    # K = 1 - sum eta^2 is self-consistent
    k = brentq(lambda k: 1.0 - np.sum(etas_for(k) ** 2) - k, 1e-9, 1.0)
    etas = tuple(float(e) for e in etas_for(k))
    eta2 = np.array(etas) ** 2
    vals = sorted(float(eta2 @ np.array(n)) for n in itertools.product(range(cap + 1), repeat=n_modes))
    gaps = np.diff(vals)
    if np.any(gaps <= 1e-12 * max(vals)):
        raise ValueError("Lamb-Dicke split leaves degenerate Rabi frequencies; change delta_n_flops")
    return etas


# -- populations -------------------------------------------------------------

def _population_map(state, n_modes: int) -> dict:
    """Phonon populations from a StateVector (qubit traced out) or a label->prob mapping."""
    if isinstance(state, StateVector):
        pops = state.populations()
        return {tuple(int(i) for i in idx): float(p) for idx, p in np.ndenumerate(pops) if p > 0}
    out = {}
    for label, p in dict(state).items():
        label = (label,) if np.isscalar(label) else tuple(label)
        if len(label) != n_modes:
            raise LayoutError(f"population label {label} does not match {n_modes} modes")
        out[label] = out.get(label, 0.0) + float(p)
    return out


def _require_ground(state):
    if isinstance(state, StateVector):
        if np.linalg.norm(state.amplitudes.reshape(2, -1)[1]) > 1e-9:
            raise ValueError("Rabi readout needs the qubit in |g>")


def simulate_rabi(state, trap: TrapSpec, rabi: float, t_max: float, dt: float) -> RabiTrace:
    """Carrier flopping ``P_e(t) = sum_n p_n sin^2(Omega_n t / 2)`` on ``[0, t_max]``.

    The carrier Hamiltonian is diagonal in the Fock basis, so each component
    is an exact two-level evolution. ``state`` is a StateVector with the qubit
    in ``|g>`` or a mapping from phonon labels to probabilities.
    """
    if dt <= 0 or t_max <= 0:
        raise ValueError("need positive t_max and dt")
    _require_ground(state)
    pops = _population_map(state, trap.n_modes)
    eta2 = np.array(trap.lamb_dicke) ** 2
    base = carrier_rabi_eff(trap, rabi)
    freqs = np.array([base - rabi * float(eta2 @ np.array(n)) for n in pops])
    if dt > np.pi / np.max(np.abs(freqs)):
        warnings.warn(f"sampling step {dt:g} undersamples the carrier (Nyquist limit {np.pi / np.max(freqs):g})",
                      SamplingWarning, stacklevel=2)
    times = np.arange(0.0, t_max + 0.5 * dt, dt)
    p = np.array(list(pops.values()))
    pe = (p[None, :] * np.sin(np.outer(times, freqs) / 2) ** 2).sum(axis=1)
    return RabiTrace(times, np.clip(pe, 0.0, 1.0), rabi, tuple(trap.lamb_dicke))


def infer_populations(trace: RabiTrace, trap: TrapSpec, basis_cap: int) -> PopulationEstimate:
    """Fit ``P_e(t)`` onto the sinusoids of all labels with ``n_s <= basis_cap``."""
    freqs = rabi_frequencies(trap, trace.rabi, basis_cap)
    labels = list(freqs)
    f = np.array([freqs[l] for l in labels])
    order = np.sort(f)
    if np.any(np.diff(order) <= 1e-12 * np.max(np.abs(f))):
        raise IllConditionedError("degenerate Rabi frequencies in the population basis", condition=np.inf)
    a = np.sin(np.outer(trace.times, f) / 2) ** 2
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"sinusoid dictionary condition number {cond:.3g} exceeds {COND_LIMIT:.0e}",
                                  condition=cond)
    x, res = nnls(a, np.asarray(trace.p_excited, dtype=float))
    return PopulationEstimate({l: float(v) for l, v in zip(labels, x)}, float(res), cond)


# -- parity and Wigner -------------------------------------------------------

def parity_expectation(state, modes=None) -> float:
    """``<(-1)^{sum n_s}>`` over the chosen modes (all by default)."""
    if isinstance(state, StateVector):
        layout = state.layout
        pops = state.populations()
        idx = range(layout.n_modes) if modes is None else [layout.mode_index(m) for m in modes]
        grids = np.indices(pops.shape)
        sign = (-1.0) ** sum(grids[i] for i in idx)
        return float(np.sum(sign * pops) / np.sum(pops))
    pops = dict(state)
    total = sum(pops.values())
    return float(sum(p * (-1) ** sum(np.atleast_1d(l)) for l, p in pops.items()) / total)


def _points(point, layout: HilbertLayout, modes):
    if modes is None:
        modes = layout.modes[: len(point)] if not isinstance(point, Mapping) else tuple(point)
    if isinstance(point, Mapping):
        pts = [point[m] for m in modes]
    else:
        pts = list(point)
        if len(pts) == 2 and np.isscalar(pts[0]):
            pts = [pts]
    if len(pts) != len(modes):
        raise LayoutError("one (x, p) pair per mode is required")
    return list(modes), [complex(x, p) / 2 for x, p in pts]


def wigner_point(state: StateVector, point, modes=None, paper_norm: bool = False,
                 leak_tol: float = WIGNER_LEAK_TOL) -> float:
    """Wigner function at ``(x, p)`` per mode via displaced parity.

    Uses ``alpha = (x + i p)/2`` (so ``<x> = 2 Re alpha``) and
    ``W = c <D(alpha) P D(alpha)^dag>`` with ``c = (2/pi)^M``, or ``2/pi``
    when ``paper_norm`` is set. ``W`` integrates to one against
    ``d^2 alpha = dx dp / 4`` per mode.
    """
    layout = state.layout
    modes, alphas = _points(point, layout, modes)
    psi = state.amplitudes
    for m, a in zip(modes, alphas):
        if a != 0:
            psi = displacement(-a, m, layout, leak_tol=np.inf).matrix @ psi
    shifted = StateVector(psi, layout)
    if shifted.leak > leak_tol:
        raise TruncationError(f"displaced state leaks {shifted.leak:.2e} into the guard band", leak=shifted.leak)
    norm = 2 / np.pi if paper_norm else (2 / np.pi) ** len(modes)
    return norm * parity_expectation(shifted, modes)


def wigner_grid(state: StateVector, xs, ps, mode="a", others=None, leak_tol: float = WIGNER_LEAK_TOL):
    """Single-mode Wigner values on a grid; returns an array of shape ``(len(xs), len(ps))``.

    The other modes are traced out (their parity is not applied).
    """
    return np.array([[wigner_point(state, {mode: (x, p)}, [mode], leak_tol=leak_tol) for p in ps] for x in xs])


def parity_protocol(state, trap: TrapSpec, carrier_rabi: float, m: Optional[int] = None,
                    paper_norm: bool = False) -> ParityReadout:
    """Map phonon parity onto the qubit with one commensurate carrier pulse.

    Requires equal Lamb-Dicke parameters ``eta`` and ``1/eta^2 = 4 m``. The
    drive is set so that the vacuum flops at ``Omega' = Omega_0 - Delta Omega``
    with ``Delta Omega = eta^2 Omega_0``; higher Fock states use the exact
    ``prod_s L_{n_s}(eta^2)`` factors. After ``t0 = pi / Delta Omega`` the
    qubit is excited for even (or odd) total phonon number depending on the
    parity of ``Omega'/Delta Omega``, and ``W = +-c (P_e - P_g)``.
    """
    etas = np.array(trap.lamb_dicke)
    if not np.allclose(etas, etas[0], rtol=1e-12, atol=0):
        raise ValueError("parity protocol needs equal Lamb-Dicke parameters on all modes")
    eta = float(etas[0])
    ratio = 1.0 / (eta * eta)
    if m is None:
        m = int(round(ratio / 4))
    if m < 1 or not np.isclose(ratio, 4 * m, rtol=1e-9, atol=0):
        raise ValueError(f"commensurability violated: Omega_0/Delta Omega = {ratio:.6g} is not 4*m with m={m}")
    _require_ground(state)
    d_omega = eta * eta * carrier_rabi
    omega_vac = carrier_rabi - d_omega
    k = int(round(omega_vac / d_omega))
    if not np.isclose(omega_vac / d_omega, k, rtol=1e-9, atol=0):
        raise ValueError("t0 condition unreachable: Omega'/Delta Omega is not an integer")
    sign = 1.0 if k % 2 == 1 else -1.0
    t0 = np.pi / d_omega
    pops = _population_map(state, trap.n_modes)
    lag = {}
    p_e = 0.0
    for label, p in pops.items():
        factor = 1.0
        for n in label:
            if n not in lag:
                lag[n] = float(eval_laguerre(n, eta * eta))
            factor *= lag[n]
        p_e += p * np.sin(omega_vac * factor * t0 / 2) ** 2
    total = sum(pops.values())
    p_e /= total
    p_g = 1.0 - p_e
    norm = 2 / np.pi if paper_norm else (2 / np.pi) ** trap.n_modes
    w_est = sign * norm * (p_e - p_g)
    w_exact = norm * parity_expectation(state if isinstance(state, StateVector) else pops)
    return ParityReadout(float(p_e), float(p_g), float(w_est), float(w_exact), float(t0), int(m))


def grid_moments(xs, ps, w) -> tuple:
    """Mean ``(x, p)`` and covariance of a Wigner grid treated as a density.

    ``w[i, j]`` is the value at ``(xs[i], ps[j])``. Exact for Gaussian states
    when the grid covers the distribution.
    """
    xs, ps, w = np.asarray(xs, float), np.asarray(ps, float), np.asarray(w, float)
    gx, gp = np.meshgrid(xs, ps, indexing="ij")
    z = w.sum()
    mx, mp = (gx * w).sum() / z, (gp * w).sum() / z
    dx, dp = gx - mx, gp - mp
    cov = np.array([[(dx * dx * w).sum(), (dx * dp * w).sum()],
                    [(dx * dp * w).sum(), (dp * dp * w).sum()]]) / z
    return np.array([mx, mp]), cov
