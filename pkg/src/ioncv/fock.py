"""Truncated Fock-space representation of one qubit and up to three motional modes.

Tensor order is always ``qubit ⊗ mode_a ⊗ mode_b ⊗ mode_c``. The qubit basis is
``(|g>, |e>)`` so that ``sigma_+ = |e><g|`` sits at matrix position ``[1, 0]``.

Quadratures use the unnormalised convention ``x = a + a^dag``,
``p = -i (a - a^dag)`` so that ``[x, p] = 2i`` and the vacuum has unit variance.
Units: hbar = 1, frequencies in rad/us, times in us.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import LayoutError, TruncationWarning

MODE_NAMES = ("a", "b", "c")
QUBIT = "q"
DEFAULT_GUARD = 8
DEFAULT_LEAK_TOL = 1e-8
DEFAULT_DIM_CAP = 20000

ModeId = Union[str, int]


@dataclass(frozen=True)
class HilbertLayout:
    """Shape of the composite space: qubit plus ``n_modes`` oscillators.

    Each mode keeps ``cutoff + guard + 1`` levels. Levels above ``cutoff`` form
    the guard band, whose population is reported as truncation leak.
    """

    n_modes: int
    cutoff: int
    guard: int = DEFAULT_GUARD
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if not 1 <= self.n_modes <= 3:
            raise LayoutError(f"1 to 3 modes supported, got {self.n_modes}")
        if self.cutoff < 1:
            raise LayoutError("truncation must be >= 1")
        if self.guard < 0:
            raise LayoutError("guard must be >= 0")
        if self.total_dim > self.dim_cap:
            raise LayoutError(
                f"total dimension {self.total_dim} exceeds cap {self.dim_cap}"
            )

    @property
    def levels(self) -> int:
        return self.cutoff + self.guard + 1

    @property
    def dims(self) -> tuple:
        return (2,) + (self.levels,) * self.n_modes

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def modes(self) -> tuple:
        return MODE_NAMES[: self.n_modes]

    @property
    def factors(self) -> tuple:
        return (QUBIT,) + self.modes

    def mode_index(self, mode: ModeId) -> int:
        """Position of ``mode`` among the modes (0 for 'a')."""
        if isinstance(mode, (int, np.integer)) and not isinstance(mode, bool):
            idx = int(mode)
        elif isinstance(mode, str) and mode in MODE_NAMES:
            idx = MODE_NAMES.index(mode)
        else:
            raise LayoutError(f"unknown mode id {mode!r}")
        if not 0 <= idx < self.n_modes:
            raise LayoutError(f"mode {mode!r} not present in a {self.n_modes}-mode layout")
        return idx

    def factor_index(self, factor: ModeId) -> int:
        if factor == QUBIT:
            return 0
        return 1 + self.mode_index(factor)

    def flat_index(self, q: int, phonons: Sequence[int]) -> int:
        return int(np.ravel_multi_index((q, *phonons), self.dims))

    def unflatten(self, index: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(index, self.dims))

    @property
    def guard_mask(self) -> np.ndarray:
        """Boolean mask over flat indices with any mode above ``cutoff``."""
        return _guard_mask(self)


@lru_cache(maxsize=64)
def _guard_mask(layout: HilbertLayout) -> np.ndarray:
    grids = np.indices(layout.dims).reshape(len(layout.dims), -1)
    mask = np.any(grids[1:] > layout.cutoff, axis=0)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True)
class TrapSpec:
    """Mode frequencies, Lamb-Dicke parameters and phonon truncation of one ion."""

    mode_freqs: tuple
    lamb_dicke: tuple
    truncation: int
    qubit_freq: float | None = None
    guard: int = DEFAULT_GUARD

    def __post_init__(self):
        freqs = tuple(float(w) for w in np.atleast_1d(self.mode_freqs))
        etas = tuple(float(e) for e in np.atleast_1d(self.lamb_dicke))
        if len(etas) == 1 and len(freqs) > 1:
            etas = etas * len(freqs)
        object.__setattr__(self, "mode_freqs", freqs)
        object.__setattr__(self, "lamb_dicke", etas)
        if not 1 <= len(freqs) <= 3:
            raise LayoutError("a trap has 1 to 3 modes")
        if len(etas) != len(freqs):
            raise LayoutError("one Lamb-Dicke parameter per mode required")
        if any(w <= 0 for w in freqs):
            raise LayoutError("mode frequencies must be positive")
        if len(set(freqs)) != len(freqs):
            raise LayoutError("mode frequencies must be pairwise distinct")
        if any(not 0 < e < 1 for e in etas):
            raise LayoutError("Lamb-Dicke parameters must lie in (0, 1)")
        if self.truncation < 1:
            raise LayoutError("truncation must be >= 1")
        worst = max(e * e for e in etas) * self.truncation
        if worst >= 1:
            raise LayoutError(f"eta^2 N = {worst:.3g} >= 1: outside the Lamb-Dicke regime")
        if worst >= 0.1:
            warnings.warn(
                f"eta^2 N = {worst:.3g} is not << 1; second-order expansion is rough",
                TruncationWarning,
                stacklevel=2,
            )

    @property
    def n_modes(self) -> int:
        return len(self.mode_freqs)

    def layout(self, guard: int | None = None, dim_cap: int = DEFAULT_DIM_CAP) -> HilbertLayout:
        return HilbertLayout(
            self.n_modes, self.truncation, self.guard if guard is None else guard, dim_cap
        )

    def freq(self, mode: ModeId) -> float:
        return self.mode_freqs[_mode_pos(mode, self.n_modes)]

    def eta(self, mode: ModeId) -> float:
        return self.lamb_dicke[_mode_pos(mode, self.n_modes)]


def _mode_pos(mode, n_modes):
    if isinstance(mode, str):
        if mode not in MODE_NAMES[:n_modes]:
            raise LayoutError(f"unknown mode id {mode!r}")
        return MODE_NAMES.index(mode)
    if not 0 <= int(mode) < n_modes:
        raise LayoutError(f"unknown mode id {mode!r}")
    return int(mode)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    layout: HilbertLayout

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.total_dim:
            raise LayoutError(
                f"amplitude vector has length {amps.size}, layout needs {self.layout.total_dim}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm, self.layout)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def expect(self, op: "LinearOperator") -> complex:
        _check_same(self.layout, op.layout)
        v = self.amplitudes
        return complex(np.vdot(v, op.matrix @ v))

    @property
    def leak(self) -> float:
        """Population in the guard band."""
        return float(np.sum(np.abs(self.amplitudes[self.layout.guard_mask]) ** 2))

    def populations(self) -> np.ndarray:
        """Joint phonon-number distribution with the qubit traced out."""
        p = np.abs(self.tensor()) ** 2
        return p.sum(axis=0)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    matrix: np.ndarray
    layout: HilbertLayout

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise LayoutError(f"operator shape {m.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", m)

    def dag(self) -> "LinearOperator":
        return LinearOperator(self.matrix.conj().T, self.layout)

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _check_same(self.layout, other.layout)
            return LinearOperator(self.matrix @ other.matrix, self.layout)
        if isinstance(other, StateVector):
            _check_same(self.layout, other.layout)
            return StateVector(self.matrix @ other.amplitudes, self.layout)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        _check_same(self.layout, other.layout)
        return LinearOperator(self.matrix + other.matrix, self.layout)

    def __sub__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        _check_same(self.layout, other.layout)
        return LinearOperator(self.matrix - other.matrix, self.layout)

    def __neg__(self):
        return LinearOperator(-self.matrix, self.layout)

    def __mul__(self, scalar):
        if isinstance(scalar, (LinearOperator, StateVector)):
            return NotImplemented
        return LinearOperator(self.matrix * scalar, self.layout)

    __rmul__ = __mul__

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _check_same(l1: HilbertLayout, l2: HilbertLayout):
    if l1 != l2:
        raise LayoutError(f"layout mismatch: {l1} vs {l2}")


def commutator(x: LinearOperator, y: LinearOperator) -> LinearOperator:
    return x @ y - y @ x


def max_abs(op) -> float:
    m = op.matrix if isinstance(op, LinearOperator) else np.asarray(op)
    return float(np.max(np.abs(m))) if m.size else 0.0


# -- single-factor matrices -------------------------------------------------

def ladder_matrix(levels: int) -> np.ndarray:
    """Truncated annihilation operator, <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1).astype(complex)


def sigma_matrix(axis, angle: float | None = None) -> np.ndarray:
    """2x2 qubit matrix in the (|g>, |e>) basis.

    ``axis`` is one of ``x, y, z, +, -, i`` or ``"phi"`` with ``angle`` for
    ``sigma_phi = cos(phi) sigma_x + sin(phi) sigma_y``. A bare float is read as
    ``sigma_phi`` at that angle.
    """
    if not isinstance(axis, str):
        axis, angle = "phi", float(axis)
    plus = np.array([[0, 0], [1, 0]], dtype=complex)
    minus = plus.T.copy()
    if axis == "+":
        return plus
    if axis == "-":
        return minus
    if axis == "z":
        return np.diag([-1.0, 1.0]).astype(complex)
    if axis == "i":
        return np.eye(2, dtype=complex)
    if axis == "x":
        angle = 0.0
    elif axis == "y":
        angle = np.pi / 2
    elif axis != "phi" or angle is None:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return np.exp(-1j * angle) * plus + np.exp(1j * angle) * minus


def block_eigh(m: np.ndarray):
    """``eigh`` of a Hermitian matrix, one connected block of its sparsity pattern at a time."""
    n = m.shape[0]
    n_comp, label = connected_components(csr_matrix(np.abs(m) > 0), directed=False)
    w = np.empty(n)
    v = np.zeros((n, n), dtype=complex)
    for c in range(n_comp):
        idx = np.flatnonzero(label == c)
        wc, vc = np.linalg.eigh(m[np.ix_(idx, idx)])
        w[idx] = wc
        v[np.ix_(idx, idx)] = vc
    return w, v


def expi_hermitian(h: np.ndarray) -> np.ndarray:
    """``exp(-i h)`` for a Hermitian matrix ``h``."""
    w, v = block_eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w)) @ v.conj().T


def embed(layout: HilbertLayout, factor_ops: dict) -> LinearOperator:
    """Kronecker product with identities on every factor not in ``factor_ops``.

    Keys are ``'q'`` or mode ids.
    """
    mats = [np.eye(d, dtype=complex) for d in layout.dims]
    for key, m in factor_ops.items():
        mats[layout.factor_index(key)] = np.asarray(m, dtype=complex)
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return LinearOperator(out, layout)


# -- operator builders -------------------------------------------------------

@lru_cache(maxsize=128)
def _annihilation(layout: HilbertLayout, idx: int) -> LinearOperator:
    return embed(layout, {layout.modes[idx]: ladder_matrix(layout.levels)})


def annihilation(mode: ModeId, layout: HilbertLayout) -> LinearOperator:
    return _annihilation(layout, layout.mode_index(mode))


def creation(mode: ModeId, layout: HilbertLayout) -> LinearOperator:
    return annihilation(mode, layout).dag()


def number(mode: ModeId, layout: HilbertLayout) -> LinearOperator:
    n = np.diag(np.arange(layout.levels, dtype=float)).astype(complex)
    return embed(layout, {layout.modes[layout.mode_index(mode)]: n})


def pauli(axis, layout: HilbertLayout, angle: float | None = None) -> LinearOperator:
    return embed(layout, {QUBIT: sigma_matrix(axis, angle)})


def identity(layout: HilbertLayout) -> LinearOperator:
    return LinearOperator(np.eye(layout.total_dim, dtype=complex), layout)


def quadratures(mode: ModeId, layout: HilbertLayout):
    """``(x, p)`` with ``x = a + a^dag`` and ``p = -i (a - a^dag)``."""
    a = annihilation(mode, layout)
    ad = a.dag()
    return a + ad, (a - ad) * (-1j)


def rotated_quadrature(mode: ModeId, layout: HilbertLayout, phi: float) -> LinearOperator:
    """``x_phi = e^{-i phi} a + e^{i phi} a^dag = cos(phi) x + sin(phi) p``."""
    a = annihilation(mode, layout)
    return a * np.exp(-1j * phi) + a.dag() * np.exp(1j * phi)


def parity(layout: HilbertLayout, modes: Iterable[ModeId] | None = None) -> LinearOperator:
    modes = layout.modes if modes is None else modes
    sign = np.diag((-1.0) ** np.arange(layout.levels)).astype(complex)
    return embed(layout, {layout.modes[layout.mode_index(m)]: sign for m in modes})


# -- states ------------------------------------------------------------------

def _qubit_vector(q) -> np.ndarray:
    if isinstance(q, str):
        if q == "g":
            return np.array([1, 0], dtype=complex)
        if q == "e":
            return np.array([0, 1], dtype=complex)
        raise LayoutError(f"qubit label must be 'g' or 'e', got {q!r}")
    v = np.asarray(q, dtype=complex).reshape(-1)
    if v.size != 2:
        raise LayoutError("qubit vector must have two components")
    return v


def basis_state(q, phonons: Sequence[int], layout: HilbertLayout) -> StateVector:
    """``|q, n_a, n_b, ...>``; ``phonons`` may be shorter than the mode count."""
    phonons = list(phonons)
    if len(phonons) > layout.n_modes:
        if any(phonons[layout.n_modes:]):
            raise LayoutError("phonon count given for a mode that does not exist")
        phonons = phonons[: layout.n_modes]
    phonons += [0] * (layout.n_modes - len(phonons))
    for n in phonons:
        if not 0 <= n <= layout.cutoff:
            raise LayoutError(f"phonon count {n} outside 0..{layout.cutoff}")
    qi = {"g": 0, "e": 1}.get(q, q)
    if qi not in (0, 1):
        raise LayoutError(f"qubit label must be 'g' or 'e', got {q!r}")
    amps = np.zeros(layout.total_dim, dtype=complex)
    amps[layout.flat_index(qi, phonons)] = 1.0
    return StateVector(amps, layout)


def qubit_eigenstate(phi: float, sign: int = +1) -> np.ndarray:
    """Eigenvector of ``sigma_phi`` with eigenvalue ``sign`` (qubit factor only)."""
    s = 1 if sign >= 0 else -1
    return np.array([1.0, s * np.exp(-1j * phi)], dtype=complex) / np.sqrt(2)


def fock_vector(n: int, levels: int) -> np.ndarray:
    v = np.zeros(levels, dtype=complex)
    v[n] = 1.0
    return v


def product_state(qubit, mode_vectors: Sequence, layout: HilbertLayout) -> StateVector:
    """Tensor product of a qubit vector (or 'g'/'e') and one vector per mode.

    Mode vectors shorter than ``layout.levels`` are zero-padded; missing modes
    default to vacuum.
    """
    out = _qubit_vector(qubit)
    vecs = list(mode_vectors) + [np.array([1.0])] * (layout.n_modes - len(mode_vectors))
    for v in vecs:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.size > layout.levels:
            if np.any(np.abs(v[layout.levels:]) > 0):
                raise LayoutError("mode vector longer than the layout allows")
            v = v[: layout.levels]
        padded = np.zeros(layout.levels, dtype=complex)
        padded[: v.size] = v
        out = np.kron(out, padded)
    return StateVector(out, layout)


# -- reduced states ----------------------------------------------------------

def _as_density(state, layout):
    if isinstance(state, StateVector):
        return None, state.tensor(), state.layout
    if isinstance(state, LinearOperator):
        return state.matrix, None, state.layout
    if layout is None:
        raise LayoutError("a density matrix needs an explicit layout")
    return np.asarray(state, dtype=complex), None, layout


def partial_trace(state, keep: Iterable, layout: HilbertLayout | None = None) -> np.ndarray:
    """Reduced density matrix on the factors in ``keep`` (``'q'`` and/or mode ids).

    ``state`` is a StateVector, a LinearOperator density, or a bare density
    matrix together with ``layout``. Kept factors stay in tensor order.
    """
    rho, psi, layout = _as_density(state, layout)
    keep_idx = sorted({layout.factor_index(k) for k in keep})
    if not keep_idx:
        raise LayoutError("keep set must not be empty")
    dims = layout.dims
    drop = [i for i in range(len(dims)) if i not in keep_idx]
    dk = int(np.prod([dims[i] for i in keep_idx]))
    if psi is not None:
        t = np.transpose(psi, keep_idx + drop).reshape(dk, -1)
        return t @ t.conj().T
    r = rho.reshape(dims + dims)
    n = len(dims)
    perm = keep_idx + drop + [n + i for i in keep_idx] + [n + i for i in drop]
    r = np.transpose(r, perm).reshape(dk, rho.shape[0] // dk, dk, rho.shape[0] // dk)
    return np.einsum("ijkj->ik", r)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def qubit_separability(state, layout: HilbertLayout | None = None) -> float:
    """Purity of the reduced qubit state; 1 means the qubit factors out."""
    return purity(partial_trace(state, [QUBIT], layout))


def fock_labels(layout: HilbertLayout, cap: int | None = None):
    """All phonon tuples with every entry <= ``cap`` (default: the cutoff)."""
    cap = layout.cutoff if cap is None else cap
    return list(itertools.product(range(cap + 1), repeat=layout.n_modes))
