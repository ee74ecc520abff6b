"""Two-mode angular-momentum (Schwinger) representation.

``J_+ = a^dag b``, ``J_z = (n_a - n_b)/2`` and
``J_phi = (e^{-i phi} J_+ + e^{i phi} J_-)/2``. Fixed total phonon number
``N' = n_a + n_b`` spans a spin-``N'/2`` block, and the beam splitter
``exp(-i theta (e^{-i mu} a b^dag + e^{i mu} a^dag b))`` equals
``exp(-2 i theta J_{-mu})`` on every block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import fock
from .errors import LayoutError
from .fock import HilbertLayout, LinearOperator
from .gates import beamsplitter


@dataclass(frozen=True)
class SchwingerBlock:
    total_n: int
    j: float
    block_basis: tuple  # ((n_a, n_b), ...) ordered by n_a

    def __post_init__(self):
        if len(self.block_basis) != self.total_n + 1:
            raise ValueError("block dimension must be N' + 1")


def _pair(modes, layout):
    if len(modes) != 2:
        raise LayoutError("Schwinger map needs two modes")
    ia, ib = (layout.mode_index(m) for m in modes)
    if ia == ib:
        raise LayoutError("Schwinger map needs distinct modes (identical modes given)")
    return layout.modes[ia], layout.modes[ib]


def blocks(layout: HilbertLayout, max_total: int | None = None) -> list:
    """Blocks that fit entirely inside the physical truncation."""
    top = layout.cutoff if max_total is None else max_total
    if top > layout.levels - 1:
        raise LayoutError(f"blocks up to N'={top} do not fit in {layout.levels} levels")
    return [SchwingerBlock(n, n / 2, tuple((k, n - k) for k in range(n + 1))) for n in range(top + 1)]


def j_operators(modes, layout: HilbertLayout):
    """``(Jx, Jy, Jz, J^2)`` on the full layout."""
    a_name, b_name = _pair(modes, layout)
    a, b = fock.annihilation(a_name, layout), fock.annihilation(b_name, layout)
    jp = a.dag() @ b
    jm = jp.dag()
    jx = (jp + jm) * 0.5
    jy = (jp - jm) * (-0.5j)
    jz = (fock.number(a_name, layout) - fock.number(b_name, layout)) * 0.5
    j2 = jx @ jx + jy @ jy + jz @ jz
    return jx, jy, jz, j2


def spin_matrices(total_n: int):
    """Spin-``N'/2`` matrices in the ``|n_a = 0..N'>`` basis (``m = n_a - j``)."""
    n = np.arange(total_n + 1)
    jp = np.zeros((total_n + 1,) * 2)
    jp[n[1:], n[:-1]] = np.sqrt(n[1:] * (total_n - n[:-1]))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(n - total_n / 2)
    return jx, jy, jz, jp


def _block_indices(block: SchwingerBlock, names, layout: HilbertLayout):
    rest = [0] * layout.n_modes
    out = []
    ia, ib = layout.mode_index(names[0]), layout.mode_index(names[1])
    for na, nb in block.block_basis:
        ph = list(rest)
        ph[ia], ph[ib] = na, nb
        out.append(layout.flat_index(0, ph))
    return np.array(out)


def restrict(op: LinearOperator, block: SchwingerBlock, modes) -> np.ndarray:
    """Matrix of ``op`` on one block (qubit in ``|g>``, other modes in vacuum)."""
    idx = _block_indices(block, _pair(modes, op.layout), op.layout)
    return op.matrix[np.ix_(idx, idx)]


def off_block_norm(op: LinearOperator, modes, max_total: int | None = None) -> float:
    """Largest matrix element of ``op`` coupling different blocks."""
    layout = op.layout
    names = _pair(modes, layout)
    blks = blocks(layout, max_total)
    idx = np.concatenate([_block_indices(b, names, layout) for b in blks])
    labels = np.concatenate([[b.total_n] * len(b.block_basis) for b in blks])
    sub = op.matrix[np.ix_(idx, idx)]
    mask = labels[:, None] != labels[None, :]
    return float(np.abs(sub[mask]).max()) if mask.any() else 0.0


def su2_residual(modes, layout: HilbertLayout, max_total: int | None = None) -> float:
    """Worst ``[Jx,Jy] - iJz`` (and cyclic) element over complete blocks."""
    jx, jy, jz, _ = j_operators(modes, layout)
    worst = 0.0
    for b in blocks(layout, max_total):
        x, y, z = (restrict(o, b, modes) for o in (jx, jy, jz))
        for p, q, r in ((x, y, z), (y, z, x), (z, x, y)):
            worst = max(worst, float(np.abs(p @ q - q @ p - 1j * r).max()))
    return worst


def verify_bs_rotation(mix_phase: float, mix_angle: float, modes, layout: HilbertLayout,
                       max_total: int | None = None) -> float:
    """Worst per-block deviation between the beam splitter and ``exp(-2 i theta J_{-mu})``."""
    u = beamsplitter(mix_angle, mix_phase, modes, layout)
    worst = 0.0
    for b in blocks(layout, max_total):
        _, _, _, jp = spin_matrices(b.total_n)
        j_phi = (np.exp(1j * mix_phase) * jp + np.exp(-1j * mix_phase) * jp.T) / 2
        rot = expm(-2j * mix_angle * j_phi)
        worst = max(worst, float(np.abs(restrict(u, b, modes) - rot).max()))
    return worst
