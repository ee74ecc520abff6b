import numpy as np
import pytest

from ioncv import fock
from ioncv import gates as G
from ioncv import schwinger as S


@pytest.fixture
def lay():
    return fock.HilbertLayout(2, 4, guard=2)


def test_blocks_cover_truncation(lay):
    bl = S.blocks(lay)
    assert [b.total_n for b in bl] == [0, 1, 2, 3, 4]
    assert all(len(b.block_basis) == b.total_n + 1 for b in bl)
    assert bl[3].j == pytest.approx(1.5)


def test_spin_matrices_algebra():
    for n in range(5):
        jx, jy, jz, _ = S.spin_matrices(n)
        j = n / 2
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
        assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(n + 1))


def test_casimir_on_blocks(lay):
    *_, j2 = S.j_operators(("a", "b"), lay)
    for b in S.blocks(lay):
        sub = S.restrict(j2, b, ("a", "b"))
        assert np.allclose(sub, b.j * (b.j + 1) * np.eye(len(b.block_basis)))


def test_su2_residual_small(lay):
    assert S.su2_residual(("a", "b"), lay) < 1e-12


@pytest.mark.parametrize("mu", [0.0, 0.7, -2.0])
def test_beamsplitter_is_block_diagonal(lay, mu):
    u = G.beamsplitter(0.9, mu, ("a", "b"), lay)
    assert S.off_block_norm(u, ("a", "b"), 4) < 1e-12


@pytest.mark.parametrize("mu,theta", [(0.0, 0.3), (1.1, np.pi / 2), (-0.4, 2.2)])
def test_beamsplitter_is_spin_rotation(lay, mu, theta):
    assert S.verify_bs_rotation(mu, theta, ("a", "b"), lay, 4) < 1e-9


def test_two_mode_squeezer_breaks_blocks(lay):
    u = G.two_mode_squeezer(0.1, ("a", "b"), lay, leak_tol=1.0)
    assert S.off_block_norm(u, ("a", "b"), 4) > 1e-3
