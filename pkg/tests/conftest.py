"""Shared fixture generators.

Planted fixtures are ``A = S J S^{-1}`` with ``J`` a Jordan matrix of chosen
blocks and ``S`` a random similarity with prescribed singular values, so the
exact eigenvalues, indices and projections are known.
"""

from dataclasses import dataclass

import numpy as np
import pytest

# eigenvalue pools by regime; positive real parts are small so that a rounding
# residue on a vanishing component cannot grow visibly by t = 1e4
NEG_POOL = (-0.5, -1.0, -2.0, -0.5 + 1.0j, -1.0 - 2.0j)
IMAG_POOL = (1.0j, -1.0j, 2.0j, 0.5j)
POS_POOL = (0.001, 0.001 + 1.0j)


@dataclass
class Planted:
    A: np.ndarray
    S: np.ndarray
    J: np.ndarray
    blocks: list  # (lam, size, mode)
    f: np.ndarray
    coeffs: np.ndarray

    @property
    def dim(self):
        return self.A.shape[0]

    def projection(self, lam):
        """Exact Riesz projection onto the generalized eigenspace of ``lam``."""
        mask = np.zeros(self.dim)
        pos = 0
        for mu, size, _ in self.blocks:
            if mu == lam:
                mask[pos : pos + size] = 1
            pos += size
        Sinv = np.linalg.inv(self.S)
        return self.S @ np.diag(mask) @ Sinv

    def index(self, lam):
        return max(size for mu, size, _ in self.blocks if mu == lam)


def jordan_matrix(blocks):
    n = sum(size for _, size, *_ in blocks)
    J = np.zeros((n, n), dtype=complex)
    pos = 0
    for lam, size, *_ in blocks:
        for i in range(size):
            J[pos + i, pos + i] = lam
            if i + 1 < size:
                J[pos + i, pos + i + 1] = 1.0
        pos += size
    return J


def random_similarity(rng, n, cond=4.0):
    def unitary():
        Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        Q, R = np.linalg.qr(Z)
        return Q * (np.diag(R) / abs(np.diag(R)))

    s = np.geomspace(1.0, cond, n) if n > 1 else np.ones(1)
    return unitary() @ np.diag(s) @ unitary()


def block_coefficients(rng, size, mode):
    """Jordan-basis coefficients of ``f`` on one block.

    ``full``: every chain position; ``eig``: eigenvector only; ``zero``: none.
    """
    c = np.zeros(size, dtype=complex)
    if mode == "full":
        c[:] = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    elif mode == "eig":
        c[0] = rng.standard_normal() + 1j * rng.standard_normal()
    return c


def planted(rng, blocks, cond=4.0):
    """``blocks``: list of ``(lam, size, mode)``."""
    J = jordan_matrix(blocks)
    S = random_similarity(rng, J.shape[0], cond)
    A = S @ J @ np.linalg.inv(S)
    coeffs = np.concatenate([block_coefficients(rng, size, mode) for _, size, mode in blocks])
    if not np.any(coeffs):
        coeffs[0] = 1.0
        lam, size, mode = blocks[0]
        blocks = [(lam, size, "eig" if size > 1 else "full")] + list(blocks[1:])
    return Planted(A, S, J, list(blocks), S @ coeffs, coeffs)


def expected_bounded(fixture, tol=1e-12):
    """Ground-truth verdict from the Jordan-basis coefficients."""
    pos = 0
    for lam, size, _ in fixture.blocks:
        c = fixture.coeffs[pos : pos + size]
        pos += size
        if lam.real > 0 and np.any(abs(c) > tol):
            return False
        if lam.real == 0 and np.any(abs(c[1:]) > tol):
            return False
    return True


def random_planted(rng, max_dim=8, pools=(NEG_POOL, IMAG_POOL, POS_POOL, (0.0,)), modes=("full", "eig", "zero")):
    """Random planted fixture with exact-regime eigenvalues and distinct block eigenvalues."""
    candidates = [lam for pool in pools for lam in pool]
    dim_left = int(rng.integers(2, max_dim + 1))
    blocks = []
    used = set()
    while dim_left > 0:
        lam = complex(candidates[int(rng.integers(len(candidates)))])
        if lam in used:
            if len(used) == len(candidates):
                break
            continue
        size = int(rng.integers(1, min(3, dim_left) + 1))
        mode = modes[int(rng.integers(len(modes)))]
        blocks.append((lam, size, mode))
        used.add(lam)
        dim_left -= size
    return planted(rng, blocks)


def bounded_planted(rng, max_dim=8, zero_index=1):
    """Planted fixture whose trajectory is bounded by construction.

    Negative eigenvalues take arbitrary blocks; imaginary-axis eigenvalues are
    semisimple (or carry only eigenvector components); 0 has index ``zero_index``.
    """
    blocks = []
    dim = 0
    target = int(rng.integers(2, max_dim + 1))
    pool = list(NEG_POOL) + list(IMAG_POOL)
    rng.shuffle(pool)
    if zero_index:
        blocks.append((0j, zero_index, "eig" if zero_index > 1 else "full"))
        dim += zero_index
    for lam in pool:
        if dim >= target:
            break
        lam = complex(lam)
        if lam.real < 0:
            size = int(rng.integers(1, min(3, target - dim) + 1))
            blocks.append((lam, size, "full"))
        else:
            blocks.append((lam, 1, "full"))
            size = 1
        dim += size
    return planted(rng, blocks)


def random_matrix(rng, n):
    kind = int(rng.integers(3))
    if kind == 0:
        return rng.standard_normal((n, n)).astype(complex)
    if kind == 1:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    # normal matrix with a repeated eigenvalue
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vals[-1] = vals[0]
    return Q @ np.diag(vals) @ Q.conj().T


def near_defective(rng, delta):
    """Two eigenvalues ``delta`` apart coupled by a unit entry, plus one on the imaginary axis."""
    U = random_similarity(rng, 3, 1.0)
    T = np.array([[-0.5, 1.0, 0.3], [0.0, -0.5 + delta, 1.0], [0.0, 0.0, 1.0j]])
    return U @ T @ U.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = [test_acceptance.RESULTS[k] for k in sorted(test_acceptance.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
