"""Spectral decomposition ``A = sum_j (lam_j P_j + Q_j)`` of dense complex matrices.

Eigenvalues come from the complex Schur form (LAPACK ``zgees``). Computed
eigenvalues are grouped into clusters, each cluster's invariant subspace is
isolated by reordering the Schur form (``ztrsen``), and the restriction of
``A - lam_j I`` to that subspace is reduced to a nilpotent staircase form,
which yields the index ``k_j`` and the geometric multiplicity.

Clusters are formed in two passes. The first merges eigenvalues within
``eig_cluster_tol`` of one another. The second merges groups that look like
the scatter of one defective eigenvalue (a k-fold Jordan block perturbed by
roundoff spreads its eigenvalues over a circle of radius ``~eps**(1/k)``) and
keeps a merge only if the staircase reduction confirms the merged block is
numerically nilpotent.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.linalg import lapack
from scipy.sparse.csgraph import connected_components

from .errors import (
    ContourPlacementError,
    EigensolverError,
    IllConditionedDecompositionError,
    InputError,
)

EPS = np.finfo(float).eps

#: similarity transforms worse than this are flagged, not rejected
CONDITION_FLAG = 1e12

# conditioning headroom allowed when merging the scatter of a defective eigenvalue
_DEFECT_GAMMA = 1e4
_NULL_FACTOR = 64


def as_matrix(A, label="A"):
    """Validate and return ``A`` as a read-only square complex128 array."""
    try:
        M = np.array(A, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{label}: cannot interpret as a complex matrix ({exc})") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InputError(f"{label}: expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{label}: entries must be finite (found NaN or Inf)")
    M.flags.writeable = False
    return M


def as_vector(f, dim, label="f"):
    v = np.array(f, dtype=complex).reshape(-1) if np.ndim(f) else np.array([f], dtype=complex)
    if v.shape != (dim,):
        from .errors import DimensionMismatchError

        raise DimensionMismatchError(f"{label}: expected length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{label}: entries must be finite")
    v.flags.writeable = False
    return v


def max_norm(M):
    """Largest absolute entry (0 for empty input)."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def matrix_rank(M, tol):
    """Number of singular values of ``M`` strictly above ``tol``."""
    M = np.asarray(M)
    if not M.size:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol))


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds. ``None`` fields are filled by :meth:`resolve`.

    Defaults, with ``s = ||A||_2`` (1 if A is zero):

    * ``eig_cluster_tol = 1e-8 * s``
    * ``rank_tol = n * eps * sigma_max(A)``
    * ``imag_axis_tol = 1e-9 * s``
    * ``residual_tol = 1e-8`` (applied relative to the scale of each check)
    """

    eig_cluster_tol: float | None = None
    rank_tol: float | None = None
    imag_axis_tol: float | None = None
    residual_tol: float | None = None

    def __post_init__(self):
        for name in ("eig_cluster_tol", "rank_tol", "imag_axis_tol", "residual_tol"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and np.isfinite(value)):
                raise InputError(f"{name} must be a finite nonnegative number, got {value!r}")

    def resolve(self, A):
        A = as_matrix(A)
        norm = float(np.linalg.norm(A, 2))
        scale = norm if norm > 0 else 1.0

        def pick(value, default):
            return float(default) if value is None else float(value)

        return ToleranceConfig(
            eig_cluster_tol=pick(self.eig_cluster_tol, 1e-8 * scale),
            rank_tol=pick(self.rank_tol, A.shape[0] * EPS * norm),
            imag_axis_tol=pick(self.imag_axis_tol, 1e-9 * scale),
            residual_tol=pick(self.residual_tol, 1e-8),
        )

    @property
    def is_resolved(self):
        return None not in (self.eig_cluster_tol, self.rank_tol, self.imag_axis_tol, self.residual_tol)


def _readonly(M):
    M = np.ascontiguousarray(M)
    M.flags.writeable = False
    return M


@dataclass(frozen=True, eq=False)
class EigenItem:
    """One distinct eigenvalue with its Riesz projection and nilpotent part.

    ``Q`` is stored as a matrix, but powers of ``Q`` are formed through the
    staircase factors (basis, frame, nilpotent, dual) so that ``Q**k`` is
    exactly zero for ``k >= index``.
    """

    lam: complex
    alg_mult: int
    geo_mult: int
    index: int
    P: np.ndarray
    Q: np.ndarray
    _basis: np.ndarray = field(repr=False)
    _dual: np.ndarray = field(repr=False)
    _frame: np.ndarray = field(repr=False)
    _nilpotent: np.ndarray = field(repr=False)

    def Q_power(self, k):
        """``Q**k`` (``P`` for k = 0)."""
        if k == 0:
            return self.P
        Nk = np.linalg.matrix_power(self._nilpotent, k)
        return self._basis @ self._frame @ Nk @ self._frame.conj().T @ self._dual

    def orbit(self, f):
        """Rows ``Q**k P f`` for ``k = 0 .. index-1``."""
        c = self._frame.conj().T @ (self._dual @ f)
        out = np.empty((self.index, self.P.shape[0]), dtype=complex)
        for k in range(self.index):
            out[k] = self._basis @ (self._frame @ c)
            c = self._nilpotent @ c
        return out


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    dim: int
    items: tuple
    matrix: np.ndarray
    tolerances: ToleranceConfig
    similarity_condition: float = 1.0

    @property
    def ill_conditioned(self):
        return self.similarity_condition > CONDITION_FLAG

    @property
    def eigenvalues(self):
        return [item.lam for item in self.items]

    def is_zero(self, lam):
        """Whether ``lam`` counts as the eigenvalue 0 under ``eig_cluster_tol``."""
        return abs(lam) <= self.tolerances.eig_cluster_tol

    def zero_item(self):
        for item in self.items:
            if self.is_zero(item.lam):
                return item
        return None

    def projection_at_zero(self):
        """``P(0, A)``; the zero matrix when 0 is in the resolvent set."""
        item = self.zero_item()
        if item is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return item.P

    def reconstruct(self):
        return sum(item.lam * item.P + item.Q for item in self.items)


def _components(values, threshold):
    values = np.asarray(values)
    if len(values) == 1:
        return [np.array([0])]
    dist = np.abs(values[:, None] - values[None, :])
    n_comp, labels = connected_components(dist <= threshold, directed=False)
    return [np.flatnonzero(labels == c) for c in range(n_comp)]


def _staircase(G, tol):
    """Unitary ``W`` and nilpotent ``N`` with ``W^H G W ~ N`` block strictly upper triangular.

    Returns ``(W, N, steps)`` where ``steps`` lists the kernel dimension found
    at each deflation, or ``None`` if some step finds no singular value <= tol.
    """
    m = G.shape[0]
    W = np.eye(m, dtype=complex)
    steps = []
    offset = 0
    while offset < m:
        block = (W.conj().T @ G @ W)[offset:, offset:]
        _, s, Vh = np.linalg.svd(block)
        p = int(np.sum(s <= tol))
        if p == 0:
            return None
        V = Vh.conj().T
        reorder = np.concatenate([V[:, len(s) - p:], V[:, : len(s) - p]], axis=1)
        W[:, offset:] = W[:, offset:] @ reorder
        steps.append(p)
        offset += p
    N = W.conj().T @ G @ W
    bounds = np.cumsum([0] + steps)
    for b in range(len(steps)):
        rows_from = bounds[b]
        N[rows_from:, bounds[b]:bounds[b + 1]] = 0.0
    return W, N, steps


class _SchurContext:
    def __init__(self, A):
        self.A = A
        self.n = A.shape[0]
        try:
            self.T, self.Z = scipy.linalg.schur(A, output="complex")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolverError(
                f"Schur iteration failed for {self.n}x{self.n} matrix "
                f"(||A||_max={max_norm(A):.3e}): {exc}"
            ) from exc
        self.eigs = np.diag(self.T).copy()

    def invariant_block(self, members):
        select = np.zeros(self.n, dtype=np.int32)
        select[members] = 1
        ts, qs, _, m, _, _, info = lapack.ztrsen(select, self.T, self.Z, job="N")
        if info != 0:
            return None
        return qs[:, :m], ts[:m, :m]

    def analyze(self, members, tol):
        """Staircase-reduce the cluster block; ``None`` if it is not nilpotent-like."""
        block = self.invariant_block(members)
        if block is None:
            return None
        V, C = block
        m = len(members)
        mu = complex(np.trace(C)) / m
        stair = _staircase(C - mu * np.eye(m), tol)
        if stair is None:
            return None
        W, N, steps = stair
        return mu, V, W, N, steps


def _null_tol(n, norm, tol):
    return max(tol.rank_tol, _NULL_FACTOR * n * EPS * norm)


def _cluster_groups(ctx, tol, norm):
    """Return ``[(members, spread)]`` after both clustering passes."""
    eigs = ctx.eigs
    groups = []
    for members in _components(eigs, tol.eig_cluster_tol):
        centre = eigs[members].mean()
        groups.append((members, float(np.max(np.abs(eigs[members] - centre)))))

    scale = norm if norm > 0 else 1.0
    base_null = _null_tol(ctx.n, norm, tol)
    rejected = set()
    while len(groups) > 1:
        reps = [eigs[g] for g, _ in groups]
        dist = np.zeros((len(groups), len(groups)))
        for a in range(len(groups)):
            for b in range(len(groups)):
                if a != b:
                    dist[a, b] = np.min(np.abs(reps[a][:, None] - reps[b][None, :]))
        cap = scale * (_DEFECT_GAMMA * EPS) ** (1.0 / ctx.n)
        candidates = sorted({d for d in dist[np.triu_indices(len(groups), 1)] if d <= cap})
        merged = False
        for d in candidates:
            n_comp, labels = connected_components(dist <= d, directed=False)
            for c in range(n_comp):
                idx = np.flatnonzero(labels == c)
                if len(idx) < 2:
                    continue
                members = np.sort(np.concatenate([groups[i][0] for i in idx]))
                key = tuple(members)
                if key in rejected:
                    continue
                if d > scale * (_DEFECT_GAMMA * EPS) ** (1.0 / len(members)):
                    continue
                spread = max(groups[i][1] for i in idx)
                if ctx.analyze(members, max(base_null, spread)) is None:
                    rejected.add(key)
                    continue
                groups = [g for i, g in enumerate(groups) if i not in set(idx)]
                groups.append((members, spread))
                merged = True
                break
            if merged:
                break
        if not merged:
            break
    groups.sort(key=lambda g: (g[0][0]))
    return groups


def eigen_cluster(A, tol=None):
    """Distinct eigenvalues of ``A`` with algebraic multiplicities.

    Returns a list of ``(eigenvalue, multiplicity)`` pairs ordered by
    decreasing real part, then imaginary part.
    """
    A = as_matrix(A)
    tol = (tol or ToleranceConfig()).resolve(A)
    ctx = _SchurContext(A)
    norm = float(np.linalg.norm(A, 2))
    groups = _cluster_groups(ctx, tol, norm)
    out = [(complex(ctx.eigs[g].mean()), len(g)) for g, _ in groups]
    out.sort(key=lambda p: (-p[0].real, -p[0].imag))
    return out


def _diagonal_decomposition(A, tol):
    diag = np.diag(A)
    n = len(diag)
    items = []
    for members in _components(diag, tol.eig_cluster_tol):
        P = np.zeros((n, n), dtype=complex)
        P[members, members] = 1.0
        basis = np.eye(n, dtype=complex)[:, members]
        m = len(members)
        values = diag[members]
        lam = complex(values[0]) if np.all(values == values[0]) else complex(values.mean())
        items.append(
            EigenItem(
                lam=lam,
                alg_mult=m,
                geo_mult=m,
                index=1,
                P=_readonly(P),
                Q=_readonly(np.zeros((n, n), dtype=complex)),
                _basis=_readonly(basis),
                _dual=_readonly(basis.T.copy()),
                _frame=_readonly(np.eye(m, dtype=complex)),
                _nilpotent=_readonly(np.zeros((m, m), dtype=complex)),
            )
        )
    return items, 1.0


def _general_decomposition(A, tol):
    n = A.shape[0]
    norm = float(np.linalg.norm(A, 2))
    ctx = _SchurContext(A)
    groups = _cluster_groups(ctx, tol, norm)
    base_null = _null_tol(n, norm, tol)

    parts = []
    for members, spread in groups:
        result = ctx.analyze(members, max(base_null, spread))
        if result is None:
            # not nilpotent within tolerance: keep it as a semisimple cluster
            block = ctx.invariant_block(members)
            if block is None:
                raise IllConditionedDecompositionError(
                    "Schur reordering failed: eigenvalue clusters are too close to separate",
                    residuals={},
                )
            V, C = block
            m = len(members)
            mu = complex(np.trace(C)) / m
            result = (mu, V, np.eye(m, dtype=complex), np.zeros((m, m), dtype=complex), [m])
        parts.append(result)

    S = np.concatenate([p[1] for p in parts], axis=1)
    try:
        S_inv = np.linalg.solve(S, np.eye(n, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise IllConditionedDecompositionError(
            "generalized eigenvector basis is singular", residuals={}
        ) from exc
    condition = float(np.linalg.cond(S))

    items = []
    offset = 0
    for mu, V, W, N, steps in parts:
        m = V.shape[1]
        dual = S_inv[offset:offset + m]
        offset += m
        P = V @ dual
        Q = V @ W @ N @ W.conj().T @ dual
        items.append(
            EigenItem(
                lam=complex(mu),
                alg_mult=m,
                geo_mult=steps[0],
                index=len(steps),
                P=_readonly(P),
                Q=_readonly(Q),
                _basis=_readonly(V),
                _dual=_readonly(dual),
                _frame=_readonly(W),
                _nilpotent=_readonly(N),
            )
        )
    return items, condition


def spectral_decompose(A, tol=None):
    """Full spectral decomposition of a square complex matrix.

    Raises :class:`IllConditionedDecompositionError` when the resolution
    relations fail by more than ``residual_tol`` (scaled by ``||A||`` and by
    the condition number of the generalized eigenvector basis). A basis with
    condition number above ``CONDITION_FLAG`` is returned but flagged through
    :attr:`SpectralDecomposition.ill_conditioned`.
    """
    A = as_matrix(A)
    tol = (tol or ToleranceConfig()).resolve(A)
    n = A.shape[0]
    if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        items, condition = _diagonal_decomposition(A, tol)
    else:
        items, condition = _general_decomposition(A, tol)
    # a cluster that counts as the eigenvalue 0 is pinned there, so e^{t*0} = 1 exactly
    items = [replace(it, lam=0j) if abs(it.lam) <= tol.eig_cluster_tol else it for it in items]
    items.sort(key=lambda it: (-it.lam.real, -it.lam.imag))
    d = SpectralDecomposition(
        dim=n, items=tuple(items), matrix=A, tolerances=tol, similarity_condition=condition
    )
    residuals = verify_resolution(d)
    norm = float(np.linalg.norm(A, 2))
    limit = tol.residual_tol * max(1.0, norm) * max(1.0, condition)
    if residuals.worst() > limit:
        raise IllConditionedDecompositionError(
            f"decomposition residual {residuals.worst():.3e} exceeds {limit:.3e}", residuals=residuals
        )
    return d


@dataclass(frozen=True)
class ResolutionResiduals:
    """Max-entry residuals of the resolution relations."""

    sum_identity: float
    orthogonality: float
    nilpotent_products: float
    commutation: float
    reconstruction: float

    def worst(self):
        return max(
            self.sum_identity,
            self.orthogonality,
            self.nilpotent_products,
            self.commutation,
            self.reconstruction,
        )

    def as_dict(self):
        return {
            "sum_identity": self.sum_identity,
            "orthogonality": self.orthogonality,
            "nilpotent_products": self.nilpotent_products,
            "commutation": self.commutation,
            "reconstruction": self.reconstruction,
        }


def verify_resolution(d):
    n = d.dim
    eye = np.eye(n)
    sum_identity = max_norm(sum(item.P for item in d.items) - eye)
    orth = nil = comm = 0.0
    for i, a in enumerate(d.items):
        shifted = d.matrix - a.lam * eye
        comm = max(comm, max_norm(a.Q - shifted @ a.P), max_norm(a.Q - a.P @ shifted))
        for j, b in enumerate(d.items):
            if i == j:
                orth = max(orth, max_norm(a.P @ a.P - a.P))
                nil = max(nil, max_norm(a.Q @ b.Q - a.Q @ a.Q))
                comm = max(comm, max_norm(a.P @ b.Q - b.Q), max_norm(b.Q @ a.P - b.Q))
            else:
                orth = max(orth, max_norm(a.P @ b.P))
                nil = max(nil, max_norm(a.Q @ b.Q))
                comm = max(comm, max_norm(a.P @ b.Q), max_norm(b.Q @ a.P))
    recon = max_norm(d.matrix - d.reconstruct())
    return ResolutionResiduals(sum_identity, orth, nil, comm, recon)


def riesz_projection_contour(A, lam, radius, n_nodes=64):
    """Trapezoidal approximation of ``-(1/2 pi i) \\oint R(z, A) dz`` on a circle.

    ``R(z, A) = (A - z I)^{-1}``. Returns (approximately) the zero matrix when
    no eigenvalue lies inside the circle.
    """
    A = as_matrix(A)
    if radius <= 0 or n_nodes < 1:
        raise InputError("radius must be positive and n_nodes at least 1")
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    total = np.zeros((n, n), dtype=complex)
    for w in np.exp(1j * theta):
        z = lam + radius * w
        shifted = A - z * eye
        if np.linalg.cond(shifted) > 1.0 / (1e3 * EPS):
            raise ContourPlacementError(f"contour node z={z:.6g} is numerically on the spectrum")
        total += np.linalg.solve(shifted, eye) * (radius * w)
    return -total / n_nodes


@dataclass(frozen=True, eq=False)
class ReducibleInvertibility:
    holds: bool
    P: np.ndarray | None


def reducible_invertibility(A, tol=None):
    """Whether ``C^n = ker A (+) R(A)``; if so, the projection onto ``ker A`` along ``R(A)``.

    In finite dimensions this holds exactly when 0 is a regular point or an
    eigenvalue of index 1. Accepts a matrix or a :class:`SpectralDecomposition`.
    """
    d = A if isinstance(A, SpectralDecomposition) else spectral_decompose(A, tol)
    item = d.zero_item()
    if item is None:
        return ReducibleInvertibility(True, _readonly(np.zeros((d.dim, d.dim), dtype=complex)))
    if item.index == 1:
        return ReducibleInvertibility(True, item.P)
    return ReducibleInvertibility(False, None)
