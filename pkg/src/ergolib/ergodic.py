"""Cesaro means ``(1/t) int_0^t y(s) ds``, their limits, and O(1/t) rate checks."""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import InputError, SingularShiftError, UnboundedTrajectoryError
from .evolution import (
    Regime,
    Trajectory,
    classify_boundedness,
    geometric_grid,
    merged_tolerances,
    regime_of,
)
from .spectral_core import (
    SpectralDecomposition,
    ToleranceConfig,
    as_matrix,
    as_vector,
    reducible_invertibility,
    spectral_decompose,
)

#: multiplicative and absolute slack on every ``C/t`` comparison
RATE_SLACK_REL = 1e-6
RATE_SLACK_ABS = 1e-12
#: consecutive means closer than this (relative) count as an accumulation point
ACCUMULATION_REL = 1e-6
IDENTITY_REL_TOL = 1e-9


def default_time_grid(t_min=1.0, t_max=1e4, per_decade=16):
    return geometric_grid(t_min, t_max, per_decade)


def _decompose(A, tol=None):
    if isinstance(A, SpectralDecomposition):
        return A
    return spectral_decompose(A, tol)


def cesaro_mean_analytic(d, f, t):
    """Closed-form Cesaro mean at ``t > 0``.

    Each term integrates exactly: ``(1/t) int_0^t e^{s lam} s^k/k! ds`` via the
    integration-by-parts recursion, switching to the Taylor series of the
    integral when ``|lam t|`` is small enough for the recursion to cancel.
    """
    if not t > 0:
        raise InputError("t must be positive")
    M, _ = Trajectory(d, f).cesaro_grid([float(t)])
    return M[0]


def cesaro_mean_quadrature(d, f, t, n_panels=1024):
    """Composite Simpson approximation of the Cesaro mean (independent of the closed form)."""
    if not t > 0:
        raise InputError("t must be positive")
    if n_panels < 2:
        raise InputError("n_panels must be at least 2")
    nodes = np.linspace(0.0, float(t), 2 * int(n_panels) + 1)
    Y, _ = Trajectory(d, f).grid(nodes)
    return simpson(Y, x=nodes, axis=0) / t


@dataclass(frozen=True, eq=False)
class CesaroLimit:
    limit: np.ndarray
    strong: bool


def cesaro_limit(d, f, tol=None):
    """Limit of the Cesaro means of a bounded trajectory: ``P(0, A) f``.

    ``strong`` is true when no nonzero eigenvalue on the imaginary axis carries
    a component of ``f``; then ``y(t)`` itself converges to the same limit.
    """
    f = as_vector(f, d.dim)
    verdict = classify_boundedness(d, f, tol)
    if not verdict.bounded:
        raise UnboundedTrajectoryError("Cesaro limit requested for an unbounded trajectory", verdict)
    tolerances = merged_tolerances(d, tol)
    threshold = tolerances.residual_tol * (1.0 + float(np.linalg.norm(f)))
    strong = True
    for item in d.items:
        if d.is_zero(item.lam) or regime_of(item.lam, tolerances.imag_axis_tol) is not Regime.ZERO_RE:
            continue
        if np.linalg.norm(item.P @ f) > threshold:
            strong = False
    limit = d.projection_at_zero() @ f
    limit.flags.writeable = False
    return CesaroLimit(limit, strong)


@dataclass(frozen=True, eq=False)
class ShiftedOperator:
    ApP: np.ndarray
    inverse: np.ndarray


def shifted_operator(A, P, tol=None):
    """``A + P`` and its inverse, where ``P`` projects onto ``ker A`` along ``R(A)``."""
    A = as_matrix(A)
    P = as_matrix(P, "P")
    if P.shape != A.shape:
        raise InputError("A and P must have the same shape")
    tol = (tol or ToleranceConfig()).resolve(A)
    B = A + P
    smallest = np.linalg.svd(B, compute_uv=False)[-1]
    if smallest <= tol.rank_tol:
        raise SingularShiftError(
            f"A + P is singular (smallest singular value {smallest:.3e}); "
            "P is not the projection onto ker A along R(A)"
        )
    return ShiftedOperator(B, np.linalg.inv(B))


@dataclass(frozen=True, eq=False)
class RateBound:
    """Outcome of an ``||mean(t) - P f|| <= C/t`` check on a time grid.

    ``sup_norm`` is estimated on the grid (plus ``t = 0``), not proved.
    ``max_violation`` is the largest excess over the slackened bound (0 when
    satisfied); ``identity_residual`` is the largest relative defect of
    ``mean(t) - P f = B^{-1} (y(t) - f) / t`` with ``B = A + P``.
    """

    constant: float
    satisfied: bool
    max_violation: float
    worst_t: float
    sup_norm: float
    inverse_norm: float
    identity_residual: float
    identity_satisfied: bool
    times: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.satisfied and self.identity_satisfied


def _rate_check(d, f, P, t_grid):
    times = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise InputError("t_grid must be positive and strictly increasing")
    f = as_vector(f, d.dim)
    verdict = classify_boundedness(d, f)
    if not verdict.bounded:
        raise UnboundedTrajectoryError("rate check requires a bounded trajectory", verdict)
    traj = Trajectory(d, f)
    Y, _ = traj.grid(np.concatenate([[0.0], times]))
    M, _ = traj.cesaro_grid(times)
    Pf = P @ f
    U = Y - Pf
    sup_norm = float(np.linalg.norm(U, axis=1).max())
    B = d.matrix + P
    B_inv = np.linalg.inv(B)
    inverse_norm = float(np.linalg.norm(B_inv, 2))
    constant = 2.0 * inverse_norm * sup_norm

    errors = np.linalg.norm(M - Pf, axis=1)
    bound = constant / times * (1.0 + RATE_SLACK_REL) + RATE_SLACK_ABS
    excess = errors - bound
    worst = int(np.argmax(errors * times))

    predicted = (B_inv @ (U[1:] - U[0]).T).T / times[:, None]
    scale = inverse_norm * (np.linalg.norm(U[1:], axis=1) + np.linalg.norm(U[0])) / times
    defect = np.linalg.norm((M - Pf) - predicted, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, defect / np.where(scale > 0, scale, 1.0), defect)
    identity_residual = float(rel.max())
    return RateBound(
        constant=constant,
        satisfied=bool(np.all(excess <= 0)),
        max_violation=float(max(0.0, excess.max())),
        worst_t=float(times[worst]),
        sup_norm=sup_norm,
        inverse_norm=inverse_norm,
        identity_residual=identity_residual,
        identity_satisfied=identity_residual <= IDENTITY_REL_TOL,
        times=times,
        errors=errors,
    )


def verify_rate_invertible(A, f, t_grid=None, tol=None):
    """Check ``||mean(t)|| <= 2 ||A^{-1}|| sup ||y|| / t`` and ``mean(t) = A^{-1}(y(t) - y(0))/t``."""
    d = _decompose(A, tol)
    if d.zero_item() is not None:
        raise InputError("verify_rate_invertible needs an invertible A; 0 is an eigenvalue")
    return _rate_check(d, f, np.zeros((d.dim, d.dim), dtype=complex), t_grid)


def verify_rate_reducible(A, f, t_grid=None, tol=None):
    """Rate check for reducibly invertible ``A`` through ``u(t) = y(t) - P f`` and ``A + P``."""
    d = _decompose(A, tol)
    ri = reducible_invertibility(d)
    if not ri.holds:
        raise InputError("A is not reducibly invertible (0 has index > 1)")
    return _rate_check(d, f, ri.P, t_grid)


@dataclass(frozen=True, eq=False)
class KernelLimitCheck:
    """``||A mean(t_n)||`` along a sequence, with the ``2 sup ||y|| / t_n`` bound.

    ``accumulation`` lists ``(t_n, mean, ||A mean||)`` whenever two consecutive
    means agree to ``ACCUMULATION_REL``; each such vector must lie in ``ker A``.
    """

    points: list
    sup_norm: float
    bound_satisfied: bool
    accumulation: list
    kernel_satisfied: bool

    @property
    def passed(self):
        return self.bound_satisfied and self.kernel_satisfied


def kernel_limit_check(A, f, t_seq, kernel_tol=1e-8, tol=None):
    d = _decompose(A, tol)
    f = as_vector(f, d.dim)
    times = np.asarray(t_seq, dtype=float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise InputError("t_seq must be positive and strictly increasing")
    verdict = classify_boundedness(d, f)
    if not verdict.bounded:
        raise UnboundedTrajectoryError("kernel limit check requires a bounded trajectory", verdict)
    traj = Trajectory(d, f)
    Y, _ = traj.grid(np.concatenate([[0.0], times]))
    M, _ = traj.cesaro_grid(times)
    sup_norm = float(np.linalg.norm(Y, axis=1).max())
    AM = np.linalg.norm(M @ d.matrix.T, axis=1)
    bound = 2.0 * sup_norm / times * (1.0 + RATE_SLACK_REL) + RATE_SLACK_ABS
    points = [(float(t), float(v)) for t, v in zip(times, AM)]
    accumulation = []
    for n in range(1, len(times)):
        gap = np.linalg.norm(M[n] - M[n - 1])
        size = max(np.linalg.norm(M[n]), np.linalg.norm(M[n - 1]))
        if gap <= ACCUMULATION_REL * size or gap == 0.0:
            accumulation.append((float(times[n]), M[n].copy(), float(AM[n])))
    return KernelLimitCheck(
        points=points,
        sup_norm=sup_norm,
        bound_satisfied=bool(np.all(AM <= bound)),
        accumulation=accumulation,
        kernel_satisfied=all(r <= kernel_tol for _, _, r in accumulation),
    )


def weak_limit_test(means, functionals, limit, tol):
    """Finite surrogate for weak convergence: ``|<mean_n - limit, g>| < tol`` at the last ``n``.

    The pairing is the bilinear one, ``sum_i x_i g_i``.
    """
    means = [np.asarray(m, dtype=complex) for m in means]
    if not means:
        raise InputError("need at least one mean")
    limit = np.asarray(limit, dtype=complex)
    last = means[-1] - limit
    return all(abs(np.sum(last * np.asarray(g, dtype=complex))) < tol for g in functionals)


@dataclass(frozen=True, eq=False)
class CesaroReport:
    """Cesaro means of one trajectory on a geometric time grid.

    ``grid`` holds ``(t, mean, ||mean - limit||)``; ``kernel_residuals`` holds
    ``(t, ||A mean(t)||, 2 sup ||y|| / t)``.
    """

    analytic_limit: np.ndarray
    strong: bool
    grid: list
    rate_bound: RateBound | None
    kernel_residuals: list
    warnings: list

    @property
    def passed(self):
        rate_ok = self.rate_bound is None or self.rate_bound.passed
        kernel_ok = all(r <= b for _, r, b in self.kernel_residuals)
        return rate_ok and kernel_ok


def cesaro_report(A, f, t_max=1e4, per_decade=16, tol=None):
    d = _decompose(A, tol)
    f = as_vector(f, d.dim)
    lim = cesaro_limit(d, f)
    times = default_time_grid(1.0, t_max, per_decade)
    traj = Trajectory(d, f)
    M, _ = traj.cesaro_grid(times)
    Y, _ = traj.grid(np.concatenate([[0.0], times]))
    sup_norm = float(np.linalg.norm(Y, axis=1).max())
    errors = np.linalg.norm(M - lim.limit, axis=1)
    grid = [(float(t), M[i].copy(), float(errors[i])) for i, t in enumerate(times)]
    notes = ["sup ||y|| is estimated on the sampling grid"]
    if d.ill_conditioned:
        notes.append(f"similarity condition {d.similarity_condition:.3e} exceeds 1e12")
    rate = None
    if reducible_invertibility(d).holds:
        rate = verify_rate_reducible(d, f, times)
    else:
        notes.append("A is not reducibly invertible; no O(1/t) rate is asserted")
    AM = np.linalg.norm(M @ d.matrix.T, axis=1)
    kernel = [
        (float(t), float(AM[i]), 2.0 * sup_norm / t * (1.0 + RATE_SLACK_REL) + RATE_SLACK_ABS)
        for i, t in enumerate(times)
    ]
    return CesaroReport(lim.limit, lim.strong, grid, rate, kernel, notes)


def report_to_csv(report):
    """CSV of the report grid: ``t``, interleaved re/im mean components, ``error_norm``."""
    dim = len(report.analytic_limit)
    header = ["t"]
    for i in range(dim):
        header += [f"mean{i}_re", f"mean{i}_im"]
    header.append("error_norm")
    lines = [",".join(header)]
    for t, mean, err in report.grid:
        cells = [repr(float(t))]
        for z in mean:
            cells += [repr(float(z.real)), repr(float(z.imag))]
        cells.append(repr(float(err)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def pure_imaginary_offset_bound(d, f):
    """``2 sum_j ||P_j f|| / |lam_j|`` over nonzero eigenvalues on the imaginary axis."""
    f = as_vector(f, d.dim)
    total = 0.0
    for item in d.items:
        if d.is_zero(item.lam) or regime_of(item.lam, d.tolerances.imag_axis_tol) is not Regime.ZERO_RE:
            continue
        total += 2.0 * float(np.linalg.norm(item.P @ f)) / abs(item.lam)
    return total

