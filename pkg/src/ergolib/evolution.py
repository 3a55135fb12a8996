"""Trajectories ``y(t) = e^{tA} f`` and the bounded/unbounded dichotomy.

The exponential is evaluated through the finite sum

    e^{tA} f = sum_j e^{t lam_j} sum_{k < k_j} t^k/k! Q_j^k P_j f

using the precomputed orbit vectors ``Q_j^k P_j f``.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InputError, TrajectoryOverflowWarning
from .spectral_core import EPS, SpectralDecomposition, ToleranceConfig, as_matrix, as_vector

#: sampling density of the empirical boundedness check
EMPIRICAL_PER_DECADE = 32


class Trajectory:
    """The solution of ``y' = Ay``, ``y(0) = f`` for a decomposed ``A``."""

    def __init__(self, decomposition, f):
        if not isinstance(decomposition, SpectralDecomposition):
            raise TypeError("decomposition must be a SpectralDecomposition")
        self.decomposition = decomposition
        self.f = as_vector(f, decomposition.dim)
        items = decomposition.items
        self.lams = np.array([item.lam for item in items], dtype=complex)
        self.orders = np.array([item.index for item in items], dtype=np.int64)
        kmax = int(self.orders.max())
        self.orbits = np.zeros((len(items), kmax, decomposition.dim), dtype=complex)
        for j, item in enumerate(items):
            self.orbits[j, : item.index] = item.orbit(self.f)

    def grid(self, times):
        """``(Y, overflow)`` with ``Y[i] = y(times[i])``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise InputError("trajectory times must be nonnegative")
        return _kernels.trajectory_grid(self.lams, self.orbits, self.orders, times)

    def cesaro_grid(self, times):
        """``(M, overflow)`` with ``M[i] = (1/t) int_0^t y(s) ds`` at ``t = times[i] > 0``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times <= 0):
            raise InputError("Cesaro means need t > 0")
        return _kernels.cesaro_grid(self.lams, self.orbits, self.orders, times)

    def at(self, t):
        Y, overflow = self.grid([t])
        if overflow[0]:
            warnings.warn(
                f"|y(t)| exceeds 1e300 at t={t:g}; reported as infinite",
                TrajectoryOverflowWarning,
                stacklevel=3,
            )
        return Y[0]


def exp_action(d, f, t):
    """``e^{tA} f`` from the spectral exponential formula.

    Overflowing magnitudes (> 1e300) come back as ``inf`` entries together
    with a :class:`TrajectoryOverflowWarning`.
    """
    if t < 0:
        raise InputError("t must be nonnegative")
    return Trajectory(d, f).at(float(t))


def exp_series_oracle(A, t=1.0):
    """Matrix exponential ``e^{tA}`` by scaling and squaring a truncated Taylor series.

    Independent of the spectral decomposition; used as a test oracle.
    """
    M = as_matrix(A) * float(t)
    n = M.shape[0]
    norm = float(np.linalg.norm(M, 1))
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    X = M / 2.0**squarings
    total = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 40):
        term = term @ X / k
        total = total + term
        if np.linalg.norm(term, 1) <= EPS * np.linalg.norm(total, 1):
            break
    for _ in range(squarings):
        total = total @ total
    return total


class Regime(enum.Enum):
    NEG_RE = "NegRe"
    ZERO_RE = "ZeroRe"
    POS_RE = "PosRe"


@dataclass(frozen=True)
class Witness:
    """Per-eigenvalue record of the boundedness test.

    ``violating_term`` is ``(k, ||Q^k P f||)`` for the highest-order term that
    stops the summand from being bounded. ``margin`` is ``|Re lam|`` minus the
    imaginary-axis band; small or negative values mean the regime call is
    fragile.
    """

    lam: complex
    regime: Regime
    violated: bool
    violating_term: tuple | None
    margin: float


@dataclass(frozen=True, eq=False)
class BoundedTerm:
    lam: complex
    k: int
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class TrajectoryClass:
    verdict: str
    witnesses: tuple
    bounded_form: tuple | None = None
    dim: int = 0

    @property
    def bounded(self):
        return self.verdict == "Bounded"

    def evaluate_bounded_form(self, t):
        """Sum of the retained terms at time ``t`` (bounded verdicts only)."""
        if self.bounded_form is None:
            raise ValueError("unbounded trajectories have no bounded form")
        total = np.zeros(self.dim, dtype=complex)
        for term in self.bounded_form:
            total = total + np.exp(t * term.lam) * t**term.k / math.factorial(term.k) * term.vector
        return total


def regime_of(lam, imag_axis_tol):
    if abs(lam.real) <= imag_axis_tol:
        return Regime.ZERO_RE
    return Regime.NEG_RE if lam.real < 0 else Regime.POS_RE


def merged_tolerances(d, tol):
    """``tol`` with unset fields taken from the decomposition's resolved tolerances."""
    if tol is None:
        return d.tolerances
    names = ("eig_cluster_tol", "rank_tol", "imag_axis_tol", "residual_tol")
    return ToleranceConfig(
        **{name: getattr(d.tolerances, name) if getattr(tol, name) is None else getattr(tol, name) for name in names}
    )


def classify_boundedness(d, f, tol=None):
    """Bounded/unbounded verdict for ``y(t) = e^{tA} f`` with per-eigenvalue witnesses.

    A summand with ``Re lam < 0`` never violates; ``Re lam > 0`` violates
    unless ``P f`` vanishes; ``Re lam = 0`` violates unless ``Q^k P f``
    vanishes for ``k = 1 .. index-1``. Vanishing means norm at most
    ``residual_tol * (1 + ||f||)``.
    """
    tol = merged_tolerances(d, tol)
    f = as_vector(f, d.dim)
    threshold = tol.residual_tol * (1.0 + float(np.linalg.norm(f)))
    witnesses = []
    kept = []
    for item in d.items:
        regime = regime_of(item.lam, tol.imag_axis_tol)
        orbit = item.orbit(f)
        norms = np.linalg.norm(orbit, axis=1)
        first_k = 0 if regime is Regime.POS_RE else 1
        offending = [k for k in range(first_k, item.index) if norms[k] > threshold]
        violated = regime is not Regime.NEG_RE and bool(offending)
        term = (offending[-1], float(norms[offending[-1]])) if violated else None
        witnesses.append(
            Witness(
                lam=item.lam,
                regime=regime,
                violated=violated,
                violating_term=term,
                margin=abs(item.lam.real) - tol.imag_axis_tol,
            )
        )
        if regime is Regime.NEG_RE:
            kept.extend(BoundedTerm(item.lam, k, orbit[k]) for k in range(item.index))
        elif regime is Regime.ZERO_RE:
            kept.append(BoundedTerm(item.lam, 0, orbit[0]))
    if any(w.violated for w in witnesses):
        return TrajectoryClass("Unbounded", tuple(witnesses), None, d.dim)
    return TrajectoryClass("Bounded", tuple(witnesses), tuple(kept), d.dim)


def geometric_grid(t_min, t_max, per_decade):
    """Geometric grid on ``[t_min, t_max]`` with ``per_decade`` points per decade."""
    if not 0 < t_min < t_max:
        raise InputError("need 0 < t_min < t_max")
    count = max(2, int(round(per_decade * math.log10(t_max / t_min))) + 1)
    return np.geomspace(t_min, t_max, count)


@dataclass(frozen=True, eq=False)
class EmpiricalBoundedness:
    sup_norm: float
    growing: bool
    overflow: bool
    times: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)


def empirical_boundedness(d, f, t_max, n_samples=None, decades=5):
    """Sample ``||y(t)||`` at ``t = 0`` and on a geometric grid ending at ``t_max``.

    ``growing`` is set when the largest norm in the last decade exceeds ten
    times the largest norm in the first decade (``t = 0`` included), or when
    the trajectory overflows.
    """
    if t_max <= 0:
        raise InputError("t_max must be positive")
    t_min = t_max * 10.0**-decades
    if n_samples is None:
        grid = geometric_grid(t_min, t_max, EMPIRICAL_PER_DECADE)
    else:
        grid = np.geomspace(t_min, t_max, int(n_samples))
    times = np.concatenate([[0.0], grid])
    Y, overflow = Trajectory(d, f).grid(times)
    with np.errstate(over="ignore", invalid="ignore"):
        norms = np.linalg.norm(Y, axis=1)
    any_overflow = bool(overflow.any())
    first = norms[times <= 10 * t_min].max()
    last = norms[times >= t_max / 10].max()
    growing = any_overflow or bool(last > 10 * first)
    sup = float(np.inf if any_overflow else norms.max())
    return EmpiricalBoundedness(sup, growing, any_overflow, times, norms)
