"""Exact finite-support models of operators on the square-summable sequences.

Vectors have finitely many nonzero coordinates, indexed from 1 (``x_1, x_2, ...``).
All operators here map finite-support vectors to finite-support vectors, so
every computation is exact on the stored entries; no truncation is involved.

Three operators are modelled:

* ``RightShift``: ``{x1, x2, ...} -> {0, x1, x2, ...}``; injective with a
  bounded inverse on its range, but ``ker A (+) R(A)`` is not the whole space.
* ``ParityProjection``: ``{x1, x2, x3, ...} -> {x1, 0, x3, 0, ...}``; reducibly
  invertible but not invertible.
* ``Diagonal``: ``(Af)_n = lam_n f_n`` with finitely many listed eigenvalues
  and a default for every other index. Its spectral measure is atomic,
  ``E(delta)`` being the coordinate projection onto ``{n : lam_n in delta}``.
  Coordinate projections have norm 1, so the spectral-measure bound ``M`` is 1.
"""

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
from scipy.optimize import brentq

from .errors import InputError, UnboundedTrajectoryError

#: bound on ``||E(delta)||`` for coordinate projections
SPECTRAL_BOUND = 1.0


class FiniteSupportVector:
    """Sequence with finitely many nonzero complex coordinates (1-based)."""

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        clean = {}
        for index, value in dict(entries or {}).items():
            if isinstance(index, bool) or int(index) != index or index < 1:
                raise InputError(f"coordinate indices are integers >= 1, got {index!r}")
            value = complex(value)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise InputError("coordinates must be finite")
            if value != 0:
                clean[int(index)] = value
        self._entries = MappingProxyType(dict(sorted(clean.items())))

    @classmethod
    def basis(cls, n):
        return cls({n: 1.0})

    @classmethod
    def from_dense(cls, values, start=1):
        return cls({start + i: v for i, v in enumerate(values)})

    @property
    def entries(self):
        return self._entries

    @property
    def support(self):
        return tuple(self._entries)

    def __getitem__(self, n):
        return self._entries.get(n, 0j)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.items())

    def __eq__(self, other):
        if not isinstance(other, FiniteSupportVector):
            return NotImplemented
        return dict(self._entries) == dict(other._entries)

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def __repr__(self):
        return f"FiniteSupportVector({dict(self._entries)!r})"

    def __add__(self, other):
        out = dict(self._entries)
        for n, v in other:
            out[n] = out.get(n, 0j) + v
        return FiniteSupportVector(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return FiniteSupportVector({n: c * v for n, v in self})

    def norm(self):
        return math.sqrt(sum(abs(v) ** 2 for _, v in self))

    def restrict(self, keep):
        """Coordinates ``n`` with ``keep(n)`` true; the rest zeroed."""
        return FiniteSupportVector({n: v for n, v in self if keep(n)})

    def to_dense(self, length=None):
        length = max(self.support, default=0) if length is None else length
        out = np.zeros(length, dtype=complex)
        for n, v in self:
            if n > length:
                raise InputError(f"coordinate {n} does not fit in length {length}")
            out[n - 1] = v
        return out


def pairing(f, g):
    """Bilinear pairing ``sum_n f_n g_n``."""
    return sum(v * g[n] for n, v in f)


class SequenceOperator:
    kind = "abstract"

    def apply(self, f):
        raise NotImplementedError


class RightShift(SequenceOperator):
    kind = "right-shift"

    def apply(self, f):
        return FiniteSupportVector({n + 1: v for n, v in f})

    def left_inverse(self, g):
        """Inverse on the range: ``{0, y2, y3, ...} -> {y2, y3, ...}``."""
        if g[1] != 0:
            raise InputError("vector is not in the range of the right shift (x_1 != 0)")
        return FiniteSupportVector({n - 1: v for n, v in g})

    @staticmethod
    def in_range(g):
        return g[1] == 0


class ParityProjection(SequenceOperator):
    kind = "parity-projection"

    def apply(self, f):
        return f.restrict(lambda n: n % 2 == 1)

    def kernel_part(self, f):
        return f.restrict(lambda n: n % 2 == 0)

    def eigenvalue(self, n):
        return 1.0 + 0j if n % 2 == 1 else 0j

    def as_diagonal(self, support):
        return Diagonal({n: self.eigenvalue(n) for n in support}, default=0.0)


@dataclass(frozen=True, eq=False)
class Diagonal(SequenceOperator):
    """``(Af)_n = lam_n f_n``: ``atoms`` maps listed indices to eigenvalues, ``default`` the rest."""

    atoms: dict = field(default_factory=dict)
    default: complex = 0j
    kind = "diagonal"

    def __post_init__(self):
        clean = {}
        for n, lam in dict(self.atoms).items():
            if int(n) != n or n < 1:
                raise InputError(f"atom indices are integers >= 1, got {n!r}")
            clean[int(n)] = complex(lam)
        object.__setattr__(self, "atoms", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "default", complex(self.default))

    def __eq__(self, other):
        if not isinstance(other, Diagonal):
            return NotImplemented
        return dict(self.atoms) == dict(other.atoms) and self.default == other.default

    def __hash__(self):
        return hash((tuple(self.atoms.items()), self.default))

    def eigenvalue(self, n):
        return self.atoms.get(n, self.default)

    def values(self):
        """Distinct eigenvalues attained (listed atoms plus the default)."""
        return sorted(set(self.atoms.values()) | {self.default}, key=lambda z: (z.real, z.imag))

    def apply(self, f):
        return FiniteSupportVector({n: self.eigenvalue(n) * v for n, v in f})

    def truncate(self, support):
        """Diagonal matrix of the eigenvalues on ``support`` (in the given order)."""
        return np.diag([self.eigenvalue(n) for n in support]).astype(complex)


def apply(op, f):
    return op.apply(f)


@dataclass(frozen=True)
class DecompositionStatus:
    """Kernel/range structure of a sequence operator.

    ``kernel`` and ``range_description`` are human-readable; ``kernel_basis``
    lists the finitely many coordinates spanning the kernel when it is spanned
    by listed basis vectors, and ``kernel_includes_default`` says whether all
    unlisted coordinates belong to it as well.
    """

    invertible_on_range: bool
    reducibly_invertible: bool
    kernel: str
    range_description: str
    kernel_basis: tuple = ()
    kernel_includes_default: bool = False
    witness: str = ""


def decomposition_status(op):
    if isinstance(op, RightShift):
        return DecompositionStatus(
            invertible_on_range=True,
            reducibly_invertible=False,
            kernel="{0}",
            range_description="{x : x_1 = 0}, a proper closed subspace",
            witness="e_1 is not in R(A) while ker A = {0}, so ker A (+) R(A) misses e_1",
        )
    if isinstance(op, ParityProjection):
        return DecompositionStatus(
            invertible_on_range=False,
            reducibly_invertible=True,
            kernel="span{e_n : n even}",
            range_description="span{e_n : n odd} (closed)",
            witness="A e_2 = 0 with e_2 != 0; f = Af + (f - Af) splits every f",
        )
    if isinstance(op, Diagonal):
        zeros = tuple(n for n, lam in op.atoms.items() if lam == 0)
        default_zero = op.default == 0
        injective = not zeros and not default_zero
        nonzero = [abs(v) for v in op.values() if v != 0]
        # finitely many eigenvalues: 0 is either absent or an isolated point
        isolated = not nonzero or min(nonzero) > 0
        if injective:
            kernel = "{0}"
        elif default_zero:
            kernel = "span{e_n : n unlisted" + (f" or n in {list(zeros)}" if zeros else "") + "}"
        else:
            kernel = f"span{{e_n : n in {list(zeros)}}}"
        return DecompositionStatus(
            invertible_on_range=injective,
            reducibly_invertible=isolated,
            kernel=kernel,
            range_description="closed span{e_n : lam_n != 0}",
            kernel_basis=zeros,
            kernel_includes_default=default_zero,
            witness="0 is absent from or isolated in the finite eigenvalue set",
        )
    raise TypeError(f"unsupported operator {op!r}")


@dataclass(frozen=True)
class CoordinateProjection:
    """``E(delta)`` for a diagonal operator: keeps coordinate ``n`` iff ``lam_n`` is in ``delta``.

    ``indices`` are the listed coordinates kept; ``includes_default`` says
    whether unlisted coordinates (eigenvalue ``default``) are kept too.
    """

    indices: frozenset
    includes_default: bool
    listed: frozenset

    def contains(self, n):
        return n in self.indices if n in self.listed else self.includes_default

    def apply(self, f):
        return f.restrict(self.contains)


def spectral_projection(op, delta):
    """Atomic spectral measure of a diagonal operator evaluated at the set ``delta``.

    ``delta`` is a predicate on complex numbers; it is only evaluated at eigenvalues.
    """
    if isinstance(op, ParityProjection):
        raise TypeError("convert with ParityProjection.as_diagonal(support) first")
    if not isinstance(op, Diagonal):
        raise TypeError("spectral projections are defined for diagonal operators")
    indices = frozenset(n for n, lam in op.atoms.items() if delta(lam))
    return CoordinateProjection(indices, bool(delta(op.default)), frozenset(op.atoms))


@dataclass(frozen=True)
class GenerationCheck:
    generates: bool
    omega: float

    @property
    def bounded_semigroup(self):
        return self.omega <= 0


def semigroup_generation_check(op):
    """A diagonal operator generates ``e^{tA}`` iff its spectrum lies in ``Re lam <= omega``."""
    omega = max(v.real for v in op.values())
    return GenerationCheck(generates=math.isfinite(omega), omega=float(omega))


def _exp(z):
    # complex exp that underflows quietly to 0
    return complex(np.exp(complex(z)))


def weak_solution_general(op, f, t):
    """``y(t) = e^{tA} f`` coordinatewise: ``y_n(t) = e^{t lam_n} f_n``."""
    if t < 0:
        raise InputError("t must be nonnegative")
    return FiniteSupportVector({n: _exp(t * op.eigenvalue(n)) * v for n, v in f})


@dataclass(frozen=True)
class ScalarBoundedness:
    bounded: bool
    violating_indices: tuple


def classify_scalar_bounded(op, f, tol=0.0):
    """Bounded iff ``f_n = 0`` wherever ``Re lam_n > tol`` (``tol = 0`` is the exact test)."""
    bad = tuple(n for n, _ in f if op.eigenvalue(n).real > tol)
    return ScalarBoundedness(not bad, bad)


@dataclass(frozen=True)
class ScalarCesaroLimit:
    limit: FiniteSupportVector
    strong: bool


def cesaro_limit_scalar(op, f):
    """``E({0}) f`` for a bounded trajectory of a diagonal operator.

    ``strong`` holds when no coordinate of ``f`` sits on a nonzero purely
    imaginary eigenvalue; then ``y(t) -> E({0}) f`` in norm.
    """
    check = classify_scalar_bounded(op, f)
    if not check.bounded:
        raise UnboundedTrajectoryError(
            f"f has components on Re lam > 0 at indices {list(check.violating_indices)}", check
        )
    limit = f.restrict(lambda n: op.eigenvalue(n) == 0)
    strong = not any(
        op.eigenvalue(n).real == 0 and op.eigenvalue(n) != 0 for n in f.support
    )
    return ScalarCesaroLimit(limit, strong)


def cesaro_mean_scalar(op, f, t):
    """Closed-form ``(1/t) int_0^t y(s) ds``: coordinate ``n`` scaled by ``(e^{t lam}-1)/(t lam)``."""
    if not t > 0:
        raise InputError("t must be positive")
    from ._kernels import _pykernels

    out = {}
    for n, v in f:
        lam = op.eigenvalue(n)
        weight = _pykernels.mean_weights(lam, np.array([float(t)]), 1)[0, 0]
        out[n] = weight * v
    return FiniteSupportVector(out)


@dataclass(frozen=True, eq=False)
class DecayReport:
    """Norms of ``e^{tA} E({Re lam < 0}) f`` on a time grid.

    ``bound_time`` is the time after which ``4 M ||f|| e^{-t/n} < eps/2`` with
    ``1/n`` not exceeding the slowest decay rate present, which guarantees the
    norm is below ``eps``; ``crossing_time`` is the exact time the norm drops
    below ``eps`` (``None`` if it starts there).
    """

    points: list
    monotone: bool
    eps: float
    slowest_rate: float | None
    rate_index: int | None
    bound_time: float | None
    crossing_time: float | None
    final_below_eps: bool


def negative_part_decay(op, f, t_grid, eps=1e-6, M=SPECTRAL_BOUND):
    negative = spectral_projection(op, lambda lam: lam.real < 0).apply(f)
    rates = {n: -op.eigenvalue(n).real for n in negative.support}
    weights = {n: abs(v) ** 2 for n, v in negative}

    def norm_at(t):
        return math.sqrt(sum(w * math.exp(-2.0 * t * rates[n]) for n, w in weights.items()))

    times = [float(t) for t in t_grid]
    points = [(t, norm_at(t)) for t in times]
    norms = [p[1] for p in points]
    monotone = all(b <= a for a, b in zip(norms, norms[1:]))
    if not rates:
        return DecayReport(points, monotone, eps, None, None, None, None, True)
    slowest = min(rates.values())
    n_index = math.ceil(1.0 / slowest)
    f_norm = f.norm()
    bound_time = n_index * math.log(8.0 * M * f_norm / eps) if 8.0 * M * f_norm > eps else 0.0
    crossing = None
    if norm_at(0.0) >= eps:
        hi = 1.0
        while norm_at(hi) >= eps:
            hi *= 2.0
        crossing = brentq(lambda t: norm_at(t) - eps, 0.0, hi, xtol=1e-12, rtol=1e-14)
    return DecayReport(
        points=points,
        monotone=monotone,
        eps=eps,
        slowest_rate=slowest,
        rate_index=n_index,
        bound_time=bound_time,
        crossing_time=crossing,
        final_below_eps=bool(norms) and norms[-1] < eps,
    )
