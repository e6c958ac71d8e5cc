"""Uniform-grid fields, initial-condition zoo, and marker/norm/pairing functionals.

A Field is a nonnegative function sampled on a uniform grid; cell i sits at
x = origin + i*dx.  Everything here is a pure function on immutable values.
Outside its window a field is implicitly zero.
"""

from dataclasses import dataclass, field as _dc_field

import numpy as np

__all__ = [
    "Field",
    "InitialCondition",
    "Heavyside",
    "Bump",
    "SplitHeavyside",
    "ZetaRamp",
    "ZetaRampPlus",
    "Custom",
    "render",
    "pairing",
    "batch_pairing",
    "right_marker",
    "left_marker",
    "lambda_norm",
    "shift",
    "reflect",
    "resample",
    "in_class_H",
    "in_M",
    "write_snapshot",
    "read_snapshot",
]

# relative tolerance for "is a grid multiple" checks
_GRID_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Field:
    """Nonnegative finite values on the uniform grid origin + i*dx."""

    origin: float
    dx: float
    values: np.ndarray = _dc_field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("Field needs a 1-d value array of length >= 2")
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("Field values must be finite")
        if np.any(v < 0):
            raise ValueError("Field values must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    def x(self):
        """Grid coordinates."""
        return self.origin + self.dx * np.arange(self.n)

    @property
    def window(self):
        return (self.origin, self.origin + self.dx * (self.n - 1))

    def interp(self, x):
        """Piecewise-linear evaluation at arbitrary points, zero outside."""
        return np.interp(x, self.x(), self.values, left=0.0, right=0.0)


def _h0(x):
    """Ramp profile: 1 for x <= -1, -x on [-1, 0], 0 for x >= 0."""
    return np.minimum(1.0, np.maximum(-x, 0.0))


class InitialCondition:
    """Base of the initial-condition variants; subclasses render to a Field."""

    def evaluate(self, x, dx):
        raise NotImplementedError


@dataclass(frozen=True)
class Heavyside(InitialCondition):
    """eps * ramp(x - x0): level eps left of x0-1, linear down to 0 at x0."""

    eps: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def evaluate(self, x, dx):
        return self.eps * _h0(x - self.x0)


@dataclass(frozen=True)
class Bump(InitialCondition):
    """Triangular bump max(0, 1-|x|)."""

    def evaluate(self, x, dx):
        return np.maximum(0.0, 1.0 - np.abs(x))


@dataclass(frozen=True)
class SplitHeavyside(InitialCondition):
    """Two opposing ramps: support (-inf,-1] u [1,inf), a gap around 0."""

    def evaluate(self, x, dx):
        return _h0(x + 1.0) + _h0(1.0 - x)


@dataclass(frozen=True)
class ZetaRamp(InitialCondition):
    """Finite stand-in for "infinite mass on the negative axis".

    Renders as 0 for x >= 0 and min(N, N*(-x)/dx) for x < 0: a one-cell-wide
    linear ramp up to the cap N, then flat.  Pointwise nondecreasing in N.
    """

    N: float = 50.0

    def __post_init__(self):
        if self.N <= 0:
            raise ValueError("N must be positive")

    def evaluate(self, x, dx):
        return np.where(x < 0, np.minimum(self.N, self.N * (-x) / dx), 0.0)


@dataclass(frozen=True)
class ZetaRampPlus(InitialCondition):
    """ZetaRamp(N) plus a given profile on the nonnegative half line."""

    N: float
    psi: Field

    def evaluate(self, x, dx):
        ramp = ZetaRamp(self.N).evaluate(x, dx)
        return ramp + np.where(x >= 0, self.psi.interp(x), 0.0)


@dataclass(frozen=True)
class Custom(InitialCondition):
    """Wraps an existing Field; rendering resamples it linearly."""

    f: Field

    def evaluate(self, x, dx):
        return self.f.interp(x)


def render(ic, window, dx):
    """Sample an initial condition onto the grid covering [a, b].

    The grid starts exactly at a and covers b (last point may overshoot by
    less than dx).
    """
    a, b = window
    if not (a < b):
        raise ValueError("window must satisfy a < b")
    if dx <= 0:
        raise ValueError("dx must be positive")
    n = int(np.ceil((b - a) / dx - _GRID_RTOL)) + 1
    x = a + dx * np.arange(n)
    vals = ic.evaluate(x, dx)
    return Field(a, dx, np.maximum(vals, 0.0))


def _cells_offset(f, g):
    """Integer cell offset of g's origin from f's; error if grids misalign."""
    if abs(f.dx - g.dx) > _GRID_RTOL * max(f.dx, g.dx):
        raise ValueError(f"mismatched dx: {f.dx} vs {g.dx} (resample first)")
    off = (g.origin - f.origin) / f.dx
    k = round(off)
    if abs(off - k) > 1e-6:
        raise ValueError("grids are not commensurate (resample first)")
    return k


def batch_pairing(x0, dx, U, g):
    """Trapezoidal pairings of every row of the (R, n) matrix U against g.

    U rows live on the grid x0 + i*dx; g is a Field on a commensurate grid.
    Returns a length-R vector.
    """
    probe = Field(x0, dx, np.zeros(U.shape[1]))
    k = _cells_offset(probe, g)
    lo = max(0, k)
    hi = min(U.shape[1], k + g.n)
    if hi - lo < 2:
        return np.zeros(U.shape[0])
    w = np.full(hi - lo, dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return U[:, lo:hi] @ (g.values[lo - k:hi - k] * w)


def pairing(f, g):
    """Trapezoidal approximation of the integral of f*g over the overlap.

    Fields on non-overlapping windows pair to 0.  Grids must share dx and
    align; resampling is a separate explicit operation.
    """
    k = _cells_offset(f, g)
    # overlap in f's cell indices
    lo = max(0, k)
    hi = min(f.n, k + g.n)
    if hi - lo < 2:
        return 0.0
    prod = f.values[lo:hi] * g.values[lo - k:hi - k]
    return f.dx * (prod.sum() - 0.5 * (prod[0] + prod[-1]))


def right_marker(f):
    """Rightmost grid coordinate with a strictly positive value; -inf if none."""
    if isinstance(f, Field):
        vals, origin, dx = f.values, f.origin, f.dx
    else:
        raise TypeError("right_marker expects a Field")
    idx = np.flatnonzero(vals > 0)
    if idx.size == 0:
        return float("-inf")
    return origin + dx * float(idx[-1])


def left_marker(f):
    """Leftmost grid coordinate with a strictly positive value; +inf if none."""
    idx = np.flatnonzero(f.values > 0)
    if idx.size == 0:
        return float("inf")
    return f.origin + f.dx * float(idx[0])


def lambda_norm(f, lam):
    """sup over the grid of value * exp(-lam * |x|)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return float(np.max(f.values * np.exp(-lam * np.abs(f.x()))))


def shift(f, h):
    """The field x -> f(x + h); h must be a grid multiple."""
    cells = h / f.dx
    k = round(cells)
    if abs(cells - k) > 1e-6:
        raise ValueError(f"shift {h} is not a multiple of dx={f.dx}")
    return Field(f.origin - k * f.dx, f.dx, f.values)


def reflect(f):
    """The mirror image x -> f(-x) on the reflected grid."""
    return Field(-(f.origin + (f.n - 1) * f.dx), f.dx, f.values[::-1])


def resample(f, window, dx):
    """Linear resampling onto a new grid (explicit, lossy)."""
    return render(Custom(f), window, dx)


def in_class_H(f, eps, x0):
    """Does f dominate eps * ramp(x - x0) at every grid point of its window?"""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return bool(np.all(f.values >= eps * _h0(f.x() - x0) - 1e-12))


def in_M(f, d0, m0):
    """Is there a grid interval [l0, l0+d0] inside [-1/2, 0] with all cells >= m0?

    Scans every candidate l0 on the grid.
    """
    if not (0 < d0 <= 0.5):
        raise ValueError("need 0 < d0 <= 1/2")
    if m0 <= 0:
        raise ValueError("m0 must be positive")
    x = f.x()
    tol = _GRID_RTOL * max(1.0, abs(f.origin))
    span = int(np.floor(d0 / f.dx + 1e-9))
    ok = f.values >= m0
    for i in range(f.n - span):
        if x[i] < -0.5 - 1e-12 - tol or x[i] + d0 > 1e-12 + tol:
            continue
        if ok[i:i + span + 1].all():
            return True
    return False


def write_snapshot(fh, t, f):
    """Text snapshot: header 't x0 dx n' then n whitespace-separated values."""
    fh.write(f"{float(t)!r} {f.origin!r} {f.dx!r} {f.n}\n")
    fh.write(" ".join(repr(float(v)) for v in f.values))
    fh.write("\n")


def read_snapshot(fh):
    """Inverse of write_snapshot; returns (t, Field)."""
    header = fh.readline().split()
    if len(header) != 4:
        raise ValueError("malformed snapshot header")
    t, x0, dx = float(header[0]), float(header[1]), float(header[2])
    n = int(header[3])
    vals = np.array(fh.readline().split(), dtype=np.float64)
    if vals.size != n:
        raise ValueError(f"snapshot expected {n} values, got {vals.size}")
    return t, Field(x0, dx, vals)
