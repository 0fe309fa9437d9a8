"""Duct cross-section profiles and the coordinate maps built on them.

Conventions used throughout the package:

* ``S(x)`` is the cross-section area ratio, normalized so S(0) = 1.
* ``zeta(x) = integral_0^x dx' / sqrt(S)`` is the stretched range coordinate.
* ``mu(x) = nu * sqrt(S(x))`` is the effective absorption coefficient.

A duct family is *classified* by a quadratic ``b(zeta) = beta0 + beta1*zeta
+ beta2*zeta**2`` and a constant ``M`` through ``ln(mu/nu) = d(zeta)`` with
``d = M * integral_0^zeta dy / b(y)``.  :func:`d_of_zeta` evaluates the three
closed forms of that integral (by the sign of the discriminant of ``b``) and
falls back to direct quadrature near the case boundary.

Profiles are frozen dataclasses; any internal tables are built eagerly at
construction so instances can be shared between threads read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ._quadrature import adaptive_quad
from .errors import ConfigError, DomainError, SingularProfileError

_ROUNDTRIP_TOL = 1e-10
_CASE_BOUNDARY_TOL = 1e-12
_TABLE_KNOTS = 513


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _scalar_map(func, x):
    """Apply a scalar function over x, preserving scalar/array shape."""
    arr, scalar = _as_float_array(x)
    if scalar:
        return func(float(arr))
    out = np.empty(arr.shape)
    flat = arr.ravel()
    out_flat = out.ravel()
    for i in range(flat.size):
        out_flat[i] = func(float(flat[i]))
    return out


def _check_range(x, lo, hi, what, hi_inclusive=True):
    arr, _ = _as_float_array(x)
    if np.any(arr < lo) or np.any(arr > hi if hi_inclusive else arr >= hi):
        bad = arr[(arr < lo) | ((arr > hi) if hi_inclusive else (arr >= hi))]
        raise DomainError(
            f"{what} = {float(np.atleast_1d(bad)[0]):g} outside "
            f"[{lo:g}, {hi:g}{']' if hi_inclusive else ')'}")


class Profile:
    """Common surface of all duct profiles.

    Subclasses provide ``area``, ``area_derivative``, ``zeta_of_x`` and
    ``x_of_zeta``; everything else derives from those.
    """

    x_max: float = math.inf
    zeta_max: float = math.inf
    betas: tuple[float, float, float, float] | None = None

    def area(self, x):
        raise NotImplementedError

    def area_derivative(self, x):
        raise NotImplementedError

    def zeta_of_x(self, x):
        raise NotImplementedError

    def x_of_zeta(self, zeta):
        raise NotImplementedError

    def mu(self, nu, x):
        """Absorption coefficient nu * sqrt(S(x))."""
        return nu * np.sqrt(self.area(x))

    def mu_x_over_mu(self, x):
        """Logarithmic derivative d ln(mu)/dx = S'/(2S)."""
        return self.area_derivative(x) / (2.0 * self.area(x))

    def mu_of_zeta(self, nu, zeta):
        return self.mu(nu, self.x_of_zeta(zeta))


@dataclass(frozen=True)
class ConstantProfile(Profile):
    """Uniform duct: S = 1 identically, zeta coincides with x."""

    def area(self, x):
        arr, scalar = _as_float_array(x)
        _check_range(arr, 0.0, math.inf, "x")
        return 1.0 if scalar else np.ones(arr.shape)

    def area_derivative(self, x):
        arr, scalar = _as_float_array(x)
        return 0.0 if scalar else np.zeros(arr.shape)

    def zeta_of_x(self, x):
        _check_range(x, 0.0, math.inf, "x")
        arr, scalar = _as_float_array(x)
        return float(arr) if scalar else arr.copy()

    def x_of_zeta(self, zeta):
        _check_range(zeta, 0.0, math.inf, "zeta")
        arr, scalar = _as_float_array(zeta)
        return float(arr) if scalar else arr.copy()


@dataclass(frozen=True)
class ExponentialProfile(Profile):
    """Exponential horn: S(x) = exp(2*alpha*x), so mu/nu = exp(alpha*x)."""

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ConfigError("alpha must be finite")
        object.__setattr__(self, "zeta_max",
                           1.0 / self.alpha if self.alpha > 0 else math.inf)

    def area(self, x):
        _check_range(x, 0.0, math.inf, "x")
        return np.exp(2.0 * self.alpha * np.asarray(x, dtype=float)) if np.ndim(x) \
            else math.exp(2.0 * self.alpha * float(x))

    def area_derivative(self, x):
        return 2.0 * self.alpha * self.area(x)

    def zeta_of_x(self, x):
        _check_range(x, 0.0, math.inf, "x")
        a = self.alpha
        if a == 0.0:
            return np.asarray(x, dtype=float) + 0.0 if np.ndim(x) else float(x)
        xv = np.asarray(x, dtype=float)
        out = -np.expm1(-a * xv) / a
        return out if np.ndim(x) else float(out)

    def x_of_zeta(self, zeta):
        _check_range(zeta, 0.0, self.zeta_max, "zeta", hi_inclusive=False)
        a = self.alpha
        if a == 0.0:
            return np.asarray(zeta, dtype=float) + 0.0 if np.ndim(zeta) else float(zeta)
        zv = np.asarray(zeta, dtype=float)
        out = -np.log1p(-a * zv) / a
        return out if np.ndim(zeta) else float(out)


@dataclass(frozen=True)
class SphericalProfile(Profile):
    """Conical duct: S(x) = (1 + x/R)**2.

    R > 0 expands; R < 0 tapers and the domain stops short of the focal
    point x = |R| where the section collapses.
    """

    radius: float

    def __post_init__(self):
        if self.radius == 0.0 or not math.isfinite(self.radius):
            raise ConfigError("radius must be finite and nonzero")
        if self.radius < 0:
            object.__setattr__(self, "x_max", -self.radius)

    def area(self, x):
        _check_range(x, 0.0, self.x_max, "x", hi_inclusive=False)
        base = 1.0 + np.asarray(x, dtype=float) / self.radius
        out = base * base
        return out if np.ndim(x) else float(out)

    def area_derivative(self, x):
        _check_range(x, 0.0, self.x_max, "x", hi_inclusive=False)
        out = 2.0 * (1.0 + np.asarray(x, dtype=float) / self.radius) / self.radius
        return out if np.ndim(x) else float(out)

    def zeta_of_x(self, x):
        _check_range(x, 0.0, self.x_max, "x", hi_inclusive=False)
        out = self.radius * np.log1p(np.asarray(x, dtype=float) / self.radius)
        return out if np.ndim(x) else float(out)

    def x_of_zeta(self, zeta):
        _check_range(zeta, 0.0, math.inf, "zeta")
        out = self.radius * np.expm1(np.asarray(zeta, dtype=float) / self.radius)
        if np.ndim(zeta):
            if np.any(out >= self.x_max):
                raise DomainError("zeta maps beyond the profile domain")
            return out
        out = float(out)
        if out >= self.x_max:
            raise DomainError("zeta maps beyond the profile domain")
        return out


@dataclass(frozen=True)
class PowerLawProfile(Profile):
    """Power-law duct S(x) = (1 + (M+beta1)*x/beta0)**(2M/(beta1+M)).

    This is the beta2 = 0 classified family in its original coordinate.
    The degenerate direction beta1 = -M is the exponential horn; use
    :class:`ExponentialProfile` for it.
    """

    beta0: float
    beta1: float
    m: float

    def __post_init__(self):
        if self.beta0 <= 0:
            raise ConfigError("beta0 must be positive")
        if self.m == 0:
            raise ConfigError("M must be nonzero")
        if self.m + self.beta1 == 0:
            raise ConfigError(
                "beta1 = -M degenerates to the exponential horn; "
                "use ExponentialProfile")
        c = (self.m + self.beta1) / self.beta0
        object.__setattr__(self, "_c", c)
        if c < 0:
            object.__setattr__(self, "x_max", -1.0 / c)
        if self.beta1 < 0:
            object.__setattr__(self, "zeta_max", -self.beta0 / self.beta1)
        object.__setattr__(self, "betas",
                           (self.beta0, self.beta1, 0.0, self.m))

    def _base(self, x):
        _check_range(x, 0.0, self.x_max, "x", hi_inclusive=False)
        base = 1.0 + self._c * np.asarray(x, dtype=float)
        if np.any(np.asarray(base) <= 0.0):
            raise DomainError("power-law base reached zero inside the range")
        return base

    def area(self, x):
        out = self._base(x) ** (2.0 * self.m / (self.beta1 + self.m))
        return out if np.ndim(x) else float(out)

    def area_derivative(self, x):
        base = self._base(x)
        p = 2.0 * self.m / (self.beta1 + self.m)
        out = p * self._c * base ** (p - 1.0)
        return out if np.ndim(x) else float(out)

    def mu_x_over_mu(self, x):
        out = self.m / (self.beta0 + (self.m + self.beta1) * np.asarray(x, dtype=float))
        return out if np.ndim(x) else float(out)

    def zeta_of_x(self, x):
        base = self._base(x)
        if self.beta1 == 0.0:
            out = (self.beta0 / self.m) * np.log(base)
        else:
            q = self.beta1 / (self.m + self.beta1)
            out = (self.beta0 / self.beta1) * (base ** q - 1.0)
        return out if np.ndim(x) else float(out)

    def x_of_zeta(self, zeta):
        _check_range(zeta, 0.0, self.zeta_max, "zeta", hi_inclusive=False)
        zv = np.asarray(zeta, dtype=float)
        if self.beta1 == 0.0:
            out = (np.exp(self.m * zv / self.beta0) - 1.0) / self._c
        else:
            inner = 1.0 + self.beta1 * zv / self.beta0
            out = (inner ** ((self.m + self.beta1) / self.beta1) - 1.0) / self._c
        return out if np.ndim(zeta) else float(out)


@dataclass(frozen=True)
class BetaFamilyProfile(Profile):
    """Duct defined in the stretched coordinate by mu/nu = exp(d(zeta)).

    The map back to x comes from dx = sqrt(S) dzeta = exp(d) dzeta and is
    tabulated once at construction; both directions then agree to the
    round-trip tolerance by bracketed refinement on the same table.
    """

    beta0: float
    beta1: float
    beta2: float
    m: float
    zeta_cap: float | None = None

    def __post_init__(self):
        if self.beta0 <= 0:
            raise ConfigError("beta0 must be positive (b(0) > 0)")
        betas = (self.beta0, self.beta1, self.beta2, self.m)
        object.__setattr__(self, "betas", betas)
        cap = self.zeta_cap
        root = _first_positive_root(self.beta0, self.beta1, self.beta2)
        if cap is None:
            cap = root * (1.0 - 1e-9) if root is not None else 32.0
        elif root is not None and cap >= root:
            raise ConfigError(
                f"zeta_cap {cap:g} reaches the singular point b(zeta)=0 at {root:g}")
        object.__setattr__(self, "zeta_max", cap)
        knots = np.linspace(0.0, cap, _TABLE_KNOTS)
        xs = np.empty_like(knots)
        xs[0] = 0.0
        for i in range(1, knots.size):
            xs[i] = xs[i - 1] + adaptive_quad(
                lambda z: math.exp(d_of_zeta(betas, z)),
                knots[i - 1], knots[i], rtol=1e-12)
        object.__setattr__(self, "_zeta_knots", knots)
        object.__setattr__(self, "_x_knots", xs)
        object.__setattr__(self, "x_max", float(xs[-1]))

    def _x_of_zeta_scalar(self, z):
        _check_range(z, 0.0, self.zeta_max, "zeta")
        knots = self._zeta_knots
        j = int(np.searchsorted(knots, z, side="right")) - 1
        j = min(max(j, 0), knots.size - 1)
        return self._x_knots[j] + adaptive_quad(
            lambda y: math.exp(d_of_zeta(self.betas, y)), knots[j], z, rtol=1e-12)

    def x_of_zeta(self, zeta):
        return _scalar_map(self._x_of_zeta_scalar, zeta)

    def _zeta_of_x_scalar(self, x):
        _check_range(x, 0.0, self.x_max, "x")
        xs = self._x_knots
        if x == 0.0:
            return 0.0
        i = int(np.searchsorted(xs, x))
        i = min(max(i, 1), xs.size - 1)
        lo, hi = self._zeta_knots[i - 1], self._zeta_knots[i]
        return brentq(lambda z: self._x_of_zeta_scalar(z) - x, lo, hi,
                      xtol=1e-14, rtol=8.9e-16)

    def zeta_of_x(self, x):
        return _scalar_map(self._zeta_of_x_scalar, x)

    def area(self, x):
        zeta = self.zeta_of_x(x)
        return np.exp(2.0 * d_of_zeta(self.betas, zeta))

    def area_derivative(self, x):
        zeta = self.zeta_of_x(x)
        d = d_of_zeta(self.betas, zeta)
        b = classifying_b(self.betas, zeta)
        return 2.0 * self.m * np.exp(d) / b

    def mu_x_over_mu(self, x):
        zeta = self.zeta_of_x(x)
        d = d_of_zeta(self.betas, zeta)
        b = classifying_b(self.betas, zeta)
        return self.m * np.exp(-d) / b

    def mu_of_zeta(self, nu, zeta):
        # closed form; skips the zeta -> x -> zeta round trip of the base class
        return nu * np.exp(d_of_zeta(self.betas, zeta))


@dataclass(frozen=True)
class TabulatedProfile(Profile):
    """Profile interpolated from measured (x, S) samples.

    Uses shape-preserving monotone cubic interpolation between samples, so
    positive data stays positive.  The sample range declares the domain.
    """

    x_samples: np.ndarray
    s_samples: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_samples, dtype=float)
        s = np.asarray(self.s_samples, dtype=float)
        if x.ndim != 1 or x.shape != s.shape or x.size < 4:
            raise ConfigError("need matching 1-d x and S samples, at least 4 points")
        if np.any(np.diff(x) <= 0):
            raise ConfigError("x samples must be strictly increasing")
        if x[0] != 0.0:
            raise ConfigError("profile tables must start at x = 0")
        if abs(s[0] - 1.0) > 1e-8:
            raise ConfigError("S(0) must equal 1 (normalized cross-section)")
        if np.any(s <= 0.0):
            raise ConfigError("cross-section samples must be positive")
        object.__setattr__(self, "x_samples", x)
        object.__setattr__(self, "s_samples", s)
        interp = PchipInterpolator(x, s, extrapolate=False)
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_dinterp", interp.derivative())
        object.__setattr__(self, "x_max", float(x[-1]))
        zknots = np.empty_like(x)
        zknots[0] = 0.0
        for i in range(1, x.size):
            zknots[i] = zknots[i - 1] + adaptive_quad(
                lambda t: 1.0 / math.sqrt(float(interp(t))),
                x[i - 1], x[i], rtol=1e-12)
        object.__setattr__(self, "_zeta_knots", zknots)
        object.__setattr__(self, "zeta_max", float(zknots[-1]))

    def area(self, x):
        _check_range(x, 0.0, self.x_max, "x")
        out = self._interp(x)
        return out if np.ndim(x) else float(out)

    def area_derivative(self, x):
        _check_range(x, 0.0, self.x_max, "x")
        out = self._dinterp(x)
        return out if np.ndim(x) else float(out)

    def _zeta_of_x_scalar(self, x):
        _check_range(x, 0.0, self.x_max, "x")
        xs = self.x_samples
        i = int(np.searchsorted(xs, x))
        i = min(max(i, 1), xs.size - 1)
        j = i - 1
        return self._zeta_knots[j] + adaptive_quad(
            lambda t: 1.0 / math.sqrt(float(self._interp(t))),
            xs[j], x, rtol=1e-12)

    def zeta_of_x(self, x):
        return _scalar_map(self._zeta_of_x_scalar, x)

    def _x_of_zeta_scalar(self, z):
        _check_range(z, 0.0, self.zeta_max, "zeta")
        zk = self._zeta_knots
        if z == 0.0:
            return 0.0
        if z == zk[-1]:
            return float(self.x_samples[-1])
        i = int(np.searchsorted(zk, z))
        i = min(max(i, 1), zk.size - 1)
        lo, hi = self.x_samples[i - 1], self.x_samples[i]
        return brentq(lambda x: self._zeta_of_x_scalar(x) - z, lo, hi,
                      xtol=1e-14, rtol=8.9e-16)

    def x_of_zeta(self, zeta):
        return _scalar_map(self._x_of_zeta_scalar, zeta)


def load_profile_table(path) -> TabulatedProfile:
    """Read a two-column ``x S`` text file ('#' comments) into a profile."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ConfigError(
            f"profile table must have two columns (x, S), got {data.shape[1]}")
    return TabulatedProfile(data[:, 0], data[:, 1])


def classifying_b(betas, zeta):
    """The classifying quadratic b(zeta) = beta0 + beta1*zeta + beta2*zeta**2."""
    b0, b1, b2, _ = betas
    z = np.asarray(zeta, dtype=float)
    out = b0 + z * (b1 + b2 * z)
    return out if np.ndim(zeta) else float(out)


def _first_positive_root(b0, b1, b2):
    """Smallest root of the classifying quadratic in (0, inf), if any."""
    if b2 == 0.0:
        if b1 == 0.0:
            return None
        r = -b0 / b1
        return r if r > 0 else None
    disc = b1 * b1 - 4.0 * b0 * b2
    if disc < 0:
        return None
    s = math.sqrt(disc)
    # two-product form: the naive (-b1 +/- s)/(2 b2) cancels for tiny b2
    q = -0.5 * (b1 + math.copysign(s, b1))
    roots = sorted((q / b2, b0 / q)) if q != 0.0 else (0.0, 0.0)
    for r in roots:
        if r > 0:
            return r
    return None


def _check_no_root(betas, zmax):
    b0, b1, b2, _ = betas
    if b0 == 0.0:
        raise SingularProfileError("b(0) = beta0 vanishes")
    r = _first_positive_root(b0, b1, b2)
    if r is not None and r <= zmax:
        raise SingularProfileError(
            f"b(zeta) vanishes at zeta = {r:g} inside [0, {zmax:g}]")


def _stable_sqrt_disc_terms(b0, b1, b2, s):
    """(s - b1, s + b1) for s = sqrt(b1^2 - 4 b0 b2), avoiding cancellation."""
    if b1 > 0:
        minus = -4.0 * b0 * b2 / (s + b1)
        plus = s + b1
    elif b1 < 0:
        minus = s - b1
        plus = -4.0 * b0 * b2 / (s - b1)
    else:
        minus = plus = s
    return minus, plus


def d_of_zeta(betas, zeta, *, boundary_tol=_CASE_BOUNDARY_TOL):
    """Classified absorption exponent d(zeta) = M * integral_0^zeta dy/b(y).

    Evaluates the closed form matching the discriminant of b; parameters
    within ``boundary_tol`` (relative) of the degenerate case are handed to
    direct quadrature instead of either closed form.

    Raises :class:`SingularProfileError` if b vanishes inside [0, zeta].
    """
    b0, b1, b2, m = betas
    zarr, scalar = _as_float_array(zeta)
    if np.any(zarr < 0):
        raise DomainError("zeta must be nonnegative")
    zmax = float(zarr.max()) if zarr.size else 0.0
    _check_no_root(betas, zmax)
    if m == 0.0:
        out = np.zeros(zarr.shape)
        return 0.0 if scalar else out

    if b2 == 0.0:
        if b1 == 0.0:
            out = m * zarr / b0
        else:
            # log first: m/b1 alone can overflow for subnormal b1
            out = m * (np.log1p(b1 * zarr / b0) / b1)
        return float(out) if scalar else out

    disc = b1 * b1 - 4.0 * b0 * b2
    scale = max(1.0, b1 * b1, abs(4.0 * b0 * b2))
    if disc == 0.0:
        out = 2.0 * m * zarr / (2.0 * b0 + b1 * zarr)
        return float(out) if scalar else out
    if abs(disc) <= boundary_tol * scale:
        def _quad_one(z):
            return m * adaptive_quad(
                lambda y: 1.0 / (b0 + y * (b1 + b2 * y)), 0.0, z, rtol=1e-12)
        return _scalar_map(_quad_one, zeta)
    if disc < 0.0:
        s = math.sqrt(-disc)
        out = (2.0 * m / s) * (np.arctan((b1 + 2.0 * b2 * zarr) / s)
                               - math.atan(b1 / s))
        return float(out) if scalar else out
    s = math.sqrt(disc)
    minus, plus = _stable_sqrt_disc_terms(b0, b1, b2, s)
    ratio = ((minus - 2.0 * b2 * zarr) * plus) / ((plus + 2.0 * b2 * zarr) * minus)
    out = (m / s) * np.log(ratio)
    return float(out) if scalar else out


def beta_profile_table(betas, s_range, n=65):
    """Tabulate (S, zeta, x) for a classified duct family.

    Supports the two branches with closed or single-quadrature forms:
    ``beta2 = 0`` (power-law / exponential ducts) and ``beta1 = 0``
    (arctangent absorption ducts, where x needs one quadrature in S).

    Returns an (n, 3) array with columns S, zeta, x over ``s_range``.
    """
    b0, b1, b2, m = betas
    if m == 0.0:
        raise ConfigError("the classified family needs M != 0")
    if b0 <= 0.0:
        raise ConfigError("beta0 must be positive")
    smin, smax = float(s_range[0]), float(s_range[1])
    if not (0.0 < smin <= smax):
        raise ConfigError(f"bad S range {s_range!r}")
    grid = np.linspace(smin, smax, n)

    if b2 == 0.0:
        if b1 == -m:
            x = (b0 / (2.0 * m)) * np.log(grid)
            zeta = (b0 / m) * (1.0 - grid ** -0.5)
        elif b1 == 0.0:
            x = (b0 / m) * (np.sqrt(grid) - 1.0)
            zeta = (b0 / (2.0 * m)) * np.log(grid)
        else:
            x = (b0 / (m + b1)) * (grid ** ((m + b1) / (2.0 * m)) - 1.0)
            zeta = (b0 / b1) * (grid ** (b1 / (2.0 * m)) - 1.0)
        return np.column_stack([grid, zeta, x])

    if b1 == 0.0:
        if b0 * b2 <= 0.0:
            raise ConfigError("this branch needs beta0*beta2 > 0")
        root = math.sqrt(b0 * b2)
        theta = (root / (2.0 * m)) * np.log(grid)
        if np.any(np.abs(theta) >= math.pi / 2.0 - 1e-12):
            bad = grid[np.abs(theta) >= math.pi / 2.0 - 1e-12][0]
            raise SingularProfileError(
                f"cos factor vanishes inside the S range (S = {bad:g})")
        zeta = math.sqrt(b0 / b2) * np.tan(theta)

        def integrand(s):
            th = (root / (2.0 * m)) * math.log(s)
            return (b0 / (2.0 * m)) / (math.sqrt(s) * math.cos(th) ** 2)

        x = np.empty_like(grid)
        x[0] = adaptive_quad(integrand, 1.0, grid[0])
        for i in range(1, grid.size):
            x[i] = x[i - 1] + adaptive_quad(integrand, grid[i - 1], grid[i])
        return np.column_stack([grid, zeta, x])

    raise ConfigError(
        "tabulation supports beta2 = 0 or beta1 = 0 families only")
