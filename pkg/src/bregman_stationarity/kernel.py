"""Separable Legendre kernels and their Bregman divergences.

A kernel h(x) = sum_i phi(x_i) is described by a :class:`KernelSpec`, an immutable
value holding the family name, its parameter and the endpoints [a, c] of
cl(dom(phi)). All oracles accept scalars or numpy arrays and work elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit, logit, xlogy

from bregman_stationarity.errors import ConstructionError, DimensionError, DomainError, RangeError
from bregman_stationarity.utils.roots import solve_monotone

INV_TOL = 1e-12
BOUNDARY_TOL = 1e-12
INV_MAX_ITER = 200
_MAX_BRACKET_DOUBLINGS = 1100


class KernelName(StrEnum):
    SHANNON = "shannon"
    FERMI_DIRAC = "fermi_dirac"
    BURG = "burg"
    FRACTIONAL_POWER = "fractional_power"
    HELLINGER = "hellinger"
    POLYNOMIAL = "polynomial"
    EUCLIDEAN = "euclidean"


_TAGS = {
    KernelName.SHANNON: "shannon",
    KernelName.FERMI_DIRAC: "fermi",
    KernelName.BURG: "burg",
    KernelName.FRACTIONAL_POWER: "fracpow",
    KernelName.HELLINGER: "hellinger",
    KernelName.POLYNOMIAL: "poly",
    KernelName.EUCLIDEAN: "euclid",
}
_FROM_TAG = {tag: name for name, tag in _TAGS.items()}


@dataclass(frozen=True)
class _Family:
    """Elementwise oracles of one kernel family, all taking ``(x, param)``"""

    phi: Callable
    dphi: Callable
    d2phi: Callable
    dphi_inv: Callable
    # open interval of phi' values
    range_lo: Callable[[float | None], float]
    range_hi: Callable[[float | None], float]
    endpoints: tuple[float, float]
    supercoercive: bool
    divergence: Callable | None = None


def _shannon_divergence(y, x, _p):
    return xlogy(y, y / x) - y + x


def _burg_divergence(y, x, _p):
    r = y / x
    return r - np.log(r) - 1.0


def _euclid_divergence(y, x, _p):
    return 0.5 * (y - x) ** 2


def _fracpow_inv(s, p):
    return ((p - s) * (1.0 - p) / p) ** (1.0 / (p - 1.0))


_FAMILIES: dict[KernelName, _Family] = {
    KernelName.SHANNON: _Family(
        phi=lambda x, _p: xlogy(x, x),
        dphi=lambda x, _p: np.log(x) + 1.0,
        d2phi=lambda x, _p: 1.0 / x,
        dphi_inv=lambda s, _p: np.exp(s - 1.0),
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: np.inf,
        endpoints=(0.0, np.inf),
        supercoercive=True,
        divergence=_shannon_divergence,
    ),
    KernelName.FERMI_DIRAC: _Family(
        phi=lambda x, _p: xlogy(x, x) + xlogy(1.0 - x, 1.0 - x),
        dphi=lambda x, _p: logit(x),
        d2phi=lambda x, _p: 1.0 / (x * (1.0 - x)),
        dphi_inv=lambda s, _p: expit(s),
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: np.inf,
        endpoints=(0.0, 1.0),
        supercoercive=True,
    ),
    KernelName.BURG: _Family(
        phi=lambda x, _p: -np.log(x),
        dphi=lambda x, _p: -1.0 / x,
        d2phi=lambda x, _p: 1.0 / x**2,
        dphi_inv=lambda s, _p: -1.0 / s,
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: 0.0,
        endpoints=(0.0, np.inf),
        supercoercive=False,
        divergence=_burg_divergence,
    ),
    KernelName.FRACTIONAL_POWER: _Family(
        phi=lambda x, p: p * x - x**p / (1.0 - p),
        dphi=lambda x, p: p - p * x ** (p - 1.0) / (1.0 - p),
        d2phi=lambda x, p: p * x ** (p - 2.0),
        dphi_inv=_fracpow_inv,
        range_lo=lambda _p: -np.inf,
        range_hi=lambda p: p,
        endpoints=(0.0, np.inf),
        supercoercive=False,
    ),
    KernelName.HELLINGER: _Family(
        phi=lambda x, _p: -np.sqrt(1.0 - x**2),
        dphi=lambda x, _p: x / np.sqrt(1.0 - x**2),
        d2phi=lambda x, _p: (1.0 - x**2) ** -1.5,
        dphi_inv=lambda s, _p: s / np.sqrt(1.0 + s**2),
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: np.inf,
        endpoints=(-1.0, 1.0),
        supercoercive=True,
    ),
    KernelName.POLYNOMIAL: _Family(
        phi=lambda x, a: x ** (-a) / a,
        dphi=lambda x, a: -(x ** (-a - 1.0)),
        d2phi=lambda x, a: (a + 1.0) * x ** (-a - 2.0),
        dphi_inv=lambda s, a: (-1.0 / s) ** (1.0 / (1.0 + a)),
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: 0.0,
        endpoints=(0.0, np.inf),
        supercoercive=False,
    ),
    KernelName.EUCLIDEAN: _Family(
        phi=lambda x, _p: 0.5 * x**2,
        dphi=lambda x, _p: x,
        d2phi=lambda x, _p: np.ones_like(x),
        dphi_inv=lambda s, _p: s,
        range_lo=lambda _p: -np.inf,
        range_hi=lambda _p: np.inf,
        endpoints=(-np.inf, np.inf),
        supercoercive=True,
        divergence=_euclid_divergence,
    ),
}


@dataclass(frozen=True)
class KernelSpec:
    """A separable kernel phi with its domain endpoints.

    ``param`` is p in (0, 1) for the fractional power family and alpha > 0 for the
    polynomial family; it must be ``None`` for every other family.
    """

    name: KernelName
    param: float | None = None
    a: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        name = KernelName(self.name)
        object.__setattr__(self, "name", name)
        if name is KernelName.FRACTIONAL_POWER:
            if self.param is None or not 0.0 < self.param < 1.0:
                raise ConstructionError(f"fractional power kernel needs p in (0, 1), got {self.param}")
        elif name is KernelName.POLYNOMIAL:
            if self.param is None or not self.param > 0.0:
                raise ConstructionError(f"polynomial kernel needs alpha > 0, got {self.param}")
        elif self.param is not None:
            raise ConstructionError(f"kernel {name} takes no parameter, got {self.param}")
        if self.param is not None:
            object.__setattr__(self, "param", float(self.param))
        a, c = _FAMILIES[name].endpoints
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    # -- identity -----------------------------------------------------------------

    @classmethod
    def shannon(cls) -> KernelSpec:
        return cls(KernelName.SHANNON)

    @classmethod
    def polynomial(cls, alpha: float) -> KernelSpec:
        return cls(KernelName.POLYNOMIAL, alpha)

    @classmethod
    def from_tag(cls, tag: str) -> KernelSpec:
        """Parse a short tag such as ``"shannon"``, ``"poly:1.0"`` or ``"fracpow:0.5"``"""
        head, _, arg = tag.strip().partition(":")
        head = head.lower()
        if head in _FROM_TAG:
            name = _FROM_TAG[head]
        else:
            try:
                name = KernelName(head)
            except ValueError:
                raise ConstructionError(f"unknown kernel tag {tag!r}") from None
        param = None
        if arg:
            try:
                param = float(arg)
            except ValueError:
                raise ConstructionError(f"bad kernel parameter in tag {tag!r}") from None
        return cls(name, param)

    def to_tag(self) -> str:
        tag = _TAGS[self.name]
        if self.param is None:
            return tag
        return f"{tag}:{self.param!r}"

    def __str__(self) -> str:
        return self.to_tag()

    # -- metadata -----------------------------------------------------------------

    @property
    def _family(self) -> _Family:
        return _FAMILIES[self.name]

    @property
    def legendre(self) -> bool:
        """False for the euclidean baseline, whose derivative never blows up"""
        return self.name is not KernelName.EUCLIDEAN

    @property
    def closed_domain(self) -> bool:
        """True when phi is finite at every finite endpoint"""
        return self.name not in (KernelName.BURG, KernelName.POLYNOMIAL)

    @property
    def supercoercive(self) -> bool:
        return self._family.supercoercive

    @property
    def dual_range(self) -> tuple[float, float]:
        """Open interval of values taken by phi' on the interior"""
        return self._family.range_lo(self.param), self._family.range_hi(self.param)

    # -- domain checks ------------------------------------------------------------

    def in_closure(self, x: ArrayLike) -> NDArray[np.bool_]:
        x = np.asarray(x, dtype=float)
        return (x >= self.a) & (x <= self.c)

    def in_interior(self, x: ArrayLike) -> NDArray[np.bool_]:
        x = np.asarray(x, dtype=float)
        return (x > self.a) & (x < self.c)

    def near_boundary(self, x: ArrayLike, rel: float = BOUNDARY_TOL) -> NDArray[np.bool_]:
        """Coordinates within rel * max(1, |endpoint|) of a finite endpoint; rel=0 means exactly on it"""
        x = np.asarray(x, dtype=float)
        near = np.zeros(x.shape, dtype=bool)
        if np.isfinite(self.a):
            near |= x - self.a <= boundary_tolerance(self.a, rel)
        if np.isfinite(self.c):
            near |= self.c - x <= boundary_tolerance(self.c, rel)
        return near

    def _require(self, mask: NDArray[np.bool_], x: NDArray, what: str) -> None:
        if not np.all(mask):
            bad = np.atleast_1d(x)[~np.atleast_1d(mask)]
            raise DomainError(f"{self.to_tag()}: {bad[:5].tolist()} outside {what} of dom(phi) = [{self.a}, {self.c}]")

    # -- oracles ------------------------------------------------------------------

    def phi(self, x: ArrayLike):
        """phi(x) on cl(dom(phi)); +inf at endpoints where phi blows up"""
        x = np.asarray(x, dtype=float)
        self._require(self.in_closure(x), x, "the closure")
        with np.errstate(divide="ignore", over="ignore"):
            value = self._family.phi(x, self.param)
        value = np.where(np.isnan(value), np.inf, value)
        return _unwrap(value)

    def phi_prime(self, x: ArrayLike):
        x = np.asarray(x, dtype=float)
        self._require(self.in_interior(x), x, "the interior")
        return _unwrap(self._family.dphi(x, self.param))

    def phi_double_prime(self, x: ArrayLike):
        x = np.asarray(x, dtype=float)
        self._require(self.in_interior(x), x, "the interior")
        return _unwrap(self._family.d2phi(x, self.param))

    def phi_prime_inv(self, s: ArrayLike, exact: bool = True):
        """Inverse of phi'.

        With ``exact=False`` the closed form is bypassed and the root of
        phi'(x) = s is found by safeguarded bisection + Newton on a bracket grown
        geometrically from an interior seed.
        """
        s = np.asarray(s, dtype=float)
        lo, hi = self.dual_range
        if not np.all((s > lo) & (s < hi)):
            bad = np.atleast_1d(s)[~np.atleast_1d((s > lo) & (s < hi))]
            raise RangeError(f"{self.to_tag()}: {bad[:5].tolist()} outside the range ({lo}, {hi}) of phi'")
        if exact:
            return _unwrap(self._family.dphi_inv(s, self.param))
        out = np.array([self._numeric_inverse(v) for v in np.atleast_1d(s)])
        return _unwrap(out.reshape(s.shape))

    def mirror_inverse(self, s: NDArray) -> NDArray:
        """(phi')^{-1} extended to the closed dual line: values at or beyond the
        range limits map to the matching domain endpoint (possibly infinite)."""
        s = np.asarray(s, dtype=float)
        lo, hi = self.dual_range
        inside = (s > lo) & (s < hi)
        safe = np.where(inside, s, _interior_seed(lo, hi))
        with np.errstate(over="ignore", divide="ignore"):
            x = self._family.dphi_inv(safe, self.param)
        x = np.where(s <= lo, self.a, x)
        return np.where(s >= hi, self.c, x)

    def _numeric_inverse(self, s: float) -> float:
        dphi = self._family.dphi
        param = self.param
        seed = _interior_seed(self.a, self.c)

        def residual(x: float) -> float:
            return float(dphi(x, param)) - s

        lo_x = self._grow_bracket(seed, self.a, -1.0, lambda x: residual(x) <= 0.0)
        hi_x = self._grow_bracket(seed, self.c, 1.0, lambda x: residual(x) >= 0.0)
        if lo_x is None or hi_x is None:
            raise RangeError(f"{self.to_tag()}: could not bracket phi'(x) = {s}")
        return solve_monotone(
            residual,
            lo_x,
            hi_x,
            derivative=lambda x: float(self._family.d2phi(x, param)),
            xtol=INV_TOL,
            maxiter=INV_MAX_ITER,
        )

    @staticmethod
    def _grow_bracket(seed: float, endpoint: float, direction: float, done: Callable[[float], bool]) -> float | None:
        """Halve the gap to a finite endpoint, or double the step toward an infinite one, until ``done``"""
        x, step = seed, 1.0
        for _ in range(_MAX_BRACKET_DOUBLINGS):
            if done(x):
                return x
            if np.isfinite(endpoint):
                x = endpoint + (x - endpoint) / 2.0
                if x == endpoint:
                    return None
            else:
                step *= 2.0
                x = seed + direction * step
                if not np.isfinite(x):
                    return None
        return None

    # -- divergences --------------------------------------------------------------

    def bregman(self, y: ArrayLike, x: ArrayLike):
        """Elementwise D_phi(y, x) for y in dom(phi), x in int(dom(phi))"""
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        self._require(self.in_closure(y), y, "the closure")
        self._require(self.in_interior(x), x, "the interior")
        fam = self._family
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if fam.divergence is not None:
                d = fam.divergence(y, x, self.param)
            else:
                phi_y = fam.phi(y, self.param)
                phi_y = np.where(np.isnan(phi_y), np.inf, phi_y)
                d = phi_y - fam.phi(x, self.param) - fam.dphi(x, self.param) * (y - x)
            d = np.where(np.isnan(d), np.inf, d)
        return _unwrap(np.maximum(d, 0.0))


def boundary_tolerance(endpoint: ArrayLike, rel: float = BOUNDARY_TOL) -> NDArray:
    """Distance within which a coordinate counts as sitting on ``endpoint``"""
    return rel * np.maximum(1.0, np.abs(np.asarray(endpoint, dtype=float)))


def _interior_seed(a: float, c: float) -> float:
    if np.isfinite(a) and np.isfinite(c):
        return 0.5 * (a + c)
    if np.isfinite(a):
        return a + 1.0
    if np.isfinite(c):
        return c - 1.0
    return 0.0


def _unwrap(value: NDArray):
    if np.ndim(value) == 0:
        return float(value)
    return value


def phi(kernel: KernelSpec, x: ArrayLike):
    return kernel.phi(x)


def phi_prime(kernel: KernelSpec, x: ArrayLike):
    return kernel.phi_prime(x)


def phi_prime_inv(kernel: KernelSpec, s: ArrayLike, exact: bool = True):
    return kernel.phi_prime_inv(s, exact=exact)


def bregman_scalar(kernel: KernelSpec, y: float, x: float) -> float:
    if np.ndim(y) or np.ndim(x):
        raise DimensionError("bregman_scalar takes scalars; use bregman_vec for vectors")
    return kernel.bregman(y, x)


def bregman_vec(kernel: KernelSpec, y: ArrayLike, x: ArrayLike) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if y.shape != x.shape:
        raise DimensionError(f"shape mismatch {y.shape} vs {x.shape}")
    return float(np.sum(kernel.bregman(y, x)))
