"""Smooth compactly supported windows and their integral transforms.

A window is any callable with a ``support`` interval inside (0, 1) and a
hashable ``key``. :class:`SmoothWindow` covers the two built-in families;
:class:`WindowSum` represents finite linear combinations so linearity can
be exercised directly.

Integrals use composite Gauss-Legendre on the support with panel doubling
until two successive refinements agree. The direct three-dimensional route
for ``h1_tilde_half`` uses tanh-sinh nodes instead, so the two routes share
no quadrature code.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

QUAD_TOL = 1e-13
GL_ORDER = 20
MAX_PANELS = 1 << 16

WINDOW_KINDS = ("standard_bump", "shifted_power_bump")


def _bump_core(t: np.ndarray) -> np.ndarray:
    """exp(-1/(t(1-t))) on (0,1), zero elsewhere."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (ti * (1.0 - ti)))
    return out


@dataclass(frozen=True)
class SmoothWindow:
    """A smooth bump supported in (0, 1).

    ``standard_bump`` is exp(-1/(x(1-x))) on (0,1). ``shifted_power_bump``
    takes ``params = (left, right, power)`` and evaluates
    ``t**power * exp(-1/(t(1-t)))`` with ``t = (x-left)/(right-left)``, an
    asymmetric bump on the sub-interval (left, right).
    """

    kind: str = "standard_bump"
    params: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}; expected one of {WINDOW_KINDS}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "scale", float(self.scale))
        if self.kind == "standard_bump":
            if params:
                raise ValueError("standard_bump takes no parameters")
        else:
            if len(params) != 3:
                raise ValueError("shifted_power_bump needs params (left, right, power)")
            left, right, power = params
            if not 0.0 <= left < right <= 1.0:
                raise ValueError("shifted_power_bump support must lie inside (0, 1)")
            if power < 0:
                raise ValueError("shifted_power_bump power must be non-negative")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "standard_bump":
            return (0.0, 1.0)
        return (self.params[0], self.params[1])

    @property
    def key(self) -> tuple:
        return ("window", self.kind, self.params, self.scale)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.scale == 0.0:
            return np.zeros_like(x)
        if self.kind == "standard_bump":
            return self.scale * _bump_core(x)
        left, right, power = self.params
        t = (x - left) / (right - left)
        core = _bump_core(t)
        if power:
            core = core * np.clip(t, 0.0, 1.0) ** power
        return self.scale * core

    def scaled(self, c: float) -> "SmoothWindow":
        return SmoothWindow(self.kind, self.params, self.scale * c)

    def __rmul__(self, c):
        if isinstance(c, (int, float)):
            return self.scaled(float(c))
        return NotImplemented

    def __add__(self, other):
        return WindowSum(((1.0, self),)) + other

    def reflected(self) -> "WindowSum":
        """x -> w(1 - x)."""
        return WindowSum(((1.0, self),), reflect=True)

    def describe(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "scale": self.scale}


@dataclass(frozen=True)
class WindowSum:
    """Finite linear combination of windows (optionally reflected x -> 1-x)."""

    terms: tuple
    reflect: bool = False

    @property
    def support(self) -> tuple[float, float]:
        lo = min(w.support[0] for _, w in self.terms)
        hi = max(w.support[1] for _, w in self.terms)
        if self.reflect:
            return (1.0 - hi, 1.0 - lo)
        return (lo, hi)

    @property
    def key(self) -> tuple:
        return ("sum", self.reflect, tuple((c, w.key) for c, w in self.terms))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.reflect:
            x = 1.0 - x
        out = np.zeros_like(x)
        for c, w in self.terms:
            out = out + c * w(x)
        return out

    def __add__(self, other):
        if isinstance(other, SmoothWindow):
            other = WindowSum(((1.0, other),))
        if not isinstance(other, WindowSum):
            return NotImplemented
        if self.reflect or other.reflect:
            return WindowSum(((1.0, self), (1.0, other)))
        return WindowSum(self.terms + other.terms)

    def __rmul__(self, c):
        if isinstance(c, (int, float)):
            return WindowSum(((float(c), self),))
        return NotImplemented


def make_window(spec) -> SmoothWindow:
    """Build a window from a name or a ``{"kind", "params", "scale"}`` mapping."""
    if isinstance(spec, SmoothWindow):
        return spec
    if isinstance(spec, str):
        return SmoothWindow(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"window spec needs a 'kind' field, got {spec!r}")
    return SmoothWindow(spec["kind"], tuple(spec.get("params", ())), spec.get("scale", 1.0))


# -- composite Gauss-Legendre ------------------------------------------------


@lru_cache(maxsize=8)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel_nodes(a: float, b: float, panels: int, order: int = GL_ORDER):
    x, w = _leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def composite_gl(f, a: float, b: float, panels: int):
    """Fixed composite Gauss-Legendre rule with ``panels`` equal panels."""
    if b <= a:
        return 0.0
    nodes, weights = _panel_nodes(a, b, panels)
    return np.sum(weights * f(nodes))


def adaptive_gl(f, a: float, b: float, min_panels: int = 4, tol: float = QUAD_TOL):
    """Double the panel count until successive estimates agree.

    Returns ``(value, panels)``. The stopping test is
    ``|I_2n - I_n| <= tol * max(1, |I_2n|)`` on an integrand of size O(1).
    """
    if b <= a:
        return 0.0, 0
    n = max(1, int(min_panels))
    prev = composite_gl(f, a, b, n)
    while True:
        n *= 2
        cur = composite_gl(f, a, b, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur, n
        if n >= MAX_PANELS:
            raise RuntimeError(f"quadrature did not converge with {n} panels")
        prev = cur


# -- transforms --------------------------------------------------------------


def integral(w, panels: int | None = None) -> float:
    """Integral of the window over the real line."""
    a, b = w.support
    if panels is not None:
        return float(composite_gl(w, a, b, panels))
    return float(adaptive_gl(w, a, b)[0])


def mellin(w, s: complex, panels: int | None = None) -> complex:
    """Mellin transform: integral of w(y) y^(s-1) dy over (0, inf)."""
    a, b = w.support
    s = complex(s)

    def f(y):
        return w(y) * np.exp((s - 1.0) * np.log(np.maximum(y, 1e-300)))

    # the phase y^(i t) turns over ~|t| log(b/a) / (2 pi) times
    turns = abs(s.imag) * math.log(b / max(a, 1e-3)) / (2 * math.pi)
    min_panels = max(4, int(4 * turns))
    if panels is not None:
        return complex(composite_gl(f, a, b, panels))
    return complex(adaptive_gl(f, a, b, min_panels=min_panels)[0])


def _tilde_panels(xi: float, a: float, b: float) -> int:
    # panels no wider than a quarter period
    return max(4, int(math.ceil(4.0 * abs(xi) * (b - a))))


def tilde_transform(w, xi: float, panels: int | None = None) -> float:
    """Integral of (cos(2 pi xi x) + sin(2 pi xi x)) w(x) dx."""
    a, b = w.support
    xi = float(xi)

    def f(x):
        arg = 2.0 * math.pi * xi * x
        return (np.cos(arg) + np.sin(arg)) * w(x)

    if panels is not None:
        return float(composite_gl(f, a, b, panels))
    return float(adaptive_gl(f, a, b, min_panels=_tilde_panels(xi, a, b))[0])


@dataclass
class TransformCache:
    """Memoized transforms of one window.

    Reads are lock-free; inserts take a lock. Concurrent misses may both
    compute the value, which is harmless since quadrature is deterministic.
    """

    window: object
    digits: int = 12
    _values: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _get(self, key, compute):
        try:
            return self._values[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            self._values.setdefault(key, value)
        return value

    def tilde(self, xi: float) -> float:
        key = ("tilde", round(float(xi), self.digits))
        return self._get(key, lambda: tilde_transform(self.window, xi))

    def mellin(self, s: complex) -> complex:
        s = complex(s)
        key = ("mellin", round(s.real, self.digits), round(s.imag, self.digits))
        return self._get(key, lambda: mellin(self.window, s))

    def integral(self) -> float:
        return self._get(("integral",), lambda: integral(self.window))

    def __len__(self) -> int:
        return len(self._values)


_caches: dict = {}
_caches_lock = threading.Lock()


def cache_for(w) -> TransformCache:
    """Process-wide cache keyed by the window's identity key."""
    key = w.key
    cache = _caches.get(key)
    if cache is None:
        with _caches_lock:
            cache = _caches.setdefault(key, TransformCache(w))
    return cache


def h1_tilde_half(phi, w) -> float:
    """The constant int W(x) dx * (int Phi(y) y^(-1/2) dy)^2."""
    m = cache_for(phi).mellin(0.5)
    return cache_for(w).integral() * (m * m).real


# -- independent tanh-sinh route --------------------------------------------


def tanh_sinh_rule(a: float, b: float, h: float = 1.0 / 32, tmax: float = 3.5):
    """Tanh-sinh nodes and weights on (a, b); endpoints are never sampled."""
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    u = 0.5 * math.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    keep = np.abs(x) < 1.0
    x, w = x[keep], w[keep]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def h1_tilde_half_direct(phi, w, h: float = 1.0 / 32) -> float:
    """Three-dimensional tanh-sinh quadrature of W(x) Phi(y) Phi(z) (yz)^(-1/2).

    Evaluates the full integrand on a tensor grid without using its
    product structure.
    """
    xa, xb = w.support
    ya, yb = phi.support
    x, wx = tanh_sinh_rule(xa, xb, h)
    y, wy = tanh_sinh_rule(ya, yb, h)
    X = x[:, None, None]
    Y = y[None, :, None]
    Z = y[None, None, :]
    integrand = w(X) * phi(Y) * phi(Z) / np.sqrt(Y * Z)
    weights = wx[:, None, None] * wy[None, :, None] * wy[None, None, :]
    return float(np.sum(integrand * weights))


def tilde_transform_tanh_sinh(w, xi: float, h: float = 1.0 / 64) -> float:
    """Second, independent quadrature of the tilde transform (tanh-sinh nodes)."""
    a, b = w.support
    x, wt = tanh_sinh_rule(a, b, h, tmax=4.0)
    arg = 2.0 * math.pi * float(xi) * x
    return float(np.sum(wt * (np.cos(arg) + np.sin(arg)) * w(x)))


# -- decay envelope ------------------------------------------------------------


@dataclass(frozen=True)
class DecayEnvelope:
    """Fitted bound |tilde(w, xi)| <= constant * (1 + |xi|)^(-power)."""

    power: float
    constant: float
    fit_range: tuple

    def __call__(self, xi):
        return self.constant * (1.0 + np.abs(xi)) ** (-self.power)

    def tail_sum(self, start: float, step: float) -> float:
        """Upper bound for sum_{k > K} envelope(k * step), start = K * step."""
        if self.power <= 1:
            return math.inf
        # integral comparison; envelope is decreasing
        return self.constant / (step * (self.power - 1.0) * (1.0 + start) ** (self.power - 1.0))


def fit_decay(w, power: float = 3.0, fit_range=(1.0, 64.0), samples: int = 512) -> DecayEnvelope:
    """Smallest C making C (1+|xi|)^-power dominate the transform on a grid.

    Both signs of xi are sampled, so the envelope bounds tilde(w, -xi) too.
    """
    lo, hi = fit_range
    grid = np.linspace(lo, hi, samples)
    cache = cache_for(w)
    vals = np.array([max(abs(cache.tilde(x)), abs(cache.tilde(-x))) for x in grid])
    const = float(np.max(vals * (1.0 + grid) ** power))
    return DecayEnvelope(float(power), const, (float(lo), float(hi)))


__all__ = [
    "SmoothWindow",
    "WindowSum",
    "TransformCache",
    "DecayEnvelope",
    "make_window",
    "integral",
    "mellin",
    "tilde_transform",
    "tilde_transform_tanh_sinh",
    "h1_tilde_half",
    "h1_tilde_half_direct",
    "fit_decay",
    "cache_for",
    "adaptive_gl",
    "composite_gl",
    "tanh_sinh_rule",
]
