"""Oscillatory quadrature, stationary phase, and derivative-test bounds.

Phases are written in e(.) units: the integrand is e(f(x)) V(x) with
e(z) = exp(2 pi i z).  Every phase in this toolkit is of the shape

    f(x) = c_log * log(x) + c_inv / x + c_lin * x,

so f and all of its derivatives have closed forms, and worst-case derivative
suprema on an interval [a, b] with a > 0 are elementary.  Integration is
composite Gauss-Legendre with node density tied to the total phase variation,
doubled until two consecutive refinements agree.

The repeated integration-by-parts envelope used for truncation certificates
propagates sup-norm vectors through (W / 2 pi i f')' exactly, using the
certified derivative bounds stored on the weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    DomainError,
    NumericalError,
    PreconditionError,
    ResourceBudgetError,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# smooth weights: dilated combinations of the standard bump on [1, 2]
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _bump_deriv_polys(max_order: int) -> tuple[np.ndarray, ...]:
    """Coefficient arrays of Q_j with g^(j)(u) = Q_j(u) / (1-u^2)^(2j) * g(u),
    for the core bump g(u) = exp(-1/(1-u^2)) on (-1, 1)."""
    one_minus = np.array([1.0, 0.0, -1.0])        # 1 - u^2
    polys = [np.array([1.0])]
    for j in range(max_order):
        q = polys[-1]
        dq = np.polynomial.polynomial.polyder(q) if len(q) > 1 else np.array([0.0])
        term1 = np.polynomial.polynomial.polymul(
            dq, np.polynomial.polynomial.polymul(one_minus, one_minus))
        term2 = np.polynomial.polynomial.polymul(
            np.array([0.0, 4.0 * j, 0.0, -4.0 * j]), q)   # 4j u (1 - u^2)
        term3 = np.polynomial.polynomial.polymul(np.array([0.0, -2.0]), q)
        n = max(len(term1), len(term2), len(term3))
        out = np.zeros(n)
        out[: len(term1)] += term1
        out[: len(term2)] += term2
        out[: len(term3)] += term3
        polys.append(out)
    return tuple(polys)


def _bump_core(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u, dtype=np.float64)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def _bump_core_deriv(u: np.ndarray, j: int) -> np.ndarray:
    if j == 0:
        return _bump_core(u)
    q = _bump_deriv_polys(j)[j]
    out = np.zeros_like(u, dtype=np.float64)
    inside = np.abs(u) < 1.0 - 1e-14
    ui = u[inside]
    denom = (1.0 - ui * ui) ** (2 * j)
    out[inside] = np.polynomial.polynomial.polyval(ui, q) / denom * np.exp(-1.0 / (1.0 - ui * ui))
    return out


@dataclass(frozen=True)
class SmoothWeight:
    """A compactly supported C-infinity weight: sum_i coeff_i * bump((y / rho_i)).

    The base bump lives on [1, 2] (u = 2 y - 3 maps it to (-1, 1)) and is
    scaled to peak value 1.  derivative_bounds[j] certifies sup |V^(j)| on a
    dense grid; annihilated_log_moments = k promises the first k log-moments
    integral of V(y) log(y)^j dy, j < k, vanish.
    """

    pieces: tuple[tuple[float, float], ...]      # (coefficient, dilation rho)
    derivative_order: int
    derivative_bounds: tuple[float, ...]
    annihilated_log_moments: int = 0

    @property
    def support(self) -> tuple[float, float]:
        rhos = [rho for _, rho in self.pieces]
        return (min(rhos), 2.0 * max(rhos))

    def evaluate(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros_like(y)
        for coeff, rho in self.pieces:
            out += coeff * math.e * _bump_core(2.0 * (y / rho) - 3.0)
        return out

    __call__ = evaluate

    def derivative(self, y, j: int) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros_like(y)
        for coeff, rho in self.pieces:
            out += (coeff * math.e * (2.0 / rho) ** j
                    * _bump_core_deriv(2.0 * (y / rho) - 3.0, j))
        return out

    def log_moment(self, j: int, panels: int = 200) -> float:
        """integral of V(y) log(y)^j dy over the support.

        Composite panels: the bump is not analytic at its support endpoints,
        so a single high-order rule stalls near 1e-8 accuracy.
        """
        a, b = self.support
        y, w = _panel_nodes(a, b, panels)
        return float(np.sum(w * self.evaluate(y) * np.log(y) ** j))


def _certify_bounds(pieces, order: int, grid: int = 10**4) -> tuple[float, ...]:
    tmp = SmoothWeight(pieces, 0, (1.0,))
    a, b = tmp.support
    y = np.linspace(a, b, grid)
    bounds = []
    for j in range(order + 1):
        bounds.append(1.05 * float(np.max(np.abs(tmp.derivative(y, j)))))
    return tuple(bounds)


def bump_weight(derivative_order: int = 10) -> SmoothWeight:
    """The standard normalized bump on [1, 2]."""
    pieces = ((1.0, 1.0),)
    return SmoothWeight(pieces, derivative_order,
                        _certify_bounds(pieces, derivative_order), 0)


def dilated_weight(rho: float, derivative_order: int = 10) -> SmoothWeight:
    pieces = ((1.0, float(rho)),)
    return SmoothWeight(pieces, derivative_order,
                        _certify_bounds(pieces, derivative_order), 0)


# ---------------------------------------------------------------------------
# phases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Phase:
    """f(x) = c_log log x + c_inv / x + c_lin x, in e(.) units."""

    c_log: float
    c_inv: float
    c_lin: float

    def value(self, x):
        return self.c_log * np.log(x) + self.c_inv / x + self.c_lin * x

    def d1(self, x):
        return self.c_log / x - self.c_inv / x**2 + self.c_lin

    def d2(self, x):
        return -self.c_log / x**2 + 2.0 * self.c_inv / x**3

    def deriv_sup(self, j: int, a: float) -> float:
        """sup over [a, inf) of |f^(j)| for j >= 2 (worst case at x = a)."""
        if j < 2:
            raise DomainError("closed-form sup only used for j >= 2")
        return (abs(self.c_log) * math.factorial(j - 1) / a**j
                + abs(self.c_inv) * math.factorial(j) / a ** (j + 1))


PHASE_KINDS = ("key_lemma", "j_it", "frakj")


@dataclass(frozen=True)
class OscillatorySpec:
    """Parameters of the x-integral: weight V against e(f(x)).

    key_lemma : f = -t log(x)/2pi - n t/(N x)                  (no linear term)
    j_it      : f = key_lemma - r N p x / (M^2 ell t)
    frakj     : f = -t log(x)/2pi - y t/x - r N p x/(M^2 ell t), y = n / N
    """

    t: float
    N: float
    M: int = 1
    n: float = 0.0
    r: int = 0
    p: int = 1
    ell: int = 1
    weight: SmoothWeight = field(default_factory=bump_weight)
    phase_kind: str = "key_lemma"

    def __post_init__(self):
        if self.phase_kind not in PHASE_KINDS:
            raise DomainError(f"unknown phase kind {self.phase_kind!r}")
        if self.N <= 0:
            raise DomainError("scale N must be positive")

    @property
    def linear_coefficient(self) -> float:
        return -self.r * self.N * self.p / (self.M**2 * self.ell * self.t) if self.t else 0.0

    def phase(self) -> Phase:
        c_log = -self.t / TWO_PI
        if self.phase_kind == "key_lemma":
            return Phase(c_log, -self.n * self.t / self.N, 0.0)
        if self.phase_kind == "j_it":
            return Phase(c_log, -self.n * self.t / self.N, self.linear_coefficient)
        y = self.n / self.N
        return Phase(c_log, -y * self.t, self.linear_coefficient)


# ---------------------------------------------------------------------------
# composite Gauss-Legendre core
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def _panel_nodes(a: float, b: float, panels: int, order: int = 16):
    """Nodes and weights of `panels` equal GL panels on [a, b], flattened."""
    x0, w0 = _gl_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    w = (half[:, None] * w0[None, :]).ravel()
    return x, w


def _osc_count(phase: Phase, a: float, b: float) -> float:
    """Total phase variation of f across [a, b], in whole oscillations."""
    return (abs(phase.c_log) * math.log(b / a)
            + abs(phase.c_inv) * (1.0 / a - 1.0 / b)
            + abs(phase.c_lin) * (b - a))


@dataclass
class OscIntResult:
    value: complex
    error: float
    nodes: int


def integrate_phase(phase: Phase, weight: SmoothWeight, tol: float = 1e-10,
                    nodes_per_osc: float = 10.0, max_nodes: int = 4_000_000) -> OscIntResult:
    """integral of e(f(x)) V(x) dx by composite GL with refinement control."""
    a, b = weight.support
    base = max(8, int(math.ceil(_osc_count(phase, a, b) * nodes_per_osc / 16.0)))
    prev = None
    panels = base
    while True:
        x, w = _panel_nodes(a, b, panels)
        if x.size > max_nodes:
            raise ResourceBudgetError(
                f"node budget {max_nodes} exceeded at tol {tol}", best_estimate=prev)
        val = complex(np.sum(w * weight.evaluate(x)
                             * np.exp(2j * np.pi * phase.value(x))))
        if prev is not None and abs(val - prev) < tol:
            return OscIntResult(val, max(abs(val - prev), 1e-16), x.size)
        prev = val
        panels *= 2


def integrate_oscillatory(spec: OscillatorySpec, tol: float = 1e-10) -> OscIntResult:
    """integral x^{-it} e(-n t/(N x)) V(x) e(-r N p x/(M^2 ell t)) dx."""
    if abs(spec.t) > 1e5:
        raise DomainError("oscillation budget limited to |t| <= 1e5")
    if spec.t == 0:
        a, b = spec.weight.support
        x, w = _panel_nodes(a, b, 8)
        return OscIntResult(complex(np.sum(w * spec.weight.evaluate(x))), 1e-15, x.size)
    return integrate_phase(spec.phase(), spec.weight, tol=tol)


def integrate_batch(c_log: float, c_inv: np.ndarray, c_lin: np.ndarray,
                    weight: SmoothWeight, tol: float = 1e-9,
                    nodes_per_osc: float = 10.0, max_nodes: int = 600_000) -> np.ndarray:
    """Vectorized integral of e(c_log log x + c_inv/x + c_lin x) V(x) dx.

    c_inv and c_lin broadcast against each other; one shared node grid sized
    for the worst member of the batch, refined once and compared.
    """
    c_inv = np.atleast_1d(np.asarray(c_inv, dtype=np.float64))
    c_lin = np.atleast_1d(np.asarray(c_lin, dtype=np.float64))
    a, b = weight.support
    worst = Phase(abs(c_log), float(np.max(np.abs(c_inv))), float(np.max(np.abs(c_lin))))
    base = max(8, int(math.ceil(_osc_count(worst, a, b) * nodes_per_osc / 16.0)))
    prev = None
    panels = base
    while True:
        x, w = _panel_nodes(a, b, panels)
        if x.size > max_nodes:
            raise ResourceBudgetError(f"batch node budget {max_nodes} exceeded",
                                      best_estimate=prev)
        amp = w * weight.evaluate(x)
        ph = (c_log * np.log(x))[None, :] + np.outer(c_inv, 1.0 / x) + np.outer(c_lin, x)
        vals = np.exp(2j * np.pi * ph) @ amp
        if prev is not None and float(np.max(np.abs(vals - prev))) < tol:
            return vals
        prev = vals
        panels *= 2


def j_matrix(c_log: float, c_lin: np.ndarray, c_inv: np.ndarray,
             weight: SmoothWeight, tol: float = 1e-9,
             nodes_per_osc: float = 10.0) -> np.ndarray:
    """J[i, j] = integral e(c_log log x + c_inv[j]/x + c_lin[i] x) V(x) dx.

    The integrand factors as P[i, x] Q[x, j], so each refinement level is a
    single GEMM.  Refined once; the two levels must agree to tol.
    """
    c_lin = np.asarray(c_lin, dtype=np.float64)
    c_inv = np.asarray(c_inv, dtype=np.float64)
    a, b = weight.support
    worst = Phase(abs(c_log), float(np.max(np.abs(c_inv))), float(np.max(np.abs(c_lin))))
    base = max(8, int(math.ceil(_osc_count(worst, a, b) * nodes_per_osc / 16.0)))

    def level(panels):
        x, w = _panel_nodes(a, b, panels)
        amp = w * weight.evaluate(x) * np.exp(2j * np.pi * c_log * np.log(x))
        P = np.exp(2j * np.pi * np.outer(c_lin, x)) * amp[None, :]
        Q = np.exp(2j * np.pi * np.outer(1.0 / x, c_inv))
        return P @ Q

    coarse = level(base)
    fine = level(2 * base)
    err = float(np.max(np.abs(fine - coarse)))
    if err > tol:
        finest = level(4 * base)
        err = float(np.max(np.abs(finest - fine)))
        if err > tol:
            raise ResourceBudgetError(f"j_matrix not converged: {err} > {tol}",
                                      best_estimate=finest)
        return finest
    return fine


# ---------------------------------------------------------------------------
# stationary phase
# ---------------------------------------------------------------------------

@dataclass
class StationaryPointReport:
    x0: float
    f_second_at_x0: float
    leading_term: complex
    error_estimate: float


def stationary_phase_main_term(spec: OscillatorySpec) -> StationaryPointReport:
    """Leading-order stationary-phase value of the spec's integral.

    key_lemma: x0 = 2 pi n / N, f''(x0) = -t/(2 pi x0^2); the amplitude
    x0 sqrt(2 pi / t) and the e(-1/8) phase correction were validated against
    the quadrature oracle before being frozen here.
    frakj: x0 = (-1 + sqrt(1 + 16 pi^2 r N p y / (M^2 t^2 ell))) / (4 pi r N p / (M^2 t^2 ell)).
    """
    phase = spec.phase()
    a, b = spec.weight.support
    if spec.phase_kind == "key_lemma":
        x0 = TWO_PI * spec.n / spec.N
    elif spec.phase_kind == "frakj":
        y = spec.n / spec.N
        denom = 4.0 * math.pi * spec.r * spec.N * spec.p / (spec.M**2 * spec.t**2 * spec.ell)
        if denom == 0:
            raise PreconditionError("frakj stationary point needs r != 0")
        disc = 1.0 + 16.0 * math.pi**2 * spec.r * spec.N * spec.p * y / (
            spec.M**2 * spec.t**2 * spec.ell)
        if disc < 0:
            raise PreconditionError("no real stationary point (negative discriminant)")
        x0 = (-1.0 + math.sqrt(disc)) / denom
    else:
        raise DomainError("stationary expansion implemented for key_lemma and frakj phases")
    if not a < x0 < b:
        raise PreconditionError(
            f"stationary point {x0:.6g} outside the weight support [{a}, {b}]; "
            "the integral is then bounded by the first-derivative test")
    fpp = float(phase.d2(x0))
    residual = abs(phase.d1(x0))
    if residual > 1e-10 * abs(spec.t) / x0:
        raise NumericalError(f"stationary-point residual {residual} too large")
    amp = float(spec.weight.evaluate(x0)) / math.sqrt(abs(fpp))
    eighth = np.exp(1j * math.copysign(math.pi / 4.0, fpp))
    leading = np.exp(2j * np.pi * phase.value(x0)) * amp * eighth
    return StationaryPointReport(x0, fpp, complex(leading),
                                 abs(leading) * 10.0 / max(abs(spec.t), 1.0))


# ---------------------------------------------------------------------------
# derivative tests
# ---------------------------------------------------------------------------

def derivative_test_bound(spec: OscillatorySpec, order: int,
                          grid: int = 4096) -> float:
    """First/second derivative-test bound: 1/min|f'| or 4/sqrt(min|f''|).

    Requires the relevant derivative to be bounded away from zero on the
    support (checked on a dense grid).
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    phase = spec.phase()
    a, b = spec.weight.support
    x = np.linspace(a, b, grid)
    d = phase.d1(x) if order == 1 else phase.d2(x)
    if float(np.min(d)) < 0.0 < float(np.max(d)):
        raise PreconditionError(f"order-{order} phase derivative changes sign on support")
    m = float(np.min(np.abs(d)))
    if m == 0.0:
        raise PreconditionError(f"order-{order} phase derivative vanishes on support")
    return 1.0 / m if order == 1 else 4.0 / math.sqrt(m)


def frakj_outer_phase_d1(z1: float, z2: float, y) -> np.ndarray:
    """phi'(y) = (z1 - z2) / (2 (sqrt(1 + z1 y) + sqrt(1 + z2 y)))."""
    y = np.asarray(y, dtype=np.float64)
    return (z1 - z2) / (2.0 * (np.sqrt(1.0 + z1 * y) + np.sqrt(1.0 + z2 * y)))


def frakj_outer_phase(z1: float, z2: float, y) -> np.ndarray:
    """phi(y) = log((-1+sqrt(1+z1 y))/(-1+sqrt(1+z2 y))) + sqrt(1+z1 y) - sqrt(1+z2 y)."""
    y = np.asarray(y, dtype=np.float64)
    s1 = np.sqrt(1.0 + z1 * y)
    s2 = np.sqrt(1.0 + z2 * y)
    return np.log((s1 - 1.0) / (s2 - 1.0)) + s1 - s2


# ---------------------------------------------------------------------------
# integration-by-parts envelope and truncation cutoff
# ---------------------------------------------------------------------------

def _ibp_envelope_core(m1: float, K: list[float], weight: SmoothWeight) -> float:
    """Envelope from a derivative floor m1 = min|f'| and suprema K[i] >= sup|f^(i)|.

    Propagates the sup-norm vector of the amplitude through passes of
    W -> (W / (2 pi i f'))', bounding derivatives of 1/f' through
    f' (1/f')^(m) = -sum_{k>=1} C(m,k) f^(k+1) (1/f')^(m-k), and keeps the
    best pass count.
    """
    a, b = weight.support
    depth = weight.derivative_order
    B = [1.0 / m1]
    for m in range(1, depth + 1):
        s = sum(math.comb(m, k) * K[k + 1] * B[m - k] for k in range(1, m + 1))
        B.append(s / m1)
    H = [bm / TWO_PI for bm in B]
    w = list(weight.derivative_bounds)
    best = (b - a) * w[0]
    for _ in range(depth):
        if len(w) < 2:
            break
        new = []
        for i in range(len(w) - 1):
            s = sum(math.comb(i + 1, k) * w[k] * H[i + 1 - k] for k in range(i + 2))
            new.append(s)
        w = new
        best = min(best, (b - a) * w[0])
    return best


def ibp_envelope(phase: Phase, weight: SmoothWeight) -> float:
    """Certified upper bound for |integral e(f) V dx| when f' is sign-definite.

    Returns inf when f' may vanish on the support.
    """
    a, b = weight.support
    x = np.linspace(a, b, 2048)
    d1 = phase.d1(x)
    m1 = float(np.min(np.abs(d1)))
    if float(np.min(d1)) < 0.0 < float(np.max(d1)) or m1 == 0.0:
        return math.inf
    depth = weight.derivative_order
    K = [0.0, 0.0] + [phase.deriv_sup(j, a) for j in range(2, depth + 2)]
    return _ibp_envelope_core(m1, K, weight)


def truncation_cutoff(M: int, t: float, N: float, P: int, L: int,
                      weight: SmoothWeight | None = None,
                      threshold: float = 1e-12, r_limit: int = 10**7) -> int:
    """Smallest R_max with every |r| > R_max giving |J_it(r, np/ell; M)| < threshold.

    Worst case over p in [P, 2P], ell in [L, 2L] and n in the weight's dyadic
    range; certified by the integration-by-parts envelope (the envelope is
    monotone decreasing in the linear coefficient once it clears the range of
    the r-free part of f').
    """
    weight = weight or bump_weight()
    a, b = weight.support
    x = np.linspace(a, b, 2048)
    n_max = b * N     # n ranges over the support of w(n/N)
    gmax = max(float(np.max(np.abs(-t / (TWO_PI * x) + n_max * t / (N * x**2)))),
               float(np.max(np.abs(-t / (TWO_PI * x) + a * t / x**2))))
    A_slope = N * P / (M**2 * 2 * L * t)       # smallest |c_lin| growth per unit r
    depth = weight.derivative_order
    # sup |f^(i)| is n-independent of r and maximized at n = n_max
    K = [0.0, 0.0] + [Phase(-t / TWO_PI, -n_max * t / N, 0.0).deriv_sup(j, a)
                      for j in range(2, depth + 2)]

    def envelope(r: int) -> float:
        A = A_slope * r
        if A <= gmax:
            return math.inf
        # min |f'| >= A - gmax uniformly over p, ell, n in range
        return _ibp_envelope_core(A - gmax, K, weight)

    r = 1
    while envelope(r) >= threshold:
        r *= 2
        if r > r_limit:
            raise ResourceBudgetError(f"no certified cutoff below r = {r_limit}")
    lo, hi = r // 2, r
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if envelope(mid) < threshold:
            hi = mid
        else:
            lo = mid
    # every |r| >= hi is certified below threshold, so hi - 1 survives at most
    return hi - 1


# ---------------------------------------------------------------------------
# the bilinear integral of two inner oscillatory integrals
# ---------------------------------------------------------------------------

def frakj_stationary_point(r: int, p: int, ell: int, M: int, t: float,
                           N: float, y: float) -> float:
    """x0 = (-1 + sqrt(1 + 16 pi^2 r N p y / (M^2 t^2 ell))) / (4 pi r N p / (M^2 t^2 ell)).

    In terms of z = 16 pi^2 r N p / (M^2 t^2 ell) this is
    4 pi (sqrt(1 + z y) - 1) / z, independent of t at fixed z.
    """
    z = 16.0 * math.pi**2 * r * N * p / (M**2 * t**2 * ell)
    if z == 0:
        raise PreconditionError("stationary point needs r != 0")
    return 4.0 * math.pi * (math.sqrt(1.0 + z * y) - 1.0) / z


def _stationary_regime(z: float, y_range: tuple[float, float],
                       x_range: tuple[float, float]) -> bool:
    """Whether x0(z, y) enters the inner support for some y in the outer support."""
    if z <= 0:
        return False
    xs = [4.0 * math.pi * (math.sqrt(1.0 + z * y) - 1.0) / z
          for y in np.linspace(y_range[0], y_range[1], 33)]
    return any(x_range[0] <= x <= x_range[1] for x in xs)


@dataclass
class FrakJResult:
    value: complex
    z1: float
    z2: float
    in_regime: tuple[bool, bool]
    error: float


def frak_J(triple1: tuple[int, int, int], triple2: tuple[int, int, int],
           M: int, t: float, N: float,
           inner_weight: SmoothWeight | None = None,
           outer_weight: SmoothWeight | None = None,
           tol: float = 1e-8, max_outer: int = 200_000) -> FrakJResult:
    """integral J_it(r1, N p1 y/ell1; M) conj(J_it(r2, N p2 y/ell2; M)) w(y) dy.

    triples are (r, p, ell).  z_i = 16 pi^2 r_i N p_i / (M^2 t^2 ell_i) is the
    regime parameter; a triple is flagged out-of-regime when the inner
    stationary point x0(z_i, y) misses the inner support for every y in the
    outer support, in which case only derivative-test bounds are meaningful.
    """
    V = inner_weight or bump_weight()
    w = outer_weight or bump_weight()
    r1, p1, l1 = triple1
    r2, p2, l2 = triple2
    A1 = r1 * N * p1 / (M**2 * l1 * t)
    A2 = r2 * N * p2 / (M**2 * l2 * t)
    z1 = 16.0 * math.pi**2 * A1 / t
    z2 = 16.0 * math.pi**2 * A2 / t
    ya, yb = w.support
    c_log = -t / TWO_PI

    def level(outer_panels, inner_tol):
        y, gw = _panel_nodes(ya, yb, outer_panels)
        inner1 = integrate_batch(c_log, -t * y, np.array([-A1]), V, tol=inner_tol)
        inner2 = integrate_batch(c_log, -t * y, np.array([-A2]), V, tol=inner_tol)
        return complex(np.sum(gw * w.evaluate(y) * inner1 * np.conj(inner2)))

    # outer oscillation scale: t |phi'| / 2pi <= t |z1 - z2| / (4 pi)
    osc = abs(t) * (abs(z1 - z2) + 0.2) / (2.0 * math.pi) * (yb - ya)
    panels = max(8, int(math.ceil(osc * 10.0 / 16.0)))
    regime = (_stationary_regime(z1, (ya, yb), V.support),
              _stationary_regime(z2, (ya, yb), V.support))
    prev = None
    while True:
        val = level(panels, tol / 10.0)
        if prev is not None and abs(val - prev) < tol:
            return FrakJResult(val, z1, z2, regime, max(abs(val - prev), 1e-16))
        prev = val
        panels *= 2
        if panels * 16 > max_outer:
            raise ResourceBudgetError("outer oscillation budget exceeded",
                                      best_estimate=prev)
