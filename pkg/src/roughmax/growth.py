"""Regularly varying growth functions h(x) = C_h * x^c * l(x) and their inverses.

Supported shapes of the slowly varying correction l(x):

* ``pure``        -- l(x) = 1
* ``powerlog``    -- l(x) = log(x)^A
* ``powerexplog`` -- l(x) = exp(A * log(x)^B),  B in (0, 1)
* ``poweriterlog``-- l(x) = log(log(...log(x))), m nested logs

Every correction above is a single "log monomial" coef * prod_j l_j^{e_j}
in the iterated logarithms l_1 = log x, l_{j+1} = log l_j, and that class is
closed under differentiation (d/dx l_j = 1 / (x * l_1 * ... * l_{j-1})).
All derivatives used anywhere in the toolkit are therefore computed in closed
form by a tiny exact term algebra; finite differences appear only in tests.

The logarithmic-derivative corrections

    vartheta(x)   = x h'(x)/h(x) - c          (h side)
    theta(y)      = y phi'(y)/phi(y) - 1/c    (inverse side)

and their higher-order analogues vartheta_i / theta_i drive every identity
check in the toolkit:  x h^(i)(x) = h^(i-1)(x) (c - i + 1 + vartheta_i(x)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    SingularityError,
    ValidationError,
)

FloatLike = float | np.ndarray

DENOM_GUARD = 1e-8          # recursion denominators below this raise
VALIDATION_SPAN = 2 ** 20   # h', h'' sampled on [x0, x0 * VALIDATION_SPAN]
VALIDATION_POINTS = 64
MP_DPS = 60                 # working precision of the high-precision path


class Variant(enum.Enum):
    PURE_POWER = "pure"
    POWER_LOG = "powerlog"
    POWER_EXP_LOG = "powerexplog"
    POWER_ITER_LOG = "poweriterlog"


# ---------------------------------------------------------------------------
# log-monomial term algebra
# ---------------------------------------------------------------------------
# A term (coef, xpow, lexp) stands for coef * x**xpow * prod_j l_j**lexp[j].

Terms = tuple


def _differentiate(terms: Terms) -> Terms:
    out: dict = {}

    def add(c, xp, le):
        if c != 0.0:
            key = (xp, le)
            out[key] = out.get(key, 0.0) + c

    for coef, xpow, lexp in terms:
        if xpow != 0:
            add(coef * xpow, xpow - 1, lexp)
        for j, ej in enumerate(lexp):
            if ej != 0:
                le = list(lexp)
                for i in range(j):
                    le[i] -= 1
                le[j] -= 1
                add(coef * ej, xpow - 1, tuple(le))
    return tuple((c, xp, le) for (xp, le), c in out.items() if c != 0.0)


def _iterated_logs(x, depth: int):
    logs = []
    v = x
    for _ in range(depth):
        v = np.log(v)
        logs.append(v)
    return logs


def _eval_terms(terms: Terms, x, logs) -> np.ndarray:
    total = np.zeros_like(np.asarray(x, dtype=float))
    for coef, xpow, lexp in terms:
        t = coef * np.power(x, float(xpow)) if xpow != 0 else np.full_like(total, coef)
        for lv, e in zip(logs, lexp):
            if e != 0:
                t = t * np.power(lv, float(e))
        total = total + t
    return total


# ---------------------------------------------------------------------------
# growth functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthFunction:
    """A member of the admissible family, immutable after construction.

    All evaluators are pure, accept scalars or numpy arrays, and are safe
    for unrestricted concurrent use.
    """

    variant: Variant
    c: float
    c_h: float
    a: float | None
    b: float | None
    m: int | None
    x0: float
    # closed-form data derived once: log-correction lam = log l(x) and its
    # first four derivatives as term tuples
    _lam: Terms = field(repr=False, default=())
    _lam_d: tuple = field(repr=False, default=())
    _depth: int = field(repr=False, default=0)

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def _build(variant, c, c_h, a, b, m, x0) -> "GrowthFunction":
        if variant is Variant.PURE_POWER:
            lam: Terms = ()
        elif variant is Variant.POWER_LOG:
            lam = ((float(a), 0, (0.0, 1.0)),)
        elif variant is Variant.POWER_EXP_LOG:
            lam = ((float(a), 0, (float(b),)),)
        else:
            lam = ((1.0, 0, tuple([0.0] * m + [1.0])),)
        derivs = []
        t = lam
        for _ in range(4):
            t = _differentiate(t)
            derivs.append(t)
        depth = 0
        for ts in (lam, *derivs):
            for _, _, lexp in ts:
                for j, e in enumerate(lexp):
                    if e != 0:
                        depth = max(depth, j + 1)
        return GrowthFunction(variant, float(c), float(c_h), a, b, m,
                              float(x0), lam, tuple(derivs), depth)

    # -- evaluation -----------------------------------------------------------

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x0 * (1.0 - 1e-12)) or not np.all(np.isfinite(x)):
            raise DomainError(
                f"evaluation at x < x0 = {self.x0} (min requested: {x.min()})")
        return x

    def _logs(self, x):
        return _iterated_logs(x, self._depth)

    def _lam_value(self, x, logs, k: int):
        """lam^(k)(x) where lam = log l(x); k = 0..4."""
        terms = self._lam if k == 0 else self._lam_d[k - 1]
        if not terms:
            return np.zeros_like(np.asarray(x, dtype=float))
        return _eval_terms(terms, x, logs)

    def value(self, x) -> FloatLike:
        """h(x) = C_h * exp(c log x + lam(x))."""
        x = self._check_domain(x)
        logs = self._logs(x)
        out = self.c_h * np.exp(self.c * np.log(x) + self._lam_value(x, logs, 0))
        return float(out) if out.ndim == 0 else out

    def deriv(self, x, order: int) -> FloatLike:
        """h^(order)(x) for order in {0, 1, 2, 3}, in closed form."""
        if order not in (0, 1, 2, 3):
            raise ValidationError(f"derivative order {order} not in 0..3")
        x = self._check_domain(x)
        logs = self._logs(x)
        h = self.c_h * np.exp(self.c * np.log(x) + self._lam_value(x, logs, 0))
        if order == 0:
            out = h
        else:
            u1 = self.c / x + self._lam_value(x, logs, 1)
            if order == 1:
                out = h * u1
            else:
                u2 = -self.c / x ** 2 + self._lam_value(x, logs, 2)
                if order == 2:
                    out = h * (u1 * u1 + u2)
                else:
                    u3 = 2.0 * self.c / x ** 3 + self._lam_value(x, logs, 3)
                    out = h * (u1 ** 3 + 3.0 * u1 * u2 + u3)
        return float(out) if out.ndim == 0 else out

    def vartheta_raw(self, x, k: int) -> FloatLike:
        """k-th derivative of the correction vartheta(x) = x h'(x)/h(x) - c.

        vartheta = x lam', so vartheta^(k) = k lam^(k) + x lam^(k+1); k = 0..3.
        """
        if k not in (0, 1, 2, 3):
            raise ValidationError(f"vartheta derivative order {k} not in 0..3")
        x = self._check_domain(x)
        logs = self._logs(x)
        out = k * self._lam_value(x, logs, k) + x * self._lam_value(x, logs, k + 1)
        return float(out) if out.ndim == 0 else out

    def vartheta(self, x, i: int) -> FloatLike:
        """vartheta_i(x) in the identity x h^(i) = h^(i-1) (alpha_i + vartheta_i).

        vartheta_1 = vartheta; each next level adds x * vartheta'_{prev} over
        the previous denominator alpha_{prev} + vartheta_{prev}.
        """
        if i not in (1, 2, 3):
            raise ValidationError(f"vartheta level {i} not in 1..3")
        x = self._check_domain(x)
        logs = self._logs(x)
        t0 = x * self._lam_value(x, logs, 1)
        if i == 1:
            out = t0
        else:
            t0p = self._lam_value(x, logs, 1) + x * self._lam_value(x, logs, 2)
            a1 = self.c
            den1 = a1 + t0
            self._guard(den1, "alpha_1 + vartheta_1")
            t1 = t0 + x * t0p / den1
            if i == 2:
                out = t1
            else:
                t0pp = 2.0 * self._lam_value(x, logs, 2) + x * self._lam_value(x, logs, 3)
                # d/dx of vartheta_2 = vartheta' + (vartheta' + x vartheta'')/den1
                #                      - x vartheta'^2 / den1^2
                t1p = t0p + (t0p + x * t0pp) / den1 - x * t0p * t0p / (den1 * den1)
                a2 = self.c - 1.0
                den2 = a2 + t1
                self._guard(den2, "alpha_2 + vartheta_2")
                out = t1 + x * t1p / den2
        return float(out) if np.asarray(out).ndim == 0 else out

    def varrho(self, x) -> FloatLike:
        """vartheta_2 / vartheta, the bounded factor in the c = 1 regime."""
        if self.c != 1.0:
            raise ValidationError("varrho is defined only for c = 1")
        v1 = np.asarray(self.vartheta(x, 1), dtype=float)
        self._guard(v1, "vartheta")
        out = np.asarray(self.vartheta(x, 2), dtype=float) / v1
        return float(out) if out.ndim == 0 else out

    @staticmethod
    def _guard(den, name: str):
        if np.any(np.abs(den) < DENOM_GUARD):
            raise SingularityError(f"denominator {name} below {DENOM_GUARD}")

    # -- high-precision path ---------------------------------------------------

    def value_mp(self, x, dps: int = MP_DPS) -> mpmath.mpf:
        """h(x) in arbitrary precision; used to settle floors near integers."""
        with mpmath.workdps(dps):
            xv = mpmath.mpf(x)
            lam = mpmath.mpf(0)
            if self._lam:
                logs = []
                v = xv
                for _ in range(self._depth):
                    v = mpmath.log(v)
                    logs.append(v)
                for coef, xpow, lexp in self._lam:
                    t = mpmath.mpf(coef) * (xv ** xpow if xpow else 1)
                    for lv, e in zip(logs, lexp):
                        if e != 0:
                            t *= lv ** mpmath.mpf(e)
                    lam += t
            return mpmath.mpf(self.c_h) * mpmath.e ** (
                mpmath.mpf(self.c) * mpmath.log(xv) + lam)

    # -- inverse ---------------------------------------------------------------

    def inverse(self, tol: float = 1e-12, max_iter: int = 100) -> "InverseFunction":
        return InverseFunction(self, 1.0 / self.c, float(self.value(self.x0)),
                               tol, max_iter)


def _default_x0(variant: Variant, a, m) -> float:
    if variant is Variant.PURE_POWER:
        return 1.0
    if variant is Variant.POWER_LOG:
        return max(3.0, math.exp(abs(a) + 1.0))
    if variant is Variant.POWER_EXP_LOG:
        return 3.0
    tower = math.e
    for _ in range(m - 1):
        tower = math.exp(tower)
    return max(3.0, tower * 1.0001)


def make_growth(variant, c: float, c_h: float = 1.0, *,
                a: float | None = None, b: float | None = None,
                m: int | None = None, x0: float | None = None) -> GrowthFunction:
    """Build and validate a growth function.

    Rejects exponents outside [1, 2), the pure power at c = 1 (its correction
    vanishes identically, which the c = 1 regime forbids), and any x0 where
    sampled h' or h'' fails to be positive on [x0, x0 * 2^20].
    """
    if isinstance(variant, str):
        try:
            variant = Variant(variant.lower())
        except ValueError:
            raise ValidationError(f"unknown variant {variant!r}") from None
    if not (1.0 <= c < 2.0):
        raise ValidationError(f"exponent c = {c} outside [1, 2)")
    if c_h <= 0:
        raise ValidationError(f"multiplicative constant C_h = {c_h} must be > 0")
    if variant is Variant.PURE_POWER:
        if c == 1.0:
            raise ValidationError(
                "pure power with c = 1 rejected: the correction would vanish "
                "identically, violating the positivity the c = 1 regime needs")
        a = b = m = None
    elif variant is Variant.POWER_LOG:
        if a is None:
            raise ValidationError("powerlog requires the log exponent a")
        b = m = None
    elif variant is Variant.POWER_EXP_LOG:
        if a is None or b is None:
            raise ValidationError("powerexplog requires parameters a and b")
        if not (0.0 < b < 1.0):
            raise ValidationError(f"powerexplog exponent b = {b} outside (0, 1)")
        m = None
    else:
        if m is None or m != int(m) or not (1 <= int(m) <= 3):
            raise ValidationError(
                "poweriterlog depth m must be an integer in 1..3 "
                "(the domain start for deeper nesting exceeds float range)")
        m = int(m)
        a = b = None

    if x0 is None:
        x0 = _default_x0(variant, a, m)
    if x0 < 1.0 or not math.isfinite(x0):
        raise ValidationError(f"domain start x0 = {x0} must be finite and >= 1")

    g = GrowthFunction._build(variant, c, c_h, a, b, m, x0)

    grid = np.exp(np.linspace(math.log(x0), math.log(x0 * VALIDATION_SPAN),
                              VALIDATION_POINTS))
    try:
        h0 = g.value(grid)
        h1 = g.deriv(grid, 1)
        h2 = g.deriv(grid, 2)
        for i in (1, 2, 3):
            vi = np.asarray(g.vartheta(grid, i))
            if not np.all(np.isfinite(vi)):
                raise ValidationError(
                    f"vartheta_{i} not finite on the validation grid")
    except (DomainError, SingularityError, FloatingPointError) as exc:
        raise ValidationError(f"validation grid evaluation failed: {exc}") from exc
    if g.value(x0) < 1.0 - 1e-12:
        raise ValidationError(f"h(x0) = {g.value(x0)} < 1; raise x0")
    if not np.all(np.isfinite(h0)):
        raise ValidationError("h overflows on [x0, x0 * 2^20]; shrink the domain")
    if np.any(h1 <= 0):
        raise ValidationError("sampled h' not positive on [x0, x0 * 2^20]")
    if np.any(h2 <= 0):
        raise ValidationError("sampled h'' not positive on [x0, x0 * 2^20]")
    if c == 1.0:
        vt = np.asarray(g.vartheta(grid, 1))
        if np.any(vt <= 0) or np.any(np.diff(vt) > 0):
            raise ValidationError(
                "c = 1 requires a positive, nonincreasing correction vartheta "
                "on the validation grid")
    return g


def identity_growth(c_h: float = 1.0) -> GrowthFunction:
    """The degenerate linear map h(x) = c_h * x, skipping admissibility checks.

    Not a member of the admissible family (h'' = 0); exists because the exact
    identity case collapses most formulas and makes a useful oracle.
    """
    return GrowthFunction._build(Variant.PURE_POWER, 1.0, c_h, None, None, None, 1.0)


# ---------------------------------------------------------------------------
# inverse functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InverseFunction:
    """Numeric inverse phi of a growth function, phi(h(x)) = x.

    Inversion is a safeguarded Newton iteration inside a doubling-expanded
    bracket, seeded at (y / C_h)^gamma; for the pure power the seed is already
    exact.  Immutable and concurrency-safe like its source.
    """

    source: GrowthFunction
    gamma: float
    y0: float
    tol: float = 1e-12
    max_iter: int = 100

    @property
    def c(self) -> float:
        return self.source.c

    def _check_domain(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < self.y0 * (1.0 - 1e-12)) or not np.all(np.isfinite(y)):
            raise DomainError(
                f"inversion at y < y0 = {self.y0} (min requested: {y.min()})")
        return y

    def value(self, y, tol: float | None = None) -> FloatLike:
        """phi(y): the x >= x0 with |h(x) - y| <= tol * y."""
        y = self._check_domain(y)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        tol = self.tol if tol is None else tol
        g = self.source
        x0 = g.x0

        x = np.maximum((y / g.c_h) ** self.gamma, x0)
        lo = np.full_like(y, x0)
        hi = np.maximum(x, x0)
        # expand hi until h(hi) >= y everywhere
        for _ in range(200):
            mask = g.value(hi) < y
            if not mask.any():
                break
            hi = np.where(mask, hi * 2.0, hi)
        else:
            raise ConvergenceError("bracket expansion failed", bracket=(lo, hi))

        x = np.clip(x, lo, hi)
        done = np.zeros(y.shape, dtype=bool)
        for _ in range(self.max_iter):
            fx = g.value(x) - y
            # a bracket collapsed to adjacent floats is the correctly rounded
            # root; tolerances below what double precision admits stop there
            done = (np.abs(fx) <= tol * y) | (hi - lo <= 4.0 * np.spacing(hi))
            if done.all():
                break
            above = fx > 0
            hi = np.where(above & ~done, x, hi)
            lo = np.where(~above & ~done, x, lo)
            step = fx / g.deriv(x, 1)
            xn = x - step
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            x = np.where(done, x, xn)
        else:
            raise ConvergenceError(
                f"inversion did not converge in {self.max_iter} iterations",
                bracket=(float(lo[~done].min()), float(hi[~done].max())))
        x = np.maximum(x, x0)
        return float(x[0]) if scalar else x

    __call__ = value

    def deriv(self, y, order: int) -> FloatLike:
        """phi'(y) = 1/h'(phi) or phi''(y) = -h''(phi)/h'(phi)^3."""
        if order not in (1, 2):
            raise ValidationError(f"inverse derivative order {order} not in 1..2")
        u = self.value(y)
        h1 = self.source.deriv(u, 1)
        if order == 1:
            out = 1.0 / np.asarray(h1, dtype=float)
        else:
            out = -np.asarray(self.source.deriv(u, 2)) / np.asarray(h1) ** 3
        return float(out) if np.asarray(out).ndim == 0 else out

    def theta(self, y, i: int) -> FloatLike:
        """theta_i(y) in the identity y phi^(i) = phi^(i-1) (beta_i + theta_i).

        Evaluated through the closed forms in the source correction: with
        u = phi(y) and d = c + vartheta(u),

            theta_1 = 1/d - gamma
            theta_2 = 1/d - gamma - vartheta'(u) u / d^2
            theta_3 = theta_2 - (vartheta'' u^2 + 2 vartheta' u) / (d^2 - d^3 - vartheta' u d)
                              + 2 vartheta'^2 u^2 / (d^3 - d^4 - vartheta' u d^2)
        """
        if i not in (1, 2, 3):
            raise ValidationError(f"theta level {i} not in 1..3")
        y = self._check_domain(y)
        u = np.asarray(self.value(y), dtype=float)
        g = self.source
        vt = np.asarray(g.vartheta_raw(u, 0), dtype=float)
        d = g.c + vt
        GrowthFunction._guard(d, "c + vartheta(phi)")
        if i == 1:
            out = 1.0 / d - self.gamma
        else:
            vtp = np.asarray(g.vartheta_raw(u, 1), dtype=float)
            th2 = 1.0 / d - self.gamma - vtp * u / d ** 2
            if i == 2:
                out = th2
            else:
                vtpp = np.asarray(g.vartheta_raw(u, 2), dtype=float)
                den1 = d ** 2 - d ** 3 - vtp * u * d
                den2 = d ** 3 - d ** 4 - vtp * u * d ** 2
                GrowthFunction._guard(den1, "theta_3 denominator")
                GrowthFunction._guard(den2, "theta_3 denominator")
                out = th2 - (vtpp * u * u + 2.0 * vtp * u) / den1 \
                    + 2.0 * vtp * vtp * u * u / den2
        return float(out) if np.asarray(out).ndim == 0 else out

    # -- c = 1 regime -----------------------------------------------------------

    def sigma(self, y) -> FloatLike:
        """sigma(y) = vartheta(phi(y)); the c = 1 factorization of y phi''."""
        if self.c != 1.0:
            raise ValidationError("sigma is defined only for c = 1")
        u = self.value(y)
        return self.source.vartheta_raw(u, 0)

    def tau(self, y) -> FloatLike:
        """tau(y) in y phi''(y) = phi'(y) sigma(y) tau(y) for c = 1."""
        if self.c != 1.0:
            raise ValidationError("tau is defined only for c = 1")
        u = np.asarray(self.value(y), dtype=float)
        g = self.source
        vt = np.asarray(g.vartheta_raw(u, 0), dtype=float)
        vtp = np.asarray(g.vartheta_raw(u, 1), dtype=float)
        GrowthFunction._guard(vt, "vartheta(phi)")
        d = 1.0 + vt
        GrowthFunction._guard(d, "1 + vartheta(phi)")
        out = -(1.0 / d + vtp * u / (vt * d * d))
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# diagnostic report over a grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuxFunctionReport:
    """Correction functions tabulated on a grid, for decay diagnostics.

    ``grid`` carries y-values; vartheta columns are evaluated at x = phi(y)
    so that both families share one abscissa.  sigma/tau/varrho are filled
    only in the c = 1 regime and empty otherwise.
    """

    grid: np.ndarray
    vartheta_values: tuple  # (vt1, vt2, vt3) arrays
    theta_values: tuple     # (th1, th2, th3) arrays
    sigma_values: np.ndarray
    tau_values: np.ndarray
    varrho_values: np.ndarray

    def tail_decay_ok(self) -> bool:
        """Top-decade max magnitude strictly below bottom-decade max, per column."""
        for col in (*self.vartheta_values, *self.theta_values):
            if not _decade_decay(self.grid, np.abs(col)):
                return False
        return True


def _decade_decay(grid: np.ndarray, mag: np.ndarray) -> bool:
    lo_mask = grid <= grid[0] * 10.0
    hi_mask = grid >= grid[-1] / 10.0
    return float(mag[hi_mask].max()) < float(mag[lo_mask].max())


def build_aux_report(phi: InverseFunction, grid) -> AuxFunctionReport:
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("report grid must be strictly increasing")
    g = phi.source
    u = np.asarray(phi.value(grid), dtype=float)
    vt = tuple(np.asarray(g.vartheta(u, i), dtype=float) for i in (1, 2, 3))
    th = tuple(np.asarray(phi.theta(grid, i), dtype=float) for i in (1, 2, 3))
    if g.c == 1.0:
        sig = np.asarray(phi.sigma(grid), dtype=float)
        tau = np.asarray(phi.tau(grid), dtype=float)
        rho = np.asarray(g.varrho(u), dtype=float)
    else:
        sig = np.empty(0)
        tau = np.empty(0)
        rho = np.empty(0)
    return AuxFunctionReport(grid, vt, th, sig, tau, rho)
