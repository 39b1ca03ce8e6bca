"""Weingarten relations: tagged variants, parsing, and evaluation as r2 = F(r1).

A relation ties the two radii of curvature of a rotationally symmetric
surface.  The canonical families:

* ``LinearHopf(lam, C)``      -- r2 = lam*r1 + C
* ``PureKLinear(lam)``        -- k2 = lam*k1   (r2 = r1/lam)
* ``SemiQuadratic(a,b,g,d)``  -- a*k1*k2 + b*k1 + g*k2 + d = 0
* ``CubicRoC(gamma)``         -- r2 = gamma^2 * r1^3
* ``ExplicitF(tree)``         -- r2 = f(r1) for a parsed expression tree

The semi-quadratic family is stored in curvature coefficients; its
radii-of-curvature form is the fractional-linear F(u) = -(g*u + a)/(d*u + b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from . import expressions as ex
from .expressions import (
    BinOp,
    Const,
    EvalDomainError,
    Expr,
    Func,
    ParseError,
    Var,
)
from .projective import INF, ExtReal

__all__ = [
    "LinearHopf",
    "PureKLinear",
    "SemiQuadratic",
    "CubicRoC",
    "ExplicitF",
    "WeingartenRelation",
    "RelationError",
    "parse_relation",
    "render_relation",
    "eval_F",
    "eval_F_prime",
    "fixed_points",
]


class RelationError(ValueError):
    """Malformed or unusable relation (ambiguous, degenerate, wrong variant)."""


@dataclass(frozen=True)
class LinearHopf:
    lam: float
    C: float

    @property
    def degenerate(self) -> bool:
        """lam = 1 has no one-parameter closed form (the ODE loses its forcing)."""
        return abs(self.lam - 1.0) <= 1e-12

    def fixed_point(self) -> float:
        if self.degenerate:
            raise RelationError("lam = 1 linear Hopf relation has no isolated fixed point")
        return self.C / (1.0 - self.lam)


@dataclass(frozen=True)
class PureKLinear:
    lam: float


@dataclass(frozen=True)
class SemiQuadratic:
    """alpha*k1*k2 + beta*k1 + gamma*k2 + delta = 0 in curvature form."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        if self.alpha == self.beta == self.gamma == self.delta == 0.0:
            raise RelationError("semi-quadratic coefficients must not all vanish")

    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def scaled(self, factor: float) -> "SemiQuadratic":
        return SemiQuadratic(self.alpha * factor, self.beta * factor,
                             self.gamma * factor, self.delta * factor)


@dataclass(frozen=True)
class CubicRoC:
    """r2 = gamma^2 * r1^3 (satisfied by quadric surfaces of revolution)."""

    gamma: float


@dataclass(frozen=True)
class ExplicitF:
    """r2 = f(r1) for an arbitrary expression tree in r1."""

    expr: Expr


WeingartenRelation = Union[LinearHopf, PureKLinear, SemiQuadratic, CubicRoC, ExplicitF]


# ---------------------------------------------------------------------------
# parsing

def _detect_from_k_poly(poly: dict[tuple[int, int], Fraction]) -> WeingartenRelation | None:
    """Match a polynomial in (k1, k2) against the semi-quadratic family."""
    if not poly:
        return None
    if any(e1 > 1 or e2 > 1 for (e1, e2) in poly):
        return None
    alpha = float(poly.get((1, 1), 0))
    beta = float(poly.get((1, 0), 0))
    gamma = float(poly.get((0, 1), 0))
    delta = float(poly.get((0, 0), 0))
    if alpha == beta == gamma == delta == 0.0:
        return None
    if alpha == 0.0 and delta == 0.0 and beta != 0.0 and gamma != 0.0:
        # beta*k1 + gamma*k2 = 0  ->  k2 = -(beta/gamma) k1
        return PureKLinear(-beta / gamma)
    return SemiQuadratic(alpha, beta, gamma, delta)


def _detect_from_r_poly(poly: dict[tuple[int, int], Fraction]) -> WeingartenRelation | None:
    """Match a polynomial in (r1, r2) against linear-Hopf / pure-linear / cubic."""
    if not poly:
        return None
    deg_r2 = max((e2 for (_, e2) in poly), default=0)
    if deg_r2 != 1:
        return None
    a_coeff = poly.get((0, 1), Fraction(0))
    if any(e2 == 1 and e1 > 0 for (e1, e2) in poly):
        return None  # r2 multiplied by r1 terms: not in a named r-family
    if a_coeff == 0:
        return None
    # A*r2 + sum_j B_j r1^j + D = 0
    rest = {e1: c for (e1, e2), c in poly.items() if e2 == 0}
    degs = set(rest)
    if degs <= {0, 1}:
        lam = -rest.get(1, Fraction(0)) / a_coeff
        C = -rest.get(0, Fraction(0)) / a_coeff
        if C == 0 and lam != 0:
            # r2 = lam*r1 is k2 = (1/lam) k1
            return PureKLinear(float(1 / lam))
        return LinearHopf(float(lam), float(C))
    if degs == {3}:
        g2 = -rest[3] / a_coeff
        if g2 > 0:
            return CubicRoC(float(math.sqrt(g2)))
    return None


def parse_relation(text: str) -> WeingartenRelation:
    """Parse relation text into its canonical variant.

    H and K abbreviate (k1+k2)/2 and k1*k2.  Falls back to ExplicitF when
    the equation reads ``r2 = f(r1)`` (or ``f(r1) = r2``) outside the
    named families; anything else is rejected as ambiguous.
    """
    lhs, rhs = ex.parse_equation(text)
    half = Const(Fraction(1, 2))
    hk = {
        "H": BinOp("*", half, BinOp("+", Var("k1"), Var("k2"))),
        "K": BinOp("*", Var("k1"), Var("k2")),
    }
    lhs = ex.substitute(lhs, hk)
    rhs = ex.substitute(rhs, hk)
    diff = BinOp("-", lhs, rhs)
    variables = ex.expr_variables(diff)

    if variables <= {"k1", "k2"}:
        try:
            poly = ex.as_polynomial(diff, ("k1", "k2"))
        except ex.NotPolynomial:
            poly = None
        if poly is not None:
            rel = _detect_from_k_poly(poly)
            if rel is not None:
                return rel
        raise RelationError(
            "curvature-form relation is not semi-quadratic; "
            "write it as r2 = f(r1) to use an explicit relation")

    if variables <= {"r1", "r2"}:
        try:
            poly = ex.as_polynomial(diff, ("r1", "r2"))
        except ex.NotPolynomial:
            poly = None
        if poly is not None:
            rel = _detect_from_r_poly(poly)
            if rel is not None:
                return rel
        # explicit form: exactly one side is the bare variable r2
        for a, b in ((lhs, rhs), (rhs, lhs)):
            if isinstance(a, Var) and a.name == "r2" and "r2" not in ex.expr_variables(b):
                return ExplicitF(b)
        raise RelationError(
            "relation is neither solvable for r2 nor in k-coefficient form")

    raise RelationError("relation mixes radii and curvature variables")


def render_relation(rel: WeingartenRelation) -> str:
    """Canonical text form; parse_relation(render_relation(rel)) round-trips."""
    def num(x: float) -> str:
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return repr(x)

    def signed(x: float) -> str:
        return f"+ {num(x)}" if x >= 0 else f"- {num(-x)}"

    if isinstance(rel, LinearHopf):
        return f"r2 = {num(rel.lam)}*r1 {signed(rel.C)}"
    if isinstance(rel, PureKLinear):
        return f"k2 = {num(rel.lam)}*k1"
    if isinstance(rel, SemiQuadratic):
        a, b, g, d = rel.coefficients()
        return (f"{num(a)}*k1*k2 {signed(b)}*k1 {signed(g)}*k2 {signed(d)} = 0")
    if isinstance(rel, CubicRoC):
        return f"r2 = {num(rel.gamma ** 2)}*r1^3"
    if isinstance(rel, ExplicitF):
        return f"r2 = {ex.render_expr(rel.expr)}"
    raise TypeError(f"not a relation: {rel!r}")


# ---------------------------------------------------------------------------
# evaluation as r2 = F(r1)

def eval_F(rel: WeingartenRelation, r1: ExtReal | float) -> ExtReal:
    """r2 = F(r1) with projective conventions at asymptotes.

    SemiQuadratic relations are fractional-linear in the radii:
    F(u) = -(gamma*u + alpha)/(delta*u + beta).
    """
    if isinstance(rel, SemiQuadratic):
        from .projective import frac_linear

        a, b, g, d = rel.coefficients()
        return frac_linear(-g, -a, d, b, r1)
    if isinstance(r1, ExtReal):
        if r1.is_inf:
            if isinstance(rel, LinearHopf):
                return INF if rel.lam != 0 else ExtReal(rel.C)
            if isinstance(rel, (PureKLinear, CubicRoC)):
                return INF
            raise EvalDomainError("explicit relation not defined at infinity")
        u = r1.value
    else:
        u = float(r1)
    if isinstance(rel, LinearHopf):
        return ExtReal(rel.lam * u + rel.C)
    if isinstance(rel, PureKLinear):
        if rel.lam == 0.0:
            return INF if u != 0.0 else ExtReal(0.0)
        return ExtReal(u / rel.lam)
    if isinstance(rel, CubicRoC):
        return ExtReal(rel.gamma ** 2 * u ** 3)
    if isinstance(rel, ExplicitF):
        try:
            return ExtReal(ex.eval_expr(rel.expr, {"r1": u}))
        except ZeroDivisionError:
            return INF
    raise TypeError(f"not a relation: {rel!r}")


def eval_F_float(rel: WeingartenRelation, u):
    """Vectorizable float version of eval_F; infinities come back as np.inf."""
    if isinstance(rel, LinearHopf):
        return rel.lam * np.asarray(u, dtype=float) + rel.C
    if isinstance(rel, PureKLinear):
        return np.asarray(u, dtype=float) / rel.lam
    if isinstance(rel, CubicRoC):
        return rel.gamma ** 2 * np.asarray(u, dtype=float) ** 3
    if isinstance(rel, SemiQuadratic):
        from .projective import frac_linear_array

        a, b, g, d = rel.coefficients()
        return frac_linear_array(-g, -a, d, b, np.asarray(u, dtype=float))
    if isinstance(rel, ExplicitF):
        arr = np.asarray(u, dtype=float)
        if arr.ndim == 0:
            return float(eval_F(rel, float(arr)))
        return np.array([float(eval_F(rel, x)) for x in arr])
    raise TypeError(f"not a relation: {rel!r}")


def eval_F_prime(rel: WeingartenRelation, r1: float) -> float:
    """dF/dr1 by the analytic rule of each variant."""
    u = float(r1)
    if isinstance(rel, LinearHopf):
        return rel.lam
    if isinstance(rel, PureKLinear):
        if rel.lam == 0.0:
            raise EvalDomainError("k2 = 0 relation has no finite F'")
        return 1.0 / rel.lam
    if isinstance(rel, CubicRoC):
        return 3.0 * rel.gamma ** 2 * u ** 2
    if isinstance(rel, SemiQuadratic):
        a, b, g, d = rel.coefficients()
        den = d * u + b
        if den == 0.0:
            raise EvalDomainError("F' undefined at the vertical asymptote")
        # F = -(g*u + a)/(d*u + b)
        return -(g * b - d * a) / den ** 2
    if isinstance(rel, ExplicitF):
        deriv = ex.diff_expr(rel.expr, "r1")
        return ex.eval_expr(deriv, {"r1": u})
    raise TypeError(f"not a relation: {rel!r}")


def fixed_points(rel: WeingartenRelation, bracket: tuple[float, float],
                 subdivisions: int = 512, tol: float = 1e-12) -> list[float]:
    """All umbilic radii F(r0) = r0 in the bracket, certified by sign change.

    Sign-scan on ``subdivisions`` panels followed by bisection; tangential
    touches without a sign change are not reported.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must be a nondegenerate finite interval")

    def g(u: float) -> float:
        val = eval_F(rel, u)
        if val.is_inf:
            return math.inf
        return val.value - u

    xs = np.linspace(lo, hi, subdivisions + 1)
    roots: list[float] = []
    vals = [g(x) for x in xs]
    for i in range(subdivisions):
        ga, gb = vals[i], vals[i + 1]
        if not (math.isfinite(ga) and math.isfinite(gb)):
            continue
        if ga == 0.0:
            if not roots or abs(xs[i] - roots[-1]) > tol * 10:
                roots.append(float(xs[i]))
            continue
        if ga * gb < 0.0:
            a, b = xs[i], xs[i + 1]
            fa = ga
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = g(m)
                if fm == 0.0:
                    a = b = m
                    break
                if fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            root = 0.5 * (a + b)
            # a sign change across a vertical asymptote of F is not a root
            if abs(g(root)) > 1e-6 * max(1.0, abs(root)):
                continue
            if not roots or abs(root - roots[-1]) > tol * 10:
                roots.append(float(root))
    if vals[-1] == 0.0 and (not roots or abs(xs[-1] - roots[-1]) > tol * 10):
        roots.append(float(xs[-1]))
    return roots
