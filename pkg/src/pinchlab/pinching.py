"""Pinching thresholds, hypothesis reports and the hypothesis => cone-positivity check.

Every report puts the side that must be larger first, so ``margin = lhs - rhs``
is positive exactly when the pinching condition holds. For the |B|^2
conditions this means ``lhs`` is the bound and ``rhs`` is |B|^2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .curvature import (
    CurvatureTensor,
    constant_curvature,
    k_extremes,
    normalized_scalar,
    random_algebraic,
    ricci,
    weak_ricci_min,
)
from .errors import InvalidDimension
from .frames import DEFAULT_SEED, SearchConfig
from .isotropic import POS_TOL, ConeCertificate, ConeKind, cone_minimum
from .submanifold import AmbientRestriction, SecondFundamentalForm, gauss_induced

with localcontext() as _ctx:
    _ctx.prec = 50
    _S = Decimal(10).sqrt() - 3
    SQRT10_MINUS_3 = float(_S)
    EPS0 = float(12 * _S)
STRICT_TOL = 1e-8
EINSTEIN_TOL = 1e-9

POINTWISE_NOTE = (
    "stated globally as '>=' with strict inequality somewhere; evaluated at a single point, "
    "'holds' reports '>=' and 'strict' reports '>'"
)


class TheoremId(str, enum.Enum):
    KMIN = "KMIN"
    KMAX = "KMAX"
    RIC4 = "RIC4"
    KMAX_PIC = "KMAX_PIC"
    RIC4_PIC = "RIC4_PIC"
    EINSTEIN = "EINSTEIN"
    SUB_KMAX_TOPO = "SUB_KMAX_TOPO"
    SUB_KMAX_DIFF = "SUB_KMAX_DIFF"
    SUB_KMIN_TOPO = "SUB_KMIN_TOPO"
    SUB_KMIN_DIFF = "SUB_KMIN_DIFF"
    SUB_RIC4_TOPO = "SUB_RIC4_TOPO"
    SUB_RIC4_DIFF = "SUB_RIC4_DIFF"
    SUB_R0 = "SUB_R0"
    SUB_RIC2_A = "SUB_RIC2_A"
    SUB_RIC2_B = "SUB_RIC2_B"
    EPSILON = "EPSILON"
    COR4 = "COR4"

    @classmethod
    def parse(cls, s) -> "TheoremId":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).upper())
        except ValueError:
            names = ", ".join(t.value for t in cls)
            raise ValueError(f"unknown theorem id {s!r}; expected one of {names}") from None

    @property
    def intrinsic(self) -> bool:
        return self in _INTRINSIC

    @property
    def strict(self) -> bool:
        """True when the condition is a pointwise '>'; False for the '>= with strict somewhere' family."""
        return self not in _WEAK

    @property
    def cone(self) -> ConeKind:
        if self in (TheoremId.KMAX_PIC, TheoremId.RIC4_PIC, TheoremId.EINSTEIN) or self.value.endswith("_TOPO"):
            return ConeKind.PIC
        if self in _WEAK:
            return ConeKind.PIC2
        return ConeKind.PIC1

    @property
    def min_dim(self) -> int:
        return 6 if self is TheoremId.COR4 else 4


_INTRINSIC = {TheoremId.KMIN, TheoremId.KMAX, TheoremId.RIC4, TheoremId.KMAX_PIC, TheoremId.RIC4_PIC, TheoremId.EINSTEIN}
_WEAK = {TheoremId.SUB_R0, TheoremId.SUB_RIC2_A, TheoremId.SUB_RIC2_B, TheoremId.EPSILON, TheoremId.COR4}


@dataclass(frozen=True)
class LinearBound:
    """lhs >= k_coef * Kbar_max + h_coef * |H|^2."""

    k_coef: float
    h_coef: float


@dataclass(frozen=True)
class NormBound:
    """|B|^2 < scale * (X - pinch * Y) + h_coef * |H|^2, with (X, Y) depending on the theorem."""

    scale: float
    pinch: float
    h_coef: float


def delta(eps: float, n: int) -> float:
    return ((n - 4) * eps + 2) ** 2 * n * n / (8 * (2 + (n * n - 4 * n + 2) * eps))


def cor4_eps(n: int) -> float:
    return 2 * (n * n - 6 * n + 10) / ((n - 4) * (n * n - 4 * n + 2))


def cor4_h_coef(n: int) -> float:
    return (n - 2) * (n - 3) * (n - 4) * n * n / (n * n - 4 * n + 2) ** 2


def _check_n(theorem: TheoremId, n: int):
    if int(n) != n or n < theorem.min_dim:
        raise InvalidDimension(f"{theorem.value} needs n >= {theorem.min_dim}, got {n}")


def threshold(theorem, n: int, N: int | None = None, eps: float | None = None):
    """Closed-form pinching constant(s) of ``theorem`` in dimension n (ambient N for |B|^2 bounds)."""
    th = TheoremId.parse(theorem)
    _check_n(th, n)
    if th is TheoremId.KMIN:
        return float(1 - Fraction(12, n * n - n + 12))
    if th is TheoremId.KMAX:
        return 1 - 2 * EPS0 / (n * (n - 1))
    if th is TheoremId.RIC4:
        return 1 - EPS0 / (2 * (n - 1))
    if th is TheoremId.KMAX_PIC:
        return float(1 - Fraction(6, n * (n - 1)))
    if th in (TheoremId.RIC4_PIC, TheoremId.EINSTEIN):
        return float(1 - Fraction(3, 2 * (n - 1)))
    if th is TheoremId.SUB_R0:
        return LinearBound(float(1 - Fraction(2, n * (n - 1))), float(Fraction(n * (n - 2), (n - 1) ** 2)))
    if th is TheoremId.SUB_RIC2_A:
        return LinearBound(float(n - 2), n * n / 8)
    if th is TheoremId.SUB_RIC2_B:
        c = float(Fraction(n * (n - 3), n - 2))
        return LinearBound(c, c)
    if th is TheoremId.EPSILON:
        if eps is None or not (0 < eps <= 1):
            raise ValueError(f"EPSILON needs 0 < eps <= 1, got {eps}")
        return LinearBound(n - 1 - eps, delta(eps, n))
    if th is TheoremId.COR4:
        e = cor4_eps(n)
        if not (0 < e <= 1):
            raise ValueError(f"substituted eps = {e} falls outside (0, 1] for n = {n}")
        return LinearBound(n - 1 - e, cor4_h_coef(n))

    if N is None:
        raise ValueError(f"{th.value} needs the ambient dimension N")
    if N < n:
        raise InvalidDimension(f"ambient dimension N = {N} is smaller than n = {n}")
    topo = th.value.endswith("_TOPO")
    h_coef = n * n / (n - 2) if topo else n * n / (n - 1)
    if th in (TheoremId.SUB_KMAX_TOPO, TheoremId.SUB_KMAX_DIFF):
        NN = N * (N - 1)
        if topo:
            return NormBound(2 * NN / 3, 1 - 6 / NN, h_coef)
        return NormBound(NN / 3, 1 - 2 * EPS0 / NN, h_coef)
    if th in (TheoremId.SUB_KMIN_TOPO, TheoremId.SUB_KMIN_DIFF):
        q = N * N - N + 12
        return NormBound(q / 3 if topo else q / 6, 1 - 12 / q, h_coef)
    # SUB_RIC4_*
    if topo:
        return NormBound(8 * (N - 1) / 3, 1 - 3 / (2 * (N - 1)), h_coef)
    return NormBound(4 * (N - 1) / 3, 1 - EPS0 / (2 * (N - 1)), h_coef)


@dataclass(frozen=True)
class HypothesisReport:
    theorem: TheoremId
    n: int
    lhs: float
    rhs: float
    strict_theorem: bool
    quantities: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    certified: bool = True
    eligible: bool = True
    strict_tol: float = STRICT_TOL

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def _tol(self) -> float:
        return self.strict_tol * max(1.0, abs(self.lhs), abs(self.rhs))

    @property
    def strict(self) -> bool:
        """margin > 0 beyond round-off."""
        return self.eligible and self.margin > self._tol

    @property
    def holds(self) -> bool:
        if self.strict_theorem:
            return self.strict
        return self.eligible and self.margin >= -self._tol

    def to_dict(self) -> dict:
        d = {
            "theorem": self.theorem.value,
            "n": self.n,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "holds": self.holds,
            "strict": self.strict,
            "strict_theorem": self.strict_theorem,
            "eligible": self.eligible,
            "certified": self.certified,
            "strict_tol": self.strict_tol,
            "quantities": self.quantities,
        }
        if not self.strict_theorem:
            d["pointwise_note"] = POINTWISE_NOTE
        return d


def _report(th, n, lhs, rhs, quantities, params=None, certified=True, eligible=True) -> HypothesisReport:
    return HypothesisReport(
        th, n, float(lhs), float(rhs), th.strict, quantities, params or {}, certified, eligible
    )


def check_intrinsic(R: CurvatureTensor, theorem, config: SearchConfig | None = None,
                    *, einstein_tol: float = EINSTEIN_TOL) -> HypothesisReport:
    th = TheoremId.parse(theorem)
    if not th.intrinsic:
        raise ValueError(f"{th.value} is a submanifold theorem; use check_submanifold")
    n = R.dim
    _check_n(th, n)
    thr = threshold(th, n)
    ext = k_extremes(R, config)
    r0 = normalized_scalar(R)
    q = {"k_min": ext.k_min, "k_max": ext.k_max, "r0": r0}
    if th is TheoremId.KMIN:
        return _report(th, n, ext.k_min, thr * r0, q, certified=ext.converged)
    if th in (TheoremId.KMAX, TheoremId.KMAX_PIC):
        return _report(th, n, r0, thr * ext.k_max, q, certified=ext.converged)
    if th in (TheoremId.RIC4, TheoremId.RIC4_PIC):
        ric4 = weak_ricci_min(R, 4)
        q["ricci4_min"] = ric4
        return _report(th, n, ric4 / (4 * (n - 1)), thr * ext.k_max, q, certified=ext.converged)
    eig = ricci(R).eigenvalues()
    spread = float(eig.max() - eig.min()) / max(float(np.abs(eig).max()), 1e-300)
    q["ricci_spread"] = spread
    return _report(th, n, r0, thr * ext.k_max, q, {"einstein_tol": einstein_tol},
                   certified=ext.converged, eligible=spread < einstein_tol)


def check_submanifold(ambient: AmbientRestriction, B: SecondFundamentalForm, theorem,
                      config: SearchConfig | None = None, *, eps: float | None = None) -> HypothesisReport:
    th = TheoremId.parse(theorem)
    if th.intrinsic:
        raise ValueError(f"{th.value} is an intrinsic theorem; use check_intrinsic")
    R = gauss_induced(ambient, B)
    n = B.n
    _check_n(th, n)
    H2 = B.mean_curvature_sq
    q = {"B_norm_sq": B.norm_sq, "H_sq": H2}
    params = {"eps": eps} if th is TheoremId.EPSILON else {}

    if th in _WEAK:
        bound = threshold(th, n, eps=eps)
        kmax = ambient.require("k_max")
        q["ambient_k_max"] = kmax
        if th is TheoremId.SUB_R0:
            lhs = normalized_scalar(R)
            q["r0"] = lhs
        else:
            ric2 = weak_ricci_min(R, 2)
            q["ricci2_min"] = ric2
            lhs = ric2 / 2
        if th is TheoremId.COR4:
            params["eps"] = cor4_eps(n)
        q.update(k_coef=bound.k_coef, h_coef=bound.h_coef)
        return _report(th, n, lhs, bound.k_coef * kmax + bound.h_coef * H2, q, params, ambient.certified)

    N = ambient.ambient_dim
    bound = threshold(th, n, N=N)
    params["N"] = N
    if th.value.startswith("SUB_KMAX"):
        X, Y = ambient.require("r0"), ambient.require("k_max")
        q.update(ambient_r0=X, ambient_k_max=Y)
    elif th.value.startswith("SUB_KMIN"):
        X, Y = ambient.require("k_min"), ambient.require("r0")
        q.update(ambient_k_min=X, ambient_r0=Y)
    else:
        ric4 = ambient.require("ricci4_min")
        X, Y = ric4 / (4 * (N - 1)), ambient.require("k_max")
        q.update(ambient_ricci4_min=ric4, ambient_k_max=Y)
    q.update(scale=bound.scale, pinch=bound.pinch, h_coef=bound.h_coef)
    lhs = bound.scale * (X - bound.pinch * Y) + bound.h_coef * H2
    return _report(th, n, lhs, B.norm_sq, q, params, ambient.certified)


@dataclass(frozen=True)
class ImplicationReport:
    hypothesis: HypothesisReport
    certificate: ConeCertificate

    @property
    def consistent(self) -> bool:
        """A strictly satisfied hypothesis must come with a nonnegative cone minimum."""
        return (not self.hypothesis.strict) or self.certificate.min_value > -self.certificate.pos_tol

    def to_dict(self) -> dict:
        return {
            "theorem": self.hypothesis.theorem.value,
            "cone": self.certificate.kind.value,
            "consistent": self.consistent,
            "vacuous": not self.hypothesis.strict,
            "hypothesis": self.hypothesis.to_dict(),
            "certificate": self.certificate.to_dict(),
        }


def verify_implication(data, theorem, config: SearchConfig | None = None, *,
                       pos_tol: float = POS_TOL, eps: float | None = None) -> ImplicationReport:
    """Check the hypothesis, then always certify the promised cone on the (induced) tensor.

    ``data`` is a CurvatureTensor for intrinsic theorems or an
    ``(AmbientRestriction, SecondFundamentalForm)`` pair otherwise.
    """
    th = TheoremId.parse(theorem)
    if th.intrinsic:
        if not isinstance(data, CurvatureTensor):
            raise TypeError(f"{th.value} expects a CurvatureTensor")
        hyp = check_intrinsic(data, th, config)
        R = data
    else:
        ambient, B = data
        hyp = check_submanifold(ambient, B, th, config, eps=eps)
        R = gauss_induced(ambient, B)
    cert = cone_minimum(R, th.cone, config, pos_tol=pos_tol)
    return ImplicationReport(hyp, cert)


def perturbed_tensor(n: int, eta: float, seed: int) -> CurvatureTensor:
    """constant_curvature(n, 1) + eta * U with U random and unit spectral norm as an operator."""
    U = random_algebraic(n, seed)
    U = U * (1.0 / float(np.linalg.norm(U.operator, 2)))
    return constant_curvature(n, 1.0) + U * eta


# accepted draws top out near eta = 1 for n in {4, 5}, so this range reaches the threshold
SWEEP_ETA_MAX = 1.0


def implication_sweep(theorem, n: int, count: int, seed: int = DEFAULT_SEED,
                      config: SearchConfig | None = None, eta_max: float = SWEEP_ETA_MAX,
                      max_draws: int | None = None) -> list[ImplicationReport]:
    """Rejection-sample perturbed tensors until ``count`` satisfy the strict hypothesis, then certify each."""
    th = TheoremId.parse(theorem)
    if not th.intrinsic:
        raise ValueError("implication sweeps are defined for intrinsic theorems")
    max_draws = max_draws or 50 * count
    rng = np.random.default_rng([seed, n, list(TheoremId).index(th)])
    out = []
    for _ in range(max_draws):
        if len(out) == count:
            break
        R = perturbed_tensor(n, float(rng.uniform(0, eta_max)), int(rng.integers(2**62)))
        if check_intrinsic(R, th, config).strict:
            out.append(verify_implication(R, th, config))
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} of {count} draws satisfied {th.value} after {max_draws} tries")
    return out


def threshold_table(ns, codim: int = 1) -> list[dict]:
    """One row per (theorem, n) with every constant; |B|^2 bounds use N = n + codim."""
    rows = []
    for n in ns:
        for th in TheoremId:
            if n < th.min_dim:
                continue
            row = {"theorem": th.value, "n": n}
            if th is TheoremId.EPSILON:
                row["eps"] = 1.0
                v = threshold(th, n, eps=1.0)
            elif th.intrinsic or th in _WEAK:
                v = threshold(th, n)
            else:
                row["N"] = n + codim
                v = threshold(th, n, N=n + codim)
            if isinstance(v, float):
                row["value"] = v
            else:
                row.update(v.__dict__)
            rows.append(row)
    return rows


def cor4_ordering(n: int) -> tuple[float, float, float]:
    """The three quantities whose increasing order shows the corollary refines SUB_RIC2_B for n >= 6."""
    return n - 1 - cor4_eps(n), cor4_h_coef(n), n * (n - 3) / (n - 2)

