"""Isotropic curvature, the weighted four-frame functional and cone certification.

For an orthonormal four-frame (e1, e2, e3, e4) and weights lambda, mu::

    I(lambda, mu) = (R1313 + l^2 R1414 + m^2 R2323 + l^2 m^2 R2424 - 2 l m R1234)
                    / ((1 + l^2)(1 + m^2))

PIC fixes lambda = mu = 1 (I = isotropic sum / 4), PIC1 frees lambda in
[0, 1], PIC2 frees both. Negative weights reduce to positive ones by
flipping e4, so the default box is [0, 1].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .curvature import CurvatureTensor, bivectors, evaluate
from .errors import DegeneratePlane, DimensionMismatch, InvalidDimension
from .frames import OrthonormalFrame, SearchConfig, as_frame, brute_force_sample, minimize_over_frames

POS_TOL = 1e-7


class ConeKind(str, enum.Enum):
    PIC = "PIC"
    PIC1 = "PIC1"
    PIC2 = "PIC2"

    @classmethod
    def parse(cls, s) -> "ConeKind":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).upper())
        except ValueError:
            raise ValueError(f"unknown cone {s!r}; expected one of pic, pic1, pic2") from None

    @property
    def free_params(self) -> int:
        return {"PIC": 0, "PIC1": 1, "PIC2": 2}[self.value]


# component order used throughout: R1313, R1414, R2323, R2424, R1234
_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))


def frame_components(R: CurvatureTensor, frames: np.ndarray) -> np.ndarray:
    """Batched (R1313, R1414, R2323, R2424, R1234) for frames of shape (B, 4, n)."""
    F = np.asarray(frames)
    B = F.shape[0]
    vs = [bivectors(F[:, a], F[:, b]) for a, b in _PAIRS]
    v12 = bivectors(F[:, 0], F[:, 1])
    v34 = bivectors(F[:, 2], F[:, 3])
    stack = np.stack(vs + [v34], axis=1)  # (B, 5, n^2)
    W = stack @ R.operator
    out = np.empty((B, 5))
    for c in range(4):
        out[:, c] = np.einsum("bi,bi->b", vs[c], W[:, c])
    out[:, 4] = np.einsum("bi,bi->b", v12, W[:, 4])
    return out


def weighted_from_components(comps: np.ndarray, lam, mu) -> np.ndarray:
    a, b, c, d, e = (comps[..., i] for i in range(5))
    l2, m2 = lam * lam, mu * mu
    return (a + l2 * b + m2 * c + l2 * m2 * d - 2.0 * lam * mu * e) / ((1.0 + l2) * (1.0 + m2))


def _frame4(R: CurvatureTensor, frame4) -> np.ndarray:
    f = as_frame(frame4, k=4)
    if f.dim != R.dim:
        raise DimensionMismatch(f"frame dimension {f.dim} does not match tensor dimension {R.dim}")
    return f.vectors


def isotropic_value(R: CurvatureTensor, frame4) -> float:
    """R1313 + R1414 + R2323 + R2424 - 2 R1234 in the given orthonormal four-frame."""
    F = _frame4(R, frame4)
    c = frame_components(R, F[None])[0]
    return float(c[0] + c[1] + c[2] + c[3] - 2.0 * c[4])


def i_lambda_mu(R: CurvatureTensor, frame4, lam: float, mu: float) -> float:
    if not (-1.0 <= lam <= 1.0 and -1.0 <= mu <= 1.0):
        raise ValueError("lambda and mu must lie in [-1, 1]")
    F = _frame4(R, frame4)
    return float(weighted_from_components(frame_components(R, F[None])[0], lam, mu))


def complex_sectional(R: CurvatureTensor, z, w) -> float:
    """<R(z ^ w), conj(z) ^ conj(w)> / |z ^ w|^2 for complex vectors z, w."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape != (R.dim,) or w.shape != (R.dim,):
        raise DimensionMismatch("complex vectors must live in the tensor's dimension")
    zz, ww = np.vdot(z, z).real, np.vdot(w, w).real
    zw = np.vdot(w, z)  # sum z_i conj(w_i)
    area = zz * ww - abs(zw) ** 2
    if area < 1e-14:
        raise DegeneratePlane(f"|z ^ w|^2 = {area:.3e}")
    num = evaluate(R, z, w, z.conj(), w.conj())
    return float(np.real(num)) / area


def complex_frame_vectors(frame4, lam: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit complex vectors (e1 + i mu e2)/|.|, (e3 + i lam e4)/|.| whose complex curvature is I(lam, mu)."""
    F = np.asarray(frame4.vectors if isinstance(frame4, OrthonormalFrame) else frame4, dtype=float)
    z = (F[0] + 1j * mu * F[1]) / np.sqrt(1 + mu * mu)
    w = (F[2] + 1j * lam * F[3]) / np.sqrt(1 + lam * lam)
    return z, w


def _interval_min(A, B, C, lo: float, hi: float):
    """argmin over t in [lo, hi] of (A + B t^2 - 2 C t) / (1 + t^2), elementwise."""
    A, B, C = np.broadcast_arrays(np.asarray(A, float), np.asarray(B, float), np.asarray(C, float))
    cands = [np.full(A.shape, lo), np.full(A.shape, hi)]
    # stationary points solve C t^2 + (B - A) t - C = 0; roots q/C and -C/q (product -1)
    d = B - A
    q = -0.5 * (d + np.where(d >= 0, 1.0, -1.0) * np.sqrt(d * d + 4.0 * C * C))
    nz_q, nz_c = q != 0, C != 0
    with np.errstate(over="ignore"):  # huge roots clip to the endpoints
        small = np.where(nz_q, -C / np.where(nz_q, q, 1.0), 0.0)
        big = np.where(nz_c, q / np.where(nz_c, C, 1.0), lo)
    cands += [np.clip(small, lo, hi), np.clip(big, lo, hi)]
    T = np.stack(cands, axis=-1)
    vals = (A[..., None] + B[..., None] * T * T - 2.0 * C[..., None] * T) / (1.0 + T * T)
    j = np.argmin(vals, axis=-1)
    t = np.take_along_axis(T, j[..., None], axis=-1)[..., 0]
    return t


class ConeObjective:
    """Batched I(lambda, mu) over (frame, aux) with an exact aux polish for frame search."""

    def __init__(self, R: CurvatureTensor, kind: ConeKind, extended: bool = False):
        self.R = R
        self.kind = kind
        self.lo = -1.0 if extended else 0.0
        self.hi = 1.0
        self.box = [(self.lo, self.hi)] * kind.free_params

    def weights(self, aux: np.ndarray):
        aux = np.asarray(aux, dtype=float)
        ones = np.ones(aux.shape[0])
        if self.kind is ConeKind.PIC:
            return ones, ones
        if self.kind is ConeKind.PIC1:
            return aux[:, 0], ones
        return aux[:, 0], aux[:, 1]

    def __call__(self, frames: np.ndarray, aux: np.ndarray) -> np.ndarray:
        lam, mu = self.weights(aux)
        return weighted_from_components(frame_components(self.R, frames), lam, mu)

    def best_aux(self, frames: np.ndarray, aux_start=None):
        comps = frame_components(self.R, frames)
        a, b, c, d, e = (comps[:, i] for i in range(5))
        lo, hi = self.lo, self.hi
        if self.kind is ConeKind.PIC:
            return weighted_from_components(comps, 1.0, 1.0), np.zeros((len(frames), 0))
        if self.kind is ConeKind.PIC1:
            # mu = 1: exact global minimum in lambda
            lam = _interval_min(a + c, b + d, e, lo, hi)
            return weighted_from_components(comps, lam, 1.0), lam[:, None]
        if aux_start is None:
            grid = np.linspace(lo, hi, 11)
            L, M = np.meshgrid(grid, grid, indexing="ij")
            vals = weighted_from_components(comps[:, None, :], L.ravel()[None, :], M.ravel()[None, :])
            j = np.argmin(vals, axis=1)
            lam, mu = L.ravel()[j], M.ravel()[j]
        else:
            lam, mu = aux_start[:, 0].copy(), aux_start[:, 1].copy()
        for _ in range(6):
            lam = _interval_min(a + mu * mu * c, b + mu * mu * d, mu * e, lo, hi)
            mu = _interval_min(a + lam * lam * b, c + lam * lam * d, lam * e, lo, hi)
        return weighted_from_components(comps, lam, mu), np.stack([lam, mu], axis=1)


@dataclass(frozen=True)
class ConeCertificate:
    kind: ConeKind
    min_value: float
    frame: OrthonormalFrame
    lam: float
    mu: float
    verdict: str
    converged: bool
    config: SearchConfig
    pos_tol: float = POS_TOL

    @property
    def unnormalized(self) -> float:
        """The four-frame sum without the (1 + l^2)(1 + m^2) division; 4 I for PIC."""
        return (1 + self.lam**2) * (1 + self.mu**2) * self.min_value

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "min_value": self.min_value,
            "unnormalized_value": self.unnormalized,
            "lambda": self.lam,
            "mu": self.mu,
            "verdict": self.verdict,
            "converged": self.converged,
            "pos_tol": self.pos_tol,
            "frame": self.frame.to_list(),
            "config": self.config.to_dict(),
        }


def verdict_for(value: float, pos_tol: float = POS_TOL) -> str:
    if value > pos_tol:
        return "positive"
    if value < -pos_tol:
        return "negative"
    return "nonnegative_with_zero"


def cone_minimum(
    R: CurvatureTensor,
    kind,
    config: SearchConfig | None = None,
    *,
    pos_tol: float = POS_TOL,
    extended: bool = False,
) -> ConeCertificate:
    """Minimize I(lambda, mu) over four-frames and the cone's weight domain.

    ``extended=True`` searches lambda, mu in [-1, 1] instead of [0, 1].
    """
    kind = ConeKind.parse(kind)
    if R.dim < 4:
        raise InvalidDimension("isotropic curvature needs dim >= 4")
    config = config or SearchConfig()
    obj = ConeObjective(R, kind, extended)
    cert = minimize_over_frames(obj, R.dim, 4, obj.box, config)
    lam, mu = obj.weights(np.array([cert.aux_params]))
    lam, mu = float(lam[0]), float(mu[0])
    return ConeCertificate(
        kind=kind,
        min_value=cert.value,
        frame=cert.frame,
        lam=lam,
        mu=mu,
        verdict=verdict_for(cert.value, pos_tol),
        converged=cert.converged,
        config=config,
        pos_tol=pos_tol,
    )


def cone_brute_force(R: CurvatureTensor, kind, samples: int = 100_000, seed: int = 0, extended: bool = False) -> float:
    """Random-sampling upper bound on the cone minimum (independent oracle)."""
    obj = ConeObjective(R, ConeKind.parse(kind), extended)
    # plain callable: the oracle must not see the aux polish hook
    return brute_force_sample(lambda F, A: obj(F, A), R.dim, 4, obj.box, samples, seed)
