"""Algebraic curvature tensors on R^n with the identity metric.

Sign convention: ``R(X, Y, Z, W) = <R(X, Y) W, Z>`` and the unnormalized
sectional quantity ``K(X, Y) = R(X, Y, X, Y)``, so the unit sphere has
``R_{1212} = +1``. Indices are 0-based in code and 1-based in JSON and
error messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegeneratePlane, DimensionMismatch, InvalidDimension, SymmetryViolation
from .frames import ExtremumCertificate, SearchConfig, minimize_over_frames

VALIDATION_TOL = 1e-10


def symmetry_residuals(components: np.ndarray) -> dict[str, tuple[float, tuple[int, ...]]]:
    """Worst residual and its index for each of the three defining identities."""
    R = np.asarray(components)
    checks = {
        "antisymmetry": np.maximum(
            np.abs(R + np.einsum("jikl->ijkl", R)), np.abs(R + np.einsum("ijlk->ijkl", R))
        ),
        "pair symmetry": np.abs(R - np.einsum("klij->ijkl", R)),
        "first Bianchi": np.abs(R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R)),
    }
    out = {}
    for name, res in checks.items():
        if res.size == 0:
            out[name] = (0.0, (0, 0, 0, 0))
            continue
        idx = np.unravel_index(int(np.argmax(res)), res.shape)
        out[name] = (float(res[idx]), tuple(int(i) for i in idx))
    return out


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Dense R_{ijkl}. Immutable; build through :func:`new_curvature` or a builder."""

    components: np.ndarray
    tol: float = field(default=VALIDATION_TOL, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        R = np.array(self.components, dtype=float)
        if R.ndim != 4 or len(set(R.shape)) != 1:
            raise DimensionMismatch(f"components must have shape (n, n, n, n), got {R.shape}")
        if R.shape[0] < 2:
            raise InvalidDimension("curvature tensors need dim >= 2")
        if self.validate:
            for name, (res, idx) in symmetry_residuals(R).items():
                if res >= self.tol:
                    raise SymmetryViolation(name, idx, res)
        R.setflags(write=False)
        object.__setattr__(self, "components", R)

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    @cached_property
    def operator(self) -> np.ndarray:
        """R as an n^2 x n^2 matrix on bivector coordinates: v(X,Y)^T M v(Z,W) = R(X,Y,Z,W)."""
        n = self.dim
        return self.components.reshape(n * n, n * n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        _same_dim(self, other)
        return _trusted(self.components + other.components)

    def __sub__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        _same_dim(self, other)
        return _trusted(self.components - other.components)

    def __mul__(self, t: float) -> "CurvatureTensor":
        return _trusted(float(t) * self.components)

    __rmul__ = __mul__

    def conjugated(self, Q: np.ndarray) -> "CurvatureTensor":
        """Pull back through the orthogonal map Q: R'(X,Y,Z,W) = R(QX, QY, QZ, QW)."""
        Q = np.asarray(Q, dtype=float)
        return _trusted(np.einsum("abcd,ai,bj,ck,dl->ijkl", self.components, Q, Q, Q, Q, optimize=True))

    def allclose(self, other: "CurvatureTensor", atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.components, other.components, rtol=0, atol=atol))


def _trusted(components: np.ndarray) -> CurvatureTensor:
    return CurvatureTensor(components, validate=False)


def _same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


@dataclass(frozen=True, eq=False)
class SymmetricForm:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch(f"symmetric form must be square, got {e.shape}")
        if e.size and np.max(np.abs(e - e.T)) > VALIDATION_TOL:
            raise SymmetryViolation("form symmetry", np.unravel_index(np.argmax(np.abs(e - e.T)), e.shape), np.max(np.abs(e - e.T)))
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "SymmetricForm":
        return cls(np.eye(n))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def trace(self) -> float:
        return float(np.trace(self.entries))


def new_curvature(dim: int, components, tol: float = VALIDATION_TOL) -> CurvatureTensor:
    """Validated constructor; raises SymmetryViolation naming the broken identity."""
    arr = np.asarray(components, dtype=float)
    if arr.size != dim**4:
        raise DimensionMismatch(f"expected {dim**4} components for dim {dim}, got {arr.size}")
    return CurvatureTensor(arr.reshape(dim, dim, dim, dim), tol=tol)


def _as_form(a) -> np.ndarray:
    return a.entries if isinstance(a, SymmetricForm) else np.asarray(a, dtype=float)


def kulkarni_nomizu(a, b) -> CurvatureTensor:
    """(a (x) b)_{ijkl} = a_ik b_jl - a_il b_jk - a_jk b_il + a_jl b_ik."""
    A, B = _as_form(a), _as_form(b)
    if A.shape != B.shape:
        raise DimensionMismatch(f"forms have shapes {A.shape} and {B.shape}")
    R = (
        np.einsum("ik,jl->ijkl", A, B)
        - np.einsum("il,jk->ijkl", A, B)
        - np.einsum("jk,il->ijkl", A, B)
        + np.einsum("jl,ik->ijkl", A, B)
    )
    return CurvatureTensor(R)


def constant_curvature(dim: int, c: float) -> CurvatureTensor:
    """Space form tensor (c/2) g (x) g: every 2-plane has curvature c."""
    if dim < 2:
        raise InvalidDimension("dim must be >= 2")
    g = np.eye(dim)
    R = c * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g))
    return CurvatureTensor(R)


def complex_structure(m: int) -> np.ndarray:
    """Standard J on R^{2m}: J e_i = e_{m+i}, J e_{m+i} = -e_i (column action)."""
    n = 2 * m
    J = np.zeros((n, n))
    J[m:, :m] = np.eye(m)
    J[:m, m:] = -np.eye(m)
    return J


def fubini_study(m: int) -> CurvatureTensor:
    """Curvature of CP^m (holomorphic curvature 4): K(X, Y) = 1 + 3<JX, Y>^2 on orthonormal pairs."""
    if m < 2:
        raise InvalidDimension("fubini_study needs m >= 2")
    n = 2 * m
    g = np.eye(n)
    J = complex_structure(m)
    # <J e_i, e_k> = J[k, i]
    Jt = J.T
    R = (
        np.einsum("ik,jl->ijkl", g, g)
        - np.einsum("il,jk->ijkl", g, g)
        + np.einsum("ik,jl->ijkl", Jt, Jt)
        - np.einsum("il,jk->ijkl", Jt, Jt)
        + 2.0 * np.einsum("ij,kl->ijkl", Jt, Jt)
    )
    return CurvatureTensor(R)


def random_algebraic(dim: int, seed: int) -> CurvatureTensor:
    """Random algebraic curvature tensor from a Gaussian symmetric operator on 2-vectors.

    The totally antisymmetric part is subtracted so the first Bianchi identity
    holds exactly (up to rounding).
    """
    if dim < 4:
        raise InvalidDimension("random_algebraic needs dim >= 4")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    m = len(pairs)
    G = rng.standard_normal((m, m))
    S = (G + G.T) / 2.0
    R = np.zeros((dim,) * 4)
    for p, (i, j) in enumerate(pairs):
        for q, (k, l) in enumerate(pairs):
            v = S[p, q]
            R[i, j, k, l] = v
            R[j, i, k, l] = -v
            R[i, j, l, k] = -v
            R[j, i, l, k] = v
    alt = (R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R)) / 3.0
    return CurvatureTensor(R - alt)


def _vec(x, n: int) -> np.ndarray:
    v = np.asarray(x)
    if v.shape != (n,):
        raise DimensionMismatch(f"vector of shape {v.shape} does not live in dimension {n}")
    return v


def evaluate(R: CurvatureTensor, X, Y, Z, W):
    """R(X, Y, Z, W), extended complex-multilinearly (no conjugation) for complex inputs."""
    n = R.dim
    X, Y, Z, W = (_vec(v, n) for v in (X, Y, Z, W))
    val = np.outer(X, Y).ravel() @ R.operator @ np.outer(Z, W).ravel()
    if np.iscomplexobj(val):
        return complex(val)
    return float(val)


def bivectors(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Batched X (x) Y flattened to length n^2: (B, n), (B, n) -> (B, n^2)."""
    B, n = X.shape
    return np.einsum("bi,bj->bij", X, Y).reshape(B, n * n)


def sectional_unnormalized_batch(R: CurvatureTensor, frames: np.ndarray) -> np.ndarray:
    """R(X, Y, X, Y) for a batch of 2-frames with shape (B, 2, n)."""
    v = bivectors(frames[:, 0], frames[:, 1])
    return np.einsum("bi,bi->b", v @ R.operator, v)


def sectional(R: CurvatureTensor, X, Y) -> float:
    """Normalized sectional curvature of span{X, Y}."""
    n = R.dim
    X, Y = np.asarray(_vec(X, n), float), np.asarray(_vec(Y, n), float)
    denom = float(X @ X) * float(Y @ Y) - float(X @ Y) ** 2
    if denom < 1e-14:
        raise DegeneratePlane(f"|X|^2|Y|^2 - <X,Y>^2 = {denom:.3e}")
    return evaluate(R, X, Y, X, Y) / denom


def ricci(R: CurvatureTensor) -> SymmetricForm:
    """Ric_{jk} = sum_i R_{j i k i}."""
    return SymmetricForm(np.einsum("jiki->jk", R.components))


def scalar(R: CurvatureTensor) -> float:
    return float(np.einsum("ijij->", R.components))


def normalized_scalar(R: CurvatureTensor) -> float:
    n = R.dim
    return scalar(R) / (n * (n - 1))


def weak_ricci_min(R: CurvatureTensor, k: int) -> float:
    """Minimum over orthonormal k-frames of sum Ric(e_a, e_a): the k smallest Ricci eigenvalues summed."""
    if not 1 <= k <= R.dim:
        raise ValueError(f"k must lie in [1, {R.dim}], got {k}")
    return float(np.sum(ricci(R).eigenvalues()[:k]))


def ricci_frame_objective(R: CurvatureTensor):
    """Batched sum_a Ric(e_a, e_a) over k-frames; independent route to weak_ricci_min."""
    ric = ricci(R).entries

    def f(frames: np.ndarray, aux: np.ndarray) -> np.ndarray:
        return np.einsum("bai,ij,baj->b", frames, ric, frames)

    return f


def sectional_objective(R: CurvatureTensor):
    """Batched unnormalized K over 2-frames, for frame search."""

    def f(frames: np.ndarray, aux: np.ndarray) -> np.ndarray:
        return sectional_unnormalized_batch(R, frames)

    return f


@dataclass(frozen=True)
class SectionalExtremes:
    k_min: float
    k_max: float
    min_certificate: ExtremumCertificate
    max_certificate: ExtremumCertificate

    @property
    def converged(self) -> bool:
        return self.min_certificate.converged and self.max_certificate.converged

    def planes(self) -> tuple[np.ndarray, np.ndarray]:
        return self.min_certificate.frame.vectors, self.max_certificate.frame.vectors


def sectional_extreme(R: CurvatureTensor, sense: str, config: SearchConfig | None = None) -> ExtremumCertificate:
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    return minimize_over_frames(sectional_objective(R), R.dim, 2, None, config, maximize=(sense == "max"))


def k_extremes(R: CurvatureTensor, config: SearchConfig | None = None) -> SectionalExtremes:
    """K_min and K_max over all 2-planes, by multi-start Stiefel search."""
    lo = sectional_extreme(R, "min", config)
    hi = sectional_extreme(R, "max", config)
    return SectionalExtremes(lo.value, hi.value, lo, hi)


@dataclass(frozen=True)
class InvariantSummary:
    dim: int
    k_min: float
    k_max: float
    scalar: float
    r0: float
    ricci_eigenvalues: list[float]
    weak_ricci_min: dict[int, float]
    certified: bool = True

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "scalar": self.scalar,
            "r0": self.r0,
            "ricci_eigenvalues": list(self.ricci_eigenvalues),
            "weak_ricci_min": {str(k): v for k, v in self.weak_ricci_min.items()},
            "certified": self.certified,
        }


def invariant_summary(R: CurvatureTensor, config: SearchConfig | None = None) -> InvariantSummary:
    ext = k_extremes(R, config)
    eig = ricci(R).eigenvalues()
    weak = {k: float(np.sum(eig[:k])) for k in range(1, R.dim + 1)}
    return InvariantSummary(
        dim=R.dim,
        k_min=ext.k_min,
        k_max=ext.k_max,
        scalar=scalar(R),
        r0=normalized_scalar(R),
        ricci_eigenvalues=[float(x) for x in eig],
        weak_ricci_min=weak,
        certified=ext.converged,
    )
