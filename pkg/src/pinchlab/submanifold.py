"""Second fundamental forms, ambient restrictions and the Gauss equations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    CurvatureTensor,
    _trusted,
    k_extremes,
    normalized_scalar,
    weak_ricci_min,
)
from .errors import DimensionMismatch, FrameNotUnitary, MissingAmbientScalar
from .frames import SearchConfig, as_frame

UNITARY_TOL = 1e-12
CONSISTENCY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SecondFundamentalForm:
    """Slices h^alpha_{ij}, shape (codim, n, n), one symmetric matrix per normal direction."""

    slices: np.ndarray

    def __post_init__(self):
        h = np.array(self.slices, dtype=float)
        if h.ndim == 2:
            h = h[None]
        if h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise DimensionMismatch(f"slices must have shape (codim, n, n), got {h.shape}")
        asym = np.abs(h - np.swapaxes(h, 1, 2))
        if asym.size and asym.max() > 1e-12:
            raise ValueError(f"second fundamental form slice not symmetric (residual {asym.max():.3e})")
        h.setflags(write=False)
        object.__setattr__(self, "slices", h)

    @classmethod
    def zero(cls, n: int, codim: int = 1) -> "SecondFundamentalForm":
        return cls(np.zeros((codim, n, n)))

    @classmethod
    def umbilic(cls, n: int, radius: float, codim: int = 1) -> "SecondFundamentalForm":
        """Round sphere of the given radius: h = (1/r) g in the first normal direction."""
        h = np.zeros((codim, n, n))
        h[0] = np.eye(n) / radius
        return cls(h)

    @property
    def n(self) -> int:
        return self.slices.shape[1]

    @property
    def codim(self) -> int:
        return self.slices.shape[0]

    @property
    def mean_curvature(self) -> np.ndarray:
        """H^alpha = (1/n) tr h^alpha."""
        return np.trace(self.slices, axis1=1, axis2=2) / self.n

    @property
    def mean_curvature_sq(self) -> float:
        return float(np.sum(self.mean_curvature**2))

    @property
    def traceless(self) -> np.ndarray:
        return self.slices - self.mean_curvature[:, None, None] * np.eye(self.n)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(self.slices**2))

    @property
    def traceless_norm_sq(self) -> float:
        return float(np.sum(self.traceless**2))


@dataclass(frozen=True, eq=False)
class AmbientRestriction:
    """Pointwise ambient data: the tangential curvature plus the ambient scalar bounds the theorems use."""

    tangential: CurvatureTensor
    ambient_dim: int | None = None
    k_max: float | None = None
    k_min: float | None = None
    r0: float | None = None
    ricci4_min: float | None = None
    ambient: CurvatureTensor | None = field(default=None, repr=False)
    certified: bool = True

    @property
    def n(self) -> int:
        return self.tangential.dim

    def require(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise MissingAmbientScalar(f"ambient scalar {name!r} was neither supplied nor computable")
        return float(v)

    @classmethod
    def from_scalars(cls, tangential: CurvatureTensor, ambient_dim: int | None = None, **scalars) -> "AmbientRestriction":
        if ambient_dim is not None and ambient_dim < tangential.dim:
            raise DimensionMismatch("ambient dimension smaller than the submanifold")
        return cls(tangential, ambient_dim, **scalars)


_SCALAR_NAMES = ("k_max", "k_min", "r0", "ricci4_min")


def restrict_ambient(
    ambient: CurvatureTensor,
    tangent_frame=None,
    config: SearchConfig | None = None,
    *,
    scalars: dict | None = None,
    compute_bounds: bool = True,
) -> AmbientRestriction:
    """Restrict a dim-N ambient tensor to span(tangent_frame) and compute the ambient bounds.

    ``tangent_frame`` defaults to the first n standard basis vectors when given
    as an int n. Supplied ``scalars`` are checked against the tensor; the tensor
    wins on mismatch and a warning is emitted.
    """
    N = ambient.dim
    if tangent_frame is None:
        tangent_frame = N
    if isinstance(tangent_frame, (int, np.integer)):
        tangent_frame = np.eye(N)[: int(tangent_frame)]
    T = as_frame(tangent_frame, dim=N).vectors
    comps = np.einsum("abcd,ia,jb,kc,ld->ijkl", ambient.components, T, T, T, T, optimize=True)
    tangential = _trusted(comps)
    values = {}
    certified = True
    if compute_bounds:
        ext = k_extremes(ambient, config)
        values = {"k_max": ext.k_max, "k_min": ext.k_min, "r0": normalized_scalar(ambient)}
        values["ricci4_min"] = weak_ricci_min(ambient, 4) if N >= 4 else None
        certified = ext.converged
        for name, given in (scalars or {}).items():
            if name not in _SCALAR_NAMES:
                raise ValueError(f"unknown ambient scalar {name!r}")
            have = values.get(name)
            if given is not None and have is not None and abs(float(given) - have) > CONSISTENCY_TOL:
                warnings.warn(
                    f"supplied ambient {name}={given} disagrees with the tensor value {have}; using the tensor",
                    stacklevel=2,
                )
    else:
        values = {k: v for k, v in (scalars or {}).items() if k in _SCALAR_NAMES}
    return AmbientRestriction(tangential, N, ambient=ambient, certified=certified, **values)


def _tangential(ambient) -> CurvatureTensor:
    return ambient.tangential if isinstance(ambient, AmbientRestriction) else ambient


def second_fundamental_term(B: SecondFundamentalForm) -> CurvatureTensor:
    """(1/2) sum_alpha h^alpha (x) h^alpha, i.e. sum h_ik h_jl - h_il h_jk."""
    h = B.slices
    comps = np.einsum("aik,ajl->ijkl", h, h) - np.einsum("ail,ajk->ijkl", h, h)
    return _trusted(comps)


def gauss_induced(ambient, B: SecondFundamentalForm) -> CurvatureTensor:
    """Induced curvature R = Rbar^T + (1/2) B (x) B."""
    RT = _tangential(ambient)
    if RT.dim != B.n:
        raise DimensionMismatch(f"tangential curvature has dim {RT.dim}, second fundamental form has n = {B.n}")
    if isinstance(ambient, AmbientRestriction) and ambient.ambient_dim is not None:
        if B.codim > ambient.ambient_dim - B.n:
            raise DimensionMismatch(f"codimension {B.codim} exceeds N - n = {ambient.ambient_dim - B.n}")
    return RT + second_fundamental_term(B)


def double_trace_residual(ambient, B: SecondFundamentalForm) -> float:
    """|n(n-1) R_0 - (sum Rbar^T_ijij + n^2 |H|^2 - |B|^2)| for the induced tensor."""
    R = gauss_induced(ambient, B)
    n = B.n
    RT = _tangential(ambient)
    lhs = n * (n - 1) * normalized_scalar(R)
    rhs = float(np.einsum("ijij->", RT.components)) + n * n * B.mean_curvature_sq - B.norm_sq
    return abs(lhs - rhs)


def check_unitary(frame: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    F = np.asarray(frame, dtype=complex)
    if F.ndim != 2:
        raise FrameNotUnitary(f"complex frame must be a 2-d array, got shape {F.shape}")
    res = np.max(np.abs(F @ F.conj().T - np.eye(F.shape[0]))) if F.size else 0.0
    if res > tol:
        raise FrameNotUnitary(f"complex frame unitarity residual {res:.3e} exceeds {tol:.1e}")
    return F


def isotropic_unitary_frame(n: int) -> np.ndarray:
    """Unitary frame built from (e_{2k-1} +- i e_{2k}) / sqrt 2, padded with real e_n for odd n."""
    F = np.zeros((n, n), dtype=complex)
    half = n // 2
    s = 1 / np.sqrt(2)
    for k in range(half):
        F[k, 2 * k] = s
        F[k, 2 * k + 1] = 1j * s
        F[half + k, 2 * k] = s
        F[half + k, 2 * k + 1] = -1j * s
    if n % 2:
        F[n - 1, n - 1] = 1.0
    return F


def pinching_complex_frame(real_frame, lam: float, mu: float) -> np.ndarray:
    """Unitary frame with eps_1 = (e1 + i mu e2)/., eps_2 = (e3 + i lam e4)/., eps_3, eps_4 their partners, eps_i = e_i beyond."""
    E = np.asarray(real_frame.vectors if hasattr(real_frame, "vectors") else real_frame, dtype=float)
    n = E.shape[1]
    if E.shape[0] != n:
        raise DimensionMismatch("pinching_complex_frame needs a full orthonormal basis")
    a, b = np.sqrt(1 + mu * mu), np.sqrt(1 + lam * lam)
    F = E.astype(complex)
    F[0] = (E[0] + 1j * mu * E[1]) / a
    F[1] = (E[2] + 1j * lam * E[3]) / b
    F[2] = (mu * E[0] - 1j * E[1]) / a
    F[3] = (lam * E[2] - 1j * E[3]) / b
    return F


def complex_curvature_matrix(R: CurvatureTensor, F: np.ndarray) -> np.ndarray:
    """M[i, j] = R(eps_i, eps_j, conj eps_i, conj eps_j)."""
    return np.einsum("ia,jb,abcd,ic,jd->ij", F, F, R.components, F.conj(), F.conj(), optimize=True)


def complex_gauss_sides(ambient, B: SecondFundamentalForm, complex_frame) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Left and right sides of the complex Gauss equation (both forms) and the complex Ricci formula."""
    F = check_unitary(complex_frame)
    n = B.n
    if F.shape != (n, n):
        raise DimensionMismatch(f"complex frame must be {n} x {n}, got {F.shape}")
    RT = _tangential(ambient)
    R = gauss_induced(ambient, B)
    lhs = complex_curvature_matrix(R, F)
    bar = complex_curvature_matrix(RT, F)
    # h[a, i, j] = h^a(eps_i, conj eps_j)
    h = np.einsum("ip,apq,jq->aij", F, B.slices, F.conj())
    Hv = B.mean_curvature
    hc = h - Hv[:, None, None] * np.eye(n)
    d = np.real(np.einsum("aii->ai", h))
    dc = np.real(np.einsum("aii->ai", hc))

    form1 = bar + np.einsum("ai,aj->ij", d, d) - np.einsum("aij,aij->ij", h, h.conj())
    form2 = (
        bar
        + B.mean_curvature_sq
        + np.einsum("a,ai->i", Hv, dc)[:, None]
        + np.einsum("a,aj->j", Hv, dc)[None, :]
        + np.einsum("ai,aj->ij", dc, dc)
        - np.einsum("aij,aij->ij", hc, hc.conj())
    )
    off = ~np.eye(n, dtype=bool)
    ric_lhs = lhs.sum(axis=1)
    ric_rhs = (
        bar.sum(axis=1)
        + (n - 1) * B.mean_curvature_sq
        + (n - 2) * np.einsum("a,ai->i", Hv, dc)
        - np.einsum("aik,aik->i", hc, hc.conj())
    )
    return {
        "gauss": (lhs[off], form1[off]),
        "gauss_traceless": (lhs[off], form2[off]),
        "ricci": (ric_lhs, ric_rhs),
    }


def complex_gauss_check(ambient, B: SecondFundamentalForm, complex_frame) -> float:
    """Max |LHS - RHS| over the complex Gauss equation (i != j, both forms) and complex Ricci."""
    sides = complex_gauss_sides(ambient, B, complex_frame)
    return float(max(np.max(np.abs(l - r)) if l.size else 0.0 for l, r in sides.values()))
