"""Extremization of frame-dependent objectives over orthonormal k-frames.

Objectives are *batched*: they take an array of frames with shape ``(B, k, n)``
(rows are the frame vectors) and an array of auxiliary box parameters with
shape ``(B, d)``, and return ``B`` values. Use :func:`vectorize_objective` to
lift a plain scalar function.

An objective may also expose ``best_aux(frames, aux_start=None)`` returning
``(values, aux)`` with aux minimized for each frame. When present it replaces
the grid scan in the coarse phase and polishes aux after every frame step.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceFailure, FrameNotOrthonormal

DEFAULT_SEED = 1729
ORTHO_TOL = 1e-12

Objective = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OrthonormalFrame:
    """k orthonormal row vectors in R^n."""

    vectors: np.ndarray
    tol: float = field(default=ORTHO_TOL, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] > v.shape[1]:
            raise FrameNotOrthonormal(f"frame must be a k x n array with k <= n, got shape {v.shape}")
        res = orthonormality_residual(v)
        if res > self.tol:
            raise FrameNotOrthonormal(f"frame orthonormality residual {res:.3e} exceeds {self.tol:.1e}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    def __getitem__(self, a):
        return self.vectors[a]

    def transformed(self, Q: np.ndarray) -> "OrthonormalFrame":
        """Frame with every vector mapped by the orthogonal matrix ``Q``."""
        return OrthonormalFrame(self.vectors @ np.asarray(Q).T)

    def to_list(self) -> list[list[float]]:
        return self.vectors.tolist()


def orthonormality_residual(vectors: np.ndarray) -> float:
    v = np.asarray(vectors)
    gram = v @ v.conj().T
    return float(np.max(np.abs(gram - np.eye(v.shape[0])))) if v.size else 0.0


def as_frame(frame, k: int | None = None, dim: int | None = None) -> OrthonormalFrame:
    """Coerce an array or frame, checking orthonormality and (optionally) shape."""
    f = frame if isinstance(frame, OrthonormalFrame) else OrthonormalFrame(np.asarray(frame, dtype=float))
    if k is not None and f.k != k:
        raise FrameNotOrthonormal(f"expected a {k}-frame, got {f.k} vectors")
    if dim is not None and f.dim != dim:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"frame lives in dimension {f.dim}, expected {dim}")
    return f


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 32
    max_iters: int = 400
    step_tol: float = 1e-10
    value_tol: float = 1e-13
    samples: int = 4096
    seed: int = DEFAULT_SEED
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.restarts < 1 or self.samples < 1 or self.max_iters < 0:
            raise ValueError("restarts and samples must be >= 1, max_iters >= 0")
        if not (self.step_tol > 0 and self.value_tol > 0 and self.fd_step > 0):
            raise ValueError("all tolerances must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown search config keys: {sorted(unknown)}")
        return cls(**d)

    def with_seed(self, seed: int) -> "SearchConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class ExtremumCertificate:
    value: float
    frame: OrthonormalFrame
    aux_params: tuple[float, ...]
    converged: bool
    evaluations: int
    sense: str = "min"

    def require_converged(self) -> "ExtremumCertificate":
        if not self.converged:
            raise ConvergenceFailure(
                f"frame search did not converge; best {self.sense} value {self.value!r}", self
            )
        return self

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sense": self.sense,
            "frame": self.frame.to_list(),
            "aux_params": list(self.aux_params),
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


def random_frame(dim: int, k: int, rng: np.random.Generator) -> OrthonormalFrame:
    """Haar-distributed orthonormal k-frame (QR of a Gaussian sample)."""
    if k > dim:
        raise ValueError(f"cannot fit {k} orthonormal vectors in dimension {dim}")
    return OrthonormalFrame(random_frames(rng, 1, dim, k)[0])


def random_frames(rng: np.random.Generator, count: int, dim: int, k: int) -> np.ndarray:
    g = rng.standard_normal((count, dim, k))
    return _orthonormalize(g)


def _orthonormalize(cols: np.ndarray) -> np.ndarray:
    # cols: (B, n, k) -> rows of Q^T with the sign convention diag(R) > 0
    q, r = np.linalg.qr(cols)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    s[s == 0] = 1.0
    q = q * s[:, None, :]
    return np.swapaxes(q, -1, -2)


def _retract(frames: np.ndarray) -> np.ndarray:
    return _orthonormalize(np.swapaxes(frames, -1, -2))


def vectorize_objective(f: Callable[[np.ndarray, np.ndarray], float]) -> Objective:
    """Lift ``f(frame (k,n), aux (d,)) -> float`` to the batched protocol."""

    def batched(frames: np.ndarray, aux: np.ndarray) -> np.ndarray:
        return np.array([float(f(F, a)) for F, a in zip(frames, aux)])

    return batched


def _box(aux_box) -> np.ndarray:
    if aux_box is None:
        return np.zeros((0, 2))
    box = np.asarray(aux_box, dtype=float).reshape(-1, 2)
    if np.any(box[:, 0] > box[:, 1]):
        raise ValueError("aux_box rows must be (low, high) with low <= high")
    return box


def _grid(box: np.ndarray, points: int = 11) -> np.ndarray:
    if len(box) == 0:
        return np.zeros((1, 0))
    axes = [np.linspace(lo, hi, points) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class _Counted:
    """Wraps an objective and counts evaluations."""

    def __init__(self, objective, negate: bool):
        self.objective = objective
        self.sign = -1.0 if negate else 1.0
        self.count = 0
        hook = getattr(objective, "best_aux", None)
        self.best_aux = None if (negate or hook is None) else self._hook(hook)

    def __call__(self, frames, aux):
        self.count += len(frames)
        return self.sign * np.asarray(self.objective(frames, aux), dtype=float)

    def _hook(self, hook):
        def wrapped(frames, aux_start=None):
            self.count += len(frames)
            vals, aux = hook(frames, aux_start)
            return np.asarray(vals, dtype=float), np.asarray(aux, dtype=float)

        return wrapped


def _coarse(obj: _Counted, frames: np.ndarray, box: np.ndarray, chunk: int = 8192):
    d = len(box)
    if d == 0:
        return obj(frames, np.zeros((len(frames), 0))), np.zeros((len(frames), 0))
    if obj.best_aux is not None:
        return obj.best_aux(frames, None)
    grid = _grid(box)
    best = np.full(len(frames), np.inf)
    best_aux = np.zeros((len(frames), d))
    for g in grid:
        for s in range(0, len(frames), chunk):
            sl = slice(s, s + chunk)
            vals = obj(frames[sl], np.broadcast_to(g, (len(frames[sl]), d)))
            better = vals < best[sl]
            best[sl] = np.where(better, vals, best[sl])
            best_aux[sl][better] = g
    return best, best_aux


def _fd_gradient(obj: _Counted, X: np.ndarray, A: np.ndarray, h: float):
    B, k, n = X.shape
    d = A.shape[1]
    P = k * n + d
    flat = np.concatenate([X.reshape(B, k * n), A], axis=1)
    E = np.eye(P) * h
    pts = np.concatenate([flat[:, None, :] + E, flat[:, None, :] - E], axis=1).reshape(B * 2 * P, P)
    vals = obj(pts[:, : k * n].reshape(-1, k, n), pts[:, k * n:]).reshape(B, 2, P)
    g = (vals[:, 0] - vals[:, 1]) / (2 * h)
    return g[:, : k * n].reshape(B, k, n), g[:, k * n:]


def _tangent(X: np.ndarray, G: np.ndarray) -> np.ndarray:
    # project an ambient gradient onto the tangent space of the Stiefel manifold at X
    S = G @ np.swapaxes(X, -1, -2)
    return G - 0.5 * (S + np.swapaxes(S, -1, -2)) @ X


def _projected_aux_grad(A: np.ndarray, gA: np.ndarray, box: np.ndarray) -> np.ndarray:
    if gA.shape[1] == 0:
        return gA
    at_lo = (A <= box[:, 0] + 1e-15) & (gA > 0)
    at_hi = (A >= box[:, 1] - 1e-15) & (gA < 0)
    return np.where(at_lo | at_hi, 0.0, gA)


def _local_search(obj: _Counted, X, A, fX, box, config: SearchConfig):
    """Vectorized Riemannian projected-gradient descent with BB steps and Armijo backtracking."""
    R = len(X)
    active = np.ones(R, dtype=bool)
    converged = np.zeros(R, dtype=bool)
    step = np.full(R, np.nan)
    prev = None
    lo, hi = box[:, 0], box[:, 1]
    for _ in range(config.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Xa, Aa, fa = X[idx], A[idx], fX[idx]
        gX, gA = _fd_gradient(obj, Xa, Aa, config.fd_step)
        rX = _tangent(Xa, gX)
        rA = _projected_aux_grad(Aa, gA, box)
        gnorm = np.sqrt(np.sum(rX**2, axis=(1, 2)) + np.sum(rA**2, axis=1))

        t = np.where(np.isnan(step[idx]), np.minimum(1.0, 0.3 / np.maximum(gnorm, 1e-300)), step[idx])
        if prev is not None:
            # active only shrinks, so every current index was active last iteration
            pidx, pX, pA, pgX, pgA = prev
            p = np.searchsorted(pidx, idx)
            s = np.concatenate([(Xa - pX[p]).reshape(len(idx), -1), Aa - pA[p]], axis=1)
            y = np.concatenate([(rX - pgX[p]).reshape(len(idx), -1), rA - pgA[p]], axis=1)
            sy = np.einsum("ij,ij->i", s, y)
            ss = np.einsum("ij,ij->i", s, s)
            bb = np.clip(ss / np.where(sy > 1e-300, sy, 1.0), 1e-10, 1e3)
            t = np.where(sy > 1e-300, bb, t)
        prev = (idx, Xa, Aa, rX, rA)

        newX, newA, newf = Xa.copy(), Aa.copy(), fa.copy()
        pending = gnorm > 0
        accepted = np.zeros(len(idx), dtype=bool)
        for _ls in range(50):
            m = np.flatnonzero(pending)
            if m.size == 0:
                break
            cX = _retract(Xa[m] - t[m, None, None] * rX[m])
            cA = np.clip(Aa[m] - t[m, None] * gA[m], lo, hi) if A.shape[1] else Aa[m]
            cf = obj(cX, cA)
            moved = np.sum((cX - Xa[m]) ** 2, axis=(1, 2)) + np.sum((cA - Aa[m]) ** 2, axis=1)
            ok = cf <= fa[m] - 1e-4 * moved / t[m]
            ok &= cf < fa[m]
            good = m[ok]
            newX[good], newA[good], newf[good] = cX[ok], cA[ok], cf[ok]
            accepted[good] = True
            pending[good] = False
            t[m[~ok]] *= 0.5

        if obj.best_aux is not None and A.shape[1]:
            pv, pa = obj.best_aux(newX, newA)
            better = pv < newf
            newA[better], newf[better] = pa[better], pv[better]

        moved = np.sqrt(np.sum((newX - Xa) ** 2, axis=(1, 2)) + np.sum((newA - Aa) ** 2, axis=1))
        decrease = fa - newf
        done = (~accepted) | (decrease <= config.value_tol * (1.0 + np.abs(fa))) | (moved <= config.step_tol)
        X[idx], A[idx], fX[idx] = newX, newA, newf
        step[idx] = t
        converged[idx[done]] = True
        active[idx[done]] = False
    return X, A, fX, converged


def minimize_over_frames(
    objective: Objective,
    dim: int,
    k: int,
    aux_box: Sequence[Sequence[float]] | None = None,
    config: SearchConfig | None = None,
    *,
    maximize: bool = False,
) -> ExtremumCertificate:
    """Multi-start minimization (or maximization) over orthonormal k-frames x aux box.

    Coarse phase: ``config.samples`` Haar frames, each scored at its best aux
    point (grid scan or the objective's ``best_aux`` hook). The ``restarts``
    best samples are then refined by projected gradient descent on the
    Stiefel manifold with central finite-difference gradients and QR
    retraction. The returned value never exceeds the coarse-phase best.
    """
    config = config or SearchConfig()
    if k > dim:
        raise ValueError(f"cannot fit {k} orthonormal vectors in dimension {dim}")
    box = _box(aux_box)
    obj = _Counted(objective, negate=maximize)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))

    samples = random_frames(rng, config.samples, dim, k)
    vals, aux = _coarse(obj, samples, box)
    order = np.argsort(vals, kind="stable")[: config.restarts]
    X = samples[order].copy()
    A = aux[order].copy()
    fX = vals[order].copy()
    if config.restarts > config.samples:
        extra = random_frames(rng, config.restarts - config.samples, dim, k)
        ev, ea = _coarse(obj, extra, box)
        X, A, fX = np.concatenate([X, extra]), np.concatenate([A, ea]), np.concatenate([fX, ev])

    X, A, fX, conv = _local_search(obj, X, A, fX, box, config)
    best = int(np.argmin(fX))
    # re-evaluate at the stored (exactly retracted) frame so the certificate reproduces
    value = float(obj(X[best : best + 1], A[best : best + 1])[0])
    return ExtremumCertificate(
        value=obj.sign * value,
        frame=OrthonormalFrame(X[best]),
        aux_params=tuple(float(a) for a in A[best]),
        converged=bool(conv[best]),
        evaluations=obj.count,
        sense="max" if maximize else "min",
    )


def brute_force_sample(
    objective: Objective,
    dim: int,
    k: int,
    aux_box=None,
    samples: int = 10_000,
    seed: int = DEFAULT_SEED,
    *,
    maximize: bool = False,
    chunk: int = 8192,
) -> float:
    """Best objective value over Haar-random frames with uniform aux draws.

    Independent oracle: no local refinement, no aux hook. Never better than
    the true extremum.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    box = _box(aux_box)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB0F]))
    best = -np.inf if maximize else np.inf
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        F = random_frames(rng, m, dim, k)
        A = rng.uniform(box[:, 0], box[:, 1], size=(m, len(box))) if len(box) else np.zeros((m, 0))
        vals = np.asarray(objective(F, A), dtype=float)
        best = max(best, float(vals.max())) if maximize else min(best, float(vals.min()))
        done += m
    return best
