"""Independent oracle for the frozen reference values in tests/test_isotropic.py.

Shares no search code with pinchlab: frames come from QR of an unconstrained
matrix, weights are bounded variables, and scipy's L-BFGS-B does the work.
Curvature components are contracted with plain einsum on the raw array.
Run: python tools/derive_oracles.py
"""

import numpy as np
from scipy.optimize import minimize

from pinchlab.curvature import fubini_study, random_algebraic


def qr_frame(a, k, n):
    q, r = np.linalg.qr(a.reshape(n, k))
    return (q * np.sign(np.diag(r))).T


def contract(C, a, b, c, d):
    return np.einsum("ijkl,i,j,k,l->", C, a, b, c, d)


def sectional_extreme(C, sense, starts=300, seed=0):
    n = C.shape[0]
    rng = np.random.default_rng(seed)
    sgn = 1.0 if sense == "min" else -1.0

    def f(x):
        e = qr_frame(x, 2, n)
        return sgn * contract(C, e[0], e[1], e[0], e[1])

    best = np.inf
    for _ in range(starts):
        r = minimize(f, rng.standard_normal(2 * n), method="BFGS", options={"gtol": 1e-12})
        best = min(best, r.fun)
    return sgn * best


def cone_min(C, kind, starts=300, seed=0):
    n = C.shape[0]
    rng = np.random.default_rng(seed)
    d = {"PIC": 0, "PIC1": 1, "PIC2": 2}[kind]

    def f(x):
        e = qr_frame(x[: 4 * n], 4, n)
        lam = x[4 * n] if d >= 1 else 1.0
        mu = x[4 * n + 1] if d == 2 else 1.0
        num = (contract(C, e[0], e[2], e[0], e[2]) + lam**2 * contract(C, e[0], e[3], e[0], e[3])
               + mu**2 * contract(C, e[1], e[2], e[1], e[2]) + lam**2 * mu**2 * contract(C, e[1], e[3], e[1], e[3])
               - 2 * lam * mu * contract(C, e[0], e[1], e[2], e[3]))
        return num / ((1 + lam**2) * (1 + mu**2))

    bounds = [(None, None)] * (4 * n) + [(0.0, 1.0)] * d
    best = np.inf
    for _ in range(starts):
        x0 = np.concatenate([rng.standard_normal(4 * n), rng.uniform(0, 1, d)])
        r = minimize(f, x0, method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000})
        best = min(best, r.fun)
    return best


def main():
    np.set_printoptions(precision=17)
    for dim, seed in ((4, 3), (5, 2), (6, 1)):
        C = random_algebraic(dim, seed).components
        print(f"random_algebraic({dim}, {seed}) K_min {float(sectional_extreme(C, 'min'))!r} K_max {float(sectional_extreme(C, 'max'))!r}")
    for dim, seed in ((4, 3), (5, 2)):
        C = random_algebraic(dim, seed).components
        C = C / np.sqrt(np.sum(C**2))
        for kind in ("PIC", "PIC1", "PIC2"):
            print(f"unit random_algebraic({dim}, {seed}) {kind} {float(cone_min(C, kind, starts=150))!r}")
    C = fubini_study(3).components
    for kind in ("PIC", "PIC1", "PIC2"):
        print(f"fubini_study(3) {kind} {float(cone_min(C, kind, starts=60))!r}")


if __name__ == "__main__":
    main()
