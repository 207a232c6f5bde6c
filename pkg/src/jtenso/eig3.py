"""Closed-form eigen-decomposition for real 2x2 and 3x3 matrices.

The 3x3 solver factors the characteristic cubic analytically (Cardano for
one real root plus a complex pair, the trigonometric form for three real
roots), polishes every root with a few Newton steps on the cubic, and
builds eigenvectors from cross products of rows of (A - lambda I). Keeping
this dependency-free matters because the same routine is reused inside
compiled kernels' host-side setup and in contexts where pulling in a full
LAPACK call per grid cell would dominate the cost.

numpy.linalg.eig is used in the test suite as an independent oracle, never
here.
"""

from __future__ import annotations

import numpy as np

from .errors import DefectiveMatrix

_TWO_PI_THIRDS = 2.0 * np.pi / 3.0


def _cubic_roots(b: float, c: float, d: float):
    """Roots of lambda^3 + b lambda^2 + c lambda + d, Newton-polished.

    Returns a list of three complex numbers; real roots carry zero
    imaginary part exactly.
    """
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if disc > 0.0:
        # one real root, one complex-conjugate pair
        s = np.sqrt(disc)
        u = np.cbrt(-q / 2.0 + s)
        v = np.cbrt(-q / 2.0 - s)
        real_root = u + v + shift
        re = -(u + v) / 2.0 + shift
        im = (np.sqrt(3.0) / 2.0) * (u - v)
        roots = [complex(real_root, 0.0), complex(re, im), complex(re, -im)]
    elif p == 0.0 and q == 0.0:
        roots = [complex(shift, 0.0)] * 3
    else:
        # three real roots, trigonometric form
        m = 2.0 * np.sqrt(max(-p / 3.0, 0.0))
        arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        roots = [
            complex(m * np.cos(theta - _TWO_PI_THIRDS * k) + shift, 0.0)
            for k in range(3)
        ]

    def f(x):
        return ((x + b) * x + c) * x + d

    def fp(x):
        return (3.0 * x + 2.0 * b) * x + c

    polished = []
    for r in roots:
        x = r
        for _ in range(3):
            denom = fp(x)
            if denom == 0:
                break
            x = x - f(x) / denom
        # keep genuinely real roots on the real axis
        if r.imag == 0.0:
            x = complex(x.real, 0.0)
        polished.append(x)
    return polished


def _eigvec(a: np.ndarray, lam: complex) -> np.ndarray:
    """Null vector of (a - lam I) via the largest row cross product."""
    m = a.astype(complex) - lam * np.eye(3)
    candidates = [
        np.cross(m[0], m[1]),
        np.cross(m[1], m[2]),
        np.cross(m[0], m[2]),
    ]
    norms = [np.linalg.norm(v) for v in candidates]
    best = int(np.argmax(norms))
    scale = max(np.linalg.norm(m[i]) for i in range(3))
    if norms[best] <= 1e-13 * max(scale * scale, 1.0):
        raise DefectiveMatrix(
            "eigenvector extraction failed: (A - lambda I) has rank < 2"
        )
    v = candidates[best] / norms[best]
    # canonical phase: largest component real positive
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    return v / phase


def eig3(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a real 3x3 matrix.

    Eigenvalues are sorted real-first (reals ascending, then the complex
    pair with positive imaginary part leading). Eigenvectors are returned
    as columns matching that order, each of unit norm.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise ValueError("eig3 expects a 3x3 matrix")
    c2 = np.trace(a)
    c1 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    c0 = np.linalg.det(a)
    roots = _cubic_roots(-c2, c1, -c0)

    reals = sorted([r for r in roots if r.imag == 0.0], key=lambda z: z.real)
    pairs = sorted([r for r in roots if r.imag != 0.0], key=lambda z: -z.imag)
    ordered = reals + pairs

    values = np.array(ordered, dtype=complex)
    vectors = np.column_stack([_eigvec(a, lam) for lam in ordered])
    return values, vectors


def eig2(a) -> np.ndarray:
    """Eigenvalues of a real 2x2 matrix, sorted by descending magnitude."""
    a = np.asarray(a, dtype=float)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        s = np.sqrt(disc)
        vals = np.array([tr / 2.0 + s, tr / 2.0 - s], dtype=complex)
    else:
        s = np.sqrt(-disc)
        vals = np.array([complex(tr / 2.0, s), complex(tr / 2.0, -s)])
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order]
