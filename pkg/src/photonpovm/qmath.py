"""Dense complex linear algebra for small (2-64 dimensional) operators.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` dtype.
Everything here is a pure function; inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cossin

from .exceptions import NotHermitian, NotPsd, NotUnitary

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
PSD_CLAMP = 1e-10
PSD_FAIL = 1e-8


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.max(np.abs(h - dagger(h)), initial=0.0) <= tol


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    out = np.zeros((n, m), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible component is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v.copy()
    lead = v[idx[0]]
    return v * (abs(lead) / lead)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """True when ``a = exp(i chi) b`` for some real ``chi``, entrywise within ``atol``."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    return phase_distance(a, b) <= atol


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over chi of max |a - exp(i chi) b|, using the optimal overlap phase."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.max(np.abs(a - ph * b), initial=0.0))


@dataclass(frozen=True)
class EighResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        w = self.eigenvectors
        return (w * self.eigenvalues) @ dagger(w)


def _lex_key(v: np.ndarray) -> tuple:
    return tuple(x for z in np.round(v, 12) for x in (z.real, z.imag))


def eigh(h: np.ndarray) -> EighResult:
    """Hermitian eigendecomposition with a deterministic output convention.

    Eigenvalues are ascending. Each eigenvector is phase-fixed (first
    nonzero component real positive); eigenvalues that agree within the
    Hermiticity tolerance are ordered by the lexicographic order of their
    phase-fixed vectors.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitian("matrix is not Hermitian within %g" % HERMITIAN_TOL)
    h = 0.5 * (h + dagger(h))
    lam, w = np.linalg.eigh(h)
    vecs = [fix_phase(w[:, k]) for k in range(len(lam))]
    order = list(range(len(lam)))
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and lam[j] - lam[i] <= HERMITIAN_TOL:
            j += 1
        order[i:j] = sorted(order[i:j], key=lambda k: _lex_key(vecs[k]))
        i = j
    lam = lam[order]
    w = np.stack([vecs[k] for k in order], axis=1)
    return EighResult(lam, w)


def _psd_spectrum(p: np.ndarray) -> EighResult:
    res = eigh(p)
    if res.eigenvalues.size and res.eigenvalues[0] < -PSD_FAIL:
        raise NotPsd("eigenvalue %.3g below -%g" % (res.eigenvalues[0], PSD_FAIL))
    return res


def sqrt_psd(p: np.ndarray) -> np.ndarray:
    """Hermitian positive square root; tiny negative eigenvalues are clamped to 0."""
    res = _psd_spectrum(p)
    lam = np.clip(res.eigenvalues, 0.0, None)
    w = res.eigenvectors
    out = (w * np.sqrt(lam)) @ dagger(w)
    return 0.5 * (out + dagger(out))


def pinv_psd(p: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a PSD matrix; eigenvalues below ``tol`` count as 0."""
    res = eigh(p)
    lam = res.eigenvalues
    inv = np.where(lam >= tol, 1.0 / np.where(lam >= tol, lam, 1.0), 0.0)
    w = res.eigenvectors
    out = (w * inv) @ dagger(w)
    return 0.5 * (out + dagger(out))


def support_projector(p: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    res = eigh(p)
    w = res.eigenvectors[:, res.eigenvalues >= tol]
    return w @ dagger(w)


def polar_unitary(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Unitary factor ``W`` of the polar decomposition ``M = W sqrt(M^dag M)``.

    On the kernel of ``M`` the factor is completed by the isometry from
    ker(M) onto range(M)^perp that is closest to the identity, so that
    ``M = 0`` gives ``W = I`` and PSD inputs give ``W = I``.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("polar_unitary expects a square matrix")
    u, s, vh = np.linalg.svd(m)
    v = dagger(vh)
    r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    w = u[:, :r] @ dagger(v[:, :r])
    if r < n:
        uk, vk = u[:, r:], v[:, r:]
        a, _, bh = np.linalg.svd(dagger(uk) @ vk)
        q = a @ bh
        w = w + uk @ q @ dagger(vk)
    return w


@dataclass(frozen=True)
class CsdResult:
    l1: np.ndarray
    l2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    a1: float
    a2: float

    def middle(self) -> np.ndarray:
        c = np.diag(np.cos([self.a1, self.a2]))
        s = np.diag(np.sin([self.a1, self.a2]))
        return np.block([[c, s], [-s, c]]).astype(complex)

    def reconstruct(self) -> np.ndarray:
        return (block_diag(self.l1, self.l2) @ self.middle()
                @ dagger(block_diag(self.r1, self.r2)))


def csd_2x2(w: np.ndarray) -> CsdResult:
    """Cosine-sine decomposition of a 4x4 unitary in 2x2 blocks.

    ``W = diag(L1, L2) [[C, S], [-S, C]] diag(R1, R2)^dag`` with
    ``C = diag(cos a1, cos a2)``, ``S = diag(sin a1, sin a2)``, angles in
    [0, pi/2].
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (4, 4) or not is_unitary(w):
        raise NotUnitary("csd_2x2 needs a 4x4 unitary")
    i2 = np.eye(2, dtype=complex)
    off = max(np.max(np.abs(w[:2, 2:])), np.max(np.abs(w[2:, :2])))
    diag_blocks = max(np.max(np.abs(w[:2, :2])), np.max(np.abs(w[2:, 2:])))
    # Block-diagonal and block-antidiagonal inputs: the free factors are I.
    if off <= 1e-14:
        return CsdResult(w[:2, :2].copy(), w[2:, 2:].copy(), i2, i2.copy(), 0.0, 0.0)
    if diag_blocks <= 1e-14:
        return CsdResult(w[:2, 2:].copy(), -w[2:, :2], i2, i2.copy(), np.pi / 2, np.pi / 2)
    (u1, u2), theta, (v1h, v2h) = cossin(w, p=2, q=2, swap_sign=True, separate=True)
    theta = np.clip(np.asarray(theta, dtype=float), 0.0, np.pi / 2)
    return CsdResult(u1, u2, dagger(v1h), dagger(v2h), float(theta[0]), float(theta[1]))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_psd(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return g @ dagger(g)
