"""Time evolution ``U(t) = exp(-i H t)`` and the Wigner d-matrix oracle."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .fock import FixedTotal, enumerate_basis
from .model import ChainSpec, build_bose_hubbard, magnetic_numbers

__all__ = [
    "Propagator",
    "KrylovPropagator",
    "make_propagator",
    "evolve_state",
    "heisenberg_conjugate",
    "wigner_small_d",
    "wigner_small_d_matrix",
    "analytic_single_particle_propagator",
    "single_particle_oracle_error",
]

DENSE_LIMIT = 4000


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A)


class Propagator:
    """Dense eigendecomposition ``H = V diag(E) V^dag`` cached for fast evolution.

    The constructor checks the reconstruction and unitarity of ``V`` and
    raises ``ArithmeticError`` if either is off by more than 1e-10.
    """

    def __init__(self, hamiltonian, check=True):
        H = _dense(hamiltonian).astype(complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("Hamiltonian must be square")
        self.hamiltonian = H
        self.energies, self.vectors = np.linalg.eigh(H)
        if check:
            V, E = self.vectors, self.energies
            scale = max(float(np.max(np.abs(H))), 1.0) if H.size else 1.0
            recon = np.max(np.abs((V * E) @ V.conj().T - H)) if H.size else 0.0
            unit = np.max(np.abs(V.conj().T @ V - np.eye(len(E)))) if H.size else 0.0
            if recon > 1e-10 * scale or unit > 1e-10:
                raise ArithmeticError(
                    f"eigendecomposition check failed (reconstruction {recon:.2e}, unitarity {unit:.2e})"
                )

    @property
    def dim(self):
        return len(self.energies)

    def unitary(self, t):
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def evolve(self, psi, t):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[0] != self.dim:
            raise ValueError(f"state has dimension {psi.shape[0]}, propagator {self.dim}")
        coeffs = self.vectors.conj().T @ psi
        return self.vectors @ (np.exp(-1j * self.energies * t) * coeffs)

    def heisenberg(self, A, t):
        """``U(t)^dag A U(t)`` as a dense matrix."""
        A = _dense(A)
        if A.shape != (self.dim, self.dim):
            raise ValueError(f"operator shape {A.shape} does not match propagator dimension {self.dim}")
        U = self.unitary(t)
        return U.conj().T @ A @ U


class KrylovPropagator:
    """Lanczos short-time stepping for large sparse Hamiltonians.

    Each step builds a Krylov basis of at most ``krylov_dim`` vectors and
    picks the longest sub-step whose a-posteriori error estimate stays below
    ``tol * dt / |t|``, so the accumulated error is bounded by about ``tol``.
    """

    def __init__(self, hamiltonian, krylov_dim=30, tol=1e-10):
        self.hamiltonian = hamiltonian.tocsr() if sp.issparse(hamiltonian) else np.asarray(hamiltonian)
        self.krylov_dim = krylov_dim
        self.tol = tol
        self.steps_taken = 0

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def _lanczos(self, v):
        n = len(v)
        m_max = min(self.krylov_dim, n)
        V = np.zeros((m_max, n), dtype=complex)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        V[0] = v
        m = m_max
        for j in range(m_max):
            w = self.hamiltonian @ V[j]
            alpha[j] = np.vdot(V[j], w).real
            w = w - alpha[j] * V[j]
            if j:
                w = w - beta[j - 1] * V[j - 1]
            # full reorthogonalization keeps the small basis numerically orthonormal
            w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                m = j + 1
                beta[j] = 0.0
                break
            if j + 1 < m_max:
                V[j + 1] = w / beta[j]
        return V[:m], alpha[:m], beta[:m]

    def evolve(self, psi, t):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[0] != self.dim:
            raise ValueError(f"state has dimension {psi.shape[0]}, propagator {self.dim}")
        norm = np.linalg.norm(psi)
        if norm == 0 or t == 0:
            return psi.copy()
        remaining = float(t)
        total = abs(float(t))
        state = psi / norm
        while abs(remaining) > 1e-15 * total:
            V, alpha, beta = self._lanczos(state)
            m = len(alpha)
            if m == 1:
                theta, S = alpha[:1], np.ones((1, 1))
            else:
                theta, S = eigh_tridiagonal(alpha, beta[: m - 1])
            dt = remaining
            while True:
                small = S @ (np.exp(-1j * theta * dt) * S[0].conj())
                err = beta[m - 1] * abs(small[-1])
                if err <= self.tol * abs(dt) / total or abs(dt) < 1e-12 * total:
                    break
                dt /= 2
            state = V.T @ small
            state /= np.linalg.norm(state)
            remaining -= dt
            self.steps_taken += 1
        return norm * state


def make_propagator(hamiltonian, dense_limit=DENSE_LIMIT, **krylov_options):
    """Dense propagator up to ``dense_limit`` states, Lanczos above."""
    if hamiltonian.shape[0] <= dense_limit:
        return Propagator(hamiltonian)
    return KrylovPropagator(hamiltonian, **krylov_options)


def evolve_state(prop, psi, t):
    """``exp(-i H t) psi``."""
    return prop.evolve(psi, t)


def heisenberg_conjugate(prop, A, t):
    """``U(t)^dag A U(t)`` with ``U(t) = exp(-i H t)``."""
    return prop.heisenberg(A, t)


def _jacobi(n, a, b, x):
    """Jacobi polynomial ``P_n^{(a,b)}(x)`` by the standard three-term recurrence."""
    if n == 0:
        return 1.0
    p_prev = 1.0
    p = (a + 1) + (a + b + 2) * (x - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c3 = 2 * (k + a - 1) * (k + b - 1) * s
        p_prev, p = p, (c2 * p - c3 * p_prev) / c1
    return p


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def wigner_small_d(two_l, two_mp, two_m, angle):
    """``d^l_{m'm}(angle) = <l m'| exp(-i angle L_y) |l m>``.

    Quantum numbers are passed doubled (``2l``, ``2m'``, ``2m``) so
    half-integers stay exact. Uses the Jacobi-polynomial form with
    log-binomial prefactors, which stays finite for large ``l``.

    >>> round(wigner_small_d(1, 1, 1, 0.7), 12) == round(math.cos(0.35), 12)
    True
    """
    two_l, two_mp, two_m = int(two_l), int(two_mp), int(two_m)
    if two_l < 0 or abs(two_mp) > two_l or abs(two_m) > two_l:
        raise ValueError(f"invalid quantum numbers 2l={two_l}, 2m'={two_mp}, 2m={two_m}")
    if (two_l - two_mp) % 2 or (two_l - two_m) % 2:
        raise ValueError("l - m and l - m' must be integers")
    jpm, jmm = (two_l + two_m) // 2, (two_l - two_m) // 2
    jpmp, jmmp = (two_l + two_mp) // 2, (two_l - two_mp) // 2
    diff = (two_mp - two_m) // 2  # m' - m
    k = min(jpm, jmm, jpmp, jmmp)
    if k == jpm:
        a, lam = diff, diff
    elif k == jmm:
        a, lam = -diff, 0
    elif k == jpmp:
        a, lam = -diff, 0
    else:
        a, lam = diff, diff
    b = two_l - 2 * k - a
    log_pref = 0.5 * (_log_binom(two_l - k, k + a) - _log_binom(k + b, b))
    half = angle / 2
    s, c = math.sin(half), math.cos(half)
    value = math.exp(log_pref) * _jacobi(k, a, b, math.cos(angle))
    value *= (s**a if a else 1.0) * (c**b if b else 1.0)
    return -value if lam % 2 else value


def wigner_small_d_matrix(two_l, angle):
    """Full ``(2l+1) x (2l+1)`` d-matrix, rows ``m'`` and columns ``m`` ascending from ``-l``."""
    ms = range(-two_l, two_l + 1, 2)
    return np.array([[wigner_small_d(two_l, mp, m, angle) for m in ms] for mp in ms])


def analytic_single_particle_propagator(N, J, t):
    """Closed-form single-boson rotation matrix of an engineered chain (``eps = 0``).

    Entry ``(k', k)`` is ``exp(i pi/2 (m' - m)) d^l_{m'm}(J t)`` with
    ``l = (N-1)/2`` and ``m = k - (N+1)/2``, in site order. This is the
    coefficient matrix of ``U(t)^dag b_k^dag U(t) = sum_k' D[k', k] b_k'^dag``,
    i.e. the single-boson block of ``U(t)^dag``; the Schroedinger propagator
    is its conjugate transpose.
    """
    d = wigner_small_d_matrix(N - 1, J * t)
    m = magnetic_numbers(N)
    phase = np.exp(1j * np.pi / 2 * (m[:, None] - m[None, :]))
    return phase * d


def single_particle_oracle_error(N, J, times):
    """Max entrywise gap between the d-matrix form and a dense eigensolve."""
    spec = ChainSpec.engineered(N, J=J)
    basis = enumerate_basis(N, FixedTotal(1))
    order = basis.single_particle_indices()
    prop = Propagator(build_bose_hubbard(spec, basis))
    worst = 0.0
    for t in times:
        U = prop.unitary(t)[np.ix_(order, order)]
        D = analytic_single_particle_propagator(N, J, t)
        worst = max(worst, float(np.max(np.abs(D - U.conj().T))))
    return worst
