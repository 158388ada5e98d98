"""Chain Hamiltonians.

Conventions (fixed throughout the package):

* ``H = -sum_k J_k (b_k^dag b_{k+1} + h.c.) + sum_k eps_k n_k + U sum_k n_k (n_k - 1)``,
  with no factor 1/2 in the repulsion term;
* engineered chains use ``J_k = J C_k`` with ``C_k = sqrt(k (N - k)) / 2`` and
  ``eps_k = eps ((N + 1) / 2 - k)``, so that their linear part is
  ``H_l = -J L_x - eps L_z`` and ``exp(-i H t) = exp(i (J L_x + eps L_z) t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .fock import Basis, Capped, check_hermitian, creation_op, ladder_word, number_op

__all__ = [
    "ChainSpec",
    "Displacement",
    "Squeezing",
    "DownConversion",
    "krawtchouk_couplings",
    "linear_potential",
    "magnetic_numbers",
    "build_bose_hubbard",
    "build_linear_hamiltonian",
    "build_angular_momentum",
    "hopping_operator",
    "pair_operator",
    "build_dressed_displacement",
    "build_squeeze_hamiltonians",
    "build_down_conversion",
    "single_mode_dressing",
]


def krawtchouk_couplings(N, J=1.0):
    """``J * sqrt(k (N - k)) / 2`` for ``k = 1..N-1``."""
    if N < 2:
        raise ValueError("a chain needs at least 2 sites")
    k = np.arange(1, N)
    return J * 0.5 * np.sqrt(k * (N - k))


def linear_potential(N, eps=1.0):
    """``eps ((N + 1) / 2 - k)`` for ``k = 1..N``; sums to zero."""
    if N < 2:
        raise ValueError("a chain needs at least 2 sites")
    k = np.arange(1, N + 1)
    return eps * ((N + 1) / 2 - k)


def magnetic_numbers(N):
    """``m = k - (N + 1) / 2`` of each site, i.e. ``-l..l`` with ``l = (N - 1) / 2``."""
    return np.arange(1, N + 1) - (N + 1) / 2


@dataclass(frozen=True)
class ChainSpec:
    """Couplings ``J_k`` (length N-1), on-site energies (length N), repulsion U.

    ``J`` and ``epsilon`` are the global scales of an engineered profile; they
    also set the transfer time ``pi / J``.
    """

    couplings: tuple
    onsite: tuple
    U: float = 0.0
    J: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        couplings = tuple(float(x) for x in np.ravel(self.couplings))
        onsite = tuple(float(x) for x in np.ravel(self.onsite))
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "onsite", onsite)
        if len(onsite) < 2:
            raise ValueError("a chain needs at least 2 sites")
        if len(couplings) != len(onsite) - 1:
            raise ValueError(
                f"{len(onsite)} sites need {len(onsite) - 1} couplings, got {len(couplings)}"
            )
        values = couplings + onsite + (self.U, self.J, self.epsilon)
        if not np.all(np.isfinite(values)):
            raise ValueError("chain parameters must be finite")
        if self.J <= 0:
            raise ValueError("the global hopping scale J must be positive")

    @classmethod
    def engineered(cls, N, J=1.0, epsilon=0.0, U=0.0):
        """Krawtchouk couplings with a linear potential."""
        return cls(
            tuple(krawtchouk_couplings(N, J)),
            tuple(linear_potential(N, epsilon)),
            U=float(U),
            J=float(J),
            epsilon=float(epsilon),
        )

    @property
    def site_count(self):
        return len(self.onsite)

    @property
    def t0(self):
        """Mirror-transfer time ``pi / J``."""
        return np.pi / abs(self.J)

    def is_engineered(self, tol=1e-12):
        N = self.site_count
        return bool(
            np.allclose(self.couplings, krawtchouk_couplings(N, self.J), rtol=0, atol=tol)
            and np.allclose(self.onsite, linear_potential(N, self.epsilon), rtol=0, atol=tol)
        )

    def with_(self, **changes):
        """Copy with changed fields; engineered profiles are re-derived from J/epsilon/N."""
        N = changes.pop("N", self.site_count)
        if self.is_engineered() or N != self.site_count:
            params = dict(J=self.J, epsilon=self.epsilon, U=self.U)
            params.update(changes)
            return ChainSpec.engineered(N, **params)
        params = dict(couplings=self.couplings, onsite=self.onsite, U=self.U, J=self.J,
                      epsilon=self.epsilon)
        params.update(changes)
        return ChainSpec(**params)


@dataclass(frozen=True)
class Displacement:
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))


@dataclass(frozen=True)
class Squeezing:
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "xi", float(self.xi))


@dataclass(frozen=True)
class DownConversion:
    xi0: float

    def __post_init__(self):
        object.__setattr__(self, "xi0", float(self.xi0))


def _require_modes(basis, N, exact=True):
    ok = basis.mode_count == N if exact else basis.mode_count >= N
    if not ok:
        raise ValueError(f"basis has {basis.mode_count} modes, chain has {N} sites")


def _require_capped(basis):
    if not isinstance(basis.sector, Capped):
        raise ValueError("dressed Hamiltonians break number conservation; use a Capped basis")


def hopping_operator(coefficients, basis):
    """``sum_k c_k (b_k^dag b_{k+1} + b_{k+1}^dag b_k)`` over the first len(c)+1 modes."""
    dim = basis.dim
    out = sp.csr_array((dim, dim), dtype=complex)
    for k, c in enumerate(coefficients):
        if c == 0:
            continue
        forward = ladder_word(basis, [(k, +1), (k + 1, -1)])
        out = out + c * (forward + forward.conj().T)
    return out.tocsr()


def pair_operator(coefficients, basis):
    """``sum_k c_k (b_k^dag b_{k+1}^dag + b_{k+1} b_k)``; changes the boson number by 2."""
    dim = basis.dim
    out = sp.csr_array((dim, dim), dtype=complex)
    for k, c in enumerate(coefficients):
        if c == 0:
            continue
        create = ladder_word(basis, [(k, +1), (k + 1, +1)], truncate=True)
        out = out + c * (create + create.conj().T)
    return out.tocsr()


def _onsite(values, basis):
    diag = basis.states[:, : len(values)] @ np.asarray(values, dtype=float)
    return sp.diags_array(diag.astype(complex), format="csr")


def build_linear_hamiltonian(spec: ChainSpec, basis: Basis, *, modes_exact=True):
    """Hopping plus on-site part of the chain Hamiltonian (no repulsion)."""
    _require_modes(basis, spec.site_count, exact=modes_exact)
    H = hopping_operator(-np.asarray(spec.couplings), basis) + _onsite(spec.onsite, basis)
    check_hermitian(H, what="linear Hamiltonian")
    return H


def build_bose_hubbard(spec: ChainSpec, basis: Basis):
    """Full chain Hamiltonian including ``U sum n_k (n_k - 1)``."""
    H = build_linear_hamiltonian(spec, basis)
    if spec.U:
        occ = basis.states.astype(float)
        H = H + sp.diags_array(spec.U * (occ * (occ - 1)).sum(axis=1).astype(complex), format="csr")
    check_hermitian(H, what="Bose-Hubbard Hamiltonian")
    return H.tocsr()


def build_angular_momentum(N, component, basis):
    """Bosonic ``L_x``, ``L_y`` or ``L_z`` of an ``N``-site chain.

    ``L_x = sum C_k (b_k^dag b_{k+1} + h.c.)``,
    ``L_y = i sum C_k (b_k^dag b_{k+1} - h.c.)``,
    ``L_z = sum_k m_k n_k``.
    """
    _require_modes(basis, N, exact=False)
    C = krawtchouk_couplings(N, 1.0)
    if component == "x":
        L = hopping_operator(C, basis)
    elif component == "y":
        dim = basis.dim
        L = sp.csr_array((dim, dim), dtype=complex)
        for k, c in enumerate(C):
            forward = ladder_word(basis, [(k, +1), (k + 1, -1)])
            L = L + 1j * c * (forward - forward.conj().T)
    elif component == "z":
        L = _onsite(magnetic_numbers(N), basis)
    else:
        raise ValueError(f"component must be 'x', 'y' or 'z', not {component!r}")
    check_hermitian(L, what=f"L_{component}")
    return L.tocsr()


def build_dressed_displacement(spec: ChainSpec, beta, basis: Basis):
    """Closed form of ``W H_l W^dag`` with ``W = prod_k exp(beta b_k^dag - beta^* b_k)``.

    ``W b_k W^dag = b_k - beta``, so each hopping bond ``g_k`` (``= -J_k``)
    gains ``g_k {2|beta|^2 - [beta^* (b_k + b_{k+1}) + h.c.]}`` and each
    on-site term ``eps_k`` gains ``eps_k {|beta|^2 - (beta b_k^dag + beta^* b_k)}``.
    """
    _require_modes(basis, spec.site_count)
    _require_capped(basis)
    beta = complex(beta)
    H = build_linear_hamiltonian(spec, basis)
    if beta == 0:
        return H
    dim = basis.dim
    ident = sp.eye_array(dim, dtype=complex, format="csr")
    raise_ = [creation_op(k, basis, basis) for k in range(spec.site_count)]
    lower = [r.conj().T.tocsr() for r in raise_]
    shift = sp.csr_array((dim, dim), dtype=complex)
    for k, J_k in enumerate(spec.couplings):
        g = -J_k
        linear = np.conj(beta) * (lower[k] + lower[k + 1])
        shift = shift + g * (2 * abs(beta) ** 2 * ident - (linear + linear.conj().T))
    for k, eps in enumerate(spec.onsite):
        if eps:
            shift = shift + eps * (abs(beta) ** 2 * ident - (beta * raise_[k] + np.conj(beta) * lower[k]))
    H = (H + shift).tocsr()
    check_hermitian(H, what="displaced Hamiltonian")
    return H


def build_squeeze_hamiltonians(spec: ChainSpec, xi, basis: Basis):
    """Return ``(H_s, H_l')`` for the squeezing-dressed chain.

    ``H_s = sum_k (J_k / J) (b_k^dag b_{k+1}^dag + b_{k+1} b_k)`` (for an
    engineered chain the weights are ``C_k``), and
    ``H_l' = H_l cosh(xi) + H_pair sinh(xi)`` where ``H_pair`` is the pair
    operator carrying the same bond weights as the hopping in ``H_l``
    (``-J H_s``). This equals ``W H_l W^dag`` for
    ``W = prod_k exp[(xi / 4)(b_k^2 - b_k^dag^2)]``, a per-mode squeeze of
    strength ``xi / 2``. On-site energies pick up
    ``eps_k [cosh(xi) n_k + sinh(xi) (b_k^2 + b_k^dag^2) / 2 + sinh(xi / 2)^2]``.
    """
    _require_modes(basis, spec.site_count)
    _require_capped(basis)
    xi = float(xi)
    J_k = np.asarray(spec.couplings)
    H_s = pair_operator(J_k / spec.J, basis)
    check_hermitian(H_s, what="H_s")
    H_l = build_linear_hamiltonian(spec, basis)
    if xi == 0:
        return H_s, H_l
    H = np.cosh(xi) * hopping_operator(-J_k, basis) + np.sinh(xi) * pair_operator(-J_k, basis)
    dim = basis.dim
    for k, eps in enumerate(spec.onsite):
        if eps:
            two = ladder_word(basis, [(k, +1), (k, +1)], truncate=True)
            H = H + eps * (
                np.cosh(xi) * number_op(k, basis)
                + 0.5 * np.sinh(xi) * (two + two.conj().T)
                + np.sinh(xi / 2) ** 2 * sp.eye_array(dim, dtype=complex, format="csr")
            )
    H = H.tocsr()
    check_hermitian(H, what="squeezed Hamiltonian")
    return H_s, H


def build_down_conversion(spec: ChainSpec, xi0, basis: Basis):
    """``H_l + xi0 (c + c^dag) H_s`` with ``c`` the last mode of ``basis``.

    No free term for ``c`` is included.
    """
    N = spec.site_count
    if basis.mode_count != N + 1:
        raise ValueError(f"down-conversion needs {N + 1} modes (chain plus auxiliary), "
                         f"basis has {basis.mode_count}")
    _require_capped(basis)
    H = build_linear_hamiltonian(spec, basis, modes_exact=False)
    if xi0:
        H_s = pair_operator(np.asarray(spec.couplings) / spec.J, basis)
        c_dag = creation_op(N, basis, basis)
        H = H + xi0 * ((c_dag + c_dag.conj().T) @ H_s)
    H = H.tocsr()
    check_hermitian(H, what="down-conversion Hamiltonian")
    return H


def single_mode_dressing(dressing, dim):
    """Dense ``W_k`` on one mode truncated to ``dim`` levels.

    Used to build dressed states (and, in tests, the conjugation oracle).
    """
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    ad = a.conj().T
    if isinstance(dressing, Displacement):
        gen = dressing.beta * ad - np.conj(dressing.beta) * a
    elif isinstance(dressing, Squeezing):
        gen = (dressing.xi / 4) * (a @ a - ad @ ad)
    else:
        raise TypeError(f"no single-mode unitary for {dressing!r}")
    return expm(gen)
