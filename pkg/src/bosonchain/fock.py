"""Fock bases and second-quantized operators.

States are occupation vectors over ``M`` modes, stored as rows of an integer
array in ascending lexicographic order. Three sector rules are supported:

* :class:`FixedTotal` -- exactly ``n`` bosons (number-conserving dynamics);
* :class:`MaxTotal` -- at most ``n`` bosons, i.e. the direct sum of the
  fixed-total sectors ``0..n``;
* :class:`Capped` -- every mode holds at most ``n_max`` bosons (needed once
  number conservation is broken by dressing).

Operators are returned as ``scipy.sparse.csr_array`` of dtype complex128.
Ladder operators acting in a capped basis drop any amplitude that would
exceed the cap (projector truncation).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import BasisSizeError, SectorError
from .functions import MonomialFunction

__all__ = [
    "FixedTotal",
    "MaxTotal",
    "Capped",
    "Basis",
    "DEFAULT_MAX_DIM",
    "enumerate_basis",
    "creation_op",
    "annihilation_op",
    "number_op",
    "ladder_word",
    "apply_polynomial",
    "check_hermitian",
]

DEFAULT_MAX_DIM = 200_000


@dataclass(frozen=True)
class FixedTotal:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("total boson number must be >= 0")


@dataclass(frozen=True)
class MaxTotal:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("maximum total boson number must be >= 0")


@dataclass(frozen=True)
class Capped:
    """Per-mode cap ``n_max``; ``last_max`` optionally caps the last mode
    separately (the auxiliary mode of the down-conversion model)."""

    n_max: int
    last_max: int | None = None

    def __post_init__(self):
        if self.n_max < 0 or (self.last_max is not None and self.last_max < 0):
            raise ValueError("occupation caps must be >= 0")

    def caps(self, mode_count):
        caps = [self.n_max] * mode_count
        if self.last_max is not None:
            caps[-1] = self.last_max
        return caps


def sector_size(mode_count, sector):
    if isinstance(sector, FixedTotal):
        return comb(mode_count + sector.n - 1, sector.n)
    if isinstance(sector, MaxTotal):
        return comb(mode_count + sector.n, sector.n)
    if isinstance(sector, Capped):
        return int(np.prod([c + 1 for c in sector.caps(mode_count)], dtype=object))
    raise TypeError(f"unknown sector rule {sector!r}")


def _compositions(modes, total, exact):
    """Occupation tuples in ascending lexicographic order."""
    if modes == 1:
        if exact:
            yield (total,)
        else:
            yield from ((k,) for k in range(total + 1))
        return
    for first in range(total + 1):
        for rest in _compositions(modes - 1, total - first, exact):
            yield (first,) + rest


class Basis:
    """Ordered, duplicate-free set of Fock states for one sector rule.

    Two bases compare equal when mode count and sector agree, since the
    enumeration is deterministic.
    """

    def __init__(self, mode_count, sector, states):
        self.mode_count = mode_count
        self.sector = sector
        states = np.asarray(states, dtype=np.int64).reshape(-1, mode_count)
        states.setflags(write=False)
        self.states = states
        self.totals = states.sum(axis=1)
        self.totals.setflags(write=False)
        if isinstance(sector, Capped):
            self.mode_caps = np.array(sector.caps(mode_count), dtype=np.int64)
        else:
            self.mode_caps = np.full(mode_count, sector.n, dtype=np.int64)
        # radix > largest occupation + 1, so raised states still encode uniquely
        self._radix = int(self.mode_caps.max()) + 2
        if self._radix ** mode_count < 2**62:
            self._weights = self._radix ** np.arange(mode_count - 1, -1, -1, dtype=np.int64)
            self._keys = states @ self._weights
            self._lookup = None
        else:
            self._weights = None
            self._keys = None
            self._lookup = {tuple(s): i for i, s in enumerate(states.tolist())}

    def __len__(self):
        return len(self.states)

    @property
    def dim(self):
        return len(self.states)

    def __eq__(self, other):
        return (
            isinstance(other, Basis)
            and self.mode_count == other.mode_count
            and self.sector == other.sector
        )

    def __hash__(self):
        return hash((self.mode_count, self.sector))

    def __repr__(self):
        return f"Basis(mode_count={self.mode_count}, sector={self.sector}, dim={self.dim})"

    @property
    def number_bounded(self):
        return not isinstance(self.sector, Capped)

    def lookup(self, occupations):
        """Positions of the given occupation rows; -1 where absent."""
        occ = np.asarray(occupations, dtype=np.int64).reshape(-1, self.mode_count)
        if self._keys is None:
            return np.array([self._lookup.get(tuple(s), -1) for s in occ.tolist()], dtype=np.int64)
        valid = np.all((occ >= 0) & (occ < self._radix), axis=1)
        keys = occ @ self._weights
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1)
        hit = valid & (self._keys[pos] == keys)
        return np.where(hit, pos, -1)

    def index(self, occupation):
        """Position of a single state; raises ``KeyError`` when absent."""
        i = int(self.lookup([occupation])[0])
        if i < 0:
            raise KeyError(f"{tuple(occupation)} is not in {self!r}")
        return i

    def vector(self, occupation, dtype=complex):
        """Unit vector on the given Fock state."""
        v = np.zeros(self.dim, dtype=dtype)
        v[self.index(occupation)] = 1
        return v

    def vacuum(self):
        return self.vector([0] * self.mode_count)

    def single_particle_indices(self, sites=None):
        """Positions of ``b_k^dag |0>`` for ``k`` in ``sites`` (0-based, default all)."""
        sites = range(self.mode_count) if sites is None else sites
        rows = np.zeros((len(sites), self.mode_count), dtype=np.int64)
        for r, k in enumerate(sites):
            rows[r, k] = 1
        idx = self.lookup(rows)
        if np.any(idx < 0):
            raise SectorError(f"{self!r} has no single-boson states")
        return idx

    def shifted(self, delta):
        """The fixed-total sector reached by adding ``delta`` bosons."""
        if not isinstance(self.sector, FixedTotal):
            return self
        return enumerate_basis(self.mode_count, FixedTotal(self.sector.n + delta))

    def embed(self, vector, source):
        """Copy amplitudes of ``vector`` (expressed in ``source``) into this basis.

        Raises :class:`SectorError` when a non-zero amplitude has no home.
        """
        vector = np.asarray(vector)
        out = np.zeros(self.dim, dtype=np.result_type(vector, complex))
        idx = self.lookup(source.states)
        lost = (idx < 0) & (vector != 0)
        if np.any(lost):
            raise SectorError(f"state components outside {self!r}")
        keep = idx >= 0
        out[idx[keep]] = vector[keep]
        return out


@functools.lru_cache(maxsize=256)
def enumerate_basis(mode_count, sector, max_dim=DEFAULT_MAX_DIM) -> Basis:
    """Enumerate the Fock states of ``mode_count`` modes in ``sector``.

    Raises
    ------
    BasisSizeError
        If the sector holds more than ``max_dim`` states.
    """
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    dim = sector_size(mode_count, sector)
    if dim > max_dim:
        raise BasisSizeError(dim, max_dim)
    if isinstance(sector, FixedTotal):
        states = list(_compositions(mode_count, sector.n, exact=True))
    elif isinstance(sector, MaxTotal):
        states = list(_compositions(mode_count, sector.n, exact=False))
    else:
        states = list(itertools.product(*(range(c + 1) for c in sector.caps(mode_count))))
    return Basis(mode_count, sector, states)


def ladder_word(basis, word, basis_out=None, *, truncate=None):
    """Matrix of a product of ladder operators.

    ``word`` is a sequence of ``(site, +1)`` for ``b_site^dag`` and
    ``(site, -1)`` for ``b_site``, written left to right as in the operator
    product (so the rightmost factor acts first). Intermediate occupations
    above a per-mode cap are dropped.

    A target state missing from ``basis_out`` is dropped when ``truncate``
    is true, and raises :class:`SectorError` otherwise. By default capped
    output bases truncate and number-bounded ones do not.
    """
    basis_out = basis if basis_out is None else basis_out
    if truncate is None:
        truncate = not basis_out.number_bounded
    occ = basis.states.copy()
    amp = np.ones(basis.dim)
    caps = basis_out.mode_caps if isinstance(basis_out.sector, Capped) else None
    for site, step in reversed(tuple(word)):
        if not 0 <= site < basis.mode_count:
            raise IndexError(f"site {site} out of range for {basis.mode_count} modes")
        if step > 0:
            amp = amp * np.sqrt(occ[:, site] + 1)
            occ[:, site] += 1
            if caps is not None:
                amp = np.where(occ[:, site] > caps[site], 0.0, amp)
        else:
            amp = amp * np.sqrt(np.maximum(occ[:, site], 0))
            occ[:, site] -= 1
    alive = amp != 0
    cols = np.nonzero(alive)[0]
    rows = basis_out.lookup(occ[alive])
    missing = rows < 0
    if np.any(missing) and not truncate:
        raise SectorError(f"operator word {tuple(word)} leaves {basis_out!r}")
    keep = ~missing
    return sp.csr_array(
        (amp[alive][keep].astype(complex), (rows[keep], cols[keep])),
        shape=(basis_out.dim, basis.dim),
    )


def creation_op(site, basis, basis_out=None):
    """``b_site^dag`` (0-based site).

    For a :class:`FixedTotal` basis the result maps into the sector with one
    more boson unless ``basis_out`` says otherwise; for other bases it acts
    within ``basis``, dropping amplitude pushed past the bound.
    """
    if basis_out is None:
        basis_out = basis.shifted(+1)
    return ladder_word(basis, [(site, +1)], basis_out, truncate=True)


def annihilation_op(site, basis, basis_out=None):
    """``b_site``, built as the conjugate transpose of :func:`creation_op`."""
    if basis_out is None:
        if isinstance(basis.sector, FixedTotal):
            if basis.sector.n == 0:
                raise SectorError("cannot lower the vacuum sector")
            basis_out = basis.shifted(-1)
        else:
            basis_out = basis
    return creation_op(site, basis_out, basis).conj().T.tocsr()


def number_op(site, basis):
    """Diagonal ``n_site = b_site^dag b_site``."""
    if not 0 <= site < basis.mode_count:
        raise IndexError(f"site {site} out of range for {basis.mode_count} modes")
    return sp.diags_array(basis.states[:, site].astype(complex), format="csr")


def check_hermitian(matrix, tol=1e-12, what="operator"):
    """Raise ``ValueError`` if ``max|A - A^dag| >= tol``."""
    diff = matrix - matrix.conj().T
    if sp.issparse(diff):
        err = float(abs(diff).max()) if diff.nnz else 0.0
    else:
        err = float(np.max(np.abs(diff))) if diff.size else 0.0
    if err >= tol:
        raise ValueError(f"{what} is not Hermitian (max deviation {err:.3g})")
    return err


def _raise_sector(vec, site, basis):
    """Apply ``b_site^dag``; return the new vector and its basis."""
    out_basis = basis.shifted(+1)
    return creation_op(site, basis, out_basis) @ vec, out_basis


def apply_polynomial(f: MonomialFunction, state, basis, basis_out=None):
    """Return ``f(b_1^dag - s, ..., b_n^dag - s) |state>`` (not normalized).

    Variables ``x_k`` map to mode ``k - 1``; ``s`` is ``f.shift``.

    * Capped bases: amplitude pushed above the cap is dropped; compare norms
      to measure the loss.
    * MaxTotal bases: raises :class:`SectorError` when a term would exceed
      the total bound (degree overflow).
    * FixedTotal bases: every term must have the same degree ``d`` and the
      result lives in ``FixedTotal(n + d)``; a non-zero shift is rejected.
    """
    state = np.asarray(state, dtype=complex)
    if f.n_vars > basis.mode_count:
        raise ValueError(f"function uses {f.n_vars} variables but basis has {basis.mode_count} modes")
    fixed = isinstance(basis.sector, FixedTotal)

    if fixed:
        if f.shift != 0:
            raise SectorError("shifted arguments mix boson-number sectors")
        degrees = {sum(e) for _, e in f.terms}
        if len(degrees) != 1:
            raise SectorError("terms of different degree map to different sectors")
        target = basis.shifted(degrees.pop())
        if basis_out is not None and basis_out != target:
            raise SectorError(f"result lives in {target!r}, not {basis_out!r}")
        result = np.zeros(target.dim, dtype=complex)
        for coeff, exps in f.terms:
            vec, cur = state, basis
            for k, e in enumerate(exps):
                for _ in range(e):
                    vec, cur = _raise_sector(vec, k, cur)
            result += coeff * vec
        return result

    if basis_out is not None and basis_out != basis:
        raise ValueError("non fixed-total bases evaluate in place")
    if isinstance(basis.sector, MaxTotal):
        # ignore round-off left in higher sectors by dense evolution
        mags = np.abs(state)
        support = mags > 1e-13 * mags.max() if mags.size else mags > 0
        top = int(basis.totals[support].max()) if np.any(support) else 0
        if top + f.degree > basis.sector.n:
            raise SectorError(
                f"degree {f.degree} on a state with {top} bosons overflows {basis.sector}"
            )
    raisers = [creation_op(k, basis, basis) - f.shift * sp.eye_array(basis.dim, format="csr")
               if f.shift != 0 else creation_op(k, basis, basis)
               for k in range(f.n_vars)]
    result = np.zeros(basis.dim, dtype=complex)
    for coeff, exps in f.terms:
        vec = state
        for k, e in enumerate(exps):
            for _ in range(e):
                vec = raisers[k] @ vec
        result += coeff * vec
    return result
