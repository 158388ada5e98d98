"""Shared oracles for the test suite.

The helpers here deliberately avoid the package's own builders: they
assemble operators from Kronecker products of single-mode matrices or from
hand-enumerated occupation lists, so agreement with the library is a real
cross-check rather than a tautology.
"""

import functools
import itertools
import re

import numpy as np
import pytest
from scipy.linalg import expm


def mode_ops(dim):
    """Truncated single-mode ``a`` and ``a^dag`` of ``dim`` levels."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    return a, a.conj().T


def embed_mode(op, site, modes, dim):
    """``1 x .. x op x .. x 1`` with ``op`` on ``site`` (kron order = lexicographic)."""
    out = np.ones((1, 1), dtype=complex)
    for k in range(modes):
        out = np.kron(out, op if k == site else np.eye(dim))
    return out


def kron_chain_hamiltonian(couplings, onsite, dim):
    """Dense ``-sum J_k (a_k^dag a_{k+1} + h.c.) + sum eps_k n_k`` on ``dim**N`` levels."""
    N = len(onsite)
    a, ad = mode_ops(dim)
    n = ad @ a
    H = np.zeros((dim**N, dim**N), dtype=complex)
    for k, J_k in enumerate(couplings):
        hop = embed_mode(ad, k, N, dim) @ embed_mode(a, k + 1, N, dim)
        H -= J_k * (hop + hop.conj().T)
    for k, e in enumerate(onsite):
        H += e * embed_mode(n, k, N, dim)
    return H


def kron_dressing(generator_1mode, N):
    """``prod_k exp(G_k)`` as a Kronecker product of identical single-mode unitaries."""
    W1 = expm(generator_1mode)
    W = np.ones((1, 1), dtype=complex)
    for _ in range(N):
        W = np.kron(W, W1)
    return W


def dressing_generator(kind, param, dim):
    a, ad = mode_ops(dim)
    if kind == "displacement":
        return param * ad - np.conj(param) * a
    # squeeze of strength xi/2, matching the closed-form H_l cosh xi + H_pair sinh xi
    return (param / 4) * (a @ a - ad @ ad)


@functools.lru_cache(maxsize=16)
def conjugation_oracle(couplings, onsite, kind, param, dim):
    """``W H_l W^dag`` with every operator built on ``dim`` levels per mode (cached, read-only)."""
    N = len(onsite)
    W = kron_dressing(dressing_generator(kind, param, dim), N)
    out = W @ kron_chain_hamiltonian(couplings, onsite, dim) @ W.conj().T
    out.setflags(write=False)
    return out


def capped_rows(N, dim, n_max):
    """Positions (kron order over ``dim`` levels) of states with every occupation <= n_max."""
    states = list(itertools.product(range(dim), repeat=N))
    return [i for i, s in enumerate(states) if max(s) <= n_max]


def low_total_rows(N, n_max, top=2):
    """Positions in ``Capped(n_max)`` order of states holding at most ``top`` bosons."""
    states = list(itertools.product(range(n_max + 1), repeat=N))
    return [i for i, s in enumerate(states) if sum(s) <= top]


def brute_force_two_boson(N, J, U, t):
    """``exp(-i H t)`` on the two-boson sector from an explicit pair list.

    States are sorted site pairs ``(i <= j)``; returns ``(U_t, states)``.
    """
    C = [J * 0.5 * np.sqrt(k * (N - k)) for k in range(1, N)]
    states = list(itertools.combinations_with_replacement(range(N), 2))
    index = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)), dtype=complex)
    for s in states:
        occ = [s.count(x) for x in range(N)]
        H[index[s], index[s]] += U * sum(o * (o - 1) for o in occ)
        for k in range(N - 1):
            for dst, src in ((k, k + 1), (k + 1, k)):
                if occ[src] == 0:
                    continue
                new = list(occ)
                amp = np.sqrt(new[src])
                new[src] -= 1
                amp *= np.sqrt(new[dst] + 1)
                new[dst] += 1
                t_state = tuple(sorted(x for x in range(N) for _ in range(new[x])))
                H[index[t_state], index[s]] += -C[k] * amp
    return expm(-1j * H * t), states


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


# ----------------------------------------------------------------------------
# one pass/fail line per acceptance criterion in the terminal summary

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[n] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        verdict = "PASS" if _ACCEPTANCE[n] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}")
