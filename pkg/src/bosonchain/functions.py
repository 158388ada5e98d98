"""Polynomial functions of creation operators.

A :class:`MonomialFunction` stores ``f(x_1, ..., x_n)`` as a list of
``(coefficient, exponents)`` pairs. Acting with ``f(b_1^dag, ..., b_n^dag)``
on a state is the job of :func:`bosonchain.fock.apply_polynomial`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

__all__ = ["MonomialFunction", "parse_function"]


@dataclass(frozen=True)
class MonomialFunction:
    """Sum of monomials ``c * x_1^e_1 * ... * x_n^e_n``.

    Parameters
    ----------
    terms : tuple of (complex, tuple of int)
        Coefficient and exponent vector of each monomial. Exponent vectors
        are padded to a common length ``n`` (the processor size).
    shift : complex
        When non-zero every variable stands for ``b_k^dag - shift`` instead
        of ``b_k^dag``. Used for the displaced arguments of dressed states.
    """

    terms: tuple
    shift: complex = 0j

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a function needs at least one term")
        n = max(len(e) for _, e in self.terms)
        n = max(n, 1)
        normalized = []
        seen = set()
        for coeff, exps in self.terms:
            exps = tuple(int(e) for e in exps) + (0,) * (n - len(exps))
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if exps in seen:
                raise ValueError(f"duplicate exponent vector {exps}")
            seen.add(exps)
            normalized.append((complex(coeff), exps))
        object.__setattr__(self, "terms", tuple(normalized))
        object.__setattr__(self, "shift", complex(self.shift))

    @classmethod
    def from_mapping(cls, mapping: Mapping, shift=0j) -> "MonomialFunction":
        """Build from ``{exponent_tuple: coefficient}``."""
        return cls(tuple((c, tuple(e)) for e, c in mapping.items()), shift)

    @classmethod
    def monomial(cls, site: int, power: int = 1, coeff=1.0) -> "MonomialFunction":
        """``coeff * x_site^power`` with 1-based ``site``."""
        exps = [0] * site
        exps[site - 1] = power
        return cls(((coeff, tuple(exps)),))

    @property
    def n_vars(self) -> int:
        return len(self.terms[0][1])

    @property
    def degree(self) -> int:
        return max(sum(e) for _, e in self.terms)

    @property
    def min_degree(self) -> int:
        return min(sum(e) for _, e in self.terms)

    @property
    def support(self) -> tuple:
        """1-based sites that appear with a non-zero exponent."""
        used = set()
        for _, exps in self.terms:
            used.update(k + 1 for k, e in enumerate(exps) if e)
        return tuple(sorted(used))

    def padded(self, n: int) -> "MonomialFunction":
        if n < self.n_vars:
            raise ValueError(f"cannot shrink a {self.n_vars}-variable function to {n}")
        return MonomialFunction(
            tuple((c, e + (0,) * (n - len(e))) for c, e in self.terms), self.shift
        )

    def __str__(self):
        parts = []
        for c, exps in self.terms:
            factors = [f"x{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(exps) if e]
            parts.append("*".join([f"({c.real:g}{c.imag:+g}j)"] + factors))
        return " + ".join(parts)


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")
_PAIR = re.compile(r"^\[\s*(" + _NUMBER + r")\s*,\s*(" + _NUMBER + r")\s*\]$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _coefficient(token: str, params: Mapping) -> complex:
    m = _PAIR.match(token)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    if re.fullmatch(_NUMBER, token):
        return complex(float(token))
    if _NAME.match(token) and not _FACTOR.match(token):
        if token not in params:
            raise ValueError(f"unknown coefficient name {token!r}")
        value = params[token]
        if isinstance(value, (list, tuple)):
            re_, im = value
            return complex(float(re_), float(im))
        return complex(value)
    raise ValueError(f"cannot read coefficient {token!r}")


def _split_terms(expr: str):
    # '+' inside [re,im] brackets or exponents like 1e+3 must not split
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(expr):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "+" and depth == 0 and i > start:
            if expr[i - 1] in "eE" and i >= 2 and (expr[i - 2].isdigit() or expr[i - 2] == "."):
                continue
            terms.append(expr[start:i])
            start = i + 1
    terms.append(expr[start:])
    return [t.strip() for t in terms]


def parse_function(expr: str, params: Mapping | None = None, shift=0j) -> MonomialFunction:
    """Parse the tiny grammar used by configs.

    Terms are joined by ``+``; each term is an optional coefficient followed
    by ``*``-separated factors ``x<i>`` or ``x<i>^<p>``. Coefficients are
    numbers, names looked up in ``params``, or ``[re,im]`` pairs. Repeated
    exponent vectors are summed.

    >>> f = parse_function("a*x1^2+b*x2^2", {"a": 0.6, "b": 0.8})
    >>> [(c.real, e) for c, e in f.terms]
    [(0.6, (2, 0)), (0.8, (0, 2))]
    """
    params = params or {}
    text = expr.replace(" ", "")
    if not text:
        raise ValueError("empty function expression")
    collected: dict = {}
    for term in _split_terms(text):
        if not term:
            raise ValueError(f"empty term in {expr!r}")
        coeff = 1.0 + 0j
        powers: dict = {}
        tokens = term.split("*")
        for token in tokens:
            if not token:
                raise ValueError(f"dangling '*' in {term!r}")
            m = _FACTOR.match(token)
            if m:
                site = int(m.group(1))
                if site < 1:
                    raise ValueError("site indices start at 1")
                powers[site] = powers.get(site, 0) + int(m.group(2) or 1)
            else:
                coeff *= _coefficient(token, params)
        n = max(powers, default=0)
        exps = tuple(powers.get(k, 0) for k in range(1, n + 1))
        collected[exps] = collected.get(exps, 0) + coeff
    n = max((len(e) for e in collected), default=1) or 1
    padded: dict = {}
    for e, c in collected.items():
        key = e + (0,) * (n - len(e))
        padded[key] = padded.get(key, 0) + c
    return MonomialFunction.from_mapping(padded, shift=shift)


def function_from_config(spec) -> MonomialFunction:
    """Accept either a bare expression string or ``{"expr", "params"}``."""
    if isinstance(spec, str):
        return parse_function(spec)
    shift = spec.get("shift", 0)
    if isinstance(shift, list):
        shift = complex(*shift)
    return parse_function(spec["expr"], spec.get("params"), shift=shift)

