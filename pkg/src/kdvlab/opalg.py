"""Noncommutative operator words in {D, B} with B_xx = 0.

A word like "DBB" is read left to right as an operator composition (leftmost
acts last): D is d/dx and B is multiplication by a function B(x, t) whose
second derivative vanishes.  Pushing every D to the right with the commutation
[D, f] = f_x puts any word into normal form, a sum of symbols

    B^a * B_x^b * D^j

with exact rational coefficients; since B_xx = 0 no higher derivative of B
can appear.  For a word of class (m, l) = (#D, #B) every symbol in its
expansion satisfies a + b = l and b + j = m.

class_sum(m, l) is the sum over all binomial(m+l, l) words of that class; the
reversal and class-leading checks compare the two highest D-strata of these
expansions against their closed forms:

    expand(w) + expand(reverse(w)) = 2 B^l D^m + m*l B^(l-1) B_x D^(m-1) + ...
    class_sum(m, l) = binom(n, m) [B^l D^m + (m*l/2) B^(l-1) B_x D^(m-1)] + ...
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, Iterable, Mapping, Tuple, Union

Symbol = Tuple[int, int, int]  # (a, b, j) for B^a B_x^b D^j

CLASS_CAP = 11  # brute-force expansion limit: C(11, 5) = 462 words


class OpSum:
    """Normal-ordered sum of B^a B_x^b D^j symbols with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Symbol, Union[int, Fraction]] | None = None):
        clean: Dict[Symbol, Fraction] = {}
        if terms:
            for key, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[tuple(key)] = c
        self.terms = clean

    @staticmethod
    def identity() -> "OpSum":
        return OpSum({(0, 0, 0): 1})

    def __add__(self, other: "OpSum") -> "OpSum":
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = OpSum()
        res.terms = out
        return res

    def scale(self, c: Union[int, Fraction]) -> "OpSum":
        c = Fraction(c)
        res = OpSum()
        if c:
            res.terms = {k: v * c for k, v in self.terms.items()}
        return res

    def coeff(self, a: int, b: int, j: int) -> Fraction:
        return self.terms.get((a, b, j), Fraction(0))

    def stratum(self, j: int) -> Dict[Tuple[int, int], Fraction]:
        """Coefficients of all symbols with D-power exactly j."""
        return {(a, b): c for (a, b, jj), c in self.terms.items() if jj == j}

    def compose(self, other: "OpSum") -> "OpSum":
        """Operator product self . other, renormalized.

        D^j B^a B_x^b = sum_i C(j, i) * a!/(a-i)! * B^(a-i) B_x^(b+i) D^(j-i)
        because each D either passes through or differentiates one B factor
        (B_x factors are killed by a further derivative).
        """
        out: Dict[Symbol, Fraction] = {}
        for (a1, b1, j1), c1 in self.terms.items():
            for (a2, b2, j2), c2 in other.terms.items():
                falling = 1
                for i in range(min(j1, a2) + 1):
                    key = (a1 + a2 - i, b1 + b2 + i, j1 - i + j2)
                    s = out.get(key, Fraction(0)) + c1 * c2 * comb(j1, i) * falling
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)
                    falling *= a2 - i
        res = OpSum()
        res.terms = out
        return res

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OpSum) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "OpSum(0)"
        bits = []
        for (a, b, j) in sorted(self.terms, key=lambda k: (-k[2], k)):
            bits.append(f"{self.terms[(a, b, j)]}*B^{a}Bx^{b}D^{j}")
        return "OpSum(" + " + ".join(bits) + ")"


def expand_word(word: Union[str, Iterable[str]]) -> OpSum:
    """Full normal-form expansion of a word over {D, B}.

    Processes letters right to left (innermost first); prepending D to a
    symbol B^a B_x^b D^j gives B^a B_x^b D^(j+1) + a B^(a-1) B_x^(b+1) D^j.
    """
    letters = list(word)
    if any(ch not in ("D", "B") for ch in letters):
        raise ValueError(f"word must contain only D and B, got {letters!r}")
    terms: Dict[Symbol, Fraction] = {(0, 0, 0): Fraction(1)}
    for ch in reversed(letters):
        out: Dict[Symbol, Fraction] = {}
        for (a, b, j), c in terms.items():
            if ch == "B":
                keys = (((a + 1, b, j), c),)
            else:
                keys = (((a, b, j + 1), c), ((a - 1, b + 1, j), c * a))
            for key, val in keys:
                if not val:
                    continue
                s = out.get(key, Fraction(0)) + val
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        terms = out
    res = OpSum()
    res.terms = terms
    return res


def class_words(m: int, l: int):
    """All words with m D's and l B's, as strings."""
    n = m + l
    for positions in combinations(range(n), m):
        chars = ["B"] * n
        for p in positions:
            chars[p] = "D"
        yield "".join(chars)


def class_sum(m: int, l: int) -> OpSum:
    """Sum of expand_word over all binomial(m+l, l) words of class (m, l)."""
    if m < 0 or l < 0:
        raise ValueError("class indices must be nonnegative")
    if m + l > CLASS_CAP:
        raise ValueError(f"class expansion capped at m+l <= {CLASS_CAP}")
    total = OpSum()
    for word in class_words(m, l):
        total = total + expand_word(word)
    return total


def verify_reversal_identity(word: Union[str, Iterable[str]]) -> bool:
    """Check expand(w) + expand(reverse(w)) against its two leading strata."""
    letters = list(word)
    m = letters.count("D")
    l = letters.count("B")
    s = expand_word(letters) + expand_word(list(reversed(letters)))
    if s.coeff(l, 0, m) != 2:
        return False
    if m >= 1:
        expected = Fraction(m * l)
        stratum = s.stratum(m - 1)
        if l >= 1:
            if stratum != ({(l - 1, 1): expected} if expected else {}):
                return False
        elif stratum:
            return False
    return True


def verify_class_leading(m: int, l: int) -> bool:
    """Check class_sum(m, l) against binom(n,m)[B^l D^m + (ml/2) B^(l-1) B_x D^(m-1)]."""
    n = m + l
    cs = class_sum(m, l)
    lead = comb(n, m)
    if cs.stratum(m) != {(l, 0): Fraction(lead)}:
        return False
    if m >= 1:
        expected = Fraction(lead * m * l, 2)
        stratum = cs.stratum(m - 1)
        if expected:
            if stratum != {(l - 1, 1): expected}:
                return False
        elif stratum:
            return False
    return True
