"""Truncated Laurent series sum_{n>=lo} c_n x^n with numpy coefficient storage.

Used for pole expansions of the Painleve-1 layer, the linearized series around
a pole, and the Weierstrass function near a lattice point.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Laurent:
    lo: int
    coeffs: np.ndarray

    @property
    def hi(self):
        return self.lo + len(self.coeffs) - 1

    def __getitem__(self, n):
        i = n - self.lo
        if 0 <= i < len(self.coeffs):
            return float(self.coeffs[i])
        return 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float if np.isrealobj(x) else complex)
        # Horner on the regular part, then shift by x**lo
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc * x ** self.lo if self.lo else acc

    def derivative(self):
        n = np.arange(self.lo, self.hi + 1)
        return Laurent(self.lo - 1, self.coeffs * n)

    def scale(self, a):
        return Laurent(self.lo, a * self.coeffs)

    def __add__(self, other):
        if not isinstance(other, Laurent):
            lo = min(self.lo, 0)
            out = np.zeros(max(self.hi, 0) - lo + 1)
            out[self.lo - lo:self.hi - lo + 1] = self.coeffs
            out[-lo] += float(other)
            return Laurent(lo, out)
        lo = min(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        out = np.zeros(hi - lo + 1)
        for s in (self, other):
            for n in range(s.lo, min(s.hi, hi) + 1):
                out[n - lo] += s[n]
        return Laurent(lo, out)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            return self.scale(float(other))
        lo = self.lo + other.lo
        # keep only the orders that are exact for both truncations
        hi = min(self.hi + other.lo, other.hi + self.lo)
        full = np.convolve(self.coeffs, other.coeffs)
        return Laurent(lo, full[: hi - lo + 1].copy())

    __rmul__ = __mul__

    def integral_finite_part(self, a, b):
        """Hadamard finite part of the integral of the series over [a, b], a may be 0.

        Terms x^n with n <= -1 contribute only their b-endpoint value when a == 0;
        a 1/x term has no finite part and raises ValueError.
        """
        total = 0.0
        for n in range(self.lo, self.hi + 1):
            c = self[n]
            if c == 0.0:
                continue
            if n == -1:
                if a == 0:
                    raise ValueError("logarithmic term in finite-part integral")
                total += c * (np.log(b) - np.log(a))
                continue
            lower = 0.0 if a == 0 else a ** (n + 1)
            total += c * (b ** (n + 1) - lower) / (n + 1)
        return total


def from_dict(terms, lo, hi):
    out = np.zeros(hi - lo + 1)
    for n, c in terms.items():
        out[n - lo] = c
    return Laurent(lo, out)
