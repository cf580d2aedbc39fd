"""Compensated summation helpers.

Float prefix sums over long ranges are done in chunks: numpy does the
within-chunk cumsum, and a Neumaier-style (sum, carry) pair propagates the
running total across chunk boundaries so the error stays near one ulp of
the result instead of growing with the number of chunks.
"""

from __future__ import annotations

import numpy as np

CHUNK = 4096


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Exact float addition: returns (s, err) with s + err == a + b exactly."""
    s = a + b
    bp = s - a
    err = (a - (s - bp)) + (b - bp)
    return s, err


class NeumaierSum:
    """Streaming compensated accumulator for real floats."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = hi
        self.lo = lo

    def add(self, x: float) -> None:
        s, err = two_sum(self.hi, x)
        self.hi = s
        self.lo += err

    def total(self) -> float:
        return self.hi + self.lo


def compensated_total(values: np.ndarray) -> complex | float:
    """Compensated sum of a 1-d float or complex array, in index order.

    Chunk totals come from numpy's pairwise reduction; the cross-chunk
    accumulation is Neumaier-compensated.
    """
    if np.iscomplexobj(values):
        re = compensated_total(values.real)
        im = compensated_total(values.imag)
        return complex(re, im)
    acc = NeumaierSum()
    for lo in range(0, len(values), CHUNK):
        acc.add(float(np.sum(values[lo : lo + CHUNK])))
    return acc.total()


def compensated_cumsum(values: np.ndarray, carry: NeumaierSum | None = None) -> np.ndarray:
    """Prefix sums of a 1-d real array with a compensated cross-chunk carry.

    If `carry` is given, it is the running total before values[0]; it is
    updated in place so consecutive calls chain across blocks.
    """
    out = np.empty(len(values), dtype=np.float64)
    if carry is None:
        carry = NeumaierSum()
    for lo in range(0, len(values), CHUNK):
        chunk = values[lo : lo + CHUNK]
        pc = np.cumsum(chunk)
        out[lo : lo + len(chunk)] = pc + (carry.hi + carry.lo)
        acc_next = NeumaierSum(carry.hi, carry.lo)
        acc_next.add(float(np.sum(chunk)))
        carry.hi, carry.lo = acc_next.hi, acc_next.lo
    return out
