"""Orthonormal Haar analysis/synthesis and approximation-only compression.

All transforms act on the last axis, so a ``(channels, samples)`` array is
processed channel by channel in one call.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import StructureError

SQRT2 = np.sqrt(2.0)


def haar_forward_step(seq) -> tuple[np.ndarray, np.ndarray]:
    seq = np.asarray(seq, dtype=float)
    n = seq.shape[-1]
    if n == 0 or n % 2:
        raise ValueError(f"Haar step needs an even, non-zero length, got {n}")
    even, odd = seq[..., 0::2], seq[..., 1::2]
    return (even + odd) / SQRT2, (even - odd) / SQRT2


def haar_inverse_step(approx, detail) -> np.ndarray:
    approx = np.asarray(approx, dtype=float)
    detail = np.asarray(detail, dtype=float)
    if approx.shape != detail.shape:
        raise ValueError(f"approx {approx.shape} and detail {detail.shape} differ in shape")
    out = np.empty(approx.shape[:-1] + (2 * approx.shape[-1],))
    out[..., 0::2] = (approx + detail) / SQRT2
    out[..., 1::2] = (approx - detail) / SQRT2
    return out


@dataclass(frozen=True)
class WaveletPyramid:
    """Details finest first, then the coarsest approximation."""

    levels: tuple[np.ndarray, ...]
    approx: np.ndarray
    original_len: int

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(np.asarray(d, dtype=float) for d in self.levels))
        object.__setattr__(self, "approx", np.asarray(self.approx, dtype=float))
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.levels)

    def validate(self) -> None:
        n, L = self.original_len, self.depth
        if n < 1 or L < 1:
            raise StructureError("a pyramid needs a positive length and at least one level")
        if n % (1 << L):
            raise StructureError(f"original_len {n} is not divisible by 2**{L}")
        for k, d in enumerate(self.levels):
            if d.shape[-1] != n >> (k + 1):
                raise StructureError(f"detail level {k} has length {d.shape[-1]}, expected {n >> (k + 1)}")
        if self.approx.shape[-1] != n >> L:
            raise StructureError(f"approximation has length {self.approx.shape[-1]}, expected {n >> L}")

    def to_csv(self) -> str:
        """One block per level: ``detail,<k>`` rows finest first, then ``approx``."""
        out = io.StringIO()
        out.write(f"original_len,{self.original_len}\n")
        for k, d in enumerate(self.levels):
            out.write(f"detail,{k}," + ",".join(f"{v:.17g}" for v in np.ravel(d)) + "\n")
        out.write("approx,," + ",".join(f"{v:.17g}" for v in np.ravel(self.approx)) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WaveletPyramid":
        rows = [ln.split(",") for ln in text.splitlines() if ln.strip()]
        try:
            n = int(rows[0][1])
            levels = [np.array([float(v) for v in r[2:]]) for r in rows[1:-1]]
            approx = np.array([float(v) for v in rows[-1][2:]])
        except (IndexError, ValueError) as exc:
            raise StructureError(f"malformed pyramid CSV: {exc}") from None
        return cls(tuple(levels), approx, n)


def _check_levels(n: int, levels: int) -> None:
    if int(levels) != levels or levels < 1:
        raise ValueError(f"levels must be a positive integer, got {levels!r}")
    block = 1 << int(levels)
    if n < block or n % block:
        raise ValueError(f"length {n} must be a positive multiple of 2**{levels} = {block}")


def decompose(seq, levels: int) -> WaveletPyramid:
    seq = np.asarray(seq, dtype=float)
    n = seq.shape[-1]
    _check_levels(n, levels)
    details = []
    a = seq
    for _ in range(levels):
        a, d = haar_forward_step(a)
        details.append(d)
    return WaveletPyramid(tuple(details), a, n)


def reconstruct(pyr: WaveletPyramid) -> np.ndarray:
    pyr.validate()
    a = pyr.approx
    for d in reversed(pyr.levels):
        a = haar_inverse_step(a, d)
    return a


def compress(seq, levels: int = 3) -> np.ndarray:
    """Keep only the level-``levels`` approximation; length shrinks by 2**levels."""
    seq = np.asarray(seq, dtype=float)
    _check_levels(seq.shape[-1], levels)
    a = seq
    for _ in range(levels):
        a = (a[..., 0::2] + a[..., 1::2]) / SQRT2
    return a
