"""Dense float64 array primitives underneath every attention operation.

All functions take and return C-contiguous float64 arrays (flat row-major
storage), do all arithmetic in 64-bit, and perform no broadcasting beyond what
each operation defines. Inputs and outputs are checked finite.
"""

from __future__ import annotations

import math
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray

from .errors import InputError, RangeError, ShapeError

Tensor: TypeAlias = NDArray[np.float64]


def as_tensor(values: object, name: str = "tensor") -> Tensor:
    """Coerce to a C-contiguous float64 array, rejecting non-finite entries."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def _require_2d(arr: Tensor, name: str) -> None:
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")


def softmax_rows(m: Tensor) -> Tensor:
    """Row-wise softmax of a 2-D array.

    Stabilized by subtracting each row's maximum before exponentiation, so rows
    with entries of magnitude ~1e3 neither overflow nor collapse. Each output
    row is non-negative and sums to 1 (to within accumulated rounding).
    """
    m = as_tensor(m, "m")
    _require_2d(m, "softmax_rows input")
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """Scaled dot-product attention: softmax_rows(q @ k.T / sqrt(d)) @ v.

    q is n x d, k is m x d, v is m x dv; the result is n x dv. Every output
    row is a convex combination of the rows of v.
    """
    q = as_tensor(q, "q")
    k = as_tensor(k, "k")
    v = as_tensor(v, "v")
    for name, arr in (("q", q), ("k", k), ("v", v)):
        _require_2d(arr, name)
    if q.shape[1] != k.shape[1]:
        raise ShapeError(
            f"q feature dim {q.shape[1]} does not match k feature dim {k.shape[1]}"
        )
    if k.shape[0] != v.shape[0]:
        raise ShapeError(
            f"k has {k.shape[0]} rows but v has {v.shape[0]}; key/value counts must agree"
        )
    d = q.shape[1]
    if d < 1:
        raise ShapeError("attention feature dimension must be at least 1")
    logits = (q @ k.T) / math.sqrt(d)
    weights = softmax_rows(logits)
    out = weights @ v
    if not np.all(np.isfinite(out)):
        raise InputError("attention output overflowed to non-finite values")
    return out


def lerp(a: Tensor, b: Tensor, alpha: float) -> Tensor:
    """Elementwise linear interpolation alpha*b + (1-alpha)*a.

    alpha must lie in [0, 1]. The endpoints are returned as exact copies so
    lerp(a, b, 0) is bitwise a and lerp(a, b, 1) is bitwise b.
    """
    a = as_tensor(a, "a")
    b = as_tensor(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"lerp operands differ in shape: {a.shape} vs {b.shape}")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return a.copy()
    if alpha == 1.0:
        return b.copy()
    return alpha * b + (1.0 - alpha) * a


def scale_rows(v: Tensor, wts: Tensor) -> Tensor:
    """Scale row i of a 2-D array by wts[i].

    wts must be 1-D with one entry per row of v. All-ones weights return a
    bitwise-identical copy (multiplication by 1.0 is exact).
    """
    v = as_tensor(v, "v")
    w = as_tensor(wts, "wts")
    _require_2d(v, "v")
    if w.ndim != 1:
        raise ShapeError(f"wts must be 1-D, got shape {w.shape}")
    if w.shape[0] != v.shape[0]:
        raise ShapeError(
            f"wts has {w.shape[0]} entries for {v.shape[0]} rows of v"
        )
    out = v * w[:, None]
    if not np.all(np.isfinite(out)):
        raise InputError("scale_rows output overflowed to non-finite values")
    return out
