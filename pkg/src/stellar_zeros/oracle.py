"""Independent ground truth: truncated Fock-basis propagation.

The quadratic Hamiltonian is assembled from truncated ladder matrices,
symmetrized, and exponentiated by eigendecomposition; evolved vectors are
monitored for leakage into the top quarter of the basis.  Zeros of the
evolved wavefunction are then recovered from the Hermite-series extension
by recursive argument-principle subdivision plus Newton polishing.  None of
this shares a code path with the closed-form zero dynamics, which is the
point: agreement between the two is the package's strongest check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CountMismatch,
    InvalidParameter,
    TruncationLeakage,
    ZeroOnContour,
)
from .dynamics import QuadraticHamiltonian
from .states import FockVector, annihilation_matrix
from .wavefunction import count_zeros_box, eval_entire

__all__ = [
    "TruncatedOperator",
    "hamiltonian_matrix",
    "evolve_fock",
    "zeros_from_fock",
]


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense truncated operator with its Hermiticity defect."""

    entries: np.ndarray
    hermitian_defect: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def hamiltonian_matrix(H: QuadraticHamiltonian, cutoff: int) -> TruncatedOperator:
    """Truncated matrix of the quadratic Hamiltonian.

    Built from products of the truncated quadrature matrices
    ``x = (a + a†)/sqrt(2)``, ``p = i(a† - a)/sqrt(2)``; entries within two
    rows/columns of the truncation edge deviate from their infinite-
    dimensional values, which is why evolved states must stay away from the
    top of the basis.
    """
    if cutoff < 4:
        raise InvalidParameter("Hamiltonian matrix needs cutoff >= 4")
    dim = cutoff + 1
    a = annihilation_matrix(dim)
    ad = a.conj().T
    x = (a + ad) / math.sqrt(2.0)
    p = 1j * (ad - a) / math.sqrt(2.0)
    m = (
        H.A * (x @ x)
        + H.B * (p @ p)
        + H.C * 0.5 * (x @ p + p @ x)
        + H.D * x
        + H.E * p
        + H.F * np.eye(dim)
    )
    defect = float(np.max(np.abs(m - m.conj().T)))
    return TruncatedOperator(m, defect)


def _top_quarter_norm(coeffs: np.ndarray) -> float:
    start = (3 * coeffs.size) // 4
    return float(np.sum(np.abs(coeffs[start:]) ** 2))


def evolve_fock(
    v: FockVector, H: QuadraticHamiltonian, t: float, cutoff: int | None = None
) -> FockVector:
    """Apply ``exp(-i t H)`` in the truncated basis.

    The truncated matrix is replaced by its Hermitian part before
    eigendecomposition (truncation only breaks Hermiticity at the edge), so
    the propagation is exactly unitary; correctness is guarded by requiring
    the input to carry less than 1e-10 of its norm in the top quarter of
    the basis and the output less than 1e-8.
    """
    if cutoff is None:
        cutoff = v.cutoff
    if cutoff < max(4, v.cutoff):
        raise InvalidParameter("evolution cutoff below the state cutoff")
    vec = v.padded(cutoff).coeffs
    if _top_quarter_norm(vec) >= 1e-10:
        raise InvalidParameter(
            "state support reaches the top quarter of the basis; raise the cutoff"
        )
    op = hamiltonian_matrix(H, cutoff)
    herm = 0.5 * (op.entries + op.entries.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    out = evecs @ (np.exp(-1j * t * evals) * (evecs.conj().T @ vec))
    leak = _top_quarter_norm(out)
    if leak > 1e-8:
        raise TruncationLeakage(
            f"evolved state leaked {leak:.3e} into the top quarter of the basis"
        )
    return FockVector(out)


def _newton_polish(f, z0, steps=60):
    z = complex(z0)
    fz = complex(f(z))
    for _ in range(steps):
        h = 1e-6 * (1.0 + abs(z))
        d = (complex(f(z + h)) - complex(f(z - h))) / (2.0 * h)
        if d == 0:
            break
        step = fz / d
        z -= step
        fz = complex(f(z))
        if abs(step) <= 1e-12 * (1.0 + abs(z)):
            break
    return z, fz


def zeros_from_fock(
    v: FockVector, expected_rank: int, box_halfwidth: float, center: complex = 0.0
) -> list:
    """Zeros of the entire extension inside a centered box.

    Recursive argument-principle subdivision down to cells of width 1e-3,
    then Newton polishing with a numerically differentiated function.  The
    total count must equal ``expected_rank`` (anything else signals
    truncation artifacts or a wrong box).  Contour hits are retried with a
    deterministic sequence of small box jitters.
    """
    if expected_rank < 0:
        raise InvalidParameter("expected_rank must be nonnegative")
    if box_halfwidth <= 0:
        raise InvalidParameter("box_halfwidth must be positive")

    def f(zz):
        return eval_entire(v, zz, check=False)

    hw = float(box_halfwidth)
    cx, cy = complex(center).real, complex(center).imag
    # Root box: grow symmetrically until the contour clears all zeros.
    total = None
    last_exc = None
    for j in (0.0, 1e-4, -1e-4, 2.3e-4, -3.1e-4, 4.7e-4):
        root_box = (cx - hw - j, cx + hw + j, cy - hw - j, cy + hw + j)
        try:
            total = count_zeros_box(f, root_box, 48)
            break
        except ZeroOnContour as exc:
            last_exc = exc
    if total is None:
        raise last_exc
    if total != expected_rank:
        raise CountMismatch(
            f"box contains {total} zeros, expected {expected_rank}; "
            "wrong box or truncation artifacts"
        )
    found = []
    stack = [(root_box, total)]
    while stack:
        box, n = stack.pop()
        if n == 0:
            continue
        x0, x1, y0, y1 = box
        if max(x1 - x0, y1 - y0) <= 1e-3:
            z0 = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            z, _ = _newton_polish(f, z0)
            found.extend([z] * n)
            continue
        # Split lines are jittered, never the outer edges, so the four
        # children always partition the parent exactly.
        counted = None
        width = max(x1 - x0, y1 - y0)
        for j in (0.0, 7e-4, -1.1e-3, 1.7e-3, -2.3e-3, 3.1e-3):
            dx = min(j, 0.2 * width)
            xm, ym = 0.5 * (x0 + x1) + dx, 0.5 * (y0 + y1) - dx
            quads = (
                (x0, xm, y0, ym),
                (xm, x1, y0, ym),
                (x0, xm, ym, y1),
                (xm, x1, ym, y1),
            )
            try:
                counts = [count_zeros_box(f, q, 32) for q in quads]
            except ZeroOnContour:
                continue
            if sum(counts) == n:
                counted = list(zip(quads, counts))
                break
        if counted is None:
            raise CountMismatch(
                f"could not subdivide a box holding {n} zeros; "
                "zeros sit on every tried split line"
            )
        stack.extend(cb for cb in counted if cb[1] > 0)
    return found
