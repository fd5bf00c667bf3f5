"""Canonical state representations and basis operations.

Two equivalent descriptions of a single-mode bosonic state are used
throughout the package:

* a truncated number-basis amplitude vector (:class:`FockVector`), and
* the displaced-squeezed core parametrization (:class:`StellarState`),
  ``D(alpha) S(chi) sum_n c_n |n>`` with ``S(chi) = exp((chi* a^2 - chi a†^2)/2)``
  and ``D(alpha) = exp(alpha a† - alpha* a)``.

Conversions between the two go through matrix exponentials of the truncated
displacement and squeezing generators, so that the closed-form amplitude
formulas (squeezed vacuum, displacement matrix elements) remain available as
independent test oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import expm_multiply

from .errors import CutoffTooSmall, InvalidParameter, ZeroVector

__all__ = [
    "FockVector",
    "StellarState",
    "EnergyMomentReport",
    "Verdict",
    "annihilation_matrix",
    "normalize",
    "energy_moment",
    "squeezed_vacuum_fock",
    "packet_exponents",
    "stellar_to_fock",
    "stellar_to_fock_exponential",
    "default_cutoff",
    "phase_shift",
    "random_stellar_state",
    "state_to_json",
    "state_from_json",
]


@dataclass(frozen=True)
class FockVector:
    """Truncated number-basis amplitudes ``psi_0 .. psi_N``.

    Amplitudes must be finite; any normalizing constructor leaves the
    squared norm in ``(0, 1 + 1e-9]``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidParameter("FockVector needs a nonempty 1-d amplitude list")
        if not np.all(np.isfinite(arr.view(float))):
            raise InvalidParameter("FockVector amplitudes must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def cutoff(self) -> int:
        return self.coeffs.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def padded(self, cutoff: int) -> "FockVector":
        """Zero-pad (or reject shrinking) to the requested cutoff."""
        if cutoff < self.cutoff:
            raise InvalidParameter("padded() cannot shrink a FockVector")
        out = np.zeros(cutoff + 1, dtype=complex)
        out[: self.coeffs.size] = self.coeffs
        return FockVector(out)


@dataclass(frozen=True)
class StellarState:
    """Finite-rank core parameters ``(r, c_0..c_r, alpha, chi)``.

    The core is stored normalized (``sum |c_n|^2 = 1`` within 1e-12) and the
    declared rank is exact: ``|c_r| > 1e-12``.  Global phase is not fixed by
    this parametrization; all conversions in this package nevertheless use a
    single consistent operator convention, so cross-representation
    comparisons are phase-exact.
    """

    rank: int
    core: np.ndarray
    alpha: complex
    chi: complex

    def __post_init__(self):
        core = np.asarray(self.core, dtype=complex)
        if core.ndim != 1 or core.size != self.rank + 1:
            raise InvalidParameter("core must have length rank + 1")
        nrm = np.linalg.norm(core)
        if not nrm > 1e-300:
            raise ZeroVector("core vector has zero norm")
        core = core / nrm
        if abs(core[-1]) <= 1e-12:
            raise InvalidParameter("top core coefficient vanishes; declared rank is not exact")
        core = core.copy()
        core.setflags(write=False)
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "chi", complex(self.chi))


class Verdict(Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EnergyMomentReport:
    """Partial sum and tail diagnosis of ``<s^n>`` for a truncated vector."""

    s: float
    partial_sum: float
    tail_estimate: float
    verdict: Verdict
    ratio: float


def annihilation_matrix(dim: int) -> np.ndarray:
    """Dense annihilation operator truncated to ``dim`` Fock levels."""
    a = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def normalize(v: FockVector) -> FockVector:
    """Rescale to unit norm.  Raises :class:`ZeroVector` below 1e-300."""
    nrm = v.norm()
    if not nrm > 1e-300:
        raise ZeroVector("cannot normalize a zero vector")
    return FockVector(v.coeffs / nrm)


def _log_terms(v: FockVector, s: float):
    """Indices and log of the nonzero terms ``s^n |psi_n|^2``."""
    mags = np.abs(v.coeffs)
    idx = np.nonzero(mags > 0)[0]
    logs = idx * math.log(s) + 2.0 * np.log(mags[idx])
    return idx, logs


def energy_moment(v: FockVector, s: float, tol: float = 1e-6) -> EnergyMomentReport:
    """Partial sum of ``<s^n>`` with a geometric-ratio tail diagnosis.

    The verdict fits the log of the last (up to) ten nonzero terms: a
    geometric ratio below ``1 - 1e-3`` gives ``Converged`` (provided the
    extrapolated tail is below ``tol``), above ``1 + 1e-3`` gives
    ``Diverged``, anything else is ``Inconclusive``.  A vector whose support
    ends well before the cutoff is a polynomial state and converges exactly.
    """
    if not s > 1.0:
        raise InvalidParameter("energy moment needs s > 1")
    if tol <= 0:
        raise InvalidParameter("tolerance must be positive")
    idx, logs = _log_terms(v, s)
    if idx.size == 0:
        raise ZeroVector("energy moment of the zero vector")

    # Sum in log space; the series can dwarf the float range when it diverges.
    lmax = float(np.max(logs))
    partial = math.exp(lmax) * float(np.sum(np.exp(logs - lmax))) if lmax < 700 else math.inf

    n_last = int(idx[-1])
    if v.cutoff - n_last >= 2 and abs(v.coeffs[n_last]) > 1e-150:
        # Structural trailing-zero run (not an underflowed tail, whose last
        # survivors sit at the bottom of the double range): finite support.
        return EnergyMomentReport(s, partial, 0.0, Verdict.CONVERGED, 0.0)

    k = min(10, idx.size)
    if k < 3:
        return EnergyMomentReport(s, partial, math.inf, Verdict.INCONCLUSIVE, math.nan)
    ns = idx[-k:].astype(float)
    slope = np.polyfit(ns, logs[-k:], 1)[0]
    ratio = math.exp(slope)
    last = math.exp(min(float(logs[-1]), 700.0))
    tail = last * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
    if ratio < 1.0 - 1e-3 and tail < tol:
        verdict = Verdict.CONVERGED
    elif ratio > 1.0 + 1e-3:
        verdict = Verdict.DIVERGED
    else:
        verdict = Verdict.INCONCLUSIVE
    return EnergyMomentReport(s, partial, tail, verdict, ratio)


def squeezed_vacuum_fock(chi: complex, cutoff: int, renormalize: bool = False) -> FockVector:
    """Squeezed-vacuum amplitudes from the closed-form expansion.

    ``psi_{2n} = (-e^{i phi} tanh r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)``
    with ``chi = r e^{i phi}``; odd amplitudes are exactly zero.  Computed in
    log space so deep tails do not underflow prematurely.
    """
    if cutoff < 2:
        raise InvalidParameter("cutoff must be at least 2")
    chi = complex(chi)
    out = np.zeros(cutoff + 1, dtype=complex)
    if chi == 0:
        out[0] = 1.0
        return FockVector(out)
    r = abs(chi)
    phi = cmath.phase(chi)
    tanh_r = math.tanh(r)
    log_cosh = math.log(math.cosh(r)) if r < 350 else r - math.log(2.0)
    for n in range(0, cutoff // 2 + 1):
        logmag = (
            n * math.log(tanh_r)
            + 0.5 * math.lgamma(2 * n + 1)
            - n * math.log(2.0)
            - math.lgamma(n + 1)
            - 0.5 * log_cosh
        )
        if logmag < -745.0:
            continue
        out[2 * n] = math.exp(logmag) * cmath.exp(1j * n * (phi + math.pi))
    v = FockVector(out)
    return normalize(v) if renormalize else v


def default_cutoff(rank: int, alpha: complex, chi: complex) -> int:
    """Truncation heuristic: mean photon number sets the scale."""
    mean_n = rank + abs(alpha) ** 2 + math.sinh(abs(chi)) ** 2
    return max(60, math.ceil(8.0 * mean_n))


def packet_exponents(alpha: complex, chi: complex):
    """Exponent coefficients ``(g2, g1, g0)`` of the rank-0 packet.

    The wavefunction of ``D(alpha) S(chi) |0>`` is ``exp(g2 x^2 + g1 x + g0)``
    with the exact global phase of the operator convention (squeezing first,
    then displacement by ``x0 = sqrt(2) Re alpha``, ``p0 = sqrt(2) Im alpha``
    with the Baker-Campbell-Hausdorff phase ``exp(-i Re(alpha) Im(alpha))``).
    """
    alpha = complex(alpha)
    chi = complex(chi)
    r = abs(chi)
    w = cmath.exp(1j * cmath.phase(chi)) if chi != 0 else 1.0
    ch, sh = math.cosh(r), math.sinh(r)
    denom = ch - w * sh
    g2 = -(ch + w * sh) / (2.0 * denom)
    x0 = math.sqrt(2.0) * alpha.real
    p0 = math.sqrt(2.0) * alpha.imag
    g1 = -2.0 * g2 * x0 + 1j * p0
    log_pref = -0.25 * math.log(math.pi) - 0.5 * cmath.log(denom)
    g0 = g2 * x0 * x0 - 1j * alpha.imag * alpha.real + log_pref
    return g2, g1, g0


def _packet_amplitudes(alpha: complex, chi: complex, dim: int) -> np.ndarray:
    """Number-basis amplitudes of the rank-0 packet by the stable recurrence.

    ``(cosh r a + e^{i phi} sinh r a†) |G> = (cosh r alpha + e^{i phi} sinh r
    alpha*) |G>`` gives a three-term recurrence whose two homogeneous
    solutions share the modulus ``sqrt(tanh r)`` per step, so forward
    recursion keeps the deep tail accurate relative to its own magnitude
    (which matrix-exponential routes cannot do).
    """
    g2, g1, g0 = packet_exponents(alpha, chi)
    c = 0.5 - g2
    seed = (
        math.pi**-0.25
        * cmath.exp(g0)
        * cmath.sqrt(math.pi / c)
        * cmath.exp(g1 * g1 / (4.0 * c))
    )
    r = abs(chi)
    w = cmath.exp(1j * cmath.phase(chi)) if chi != 0 else 1.0
    ch, sh = math.cosh(r), math.sinh(r)
    kappa = ch * alpha + w * sh * np.conj(alpha)
    g = np.zeros(dim, dtype=complex)
    g[0] = seed
    for n in range(dim - 1):
        prev = g[n - 1] if n >= 1 else 0.0
        g[n + 1] = (kappa * g[n] - w * sh * math.sqrt(n) * prev) / (ch * math.sqrt(n + 1))
    return g


def stellar_to_fock(st: StellarState, cutoff: int | None = None) -> FockVector:
    """Amplitudes of ``D(alpha) S(chi) sum_n c_n |n>`` at the given cutoff.

    The rank-0 packet amplitudes come from the stable three-term recurrence
    and the core polynomial is applied through the conjugated creation
    operator ``D S a† S† D`` (a banded cascade), so every amplitude is
    accurate relative to its own size down to underflow.  The equivalent
    matrix-exponential construction (:func:`stellar_to_fock_exponential`)
    agrees on the real axis but loses the deep tail to absolute roundoff,
    which ruins evaluations at complex argument; it is kept as a
    cross-check.

    The discarded norm is measured in a padded working range: everything
    above ``cutoff`` must carry less than 1e-10 of the squared norm.
    """
    if cutoff is None:
        cutoff = default_cutoff(st.rank, st.alpha, st.chi)
    if cutoff < st.rank:
        raise CutoffTooSmall("cutoff below the stellar rank")
    pad = max(24, (cutoff + 1) // 2)
    dim = cutoff + 1 + pad
    g = _packet_amplitudes(st.alpha, st.chi, dim)

    chi = st.chi
    r = abs(chi)
    w = cmath.exp(1j * cmath.phase(chi)) if chi != 0 else 1.0
    ch, sh = math.cosh(r), math.sinh(r)
    mu = ch * np.conj(st.alpha) + np.conj(w) * sh * st.alpha
    wbar_sh = np.conj(w) * sh
    sq = np.sqrt(np.arange(1, dim))
    vec = st.core[0] * g
    cur = g
    for n in range(1, st.rank + 1):
        nxt = np.zeros(dim, dtype=complex)
        nxt[1:] += ch * sq * cur[:-1]
        nxt[:-1] += wbar_sh * sq * cur[1:]
        nxt -= mu * cur
        cur = nxt
        vec = vec + (st.core[n] / math.sqrt(math.factorial(n))) * cur

    discarded = float(np.sum(np.abs(vec[cutoff + 1 :]) ** 2))
    if discarded >= 1e-10:
        raise CutoffTooSmall(
            f"discarded norm {discarded:.3e} at cutoff {cutoff}; increase the cutoff"
        )
    return FockVector(vec[: cutoff + 1])


def stellar_to_fock_exponential(st: StellarState, cutoff: int) -> FockVector:
    """Same state via exponentials of the truncated generators.

    Applies ``exp((chi* a^2 - chi a†^2)/2)`` then ``exp(alpha a† - alpha* a)``
    in a padded working space.  Tail amplitudes below roughly ``1e-16`` of
    the norm are not reliable (absolute roundoff of the exponential), so
    this route is a real-axis cross-check, not the production conversion.
    """
    if cutoff < st.rank:
        raise CutoffTooSmall("cutoff below the stellar rank")
    pad = max(24, (cutoff + 1) // 2)
    dim = cutoff + 1 + pad
    a = annihilation_matrix(dim)
    ad = a.conj().T
    vec = np.zeros(dim, dtype=complex)
    vec[: st.rank + 1] = st.core
    if st.chi != 0:
        gen_s = csr_matrix(0.5 * (np.conj(st.chi) * (a @ a) - st.chi * (ad @ ad)))
        vec = expm_multiply(gen_s, vec)
    if st.alpha != 0:
        gen_d = csr_matrix(st.alpha * ad - np.conj(st.alpha) * a)
        vec = expm_multiply(gen_d, vec)
    discarded = float(np.sum(np.abs(vec[cutoff + 1 :]) ** 2))
    if discarded >= 1e-10:
        raise CutoffTooSmall(
            f"discarded norm {discarded:.3e} at cutoff {cutoff}; increase the cutoff"
        )
    return FockVector(vec[: cutoff + 1])


def phase_shift(v: FockVector, theta: float) -> FockVector:
    """Apply ``exp(-i theta n)``: ``psi_n -> exp(-i theta n) psi_n``."""
    ns = np.arange(v.coeffs.size)
    return FockVector(v.coeffs * np.exp(-1j * theta * ns))


def random_stellar_state(rank: int, seed: int, scale: float = 1.0) -> StellarState:
    """Seeded random fixture: complex-normal core, disc-uniform alpha, chi."""
    if rank < 0:
        raise InvalidParameter("rank must be nonnegative")
    rng = np.random.default_rng(seed)
    while True:
        core = rng.standard_normal(rank + 1) + 1j * rng.standard_normal(rank + 1)
        core /= np.linalg.norm(core)
        if abs(core[-1]) > 1e-6:
            break
    alpha = scale * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    chi = scale * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    return StellarState(rank=rank, core=core, alpha=alpha, chi=chi)


def state_to_json(st: StellarState) -> dict:
    """State descriptor used by the CLI: re/im pairs, index 0 first."""
    return {
        "rank": st.rank,
        "core": [[c.real, c.imag] for c in st.core],
        "alpha": [st.alpha.real, st.alpha.imag],
        "chi": [st.chi.real, st.chi.imag],
    }


def state_from_json(data: dict) -> StellarState:
    try:
        rank = int(data["rank"])
        core = np.array([complex(re, im) for re, im in data["core"]])
        alpha = complex(data["alpha"][0], data["alpha"][1])
        chi = complex(data["chi"][0], data["chi"][1])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameter(f"malformed state descriptor: {exc}") from exc
    nsq = float(np.sum(np.abs(core) ** 2))
    if abs(nsq - 1.0) > 1e-9:
        raise InvalidParameter("core coefficients are not normalized")
    return StellarState(rank=rank, core=core, alpha=alpha, chi=chi)
