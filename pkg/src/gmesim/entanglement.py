"""Entanglement certificates across bipartitions of a multiparty system.

Pure states are certified through Schmidt rank (genuinely multiparty
entangled iff the rank is at least 2 across every bipartition).  Mixed states
are certified through negativity of the partial transpose, which is a
sufficient witness of entanglement in a cut.  A three-party nonlocality
functional with its known classical and quantum bounds rounds out the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .qcore import ATOL, DensityOperator, PartyDims, PureState

#: Negativity above this threshold counts as a certified entangled cut.
ENTANGLED_NEG_ATOL = 1e-9

#: Schmidt coefficients above this threshold count toward the rank.
SCHMIDT_RANK_ATOL = 1e-9

#: Local-hidden-variable bound of the three-party nonlocality functional.
SVETLICHNY_CLASSICAL_BOUND = 4.0

#: Quantum maximum of the functional, reached by GHZ at optimal settings.
SVETLICHNY_QUANTUM_BOUND = 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class Bipartition:
    """A cut of the parties into ``left`` versus the rest.

    Canonical form keeps the highest-index party out of ``left``; the
    constructor flips a non-canonical ``left`` to its complement, which names
    the same cut.
    """

    left: frozenset[int]
    n_parties: int

    def __post_init__(self):
        left = frozenset(int(i) for i in self.left)
        n = int(self.n_parties)
        object.__setattr__(self, "n_parties", n)
        if n < 2:
            raise ValueError("a bipartition needs at least two parties")
        if any(i < 0 or i >= n for i in left):
            raise ValueError("party index out of range")
        if n - 1 in left:
            left = frozenset(range(n)) - left
        object.__setattr__(self, "left", left)
        if not left or len(left) == n:
            raise ValueError("both sides of a bipartition must be nonempty")

    @property
    def right(self) -> frozenset[int]:
        return frozenset(range(self.n_parties)) - self.left

    @property
    def label(self) -> str:
        letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
        lhs = "".join(letters[i] for i in sorted(self.left))
        rhs = "".join(letters[i] for i in sorted(self.right))
        return f"{lhs}|{rhs}"


def enumerate_bipartitions(n_parties: int) -> list[Bipartition]:
    """All 2**(n-1) - 1 distinct cuts, in deterministic (size, lexicographic) order."""
    n = int(n_parties)
    if n < 2:
        raise ValueError("need at least two parties")
    cuts = []
    for size in range(1, n):
        for left in combinations(range(n - 1), size):
            cuts.append(Bipartition(frozenset(left), n))
    return cuts


@dataclass(frozen=True)
class SchmidtData:
    """Schmidt coefficients (descending) and the induced rank."""

    coefficients: tuple[float, ...]
    rank: int

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if any(c < -ATOL for c in coeffs):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if list(coeffs) != sorted(coeffs, reverse=True):
            raise ValueError("Schmidt coefficients must be sorted descending")
        if abs(sum(c * c for c in coeffs) - 1.0) > 1e-8:
            raise ValueError("squared Schmidt coefficients must sum to 1")


@dataclass(frozen=True)
class CutRecord:
    """Certificate entries for one bipartition."""

    cut: Bipartition
    negativity: float
    schmidt_rank: int | None = None


@dataclass(frozen=True)
class BipartitionReport:
    """Certificates for every bipartition of a state, exactly once each."""

    n_parties: int
    records: tuple[CutRecord, ...]

    def __post_init__(self):
        expected = {c.label for c in enumerate_bipartitions(self.n_parties)}
        got = [r.cut.label for r in self.records]
        if sorted(got) != sorted(expected) or len(set(got)) != len(got):
            raise ValueError("records must cover every bipartition exactly once")

    @property
    def all_cuts_entangled(self) -> bool:
        return all(r.negativity > ENTANGLED_NEG_ATOL for r in self.records)

    @property
    def min_negativity(self) -> float:
        return min(r.negativity for r in self.records)

    def record(self, label: str) -> CutRecord:
        for r in self.records:
            if r.cut.label == label:
                return r
        raise KeyError(label)


def schmidt(state: PureState, cut: Bipartition) -> SchmidtData:
    """Schmidt decomposition of a normalized pure state across a cut."""
    if state.unnormalized:
        raise ValueError("normalize the state before a Schmidt decomposition")
    if cut.n_parties != state.dims.n:
        raise ValueError("cut does not match the number of parties")
    left = sorted(cut.left)
    right = sorted(cut.right)
    t = state.tensor_view().transpose(left + right)
    dl = math.prod(state.dims.dims[i] for i in left)
    dr = math.prod(state.dims.dims[i] for i in right)
    svals = np.linalg.svd(t.reshape(dl, dr), compute_uv=False)
    coeffs = tuple(float(s) for s in svals)
    rank = int(np.sum(svals > SCHMIDT_RANK_ATOL))
    return SchmidtData(coeffs, rank)


def partial_transpose(rho: DensityOperator, cut: Bipartition) -> np.ndarray:
    """Matrix of the partial transpose over the left side of the cut."""
    if cut.n_parties != rho.dims.n:
        raise ValueError("cut does not match the number of parties")
    n = rho.dims.n
    t = rho.tensor_view()
    axes = list(range(2 * n))
    for i in cut.left:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    out = t.transpose(axes)
    return out.reshape(rho.dims.total, rho.dims.total)


def negativity(rho: DensityOperator, cut: Bipartition) -> float:
    """Sum of |negative eigenvalues| of the partial transpose across a cut.

    Zero for states separable (more precisely, PPT) in the cut; positive
    values certify entanglement.  The value does not depend on which side of
    the cut is transposed.
    """
    pt = partial_transpose(rho, cut)
    vals = np.linalg.eigvalsh((pt + pt.conj().T) / 2.0)
    return float(-np.sum(vals[vals < 0.0])) + 0.0  # avoid IEEE -0.0


def _negativity_from_schmidt(coeffs) -> float:
    s = sum(coeffs)
    return max(0.0, (s * s - 1.0) / 2.0)


def certify_entangled_all_cuts(rho: DensityOperator) -> BipartitionReport:
    """Negativity certificate for every bipartition of a density operator."""
    records = tuple(
        CutRecord(cut, negativity(rho, cut)) for cut in enumerate_bipartitions(rho.dims.n)
    )
    return BipartitionReport(rho.dims.n, records)


def certify_gme_pure(state: PureState) -> tuple[bool, BipartitionReport]:
    """Genuine multipartite entanglement certificate for a pure state.

    A pure state is genuinely multiparty entangled iff its Schmidt rank is at
    least 2 across every bipartition.  The per-cut negativity is derived from
    the Schmidt coefficients, for which it has a closed form.
    """
    records = []
    for cut in enumerate_bipartitions(state.dims.n):
        data = schmidt(state, cut)
        records.append(
            CutRecord(cut, _negativity_from_schmidt(data.coefficients), data.rank)
        )
    report = BipartitionReport(state.dims.n, tuple(records))
    is_gme = all(r.schmidt_rank is not None and r.schmidt_rank >= 2 for r in report.records)
    return is_gme, report


# ---------------------------------------------------------------------------
# three-party nonlocality functional
# ---------------------------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)


def equatorial_observable(angle: float) -> np.ndarray:
    """cos(angle)*sigma_x + sin(angle)*sigma_y, a +-1-valued qubit observable."""
    return math.cos(angle) * _SX + math.sin(angle) * _SY


def ghz_optimal_settings() -> tuple[np.ndarray, ...]:
    """Settings (A, A', B, B', C, C') that push GHZ to the quantum maximum."""
    return (
        equatorial_observable(0.0),
        equatorial_observable(math.pi / 2),
        equatorial_observable(0.0),
        equatorial_observable(math.pi / 2),
        equatorial_observable(-math.pi / 4),
        equatorial_observable(math.pi / 4),
    )


def _check_observable(obs: np.ndarray, name: str) -> np.ndarray:
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (2, 2):
        raise ValueError(f"setting {name} must be a 2x2 matrix")
    if np.max(np.abs(obs - obs.conj().T)) > ATOL:
        raise ValueError(f"setting {name} is not Hermitian")
    if abs(np.trace(obs)) > ATOL:
        raise ValueError(f"setting {name} is not traceless")
    if np.max(np.abs(obs @ obs - np.eye(2))) > ATOL:
        raise ValueError(f"setting {name} does not square to the identity")
    return obs


def svetlichny_value(state: PureState, settings) -> float:
    """Value of the hybrid nonlocality functional on a three-qubit pure state.

    ``settings`` lists six dichotomic observables (A, A', B, B', C, C'), one
    primed and one unprimed per party.  Values above
    ``SVETLICHNY_CLASSICAL_BOUND`` rule out any bi-local hidden-variable
    model; quantum states cannot exceed ``SVETLICHNY_QUANTUM_BOUND``.
    """
    if state.dims.dims != (2, 2, 2):
        raise ValueError("the functional is defined for three qubits")
    if state.unnormalized:
        raise ValueError("normalize the state first")
    if len(settings) != 6:
        raise ValueError("six settings are required: A, A', B, B', C, C'")
    names = ("A", "A'", "B", "B'", "C", "C'")
    a0, a1, b0, b1, c0, c1 = (
        _check_observable(o, n) for o, n in zip(settings, names)
    )
    psi = state.amplitudes

    def corr(x, y, z) -> float:
        op = np.kron(np.kron(x, y), z)
        return float(np.real(np.vdot(psi, op @ psi)))

    value = (
        corr(a0, b0, c0)
        + corr(a0, b0, c1)
        + corr(a0, b1, c0)
        - corr(a0, b1, c1)
        + corr(a1, b0, c0)
        - corr(a1, b0, c1)
        - corr(a1, b1, c0)
        - corr(a1, b1, c1)
    )
    return value
