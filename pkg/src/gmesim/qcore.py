"""Dense state-vector and density-operator arithmetic on multiparty systems.

A system is a tensor product of finite-dimensional parties.  Party 0 is the
most significant index: the amplitude for basis label ``(i0, i1, ..., ik)``
sits at flat index ``i0*d1*...*dk + i1*d2*...*dk + ... + ik``, which is the
ordering produced by chained ``numpy.kron``.

Everything here is dense and immutable: each operation returns new values and
never mutates its inputs, so values can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Tolerance for structural invariants (normalization, hermiticity, ...).
ATOL = 1e-9

#: Outcomes with probability at or below this threshold are pruned to null.
PRUNE_ATOL = 1e-12

#: Default cap on the total Hilbert-space dimension, enforced at construction.
DIM_CAP = 4096

#: Letters used for party labels in reports ("A|BC" style).
PARTY_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class InvariantError(RuntimeError):
    """An internal consistency check failed.

    This signals a defect in the library (or numerically impossible input
    slipping past validation), not a bad argument from the caller.
    """


def _frozen_array(data, shape=None) -> np.ndarray:
    out = np.array(data, dtype=complex)
    if shape is not None:
        out = out.reshape(shape)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartyDims:
    """Ordered local dimensions of the parties.

    ``cap`` bounds the total dimension and exists so that callers who really
    need a larger dense space can opt in explicitly.
    """

    dims: tuple[int, ...]
    cap: int = field(default=DIM_CAP, compare=False, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) == 0:
            raise ValueError("at least one party is required")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        if math.prod(dims) > self.cap:
            raise ValueError(
                f"total dimension {math.prod(dims)} exceeds the cap {self.cap}"
            )

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def letter(self, party: int) -> str:
        return PARTY_LETTERS[party]


def _as_party_dims(dims) -> PartyDims:
    if isinstance(dims, PartyDims):
        return dims
    return PartyDims(tuple(dims))


@dataclass(frozen=True)
class PureState:
    """State vector over ``dims``.

    ``unnormalized=True`` marks intermediate postselected vectors; normalized
    states must have unit Euclidean norm within ``ATOL``.
    """

    dims: PartyDims
    amplitudes: np.ndarray
    unnormalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_party_dims(self.dims))
        amps = _frozen_array(self.amplitudes).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if amps.size != self.dims.total:
            raise ValueError(
                f"amplitude vector has length {amps.size}, expected {self.dims.total}"
            )
        if not self.unnormalized and abs(self.norm() - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm={self.norm()!r})")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per party."""
        return self.amplitudes.reshape(self.dims.dims)

    def density(self) -> DensityOperator:
        if self.unnormalized:
            raise ValueError("normalize the state before forming a density operator")
        return DensityOperator(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: PureState) -> complex:
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive-semidefinite operator over ``dims``."""

    dims: PartyDims
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_party_dims(self.dims))
        mat = _frozen_array(self.matrix)
        object.__setattr__(self, "matrix", mat)
        d = self.dims.total
        if mat.shape != (d, d):
            raise ValueError(f"matrix has shape {mat.shape}, expected {(d, d)}")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        low = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])
        if low < -ATOL:
            raise ValueError(f"matrix has negative eigenvalue {low!r}")

    def tensor_view(self) -> np.ndarray:
        """Matrix reshaped to row axes then column axes, one per party."""
        return self.matrix.reshape(self.dims.dims * 2)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Complete set of orthogonal projectors on the joint space of some parties."""

    target_parties: tuple[int, ...]
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        targets = tuple(int(t) for t in self.target_parties)
        object.__setattr__(self, "target_parties", targets)
        if len(set(targets)) != len(targets):
            raise ValueError("target parties must be distinct")
        if not self.projectors:
            raise ValueError("at least one projector is required")
        projs = tuple(_frozen_array(p) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        d = projs[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise ValueError("projectors must be square and equally sized")
            if np.max(np.abs(p - p.conj().T)) > ATOL:
                raise ValueError(f"projector {i} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > ATOL:
                raise ValueError(f"projector {i} is not idempotent")
            total += p
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(projs[i] @ projs[j])) > ATOL:
                    raise ValueError(f"projectors {i} and {j} are not orthogonal")
        if np.max(np.abs(total - np.eye(d))) > ATOL:
            raise ValueError("projectors do not sum to the identity")

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True)
class MeasurementOutcome:
    """One branch of a projective measurement.

    ``post_state`` is None when the branch probability is at or below the
    prune threshold.
    """

    outcome_index: int
    probability: float
    post_state: PureState | DensityOperator | None

    def __post_init__(self):
        if not (-ATOL <= self.probability <= 1.0 + ATOL):
            raise ValueError(f"probability {self.probability!r} outside [0, 1]")


State = PureState | DensityOperator


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------


def ket(amplitudes, dims) -> PureState:
    """Build a normalized pure state from an amplitude sequence."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    norm = np.linalg.norm(amps)
    if norm <= PRUNE_ATOL:
        raise ValueError("cannot normalize an (almost) zero vector")
    return PureState(_as_party_dims(dims), amps / norm)


def basis_ket(dims, levels) -> PureState:
    """Computational basis state |levels[0], levels[1], ...>."""
    pd = _as_party_dims(dims)
    levels = tuple(int(x) for x in levels)
    if len(levels) != pd.n:
        raise ValueError("one level per party is required")
    for lv, d in zip(levels, pd.dims):
        if not 0 <= lv < d:
            raise ValueError(f"level {lv} outside local dimension {d}")
    amps = np.zeros(pd.total, dtype=complex)
    amps[int(np.ravel_multi_index(levels, pd.dims))] = 1.0
    return PureState(pd, amps)


_BELL_SIGNS = {"phi+": (1, 1), "phi-": (1, -1), "psi+": (0, 1), "psi-": (0, -1)}


def bell_pair(kind: str = "phi+") -> PureState:
    """One of the four two-qubit Bell states."""
    if kind not in _BELL_SIGNS:
        raise ValueError(f"unknown Bell state {kind!r}")
    correlated, sign = _BELL_SIGNS[kind]
    amps = np.zeros(4, dtype=complex)
    if correlated:
        amps[0], amps[3] = 1.0, sign
    else:
        amps[1], amps[2] = 1.0, sign
    return PureState(PartyDims((2, 2)), amps / np.sqrt(2.0))


def bell_basis() -> list[np.ndarray]:
    """The four Bell vectors in the order phi+, phi-, psi+, psi-."""
    return [bell_pair(k).amplitudes.copy() for k in ("phi+", "phi-", "psi+", "psi-")]


def ghz_state(n_parties: int) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2) on ``n_parties`` qubits."""
    if n_parties < 2:
        raise ValueError("a GHZ-type state needs at least two parties")
    pd = PartyDims((2,) * n_parties)
    amps = np.zeros(pd.total, dtype=complex)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return PureState(pd, amps)


def level_group_measurement(target_party: int, dim: int, groups) -> ProjectiveMeasurement:
    """Projective measurement whose outcomes are groups of basis levels.

    Example: ``level_group_measurement(2, 3, [[0], [1, 2]])`` measures party 2
    of a qutrit with projectors |0><0| and |1><1| + |2><2|.
    """
    seen: set[int] = set()
    projectors = []
    for group in groups:
        p = np.zeros((dim, dim), dtype=complex)
        for lv in group:
            lv = int(lv)
            if lv in seen:
                raise ValueError(f"level {lv} appears in more than one group")
            if not 0 <= lv < dim:
                raise ValueError(f"level {lv} outside dimension {dim}")
            seen.add(lv)
            p[lv, lv] = 1.0
        projectors.append(p)
    if len(seen) != dim:
        raise ValueError("groups must cover every basis level exactly once")
    return ProjectiveMeasurement((target_party,), tuple(projectors))


def state_projector_measurement(target_party: int, reference: PureState) -> ProjectiveMeasurement:
    """Two-outcome measurement {|r><r|, 1 - |r><r|} on a single party."""
    if reference.dims.n != 1:
        raise ValueError("reference state must live on a single party")
    v = reference.amplitudes
    p0 = np.outer(v, v.conj())
    return ProjectiveMeasurement((target_party,), (p0, np.eye(v.size, dtype=complex) - p0))


# ---------------------------------------------------------------------------
# operator embedding
# ---------------------------------------------------------------------------


def _embed(op: np.ndarray, targets: tuple[int, ...], dims: PartyDims) -> np.ndarray:
    """Lift an operator on the listed parties to the full space.

    The operator's factor order matches the order in which ``targets`` are
    listed, which need not be sorted or contiguous.
    """
    n = dims.n
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"party index {t} out of range for {n} parties")
    tdim = math.prod(dims.dims[t] for t in targets)
    if op.shape != (tdim, tdim):
        raise ValueError(
            f"operator has shape {op.shape}, expected {(tdim, tdim)} for parties {targets}"
        )
    rest = [i for i in range(n) if i not in targets]
    rdim = math.prod([dims.dims[i] for i in rest], start=1)
    big = np.kron(op, np.eye(rdim, dtype=complex))
    order = list(targets) + rest  # party owning each current axis
    axes_dims = [dims.dims[i] for i in order]
    big = big.reshape(axes_dims + axes_dims)
    big = np.moveaxis(big, list(range(n)), order)
    big = np.moveaxis(big, [n + k for k in range(n)], [n + o for o in order])
    return big.reshape(dims.total, dims.total)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def tensor(left: State, right: State) -> State:
    """Tensor product; both operands must be the same kind of state."""
    if isinstance(left, PureState) and isinstance(right, PureState):
        dims = PartyDims(left.dims.dims + right.dims.dims)
        amps = np.kron(left.amplitudes, right.amplitudes)
        return PureState(dims, amps, unnormalized=left.unnormalized or right.unnormalized)
    if isinstance(left, DensityOperator) and isinstance(right, DensityOperator):
        dims = PartyDims(left.dims.dims + right.dims.dims)
        return DensityOperator(dims, np.kron(left.matrix, right.matrix))
    raise ValueError("tensor requires two states of the same kind")


def mix(terms) -> DensityOperator:
    """Convex mixture of density operators.

    ``terms`` is a sequence of (weight, DensityOperator); weights must be
    positive and sum to one within tolerance.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("mix of zero terms")
    weights = [float(w) for w, _ in terms]
    if any(w <= 0 for w in weights):
        raise ValueError("mixture weights must be positive")
    if abs(sum(weights) - 1.0) > ATOL:
        raise ValueError(f"mixture weights sum to {sum(weights)!r}, expected 1")
    dims = terms[0][1].dims
    acc = np.zeros((dims.total, dims.total), dtype=complex)
    for w, rho in terms:
        if not isinstance(rho, DensityOperator):
            raise ValueError("mix expects DensityOperator terms")
        if rho.dims != dims:
            raise ValueError("all mixture terms must share the same party structure")
        acc += w * rho.matrix
    return DensityOperator(dims, acc)


def partial_trace(rho: DensityOperator, discard) -> DensityOperator:
    """Trace out the listed parties, keeping the remaining ones in order."""
    discard = sorted({int(i) for i in discard})
    n = rho.dims.n
    if any(i < 0 or i >= n for i in discard):
        raise ValueError("discard index out of range")
    if not discard:
        raise ValueError("nothing to trace out")
    if len(discard) == n:
        raise ValueError("cannot trace out every party")
    keep = [i for i in range(n) if i not in discard]
    t = rho.tensor_view()
    row = list(range(n))
    col = [i if i in discard else n + i for i in range(n)]
    reduced = np.einsum(t, row + col, keep + [n + i for i in keep])
    new_dims = PartyDims(tuple(rho.dims.dims[i] for i in keep))
    return DensityOperator(new_dims, reduced.reshape(new_dims.total, new_dims.total))


def measure(state: State, measurement: ProjectiveMeasurement) -> list[MeasurementOutcome]:
    """Apply a projective measurement and return every outcome branch.

    Returns one ``MeasurementOutcome`` per projector, with renormalized
    post-measurement states.  Branches with probability <= the prune
    threshold carry ``post_state=None``.  The probabilities must sum to one
    within tolerance or an ``InvariantError`` is raised.
    """
    if isinstance(state, PureState) and state.unnormalized:
        raise ValueError("normalize the state before measuring")
    dims = state.dims
    outcomes: list[MeasurementOutcome] = []
    total = 0.0
    for idx, proj in enumerate(measurement.projectors):
        big = _embed(proj, measurement.target_parties, dims)
        if isinstance(state, PureState):
            v = big @ state.amplitudes
            prob = float(np.real(np.vdot(v, v)))
            post: State | None = None
            if prob > PRUNE_ATOL:
                post = PureState(dims, v / math.sqrt(prob))
        else:
            sub = big @ state.matrix @ big
            prob = float(np.real(np.trace(sub)))
            post = None
            if prob > PRUNE_ATOL:
                post = DensityOperator(dims, (sub + sub.conj().T) / (2.0 * prob))
        prob = min(max(prob, 0.0), 1.0)
        total += prob
        outcomes.append(MeasurementOutcome(idx, prob, post))
    if abs(total - 1.0) > ATOL:
        raise InvariantError(f"measurement probabilities sum to {total!r}")
    return outcomes


def apply_local_unitary(state: State, unitary, target_parties) -> State:
    """Apply a unitary supported on the listed parties."""
    u = np.asarray(unitary, dtype=complex)
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > ATOL:
        raise ValueError("operator is not unitary within tolerance")
    targets = tuple(int(t) for t in target_parties)
    big = _embed(u, targets, state.dims)
    if isinstance(state, PureState):
        return PureState(state.dims, big @ state.amplitudes, unnormalized=state.unnormalized)
    return DensityOperator(state.dims, big @ state.matrix @ big.conj().T)


def relabel_subspace(state: State, party: int, basis_map: dict, new_dim: int) -> State:
    """Rename basis levels of one party and shrink (or grow) its dimension.

    ``basis_map`` maps old levels to new levels and must be injective; any
    population outside its domain must be negligible (below the prune
    threshold), otherwise the relabeling would lose weight.
    """
    n = state.dims.n
    if not 0 <= party < n:
        raise ValueError("party index out of range")
    old_dim = state.dims.dims[party]
    new_dim = int(new_dim)
    if new_dim < 2:
        raise ValueError("new dimension must be >= 2")
    items = [(int(a), int(b)) for a, b in basis_map.items()]
    if len({b for _, b in items}) != len(items):
        raise ValueError("basis map must be injective")
    for a, b in items:
        if not 0 <= a < old_dim:
            raise ValueError(f"source level {a} outside dimension {old_dim}")
        if not 0 <= b < new_dim:
            raise ValueError(f"target level {b} outside dimension {new_dim}")
    mapped = {a for a, _ in items}
    unmapped = [lv for lv in range(old_dim) if lv not in mapped]

    isometry = np.zeros((new_dim, old_dim), dtype=complex)
    for a, b in items:
        isometry[b, a] = 1.0

    new_dims = PartyDims(
        tuple(new_dim if i == party else d for i, d in enumerate(state.dims.dims))
    )
    if isinstance(state, PureState):
        t = state.tensor_view()
        if unmapped:
            lost = float(np.sum(np.abs(np.take(t, unmapped, axis=party)) ** 2))
            if lost > PRUNE_ATOL:
                raise ValueError(
                    f"population {lost!r} outside the relabeled subspace on party {party}"
                )
        out = np.moveaxis(np.tensordot(isometry, t, axes=([1], [party])), 0, party)
        return PureState(new_dims, out.reshape(-1), unnormalized=state.unnormalized)

    t = state.tensor_view()
    if unmapped:
        reduced = partial_trace(state, [i for i in range(n) if i != party])
        pops = np.real(np.diag(reduced.matrix))
        lost = float(np.sum(pops[unmapped]))
        if lost > PRUNE_ATOL:
            raise ValueError(
                f"population {lost!r} outside the relabeled subspace on party {party}"
            )
    out = np.moveaxis(np.tensordot(isometry, t, axes=([1], [party])), 0, party)
    out = np.moveaxis(np.tensordot(isometry.conj(), out, axes=([1], [n + party])), 0, n + party)
    return DensityOperator(new_dims, out.reshape(new_dims.total, new_dims.total))


def permute_parties(state: State, order) -> State:
    """Reorder parties so that output party ``i`` is input party ``order[i]``."""
    order = [int(i) for i in order]
    n = state.dims.n
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of 0..{n - 1}")
    new_dims = PartyDims(tuple(state.dims.dims[i] for i in order))
    if isinstance(state, PureState):
        t = state.tensor_view().transpose(order)
        return PureState(new_dims, t.reshape(-1), unnormalized=state.unnormalized)
    t = state.tensor_view().transpose(order + [n + i for i in order])
    return DensityOperator(new_dims, t.reshape(new_dims.total, new_dims.total))


def contract_party(state: PureState, party: int, reference) -> PureState:
    """Project one party onto a reference vector and drop that party.

    The inner-product contraction <reference|_party |state> renormalizes the
    remainder; it fails if the overlap is negligible.
    """
    if not isinstance(state, PureState):
        raise ValueError("contract_party operates on pure states")
    if state.dims.n < 2:
        raise ValueError("cannot contract the only party")
    vec = np.asarray(reference, dtype=complex).reshape(-1)
    if vec.size != state.dims.dims[party]:
        raise ValueError("reference vector does not match the party dimension")
    t = np.tensordot(vec.conj(), state.tensor_view(), axes=([0], [party]))
    weight = float(np.linalg.norm(t))
    if weight <= PRUNE_ATOL:
        raise ValueError("state has (almost) no overlap with the reference vector")
    new_dims = PartyDims(tuple(d for i, d in enumerate(state.dims.dims) if i != party))
    return PureState(new_dims, t.reshape(-1) / weight)


def fidelity_pure(rho: State, target: PureState) -> float:
    """Fidelity <target| rho |target> against a pure target state."""
    if target.unnormalized:
        raise ValueError("target must be normalized")
    if rho.dims != target.dims:
        raise ValueError("dimension mismatch between state and target")
    if isinstance(rho, PureState):
        if rho.unnormalized:
            raise ValueError("normalize the state before computing fidelity")
        return float(abs(np.vdot(target.amplitudes, rho.amplitudes)) ** 2)
    val = float(np.real(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)))
    return min(max(val, 0.0), 1.0)


def purity(rho: DensityOperator) -> float:
    """trace(rho^2), equal to 1 exactly for pure states."""
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def to_pure(rho: DensityOperator, atol: float = 1e-8) -> PureState:
    """Extract the state vector from a (numerically) rank-one density operator.

    The dominant eigenvector is phase-canonicalized so that its largest
    amplitude is real and positive, which keeps downstream reports stable.
    """
    vals, vecs = np.linalg.eigh(rho.matrix)
    top = float(vals[-1])
    if top < 1.0 - atol:
        raise ValueError(f"density operator is not pure (top eigenvalue {top!r})")
    vec = vecs[:, -1]
    pivot = int(np.argmax(np.abs(vec)))
    phase = vec[pivot] / abs(vec[pivot])
    vec = vec / phase
    return PureState(rho.dims, vec / np.linalg.norm(vec))
