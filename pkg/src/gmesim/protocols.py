"""LOCC protocols that turn biseparable multiparty states into GME states.

Each protocol consumes identically prepared copies of a mixed state one at a
time; parties may measure locally and broadcast outcomes, but no joint
operation ever touches two copies at once.  The runners below simulate single
stochastic executions step by step, while ``monte_carlo`` replays the exact
branch distribution of a protocol many times to expose its success statistics.

Protocol families (the names are the tool's protocol identifiers, also used
as CLI subcommands):

* ``prop1``   - three qubits, one projective step leaves two parties entangled;
* ``prop2``   - three qutrits, two copies, measured pairs merged into a
  GHZ-class state;
* ``sigma``   - qutrit/qubit/qutrit family where one copy always yields a Bell
  pair and an adaptive repeat phase hunts for the complementary pair;
* ``prop3``   - four ququarts, three copies, three merged pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import (
    Bipartition,
    BipartitionReport,
    ENTANGLED_NEG_ATOL,
    certify_gme_pure,
    negativity,
    schmidt,
)
from .qcore import (
    ATOL,
    DensityOperator,
    InvariantError,
    MeasurementOutcome,
    PartyDims,
    ProjectiveMeasurement,
    PureState,
    apply_local_unitary,
    basis_ket,
    bell_basis,
    bell_pair,
    contract_party,
    ghz_state,
    ket,
    level_group_measurement,
    measure,
    mix,
    partial_trace,
    permute_parties,
    relabel_subspace,
    state_projector_measurement,
    tensor,
    to_pure,
)

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
_MINUS = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

#: Parity projectors on a pair of qubits held by one party: correlated
#: (|00><00| + |11><11|) versus anticorrelated (|01><01| + |10><10|).
PARITY_CORRELATED = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
PARITY_ANTI = np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)


def _uniform_coeffs(n: int) -> tuple[float, ...]:
    return (1.0 / math.sqrt(n),) * n


def normalize_schmidt(coeffs) -> tuple[float, ...]:
    """Rescale positive coefficients so their squares sum to one."""
    vals = [float(c) for c in coeffs]
    if any(v <= 0 for v in vals):
        raise ValueError("Schmidt coefficients must be positive")
    norm = math.sqrt(sum(v * v for v in vals))
    return tuple(v / norm for v in vals)


# ---------------------------------------------------------------------------
# configuration and report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolConfig:
    """Shared knobs for the protocol runners and the Monte Carlo driver.

    ``schmidt_coeffs`` defaults to the uniform choice appropriate for each
    protocol when left as None.  ``first_outcome`` conditions the first copy
    of the adaptive runner on a fixed branch (0 keeps the A-B pair first,
    1 keeps B-C first); the repeat-phase success law is stated for branch 0.
    """

    p: float = 0.5
    weights: tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    schmidt_coeffs: tuple[float, ...] | None = None
    shots: int = 100_000
    seed: int = 42
    max_copies: int = 21
    first_outcome: int | None = None

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p={self.p!r} must lie strictly inside (0, 1)")
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(weights) != 3 or any(w <= 0 for w in weights):
            raise ValueError("weights must be three positive numbers")
        if abs(sum(weights) - 1.0) > ATOL:
            raise ValueError(f"weights sum to {sum(weights)!r}, expected 1")
        if self.schmidt_coeffs is not None:
            coeffs = tuple(float(c) for c in self.schmidt_coeffs)
            object.__setattr__(self, "schmidt_coeffs", coeffs)
            if any(c <= 0 for c in coeffs):
                raise ValueError("Schmidt coefficients must be positive")
            if abs(sum(c * c for c in coeffs) - 1.0) > ATOL:
                raise ValueError("squared Schmidt coefficients must sum to 1")
        if int(self.shots) < 1:
            raise ValueError("shots must be a positive integer")
        object.__setattr__(self, "shots", int(self.shots))
        if int(self.max_copies) < 1:
            raise ValueError("max_copies must be a positive integer")
        object.__setattr__(self, "max_copies", int(self.max_copies))
        object.__setattr__(self, "seed", int(self.seed))
        if self.first_outcome is not None and self.first_outcome not in (0, 1):
            raise ValueError("first_outcome must be 0, 1 or None")

    def coeffs_or_uniform(self, n: int) -> tuple[float, ...]:
        if self.schmidt_coeffs is None:
            return _uniform_coeffs(n)
        if len(self.schmidt_coeffs) != n:
            raise ValueError(
                f"this protocol expects {n} Schmidt coefficients, "
                f"got {len(self.schmidt_coeffs)}"
            )
        return self.schmidt_coeffs


@dataclass(frozen=True)
class StepRecord:
    """One local measurement event inside a protocol run."""

    copy_index: int
    acting_party: str
    measurement: str
    outcome_index: int
    probability: float
    accepted: bool

    def __post_init__(self):
        if not (-ATOL <= self.probability <= 1.0 + ATOL):
            raise ValueError("step probability outside [0, 1]")
        if self.accepted and self.probability <= 0.0:
            raise ValueError("an accepted step cannot have zero probability")


@dataclass(frozen=True)
class ProtocolReport:
    """Full record of one protocol execution."""

    protocol: str
    config: ProtocolConfig
    steps: tuple[StepRecord, ...]
    copies_consumed: int
    success: bool
    analytic_success_prob: float | None = None
    final_state: PureState | None = None
    certificates: BipartitionReport | None = None

    def __post_init__(self):
        if self.success and (self.final_state is None or self.certificates is None):
            raise ValueError("a successful run must carry a final state and certificates")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _require_entangled_pair(state: PureState, name: str) -> None:
    data = schmidt(state, Bipartition(frozenset({0}), 2))
    if data.rank < 2:
        raise ValueError(f"{name} must be entangled (Schmidt rank 2), got a product state")


def build_prop1_general(
    pair_ab: PureState, ref_c: PureState, ref_a: PureState, pair_bc: PureState, p: float
) -> DensityOperator:
    """Three-qubit rank-2 mixture of two one-sided entangled terms.

    Term one places the entangled ``pair_ab`` on parties A, B with C in the
    pure ``ref_c``; term two places ``pair_bc`` on B, C with A in ``ref_a``.
    Each term is separable in one cut, yet for p strictly inside (0, 1) the
    mixture is entangled in every bipartition.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if pair_ab.dims.dims != (2, 2) or pair_bc.dims.dims != (2, 2):
        raise ValueError("the entangled inputs must be two-qubit states")
    if ref_c.dims.dims != (2,) or ref_a.dims.dims != (2,):
        raise ValueError("the single-party inputs must be qubits")
    _require_entangled_pair(pair_ab, "the A-B input")
    _require_entangled_pair(pair_bc, "the B-C input")
    term1 = tensor(pair_ab, ref_c).density()
    term2 = tensor(ref_a, pair_bc).density()
    return mix([(p, term1), (1.0 - p, term2)])


def build_prop1_example(p: float = 0.5) -> DensityOperator:
    """The standard instance: phi+ on A,B with C at |0>; phi- on B,C with A at |1>."""
    return build_prop1_general(
        bell_pair("phi+"),
        basis_ket((2,), (0,)),
        basis_ket((2,), (1,)),
        bell_pair("phi-"),
        p,
    )


def _two_party_schmidt_state(coeffs, dim: int) -> PureState:
    amps = np.zeros(dim * dim, dtype=complex)
    for i, c in enumerate(coeffs):
        amps[i * dim + i] = c
    return PureState(PartyDims((dim, dim)), amps)


def build_prop2_state(schmidt_coeffs, p: float) -> DensityOperator:
    """Three-qutrit mixture: correlated A-B pair with C at |0>, or mirrored.

    ``schmidt_coeffs`` are the three positive coefficients of the shared
    two-qutrit state sum_i a_i |ii>.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    coeffs = tuple(float(c) for c in schmidt_coeffs)
    if len(coeffs) != 3 or any(c <= 0 for c in coeffs):
        raise ValueError("three positive Schmidt coefficients are required")
    if abs(sum(c * c for c in coeffs) - 1.0) > ATOL:
        raise ValueError("squared Schmidt coefficients must sum to 1")
    psi = _two_party_schmidt_state(coeffs, 3)
    zero = basis_ket((3,), (0,))
    term1 = tensor(psi, zero).density()
    term2 = tensor(zero, psi).density()
    return mix([(p, term1), (1.0 - p, term2)])


def build_sigma(p: float) -> DensityOperator:
    """Qutrit/qubit/qutrit mixture whose first measurement always pays off.

    With probability p, A sits at its flag level |2> while B-C share a Bell
    pair (embedded in levels 0, 1 of C); with probability 1-p, A-B share the
    Bell pair while C sits at its flag level.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    dims = PartyDims((3, 2, 3))
    bc = np.zeros(18, dtype=complex)
    bc[int(np.ravel_multi_index((2, 0, 0), dims.dims))] = 1.0 / math.sqrt(2.0)
    bc[int(np.ravel_multi_index((2, 1, 1), dims.dims))] = 1.0 / math.sqrt(2.0)
    ab = np.zeros(18, dtype=complex)
    ab[int(np.ravel_multi_index((0, 0, 2), dims.dims))] = 1.0 / math.sqrt(2.0)
    ab[int(np.ravel_multi_index((1, 1, 2), dims.dims))] = 1.0 / math.sqrt(2.0)
    return mix(
        [(p, PureState(dims, bc).density()), (1.0 - p, PureState(dims, ab).density())]
    )


def build_sigma_prime(shared_pair: PureState, p: float) -> DensityOperator:
    """Variant of ``build_sigma`` with a partially entangled shared pair.

    ``shared_pair`` must be an entangled, non-maximal two-qubit state; for the
    maximally entangled case use ``build_sigma``, whose output feeds the
    teleportation route directly.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if shared_pair.dims.dims != (2, 2):
        raise ValueError("the shared pair must be a two-qubit state")
    data = schmidt(shared_pair, Bipartition(frozenset({0}), 2))
    if data.rank < 2:
        raise ValueError("the shared pair must be entangled")
    if abs(data.coefficients[0] - data.coefficients[1]) <= ATOL:
        raise ValueError(
            "the shared pair is maximally entangled; use build_sigma for that case"
        )
    dims = PartyDims((3, 2, 3))
    pair = shared_pair.tensor_view()
    bc = np.zeros(18, dtype=complex)
    ab = np.zeros(18, dtype=complex)
    for i in range(2):
        for j in range(2):
            bc[int(np.ravel_multi_index((2, i, j), dims.dims))] = pair[i, j]
            ab[int(np.ravel_multi_index((i, j, 2), dims.dims))] = pair[i, j]
    return mix(
        [(p, PureState(dims, bc).density()), (1.0 - p, PureState(dims, ab).density())]
    )


def build_prop3_state(schmidt_coeffs, weights) -> DensityOperator:
    """Four-ququart rank-3 mixture, each term separable in a different cut.

    Term one entangles A-B (C, D at flag levels |0>), term two entangles B-C
    (A at |0>, D at |1>), term three entangles C-D (A, B at |1>).
    ``schmidt_coeffs`` are the four coefficients of sum_i a_i |ii>;
    ``weights`` are the three positive mixture weights.
    """
    coeffs = tuple(float(c) for c in schmidt_coeffs)
    if len(coeffs) != 4 or any(c <= 0 for c in coeffs):
        raise ValueError("four positive Schmidt coefficients are required")
    if abs(sum(c * c for c in coeffs) - 1.0) > ATOL:
        raise ValueError("squared Schmidt coefficients must sum to 1")
    w = tuple(float(x) for x in weights)
    if len(w) != 3 or any(x <= 0 for x in w):
        raise ValueError("three positive weights are required")
    if abs(sum(w) - 1.0) > ATOL:
        raise ValueError("weights must sum to 1")
    psi = _two_party_schmidt_state(coeffs, 4)
    zero = basis_ket((4,), (0,))
    one = basis_ket((4,), (1,))
    term1 = tensor(tensor(psi, zero), zero).density()
    term2 = tensor(tensor(zero, psi), one).density()
    term3 = tensor(tensor(one, one), psi).density()
    return mix([(w[0], term1), (w[1], term2), (w[2], term3)])


# ---------------------------------------------------------------------------
# single-step protocol (prop1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prop1Branch:
    """One outcome of the single projective step, restricted to the kept pair."""

    outcome_index: int
    probability: float
    pair_state: DensityOperator | None
    remaining_parties: tuple[int, int]
    negativity: float | None
    entangled: bool | None


def run_prop1_step(
    rho: DensityOperator, reference: PureState, party: int = 2
) -> list[Prop1Branch]:
    """Measure {|r><r|, 1-|r><r|} on one party and keep the other two.

    By default party C measures against its reference state; passing
    ``party=0`` runs the symmetric step where A measures and the B-C pair is
    kept.  Each branch reports the reduced two-party state together with its
    negativity certificate.
    """
    if rho.dims.n != 3:
        raise ValueError("this step runs on three-party states")
    if party not in (0, 2):
        raise ValueError("the measuring party must be an end of the chain (0 or 2)")
    outcomes = measure(rho, state_projector_measurement(party, reference))
    remaining = tuple(i for i in range(3) if i != party)
    cut = Bipartition(frozenset({0}), 2)
    branches = []
    for out in outcomes:
        if out.post_state is None:
            branches.append(
                Prop1Branch(out.outcome_index, out.probability, None, remaining, None, None)
            )
            continue
        pair = partial_trace(out.post_state, {party})
        neg = negativity(pair, cut)
        branches.append(
            Prop1Branch(
                out.outcome_index,
                out.probability,
                pair,
                remaining,
                neg,
                neg > ENTANGLED_NEG_ATOL,
            )
        )
    return branches


# ---------------------------------------------------------------------------
# pair merging
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MergeBranch:
    """One branch of the chain merge.

    ``parity_pattern`` holds one outcome per internal party (0 = correlated,
    1 = anticorrelated); ``sign_pattern`` likewise for the |+>/|-> readout of
    the qubit each internal party gives up.  ``corrections`` lists the local
    Pauli fixes already applied to ``state``.
    """

    parity_pattern: tuple[int, ...]
    sign_pattern: tuple[int, ...]
    probability: float
    state: PureState
    corrections: tuple[str, ...]


@dataclass(frozen=True)
class MergeResult:
    branches: tuple[MergeBranch, ...]
    pair_coefficients: tuple[tuple[float, float], ...]
    alignments: tuple[tuple[np.ndarray, np.ndarray], ...]


def _canonical_phase(state: PureState) -> PureState:
    amps = state.amplitudes
    pivot = int(np.argmax(np.abs(amps)))
    phase = amps[pivot] / abs(amps[pivot])
    return PureState(state.dims, amps / phase, unnormalized=state.unnormalized)


def _schmidt_align_pair(pair: PureState) -> tuple[PureState, tuple[float, float], tuple]:
    mat = pair.tensor_view()
    u, svals, vh = np.linalg.svd(mat)
    a, b = float(svals[0]), float(svals[1])
    if b <= ATOL:
        raise ValueError("merging needs entangled pairs, got a product state")
    aligned = PureState(PartyDims((2, 2)), np.diag([a, b]).reshape(-1))
    return aligned, (a, b), (u.conj().T, vh.conj())


def merge_chain_to_ghz(pairs) -> MergeResult:
    """Fuse a chain of two-qubit pairs into one (m+1)-party GHZ-class state.

    ``pairs[j]`` links party j to party j+1; every internal party holds one
    qubit of each neighboring pair.  Each pair is first rotated into Schmidt
    form a|00> + b|11| (alignment unitaries are returned).  Every internal
    party then measures the parity of its two qubits, reads its first qubit
    out in the |+>/|-> basis, and that qubit is dropped; the recorded Pauli
    corrections leave each branch as alpha|0...0> + beta|1...1>.  For pairs
    with equal coefficients every branch lands on the uniform GHZ state.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise ValueError("merging needs at least two pairs in the chain")
    aligned, coeffs, alignments = [], [], []
    for j, pair in enumerate(pairs):
        if not isinstance(pair, PureState) or pair.dims.dims != (2, 2):
            raise ValueError(f"pair {j} is not a two-qubit pure state")
        if pair.unnormalized:
            raise ValueError(f"pair {j} must be normalized")
        st, ab, uv = _schmidt_align_pair(pair)
        aligned.append(st)
        coeffs.append(ab)
        alignments.append(uv)

    m = len(pairs)
    joint = aligned[0]
    for st in aligned[1:]:
        joint = tensor(joint, st)

    # stage 1: parity measurements at every internal party
    parity_meas = [
        ProjectiveMeasurement((2 * i - 1, 2 * i), (PARITY_CORRELATED, PARITY_ANTI))
        for i in range(1, m)
    ]
    stage1: list[tuple[tuple[int, ...], float, PureState]] = [((), 1.0, joint)]
    for meas in parity_meas:
        nxt = []
        for pattern, prob, state in stage1:
            for out in measure(state, meas):
                if out.post_state is None:
                    continue
                nxt.append((pattern + (out.outcome_index,), prob * out.probability, out.post_state))
        stage1 = nxt

    # stage 2: |+>/|-> readout of each internal party's first qubit
    sign_meas = [
        ProjectiveMeasurement(
            (2 * i - 1,),
            (np.outer(_PLUS, _PLUS.conj()), np.outer(_MINUS, _MINUS.conj())),
        )
        for i in range(1, m)
    ]
    branches = []
    for parity_pattern, parity_prob, state in stage1:
        stage2: list[tuple[tuple[int, ...], float, PureState]] = [((), parity_prob, state)]
        for meas in sign_meas:
            nxt = []
            for pattern, prob, st in stage2:
                for out in measure(st, meas):
                    if out.post_state is None:
                        continue
                    nxt.append(
                        (pattern + (out.outcome_index,), prob * out.probability, out.post_state)
                    )
            stage2 = nxt

        # parity prefix decides which parties need a bit flip
        flips = [0]
        for o in parity_pattern:
            flips.append(flips[-1] ^ o)

        for sign_pattern, prob, st in stage2:
            # drop the measured qubits (descending axis order keeps indices valid)
            for i in range(m - 1, 0, -1):
                vec = _MINUS if sign_pattern[i - 1] else _PLUS
                st = contract_party(st, 2 * i - 1, vec)
            corrections = []
            for t in range(1, m + 1):
                if flips[min(t, m - 1)]:
                    st = apply_local_unitary(st, _X, (t,))
                    corrections.append(f"X@{t}")
            if sum(sign_pattern) % 2 == 1:
                st = apply_local_unitary(st, _Z, (0,))
                corrections.append("Z@0")
            branches.append(
                MergeBranch(
                    parity_pattern,
                    sign_pattern,
                    prob,
                    _canonical_phase(st),
                    tuple(corrections),
                )
            )

    total = sum(b.probability for b in branches)
    if abs(total - 1.0) > ATOL:
        raise InvariantError(f"merge branch probabilities sum to {total!r}")
    return MergeResult(tuple(branches), tuple(coeffs), tuple(alignments))


# ---------------------------------------------------------------------------
# teleportation
# ---------------------------------------------------------------------------

_BELL_CORRECTIONS = (np.eye(2, dtype=complex), _Z, _X, _Z @ _X)


def _contract_pair(state: PureState, party_a: int, party_b: int, ref: np.ndarray) -> PureState:
    """Project two parties jointly onto ``ref`` and drop both."""
    t = state.tensor_view()
    da = state.dims.dims[party_a]
    db = state.dims.dims[party_b]
    out = np.tensordot(ref.conj().reshape(da, db), t, axes=([0, 1], [party_a, party_b]))
    weight = float(np.linalg.norm(out))
    if weight <= 1e-12:
        raise ValueError("state has (almost) no overlap with the reference pair state")
    remaining = [d for i, d in enumerate(state.dims.dims) if i not in (party_a, party_b)]
    return PureState(PartyDims(tuple(remaining)), out.reshape(-1) / weight)


def teleport(
    state: PureState, input_party: int, resource: PureState, outcome: int | None = None
) -> PureState:
    """Teleport one qubit of ``state`` through a maximally entangled resource.

    ``resource`` must be the two-qubit phi+ state, ordered (sender half,
    receiver half); partially entangled resources are rejected, since exact
    relocation then fails; route those through ``merge_chain_to_ghz`` instead.
    The receiver's qubit takes over the teleported party's slot, so the
    output has the same party structure as the input.  With ``outcome=None``
    all four correction branches are computed and checked to agree; an
    explicit ``outcome`` selects a single branch.
    """
    if state.unnormalized:
        raise ValueError("normalize the state before teleporting")
    n = state.dims.n
    if not 0 <= input_party < n:
        raise ValueError("input party out of range")
    if state.dims.dims[input_party] != 2:
        raise ValueError("only qubit parties can be teleported")
    if not isinstance(resource, PureState) or resource.dims.dims != (2, 2):
        raise ValueError("the resource must be a two-qubit pure state")
    if abs(resource.overlap(bell_pair("phi+"))) ** 2 < 1.0 - ATOL:
        raise ValueError(
            "the resource is not maximally entangled; exact teleportation needs phi+ "
            "(for partially entangled pairs use merge_chain_to_ghz)"
        )

    joint = tensor(state, resource)  # parties 0..n-1, sender half n, receiver n+1
    basis = bell_basis()
    meas = ProjectiveMeasurement(
        (input_party, n), tuple(np.outer(v, v.conj()) for v in basis)
    )
    outs = measure(joint, meas)
    chosen = range(4) if outcome is None else [int(outcome)]
    results = []
    for k in chosen:
        out = outs[k]
        if out.post_state is None or abs(out.probability - 0.25) > ATOL:
            raise InvariantError(
                f"Bell outcome {k} has probability {out.probability!r}, expected 1/4"
            )
        post = apply_local_unitary(out.post_state, _BELL_CORRECTIONS[k], (n + 1,))
        post = _contract_pair(post, input_party, n, basis[k])
        # the receiver's qubit is the last axis; move it into the vacated slot
        t = np.moveaxis(post.tensor_view(), -1, input_party)
        results.append(_canonical_phase(PureState(state.dims, t.reshape(-1))))
    for r in results[1:]:
        if abs(r.overlap(results[0])) ** 2 < 1.0 - ATOL:
            raise InvariantError("teleportation branches disagree after correction")
    return results[0]


def distribute_via_teleportation(state: PureState, transfers, outcomes=None) -> PureState:
    """Send several qubits of a locally prepared state through Bell pairs.

    ``transfers`` lists (party index, resource pair) in the order the sends
    happen; ``outcomes`` optionally fixes the Bell outcome of each send.
    """
    transfers = list(transfers)
    if outcomes is None:
        outcomes = [None] * len(transfers)
    if len(outcomes) != len(transfers):
        raise ValueError("one outcome per transfer is required")
    current = state
    for (party, resource), out in zip(transfers, outcomes):
        current = teleport(current, party, resource, outcome=out)
    return current


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def _sample_index(rng: np.random.Generator, outcomes: list[MeasurementOutcome]) -> int:
    u = float(rng.random())
    acc = 0.0
    last_live = 0
    for out in outcomes:
        if out.probability > 0.0:
            last_live = out.outcome_index
        acc += out.probability
        if u < acc:
            return out.outcome_index
    return last_live


_QUTRIT_SPLIT = [[0], [1, 2]]  # flag level versus the entangled block
_QUQUART_SPLIT = [[0], [1], [2, 3]]


def _prop2_pair(post: DensityOperator, traced_party: int) -> PureState:
    pair = to_pure(partial_trace(post, {traced_party}))
    pair = relabel_subspace(pair, 0, {1: 0, 2: 1}, 2)
    return relabel_subspace(pair, 1, {1: 0, 2: 1}, 2)


def run_prop2(
    config: ProtocolConfig, rng: np.random.Generator | None = None, postselect_success: bool = False
) -> ProtocolReport:
    """Two-copy activation on three qutrits.

    Copy one: C measures {|0><0|, 1-|0><0|} and the second outcome leaves B-C
    in a pure entangled pair (A factors out).  Copy two: the mirrored step by
    A leaves an A-B pair.  Both pairs are relabeled onto qubits and merged at
    B into a three-party GHZ-class state.  With ``postselect_success`` the
    accepting branches are forced (their true probabilities are still
    recorded); otherwise outcomes are sampled.
    """
    coeffs = config.coeffs_or_uniform(3)
    rho = build_prop2_state(coeffs, config.p)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    block = coeffs[1] ** 2 + coeffs[2] ** 2
    analytic = (1.0 - config.p) * block * config.p * block
    steps: list[StepRecord] = []

    outs_c = measure(rho, level_group_measurement(2, 3, _QUTRIT_SPLIT))
    idx = 1 if postselect_success else _sample_index(rng, outs_c)
    steps.append(
        StepRecord(1, "C", "split {flag level 0} vs {levels 1,2} on C", idx,
                   outs_c[idx].probability, idx == 1)
    )
    if idx != 1:
        return ProtocolReport("prop2", config, tuple(steps), 1, False, analytic)
    pair_bc = _prop2_pair(outs_c[1].post_state, 0)

    outs_a = measure(rho, level_group_measurement(0, 3, _QUTRIT_SPLIT))
    idx = 1 if postselect_success else _sample_index(rng, outs_a)
    steps.append(
        StepRecord(2, "A", "split {flag level 0} vs {levels 1,2} on A", idx,
                   outs_a[idx].probability, idx == 1)
    )
    if idx != 1:
        return ProtocolReport("prop2", config, tuple(steps), 2, False, analytic)
    pair_ab = _prop2_pair(outs_a[1].post_state, 2)

    merged = merge_chain_to_ghz([pair_ab, pair_bc])
    probs = np.array([b.probability for b in merged.branches])
    bidx = int(rng.choice(len(merged.branches), p=probs / probs.sum()))
    branch = merged.branches[bidx]
    steps.append(
        StepRecord(2, "B", "pair merge: parity then +/- readout at B", bidx,
                   branch.probability, True)
    )
    final = branch.state
    _, certificates = certify_gme_pure(final)
    return ProtocolReport("prop2", config, tuple(steps), 2, True, analytic, final, certificates)


def analytic_Pn(p: float, n: int) -> float:
    """Probability that n repeat copies yield at least one success at rate p."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    n = int(n)
    if n < 0:
        raise ValueError("the number of copies cannot be negative")
    return 1.0 - (1.0 - p) ** n


def _sigma_state(config: ProtocolConfig) -> tuple[DensityOperator, bool]:
    coeffs = config.coeffs_or_uniform(2)
    maximal = abs(coeffs[0] - coeffs[1]) <= ATOL
    if maximal:
        return build_sigma(config.p), True
    return build_sigma_prime(ket([coeffs[0], 0.0, 0.0, coeffs[1]], (2, 2)), config.p), False


_SIGMA_SPLIT = [[0, 1], [2]]  # entangled block versus the flag level


def _sigma_pair(post: DensityOperator, traced: int) -> PureState:
    """Reduce a sigma-family branch to its two-qubit pair, qutrit leg relabeled."""
    pair = to_pure(partial_trace(post, {traced}))
    # exactly one leg of the kept pair is a qutrit; squeeze it onto a qubit
    for axis in (0, 1):
        if pair.dims.dims[axis] == 3:
            pair = relabel_subspace(pair, axis, {0: 0, 1: 1}, 2)
    return pair


def run_sigma_adaptive(
    config: ProtocolConfig, rng: np.random.Generator | None = None
) -> ProtocolReport:
    """Adaptive multi-copy runner for the sigma family.

    Copy one: A splits {levels 0,1} vs {flag 2}; either outcome leaves a
    maximally entangled pair (A-B or B-C), so the first copy always succeeds.
    Later copies: C performs the analogous split and keeps only the branch
    holding the pair that is still missing; each repeat copy succeeds with a
    fixed rate, so the chance of completing within n repeats is 1-(1-q)^n.
    On success, B either teleports two legs of a locally prepared GHZ state
    through the two pairs (maximal case) or merges the pairs directly.
    """
    rho, maximal = _sigma_state(config)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    steps: list[StepRecord] = []

    outs_a = measure(rho, level_group_measurement(0, 3, _SIGMA_SPLIT))
    first = config.first_outcome
    if first is None:
        first = _sample_index(rng, outs_a)
    elif outs_a[first].probability <= 0.0:
        raise ValueError("the conditioned first outcome has zero probability")
    steps.append(
        StepRecord(1, "A", "split {levels 0,1} vs {flag level 2} on A", first,
                   outs_a[first].probability, True)
    )
    if first == 0:
        have = "AB"
        pair_first = _sigma_pair(outs_a[0].post_state, 2)
        repeat_accept = 0  # C keeps the branch where B-C hold the pair
    else:
        have = "BC"
        pair_first = _sigma_pair(outs_a[1].post_state, 0)
        repeat_accept = 1

    outs_c = measure(rho, level_group_measurement(2, 3, _SIGMA_SPLIT))
    rate = outs_c[repeat_accept].probability
    analytic = 1.0 - (1.0 - rate) ** (config.max_copies - 1)

    pair_second = None
    copies = 1
    for _ in range(config.max_copies - 1):
        copies += 1
        idx = _sample_index(rng, outs_c)
        accepted = idx == repeat_accept
        steps.append(
            StepRecord(copies, "C", "split {levels 0,1} vs {flag level 2} on C", idx,
                       outs_c[idx].probability, accepted)
        )
        if accepted:
            traced = 0 if repeat_accept == 0 else 2
            pair_second = _sigma_pair(outs_c[idx].post_state, traced)
            break
    if pair_second is None:
        return ProtocolReport("sigma", config, tuple(steps), copies, False, analytic)

    pair_ab = pair_first if have == "AB" else pair_second
    pair_bc = pair_first if have == "BC" else pair_second
    if maximal:
        local = ghz_state(3)
        final = distribute_via_teleportation(
            local,
            [(0, permute_parties(pair_ab, (1, 0))), (2, pair_bc)],
        )
        steps.append(
            StepRecord(copies, "B", "teleport GHZ legs to A and C through both pairs",
                       0, 1.0, True)
        )
    else:
        merged = merge_chain_to_ghz([pair_ab, pair_bc])
        probs = np.array([b.probability for b in merged.branches])
        bidx = int(rng.choice(len(merged.branches), p=probs / probs.sum()))
        branch = merged.branches[bidx]
        final = branch.state
        steps.append(
            StepRecord(copies, "B", "pair merge: parity then +/- readout at B", bidx,
                       branch.probability, True)
        )
    _, certificates = certify_gme_pure(final)
    return ProtocolReport(
        "sigma", config, tuple(steps), copies, True, analytic, final, certificates
    )


def _prop3_pair(post: DensityOperator, traced: tuple[int, int]) -> PureState:
    pair = to_pure(partial_trace(post, set(traced)))
    pair = relabel_subspace(pair, 0, {2: 0, 3: 1}, 2)
    return relabel_subspace(pair, 1, {2: 0, 3: 1}, 2)


def run_prop3(
    config: ProtocolConfig, rng: np.random.Generator | None = None, postselect_success: bool = False
) -> ProtocolReport:
    """Three-copy activation on four ququarts.

    Each copy is interrogated by two parties with the three-outcome split
    {|0>}, {|1>}, {levels 2,3}; only double top-block outcomes are kept.
    Copy one leaves a C-D pair, copy two an A-B pair, copy three a B-C pair.
    The three pairs, relabeled onto qubits, are merged along the chain
    A-B-C-D into a four-party GHZ-class state.
    """
    coeffs = config.coeffs_or_uniform(4)
    rho = build_prop3_state(coeffs, config.weights)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    block = coeffs[2] ** 2 + coeffs[3] ** 2
    w = config.weights
    analytic = w[0] * w[1] * w[2] * block**3
    steps: list[StepRecord] = []

    plan = [  # copy index, (first measuring party, second), parties traced out
        (1, (2, 3), (0, 1)),
        (2, (0, 1), (2, 3)),
        (3, (1, 2), (0, 3)),
    ]
    letters = "ABCD"
    pairs: dict[int, PureState] = {}
    for copy_index, (first, second), traced in plan:
        state: DensityOperator | None = rho
        for party in (first, second):
            outs = measure(state, level_group_measurement(party, 4, _QUQUART_SPLIT))
            idx = 2 if postselect_success else _sample_index(rng, outs)
            steps.append(
                StepRecord(copy_index, letters[party],
                           "split {0} / {1} / {2,3} on " + letters[party], idx,
                           outs[idx].probability, idx == 2)
            )
            if idx != 2:
                return ProtocolReport(
                    "prop3", config, tuple(steps), copy_index, False, analytic
                )
            state = outs[2].post_state
        pairs[copy_index] = _prop3_pair(state, traced)

    merged = merge_chain_to_ghz([pairs[2], pairs[3], pairs[1]])  # A-B, B-C, C-D
    probs = np.array([b.probability for b in merged.branches])
    bidx = int(rng.choice(len(merged.branches), p=probs / probs.sum()))
    branch = merged.branches[bidx]
    steps.append(
        StepRecord(3, "BC", "chain merge: parity then +/- readout at B and C", bidx,
                   branch.probability, True)
    )
    final = branch.state
    _, certificates = certify_gme_pure(final)
    return ProtocolReport(
        "prop3", config, tuple(steps), 3, True, analytic, final, certificates
    )


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchStat:
    label: str
    probability: float
    frequency: float
    success: bool
    copies: int


@dataclass(frozen=True)
class MonteCarloSummary:
    """Empirical protocol statistics against the exact branch distribution."""

    protocol: str
    shots: int
    seed: int
    branches: tuple[BranchStat, ...]
    success_rate: float
    exact_success_prob: float
    mean_copies_consumed: float


def _prop1_tree(config: ProtocolConfig):
    rho = build_prop1_example(config.p)
    outs = measure(rho, state_projector_measurement(2, basis_ket((2,), (0,))))
    return [
        ("charlie=0 (pair kept)", outs[0].probability, True, 1),
        ("charlie=1 (separable)", outs[1].probability, False, 1),
    ]


def _prop2_tree(config: ProtocolConfig):
    coeffs = config.coeffs_or_uniform(3)
    rho = build_prop2_state(coeffs, config.p)
    q1 = measure(rho, level_group_measurement(2, 3, _QUTRIT_SPLIT))[1].probability
    q2 = measure(rho, level_group_measurement(0, 3, _QUTRIT_SPLIT))[1].probability
    return [
        ("reject@copy1", 1.0 - q1, False, 1),
        ("accept@copy1,reject@copy2", q1 * (1.0 - q2), False, 2),
        ("accept@copy1,accept@copy2", q1 * q2, True, 2),
    ]


def _prop3_tree(config: ProtocolConfig):
    coeffs = config.coeffs_or_uniform(4)
    rho = build_prop3_state(coeffs, config.weights)
    plan = [(1, (2, 3)), (2, (0, 1)), (3, (1, 2))]
    letters = "ABCD"
    leaves = []
    prefix_prob = 1.0
    state: DensityOperator = rho
    path = []
    for copy_index, parties in plan:
        for party in parties:
            outs = measure(state, level_group_measurement(party, 4, _QUQUART_SPLIT))
            accept = outs[2].probability
            reject = 1.0 - accept
            label = ",".join(path + [f"reject@{letters[party]}{copy_index}"])
            leaves.append((label, prefix_prob * reject, False, copy_index))
            path.append(f"accept@{letters[party]}{copy_index}")
            prefix_prob *= accept
            state = outs[2].post_state
        state = rho  # next copy is fresh
    leaves.append((",".join(path), prefix_prob, True, 3))
    return leaves


def _sigma_tree(config: ProtocolConfig):
    rho, _ = _sigma_state(config)
    outs_a = measure(rho, level_group_measurement(0, 3, _SIGMA_SPLIT))
    outs_c = measure(rho, level_group_measurement(2, 3, _SIGMA_SPLIT))
    firsts = (0, 1) if config.first_outcome is None else (config.first_outcome,)
    total_first = sum(outs_a[f].probability for f in firsts)
    repeats = config.max_copies - 1
    leaves = []
    for f in firsts:
        pf = outs_a[f].probability / total_first
        q = outs_c[0].probability if f == 0 else outs_c[1].probability
        name = "AB-first" if f == 0 else "BC-first"
        for k in range(1, repeats + 1):
            leaves.append(
                (f"{name},success@copy{k + 1}", pf * (1.0 - q) ** (k - 1) * q, True, k + 1)
            )
        leaves.append((f"{name},exhausted", pf * (1.0 - q) ** repeats, False, config.max_copies))
    return leaves


_TREES = {
    "prop1": _prop1_tree,
    "prop2": _prop2_tree,
    "prop3": _prop3_tree,
    "sigma": _sigma_tree,
}


def monte_carlo(
    protocol: str,
    config: ProtocolConfig,
    shots: int | None = None,
    seed: int | None = None,
) -> MonteCarloSummary:
    """Sample a protocol's exact branch distribution and summarize frequencies.

    The per-branch probabilities are computed once from the density-operator
    arithmetic; shots are then drawn from that distribution with a single
    seeded generator, so results are deterministic given (config, shots,
    seed) and independent of evaluation order.
    """
    if protocol not in _TREES:
        raise ValueError(
            f"unknown protocol {protocol!r}; expected one of {sorted(_TREES)}"
        )
    shots = config.shots if shots is None else int(shots)
    seed = config.seed if seed is None else int(seed)
    if shots < 1:
        raise ValueError("shots must be a positive integer")
    leaves = _TREES[protocol](config)
    probs = np.array([p for _, p, _, _ in leaves], dtype=float)
    if abs(probs.sum() - 1.0) > ATOL:
        raise InvariantError(f"branch probabilities sum to {probs.sum()!r}")
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(leaves), size=shots, p=probs / probs.sum())
    counts = np.bincount(draws, minlength=len(leaves))
    stats = tuple(
        BranchStat(label, float(prob), float(c) / shots, success, copies)
        for (label, prob, success, copies), c in zip(leaves, counts)
    )
    success_rate = float(sum(s.frequency for s in stats if s.success))
    exact = float(sum(s.probability for s in stats if s.success))
    mean_copies = float(sum(s.frequency * s.copies for s in stats))
    return MonteCarloSummary(protocol, shots, seed, stats, success_rate, exact, mean_copies)


@dataclass(frozen=True)
class ScanRow:
    """One row of the repeat-phase success-law scan."""

    p: float
    n: int
    analytic: float
    empirical: float

    @property
    def abs_error(self) -> float:
        return abs(self.analytic - self.empirical)


def sigma_scan(p_list, n_max: int, shots: int, seed: int) -> list[ScanRow]:
    """Empirical versus analytic success law of the adaptive repeat phase.

    For each rate p and each repeat budget n the empirical column estimates,
    from ``shots`` seeded samples, the probability that C's accepting branch
    arrives within n repeat copies; the per-copy rate is taken from the
    measurement arithmetic, not from the formula it is being tested against.
    Row n=0 has no repeat copies, hence probability zero.
    """
    p_list = [float(p) for p in p_list]
    if not p_list:
        raise ValueError("at least one value of p is required")
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max cannot be negative")
    if int(shots) < 1:
        raise ValueError("shots must be a positive integer")
    children = np.random.SeedSequence(int(seed)).spawn(len(p_list))
    rows = []
    for p, child in zip(p_list, children):
        rho = build_sigma(p)
        rate = measure(rho, level_group_measurement(2, 3, _SIGMA_SPLIT))[0].probability
        rng = np.random.default_rng(child)
        trials = rng.geometric(rate, size=int(shots))
        for n in range(n_max + 1):
            empirical = 0.0 if n == 0 else float(np.mean(trials <= n))
            rows.append(ScanRow(p, n, analytic_Pn(p, n), empirical))
    return rows
