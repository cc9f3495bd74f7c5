"""Command-line harness emitting reproducible protocol reports.

Every subcommand writes a single artifact (JSON, or CSV for scan tables)
that embeds a manifest with the fully resolved configuration, seed, tool
version and timestamp: re-running the same invocation reproduces the output
byte for byte.  Floats are serialized with 17 significant digits so doubles
round-trip losslessly; complex amplitudes appear as [re, im] pairs.

Exit codes: 0 success, 2 usage or domain error, 3 internal invariant
violation.  The seed resolves from ``--seed``, then the ``GME_SEED``
environment variable, then 42.  The manifest timestamp defaults to the fixed
epoch string (for byte-identical artifacts); set ``SOURCE_DATE_EPOCH`` or
pass ``--timestamp`` to stamp a real time.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .distill import distill_pipeline
from .entanglement import (
    SVETLICHNY_CLASSICAL_BOUND,
    SVETLICHNY_QUANTUM_BOUND,
    BipartitionReport,
    certify_entangled_all_cuts,
    certify_gme_pure,
    equatorial_observable,
    svetlichny_value,
)
from .protocols import (
    MonteCarloSummary,
    ProtocolConfig,
    ProtocolReport,
    build_prop1_example,
    build_prop1_general,
    build_prop2_state,
    build_prop3_state,
    build_sigma,
    build_sigma_prime,
    merge_chain_to_ghz,
    monte_carlo,
    normalize_schmidt,
    run_prop1_step,
    run_prop2,
    run_prop3,
    sigma_scan,
)
from .qcore import (
    DensityOperator,
    InvariantError,
    PartyDims,
    PureState,
    basis_ket,
    bell_pair,
    fidelity_pure,
    ghz_state,
    ket,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3

SCHEMA_VERSION = 1
DEFAULT_SEED = 42
DEFAULT_SHOTS = 100_000
#: Fixed manifest timestamp used when no explicit time source is given.
EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"

_DEFAULT_ANGLES = (0.0, math.pi / 2, 0.0, math.pi / 2, -math.pi / 4, math.pi / 4)


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------


def format_float(value: float) -> str:
    """17-significant-digit decimal form, enough to round-trip any double."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("cannot serialize non-finite numbers")
    return format(value, ".17g")


def _is_scalar(obj) -> bool:
    return obj is None or isinstance(obj, (bool, str, int, float, np.integer))


def _render(obj, indent: int) -> str:
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        if all(_is_scalar(i) for i in items):
            return "[" + ", ".join(_render(i, 0) for i in items) + "]"
        inner = ",\n".join(pad + "  " + _render(i, indent + 2) for i in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            pad + "  " + json.dumps(str(k)) + ": " + _render(v, indent + 2)
            for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} values")


def render_json(obj) -> str:
    return _render(obj, 0) + "\n"


def _render_compact(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ",".join(
            json.dumps(str(k)) + ":" + _render_compact(v) for k, v in obj.items()
        ) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_render_compact(i) for i in obj) + "]"
    return _render(obj, 0)


# ---------------------------------------------------------------------------
# state files
# ---------------------------------------------------------------------------


def _complex_pairs(values) -> list[list[float]]:
    flat = np.asarray(values, dtype=complex).reshape(-1)
    return [[float(v.real), float(v.imag)] for v in flat]


def state_to_payload(state: PureState | DensityOperator) -> dict:
    """State-file form: dims, kind, and row-major [re, im] pairs."""
    dims = [int(d) for d in state.dims.dims]
    if isinstance(state, PureState):
        return {"dims": dims, "kind": "pure", "amplitudes": _complex_pairs(state.amplitudes)}
    return {"dims": dims, "kind": "density", "matrix": _complex_pairs(state.matrix)}


def _pairs_to_array(pairs, expected: int, what: str) -> np.ndarray:
    if not isinstance(pairs, list) or len(pairs) != expected:
        raise ValueError(f"{what} must be a list of {expected} [re, im] pairs")
    out = np.empty(expected, dtype=complex)
    for i, pair in enumerate(pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"{what}[{i}] is not an [re, im] pair")
        out[i] = complex(float(pair[0]), float(pair[1]))
    return out


def state_from_payload(data: dict) -> PureState | DensityOperator:
    if not isinstance(data, dict):
        raise ValueError("state file must contain a JSON object")
    try:
        dims = tuple(int(d) for d in data["dims"])
        kind = data["kind"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"state file is missing a valid field: {exc}") from exc
    total = int(np.prod(dims)) if dims else 0
    if kind == "pure":
        if "amplitudes" not in data:
            raise ValueError("pure state files need an 'amplitudes' field")
        amps = _pairs_to_array(data["amplitudes"], total, "amplitudes")
        return PureState(PartyDims(dims), amps)
    if kind == "density":
        if "matrix" not in data:
            raise ValueError("density state files need a 'matrix' field")
        mat = _pairs_to_array(data["matrix"], total * total, "matrix")
        return DensityOperator(PartyDims(dims), mat.reshape(total, total))
    raise ValueError(f"unknown state kind {kind!r}; expected 'pure' or 'density'")


def load_state_file(path: str) -> PureState | DensityOperator:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return state_from_payload(data)


def save_state_file(path: str, state: PureState | DensityOperator) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_json(state_to_payload(state)))


def schema_path() -> Path:
    """Location of the JSON schema every report envelope validates against."""
    return Path(__file__).parent / "schemas" / "report-v1.json"


# ---------------------------------------------------------------------------
# manifest plumbing
# ---------------------------------------------------------------------------


def resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("GME_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"GME_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def resolve_timestamp(value) -> str:
    if value is not None:
        return str(value)
    env = os.environ.get("SOURCE_DATE_EPOCH")
    if env is not None:
        try:
            epoch = int(env)
        except ValueError:
            raise ValueError(f"SOURCE_DATE_EPOCH must be an integer, got {env!r}") from None
        moment = datetime.fromtimestamp(epoch, tz=timezone.utc)
        return moment.strftime("%Y-%m-%dT%H:%M:%SZ")
    return EPOCH_TIMESTAMP


def make_manifest(subcommand: str, config: dict, seed: int, timestamp: str) -> dict:
    return {
        "subcommand": subcommand,
        "config": config,
        "seed": int(seed),
        "version": __version__,
        "timestamp": timestamp,
    }


def envelope(manifest: dict, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "manifest": manifest, "payload": payload}


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# payload pieces
# ---------------------------------------------------------------------------


def _is_gme(report: BipartitionReport) -> bool:
    return all(r.schmidt_rank is not None and r.schmidt_rank >= 2 for r in report.records)


def certificate_payload(report: BipartitionReport, is_gme: bool | None) -> dict:
    return {
        "n_parties": int(report.n_parties),
        "cuts": [
            {
                "cut": rec.cut.label,
                "negativity": float(rec.negativity),
                "schmidt_rank": None if rec.schmidt_rank is None else int(rec.schmidt_rank),
            }
            for rec in report.records
        ],
        "all_cuts_entangled": report.all_cuts_entangled,
        "min_negativity": float(report.min_negativity),
        "is_gme": is_gme,
    }


def run_report_payload(rep: ProtocolReport) -> dict:
    out: dict = {
        "protocol": rep.protocol,
        "success": rep.success,
        "copies_consumed": int(rep.copies_consumed),
        "analytic_success_prob": (
            None if rep.analytic_success_prob is None else float(rep.analytic_success_prob)
        ),
        "steps": [
            {
                "copy": int(s.copy_index),
                "party": s.acting_party,
                "measurement": s.measurement,
                "outcome": int(s.outcome_index),
                "probability": float(s.probability),
                "accepted": s.accepted,
            }
            for s in rep.steps
        ],
    }
    if rep.final_state is not None:
        out["final_state"] = state_to_payload(rep.final_state)
        out["certificates"] = certificate_payload(rep.certificates, _is_gme(rep.certificates))
    else:
        out["final_state"] = None
        out["certificates"] = None
    return out


def mc_payload(summary: MonteCarloSummary) -> dict:
    return {
        "shots": int(summary.shots),
        "seed": int(summary.seed),
        "branches": [
            {
                "label": b.label,
                "probability": float(b.probability),
                "frequency": float(b.frequency),
                "success": b.success,
                "copies": int(b.copies),
            }
            for b in summary.branches
        ],
        "success_rate": float(summary.success_rate),
        "exact_success_prob": float(summary.exact_success_prob),
        "mean_copies_consumed": float(summary.mean_copies_consumed),
    }


# ---------------------------------------------------------------------------
# flag parsing helpers
# ---------------------------------------------------------------------------


def _parse_floats(text: str, name: str) -> list[float]:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"{name} must be a non-empty comma-separated list of numbers")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"{name} contains a non-numeric entry: {text!r}") from None


def _parse_schmidt(text, n_expected: int | None, name: str = "--schmidt"):
    if text is None:
        return None
    vals = _parse_floats(text, name)
    if n_expected is not None and len(vals) != n_expected:
        raise ValueError(f"{name} expects {n_expected} values, got {len(vals)}")
    return normalize_schmidt(vals)


def _parse_weights(text) -> tuple[float, float, float]:
    if text is None:
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    vals = _parse_floats(text, "--weights")
    if len(vals) != 3 or any(v <= 0 for v in vals):
        raise ValueError("--weights expects three positive values")
    total = sum(vals)
    return tuple(v / total for v in vals)


# ---------------------------------------------------------------------------
# builtin states
# ---------------------------------------------------------------------------

_BUILTIN_NAMES = (
    "ghz3", "ghz4", "phi+", "product3", "merged-ghz3",
    "prop1", "prop2", "prop3", "sigma",
)


def _builtin_state(name: str, p: float, schmidt_text, weights_text):
    name = name.lower()
    if name == "ghz3":
        return ghz_state(3)
    if name == "ghz4":
        return ghz_state(4)
    if name == "phi+":
        return bell_pair("phi+")
    if name == "product3":
        return basis_ket((2, 2, 2), (0, 0, 0))
    if name == "merged-ghz3":
        merged = merge_chain_to_ghz([bell_pair("phi+"), bell_pair("phi+")])
        return merged.branches[0].state
    if name == "prop1":
        return build_prop1_example(p)
    if name == "prop2":
        coeffs = _parse_schmidt(schmidt_text, 3) or normalize_schmidt([1.0, 1.0, 1.0])
        return build_prop2_state(coeffs, p)
    if name == "prop3":
        coeffs = _parse_schmidt(schmidt_text, 4) or normalize_schmidt([1.0] * 4)
        return build_prop3_state(coeffs, _parse_weights(weights_text))
    if name == "sigma":
        coeffs = _parse_schmidt(schmidt_text, 2)
        if coeffs is None or abs(coeffs[0] - coeffs[1]) <= 1e-12:
            return build_sigma(p)
        return build_sigma_prime(ket([coeffs[0], 0.0, 0.0, coeffs[1]], (2, 2)), p)
    raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(_BUILTIN_NAMES)}")


def _load_input_state(args, default_builtin: str | None = None):
    """Resolve --state-file / --builtin into a state plus a source record."""
    state_file = getattr(args, "state_file", None)
    builtin = getattr(args, "builtin", None)
    if state_file and builtin:
        raise ValueError("pass either --state-file or --builtin, not both")
    if state_file:
        return load_state_file(state_file), {"kind": "file", "path": str(state_file)}
    if builtin is None:
        if default_builtin is None:
            raise ValueError("one of --state-file or --builtin is required")
        builtin = default_builtin
    p = float(getattr(args, "p", 0.5) or 0.5)
    state = _builtin_state(builtin, p, getattr(args, "schmidt", None), getattr(args, "weights", None))
    source: dict = {"kind": "builtin", "name": builtin.lower()}
    if builtin.lower() in ("prop1", "prop2", "sigma"):
        source["p"] = p
    return state, source


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_prop1(args) -> int:
    seed = resolve_seed(args.seed)
    timestamp = resolve_timestamp(args.timestamp)
    p = float(args.p)
    rounds = int(args.rounds)
    custom = any(x is not None for x in (args.pair_ab, args.pair_bc, args.ref_a, args.ref_c))
    if custom:
        ab = _parse_schmidt(args.pair_ab, 2, "--pair-ab") or normalize_schmidt([1.0, 1.0])
        bc = _parse_schmidt(args.pair_bc, 2, "--pair-bc") or normalize_schmidt([1.0, 1.0])
        ref_a = int(args.ref_a) if args.ref_a is not None else 1
        ref_c = int(args.ref_c) if args.ref_c is not None else 0
        if ref_a not in (0, 1) or ref_c not in (0, 1):
            raise ValueError("--ref-a / --ref-c must be 0 or 1")
        rho = build_prop1_general(
            ket([ab[0], 0.0, 0.0, ab[1]], (2, 2)),
            basis_ket((2,), (ref_c,)),
            basis_ket((2,), (ref_a,)),
            ket([bc[0], 0.0, 0.0, bc[1]], (2, 2)),
            p,
        )
        family: dict | str = {
            "pair_ab": list(ab), "pair_bc": list(bc), "ref_a": ref_a, "ref_c": ref_c,
        }
        reference = basis_ket((2,), (ref_c,))
    else:
        rho = build_prop1_example(p)
        family = "standard"
        reference = basis_ket((2,), (0,))

    branches = run_prop1_step(rho, reference)
    selected = int(args.charlie_outcome) if args.charlie_outcome is not None else 0
    if selected not in (0, 1):
        raise ValueError("--charlie-outcome must be 0 or 1")

    phi_plus = bell_pair("phi+")
    branch_payload = []
    for br in branches:
        entry: dict = {
            "outcome": int(br.outcome_index),
            "probability": float(br.probability),
            "negativity": None if br.negativity is None else float(br.negativity),
            "entangled": br.entangled,
            "fidelity_phi_plus": (
                None if br.pair_state is None else float(fidelity_pure(br.pair_state, phi_plus))
            ),
        }
        branch_payload.append(entry)

    chosen = branches[selected]
    if chosen.pair_state is None:
        distill_block: dict = {"status": "no_support"}
    else:
        pipe = distill_pipeline(chosen.pair_state, rounds)
        distill_block = {
            "status": pipe.status,
            "filtered": pipe.filtered,
            "filter_probability": float(pipe.filter_probability),
            "trajectory": [[float(f), float(q)] for f, q in pipe.trajectory],
        }

    config = {
        "p": p,
        "rounds": rounds,
        "charlie_outcome": selected,
        "family": family,
    }
    payload = {
        "branches": branch_payload,
        "selected_outcome": selected,
        "selected_separable": (chosen.entangled is not None) and (not chosen.entangled),
        "distillation": distill_block,
    }
    manifest = make_manifest("prop1", config, seed, timestamp)
    emit(render_json(envelope(manifest, payload)), args.out)
    return EXIT_OK


def _run_activation(args, protocol: str) -> int:
    seed = resolve_seed(args.seed)
    timestamp = resolve_timestamp(args.timestamp)
    shots = int(args.shots)
    want_mc = not args.no_mc
    if protocol == "prop2":
        coeffs = _parse_schmidt(args.schmidt, 3)
        config_obj = ProtocolConfig(
            p=float(args.p), schmidt_coeffs=coeffs, shots=shots, seed=seed
        )
        rep = run_prop2(config_obj, postselect_success=True)
        config = {
            "p": config_obj.p,
            "schmidt": list(config_obj.coeffs_or_uniform(3)),
            "shots": shots,
            "mc": want_mc,
        }
    else:
        coeffs = _parse_schmidt(args.schmidt, 4)
        weights = _parse_weights(args.weights)
        config_obj = ProtocolConfig(
            weights=weights, schmidt_coeffs=coeffs, shots=shots, seed=seed
        )
        rep = run_prop3(config_obj, postselect_success=True)
        config = {
            "weights": list(weights),
            "schmidt": list(config_obj.coeffs_or_uniform(4)),
            "shots": shots,
            "mc": want_mc,
        }
    payload = {"run": run_report_payload(rep)}
    payload["monte_carlo"] = mc_payload(monte_carlo(protocol, config_obj)) if want_mc else None
    manifest = make_manifest(protocol, config, seed, timestamp)
    emit(render_json(envelope(manifest, payload)), args.out)
    return EXIT_OK


def cmd_prop2(args) -> int:
    return _run_activation(args, "prop2")


def cmd_prop3(args) -> int:
    return _run_activation(args, "prop3")


def cmd_sigma_scan(args) -> int:
    seed = resolve_seed(args.seed)
    timestamp = resolve_timestamp(args.timestamp)
    p_list = _parse_floats(args.p_list, "--p-list")
    n_max = int(args.n_max)
    shots = int(args.shots)
    rows = sigma_scan(p_list, n_max, shots, seed)
    config = {"p_list": p_list, "n_max": n_max, "shots": shots, "format": args.format}
    manifest = make_manifest("sigma-scan", config, seed, timestamp)
    if args.format == "json":
        payload = {
            "rows": [
                {
                    "p": float(r.p),
                    "n": int(r.n),
                    "analytic": float(r.analytic),
                    "empirical": float(r.empirical),
                    "abs_error": float(r.abs_error),
                }
                for r in rows
            ]
        }
        emit(render_json(envelope(manifest, payload)), args.out)
        return EXIT_OK
    lines = ["# manifest: " + _render_compact(manifest)]
    lines.append("p,n,analytic,empirical,abs_error")
    for r in rows:
        lines.append(
            ",".join(
                (
                    format_float(r.p),
                    str(int(r.n)),
                    format_float(r.analytic),
                    format_float(r.empirical),
                    format_float(r.abs_error),
                )
            )
        )
    emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    seed = resolve_seed(args.seed)
    timestamp = resolve_timestamp(args.timestamp)
    state, source = _load_input_state(args)
    if isinstance(state, PureState):
        is_gme, report = certify_gme_pure(state)
    else:
        is_gme, report = None, certify_entangled_all_cuts(state)
    config = {
        "source": source,
        "dims": [int(d) for d in state.dims.dims],
        "state_kind": "pure" if isinstance(state, PureState) else "density",
    }
    payload = certificate_payload(report, is_gme)
    manifest = make_manifest("certify", config, seed, timestamp)
    emit(render_json(envelope(manifest, payload)), args.out)
    return EXIT_OK


def cmd_svetlichny(args) -> int:
    seed = resolve_seed(args.seed)
    timestamp = resolve_timestamp(args.timestamp)
    state, source = _load_input_state(args, default_builtin="ghz3")
    if not isinstance(state, PureState):
        raise ValueError("the nonlocality functional needs a pure three-qubit state")
    if args.angles is not None:
        angles = _parse_floats(args.angles, "--angles")
        if len(angles) != 6:
            raise ValueError("--angles expects six values: A, A', B, B', C, C'")
        settings_source = "custom"
    else:
        angles = list(_DEFAULT_ANGLES)
        settings_source = "default"
    settings = [equatorial_observable(a) for a in angles]
    value = svetlichny_value(state, settings)
    config = {
        "source": source,
        "angles": [float(a) for a in angles],
        "settings_source": settings_source,
    }
    payload = {
        "value": float(value),
        "classical_bound": float(SVETLICHNY_CLASSICAL_BOUND),
        "quantum_bound": float(SVETLICHNY_QUANTUM_BOUND),
        "exceeds_classical": bool(value > SVETLICHNY_CLASSICAL_BOUND),
        "within_quantum": bool(value <= SVETLICHNY_QUANTUM_BOUND + 1e-9),
    }
    manifest = make_manifest("svetlichny", config, seed, timestamp)
    emit(render_json(envelope(manifest, payload)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None,
                     help="RNG seed (default: GME_SEED env var, else 42)")
    sub.add_argument("--timestamp", default=None,
                     help="manifest timestamp (default: fixed epoch, or SOURCE_DATE_EPOCH)")
    sub.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmesim",
        description="Protocols and certificates for activating genuine "
                    "multipartite entanglement from biseparable states.",
    )
    parser.add_argument("--version", action="version", version=f"gmesim {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p1 = sub.add_parser("prop1", help="single-step three-qubit protocol plus distillation")
    p1.add_argument("--p", type=float, default=0.5, help="mixture weight (default 0.5)")
    p1.add_argument("--rounds", type=int, default=3, help="distillation rounds (default 3)")
    p1.add_argument("--charlie-outcome", type=int, default=None, choices=(0, 1),
                    help="report this branch (default 0, the entangled one)")
    p1.add_argument("--pair-ab", default=None,
                    help="Schmidt coefficients a,b of a custom A-B pair")
    p1.add_argument("--pair-bc", default=None,
                    help="Schmidt coefficients a,b of a custom B-C pair")
    p1.add_argument("--ref-a", type=int, default=None, choices=(0, 1),
                    help="custom basis level for party A's reference")
    p1.add_argument("--ref-c", type=int, default=None, choices=(0, 1),
                    help="custom basis level for party C's reference")
    _add_common(p1)
    p1.set_defaults(func=cmd_prop1)

    p2 = sub.add_parser("prop2", help="two-copy three-qutrit activation")
    p2.add_argument("--p", type=float, default=0.5, help="mixture weight (default 0.5)")
    p2.add_argument("--schmidt", default=None,
                    help="three Schmidt coefficients (normalized; default uniform)")
    p2.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                    help=f"Monte Carlo shots (default {DEFAULT_SHOTS})")
    p2.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo block")
    _add_common(p2)
    p2.set_defaults(func=cmd_prop2)

    p3 = sub.add_parser("prop3", help="three-copy four-ququart activation")
    p3.add_argument("--weights", default=None,
                    help="three mixture weights (normalized; default uniform)")
    p3.add_argument("--schmidt", default=None,
                    help="four Schmidt coefficients (normalized; default uniform)")
    p3.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                    help=f"Monte Carlo shots (default {DEFAULT_SHOTS})")
    p3.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo block")
    _add_common(p3)
    p3.set_defaults(func=cmd_prop3)

    scan = sub.add_parser("sigma-scan", help="success-law table for the adaptive protocol")
    scan.add_argument("--p-list", default="0.1,0.3,0.5,0.7",
                      help="comma-separated per-copy rates (default 0.1,0.3,0.5,0.7)")
    scan.add_argument("--n-max", type=int, default=20, help="largest repeat budget (default 20)")
    scan.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                      help=f"samples per rate (default {DEFAULT_SHOTS})")
    scan.add_argument("--format", choices=("csv", "json"), default="csv",
                      help="output format (default csv)")
    _add_common(scan)
    scan.set_defaults(func=cmd_sigma_scan)

    cert = sub.add_parser("certify", help="negativity/Schmidt certificates for every cut")
    cert.add_argument("--state-file", default=None, help="JSON state file to certify")
    cert.add_argument("--builtin", default=None,
                      help=f"builtin state name ({', '.join(_BUILTIN_NAMES)})")
    cert.add_argument("--p", type=float, default=0.5,
                      help="mixture weight for parametrized builtins (default 0.5)")
    cert.add_argument("--schmidt", default=None,
                      help="Schmidt coefficients for parametrized builtins")
    cert.add_argument("--weights", default=None, help="weights for the prop3 builtin")
    _add_common(cert)
    cert.set_defaults(func=cmd_certify)

    svet = sub.add_parser("svetlichny", help="tripartite nonlocality functional")
    svet.add_argument("--state-file", default=None, help="JSON state file (pure, three qubits)")
    svet.add_argument("--builtin", default=None,
                      help="builtin state name (default ghz3)")
    svet.add_argument("--p", type=float, default=0.5,
                      help="mixture weight for parametrized builtins")
    svet.add_argument("--schmidt", default=None,
                      help="Schmidt coefficients for parametrized builtins")
    svet.add_argument("--weights", default=None, help="weights for the prop3 builtin")
    svet.add_argument("--angles", default=None,
                      help="six equatorial angles A,A',B,B',C,C' (default: optimal)")
    _add_common(svet)
    svet.set_defaults(func=cmd_svetlichny)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"gmesim: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"gmesim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # no exit codes beyond 0/2/3
        print(f"gmesim: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
