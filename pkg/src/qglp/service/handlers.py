"""Endpoint handlers: parsed payloads in, (status, report) out.

Statuses: "ok" for positive results, "negative" for mathematically false
certifications, "indeterminate" for ties at working precision, "invalid"
for failed quantum-group validation, "inconsistent" when cross-checked
routes disagree.  Schema and domain problems raise and surface as 400.
"""

from __future__ import annotations

import numpy as np

from .. import io, selftest
from ..fdalgebra import Functional, lp_norm
from ..fourier import fourier_transform
from ..freeprod import FreeMap, FreeProductSpec, verify_free_improving
from ..improving import check_conditions, ritter_check, schur_check
from ..ergodic import cesaro_limit, hopf_image
from ..qgroup import (
    build_function_algebra,
    build_group_algebra,
    validate_quantum_group,
)


def _sanitize(obj):
    """Recursively convert numpy scalars/arrays for JSON encoding."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return io.encode_complex(obj)
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    return obj


def handle_validate(payload):
    structure = io.structure_from_json(payload)
    dim = structure.dim
    delta = io.decode_matrix(payload["delta"], shape=(dim * dim, dim))
    report = validate_quantum_group(structure, delta)
    status = "ok" if report.ok else "invalid"
    return status, _sanitize(report.as_dict())


def handle_haar(payload):
    qg = io.qgroup_from_json(payload)
    h = qg.haar
    report = {
        "name": qg.name,
        "blocks": list(qg.structure.block_dims),
        "covector": [io.encode_complex(z) for z in h.covector()],
        "density": io.element_to_json(h.density),
        "faithful": h.is_faithful_state(),
    }
    return "ok", _sanitize(report)


def handle_irreps(payload, include_entries=False):
    qg = io.qgroup_from_json(payload)
    report = {
        "name": qg.name,
        "dims": [u.dim for u in qg.irreps],
        "d_alphas": [u.d_alpha for u in qg.irreps],
        "dimension_count": sum(u.dim**2 for u in qg.irreps),
        "algebra_dim": qg.dim,
        "coaction_residual": qg.coaction_residual(),
        "unitarity_residual": qg.unitarity_residual(),
        "orthogonality_residual": qg.orthogonality_residual(),
        "q_matrix_max_deviation": max(
            float(np.max(np.abs(u.q_matrix - np.eye(u.dim)))) for u in qg.irreps
        ),
    }
    if include_entries:
        report["entries"] = [
            [
                [io.element_to_json(u.entry(i, j)) for j in range(u.dim)]
                for i in range(u.dim)
            ]
            for u in qg.irreps
        ]
    return "ok", _sanitize(report)


def handle_fourier(payload, input_payload, kind="element"):
    qg = io.qgroup_from_json(payload)
    element = io.element_from_json(input_payload, qg.structure)
    if kind == "state":
        target = Functional(element)
        coeffs = fourier_transform(qg, target)
        l2 = None
    elif kind == "element":
        coeffs = fourier_transform(qg, element)
        l2 = lp_norm(element, 2)
    else:
        raise io.SchemaError(f"kind must be 'element' or 'state', got {kind!r}")
    report = {
        "name": qg.name,
        "kind": kind,
        "coefficients": io.fourier_to_json(coeffs),
        "dual_l2_norm": coeffs.l2_norm(),
        "operator_norms": coeffs.operator_norms(),
    }
    if l2 is not None:
        report["element_l2_norm"] = l2
        report["plancherel_residual"] = abs(l2 - coeffs.l2_norm())
    return "ok", _sanitize(report)


def handle_improve(payload, state_payload, samples=10000, seed=0, tol=1e-9):
    qg = io.qgroup_from_json(payload)
    state = io.state_from_json(state_payload, qg.structure)
    report = check_conditions(qg, state, samples=samples, seed=seed, tol=tol)
    if not report.consistent:
        status = "inconsistent"
    elif report.indeterminate:
        status = "indeterminate"
    elif report.improving:
        status = "ok"
    else:
        status = "negative"
    out = report.as_dict()
    out["name"] = qg.name
    return status, _sanitize(out)


def handle_ritter(cayley, support):
    result = ritter_check(cayley, support)
    report = {
        "support": sorted(int(s) for s in support),
        "generates": bool(result),
        "group_order": len(cayley),
    }
    return ("ok" if result else "negative"), report


def handle_schur(cayley, values, cross_check_samples=2000, seed=0):
    qg = build_group_algebra(cayley)
    decoded = [io.decode_complex(v) for v in values]
    report = schur_check(
        qg, decoded, cross_check_samples=cross_check_samples, seed=seed
    )
    out = report.as_dict()
    out["values"] = [io.encode_complex(v) for v in report.values]
    return ("ok" if report.improving else "negative"), _sanitize(out)


def handle_cesaro(payload, state_payload, iterations=1000):
    qg = io.qgroup_from_json(payload)
    state = io.state_from_json(state_payload, qg.structure)
    result = cesaro_limit(qg, state, iterations=iterations)
    out = result.as_dict()
    out["name"] = qg.name
    out["limit"] = io.state_to_json(result.limit)
    return ("ok" if result.is_haar else "negative"), _sanitize(out)


def handle_hopf_image(payload, hom_payload, state_payload=None):
    qg = io.qgroup_from_json(payload)
    target, pi = io.hom_from_json(hom_payload, qg.structure)
    state = None
    if state_payload is not None:
        state = io.state_from_json(state_payload, target)
    data = hopf_image(qg, pi, target, target_state=state)
    out = data.as_dict()
    out["name"] = qg.name
    out["idempotent_state"] = io.state_to_json(data.eta)
    out["quotient"] = io.qgroup_to_json(data.quotient)
    return "ok", _sanitize(out)


def handle_freeprod_verify(components, maps, q="auto", max_len=3, samples=200, seed=0):
    comps = [io.component_from_json(c) for c in components]
    spec = FreeProductSpec(comps)
    mats = []
    for comp, m in zip(comps, maps):
        structure, matrix = io.map_from_json(m)
        if structure != comp.structure:
            raise io.SchemaError("map structure does not match its component")
        mats.append(matrix)
    if len(mats) != len(comps):
        raise io.SchemaError("need exactly one map per component")
    fmap = FreeMap.from_algebra_maps(spec, mats)
    q_val = None if q in ("auto", None) else int(q)
    report = verify_free_improving(
        spec, fmap, q=q_val, max_len=max_len, samples=samples, seed=seed
    )
    return ("ok" if report.ok else "inconsistent"), _sanitize(report.as_dict())


def handle_selftest(seed=0, samples=300):
    report = selftest.run_selftest(seed=seed, samples=samples)
    return ("ok" if report["ok"] else "error"), _sanitize(report)


def handle_build(cayley, kind="function", name=None):
    if kind == "function":
        qg = build_function_algebra(cayley, name=name)
    elif kind == "group":
        qg = build_group_algebra(cayley, name=name)
    else:
        raise io.SchemaError(f"unknown constructor kind {kind!r}")
    return "ok", _sanitize(io.qgroup_to_json(qg))
