"""Built-in invariant suites: one battery per module, reduced sample counts.

Exposed through the CLI/endpoint `selftest`; the pytest suite runs the same
invariants at full scale.
"""

from __future__ import annotations

import time

import numpy as np

from . import groups
from .fdalgebra import (
    BlockStructure,
    Functional,
    from_coords,
    identity,
    lp_norm,
    random_element,
    random_state,
    ricard_xu_defect,
    trace_state,
)
from .fourier import convolve, convolution_power, fourier_transform, inverse_fourier
from .freeprod import (
    Component,
    FreeElement,
    FreeMap,
    FreeProductSpec,
    convolution_compatibility_residual,
    enumerate_words,
    free_multiply,
    free_norm_even,
    free_trace,
    random_free_element,
    verify_free_improving,
)
from .improving import MapOnAlgebra, check_conditions, ritter_check, spectral_gap
from .ergodic import cesaro_limit, hopf_image
from .qgroup import (
    build_function_algebra,
    build_group_algebra,
    tensor_product,
    validate_quantum_group,
)


def _roster():
    z2 = build_function_algebra(groups.cyclic_table(2), "C(Z2)")
    z3 = build_function_algebra(groups.cyclic_table(3), "C(Z3)")
    z4 = build_function_algebra(groups.cyclic_table(4), "C(Z4)")
    cs3 = build_group_algebra(groups.symmetric_table(3), "C*(S3)")
    cz2 = build_group_algebra(groups.cyclic_table(2), "C*(Z2)")
    mixed = tensor_product(z2, cz2)
    return [z2, z3, z4, cs3, mixed]


def _measure(qg, vals):
    vals = np.asarray(vals, dtype=float)
    w = np.array(qg.structure.block_weights)
    return Functional(from_coords(qg.structure, (vals / w).astype(complex)))


def _suite_lp_norms(samples, rng):
    structures = [
        BlockStructure((1, 1, 1), (1 / 3, 1 / 3, 1 / 3)),
        BlockStructure((2,), (0.5,)),
        BlockStructure((1, 1, 2), (1 / 6, 1 / 6, 1 / 6)),
    ]
    worst = 0.0
    ps = [1.0, 1.3, 2.0, 2.7, 4.0, np.inf]
    for structure in structures:
        for _ in range(samples // 3):
            x = random_element(structure, rng)
            y = random_element(structure, rng)
            norms = [lp_norm(x, p) for p in ps]
            for a, b in zip(norms, norms[1:]):
                worst = max(worst, a - b)
            # Hoelder with 1/p + 1/q = 1/r
            for p, q, r in [(2, 2, 1), (4, 4, 2), (3, 1.5, 1)]:
                worst = max(
                    worst, lp_norm(x @ y, r) - lp_norm(x, p) * lp_norm(y, q)
                )
            worst = max(
                worst,
                abs((x @ y).trace()) - lp_norm(x, 2) * lp_norm(y, 2),
            )
            worst = max(
                worst,
                abs(lp_norm(x, 2) ** 2 - ((x.adjoint() @ x).trace()).real),
            )
    return worst <= 1e-9, f"max violation {worst:.2e}"


def _suite_ricard_xu(samples, rng):
    structures = [
        BlockStructure((1, 1, 1), (1 / 3, 1 / 3, 1 / 3)),
        BlockStructure((2,), (0.5,)),
        BlockStructure((1, 2), (0.2, 0.4)),
    ]
    worst = 0.0
    for structure in structures:
        for _ in range(samples // 3):
            x = random_element(structure, rng)
            for p in (1.1, 1.5, 1.9, 2.0):
                worst = min(worst, ricard_xu_defect(x, p))
    return worst >= -1e-9, f"min defect {worst:.2e}"


def _suite_qgroup_axioms(samples, rng):
    failures = []
    for qg in _roster():
        report = validate_quantum_group(qg.structure, qg.delta)
        if not report.ok:
            failures.append(qg.name)
        if sum(u.dim**2 for u in qg.irreps) != qg.dim:
            failures.append(f"{qg.name}: dim count")
    return not failures, "all axioms pass" if not failures else f"failed: {failures}"


def _suite_plancherel(samples, rng):
    worst = 0.0
    for qg in _roster():
        for _ in range(max(samples // 5, 5)):
            x = random_element(qg.structure, rng)
            xh = fourier_transform(qg, x)
            worst = max(worst, abs(lp_norm(x, 2) - xh.l2_norm()))
            back = inverse_fourier(qg, xh)
            worst = max(worst, float(np.max(np.abs(back.coords() - x.coords()))))
    return worst <= 1e-8, f"max residual {worst:.2e}"


def _suite_convolution(samples, rng):
    worst = 0.0
    for qg in _roster()[:3]:
        for _ in range(max(samples // 10, 3)):
            f1, f2, f3 = (random_state(qg.structure, rng) for _ in range(3))
            lhs = convolve(qg, convolve(qg, f1, f2), f3)
            rhs = convolve(qg, f1, convolve(qg, f2, f3))
            worst = max(worst, lhs.distance(rhs))
            p3 = convolution_power(qg, f1, 3)
            h3 = fourier_transform(qg, p3)
            h1 = fourier_transform(qg, f1)
            for a, b in zip(h3.matrices, h1.matrices):
                worst = max(
                    worst, float(np.max(np.abs(a - np.linalg.matrix_power(b, 3))))
                )
    return worst <= 1e-8, f"max residual {worst:.2e}"


def _suite_spectral_gap(samples, rng):
    worst = 0.0
    for qg in _roster():
        for _ in range(max(samples // 15, 3)):
            phi = random_state(qg.structure, rng)
            t = MapOnAlgebra.right_convolution(qg, phi)
            lam = spectral_gap(t)
            norms = fourier_transform(qg, phi).operator_norms()
            target = max(norms[1:]) if len(norms) > 1 else 0.0
            worst = max(worst, abs(lam - target))
    return worst <= 1e-8, f"max |gap - max norm| {worst:.2e}"


def _suite_conditions(samples, rng):
    z3 = build_function_algebra(groups.cyclic_table(3), "C(Z3)")
    z4 = build_function_algebra(groups.cyclic_table(4), "C(Z4)")
    rep = check_conditions(z3, _measure(z3, [0.5, 0, 0.5]), samples=samples, seed=1)
    ok = rep.improving and rep.consistent and abs(rep.lam - 0.5) < 1e-9
    rep2 = check_conditions(z4, _measure(z4, [0.5, 0, 0.5, 0]), samples=samples, seed=1)
    ok = ok and (not any(rep2.all_conditions)) and rep2.consistent
    ok = ok and ritter_check(groups.cyclic_table(3), [0, 2])
    ok = ok and not ritter_check(groups.cyclic_table(4), [0, 2])
    return ok, f"oberlin improving={rep.improving}, z4 negative={not any(rep2.all_conditions)}"


def _suite_cesaro(samples, rng):
    z4 = build_function_algebra(groups.cyclic_table(4), "C(Z4)")
    worst = 0.0
    for _ in range(max(samples // 20, 3)):
        phi = random_state(z4.structure, rng)
        rho = Functional((0.5 * z4.haar + 0.5 * phi).density)
        res = cesaro_limit(z4, rho)
        if not res.is_haar:
            return False, "faithful state did not average to the Haar state"
        worst = max(worst, res.distance_to_haar)
    res = cesaro_limit(z4, _measure(z4, [1, 0, 0, 0]))
    ok = (not res.is_haar) and res.fixed_space_dim > 1
    return ok and worst <= 1e-8, f"max distance {worst:.2e}"


def _suite_hopf(samples, rng):
    z4 = build_function_algebra(groups.cyclic_table(4), "C(Z4)")
    pi = np.zeros((2, 4))
    pi[0, 0] = 1
    pi[1, 2] = 1
    target = BlockStructure((1, 1), (0.5, 0.5))
    data = hopf_image(z4, pi, target)
    ok = (
        data.quotient.dim == 2
        and data.agreement <= 1e-7
        and data.idempotent_residual <= 1e-9
    )
    return ok, f"quotient dim {data.quotient.dim}, agreement {data.agreement:.1e}"


def _suite_freeprod(samples, rng):
    z2s = BlockStructure((1, 1), (0.5, 0.5))
    spec = FreeProductSpec([Component(z2s), Component(z2s)])
    e = FreeElement.letter(spec, 0, 0)
    f = FreeElement.letter(spec, 1, 0)
    ok = abs(free_norm_even(spec, e + f, 4) - 6**0.25) <= 1e-9
    words = [()] + enumerate_words(spec, 3)
    for a in words:
        for b in words:
            val = free_trace(
                spec,
                free_multiply(
                    spec, FreeElement(spec, {a: 1.0}).adjoint(), FreeElement(spec, {b: 1.0})
                ),
            )
            ok = ok and abs(val - (1.0 if a == b else 0.0)) <= 1e-10
    z2 = build_function_algebra(groups.cyclic_table(2), "C(Z2)")
    conv = z2.conv_right_matrix(_measure(z2, [0.6, 0.4]).covector())
    fmap = FreeMap.from_algebra_maps(spec, [conv, conv])
    rep = verify_free_improving(spec, fmap, q=4, max_len=3, samples=min(samples, 100), seed=2)
    ok = ok and rep.ok
    res = convolution_compatibility_residual(
        [z2, z2], [_measure(z2, [0.6, 0.4]), _measure(z2, [0.7, 0.3])]
    )
    ok = ok and res <= 1e-9
    return ok, f"verify ok={rep.ok}, dual-compat residual {res:.1e}"


SUITES = [
    ("lp-norms", _suite_lp_norms),
    ("ricard-xu", _suite_ricard_xu),
    ("qgroup-axioms", _suite_qgroup_axioms),
    ("plancherel-inversion", _suite_plancherel),
    ("convolution-identities", _suite_convolution),
    ("spectral-gap-fourier", _suite_spectral_gap),
    ("five-conditions", _suite_conditions),
    ("cesaro", _suite_cesaro),
    ("hopf-image", _suite_hopf),
    ("free-product", _suite_freeprod),
]


def run_selftest(seed=0, samples=300):
    """Run every invariant suite at reduced scale; deterministic given seed."""
    results = []
    overall = True
    for name, fn in SUITES:
        rng = np.random.default_rng(seed + hash(name) % 1000)
        start = time.perf_counter()
        try:
            ok, detail = fn(samples, rng)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"exception: {exc!r}"
        results.append(
            {
                "name": name,
                "ok": bool(ok),
                "detail": detail,
                "seconds": round(time.perf_counter() - start, 3),
            }
        )
        overall = overall and ok
    return {"ok": overall, "seed": seed, "samples": samples, "suites": results}
