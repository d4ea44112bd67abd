"""JSON schemas for algebras, elements/states, quantum groups, homs, maps.

Complex numbers are encoded as [re, im] pairs (plain numbers are accepted
on input and read as reals).  Matrices are row-major nested lists; block
lists follow the declared block order.
"""

from __future__ import annotations

import json

import numpy as np

from .fdalgebra import AlgebraElement, BlockStructure, Functional, trace_state
from .freeprod import Component
from .qgroup import QuantumGroup, build_function_algebra, build_group_algebra


class SchemaError(ValueError):
    """Input JSON does not match the documented payload schema."""


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"expected a number or [re, im] pair, got {v!r}")


def encode_matrix(arr):
    arr = np.asarray(arr, dtype=complex)
    return [[encode_complex(z) for z in row] for row in arr]


def decode_matrix(obj, shape=None):
    try:
        mat = np.array([[decode_complex(v) for v in row] for row in obj], dtype=complex)
    except (TypeError, SchemaError) as exc:
        raise SchemaError(f"malformed complex matrix: {exc}") from exc
    if shape is not None and mat.shape != shape:
        raise SchemaError(f"matrix of shape {mat.shape}, expected {shape}")
    return mat


def decode_vector(obj):
    return np.array([decode_complex(v) for v in obj], dtype=complex)


# -- block structures and elements -------------------------------------------


def structure_to_json(structure):
    return {
        "blocks": list(structure.block_dims),
        "weights": [float(w) for w in structure.block_weights],
    }


def structure_from_json(obj):
    try:
        return BlockStructure(obj["blocks"], obj["weights"])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc} in block structure") from exc
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def element_to_json(x):
    out = structure_to_json(x.structure)
    out["matrices"] = [encode_matrix(b) for b in x.blocks]
    return out


def element_from_json(obj, structure=None):
    declared = structure_from_json(obj)
    if structure is not None and declared != structure:
        raise SchemaError("element structure does not match the quantum group")
    structure = structure if structure is not None else declared
    mats = obj.get("matrices")
    if mats is None or len(mats) != len(structure.block_dims):
        raise SchemaError("need one matrix per declared block")
    blocks = [
        decode_matrix(m, shape=(n, n))
        for m, n in zip(mats, structure.block_dims)
    ]
    return AlgebraElement(structure, blocks)


def state_to_json(func):
    return element_to_json(func.density)


def state_from_json(obj, structure=None):
    return Functional(element_from_json(obj, structure))


# -- quantum groups -----------------------------------------------------------


def qgroup_to_json(qg):
    out = {"name": qg.name}
    out.update(structure_to_json(qg.structure))
    out["delta"] = encode_matrix(qg.delta)
    if qg.cayley is not None:
        out["cayley"] = qg.cayley
    return out


def qgroup_from_json(obj, validate=True):
    """Load {blocks, weights, delta} or construct from {cayley, kind}."""
    name = obj.get("name")
    if "delta" in obj:
        structure = structure_from_json(obj)
        dim = structure.dim
        delta = decode_matrix(obj["delta"], shape=(dim * dim, dim))
        return QuantumGroup(structure, delta, name=name or "quantum-group", validate=validate)
    if "cayley" in obj:
        kind = obj.get("kind", "function")
        if kind == "function":
            return build_function_algebra(obj["cayley"], name=name)
        if kind == "group":
            return build_group_algebra(obj["cayley"], name=name)
        raise SchemaError(f"unknown constructor kind {kind!r}")
    raise SchemaError("quantum group JSON needs either 'delta' or 'cayley'")


def cayley_from_json(obj):
    table = obj.get("cayley") if isinstance(obj, dict) else obj
    if table is None:
        raise SchemaError("expected a Cayley table under 'cayley'")
    return table


# -- fourier coefficients ------------------------------------------------------


def fourier_to_json(coeffs):
    return {
        "alpha_dims": list(coeffs.alpha_dims),
        "matrices": [encode_matrix(m) for m in coeffs.matrices],
    }


def fourier_from_json(qg, obj):
    from .fourier import FourierCoefficients

    dims = obj.get("alpha_dims")
    if dims is not None and tuple(dims) != tuple(u.dim for u in qg.irreps):
        raise SchemaError("alpha_dims do not match the quantum group's irreps")
    return FourierCoefficients(qg, [decode_matrix(m) for m in obj["matrices"]])


# -- homomorphisms and maps ----------------------------------------------------


def hom_from_json(obj, source_structure):
    """{"target_blocks", "target_weights", "images"} -> (target, pi matrix).

    ``images[I]`` is the list of target block matrices of pi(e_I), one entry
    per basis matrix unit of the source.
    """
    try:
        target = BlockStructure(obj["target_blocks"], obj["target_weights"])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc} in hom payload") from exc
    images = obj.get("images")
    if images is None or len(images) != source_structure.dim:
        raise SchemaError(
            f"need one image per source basis element ({source_structure.dim})"
        )
    pi = np.zeros((target.dim, source_structure.dim), dtype=complex)
    for i, blocks in enumerate(images):
        if len(blocks) != len(target.block_dims):
            raise SchemaError("each image needs one matrix per target block")
        mats = [
            decode_matrix(m, shape=(n, n))
            for m, n in zip(blocks, target.block_dims)
        ]
        pi[:, i] = AlgebraElement(target, mats).coords()
    return target, pi


def hom_to_json(target_structure, pi):
    from .fdalgebra import from_coords

    out = {
        "target_blocks": list(target_structure.block_dims),
        "target_weights": [float(w) for w in target_structure.block_weights],
        "images": [],
    }
    for i in range(pi.shape[1]):
        elem = from_coords(target_structure, pi[:, i])
        out["images"].append([encode_matrix(b) for b in elem.blocks])
    return out


def map_from_json(obj):
    """{"blocks", "weights", "matrix"} -> (structure, dim x dim matrix)."""
    structure = structure_from_json(obj)
    matrix = decode_matrix(obj["matrix"], shape=(structure.dim, structure.dim))
    return structure, matrix


def map_to_json(structure, matrix):
    out = structure_to_json(structure)
    out["matrix"] = encode_matrix(matrix)
    return out


def component_from_json(obj):
    """Free-product component: algebra plus optional state density."""
    structure = structure_from_json(obj)
    state = None
    if "state" in obj and obj["state"] is not None:
        blocks = [
            decode_matrix(m, shape=(n, n))
            for m, n in zip(obj["state"], structure.block_dims)
        ]
        state = Functional(AlgebraElement(structure, blocks))
    return Component(structure, state)


def canonical_json(payload):
    """Deterministic serialization for byte-identical reports."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n"
