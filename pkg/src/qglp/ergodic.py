"""Convolution powers, Cesaro limits, non-degeneracy, Hopf-image idempotents.

The Cesaro limit of the convolution powers of a state is computed exactly
as the spectral projection onto the fixed space of the convolution
operator (the operator is an L_2 contraction, so the mean ergodic
projection is the orthogonal one); an iterative run is kept as a
cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fdalgebra import (
    AlgebraElement,
    BlockStructure,
    DomainError,
    Functional,
    from_coords,
    identity,
    is_positive,
    trace_state,
)
from .qgroup import (
    QuantumGroup,
    multiply_coords,
    star_coords,
    validate_quantum_group,
)

RANK_TOL = 1e-10


@dataclass
class CesaroResult:
    """Cesaro limit of psi^{*k} with the derived flags."""

    limit: Functional
    is_haar: bool
    nondegenerate: bool
    distance_to_haar: float
    limit_min_eigenvalue: float
    fixed_space_dim: int
    iterative_residual: float = None

    def as_dict(self):
        return {
            "is_haar": self.is_haar,
            "nondegenerate": self.nondegenerate,
            "distance_to_haar": self.distance_to_haar,
            "limit_min_eigenvalue": self.limit_min_eigenvalue,
            "fixed_space_dim": self.fixed_space_dim,
            "iterative_residual": self.iterative_residual,
        }


def convolution_operator(qg, psi):
    """Matrix of P_psi: x -> psi * x."""
    return qg.conv_left_matrix(psi.covector())


def _geometric_sum(p_mat, n):
    """I + P + ... + P^{n-1} by binary doubling."""
    if n == 1:
        return np.eye(p_mat.shape[0], dtype=complex)
    half = _geometric_sum(p_mat, n // 2)
    p_half = np.linalg.matrix_power(p_mat, n // 2)
    total = half + p_half @ half
    if n % 2:
        total = total + np.linalg.matrix_power(p_mat, n - 1)
    return total


def cesaro_limit(qg, psi, iterative_check=True, iterations=1000):
    """Exact Cesaro limit of (1/n) sum_k psi^{*k} via the fixed-space projection."""
    if not psi.is_state(1e-8):
        raise DomainError("cesaro_limit needs a state")
    p_mat = convolution_operator(qg, psi)
    scale = np.sqrt(qg.structure.unit_weights)
    p_on = scale[:, None] * p_mat / scale[None, :]
    top = np.linalg.svd(p_on, compute_uv=False)[0]
    if top > 1.0 + 1e-8:
        raise RuntimeError(f"convolution operator is not an L_2 contraction ({top})")
    _, s, vh = np.linalg.svd(p_on - np.eye(qg.dim))
    null_dim = int(np.sum(s <= 1e-8 * max(s[0], 1.0)))
    null_rows = vh[qg.dim - null_dim :].conj() if null_dim else vh[:0]
    proj_on = null_rows.conj().T @ null_rows
    cesaro_mat = (1.0 / scale)[:, None] * proj_on * scale[None, :]
    limit_cov = psi.covector() @ cesaro_mat
    limit = Functional.from_covector(qg.structure, limit_cov)

    dist = float(np.max(np.abs(limit_cov - qg._haar_cov)))
    dens = limit.density
    herm = [(b + b.conj().T) / 2 for b in dens.blocks]
    min_eig = float(min(np.linalg.eigvalsh(h).min() for h in herm))
    is_haar = dist <= 1e-8

    iterative_residual = None
    if iterative_check:
        # Cross-check: the finite-n average (1/n) sum_{k<=n} psi^{*k} computed
        # by covector iteration must match the same average computed through
        # operator power-doubling.  (Plain Cesaro averages converge to the
        # limit only at O(1/n), so the limit itself is not the comparator.)
        cov = psi.covector()
        acc = np.zeros_like(cov)
        power = cov.copy()
        for k in range(1, iterations + 1):
            acc += power
            if k < iterations:
                power = qg.convolve_covectors(power, cov)
        iterative = acc / iterations
        s_n = _geometric_sum(p_mat, iterations)
        doubled = (cov @ s_n) / iterations
        iterative_residual = float(np.max(np.abs(iterative - doubled)))
        if iterative_residual > 1e-6:
            raise RuntimeError(
                f"iterative and power-doubled Cesaro averages disagree ({iterative_residual:.2e})"
            )

    return CesaroResult(
        limit=limit,
        is_haar=is_haar,
        nondegenerate=is_haar,
        distance_to_haar=dist,
        limit_min_eigenvalue=min_eig,
        fixed_space_dim=null_dim,
        iterative_residual=iterative_residual,
    )


# -- homomorphisms and Hopf images -------------------------------------------


def validate_hom(source, target_structure, pi_matrix, tol=1e-8):
    """Residuals for pi being a unital *-homomorphism A -> B."""
    pi = np.asarray(pi_matrix, dtype=complex)
    if pi.shape != (target_structure.dim, source.dim):
        raise DomainError(
            f"hom matrix must be {(target_structure.dim, source.dim)}, got {pi.shape}"
        )
    unit_res = float(
        np.max(
            np.abs(pi @ identity_coords(source) - identity_coords(target_structure))
        )
    )
    # multiplicative on basis pairs
    images = pi.T  # row I = pi(e_I)
    lhs = np.einsum("IJK,dK->IJd", _mult3_of(source), pi, optimize=True)
    rhs = np.empty_like(lhs)
    for i in range(source.dim):
        rhs[i] = multiply_coords(
            target_structure, images[i][None, :], images
        )
    mult_res = float(np.max(np.abs(lhs - rhs)))
    star_res = float(
        np.max(
            np.abs(
                star_coords(target_structure, pi.T)
                - pi.T[_star_perm(source)]
            )
        )
    )
    ok = unit_res <= tol and mult_res <= tol and star_res <= tol
    return ok, {"unital": unit_res, "multiplicative": mult_res, "star": star_res}


def identity_coords(structure):
    return identity(structure).coords()


def _mult3_of(structure):
    from .qgroup import mult_tensor

    return mult_tensor(structure)


def _star_perm(structure):
    from .qgroup import star_indices

    return star_indices(structure)


@dataclass
class HopfImageData:
    """Quotient quantum group and idempotent state attached to a hom."""

    quotient: QuantumGroup
    quotient_map: np.ndarray  # (dim_quotient, dim_A)
    ideal_dim: int
    intersection_dims: list
    stabilization_index: int
    eta: Functional  # Haar of the quotient pulled back through q
    eta_cesaro: Functional  # Cesaro limit of (phi o pi)^{*k}
    agreement: float
    idempotent_residual: float

    def as_dict(self):
        return {
            "quotient_dim": self.quotient.dim,
            "quotient_blocks": list(self.quotient.structure.block_dims),
            "ideal_dim": self.ideal_dim,
            "intersection_dims": self.intersection_dims,
            "stabilization_index": self.stabilization_index,
            "agreement": self.agreement,
            "idempotent_residual": self.idempotent_residual,
        }


def _row_space(matrix):
    """Orthonormal rows spanning the row space (kernel = kernel of input)."""
    _, s, vh = np.linalg.svd(matrix, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * max(s[0] if len(s) else 1.0, 1.0)))
    return vh[:rank]


def _null_space(matrix):
    u, s, vh = np.linalg.svd(matrix, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * max(s[0] if len(s) else 1.0, 1.0)))
    return vh[rank:].conj()


def hopf_image(qg, pi_matrix, target_structure, target_state=None):
    """Hopf image of a unital *-hom pi: ideal, quotient QG, idempotent state.

    The ideal is the stabilized intersection of the kernels of
    pi_k = (pi (x) ... (x) pi) Delta^{(k-1)}, computed with quotient
    compression so intermediate dimensions never exceed dim(A)^2.  The
    idempotent state is computed two ways (quotient Haar pulled back, and
    the Cesaro limit of (phi o pi)^{*k}) and both must agree.
    """
    pi = np.asarray(pi_matrix, dtype=complex)
    ok, residuals = validate_hom(qg.structure, target_structure, pi)
    if not ok:
        raise DomainError(f"pi is not a unital *-homomorphism: {residuals}")
    if target_state is None:
        target_state = trace_state(target_structure)
    if not target_state.is_faithful_state(1e-9):
        raise DomainError("hopf_image needs a faithful state on the target")

    dim = qg.dim
    # J_k = intersection of ker pi_j for j <= k, via row-space frames Q_j with
    # ker Q_j = ker pi_j; pi_{k+1} is never materialized: ker pi_{k+1} equals
    # ker((Q_k (x) Q_1) Delta), which caps every intermediate size at dim^2.
    q1 = _row_space(pi)
    frames = [q1]
    q_prev = q1
    intersection = _null_space(q1)
    intersection_dims = [intersection.shape[0]]
    stabilization_index = 1
    for k in range(2, dim + 1):
        t_k = np.kron(q_prev, q1) @ qg.delta
        q_prev = _row_space(t_k)
        frames.append(q_prev)
        intersection = _null_space(np.vstack(frames))
        intersection_dims.append(intersection.shape[0])
        if intersection_dims[-1] != intersection_dims[-2]:
            stabilization_index = k
        elif k - stabilization_index >= 2:
            break  # two consecutive stable steps

    ideal = intersection  # rows span I
    ideal_dim = ideal.shape[0]

    keep = _support_blocks(qg, ideal)
    quotient, q_map = _corner_quantum_group(qg, keep, name=f"{qg.name}/hopf-ideal")

    # well-definedness: (q (x) q) Delta must kill the ideal
    if ideal_dim:
        res = float(
            np.max(np.abs(np.kron(q_map, q_map) @ qg.delta @ ideal.T))
        )
        if res > 1e-7:
            raise RuntimeError(
                f"(q (x) q) Delta does not vanish on the ideal (residual {res:.2e})"
            )

    eta_cov = quotient._haar_cov @ q_map
    eta = Functional.from_covector(qg.structure, eta_cov)

    comp = Functional.from_covector(
        qg.structure, target_state.covector() @ pi
    )
    ces = cesaro_limit(qg, comp, iterative_check=False)
    eta_ces = ces.limit
    agreement = float(np.max(np.abs(eta.covector() - eta_ces.covector())))

    conv = qg.convolve_covectors(eta_cov, eta_cov)
    idem = float(np.max(np.abs(conv - eta_cov)))

    return HopfImageData(
        quotient=quotient,
        quotient_map=q_map,
        ideal_dim=ideal_dim,
        intersection_dims=intersection_dims,
        stabilization_index=stabilization_index,
        eta=eta,
        eta_cesaro=eta_ces,
        agreement=agreement,
        idempotent_residual=idem,
    )


def _support_blocks(qg, ideal_rows):
    """Blocks carrying the ideal: the support of sum b b* over an ideal basis."""
    structure = qg.structure
    if ideal_rows.shape[0] == 0:
        return list(range(len(structure.block_dims)))  # keep everything
    y = np.zeros(structure.dim, dtype=complex)
    for row in ideal_rows:
        y = y + multiply_coords(structure, row, star_coords(structure, row))
    elem = from_coords(structure, y)
    keep = []
    drop_dim = 0
    for i, b in enumerate(elem.blocks):
        h = (b + b.conj().T) / 2
        evals = np.linalg.eigvalsh(h)
        if evals.max() <= 1e-9:
            keep.append(i)
        elif evals.min() > 1e-9:
            drop_dim += structure.block_dims[i] ** 2
        else:
            raise RuntimeError(
                "ideal support projection is not central (mixed block spectrum)"
            )
    if drop_dim != ideal_rows.shape[0]:
        raise RuntimeError(
            f"ideal dimension {ideal_rows.shape[0]} does not match dropped blocks {drop_dim}"
        )
    return keep


def _corner_quantum_group(qg, keep_blocks, name):
    """Quantum group on the kept blocks with the induced comultiplication."""
    structure = qg.structure
    kept_units = []
    for i in keep_blocks:
        n = structure.block_dims[i]
        off = structure._offsets[i]
        kept_units.extend(range(off, off + n * n))
    kept_units = np.array(kept_units, dtype=int)
    dim_q = len(kept_units)
    q_map = np.zeros((dim_q, qg.dim))
    q_map[np.arange(dim_q), kept_units] = 1.0

    delta_q = np.kron(q_map, q_map) @ qg.delta @ q_map.T
    dims = tuple(structure.block_dims[i] for i in keep_blocks)

    # provisional weights, then the true ones from the quotient Haar state
    total = sum(n * n for n in dims)
    provisional = BlockStructure(dims, tuple(n / total for n in dims))
    from .qgroup import _solve_haar

    cov, null_dim, _ = _solve_haar(provisional, delta_q.reshape(dim_q, dim_q, dim_q))
    if cov is None or null_dim != 1:
        raise RuntimeError("quotient has no unique Haar state; not a quantum group")
    weights = []
    for idx, n in enumerate(dims):
        off = provisional._offsets[idx]
        weights.append(float(cov[off].real))
    structure_q = BlockStructure(dims, tuple(weights))
    quotient = QuantumGroup(structure_q, delta_q, name=name)
    return quotient, q_map
