"""Finite quantum groups: builders, validation, Haar state, antipode, Peter-Weyl.

A quantum group is a block algebra A together with a comultiplication
``delta``, stored as a dim^2 x dim complex matrix over the fixed
matrix-unit basis (blocks in declared order, row-major inside a block;
the basis of A (x) A is the lexicographic tensor of that order).  The
Haar state, counit, antipode and the list of irreducible unitary
corepresentations are all derived numerically at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import groups
from .fdalgebra import (
    AlgebraElement,
    BlockStructure,
    Functional,
    ShapeError,
    basis_element,
    from_coords,
    identity,
    trace_covector,
)
from .wedderburn import DecompositionError, StarAlgebra, decompose

DERIVATION_SEED = 0x51C0FFEE


class QGValidationError(ValueError):
    """Raised when a quantum-group axiom fails at construction time."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# -- basis bookkeeping ------------------------------------------------------


def mult_tensor(structure):
    """Structure constants m[I, J, :] = coords(e_I e_J)."""
    dim = structure.dim
    m = np.zeros((dim, dim, dim), dtype=complex)
    for i, n in enumerate(structure.block_dims):
        for r in range(n):
            for c in range(n):
                left = structure.unit_index(i, r, c)
                for d in range(n):
                    m[left, structure.unit_index(i, c, d), structure.unit_index(i, r, d)] = 1.0
    return m


def star_indices(structure):
    """Permutation p with (e_I)* = e_{p[I]}."""
    p = np.empty(structure.dim, dtype=int)
    for i, n in enumerate(structure.block_dims):
        for r in range(n):
            for c in range(n):
                p[structure.unit_index(i, r, c)] = structure.unit_index(i, c, r)
    return p


def star_coords(structure, coords):
    """Adjoint on coordinate vectors (conjugate + transpose within blocks)."""
    return np.conj(np.asarray(coords))[..., _star_cache(structure)]


_STAR_CACHE = {}


def _star_cache(structure):
    key = id(structure)
    if key not in _STAR_CACHE:
        _STAR_CACHE[key] = star_indices(structure)
    return _STAR_CACHE[key]


def split_blocks(structure, coords):
    """View a (..., dim) coordinate array as per-block (..., n, n) arrays."""
    coords = np.asarray(coords)
    out = []
    for i, n in enumerate(structure.block_dims):
        off = structure._offsets[i]
        out.append(coords[..., off : off + n * n].reshape(coords.shape[:-1] + (n, n)))
    return out

def join_blocks(structure, arrays):
    lead = arrays[0].shape[:-2]
    return np.concatenate(
        [a.reshape(lead + (-1,)) for a in arrays], axis=-1
    )


def multiply_coords(structure, a, b):
    """Blockwise products of (broadcastable batches of) coordinate rows."""
    outs = []
    for x, y in zip(split_blocks(structure, a), split_blocks(structure, b)):
        outs.append(np.einsum("...ab,...bc->...ac", x, y))
    return join_blocks(structure, outs)


def tensor_structure(s1, s2):
    """Block structure of A1 (x) A2 and the pairing table of matrix units.

    Returns ``(structure, pair)`` with ``pair[u1, u2]`` the basis index of
    ``e_{u1} (x) e_{u2}`` in the tensor algebra (Kronecker layout).
    """
    dims = []
    weights = []
    for n1, w1 in zip(s1.block_dims, s1.block_weights):
        for n2, w2 in zip(s2.block_dims, s2.block_weights):
            dims.append(n1 * n2)
            weights.append(w1 * w2)
    st = BlockStructure(dims, weights)
    pair = np.empty((s1.dim, s2.dim), dtype=int)
    block = 0
    for i, n1 in enumerate(s1.block_dims):
        for j, n2 in enumerate(s2.block_dims):
            for a in range(n1):
                for c in range(n1):
                    u1 = s1.unit_index(i, a, c)
                    for b in range(n2):
                        for d in range(n2):
                            u2 = s2.unit_index(j, b, d)
                            pair[u1, u2] = st.unit_index(block, a * n2 + b, c * n2 + d)
            block += 1
    return st, pair


class TensorSquare:
    """Coordinate bookkeeping for A (x) A as a block algebra."""

    def __init__(self, structure):
        self.base = structure
        self.structure, pair = tensor_structure(structure, structure)
        d = structure.dim
        self.pair_flat = pair.reshape(-1)  # (I*d+J) -> tensor unit
        self.unit_to_pair = np.empty(d * d, dtype=int)
        self.unit_to_pair[self.pair_flat] = np.arange(d * d)

    def to_t2(self, aa_vec):
        """Reindex a vector over e_I (x) e_J (index I*dim+J) to block coords."""
        return np.asarray(aa_vec)[..., self.unit_to_pair]

    def from_t2(self, t2_vec):
        return np.asarray(t2_vec)[..., self.pair_flat]

    def multiply(self, aa_x, aa_y):
        return self.from_t2(
            multiply_coords(self.structure, self.to_t2(aa_x), self.to_t2(aa_y))
        )

    def star(self, aa_x):
        return self.from_t2(star_coords(self.structure, self.to_t2(aa_x)))


# -- corepresentations ------------------------------------------------------


@dataclass
class Corepresentation:
    """Unitary corepresentation u = [u_ij] with entries in the algebra."""

    structure: BlockStructure
    coords: np.ndarray  # (n, n, dim)
    q_matrix: np.ndarray = None
    d_alpha: float = 0.0

    @property
    def dim(self):
        return self.coords.shape[0]

    def entry(self, i, j):
        return from_coords(self.structure, self.coords[i, j])


# -- linear solvers for the derived structure -------------------------------


@dataclass
class _CoreDerivation:
    haar_cov: np.ndarray
    haar_null_dim: int
    haar_residual: float
    counit_cov: np.ndarray
    counit_residual: float
    antipode: np.ndarray
    antipode_residual: float


def _derive_core(structure, delta3, mult3):
    haar_cov, null_dim, haar_res = _solve_haar(structure, delta3)
    counit_cov, c_res = _solve_counit(structure, delta3)
    smat, s_res = _solve_antipode(structure, delta3, mult3, counit_cov)
    return _CoreDerivation(
        haar_cov=haar_cov,
        haar_null_dim=null_dim,
        haar_residual=haar_res,
        counit_cov=counit_cov,
        counit_residual=c_res,
        antipode=smat,
        antipode_residual=s_res,
    )


def _solve_haar(structure, delta3, tol=1e-8):
    """Bi-invariant state by nullspace of the invariance system.

    Returns (covector, nullspace_dimension, residual).
    """
    dim = structure.dim
    unit = identity(structure).coords()
    eye = np.eye(dim)
    # (phi (x) id) Delta(e_K) = phi(e_K) 1  and  (id (x) phi) Delta(e_K) = phi(e_K) 1
    m1 = np.einsum("IJK->KJI", delta3).reshape(dim * dim, dim) - np.einsum(
        "KI,J->KJI", eye, unit
    ).reshape(dim * dim, dim)
    m2 = np.einsum("IJK->KIJ", delta3).reshape(dim * dim, dim) - np.einsum(
        "KJ,I->KIJ", eye, unit
    ).reshape(dim * dim, dim)
    system = np.vstack([m1, m2])
    _, s, vh = np.linalg.svd(system, full_matrices=False)
    smax = max(s[0], 1.0)
    null_dim = int(np.sum(s <= tol * smax))
    if null_dim == 0:
        return None, 0, float(s[-1])
    cov = vh[-1].conj()
    scale = cov @ unit
    if abs(scale) < 1e-12:
        return None, null_dim, float(s[-1])
    cov = cov / scale
    residual = float(np.linalg.norm(system @ cov))
    return cov, null_dim, residual


def _solve_counit(structure, delta3):
    """Solve (eps (x) id) Delta = id = (id (x) eps) Delta by least squares."""
    dim = structure.dim
    eye = np.eye(dim)
    a1 = np.einsum("IJK->JKI", delta3).reshape(dim * dim, dim)
    b1 = eye.reshape(dim * dim)
    a2 = np.einsum("IJK->IKJ", delta3).reshape(dim * dim, dim)
    system = np.vstack([a1, a2])
    rhs = np.concatenate([b1, b1])
    cov = scipy.linalg.lstsq(system, rhs, lapack_driver="gelsy")[0]
    residual = float(np.linalg.norm(system @ cov - rhs, ord=np.inf))
    return cov, residual


def _solve_antipode(structure, delta3, mult3, counit_cov):
    """Solve m (S (x) id) Delta = eps(.) 1 = m (id (x) S) Delta for S."""
    dim = structure.dim
    unit = identity(structure).coords()
    # unknowns S[l, I]; equations indexed (K, o)
    a1 = np.einsum("IJK,lJo->KolI", delta3, mult3, optimize=True).reshape(
        dim * dim, dim * dim
    )
    a2 = np.einsum("IJK,Ilo->KolJ", delta3, mult3, optimize=True).reshape(
        dim * dim, dim * dim
    )
    rhs = np.einsum("K,o->Ko", counit_cov, unit).reshape(dim * dim)
    system = np.vstack([a1, a2])
    rhs2 = np.concatenate([rhs, rhs])
    sol = scipy.linalg.lstsq(system, rhs2, lapack_driver="gelsy")[0]
    smat = sol.reshape(dim, dim)
    residual = float(np.linalg.norm(system @ sol - rhs2, ord=np.inf))
    return smat, residual


# -- Peter-Weyl via the dual algebra ---------------------------------------


def _dual_algebra(structure, delta3, antipode_matrix, counit_cov):
    dim = structure.dim
    p = _star_cache(structure)
    m = np.conj(antipode_matrix)[p, :]  # coords(S(e_K)*) as columns
    star_matrix = np.conj(m).T
    # dual trace: tr_D(f_I) = eps(density of f_I) / dim, density of f_I = e_{I*}/w
    trace_vec = (counit_cov[p] / structure.unit_weights / dim).astype(complex)
    return StarAlgebra(delta3, star_matrix, trace_vec, counit_cov.astype(complex))


def _peter_weyl(structure, delta3, mult3, antipode_matrix, counit_cov, haar_cov, rng, tol=1e-8):
    dim = structure.dim
    dual = _dual_algebra(structure, delta3, antipode_matrix, counit_cov)
    dec = decompose(dual, rng)
    if sum(b.dim**2 for b in dec.blocks) != dim:
        raise QGValidationError("dual decomposition does not exhaust the algebra")

    # the trivial representation is the block whose matrix unit is the Haar state
    trivial = None
    for idx, b in enumerate(dec.blocks):
        if b.dim == 1 and np.linalg.norm(b.units[0, 0] - haar_cov) < 1e-6 * max(
            1.0, np.linalg.norm(haar_cov)
        ):
            trivial = idx
            break
    if trivial is None:
        raise QGValidationError("no trivial block found in the dual algebra")
    blocks = [dec.blocks[trivial]] + [
        b for i, b in enumerate(dec.blocks) if i != trivial
    ]

    rows = []
    for b in blocks:
        n = b.dim
        for i in range(n):
            for j in range(n):
                rows.append(b.units[i, j])
    ustack = np.array(rows)
    v = np.linalg.inv(ustack)

    irreps = []
    offset = 0
    for b in blocks:
        n = b.dim
        coords = np.empty((n, n, dim), dtype=complex)
        for i in range(n):
            for j in range(n):
                coords[i, j] = v[:, offset + i * n + j]
        offset += n * n
        coords = _unitarize(structure, haar_cov, coords)
        q, d_alpha = _q_matrix(structure, haar_cov, coords)
        irreps.append(
            Corepresentation(structure=structure, coords=coords, q_matrix=q, d_alpha=d_alpha)
        )
    return irreps


def _unitarize(structure, haar_cov, coords):
    """Positive-twist unitarization u -> (1 (x) Q^{1/2}) u (1 (x) Q^{-1/2}).

    Q = (h (x) id)(u* u) intertwines u, so the twisted corepresentation is
    exactly unitary for any invertible corepresentation; numerically this
    also polishes round-off from the dual-basis construction.
    """
    n = coords.shape[0]
    q = np.empty((n, n), dtype=complex)
    star = np.array(
        [[star_coords(structure, coords[i, j]) for j in range(n)] for i in range(n)]
    )
    for j in range(n):
        for k in range(n):
            acc = 0.0 + 0.0j
            for i in range(n):
                prod = multiply_coords(structure, star[i, j], coords[i, k])
                acc += haar_cov @ prod
            q[j, k] = acc
    q = (q + q.conj().T) / 2
    evals, vecs = np.linalg.eigh(q)
    if evals.min() <= 0:
        raise QGValidationError("non-invertible corepresentation in unitarization")
    q_half = vecs @ np.diag(np.sqrt(evals)) @ vecs.conj().T
    q_inv_half = vecs @ np.diag(1.0 / np.sqrt(evals)) @ vecs.conj().T
    return np.einsum("jp,pqd,qk->jkd", q_half, coords, q_inv_half)


def _q_matrix(structure, haar_cov, coords, tol=1e-8):
    """Recover Q_alpha and d_alpha from the orthogonality relations."""
    n = coords.shape[0]
    p = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for m in range(n):
                prod = multiply_coords(
                    structure, coords[i, j], star_coords(structure, coords[i, m])
                )
                p[m, j] += (haar_cov @ prod) / n
    p = (p + p.conj().T) / 2
    d_alpha = float(np.sqrt(np.trace(np.linalg.inv(p)).real))
    q = d_alpha * p
    return q, d_alpha


# -- the quantum group object ----------------------------------------------


class QuantumGroup:
    """Validated finite quantum group with eagerly derived structure."""

    def __init__(self, structure, delta, name="", validate=True, tol=1e-8):
        delta = np.ascontiguousarray(delta, dtype=complex)
        dim = structure.dim
        if delta.shape != (dim * dim, dim):
            raise ShapeError(
                f"delta must be {(dim * dim, dim)}, got {delta.shape}"
            )
        self.structure = structure
        self.delta = delta
        self.name = name or "quantum-group"
        self.dim = dim
        self.delta3 = delta.reshape(dim, dim, dim)
        self.mult3 = mult_tensor(structure)
        self.t2 = TensorSquare(structure)
        self.unit_coords = identity(structure).coords()
        self.cayley = None  # set by the group builders
        self.group_basis = None  # lambda(gamma) coordinates, group algebra only

        core = _derive_core(structure, self.delta3, self.mult3)
        if validate:
            report = validate_quantum_group(structure, delta, tol=tol, _core=core)
            if not report.ok:
                raise QGValidationError(
                    "not a finite quantum group: "
                    + "; ".join(c.name for c in report.checks if not c.passed),
                    report=report,
                )

        if core.haar_cov is None or core.haar_null_dim != 1:
            raise QGValidationError(
                f"no/ambiguous Haar state (invariant space dimension {core.haar_null_dim})"
            )
        tau = trace_covector(structure)
        if np.max(np.abs(core.haar_cov - tau)) > 1e-8:
            raise QGValidationError(
                "block weights disagree with the Haar state; "
                "declare weights w_i = h(minimal projection of block i)"
            )
        self._haar_cov = tau  # exact reference trace, matches h within 1e-8
        self.haar = Functional.from_covector(structure, tau)

        self.counit_cov = core.counit_cov
        self._counit_residual = core.counit_residual
        self.antipode_matrix = core.antipode
        self._antipode_residual = core.antipode_residual
        if self._antipode_residual > 1e-7:
            raise QGValidationError(
                f"antipode system residual {self._antipode_residual:.2e}"
            )

        rng = np.random.default_rng(DERIVATION_SEED + dim)
        self.irreps = _peter_weyl(
            structure,
            self.delta3,
            self.mult3,
            self.antipode_matrix,
            self.counit_cov,
            self._haar_cov,
            rng,
        )
        self._check_irreps(tol)

    # -- derived-structure checks ------------------------------------------

    def _check_irreps(self, tol):
        dim_sum = sum(u.dim**2 for u in self.irreps)
        if dim_sum != self.dim:
            raise QGValidationError(
                f"Peter-Weyl dimension count {dim_sum} != dim(A) = {self.dim}"
            )
        res = self.coaction_residual()
        if res > 1e-7:
            raise QGValidationError(f"coaction identity residual {res:.2e}")
        res = self.unitarity_residual()
        if res > 1e-7:
            raise QGValidationError(f"corepresentation unitarity residual {res:.2e}")
        res = self.orthogonality_residual()
        if res > 1e-7:
            raise QGValidationError(f"orthogonality residual {res:.2e}")
        for u in self.irreps:
            if np.max(np.abs(u.q_matrix - np.eye(u.dim))) > 1e-6:
                raise QGValidationError("Q matrix differs from identity (non-Kac?)")
        s_pw = self.antipode_from_irreps()
        if np.max(np.abs(s_pw - self.antipode_matrix)) > 1e-7:
            raise QGValidationError(
                "antipode from corepresentations disagrees with the Hopf solution"
            )

    def coaction_residual(self):
        """max над irreps of || Delta(u_jk) - sum_p u_jp (x) u_pk ||."""
        res = 0.0
        for u in self.irreps:
            n = u.dim
            for j in range(n):
                for k in range(n):
                    lhs = self.delta @ u.coords[j, k]
                    rhs = np.zeros(self.dim * self.dim, dtype=complex)
                    for p in range(n):
                        rhs += np.kron(u.coords[j, p], u.coords[p, k])
                    res = max(res, float(np.max(np.abs(lhs - rhs))))
        return res

    def unitarity_residual(self):
        res = 0.0
        for u in self.irreps:
            n = u.dim
            for j in range(n):
                for k in range(n):
                    acc = np.zeros(self.dim, dtype=complex)
                    acc2 = np.zeros(self.dim, dtype=complex)
                    for i in range(n):
                        acc += multiply_coords(
                            self.structure,
                            star_coords(self.structure, u.coords[i, j]),
                            u.coords[i, k],
                        )
                        acc2 += multiply_coords(
                            self.structure,
                            u.coords[j, i],
                            star_coords(self.structure, u.coords[k, i]),
                        )
                    target = self.unit_coords if j == k else 0.0
                    res = max(res, float(np.max(np.abs(acc - target))))
                    res = max(res, float(np.max(np.abs(acc2 - target))))
        return res

    def orthogonality_residual(self):
        """Peter-Weyl orthogonality with Q = Id: h(u_ij (u_lm)*) = d_ab d_il d_jm / n."""
        res = 0.0
        for a, ua in enumerate(self.irreps):
            for b, ub in enumerate(self.irreps):
                for i in range(ua.dim):
                    for j in range(ua.dim):
                        for l in range(ub.dim):
                            for m in range(ub.dim):
                                prod = multiply_coords(
                                    self.structure,
                                    ua.coords[i, j],
                                    star_coords(self.structure, ub.coords[l, m]),
                                )
                                val = self._haar_cov @ prod
                                target = (
                                    (1.0 / ua.dim)
                                    if (a == b and i == l and j == m)
                                    else 0.0
                                )
                                res = max(res, abs(val - target))
        return res

    def antipode_from_irreps(self):
        """Linear extension of u_ij -> (u_ji)* over the corepresentation basis."""
        cols = []
        starred = []
        for u in self.irreps:
            n = u.dim
            for j in range(n):
                for k in range(n):
                    cols.append(u.coords[j, k])
                    starred.append(star_coords(self.structure, u.coords[k, j]))
        vmat = np.array(cols).T
        wmat = np.array(starred).T
        return wmat @ np.linalg.inv(vmat)

    # -- operators derived from the comultiplication -------------------------

    def conv_right_matrix(self, covector):
        """Matrix of x -> x * phi = (phi (x) id) Delta(x)."""
        return np.einsum("I,IJK->JK", covector, self.delta3)

    def conv_left_matrix(self, covector):
        """Matrix of x -> phi * x = (id (x) phi) Delta(x)."""
        return np.einsum("J,IJK->IK", covector, self.delta3)

    def convolve_covectors(self, cov1, cov2):
        """(phi * psi)(e_K) = (phi (x) psi) Delta(e_K)."""
        return np.einsum("I,J,IJK->K", cov1, cov2, self.delta3)

    def apply_antipode(self, x):
        return from_coords(self.structure, self.antipode_matrix @ x.coords())

    def compose_antipode(self, covector):
        """Covector of phi o S."""
        return np.asarray(covector) @ self.antipode_matrix

    def commutativity_defect(self):
        return float(np.max(np.abs(self.mult3 - self.mult3.transpose(1, 0, 2))))

    def cocommutativity_defect(self):
        return float(np.max(np.abs(self.delta3 - self.delta3.transpose(1, 0, 2))))

    def __repr__(self):
        return f"QuantumGroup({self.name!r}, dims={self.structure.block_dims})"


# -- spec-facing operation aliases ------------------------------------------


def haar_state(qg):
    """The unique bi-invariant state (solved at construction)."""
    return qg.haar


def antipode(qg):
    """Antipode matrix, the linear extension of u_ij -> (u_ji)*."""
    return qg.antipode_matrix


def peter_weyl(qg):
    """The list of irreducible unitary corepresentations, trivial first."""
    return qg.irreps


# -- validator ---------------------------------------------------------------


@dataclass
class ValidationCheck:
    name: str
    residual: float
    passed: bool
    note: str = ""

    def as_dict(self):
        return {
            "name": self.name,
            "residual": self.residual,
            "passed": bool(self.passed),
            "note": self.note,
        }


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    ok: bool = True

    def add(self, name, residual, passed, note=""):
        self.checks.append(
            ValidationCheck(name=name, residual=float(residual), passed=bool(passed), note=note)
        )
        self.ok = self.ok and bool(passed)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {"ok": self.ok, "checks": [c.as_dict() for c in self.checks]}


def validate_quantum_group(structure, delta, tol=1e-8, _core=None):
    """Residual report for the quantum-group axioms; never raises on math.

    Checks: Delta is a unital *-homomorphism, coassociativity, the two
    cancellation (density) bijections, Haar existence/uniqueness/traciality/
    faithfulness, and the antipode identities.
    """
    report = ValidationReport()
    dim = structure.dim
    delta = np.asarray(delta, dtype=complex)
    if delta.shape != (dim * dim, dim):
        report.add(
            "delta_shape",
            0.0,
            False,
            f"expected {(dim * dim, dim)}, got {delta.shape}",
        )
        return report
    report.add("delta_shape", 0.0, True)

    delta3 = delta.reshape(dim, dim, dim)
    mult3 = mult_tensor(structure)
    t2 = TensorSquare(structure)
    unit = identity(structure).coords()
    star_idx = _star_cache(structure)

    # unital
    res = float(np.max(np.abs(delta @ unit - np.kron(unit, unit))))
    report.add("delta_unital", res, res <= tol)

    # star homomorphism: Delta(x*) = Delta(x)*
    lhs = delta[:, star_idx]
    paa = star_idx[:, None] * dim + star_idx[None, :]
    rhs = np.empty_like(delta)
    rhs[paa.reshape(-1), :] = np.conj(delta)
    res = float(np.max(np.abs(lhs - rhs)))
    report.add("delta_star_hom", res, res <= tol)

    # multiplicativity, batched over the right factor
    delta_t2 = t2.to_t2(delta.T)  # (dim, dim^2) rows are Delta(e_J) in block coords
    delta_blocks = split_blocks(t2.structure, delta_t2)
    lhs_all = np.einsum("dK,IJK->IJd", delta, mult3, optimize=True)
    res = 0.0
    for i_basis in range(dim):
        di = [blk[i_basis] for blk in delta_blocks]
        prod_blocks = [
            np.einsum("ab,Jbc->Jac", blk_i, blk_all)
            for blk_i, blk_all in zip(di, delta_blocks)
        ]
        prod = t2.from_t2(join_blocks(t2.structure, prod_blocks))
        res = max(res, float(np.max(np.abs(lhs_all[i_basis] - prod))))
    report.add("delta_multiplicative", res, res <= tol)

    # coassociativity
    left = np.einsum("pqi,ijk->pqjk", delta3, delta3, optimize=True)
    right = np.einsum("qrj,ijk->iqrk", delta3, delta3, optimize=True)
    res = float(np.max(np.abs(left - right)))
    report.add("coassociativity", res, res <= tol)

    # cancellation bijectivity: a (x) b -> Delta(a)(1 (x) b) and (b (x) 1)
    basis_aa_right = np.empty((dim, dim * dim), dtype=complex)
    basis_aa_left = np.empty((dim, dim * dim), dtype=complex)
    for j in range(dim):
        ej = np.zeros(dim, dtype=complex)
        ej[j] = 1.0
        basis_aa_right[j] = np.kron(unit, ej)
        basis_aa_left[j] = np.kron(ej, unit)
    right_blocks = split_blocks(t2.structure, t2.to_t2(basis_aa_right))
    left_blocks = split_blocks(t2.structure, t2.to_t2(basis_aa_left))
    m_right = np.empty((dim * dim, dim * dim), dtype=complex)
    m_left = np.empty((dim * dim, dim * dim), dtype=complex)
    for i_basis in range(dim):
        di = [blk[i_basis] for blk in delta_blocks]
        pr = [np.einsum("ab,Jbc->Jac", bi, br) for bi, br in zip(di, right_blocks)]
        pl = [np.einsum("ab,Jbc->Jac", bi, bl) for bi, bl in zip(di, left_blocks)]
        pr = t2.from_t2(join_blocks(t2.structure, pr))
        pl = t2.from_t2(join_blocks(t2.structure, pl))
        for j in range(dim):
            m_right[:, i_basis * dim + j] = pr[j]
            m_left[:, i_basis * dim + j] = pl[j]
    for name, mat in (("cancellation_right", m_right), ("cancellation_left", m_left)):
        s = np.linalg.svd(mat, compute_uv=False, hermitian=False)
        ratio = float(s[-1] / max(s[0], 1e-300))
        report.add(name, ratio, ratio > 1e-10, note="smallest/largest singular value")

    # Haar state
    if _core is not None:
        haar_cov, null_dim, haar_res = (
            _core.haar_cov,
            _core.haar_null_dim,
            _core.haar_residual,
        )
    else:
        haar_cov, null_dim, haar_res = _solve_haar(structure, delta3)
    if haar_cov is None or null_dim != 1:
        report.add(
            "haar_exists_unique",
            float(null_dim),
            False,
            f"invariant functional space has dimension {null_dim}",
        )
        return report
    report.add("haar_exists_unique", haar_res, haar_res <= 1e-7, note="invariance residual")

    h = Functional.from_covector(structure, haar_cov)
    dens = h.density
    res = max(
        float(np.max(np.abs(b - b.conj().T), initial=0.0)) for b in dens.blocks
    )
    min_eig = min(
        float(np.linalg.eigvalsh((b + b.conj().T) / 2).min()) for b in dens.blocks
    )
    report.add("haar_state", abs(dens.trace() - 1.0), abs(dens.trace() - 1.0) <= 1e-8)
    # traciality: h(xy) = h(yx) on basis pairs
    hv = haar_cov
    tr_res = float(
        np.max(np.abs(np.einsum("IJK,K->IJ", mult3, hv) - np.einsum("JIK,K->IJ", mult3, hv)))
    )
    report.add("haar_tracial", tr_res, tr_res <= tol)
    report.add("haar_faithful", min_eig, min_eig > 1e-10, note="min eigenvalue of density")
    wres = float(np.max(np.abs(haar_cov - trace_covector(structure))))
    report.add(
        "weights_match_haar",
        wres,
        wres <= 1e-8,
        note="declared weights must reproduce the Haar state",
    )

    # counit and antipode
    if _core is not None:
        counit_cov, c_res = _core.counit_cov, _core.counit_residual
        smat, s_res = _core.antipode, _core.antipode_residual
    else:
        counit_cov, c_res = _solve_counit(structure, delta3)
        smat, s_res = _solve_antipode(structure, delta3, mult3, counit_cov)
    report.add("counit", c_res, c_res <= 1e-7)
    report.add("antipode", s_res, s_res <= 1e-7)
    if s_res <= 1e-7:
        res = float(np.max(np.abs(smat @ smat - np.eye(dim))))
        report.add("antipode_involutive", res, res <= 1e-7)
        # antihomomorphism on basis pairs: S(e_I e_J) = S(e_J) S(e_I)
        lhs = np.einsum("lK,IJK->IJl", smat, mult3, optimize=True)
        rhs = np.einsum("aJ,bI,abl->IJl", smat, smat, mult3, optimize=True)
        res = float(np.max(np.abs(lhs - rhs)))
        report.add("antipode_antihom", res, res <= 1e-6)
        res = float(np.max(np.abs(haar_cov @ smat - haar_cov)))
        report.add("haar_antipode_invariant", res, res <= 1e-7)
    return report


# -- builders ----------------------------------------------------------------


def build_function_algebra(cayley, name=None):
    """C(G) for a finite group: commutative algebra with Delta(f)(s,t) = f(st)."""
    identity_idx = groups.validate_cayley(cayley)
    t = np.asarray(cayley, dtype=int)
    n = t.shape[0]
    structure = BlockStructure((1,) * n, (1.0 / n,) * n)
    delta = np.zeros((n * n, n), dtype=complex)
    for s in range(n):
        for u in range(n):
            delta[s * n + u, t[s, u]] = 1.0
    qg = QuantumGroup(structure, delta, name=name or f"C(G{n})")
    qg.cayley = t.tolist()
    return qg


def build_group_algebra(cayley, name=None):
    """C*(Gamma): the group algebra in block form with Delta(lam) = lam (x) lam."""
    identity_idx = groups.validate_cayley(cayley)
    t = np.asarray(cayley, dtype=int)
    n = t.shape[0]
    mult = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            mult[i, j, t[i, j]] = 1.0
    inv = groups.inverses(cayley, identity_idx)
    star = np.zeros((n, n), dtype=complex)
    for i in range(n):
        star[inv[i], i] = 1.0
    trace = np.zeros(n, dtype=complex)
    trace[identity_idx] = 1.0
    unit = np.zeros(n, dtype=complex)
    unit[identity_idx] = 1.0
    alg = StarAlgebra(mult, star, trace, unit)
    dec = decompose(alg, np.random.default_rng(DERIVATION_SEED + n))

    structure = BlockStructure(
        tuple(b.dim for b in dec.blocks), tuple(b.weight for b in dec.blocks)
    )
    rows = []
    for b in dec.blocks:
        for i in range(b.dim):
            for j in range(b.dim):
                rows.append(b.units[i, j])
    umat = np.array(rows)  # (dim, n): unit coords over the lambda basis
    b_cols = np.linalg.inv(umat.T)  # lambda(gamma) in unit coordinates
    kr = np.stack([np.kron(b_cols[:, g], b_cols[:, g]) for g in range(n)], axis=1)
    delta = kr @ umat.T
    qg = QuantumGroup(structure, delta, name=name or f"C*(G{n})")
    qg.cayley = t.tolist()
    qg.group_basis = b_cols
    return qg


def tensor_product(g1, g2, name=None):
    """A1 (x) A2 with Delta = (id (x) flip (x) id)(Delta1 (x) Delta2)."""
    structure, pair = tensor_structure(g1.structure, g2.structure)
    d1, d2 = g1.dim, g2.dim
    dim = structure.dim
    t6 = np.einsum("IJK,PQR->IPJQKR", g1.delta3, g2.delta3, optimize=True)
    t6 = t6.reshape(dim, dim, dim)
    perm = pair.reshape(-1)
    d3 = np.empty((dim, dim, dim), dtype=complex)
    d3[np.ix_(perm, perm, perm)] = t6
    delta = d3.reshape(dim * dim, dim)
    return QuantumGroup(
        structure, delta, name=name or f"{g1.name}(x){g2.name}"
    )


def trivial_quantum_group():
    structure = BlockStructure((1,), (1.0,))
    delta = np.ones((1, 1), dtype=complex)
    return QuantumGroup(structure, delta, name="trivial")
