"""Certification of L_p-improving convolution operators on finite quantum groups.

The five equivalent conditions for a state phi with psi = (phi o S) * phi:

  (1) exists 1 < p < 2 with ||phi * x||_2 <= ||x||_p for all x;
  (2) the same for x * phi;
  (3) ||phi_hat(alpha)|| < 1 for every nontrivial irreducible alpha;
  (4) the Cesaro averages of psi^{*k} converge to the Haar state;
  (5) psi is non-degenerate.

The checker computes all five routes, certifies a witness exponent through
the spectral-gap bound lambda * c_p < sqrt(p - 1), backs (1)/(2) with
randomized verification on positive-cone and general samples, and asserts
agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import ergodic, groups
from .fdalgebra import (
    AlgebraElement,
    BlockStructure,
    DomainError,
    Functional,
    batch_l2_norms,
    batch_lp_norms,
    from_coords,
    identity,
    is_positive,
    lp_norm,
    random_coords,
    random_positive_coords,
    trace_covector,
)
from .fourier import compose_with_antipode, fourier_transform
from .qgroup import QuantumGroup, tensor_structure

BORDERLINE_TOL = 1e-9


# -- maps on an algebra -------------------------------------------------------


@dataclass
class MapOnAlgebra:
    """A linear map on the algebra in matrix-unit coordinates, with flags."""

    structure: BlockStructure
    matrix: np.ndarray
    unital: bool = False
    trace_preserving: bool = False
    two_positive: bool = None  # sampled, set by check_two_positive

    @classmethod
    def build(cls, structure, matrix, check=True):
        matrix = np.asarray(matrix, dtype=complex)
        m = cls(structure=structure, matrix=matrix)
        if check:
            unit = identity(structure).coords()
            tau = trace_covector(structure)
            m.unital = bool(np.max(np.abs(matrix @ unit - unit)) <= 1e-10)
            m.trace_preserving = bool(np.max(np.abs(tau @ matrix - tau)) <= 1e-10)
        return m

    @classmethod
    def right_convolution(cls, qg, state):
        """T_phi: x -> x * phi = (phi (x) id) Delta(x)."""
        return cls.build(qg.structure, qg.conv_right_matrix(state.covector()))

    @classmethod
    def left_convolution(cls, qg, state):
        """T'_phi: x -> phi * x = (id (x) phi) Delta(x)."""
        return cls.build(qg.structure, qg.conv_left_matrix(state.covector()))

    def apply(self, x):
        return from_coords(self.structure, self.matrix @ x.coords())

    def adjoint_matrix(self):
        """Adjoint with respect to the L_2(tau) inner product."""
        scale = np.sqrt(self.structure.unit_weights)
        on = scale[:, None] * self.matrix / scale[None, :]
        back = on.conj().T
        return back * scale[:, None] / scale[None, :]


def check_two_positive(map_on_algebra, samples=1000, seed=0, tol=1e-9):
    """Sampled 2-positivity: Id_{M2} (x) T preserves random positive elements."""
    structure = map_on_algebra.structure
    m2 = BlockStructure((2,), (0.5,))
    big, pair = tensor_structure(m2, structure)
    rng = np.random.default_rng(seed)
    coords = random_positive_coords(big, rng, samples)
    # apply Id (x) T through the pairing table
    ct = coords[:, pair.reshape(-1)].reshape(samples, m2.dim, structure.dim)
    ct = np.einsum("sma,ba->smb", ct, map_on_algebra.matrix, optimize=True)
    out = np.empty_like(coords)
    out[:, pair.reshape(-1)] = ct.reshape(samples, -1)
    min_eig = 0.0
    for i, n in enumerate(big.block_dims):
        off = big._offsets[i]
        mats = out[:, off : off + n * n].reshape(samples, n, n)
        herm = (mats + np.conj(np.swapaxes(mats, 1, 2))) / 2
        min_eig = min(min_eig, float(np.linalg.eigvalsh(herm).min()))
    ok = min_eig >= -tol
    map_on_algebra.two_positive = bool(ok)
    return ok, min_eig


# -- spectral gap -------------------------------------------------------------


def spectral_gap(map_or_matrix, structure=None, return_witness=False):
    """Largest singular value of T on the L_2-orthocomplement of the unit."""
    if isinstance(map_or_matrix, MapOnAlgebra):
        structure = map_or_matrix.structure
        matrix = map_or_matrix.matrix
    else:
        matrix = np.asarray(map_or_matrix, dtype=complex)
    scale = np.sqrt(structure.unit_weights)
    on = scale[:, None] * matrix / scale[None, :]
    u1 = scale * identity(structure).coords()  # unit in ON coordinates, norm 1
    u1 = u1 / np.linalg.norm(u1)
    proj = np.eye(structure.dim) - np.outer(u1, u1.conj())
    restricted = proj @ on @ proj
    u, s, vh = np.linalg.svd(restricted)
    lam = float(s[0])
    if not return_witness:
        return lam
    witness_on = vh[0].conj()
    witness = from_coords(structure, witness_on / scale)
    return lam, witness


# -- best constant c_p --------------------------------------------------------

_CP_CACHE = {}


def _ratio_and_gradient(structure, coords, p):
    """f = ||x||_2 / ||x||_p and its gradient, batched over rows."""
    count = coords.shape[0]
    n2sq = np.zeros(count)
    npp = np.zeros(count)
    grads_p = np.zeros_like(coords)
    for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
        off = structure._offsets[i]
        mats = coords[:, off : off + n * n].reshape(count, n, n)
        n2sq += w * np.sum(np.abs(mats) ** 2, axis=(1, 2))
        u, s, vh = np.linalg.svd(mats)
        npp += w * np.sum(s**p, axis=1)
        sp = s ** (p - 1.0) if p > 1 else np.ones_like(s)
        g = np.einsum("bij,bj,bjk->bik", u, sp, vh)
        grads_p[:, off : off + n * n] = (w * p) * g.reshape(count, n * n)
    n2 = np.sqrt(np.maximum(n2sq, 1e-300))
    npnorm = np.maximum(npp, 1e-300) ** (1.0 / p)
    f = n2 / npnorm
    g2 = structure.unit_weights[None, :] * coords / n2[:, None]
    gp = (npnorm ** (1.0 - p))[:, None] / p * grads_p
    grad = (g2 * npnorm[:, None] - n2[:, None] * gp) / (npnorm**2)[:, None]
    return f, grad


def _project_trace_zero(structure, coords):
    tau = trace_covector(structure)
    unit = identity(structure).coords()
    tr = coords @ tau
    return coords - tr[:, None] * unit[None, :]


def best_constant_cp(structure, p, restarts=32, iters=300, seed=0, polish=True):
    """sup ||x||_2 / ||x||_p over nonzero trace-zero x, with the best witness.

    Projected gradient ascent on the real coordinates from ``restarts``
    random starts, followed by a derivative-free local polish.  The search
    runs over general complex elements: the maximizer need not be
    self-adjoint.
    """
    if not (1.0 <= p <= 2.0):
        raise DomainError(f"best constant defined for p in [1, 2], got {p}")
    if p == 2.0:
        witness = None
        return 1.0, witness

    rng = np.random.default_rng(seed)
    unit = identity(structure).coords()
    x = random_coords(structure, rng, restarts)
    x = _project_trace_zero(structure, x)
    x /= np.maximum(batch_l2_norms(structure, x), 1e-300)[:, None]
    steps = np.full(restarts, 0.3)
    f_cur, grad = _ratio_and_gradient(structure, x, p)
    best_f = f_cur.copy()
    best_x = x.copy()
    for _ in range(iters):
        cand = x + steps[:, None] * grad
        cand = _project_trace_zero(structure, cand)
        norms = np.maximum(batch_l2_norms(structure, cand), 1e-300)
        cand /= norms[:, None]
        f_new, grad_new = _ratio_and_gradient(structure, cand, p)
        improved = f_new > f_cur
        x = np.where(improved[:, None], cand, x)
        grad = np.where(improved[:, None], grad_new, grad)
        f_cur = np.where(improved, f_new, f_cur)
        steps = np.where(improved, steps * 1.1, steps * 0.5)
        steps = np.clip(steps, 1e-9, 10.0)
        gained = f_cur > best_f
        best_f = np.where(gained, f_cur, best_f)
        best_x = np.where(gained[:, None], x, best_x)

    k = int(np.argmax(best_f))
    value = float(best_f[k])
    winner = best_x[k]

    if polish:
        dim = structure.dim

        def objective(real_vec):
            v = real_vec[:dim] + 1j * real_vec[dim:]
            v = v - (trace_covector(structure) @ v) * unit
            n = batch_l2_norms(structure, v[None, :])[0]
            if n < 1e-12:
                return 0.0
            v = v / n
            return -float(
                1.0 / batch_lp_norms(structure, v[None, :], p)[0]
            )

        start = np.concatenate([winner.real, winner.imag])
        res = scipy.optimize.minimize(
            objective,
            start,
            method="Powell",
            options={"maxiter": 60 * dim, "xtol": 1e-10, "ftol": 1e-12},
        )
        if -res.fun > value:
            value = float(-res.fun)
            v = res.x[:dim] + 1j * res.x[dim:]
            v = v - (trace_covector(structure) @ v) * unit
            winner = v / batch_l2_norms(structure, v[None, :])[0]

    return value, from_coords(structure, winner)


def _cached_cp(structure, p, seed=0):
    key = (structure, round(float(p), 12))
    if key not in _CP_CACHE:
        _CP_CACHE[key] = best_constant_cp(structure, p, seed=seed)[0]
    return _CP_CACHE[key]


def witness_p(structure, lam, margin=1e-6, iterations=10, seed=0):
    """Bisect downward from p = 2 for a p with (p-1) > lam^2 c_p^2 + margin.

    Such p exists whenever lam < 1 because (p-1)/c_p^2 -> 1 as p -> 2.
    Returns the smallest tested exponent satisfying the bound, always
    strictly inside (1, 2); None when lam >= 1.
    """
    if lam >= 1.0 - 1e-12:
        return None

    def accepted(p):
        cp = _cached_cp(structure, p, seed=seed)
        return (p - 1.0) > lam * lam * cp * cp + margin

    lo, hi = 1.0, 2.0
    best = None
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if accepted(mid):
            best = mid
            hi = mid
        else:
            lo = mid
    if best is None:
        # lambda extremely close to 1: probe a sequence approaching 2
        p = 2.0 - 1e-3
        while p < 2.0 - 1e-12:
            if accepted(p):
                return p
            p = 2.0 - (2.0 - p) / 8.0
    return best


# -- randomized verification --------------------------------------------------


@dataclass
class ViolationSearch:
    max_slack: float
    witness: np.ndarray
    samples: int

    @property
    def violated(self):
        return self.max_slack > 1e-8


def improvement_violation_search(
    structure,
    matrix,
    p,
    samples=10000,
    seed=0,
    extra_directions=None,
):
    """max ||T x||_2 - ||x||_p over random samples; > 1e-8 means violation.

    Half the budget goes to positive-cone samples g* g (sufficient by the
    2-positive reduction), half to general Gaussian elements; adversarial
    directions can be appended, and each sample is also swept along
    1 + eps * x to probe the neighborhood of the unit.
    """
    rng = np.random.default_rng(seed)
    half = samples // 2
    batches = [
        random_positive_coords(structure, rng, half),
        random_coords(structure, rng, samples - half),
    ]
    if extra_directions is not None and len(extra_directions):
        extra = np.asarray(extra_directions, dtype=complex)
        batches.append(extra)
        unit = identity(structure).coords()
        eps_grid = np.array([1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0])
        swept = (
            unit[None, None, :] + eps_grid[:, None, None] * extra[None, :, :]
        ).reshape(-1, structure.dim)
        batches.append(swept)
    coords = np.vstack(batches)
    t_out = coords @ matrix.T
    lhs = batch_l2_norms(structure, t_out)
    rhs = batch_lp_norms(structure, coords, p)
    slack = lhs - rhs
    k = int(np.argmax(slack))
    return ViolationSearch(
        max_slack=float(slack[k]), witness=coords[k], samples=coords.shape[0]
    )


# -- the five-condition report ------------------------------------------------


@dataclass
class ConditionsReport:
    improving_left: bool
    improving_right: bool
    fourier_strict_contraction: bool
    cesaro_to_haar: bool
    nondegenerate: bool
    lam: float
    witness_exponent: float = None
    cp_at_witness: float = None
    fourier_norms: list = field(default_factory=list)
    max_nontrivial_norm: float = None
    max_slack_left: float = None
    max_slack_right: float = None
    cesaro_distance: float = None
    limit_min_eigenvalue: float = None
    samples: int = 0
    seed: int = 0
    indeterminate: bool = False
    consistent: bool = True

    @property
    def all_conditions(self):
        return (
            self.improving_left,
            self.improving_right,
            self.fourier_strict_contraction,
            self.cesaro_to_haar,
            self.nondegenerate,
        )

    @property
    def improving(self):
        return all(self.all_conditions)

    def as_dict(self):
        return {
            "conditions": {
                "(1) left convolution L_p->L_2 improving": self.improving_left,
                "(2) right convolution L_p->L_2 improving": self.improving_right,
                "(3) Fourier coefficients strict contractions": self.fourier_strict_contraction,
                "(4) Cesaro limit of psi^{*k} is the Haar state": self.cesaro_to_haar,
                "(5) psi = (phi o S) * phi non-degenerate": self.nondegenerate,
            },
            "improving": self.improving,
            "spectral_gap": self.lam,
            "witness_exponent": self.witness_exponent,
            "cp_at_witness": self.cp_at_witness,
            "fourier_operator_norms": self.fourier_norms,
            "max_nontrivial_fourier_norm": self.max_nontrivial_norm,
            "max_slack_left": self.max_slack_left,
            "max_slack_right": self.max_slack_right,
            "cesaro_distance_to_haar": self.cesaro_distance,
            "cesaro_limit_min_eigenvalue": self.limit_min_eigenvalue,
            "samples": self.samples,
            "seed": self.seed,
            "indeterminate": self.indeterminate,
            "consistent": self.consistent,
        }


def check_conditions(qg, state, samples=10000, seed=0, tol=BORDERLINE_TOL):
    """Evaluate and cross-check the five characterizations for one state."""
    if not state.is_state(1e-8):
        raise DomainError("check_conditions needs a state (positive, unital)")

    phat = fourier_transform(qg, state)
    norms = phat.operator_norms()
    nontrivial = norms[1:]
    max_norm = max(nontrivial) if nontrivial else 0.0
    # strict inequality with tolerance: norms within 1e-10 of 1 are exactly 1
    # (states always have ||phi_hat|| <= 1); the band below that is a tie we
    # refuse to resolve.
    cond3 = max_norm < 1.0 - tol
    indeterminate = (not cond3) and abs(max_norm - 1.0) > 1e-10

    t_right = MapOnAlgebra.right_convolution(qg, state)
    t_left = MapOnAlgebra.left_convolution(qg, state)
    lam = spectral_gap(t_right)
    lam_left = spectral_gap(t_left)
    if abs(lam - lam_left) > 1e-8:
        raise RuntimeError(
            f"left/right spectral gaps disagree: {lam} vs {lam_left}"
        )

    psi_cov = qg.convolve_covectors(
        qg.compose_antipode(state.covector()), state.covector()
    )
    psi = Functional.from_covector(qg.structure, psi_cov)
    ces = ergodic.cesaro_limit(qg, psi)
    cond4 = ces.is_haar
    cond5 = ces.limit_min_eigenvalue > 1e-10

    p = witness_p(qg.structure, lam, seed=seed) if lam < 1.0 - tol else None
    cond12 = p is not None
    max_slack_left = max_slack_right = None
    cp_val = None
    if cond12:
        cp_val = _cached_cp(qg.structure, p, seed=seed)
        if lam * cp_val >= np.sqrt(p - 1.0):
            raise RuntimeError(
                "witness exponent violates the bound lambda c_p < sqrt(p-1)"
            )
        _, gap_witness = spectral_gap(t_right, return_witness=True)
        extra = gap_witness.coords()[None, :]
        sl = improvement_violation_search(
            qg.structure, t_left.matrix, p, samples=samples, seed=seed, extra_directions=extra
        )
        sr = improvement_violation_search(
            qg.structure, t_right.matrix, p, samples=samples, seed=seed + 1, extra_directions=extra
        )
        max_slack_left, max_slack_right = sl.max_slack, sr.max_slack
        cond1 = not sl.violated
        cond2 = not sr.violated
    else:
        cond1 = cond2 = False

    report = ConditionsReport(
        improving_left=cond1,
        improving_right=cond2,
        fourier_strict_contraction=cond3,
        cesaro_to_haar=cond4,
        nondegenerate=cond5,
        lam=float(lam),
        witness_exponent=p,
        cp_at_witness=cp_val,
        fourier_norms=[float(v) for v in norms],
        max_nontrivial_norm=float(max_norm),
        max_slack_left=max_slack_left,
        max_slack_right=max_slack_right,
        cesaro_distance=float(ces.distance_to_haar),
        limit_min_eigenvalue=float(ces.limit_min_eigenvalue),
        samples=samples,
        seed=seed,
        indeterminate=bool(indeterminate),
        consistent=True,
    )
    if not indeterminate:
        flags = set(report.all_conditions)
        report.consistent = len(flags) == 1
    return report


# -- classical corollaries ----------------------------------------------------


def ritter_check(cayley, support):
    """True iff the subgroup generated by { i^{-1} j : i, j in supp } is G."""
    if not len(support):
        raise DomainError("empty support")
    identity_idx = groups.validate_cayley(cayley)
    diff = groups.difference_set(cayley, identity_idx, support)
    closure = groups.subgroup_closure(cayley, diff)
    return len(closure) == len(cayley)


@dataclass
class SchurReport:
    improving: bool
    max_off_identity: float
    values: list
    positive_definite_min_eigenvalue: float
    cross_check: dict = None

    def as_dict(self):
        return {
            "improving": self.improving,
            "max_off_identity": self.max_off_identity,
            "values": self.values,
            "positive_definite_min_eigenvalue": self.positive_definite_min_eigenvalue,
            "cross_check": self.cross_check,
        }


def schur_check(qg_gamma, phi_values, cross_check_samples=0, seed=0):
    """Fourier-Schur multiplier criterion on a group algebra C*(Gamma).

    ``phi_values[gamma]`` is a positive definite function with phi(e) = 1;
    the multiplier M_phi(lambda(g)) = phi(g) lambda(g) improves L_p -> L_2
    iff |phi(gamma)| < 1 off the identity.
    """
    if qg_gamma.group_basis is None or qg_gamma.cayley is None:
        raise DomainError("schur_check needs a quantum group built from a group table")
    table = qg_gamma.cayley
    identity_idx = groups.validate_cayley(table)
    inv = groups.inverses(table, identity_idx)
    values = np.asarray(phi_values, dtype=complex)
    n = len(table)
    if values.shape != (n,):
        raise DomainError(f"need one value per group element, got {values.shape}")
    density_coords = qg_gamma.group_basis @ values[inv]
    density = from_coords(qg_gamma.structure, density_coords)
    pos = is_positive(density, 1e-9)
    if not pos.positive:
        raise DomainError(
            f"phi is not positive definite (density min eigenvalue {pos.min_eigenvalue:.3e})"
        )
    if abs(values[identity_idx] - 1.0) > 1e-9:
        raise DomainError("phi(e) must equal 1")

    off = [abs(values[g]) for g in range(n) if g != identity_idx]
    max_off = max(off) if off else 0.0
    report = SchurReport(
        improving=bool(max_off < 1.0 - BORDERLINE_TOL),
        max_off_identity=float(max_off),
        values=[complex(v) for v in values],
        positive_definite_min_eigenvalue=pos.min_eigenvalue,
    )
    if cross_check_samples:
        state = Functional(density)
        cc = check_conditions(qg_gamma, state, samples=cross_check_samples, seed=seed)
        report.cross_check = cc.as_dict()
        if not cc.indeterminate and cc.improving != report.improving:
            raise RuntimeError(
                "Schur criterion disagrees with the five-condition report"
            )
    return report


def completeness_witness_slack(structure, matrix, p, witness):
    """For a gap witness x with ||Tx||_2 = ||x||_2, find a violating input.

    Either the trace-zero witness itself violates ||Tx||_2 <= ||x||_p, or a
    sweep 1 + eps x does; returns the best slack found (positive = violation).
    """
    unit = identity(structure).coords()
    w = witness.coords() if isinstance(witness, AlgebraElement) else np.asarray(witness)
    eps_grid = np.concatenate([[0.0], np.geomspace(1e-4, 10.0, 40)])
    cands = [w] + [unit + e * w for e in eps_grid[1:]]
    coords = np.array(cands)
    lhs = batch_l2_norms(structure, coords @ matrix.T)
    rhs = batch_lp_norms(structure, coords, p)
    return float(np.max(lhs - rhs))
