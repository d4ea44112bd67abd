"""Numerical Artin-Wedderburn decomposition of abstract *-algebras.

Input: a finite-dimensional associative algebra over C given by its
structure constants, a *-involution, and a faithful positive tracial
functional.  Output: minimal central projections and a full system of
star-compatible matrix units (e_ij* = e_ji), i.e. an explicit
*-isomorphism onto a direct sum of matrix blocks.

Block detection samples a random self-adjoint central element and
diagonalizes multiplication by it; eigenvalue collisions (gap below the
cluster threshold) trigger a resample with a fresh draw, up to a retry cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAP_THRESHOLD = 1e-6
RANK_TOL = 1e-10
MAX_RETRIES = 5


class DecompositionError(RuntimeError):
    """Block detection failed beyond the retry budget."""


class StarAlgebra:
    """Abstract *-algebra: structure tensor, involution, trace, unit.

    ``mult[i, j, :]`` holds the coordinates of ``e_i e_j``; the involution
    acts as ``a* = S conj(a)`` on coordinates; ``trace`` is a faithful
    positive tracial functional given by its covector.
    """

    def __init__(self, mult, star_matrix, trace_vec, unit):
        self.mult = np.asarray(mult, dtype=complex)
        self.star_matrix = np.asarray(star_matrix, dtype=complex)
        self.trace_vec = np.asarray(trace_vec, dtype=complex)
        self.unit = np.asarray(unit, dtype=complex)
        self.dim = self.mult.shape[0]

    def mul(self, a, b):
        return np.einsum("i,j,ijk->k", a, b, self.mult, optimize=True)

    def star(self, a):
        return self.star_matrix @ np.conj(a)

    def tr(self, a):
        return complex(self.trace_vec @ a)

    def inner(self, a, b):
        """GNS inner product <a, b> = tr(b* a)."""
        return self.tr(self.mul(self.star(b), a))

    def gram(self):
        """Hermitian Gram matrix with <a, b> = b^H G a on coordinates."""
        basis = np.eye(self.dim)
        g = np.empty((self.dim, self.dim), dtype=complex)
        for i in range(self.dim):
            for j in range(self.dim):
                g[i, j] = self.inner(basis[j], basis[i])
        return (g + g.conj().T) / 2

    def left_mult_matrix(self, a):
        """Matrix of x -> a x on coordinates."""
        return np.einsum("i,ijk->kj", a, self.mult, optimize=True)

    def right_mult_matrix(self, a):
        """Matrix of x -> x a on coordinates."""
        return np.einsum("j,ijk->ki", a, self.mult, optimize=True)


@dataclass
class Block:
    dim: int
    units: np.ndarray  # (dim, dim, alg.dim) coordinates of matrix units e_ij
    weight: float  # trace of a minimal projection


@dataclass
class Decomposition:
    blocks: list
    residual: float

    @property
    def block_dims(self):
        return tuple(b.dim for b in self.blocks)


class _Frame:
    """GNS-orthonormalization helper bound to one algebra."""

    def __init__(self, alg):
        self.alg = alg
        gram = alg.gram()
        evals = np.linalg.eigvalsh(gram)
        if evals.min() <= RANK_TOL:
            raise DecompositionError(
                f"trace is not faithful/positive (Gram min eigenvalue {evals.min():.3e})"
            )
        self.chol = np.linalg.cholesky(gram)  # G = L L^H; ON coords y = L^H x

    def to_on(self, rows):
        return np.asarray(rows, dtype=complex) @ np.conj(self.chol)

    def from_on(self, rows):
        return np.linalg.solve(self.chol.conj().T, np.asarray(rows).T).T

    def orthonormal_span(self, vectors):
        if not len(vectors):
            return np.zeros((0, self.alg.dim), dtype=complex)
        on = self.to_on(vectors)
        _, s, vh = np.linalg.svd(on, full_matrices=False)
        rank = int(np.sum(s > RANK_TOL * max(s[0], 1.0)))
        return self.from_on(vh[:rank])

    def operator_on_span(self, op_matrix, span_rows):
        """Compress x -> op x to the given GNS-orthonormal rows."""
        images = span_rows @ op_matrix.T
        coords = np.array(
            [[self.alg.inner(img, row) for row in span_rows] for img in images]
        )
        return coords.T  # acts on coefficient vectors in the span basis


def _cluster(eigenvalues, gap=GAP_THRESHOLD):
    vals = np.sort(np.asarray(eigenvalues, dtype=float))
    clusters = [[vals[0]]]
    for v in vals[1:]:
        if v - clusters[-1][-1] > gap:
            clusters.append([])
        clusters[-1].append(v)
    means = [float(np.mean(c)) for c in clusters]
    sizes = [len(c) for c in clusters]
    return means, sizes


def _center_basis(alg):
    basis = np.eye(alg.dim)
    rows = [
        alg.left_mult_matrix(basis[i]) - alg.right_mult_matrix(basis[i])
        for i in range(alg.dim)
    ]
    m = np.vstack(rows)
    _, s, vh = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * max(s[0], 1.0)))
    return vh[rank:].conj()


def _central_projections(alg, frame, rng):
    """Minimal central projections via a random self-adjoint central element."""
    center = frame.orthonormal_span(_center_basis(alg))
    m = center.shape[0]
    if m == 1:
        return [alg.unit.copy()]
    last_error = "no attempt"
    for attempt in range(MAX_RETRIES):
        coeff = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        z = coeff @ center
        z = (z + alg.star(z)) / 2
        mat = frame.operator_on_span(alg.left_mult_matrix(z), center)
        mat = (mat + mat.conj().T) / 2
        eigs, vecs = np.linalg.eigh(mat)
        means, sizes = _cluster(eigs)
        if len(means) != m:
            last_error = f"eigenvalue collision ({len(means)} clusters for {m})"
            continue
        projections = []
        ok = True
        for k in range(m):
            v = vecs[:, k] @ center
            vv = alg.mul(v, v)
            scale = alg.inner(vv, v) / alg.inner(v, v)
            if abs(scale) < 1e-12:
                ok = False
                last_error = "nilpotent eigenvector"
                break
            p = v / scale
            p = (p + alg.star(p)) / 2
            if np.linalg.norm(alg.mul(p, p) - p) > 1e-7:
                ok = False
                last_error = "non-idempotent central candidate"
                break
            projections.append(p)
        if ok and np.linalg.norm(sum(projections) - alg.unit) < 1e-7:
            return projections
        last_error = last_error if not ok else "projections do not sum to the unit"
    raise DecompositionError(
        f"central projections unstable after {MAX_RETRIES} retries: {last_error}"
    )


def _minimal_projections(alg, frame, p, ideal_on, n, rng):
    """n orthogonal minimal projections summing to p inside the block pA."""
    for attempt in range(2 * MAX_RETRIES):
        coeff = rng.standard_normal(ideal_on.shape[0]) + 1j * rng.standard_normal(
            ideal_on.shape[0]
        )
        y = coeff @ ideal_on
        y = (y + alg.star(y)) / 2
        mat = frame.operator_on_span(alg.left_mult_matrix(y), ideal_on)
        mat = (mat + mat.conj().T) / 2
        eigs = np.linalg.eigvalsh(mat)
        means, sizes = _cluster(eigs)
        if len(means) != n or any(s != n for s in sizes):
            continue
        projections = []
        for a, la in enumerate(means):
            f = p.copy()
            for b, lb in enumerate(means):
                if a != b:
                    f = alg.mul(f, (y - lb * p) / (la - lb))
            f = (f + alg.star(f)) / 2
            projections.append(f)
        good = all(
            np.linalg.norm(alg.mul(f, f) - f) < 1e-7 for f in projections
        ) and np.linalg.norm(sum(projections) - p) < 1e-7
        if good:
            return projections
    raise DecompositionError("could not isolate minimal projections in a block")


def _matrix_units(alg, frame, p, n, rng):
    basis = np.eye(alg.dim)
    ideal_on = frame.orthonormal_span([alg.mul(p, basis[i]) for i in range(alg.dim)])
    if ideal_on.shape[0] != n * n:
        raise DecompositionError(
            f"ideal dimension {ideal_on.shape[0]} does not match block size {n}"
        )
    if n == 1:
        units = np.empty((1, 1, alg.dim), dtype=complex)
        units[0, 0] = p
        return units, 0.0

    minimal = _minimal_projections(alg, frame, p, ideal_on, n, rng)
    e11 = minimal[0]
    w11 = alg.tr(e11).real
    first_row = [e11]
    for j in range(1, n):
        fj = minimal[j]
        v = None
        for attempt in range(2 * MAX_RETRIES):
            r = rng.standard_normal(alg.dim) + 1j * rng.standard_normal(alg.dim)
            cand = alg.mul(e11, alg.mul(r, fj))
            c = alg.tr(alg.mul(cand, alg.star(cand))).real
            if c > 1e-10 * w11:
                v = cand / math.sqrt(c / w11)
                break
        if v is None:
            raise DecompositionError("vanishing corner between minimal projections")
        first_row.append(v)

    units = np.empty((n, n, alg.dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            units[i, j] = alg.mul(alg.star(first_row[i]), first_row[j])

    res = 0.0
    for i in range(n):
        for j in range(n):
            res = max(res, float(np.linalg.norm(alg.star(units[i, j]) - units[j, i])))
            for k in range(n):
                for l in range(n):
                    prod = alg.mul(units[i, j], units[k, l])
                    target = units[i, l] if j == k else np.zeros_like(prod)
                    res = max(res, float(np.linalg.norm(prod - target)))
    res = max(res, float(np.linalg.norm(sum(units[i, i] for i in range(n)) - p)))
    return units, res


def decompose(alg, rng):
    """Split the algebra into matrix blocks with explicit matrix units."""
    frame = _Frame(alg)
    projections = _central_projections(alg, frame, rng)

    blocks = []
    residual = 0.0
    basis = np.eye(alg.dim)
    for p in projections:
        ideal = frame.orthonormal_span([alg.mul(p, basis[i]) for i in range(alg.dim)])
        n = math.isqrt(ideal.shape[0])
        if n * n != ideal.shape[0]:
            raise DecompositionError(
                f"ideal dimension {ideal.shape[0]} is not a perfect square"
            )
        units, res = _matrix_units(alg, frame, p, n, rng)
        residual = max(residual, res)
        blocks.append(Block(dim=n, units=units, weight=alg.tr(units[0, 0]).real))

    blocks.sort(
        key=lambda b: (
            b.dim,
            round(b.weight, 9),
            tuple(np.round(np.abs(b.units[0, 0]), 6)),
        )
    )
    return Decomposition(blocks=blocks, residual=residual)
