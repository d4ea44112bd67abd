"""Finite-dimensional C*-algebras with a faithful tracial state.

An algebra is a weighted direct sum of complex matrix blocks
``A = M_{n_1} (+) ... (+) M_{n_m}`` carrying the trace

    tau(x) = sum_i w_i * Tr(x_i),

where ``w_i > 0`` is the trace of a minimal diagonal projection of block i
and ``sum_i w_i * n_i = 1`` so that tau is a state.  Elements, linear
functionals (stored by their density against tau) and the noncommutative
L_p norms live here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Algebraic identities are checked at 1e-10, spectral comparisons at 1e-8.
ALGEBRAIC_TOL = 1e-10
SPECTRAL_TOL = 1e-8
STATE_TOL = 1e-10
STRUCTURE_TOL = 1e-12


class ShapeError(ValueError):
    """Blocks or coordinates do not match the declared structure."""


class DomainError(ValueError):
    """An argument lies outside the mathematically allowed range."""


class BlockStructure:
    """Shape and trace weights of a direct sum of matrix blocks."""

    def __init__(self, block_dims, block_weights):
        dims = tuple(int(n) for n in block_dims)
        weights = tuple(float(w) for w in block_weights)
        if len(dims) != len(weights) or not dims:
            raise ShapeError("need one weight per block and at least one block")
        if any(n < 1 for n in dims):
            raise ShapeError("block dimensions must be >= 1")
        if any(w <= 0 for w in weights):
            raise ShapeError("block weights must be positive")
        total = sum(w * n for n, w in zip(dims, weights))
        if abs(total - 1.0) > 1e-9:
            raise ShapeError(f"trace weights must sum to 1, got {total!r}")
        self.block_dims = dims
        self.block_weights = weights
        self.dim = sum(n * n for n in dims)
        offsets = []
        off = 0
        for n in dims:
            offsets.append(off)
            off += n * n
        self._offsets = tuple(offsets)
        # weight attached to each matrix-unit coordinate, in basis order
        self.unit_weights = np.concatenate(
            [np.full(n * n, w) for n, w in zip(dims, weights)]
        )

    def __eq__(self, other):
        return (
            isinstance(other, BlockStructure)
            and self.block_dims == other.block_dims
            and np.allclose(self.block_weights, other.block_weights, atol=STRUCTURE_TOL)
        )

    def __hash__(self):
        return hash((self.block_dims, tuple(round(w, 12) for w in self.block_weights)))

    def __repr__(self):
        return f"BlockStructure(dims={self.block_dims}, weights={self.block_weights})"

    def unit_index(self, block, row, col):
        """Basis index of the matrix unit e_{row,col} in the given block."""
        n = self.block_dims[block]
        return self._offsets[block] + row * n + col

    def unit_location(self, index):
        """Inverse of :meth:`unit_index`."""
        for i, n in enumerate(self.block_dims):
            off = self._offsets[i]
            if index < off + n * n:
                r, c = divmod(index - off, n)
                return i, r, c
        raise ShapeError(f"basis index {index} out of range")


class AlgebraElement:
    """An element of a block algebra, one complex matrix per block."""

    __slots__ = ("structure", "blocks")

    def __init__(self, structure, blocks):
        if len(blocks) != len(structure.block_dims):
            raise ShapeError("wrong number of blocks")
        mats = []
        for n, b in zip(structure.block_dims, blocks):
            m = np.asarray(b, dtype=complex)
            if m.shape != (n, n):
                raise ShapeError(f"block of shape {m.shape}, expected {(n, n)}")
            mats.append(m)
        self.structure = structure
        self.blocks = tuple(mats)

    # -- linear / algebra structure -------------------------------------

    def _check(self, other):
        if self.structure != other.structure:
            raise ShapeError("elements live on different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(
            self.structure, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(
            self.structure, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __neg__(self):
        return AlgebraElement(self.structure, [-a for a in self.blocks])

    def __rmul__(self, scalar):
        return AlgebraElement(self.structure, [scalar * a for a in self.blocks])

    def __mul__(self, scalar):
        return self.__rmul__(scalar)

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(
            self.structure, [a @ b for a, b in zip(self.blocks, other.blocks)]
        )

    def adjoint(self):
        return AlgebraElement(self.structure, [a.conj().T for a in self.blocks])

    def trace(self):
        """tau(x), the reference tracial state."""
        return complex(
            sum(w * np.trace(b) for w, b in zip(self.structure.block_weights, self.blocks))
        )

    def coords(self):
        """Coordinate vector over the matrix-unit basis (blocks row-major)."""
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def norm2(self):
        return float(np.sqrt(max((self.adjoint() @ self).trace().real, 0.0)))

    def __repr__(self):
        return f"AlgebraElement({self.structure.block_dims}, {[b.round(6) for b in self.blocks]})"


def identity(structure):
    return AlgebraElement(structure, [np.eye(n) for n in structure.block_dims])


def zero(structure):
    return AlgebraElement(structure, [np.zeros((n, n)) for n in structure.block_dims])


def from_coords(structure, vec):
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.shape[0] != structure.dim:
        raise ShapeError(f"coordinate vector of length {vec.shape[0]}, expected {structure.dim}")
    blocks = []
    for i, n in enumerate(structure.block_dims):
        off = structure._offsets[i]
        blocks.append(vec[off : off + n * n].reshape(n, n))
    return AlgebraElement(structure, blocks)


def basis_element(structure, index):
    vec = np.zeros(structure.dim, dtype=complex)
    vec[index] = 1.0
    return from_coords(structure, vec)


def inner(x, y):
    """L_2(tau) inner product <x, y> = tau(y* x)."""
    x._check(y)
    return complex(
        sum(
            w * np.sum(b.conj() * a)
            for w, a, b in zip(x.structure.block_weights, x.blocks, y.blocks)
        )
    )


def singular_values(x):
    """Singular values per block, i.e. the eigenvalues of |x_i|."""
    return [np.linalg.svd(b, compute_uv=False) for b in x.blocks]


def lp_norm(x, p):
    """Noncommutative L_p norm (sum_i sum_k lam_k(|x_i|)^p w_i)^(1/p).

    ``p = inf`` (or ``np.inf``) gives the operator norm.
    """
    if p != np.inf and p < 1:
        raise DomainError(f"L_p norm needs p >= 1, got {p}")
    svals = singular_values(x)
    if p == np.inf:
        return float(max(s[0] if s.size else 0.0 for s in svals))
    total = sum(
        w * np.sum(s**p) for w, s in zip(x.structure.block_weights, svals)
    )
    return float(total ** (1.0 / p))


@dataclass
class PositivityResult:
    positive: bool
    self_adjoint: bool
    min_eigenvalue: float

    def __bool__(self):
        return self.positive


def is_positive(x, tol=ALGEBRAIC_TOL):
    """Check x = x* with spectrum >= -tol; reports the minimal eigenvalue."""
    sa_defect = max(
        float(np.max(np.abs(b - b.conj().T), initial=0.0)) for b in x.blocks
    )
    self_adjoint = sa_defect <= 10 * tol
    herm = [(b + b.conj().T) / 2 for b in x.blocks]
    min_eig = float(min(np.linalg.eigvalsh(h).min() for h in herm))
    return PositivityResult(self_adjoint and min_eig >= -tol, self_adjoint, min_eig)


def conditional_expectation_scalar(x):
    """tau-preserving conditional expectation onto the scalars, Ex = tau(x) 1."""
    return x.trace() * identity(x.structure)


def ricard_xu_defect(x, p):
    """||x||_p^2 - ||Ex||_p^2 - (p-1) ||x - Ex||_p^2 for E onto scalars.

    Nonnegative for 1 < p <= 2 by the convexity inequality for
    trace-preserving conditional expectations.
    """
    if not (1.0 < p <= 2.0):
        raise DomainError(f"defect defined for p in (1, 2], got {p}")
    ex = conditional_expectation_scalar(x)
    return lp_norm(x, p) ** 2 - lp_norm(ex, p) ** 2 - (p - 1) * lp_norm(x - ex, p) ** 2


class Functional:
    """Linear functional phi(y) = tau(y d) stored by its density d."""

    def __init__(self, density):
        self.density = density
        self.structure = density.structure

    def __call__(self, y):
        return (y @ self.density).trace()

    def covector(self):
        """Values on the matrix-unit basis: phi(e_{rc}^i) = w_i d_i[c, r]."""
        return np.concatenate(
            [
                w * b.T.reshape(-1)
                for w, b in zip(self.structure.block_weights, self.density.blocks)
            ]
        )

    @staticmethod
    def from_covector(structure, vec):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        blocks = []
        for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
            off = structure._offsets[i]
            blocks.append(vec[off : off + n * n].reshape(n, n).T / w)
        return Functional(AlgebraElement(structure, blocks))

    def is_state(self, tol=STATE_TOL):
        return bool(
            is_positive(self.density, tol)
            and abs(self.density.trace() - 1.0) <= tol
        )

    def is_faithful_state(self, tol=STATE_TOL):
        res = is_positive(self.density, tol)
        return bool(
            res.self_adjoint
            and res.min_eigenvalue > tol
            and abs(self.density.trace() - 1.0) <= tol
        )

    # convex combinations of functionals are handy for building states
    def __add__(self, other):
        return Functional(self.density + other.density)

    def __rmul__(self, scalar):
        return Functional(scalar * self.density)

    def __mul__(self, scalar):
        return self.__rmul__(scalar)

    def distance(self, other):
        """Max deviation of values on the matrix-unit basis."""
        return float(np.max(np.abs(self.covector() - other.covector())))


def make_state(d, normalize=False):
    """Wrap a density element; optionally rescale so tau(d) = 1.

    Does not fail on non-state densities: callers inspect ``is_state``.
    """
    if normalize:
        t = d.trace().real
        if abs(t) < STRUCTURE_TOL:
            raise DomainError("cannot normalize a density with zero trace")
        d = (1.0 / t) * d
    return Functional(d)


def trace_state(structure):
    """The reference trace tau itself as a functional."""
    return Functional(identity(structure))


# -- random generators (explicit rng, reproducible) -----------------------


def random_element(structure, rng, scale=1.0):
    blocks = [
        scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        for n in structure.block_dims
    ]
    return AlgebraElement(structure, blocks)


def random_selfadjoint(structure, rng, scale=1.0):
    x = random_element(structure, rng, scale)
    return 0.5 * (x + x.adjoint())


def random_positive(structure, rng, trace_one=True):
    g = random_element(structure, rng)
    x = g.adjoint() @ g
    if trace_one:
        x = (1.0 / x.trace().real) * x
    return x


def random_state(structure, rng):
    return Functional(random_positive(structure, rng, trace_one=True))


# -- batched helpers for sampling loops -----------------------------------


def random_coords(structure, rng, count, scale=1.0):
    """``count`` random elements as rows of a coordinate array."""
    z = rng.standard_normal((count, structure.dim)) + 1j * rng.standard_normal(
        (count, structure.dim)
    )
    return scale * z


def random_positive_coords(structure, rng, count):
    """Positive-cone samples g* g with Gaussian g, trace-normalized."""
    out = np.empty((count, structure.dim), dtype=complex)
    traces = np.zeros(count)
    for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
        off = structure._offsets[i]
        g = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
        x = np.conj(np.swapaxes(g, 1, 2)) @ g
        out[:, off : off + n * n] = x.reshape(count, n * n)
        traces += w * np.trace(x, axis1=1, axis2=2).real
    return out / traces[:, None]


def batch_lp_norms(structure, coords, p):
    """L_p norms of a batch of elements given as coordinate rows."""
    coords = np.asarray(coords, dtype=complex)
    count = coords.shape[0]
    if p == np.inf:
        result = np.zeros(count)
        for i, n in enumerate(structure.block_dims):
            off = structure._offsets[i]
            mats = coords[:, off : off + n * n].reshape(count, n, n)
            s = np.linalg.svd(mats, compute_uv=False)
            result = np.maximum(result, s[:, 0])
        return result
    total = np.zeros(count)
    for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
        off = structure._offsets[i]
        mats = coords[:, off : off + n * n].reshape(count, n, n)
        s = np.linalg.svd(mats, compute_uv=False)
        total += w * np.sum(s**p, axis=1)
    return total ** (1.0 / p)


def batch_l2_norms(structure, coords):
    coords = np.asarray(coords, dtype=complex)
    return np.sqrt(
        np.sum(structure.unit_weights * np.abs(coords) ** 2, axis=1)
    )


def batch_traces(structure, coords):
    """tau applied to each coordinate row."""
    tvec = np.zeros(structure.dim)
    for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
        off = structure._offsets[i]
        tvec[off : off + n * n].reshape(n, n)[np.diag_indices(n)] = w
    return coords @ tvec


def trace_covector(structure):
    """Coordinate covector of tau."""
    tvec = np.zeros(structure.dim)
    for i, (n, w) in enumerate(zip(structure.block_dims, structure.block_weights)):
        off = structure._offsets[i]
        tvec[off : off + n * n].reshape(n, n)[np.diag_indices(n)] = w
    return tvec
