"""Fourier transform, inversion, Plancherel, multipliers and convolutions.

Coefficients follow the convention phi_hat(alpha) = (phi (x) id)((u^alpha)*),
entrywise phi_hat(alpha)_{ij} = phi((u_ji)*).  Elements x are transformed
through the embedding x -> h(. x).  The Q_alpha matrices are carried
through every formula even though finiteness forces Q_alpha = Id; this is
asserted at runtime.
"""

from __future__ import annotations

import numpy as np

from .fdalgebra import (
    AlgebraElement,
    DomainError,
    Functional,
    ShapeError,
    from_coords,
)
from .qgroup import QuantumGroup, star_coords


class FourierCoefficients:
    """Family alpha -> n_alpha x n_alpha matrix over the irreps of one QG."""

    def __init__(self, qg, matrices):
        if len(matrices) != len(qg.irreps):
            raise ShapeError("one coefficient matrix per irreducible expected")
        mats = []
        for u, m in zip(qg.irreps, matrices):
            m = np.asarray(m, dtype=complex)
            if m.shape != (u.dim, u.dim):
                raise ShapeError(f"coefficient of shape {m.shape} for irrep of dim {u.dim}")
            mats.append(m)
        self.qg = qg
        self.matrices = mats

    @property
    def alpha_dims(self):
        return tuple(u.dim for u in self.qg.irreps)

    def l2_norm(self):
        """Dual weight norm: sqrt(sum_alpha d_alpha Tr(Q_alpha a* a))."""
        total = 0.0
        for u, a in zip(self.qg.irreps, self.matrices):
            total += u.d_alpha * np.trace(u.q_matrix @ a.conj().T @ a).real
        return float(np.sqrt(max(total, 0.0)))

    def operator_norms(self):
        """Operator norm per irrep, ||a_alpha||."""
        return [float(np.linalg.svd(a, compute_uv=False)[0]) for a in self.matrices]

    def conj_transpose(self):
        return FourierCoefficients(self.qg, [a.conj().T for a in self.matrices])

    def __getitem__(self, alpha):
        return self.matrices[alpha]


def functional_covector(qg, func_or_element):
    """Covector of the functional; elements embed through x -> h(. x)."""
    if isinstance(func_or_element, Functional):
        return func_or_element.covector()
    if isinstance(func_or_element, AlgebraElement):
        x = func_or_element.coords()
        # phi(e_J) = h(e_J x)
        return np.einsum("JLK,L,K->J", qg.mult3, x, qg._haar_cov, optimize=True)
    raise DomainError("expected a Functional or an AlgebraElement")


def fourier_transform(qg, func_or_element):
    """phi_hat(alpha)_{ij} = phi((u_ji)*) per stored irrep."""
    cov = functional_covector(qg, func_or_element)
    mats = []
    for u in qg.irreps:
        n = u.dim
        starred = star_coords(qg.structure, u.coords)  # (n, n, dim), entry (j,i)
        mats.append(np.einsum("jid,d->ij", starred, cov, optimize=True))
    return FourierCoefficients(qg, mats)


def inverse_fourier(qg, coeffs):
    """x = sum_alpha d_alpha (id (x) Tr)[(1 (x) a_alpha Q_alpha) u^alpha]."""
    if coeffs.qg is not qg:
        raise ShapeError("coefficients indexed by a different quantum group")
    out = np.zeros(qg.dim, dtype=complex)
    for u, a in zip(qg.irreps, coeffs.matrices):
        aq = a @ u.q_matrix
        out += u.d_alpha * np.einsum("lmd,ml->d", u.coords, aq, optimize=True)
    return from_coords(qg.structure, out)


def convolve(qg, left, right):
    """Woronowicz convolutions.

    functional * functional -> functional (phi (x) psi) Delta;
    functional * element    -> element    (id (x) phi) Delta(x);
    element * functional    -> element    (phi (x) id) Delta(x).
    """
    lf = isinstance(left, Functional)
    rf = isinstance(right, Functional)
    if lf and rf:
        cov = qg.convolve_covectors(left.covector(), right.covector())
        return Functional.from_covector(qg.structure, cov)
    if lf and isinstance(right, AlgebraElement):
        mat = qg.conv_left_matrix(left.covector())
        return from_coords(qg.structure, mat @ right.coords())
    if isinstance(left, AlgebraElement) and rf:
        mat = qg.conv_right_matrix(right.covector())
        return from_coords(qg.structure, mat @ left.coords())
    raise DomainError(
        "supported modes: functional*functional, functional*element, element*functional"
    )


def convolution_power(qg, func, n):
    """phi^{*n} for n >= 1."""
    if n < 1:
        raise DomainError("convolution power needs n >= 1")
    cov = func.covector()
    acc = cov
    for _ in range(n - 1):
        acc = qg.convolve_covectors(acc, cov)
    return Functional.from_covector(qg.structure, acc)


def multiplier_apply(qg, coeffs, x, side="left", require_unital=False):
    """Fourier multiplier m_a: left gives (m_a x)^ = x_hat a, right a x_hat.

    Computed through the inversion sum with Q_alpha in place.
    """
    if require_unital:
        a1 = coeffs.matrices[0]
        if np.max(np.abs(a1 - np.eye(1))) > 1e-10:
            raise DomainError("unital multiplier requires a_1 = 1 on the trivial irrep")
    xhat = fourier_transform(qg, x)
    if side == "left":
        new = [xa @ a for xa, a in zip(xhat.matrices, coeffs.matrices)]
    elif side == "right":
        new = [a @ xa for xa, a in zip(xhat.matrices, coeffs.matrices)]
    else:
        raise DomainError("side must be 'left' or 'right'")
    return inverse_fourier(qg, FourierCoefficients(qg, new))


def compose_with_antipode(qg, func):
    """phi o S as a functional."""
    return Functional.from_covector(qg.structure, qg.compose_antipode(func.covector()))
