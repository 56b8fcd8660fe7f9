"""Element-level integration kernels.

Each kernel has a vectorised numpy implementation and an explicit-loop
implementation compiled with numba. Both compute the same sums in the same
order per entry; results agree to rounding.

Arguments shared by the kernels:
    vals_*   (nq, nb)     reference basis values at quadrature points
    grads_*  (nq, nb, 2)  reference basis gradients
    w        (nq,)        reference quadrature weights
    invJ     (ne, 2, 2)   inverse cell Jacobians
    scale    (ne,)        per-cell factor, |det J| times a coefficient
"""

import numpy as np

from .._accel import default_backend, njit


def _mass_np(vals_t, vals_s, w, scale):
    local = np.einsum("q,qi,qj->ij", w, vals_t, vals_s)
    return scale[:, None, None] * local[None]


def _grad_outer_np(grads_t, grads_s, w, invJ, scale):
    pt = np.einsum("qbj,eja->eqba", grads_t, invJ)
    ps = np.einsum("qbj,eja->eqba", grads_s, invJ)
    return np.einsum("q,e,eqia,eqjb->eijab", w, scale, pt, ps, optimize=True)


def _value_grad_np(vals_t, grads_s, w, invJ, scale):
    ps = np.einsum("qbj,eja->eqba", grads_s, invJ)
    return np.einsum("q,e,qi,eqjb->eijb", w, scale, vals_t, ps, optimize=True)


def _load_np(vals, fq, w, scale):
    return scale[:, None] * np.einsum("q,qi,eq->ei", w, vals, fq)


@njit
def _mass_nb(vals_t, vals_s, w, scale):
    nq, nt = vals_t.shape
    ns = vals_s.shape[1]
    local = np.zeros((nt, ns))
    for q in range(nq):
        for i in range(nt):
            wi = w[q] * vals_t[q, i]
            for j in range(ns):
                local[i, j] += wi * vals_s[q, j]
    out = np.empty((scale.shape[0], nt, ns))
    for e in range(scale.shape[0]):
        for i in range(nt):
            for j in range(ns):
                out[e, i, j] = scale[e] * local[i, j]
    return out


@njit
def _physical_grads(grads, invJe, out):
    nq, nb = grads.shape[0], grads.shape[1]
    for q in range(nq):
        for b in range(nb):
            for a in range(2):
                out[q, b, a] = grads[q, b, 0] * invJe[0, a] + grads[q, b, 1] * invJe[1, a]


@njit
def _grad_outer_nb(grads_t, grads_s, w, invJ, scale):
    nq, nt = grads_t.shape[0], grads_t.shape[1]
    ns = grads_s.shape[1]
    ne = scale.shape[0]
    out = np.zeros((ne, nt, ns, 2, 2))
    pt = np.empty((nq, nt, 2))
    ps = np.empty((nq, ns, 2))
    for e in range(ne):
        _physical_grads(grads_t, invJ[e], pt)
        _physical_grads(grads_s, invJ[e], ps)
        for q in range(nq):
            wq = w[q] * scale[e]
            for i in range(nt):
                for j in range(ns):
                    for a in range(2):
                        ta = wq * pt[q, i, a]
                        for b in range(2):
                            out[e, i, j, a, b] += ta * ps[q, j, b]
    return out


@njit
def _value_grad_nb(vals_t, grads_s, w, invJ, scale):
    nq, nt = vals_t.shape
    ns = grads_s.shape[1]
    ne = scale.shape[0]
    out = np.zeros((ne, nt, ns, 2))
    ps = np.empty((nq, ns, 2))
    for e in range(ne):
        _physical_grads(grads_s, invJ[e], ps)
        for q in range(nq):
            wq = w[q] * scale[e]
            for i in range(nt):
                ti = wq * vals_t[q, i]
                for j in range(ns):
                    out[e, i, j, 0] += ti * ps[q, j, 0]
                    out[e, i, j, 1] += ti * ps[q, j, 1]
    return out


@njit
def _load_nb(vals, fq, w, scale):
    nq, nb = vals.shape
    ne = fq.shape[0]
    out = np.zeros((ne, nb))
    for e in range(ne):
        for q in range(nq):
            wq = w[q] * fq[e, q]
            for i in range(nb):
                out[e, i] += wq * vals[q, i]
        for i in range(nb):
            out[e, i] *= scale[e]
    return out


KERNELS = {
    "numpy": {"mass": _mass_np, "grad_outer": _grad_outer_np, "value_grad": _value_grad_np, "load": _load_np},
    "numba": {"mass": _mass_nb, "grad_outer": _grad_outer_nb, "value_grad": _value_grad_nb, "load": _load_nb},
}


def kernel(name: str, backend: str | None = None):
    return KERNELS[backend or default_backend()][name]
