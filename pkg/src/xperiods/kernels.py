"""Grid classification of sign-condition regions by interval arithmetic.

Every cell of an axis-aligned mesh is labelled *inside* (the open cell lies in
the region) and *meets* (the cell may touch the region). Both labels are
conservative, so counts give inner and outer Jordan bounds.

The numba kernel and the numpy path compute identical labels; the numpy path
is used when ``XP_DISABLE_NUMBA`` is set or numba is missing.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit, prange


def pack_region(region, box=None):
    """Flatten a SignConditionRegion into arrays for the kernels.

    Clauses get the box constraints added so cells outside the box never count.
    """
    d = region.dim
    box = box if box is not None else region.box
    polys = []  # (terms, kind, clause, affine)
    for ci, cl in enumerate(region.clauses):
        for p in cl.gt:
            polys.append((p, 0, ci))
        for p in cl.eq:
            polys.append((p, 1, ci))
        if box is not None:
            for k, (lo, hi) in enumerate(box):
                e = tuple(int(j == k) for j in range(d))
                zero = (0,) * d
                polys.append(({e: 1.0, zero: -float(lo)}, 0, ci))
                polys.append(({e: -1.0, zero: float(hi)}, 0, ci))
    P = len(polys)
    tmax = max((len(_terms(p)) for p, _, _ in polys), default=1)
    exps = np.zeros((P, tmax, d), dtype=np.int64)
    coefs = np.zeros((P, tmax), dtype=np.float64)
    nterms = np.zeros(P, dtype=np.int64)
    kinds = np.zeros(P, dtype=np.int64)
    clause_of = np.zeros(P, dtype=np.int64)
    affine = np.zeros(P, dtype=np.bool_)
    for i, (p, kind, ci) in enumerate(polys):
        terms = _terms(p)
        nterms[i] = len(terms)
        kinds[i] = kind
        clause_of[i] = ci
        affine[i] = all(sum(e) <= 1 for e, _ in terms)
        for t, (e, c) in enumerate(terms):
            exps[i, t, :] = e
            coefs[i, t] = c
    return exps, coefs, nterms, kinds, clause_of, len(region.clauses), affine


def _terms(p):
    if isinstance(p, dict):
        return [(tuple(e), float(c)) for e, c in p.items()]
    return [(e, float(c.re)) for e, c in p.terms.items()]


# ---------------------------------------------------------------------------
# numba kernel
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pow_range(a, b, k):
    if k == 0:
        return 1.0, 1.0
    pa = a ** k
    pb = b ** k
    if k % 2 == 1:
        return pa, pb
    if a >= 0.0:
        return pa, pb
    if b <= 0.0:
        return pb, pa
    return 0.0, max(pa, pb)


@njit(cache=True)
def _poly_range(lo, hi, exps, coefs, n):
    rlo = 0.0
    rhi = 0.0
    d = lo.shape[0]
    for t in range(n):
        mlo = 1.0
        mhi = 1.0
        for k in range(d):
            e = exps[t, k]
            if e == 0:
                continue
            plo, phi = _pow_range(lo[k], hi[k], e)
            c1 = mlo * plo
            c2 = mlo * phi
            c3 = mhi * plo
            c4 = mhi * phi
            mlo = min(min(c1, c2), min(c3, c4))
            mhi = max(max(c1, c2), max(c3, c4))
        c = coefs[t]
        if c >= 0.0:
            rlo += c * mlo
            rhi += c * mhi
        else:
            rlo += c * mhi
            rhi += c * mlo
    return rlo, rhi


@njit(parallel=True, cache=True)
def _classify_numba(origin, eps, counts, exps, coefs, nterms, kinds, clause_of, nclauses, affine):
    d = counts.shape[0]
    ncells = 1
    for k in range(d):
        ncells *= counts[k]
    P = exps.shape[0]
    strides = np.ones(d, dtype=np.int64)
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * counts[k + 1]
    inside = np.zeros(ncells, dtype=np.bool_)
    meets = np.zeros(ncells, dtype=np.bool_)
    # scratch buffers are allocated once per chunk, not per cell
    chunk = 4096
    nchunks = (ncells + chunk - 1) // chunk
    for ch in prange(nchunks):
        lo = np.empty(d)
        hi = np.empty(d)
        cin = np.empty(nclauses, dtype=np.bool_)
        cmeet = np.empty(nclauses, dtype=np.bool_)
        stop = min(ncells, (ch + 1) * chunk)
        for idx in range(ch * chunk, stop):
            for k in range(d):
                ik = (idx // strides[k]) % counts[k]
                lo[k] = origin[k] + ik * eps
                hi[k] = origin[k] + (ik + 1) * eps
            cin[:] = True
            cmeet[:] = True
            for p in range(P):
                c = clause_of[p]
                if not cin[c] and not cmeet[c]:
                    continue
                plo, phi = _poly_range(lo, hi, exps[p], coefs[p], nterms[p])
                if kinds[p] == 0:
                    if not (plo > 0.0 or (affine[p] and plo >= 0.0 and phi > 0.0)):
                        cin[c] = False
                    if not phi > 0.0:
                        cmeet[c] = False
                else:
                    cin[c] = False
                    if plo > 0.0 or phi < 0.0:
                        cmeet[c] = False
            a = False
            b = False
            for c in range(nclauses):
                a = a or cin[c]
                b = b or cmeet[c]
            inside[idx] = a
            meets[idx] = b
    return inside, meets


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _pow_range_np(a, b, k):
    if k == 0:
        one = np.ones_like(a)
        return one, one
    pa, pb = a ** k, b ** k
    if k % 2 == 1:
        return pa, pb
    lo = np.where(a >= 0, pa, np.where(b <= 0, pb, 0.0))
    hi = np.where(a >= 0, pb, np.where(b <= 0, pa, np.maximum(pa, pb)))
    return lo, hi


def _classify_numpy(origin, eps, counts, exps, coefs, nterms, kinds, clause_of, nclauses, affine):
    d = len(counts)
    grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    lo = origin[None, :] + idx * eps
    hi = origin[None, :] + (idx + 1) * eps
    ncells = lo.shape[0]
    cin = np.ones((nclauses, ncells), dtype=bool)
    cmeet = np.ones((nclauses, ncells), dtype=bool)
    for p in range(exps.shape[0]):
        rlo = np.zeros(ncells)
        rhi = np.zeros(ncells)
        for t in range(nterms[p]):
            mlo = np.ones(ncells)
            mhi = np.ones(ncells)
            for k in range(d):
                e = int(exps[p, t, k])
                if e == 0:
                    continue
                plo, phi = _pow_range_np(lo[:, k], hi[:, k], e)
                cands = np.stack([mlo * plo, mlo * phi, mhi * plo, mhi * phi])
                mlo, mhi = cands.min(axis=0), cands.max(axis=0)
            c = coefs[p, t]
            if c >= 0:
                rlo += c * mlo
                rhi += c * mhi
            else:
                rlo += c * mhi
                rhi += c * mlo
        c = clause_of[p]
        if kinds[p] == 0:
            cin[c] &= (rlo > 0) | (affine[p] & (rlo >= 0) & (rhi > 0))
            cmeet[c] &= rhi > 0
        else:
            cin[c] = False
            cmeet[c] &= ~((rlo > 0) | (rhi < 0))
    return cin.any(axis=0), cmeet.any(axis=0)


def classify_cells(origin, eps, counts, packed, backend=None):
    """Label each mesh cell; returns boolean arrays (inside, meets) in C order."""
    origin = np.asarray(origin, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int64)
    eps = float(eps)
    use = USE_NUMBA if backend is None else backend == "numba"
    if use and not USE_NUMBA:
        raise RuntimeError("numba backend requested but disabled")
    fn = _classify_numba if use else _classify_numpy
    return fn(origin, eps, counts, *packed)
