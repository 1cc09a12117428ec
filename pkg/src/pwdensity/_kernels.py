"""Numba kernels for the hot paths: discrete-Ak merging, batched A1 errors,
and the small-LP cutting-plane projection used for degree <= 1 fits.

Everything works on plain float64/int64 arrays so the JIT cache stays valid
across processes.  State that several helpers share (heap sizes, top-k sets)
is threaded explicitly because nopython mode has no nonlocal closures.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# sign-run collapse
# ---------------------------------------------------------------------------


@njit(cache=True)
def collapse_runs(w):
    """Merge consecutive same-sign entries; zero entries join the run to their right.

    Returns (run_w, run_lo, run_hi) with inclusive 0-based entry-index extents.
    Trailing zeros (nothing to their right) join the last run; an all-zero
    sequence collapses to a single zero run.
    """
    n = w.size
    run_w = np.empty(n, np.float64)
    run_lo = np.empty(n, np.int64)
    run_hi = np.empty(n, np.int64)
    m = 0
    start = 0
    cur = 0.0
    have = False
    pos_sign = False
    zstart = -1
    for i in range(n):
        x = w[i]
        if x == 0.0:
            if zstart < 0:
                zstart = i
            continue
        pos = x > 0.0
        if have and pos != pos_sign:
            end = zstart - 1 if zstart >= 0 else i - 1
            run_w[m] = cur
            run_lo[m] = start
            run_hi[m] = end
            m += 1
            start = zstart if zstart >= 0 else i
            cur = x
        else:
            cur += x
        pos_sign = pos
        have = True
        zstart = -1
    run_w[m] = cur
    run_lo[m] = start
    run_hi[m] = n - 1
    m += 1
    return run_w[:m], run_lo[:m], run_hi[:m]


# ---------------------------------------------------------------------------
# iterative minimum-|weight| merging with a running top-k snapshot
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _less(w, lo, a, b):
    # min-heap order: smaller |w| first, then smaller index
    wa = abs(w[a])
    wb = abs(w[b])
    if wa != wb:
        return wa < wb
    return lo[a] < lo[b]


@njit(cache=True, inline="always")
def _bigger(w, lo, a, b):
    # top-k order: larger |w| first, then smaller index
    wa = abs(w[a])
    wb = abs(w[b])
    if wa != wb:
        return wa > wb
    return lo[a] < lo[b]


@njit(cache=True)
def _heap_sift_up(heap, pos, w, lo, i):
    node = heap[i]
    while i > 0:
        p = (i - 1) >> 1
        if _less(w, lo, node, heap[p]):
            heap[i] = heap[p]
            pos[heap[p]] = i
            i = p
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def _heap_sift_down(heap, pos, w, lo, size, i):
    node = heap[i]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _less(w, lo, heap[c + 1], heap[c]):
            c += 1
        if _less(w, lo, heap[c], node):
            heap[i] = heap[c]
            pos[heap[c]] = i
            i = c
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def _heap_push(heap, pos, w, lo, size, node):
    heap[size] = node
    pos[node] = size
    _heap_sift_up(heap, pos, w, lo, size)
    return size + 1


@njit(cache=True)
def _heap_remove(heap, pos, w, lo, size, node):
    i = pos[node]
    size -= 1
    last = heap[size]
    pos[node] = -1
    if i != size:
        heap[i] = last
        pos[last] = i
        _heap_sift_down(heap, pos, w, lo, size, i)
        _heap_sift_up(heap, pos, w, lo, pos[last])
    return size


@njit(cache=True)
def _mh_push(mh_node, mh_absw, mh_lo, mh_ver, size, node, w, lo, version):
    i = size
    mh_node[i] = node
    mh_absw[i] = abs(w[node])
    mh_lo[i] = lo[node]
    mh_ver[i] = version[node]
    size += 1
    while i > 0:
        p = (i - 1) >> 1
        if mh_absw[i] > mh_absw[p] or (mh_absw[i] == mh_absw[p] and mh_lo[i] < mh_lo[p]):
            mh_node[i], mh_node[p] = mh_node[p], mh_node[i]
            mh_absw[i], mh_absw[p] = mh_absw[p], mh_absw[i]
            mh_lo[i], mh_lo[p] = mh_lo[p], mh_lo[i]
            mh_ver[i], mh_ver[p] = mh_ver[p], mh_ver[i]
            i = p
        else:
            break
    return size


@njit(cache=True)
def _mh_pop_valid(mh_node, mh_absw, mh_lo, mh_ver, size, alive, in_top, version):
    """Pop until a live, current, non-top node surfaces; (-1, size) when exhausted."""
    while size > 0:
        node = mh_node[0]
        ok = alive[node] and (not in_top[node]) and mh_ver[0] == version[node]
        size -= 1
        mh_node[0] = mh_node[size]
        mh_absw[0] = mh_absw[size]
        mh_lo[0] = mh_lo[size]
        mh_ver[0] = mh_ver[size]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and (
                mh_absw[c + 1] > mh_absw[c] or (mh_absw[c + 1] == mh_absw[c] and mh_lo[c + 1] < mh_lo[c])
            ):
                c += 1
            if mh_absw[c] > mh_absw[i] or (mh_absw[c] == mh_absw[i] and mh_lo[c] < mh_lo[i]):
                mh_node[i], mh_node[c] = mh_node[c], mh_node[i]
                mh_absw[i], mh_absw[c] = mh_absw[c], mh_absw[i]
                mh_lo[i], mh_lo[c] = mh_lo[c], mh_lo[i]
                mh_ver[i], mh_ver[c] = mh_ver[c], mh_ver[i]
                i = c
            else:
                break
        if ok:
            return node, size
    return -1, size


@njit(cache=True)
def _top_remove(top, top_size, in_top, node):
    for i in range(top_size):
        if top[i] == node:
            top[i] = top[top_size - 1]
            in_top[node] = False
            return top_size - 1
    return top_size


@njit(cache=True)
def dak_merge(w0, lo0, hi0, k):
    """Exact max of sum |w(I)| over <= k disjoint unions of consecutive runs.

    Repeatedly removes the minimum-|w| interval, fusing it with both
    neighbours (boundary minima are discarded instead), while tracking the
    best sum of the k largest |w| seen at any iteration.  Ties in the minimum
    go to the smallest index.

    Returns (value, count, sel_lo, sel_hi); the selection is reported through
    the inclusive entry-index extents carried in lo0/hi0, sorted by lo.
    """
    r = w0.size
    kk = min(k, r)
    w = w0.copy()
    lo = lo0.copy()
    hi = hi0.copy()
    prv = np.arange(r) - 1
    nxt = np.arange(r) + 1
    alive = np.ones(r, np.bool_)
    version = np.zeros(r, np.int64)

    heap = np.empty(r, np.int64)
    pos = np.full(r, -1, np.int64)
    hsize = 0
    for i in range(r):
        hsize = _heap_push(heap, pos, w, lo, hsize, i)

    cap = 4 * r + 16
    mh_node = np.empty(cap, np.int64)
    mh_absw = np.empty(cap, np.float64)
    mh_lo = np.empty(cap, np.int64)
    mh_ver = np.empty(cap, np.int64)
    mh_size = 0

    in_top = np.zeros(r, np.bool_)
    top = np.empty(max(kk, 1), np.int64)
    top_size = 0

    best_val = -1.0
    best_cnt = 0
    best_lo = np.empty(max(kk, 1), np.int64)
    best_hi = np.empty(max(kk, 1), np.int64)

    for i in range(r):
        mh_size = _mh_push(mh_node, mh_absw, mh_lo, mh_ver, mh_size, i, w, lo, version)

    alive_cnt = r
    while True:
        # refill the top-k set from the lazy max-heap
        while top_size < kk:
            node, mh_size = _mh_pop_valid(mh_node, mh_absw, mh_lo, mh_ver, mh_size, alive, in_top, version)
            if node < 0:
                break
            top[top_size] = node
            top_size += 1
            in_top[node] = True
        # snapshot
        s = 0.0
        for i in range(top_size):
            s += abs(w[top[i]])
        if s > best_val:
            best_val = s
            best_cnt = top_size
            for i in range(top_size):
                best_lo[i] = lo[top[i]]
                best_hi[i] = hi[top[i]]
            for i in range(1, best_cnt):
                kl = best_lo[i]
                kh = best_hi[i]
                j = i - 1
                while j >= 0 and best_lo[j] > kl:
                    best_lo[j + 1] = best_lo[j]
                    best_hi[j + 1] = best_hi[j]
                    j -= 1
                best_lo[j + 1] = kl
                best_hi[j + 1] = kh

        if alive_cnt <= kk:
            break

        node = heap[0]
        hsize = _heap_remove(heap, pos, w, lo, hsize, node)
        if prv[node] < 0 or nxt[node] >= r:
            # boundary minimum: discard
            if in_top[node]:
                top_size = _top_remove(top, top_size, in_top, node)
            alive[node] = False
            if prv[node] >= 0:
                nxt[prv[node]] = nxt[node]
            if nxt[node] < r:
                prv[nxt[node]] = prv[node]
            alive_cnt -= 1
        else:
            ln = prv[node]
            rn = nxt[node]
            hsize = _heap_remove(heap, pos, w, lo, hsize, ln)
            hsize = _heap_remove(heap, pos, w, lo, hsize, rn)
            if in_top[node]:
                top_size = _top_remove(top, top_size, in_top, node)
            if in_top[ln]:
                top_size = _top_remove(top, top_size, in_top, ln)
            if in_top[rn]:
                top_size = _top_remove(top, top_size, in_top, rn)
            alive[ln] = False
            alive[rn] = False
            w[node] = (w[ln] + w[node]) + w[rn]
            lo[node] = lo[ln]
            hi[node] = hi[rn]
            version[node] += 1
            prv[node] = prv[ln]
            if prv[ln] >= 0:
                nxt[prv[ln]] = node
            nxt[node] = nxt[rn]
            if nxt[rn] < r:
                prv[nxt[rn]] = node
            hsize = _heap_push(heap, pos, w, lo, hsize, node)
            alive_cnt -= 2
            # offer the merged interval to the top-k set
            if top_size < kk:
                top[top_size] = node
                top_size += 1
                in_top[node] = True
            else:
                smallest = 0
                for i in range(1, top_size):
                    if _bigger(w, lo, top[smallest], top[i]):
                        smallest = i
                if _bigger(w, lo, node, top[smallest]):
                    evicted = top[smallest]
                    in_top[evicted] = False
                    mh_size = _mh_push(mh_node, mh_absw, mh_lo, mh_ver, mh_size, evicted, w, lo, version)
                    top[smallest] = node
                    in_top[node] = True
                else:
                    mh_size = _mh_push(mh_node, mh_absw, mh_lo, mh_ver, mh_size, node, w, lo, version)

    return best_val, best_cnt, best_lo, best_hi


@njit(cache=True)
def dp_ak_value(w, k):
    """O(k r^2) dynamic program for max sum of |interval sums|; test oracle."""
    r = w.size
    kk = min(k, r)
    prev = np.zeros(r + 1, np.float64)
    cur = np.zeros(r + 1, np.float64)
    for _ in range(kk):
        for i in range(1, r + 1):
            best = cur[i - 1]
            s = 0.0
            for a in range(i, 0, -1):
                s += w[a - 1]
                cand = prev[a - 1] + abs(s)
                if cand > best:
                    best = cand
            cur[i] = best
        for i in range(r + 1):
            prev[i] = cur[i]
            cur[i] = 0.0
    return prev[r]


@njit(cache=True)
def selection_value(w, cnt, sel_lo, sel_hi):
    """Recompute sum |w(I)| for a selection directly from the raw entries."""
    v = 0.0
    for i in range(cnt):
        s = 0.0
        for j in range(sel_lo[i], sel_hi[i] + 1):
            s += w[j]
        v += abs(s)
    return v


@njit(cache=True)
def dak_exactness_trial(seqs, lens, kmax):
    """Max |dak_merge - dp_ak_value| over packed sequences, for all k <= kmax."""
    worst = 0.0
    off = 0
    for c in range(lens.size):
        L = lens[c]
        w = seqs[off : off + L]
        off += L
        for k in range(1, kmax + 1):
            rw, rlo, rhi = collapse_runs(w)
            val, cnt, slo, shi = dak_merge(rw, rlo, rhi, k)
            v = selection_value(w, cnt, slo, shi)
            ref = dp_ak_value(w, k)
            d = abs(v - ref)
            if d > worst:
                worst = d
    return worst


# ---------------------------------------------------------------------------
# batched A1-errors for the histogram merging path
# ---------------------------------------------------------------------------


@njit(cache=True)
def a1_errors_batch(u_lo, u_hi, left, right, u, cumw):
    """A1-error of the empirical distribution vs. its flattening, per candidate.

    u_lo/u_hi: unique-sample index ranges [lo, hi) per candidate; left/right:
    interval coordinates; u: unique positions; cumw: exclusive prefix mass.
    """
    P = u_lo.size
    out = np.empty(P, np.float64)
    for c in range(P):
        lo = u_lo[c]
        hi = u_hi[c]
        length = right[c] - left[c]
        mass = cumw[hi] - cumw[lo]
        if length <= 0.0 or mass == 0.0:
            out[c] = 0.0
            continue
        rho = mass / length
        fmax = 0.0
        fmin = 0.0
        for j in range(lo, hi):
            f = (cumw[j + 1] - cumw[lo]) - rho * (u[j] - left[c])
            if f > fmax:
                fmax = f
            elif f < fmin:
                fmin = f
        f = mass - rho * length
        if f > fmax:
            fmax = f
        elif f < fmin:
            fmin = f
        out[c] = fmax - fmin
    return out


@njit(cache=True)
def a1_errors_batch_discrete(u_lo, u_hi, left_pt, right_pt, u, cumw):
    """Discrete analogue: the flattening spreads mass over integer points."""
    P = u_lo.size
    out = np.empty(P, np.float64)
    for c in range(P):
        lo = u_lo[c]
        hi = u_hi[c]
        width = right_pt[c] - left_pt[c] + 1.0
        mass = cumw[hi] - cumw[lo]
        if width <= 0.0 or mass == 0.0:
            out[c] = 0.0
            continue
        rho = mass / width
        fmax = 0.0
        fmin = 0.0
        for j in range(lo, hi):
            f = (cumw[j + 1] - cumw[lo]) - rho * (u[j] - left_pt[c] + 1.0)
            if f > fmax:
                fmax = f
            elif f < fmin:
                fmin = f
        f = mass - rho * width
        if f > fmax:
            fmax = f
        elif f < fmin:
            fmin = f
        out[c] = fmax - fmin
    return out


# ---------------------------------------------------------------------------
# fast projection for degree <= 1: cutting planes + tiny exact LP
# ---------------------------------------------------------------------------


@njit(cache=True)
def _ak_value_and_cut(c, us, ws, k, acoef, d):
    """Exact Ak distance between p_c and the atoms, plus the active linear cut.

    Builds the alternating gap-integral / atom sequence on [-1, 1], solves
    the discrete problem exactly, and converts the maximizing selection into
    a functional with  a . c' - b <= dist(c')  for all c' and equality at c.
    Returns (value, b).
    """
    s = us.size
    nseq = 2 * s + 1
    seq = np.empty(nseq, np.float64)
    vprev = -1.0
    for i in range(s + 1):
        vnext = us[i] if i < s else 1.0
        g = c[0] * (vnext - vprev)
        if d >= 1:
            g += c[1] * 0.5 * (vnext * vnext - vprev * vprev)
        seq[2 * i] = g
        if i < s:
            seq[2 * i + 1] = -ws[i]
        vprev = vnext
    cnt, slo, shi = dak_dp(seq, k)
    for j in range(d + 1):
        acoef[j] = 0.0
    brhs = 0.0
    value = 0.0
    for i in range(cnt):
        a_e = slo[i]
        b_e = shi[i]
        ssum = 0.0
        fmass = 0.0
        for e in range(a_e, b_e + 1):
            ssum += seq[e]
            if e % 2 == 1:
                fmass += ws[(e - 1) // 2]
        sg = 1.0 if ssum >= 0.0 else -1.0
        value += abs(ssum)
        if a_e % 2 == 1:
            alpha = us[(a_e - 1) // 2]
        else:
            alpha = -1.0 if a_e == 0 else us[a_e // 2 - 1]
        if b_e % 2 == 1:
            beta = us[(b_e - 1) // 2]
        else:
            beta = 1.0 if b_e == nseq - 1 else us[b_e // 2]
        acoef[0] += sg * (beta - alpha)
        if d >= 1:
            acoef[1] += sg * 0.5 * (beta * beta - alpha * alpha)
        brhs += sg * fmass
    return value, brhs


@njit(cache=True)
def _solve_lp(A, b, m, nv):
    """Minimize z[nv-1] subject to A z <= b, nv in {2, 3}, by vertex enumeration.

    Ties break toward lexicographically smaller z for determinism.  Returns
    (z, found).
    """
    INF = 1e300
    best0 = INF
    best1 = INF
    best2 = INF
    found = False
    for i in range(m):
        for j in range(i + 1, m):
            if nv == 2:
                det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
                if abs(det) < 1e-12:
                    continue
                z0 = (b[i] * A[j, 1] - A[i, 1] * b[j]) / det
                z1 = (A[i, 0] * b[j] - b[i] * A[j, 0]) / det
                feas = True
                for r in range(m):
                    if A[r, 0] * z0 + A[r, 1] * z1 > b[r] + 1e-9:
                        feas = False
                        break
                if feas:
                    if (not found) or z1 < best1 or (z1 == best1 and z0 < best0):
                        best0 = z0
                        best1 = z1
                        found = True
            else:
                for l in range(j + 1, m):
                    a00 = A[i, 0]
                    a01 = A[i, 1]
                    a02 = A[i, 2]
                    a10 = A[j, 0]
                    a11 = A[j, 1]
                    a12 = A[j, 2]
                    a20 = A[l, 0]
                    a21 = A[l, 1]
                    a22 = A[l, 2]
                    det = (
                        a00 * (a11 * a22 - a12 * a21)
                        - a01 * (a10 * a22 - a12 * a20)
                        + a02 * (a10 * a21 - a11 * a20)
                    )
                    if abs(det) < 1e-12:
                        continue
                    r0 = b[i]
                    r1 = b[j]
                    r2 = b[l]
                    z0 = (
                        r0 * (a11 * a22 - a12 * a21)
                        - a01 * (r1 * a22 - a12 * r2)
                        + a02 * (r1 * a21 - a11 * r2)
                    ) / det
                    z1 = (
                        a00 * (r1 * a22 - a12 * r2)
                        - r0 * (a10 * a22 - a12 * a20)
                        + a02 * (a10 * r2 - r1 * a20)
                    ) / det
                    z2 = (
                        a00 * (a11 * r2 - r1 * a21)
                        - a01 * (a10 * r2 - r1 * a20)
                        + r0 * (a10 * a21 - a11 * a20)
                    ) / det
                    feas = True
                    for r in range(m):
                        if A[r, 0] * z0 + A[r, 1] * z1 + A[r, 2] * z2 > b[r] + 1e-9:
                            feas = False
                            break
                    if feas:
                        better = False
                        if (not found) or z2 < best2:
                            better = True
                        elif z2 == best2 and (z0 < best0 or (z0 == best0 and z1 < best1)):
                            better = True
                        if better:
                            best0 = z0
                            best1 = z1
                            best2 = z2
                            found = True
    out = np.empty(3, np.float64)
    out[0] = best0
    out[1] = best1
    out[2] = best2
    return out, found


@njit(cache=True)
def kelley_project(us, ws, d, k, tol_gap, rbox, max_rounds):
    """Near-optimal nonnegative degree-d fit (d <= 1) in Ak-distance, canonical domain.

    us: canonical unique sample positions (sorted, inside [-1, 1]); ws: atom
    masses summing to 1.  Alternates exact Ak evaluation (which yields a
    valid lower-bound cut) with re-minimizing the cut model over the
    nonnegativity wedge, until the certified gap is at most tol_gap.  For
    degree <= 1, nonnegativity on [-1, 1] is exactly the two endpoint
    constraints, so every query point is feasible and the evaluation exact.

    Returns (coeffs, value, gap, rounds).
    """
    nv = d + 2  # coefficients plus the epigraph variable
    max_cuts = 12
    nrows = max_cuts + 8
    A = np.zeros((nrows, 3), np.float64)
    bvec = np.zeros(nrows, np.float64)
    row = 0
    if d == 0:
        A[row, 0] = -1.0
        row += 1
    else:
        A[row, 0] = -1.0
        A[row, 1] = 1.0
        row += 1
        A[row, 0] = -1.0
        A[row, 1] = -1.0
        row += 1
    for j in range(d + 1):
        A[row, j] = 1.0
        bvec[row] = rbox
        row += 1
        A[row, j] = -1.0
        bvec[row] = rbox
        row += 1
    A[row, nv - 1] = -1.0
    row += 1
    nstatic = row

    cuts_a = np.zeros((max_cuts, 2), np.float64)
    cuts_b = np.zeros(max_cuts, np.float64)
    ncuts = 0
    next_slot = 0

    c = np.zeros(2, np.float64)
    c[0] = 0.5  # flattening of a unit-mass distribution on [-1, 1]
    acoef = np.zeros(2, np.float64)

    best_c = c.copy()
    best_v = 1e300
    lb = 0.0
    rounds = 0
    for it in range(max_rounds):
        rounds = it + 1
        v, brhs = _ak_value_and_cut(c, us, ws, k, acoef, d)
        if v < best_v:
            best_v = v
            best_c[0] = c[0]
            best_c[1] = c[1]
        if best_v - lb <= tol_gap:
            break
        cuts_a[next_slot, 0] = acoef[0]
        cuts_a[next_slot, 1] = acoef[1]
        cuts_b[next_slot] = brhs
        next_slot = (next_slot + 1) % max_cuts
        if ncuts < max_cuts:
            ncuts += 1
        m = nstatic
        for r0 in range(ncuts):
            A[m, 0] = cuts_a[r0, 0]
            A[m, 1] = cuts_a[r0, 1] if d >= 1 else 0.0
            if d == 0:
                A[m, 1] = -1.0
                A[m, 2] = 0.0
            else:
                A[m, 2] = -1.0
            bvec[m] = cuts_b[r0]
            m += 1
        z, ok = _solve_lp(A, bvec, m, nv)
        if not ok:
            break
        t_lp = z[nv - 1]
        if t_lp > lb:
            lb = t_lp
        if best_v - lb <= tol_gap:
            break
        moved = False
        for j in range(d + 1):
            if z[j] != c[j]:
                moved = True
            c[j] = z[j]
        if not moved:
            break
    gap = best_v - lb
    return best_c[: d + 1], best_v, gap, rounds


@njit(cache=True)
def _ak_value_and_cut_discrete(c, us, ws, gap_cnt, gap_su, k, acoef, d):
    """Discrete analogue of _ak_value_and_cut: gaps carry point counts and
    coordinate sums, atoms contribute p(x_i) - mass."""
    s = us.size
    nseq = 2 * s + 1
    seq = np.empty(nseq, np.float64)
    for i in range(s + 1):
        g = c[0] * gap_cnt[i]
        if d >= 1:
            g += c[1] * gap_su[i]
        seq[2 * i] = g
        if i < s:
            pv = c[0]
            if d >= 1:
                pv += c[1] * us[i]
            seq[2 * i + 1] = pv - ws[i]
    cnt, slo, shi = dak_dp(seq, k)
    for j in range(d + 1):
        acoef[j] = 0.0
    brhs = 0.0
    value = 0.0
    for i in range(cnt):
        ssum = 0.0
        fmass = 0.0
        c0acc = 0.0
        c1acc = 0.0
        for e in range(slo[i], shi[i] + 1):
            ssum += seq[e]
            if e % 2 == 1:
                a_i = (e - 1) // 2
                fmass += ws[a_i]
                c0acc += 1.0
                c1acc += us[a_i]
            else:
                g_i = e // 2
                c0acc += gap_cnt[g_i]
                c1acc += gap_su[g_i]
        sg = 1.0 if ssum >= 0.0 else -1.0
        value += abs(ssum)
        acoef[0] += sg * c0acc
        if d >= 1:
            acoef[1] += sg * c1acc
        brhs += sg * fmass
    return value, brhs


@njit(cache=True)
def kelley_project_discrete(us, ws, gap_cnt, gap_su, d, k, tol_gap, rbox, max_rounds):
    """kelley_project over an integer support mapped onto [-1, 1].

    Nonnegativity is enforced at the canonical endpoints, which slightly
    over-constrains interior supports; harmless for degree <= 1 pmf fits.
    Returns (coeffs, value, gap, rounds).
    """
    nv = d + 2
    max_cuts = 12
    nrows = max_cuts + 8
    A = np.zeros((nrows, 3), np.float64)
    bvec = np.zeros(nrows, np.float64)
    row = 0
    if d == 0:
        A[row, 0] = -1.0
        row += 1
    else:
        A[row, 0] = -1.0
        A[row, 1] = 1.0
        row += 1
        A[row, 0] = -1.0
        A[row, 1] = -1.0
        row += 1
    for j in range(d + 1):
        A[row, j] = 1.0
        bvec[row] = rbox
        row += 1
        A[row, j] = -1.0
        bvec[row] = rbox
        row += 1
    A[row, nv - 1] = -1.0
    row += 1
    nstatic = row

    cuts_a = np.zeros((max_cuts, 2), np.float64)
    cuts_b = np.zeros(max_cuts, np.float64)
    ncuts = 0
    next_slot = 0

    npts = us.size
    for i in range(gap_cnt.size):
        npts += int(gap_cnt[i])
    c = np.zeros(2, np.float64)
    c[0] = 1.0 / max(npts, 1)  # flat pmf start
    acoef = np.zeros(2, np.float64)

    best_c = c.copy()
    best_v = 1e300
    lb = 0.0
    rounds = 0
    for it in range(max_rounds):
        rounds = it + 1
        v, brhs = _ak_value_and_cut_discrete(c, us, ws, gap_cnt, gap_su, k, acoef, d)
        if v < best_v:
            best_v = v
            best_c[0] = c[0]
            best_c[1] = c[1]
        if best_v - lb <= tol_gap:
            break
        cuts_a[next_slot, 0] = acoef[0]
        cuts_a[next_slot, 1] = acoef[1]
        cuts_b[next_slot] = brhs
        next_slot = (next_slot + 1) % max_cuts
        if ncuts < max_cuts:
            ncuts += 1
        m = nstatic
        for r0 in range(ncuts):
            A[m, 0] = cuts_a[r0, 0]
            if d == 0:
                A[m, 1] = -1.0
                A[m, 2] = 0.0
            else:
                A[m, 1] = cuts_a[r0, 1]
                A[m, 2] = -1.0
            bvec[m] = cuts_b[r0]
            m += 1
        z, ok = _solve_lp(A, bvec, m, nv)
        if not ok:
            break
        t_lp = z[nv - 1]
        if t_lp > lb:
            lb = t_lp
        if best_v - lb <= tol_gap:
            break
        moved = False
        for j in range(d + 1):
            if z[j] != c[j]:
                moved = True
            c[j] = z[j]
        if not moved:
            break
    gap = best_v - lb
    return best_c[: d + 1], best_v, gap, rounds


@njit(cache=True)
def dak_dp(seq, k):
    """Exact DiscreteAk by an O(r k) dynamic program with backtracking.

    Internal evaluator for the fast projection solver; the public operation
    keeps the merge-loop algorithm.  Returns (count, sel_lo, sel_hi) over
    0-based entry indices, sorted by lo.
    """
    r = seq.size
    kk = min(k, r)
    S = np.empty(r + 1, np.float64)
    S[0] = 0.0
    for i in range(r):
        S[i + 1] = S[i] + seq[i]
    NEG = -1e300
    dp = np.zeros((kk + 1, r + 1), np.float64)
    code = np.zeros((kk + 1, r + 1), np.int8)
    start = np.zeros((kk + 1, r + 1), np.int32)
    best_minus = np.full(kk + 1, NEG)  # max over a of dp[j-1][a-1] - S[a-1]
    best_plus = np.full(kk + 1, NEG)   # max over a of dp[j-1][a-1] + S[a-1]
    arg_minus = np.zeros(kk + 1, np.int32)
    arg_plus = np.zeros(kk + 1, np.int32)
    for i in range(1, r + 1):
        for j in range(1, kk + 1):
            cand = dp[j - 1, i - 1] - S[i - 1]
            if cand > best_minus[j]:
                best_minus[j] = cand
                arg_minus[j] = i
            cand = dp[j - 1, i - 1] + S[i - 1]
            if cand > best_plus[j]:
                best_plus[j] = cand
                arg_plus[j] = i
            v = dp[j, i - 1]
            cc = 0
            st = 0
            c1 = S[i] + best_minus[j]
            if c1 > v:
                v = c1
                cc = 1
                st = arg_minus[j]
            c2 = -S[i] + best_plus[j]
            if c2 > v:
                v = c2
                cc = 2
                st = arg_plus[j]
            dp[j, i] = v
            code[j, i] = cc
            start[j, i] = st
    sel_lo = np.empty(kk, np.int64)
    sel_hi = np.empty(kk, np.int64)
    cnt = 0
    j = kk
    i = r
    while j > 0 and i > 0:
        cc = code[j, i]
        if cc == 0:
            i -= 1
        else:
            a = start[j, i]
            sel_lo[cnt] = a - 1
            sel_hi[cnt] = i - 1
            cnt += 1
            i = a - 1
            j -= 1
    # backtracking emits right-to-left; reverse in place
    for t in range(cnt // 2):
        sel_lo[t], sel_lo[cnt - 1 - t] = sel_lo[cnt - 1 - t], sel_lo[t]
        sel_hi[t], sel_hi[cnt - 1 - t] = sel_hi[cnt - 1 - t], sel_hi[t]
    return cnt, sel_lo[:cnt], sel_hi[:cnt]


@njit(cache=True)
def a1_errors_from_bnd(starts, ends, off, two_m, a, b, u, cumw):
    """a1_errors_batch driven directly by cell-boundary indices.

    Cell geometry comes from the index arithmetic (atoms odd, gaps even in
    the conceptual numbering), so the pass only streams u and cumw.
    """
    P = starts.size
    out = np.empty(P, np.float64)
    for c in range(P):
        c0 = starts[c] + off
        c1 = ends[c] - 1 + off
        lo = c0 // 2
        hi = (c1 + 1) // 2
        left = a if c0 == 0 else u[(c0 - 1) // 2]
        right = b if c1 == two_m else u[c1 // 2]
        length = right - left
        mass = cumw[hi] - cumw[lo]
        if length <= 0.0 or mass == 0.0:
            out[c] = 0.0
            continue
        rho = mass / length
        fmax = 0.0
        fmin = 0.0
        base = cumw[lo]
        for j in range(lo, hi):
            f = (cumw[j + 1] - base) - rho * (u[j] - left)
            if f > fmax:
                fmax = f
            elif f < fmin:
                fmin = f
        f = mass - rho * length
        if f > fmax:
            fmax = f
        elif f < fmin:
            fmin = f
        out[c] = fmax - fmin
    return out


@njit(cache=True)
def top_k_pairs(errors, K):
    """Boolean keep-mask for the K largest errors, ties to the lower index.

    Equivalent to taking the first K entries of a (error desc, index asc)
    sort, in O(P log K): a min-heap of the kept set keyed so its root is the
    weakest member (smallest error, then largest index).
    """
    P = errors.size
    keep = np.zeros(P, np.bool_)
    if K <= 0:
        return keep
    he = np.empty(K, np.float64)
    hi_ = np.empty(K, np.int64)
    size = 0
    for i in range(P):
        e = errors[i]
        if size < K:
            # push
            j = size
            he[j] = e
            hi_[j] = i
            size += 1
            while j > 0:
                par = (j - 1) >> 1
                if he[j] < he[par] or (he[j] == he[par] and hi_[j] > hi_[par]):
                    he[j], he[par] = he[par], he[j]
                    hi_[j], hi_[par] = hi_[par], hi_[j]
                    j = par
                else:
                    break
        else:
            # replace the weakest if the candidate beats it
            if e > he[0] or (e == he[0] and i < hi_[0]):
                he[0] = e
                hi_[0] = i
                j = 0
                while True:
                    c = 2 * j + 1
                    if c >= size:
                        break
                    if c + 1 < size and (
                        he[c + 1] < he[c] or (he[c + 1] == he[c] and hi_[c + 1] > hi_[c])
                    ):
                        c += 1
                    if he[c] < he[j] or (he[c] == he[j] and hi_[c] > hi_[j]):
                        he[j], he[c] = he[c], he[j]
                        hi_[j], hi_[c] = hi_[c], hi_[j]
                        j = c
                    else:
                        break
    for j in range(size):
        if he[j] > 0.0:
            keep[hi_[j]] = True
    return keep


@njit(cache=True)
def a1_errors_bnd(bnd, P, off, two_m, a, b, u, cumw, out):
    """a1_errors_from_bnd reading candidate spans straight out of the
    boundary array, writing into a caller-owned buffer."""
    for c in range(P):
        c0 = bnd[2 * c] + off
        c1 = bnd[2 * c + 2] - 1 + off
        lo = c0 // 2
        hi = (c1 + 1) // 2
        left = a if c0 == 0 else u[(c0 - 1) // 2]
        right = b if c1 == two_m else u[c1 // 2]
        length = right - left
        mass = cumw[hi] - cumw[lo]
        if length <= 0.0 or mass == 0.0:
            out[c] = 0.0
            continue
        rho = mass / length
        fmax = 0.0
        fmin = 0.0
        base = cumw[lo]
        for j in range(lo, hi):
            f = (cumw[j + 1] - base) - rho * (u[j] - left)
            if f > fmax:
                fmax = f
            elif f < fmin:
                fmin = f
        f = mass - rho * length
        if f > fmax:
            fmax = f
        elif f < fmin:
            fmin = f
        out[c] = fmax - fmin
    return out[:P]


@njit(cache=True)
def rebuild_bnd_inplace(bnd, size, keep_mask):
    """Drop the middle boundary of every merged pair, compacting in place.

    Returns the new boundary count; the write head never passes the read
    head, so forward compaction is safe.
    """
    P = keep_mask.size
    w = 0
    for i in range(size):
        if i % 2 == 1 and (i - 1) // 2 < P and not keep_mask[(i - 1) // 2]:
            continue
        bnd[w] = bnd[i]
        w += 1
    return w


@njit(cache=True)
def sorted_unique_stats(samples):
    """Unique positions and exclusive prefix counts of a sorted array, one pass.

    cum_counts[i] is the number of samples before unique[i]; the final entry
    is n.  Returns m = -1 when the input is not sorted.
    """
    n = samples.size
    uniq = np.empty(n, np.float64)
    cumc = np.empty(n + 1, np.int64)
    prev = samples[0]
    uniq[0] = prev
    cumc[0] = 0
    m = 1
    for i in range(1, n):
        x = samples[i]
        if x < prev:
            return uniq[:1], cumc[:1], -1
        if x != prev:
            cumc[m] = i
            uniq[m] = x
            m += 1
            prev = x
    cumc[m] = n
    return uniq[:m], cumc[: m + 1], m
