"""Numba kernels: PRNG streams, bootstrap draws, tree growth, prediction.

All randomness flows through an explicit splitmix64 state so that results
are a pure function of (seed, tree index), independent of thread scheduling.
The kernels release the GIL, letting tree training run in parallel threads.

Feature indices inside node arrays are 1-based (0 column = feature 1);
a node is internal iff its feature entry is >= 1, leaves store -1.
"""

import numba as nb
import numpy as np
from numba import uint64

U64 = np.uint64


def seed_state(seed: int) -> np.uint64:
    """Fold an arbitrary Python int (possibly negative) into a uint64 state."""
    return U64(seed & 0xFFFFFFFFFFFFFFFF)


_SM64_GAMMA = U64(0x9E3779B97F4A7C15)
_SM64_MUL1 = U64(0xBF58476D1CE4E5B9)
_SM64_MUL2 = U64(0x94D049BB133111EB)


@nb.njit(nb.types.UniTuple(uint64, 2)(uint64), cache=True, nogil=True)
def _sm64_next(state):
    state = U64(state + _SM64_GAMMA)
    z = state
    z = U64((z ^ (z >> U64(30))) * _SM64_MUL1)
    z = U64((z ^ (z >> U64(27))) * _SM64_MUL2)
    z = U64(z ^ (z >> U64(31)))
    return state, z


@nb.njit(uint64(uint64, uint64), cache=True, nogil=True)
def derive_stream(seed, index):
    """Initial PRNG state for substream `index` of master `seed`."""
    _, a = _sm64_next(seed)
    _, b = _sm64_next(U64(a ^ U64(U64(index) * _SM64_GAMMA + U64(1))))
    return b


@nb.njit(nb.types.UniTuple(uint64, 2)(uint64, uint64), cache=True, nogil=True)
def _next_below(state, n):
    """Unbiased draw from [0, n) via modulo with rejection."""
    t = U64((U64(0) - n) % n)
    while True:
        state, v = _sm64_next(state)
        if v >= t:
            return state, U64(v % n)


@nb.njit(cache=True, nogil=True)
def bootstrap_fill(n, state):
    """n uniform draws with replacement from [0, n) plus the undrawn rest."""
    bag = np.empty(n, np.int64)
    inbag = np.zeros(n, np.bool_)
    for i in range(n):
        state, v = _next_below(state, U64(n))
        r = np.int64(v)
        bag[i] = r
        inbag[r] = True
    n_oob = 0
    for i in range(n):
        if not inbag[i]:
            n_oob += 1
    oob = np.empty(n_oob, np.int64)
    k = 0
    for i in range(n):
        if not inbag[i]:
            oob[k] = i
            k += 1
    return bag, oob, state


@nb.njit(cache=True, nogil=True)
def grow_tree(xdense, ydata, bag, n_classes, min_samples_split, features_per_node, max_depth, state):
    """Grow one unpruned CART tree on the given bag rows.

    Per node: draw `features_per_node` distinct features without replacement,
    scan every midpoint between consecutive distinct sorted values, keep the
    (feature, threshold) with the lowest weighted Gini mass. If every drawn
    feature is constant on the node, one more batch is drawn from the
    remaining features; if that fails too the node becomes a leaf. Ties in
    the split score keep the earlier candidate (draw order, then lower
    threshold); tied leaf pluralities resolve to the lowest class id.

    Returns preorder node arrays (feature 1-based / -1, threshold, left,
    right, leaf_class) plus the advanced PRNG state. max_depth < 0 means
    unlimited.
    """
    n = bag.shape[0]
    m = xdense.shape[1]
    cap = 2 * n + 1
    feat = np.full(cap, -1, np.int32)
    thresh = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    leaf_class = np.full(cap, -1, np.int32)

    idx = bag.copy()
    perm = np.arange(m, dtype=np.int64)
    counts = np.zeros(n_classes, np.int64)
    lcounts = np.zeros(n_classes, np.int64)
    vals = np.empty(n, np.float64)
    tmp = np.empty(n, np.int64)

    # DFS stack; pushing right before left yields preorder numbering.
    stack_s = np.empty(2 * n + 4, np.int64)
    stack_e = np.empty(2 * n + 4, np.int64)
    stack_parent = np.empty(2 * n + 4, np.int64)
    stack_isleft = np.empty(2 * n + 4, np.int64)
    stack_depth = np.empty(2 * n + 4, np.int64)
    top = 0
    stack_s[top] = 0
    stack_e[top] = n
    stack_parent[top] = -1
    stack_isleft[top] = 0
    stack_depth[top] = 0
    top += 1
    n_nodes = 0

    while top > 0:
        top -= 1
        s = stack_s[top]
        e = stack_e[top]
        parent = stack_parent[top]
        isleft = stack_isleft[top]
        depth = stack_depth[top]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if isleft == 1:
                left[parent] = node
            else:
                right[parent] = node

        nn = e - s
        for c in range(n_classes):
            counts[c] = 0
        for i in range(s, e):
            counts[ydata[idx[i]]] += 1
        plural = 0
        plural_cnt = counts[0]
        for c in range(1, n_classes):
            if counts[c] > plural_cnt:
                plural = c
                plural_cnt = counts[c]

        if plural_cnt == nn or nn < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            leaf_class[node] = plural
            continue

        parent_ssq = 0.0
        for c in range(n_classes):
            parent_ssq += counts[c] * counts[c]
        parent_mass = nn - parent_ssq / nn

        best_mass = parent_mass
        best_feat = -1
        best_thr = 0.0
        pos = 0
        k_target = features_per_node if features_per_node < m else m
        for _batch in range(2):
            k_draw = k_target
            if k_draw > m - pos:
                k_draw = m - pos
            if k_draw <= 0:
                break
            saw_variation = False
            for _d in range(k_draw):
                state, j64 = _next_below(state, U64(m - pos))
                j = pos + np.int64(j64)
                t = perm[pos]
                perm[pos] = perm[j]
                perm[j] = t
                f = perm[pos]
                pos += 1

                for i in range(nn):
                    vals[i] = xdense[idx[s + i], f]
                order = np.argsort(vals[:nn])
                if vals[order[0]] == vals[order[nn - 1]]:
                    continue
                saw_variation = True

                for c in range(n_classes):
                    lcounts[c] = 0
                ssq_l = 0.0
                ssq_r = parent_ssq
                for i in range(nn - 1):
                    c = ydata[idx[s + order[i]]]
                    lc = lcounts[c]
                    rc = counts[c] - lc
                    ssq_l += 2 * lc + 1
                    ssq_r -= 2 * rc - 1
                    lcounts[c] = lc + 1
                    v_here = vals[order[i]]
                    v_next = vals[order[i + 1]]
                    if v_here < v_next:
                        n_l = i + 1
                        n_r = nn - n_l
                        mass = (n_l - ssq_l / n_l) + (n_r - ssq_r / n_r)
                        if mass < best_mass:
                            thr = 0.5 * (v_here + v_next)
                            if thr >= v_next:
                                # midpoint rounded up to the next value;
                                # fall back to the lower value so the right
                                # child stays non-empty under `<=`.
                                thr = v_here
                            best_mass = mass
                            best_feat = f
                            best_thr = thr
            if saw_variation:
                break

        if best_feat < 0:
            leaf_class[node] = plural
            continue

        # Stable partition of the segment by the chosen threshold.
        n_left = 0
        for i in range(s, e):
            if xdense[idx[i], best_feat] <= best_thr:
                tmp[n_left] = idx[i]
                n_left += 1
        n_right = 0
        for i in range(s, e):
            if xdense[idx[i], best_feat] > best_thr:
                tmp[n_left + n_right] = idx[i]
                n_right += 1
        for i in range(nn):
            idx[s + i] = tmp[i]
        mid = s + n_left

        feat[node] = np.int32(best_feat + 1)
        thresh[node] = best_thr
        stack_s[top] = mid
        stack_e[top] = e
        stack_parent[top] = node
        stack_isleft[top] = 0
        stack_depth[top] = depth + 1
        top += 1
        stack_s[top] = s
        stack_e[top] = mid
        stack_parent[top] = node
        stack_isleft[top] = 1
        stack_depth[top] = depth + 1
        top += 1

    return (
        feat[:n_nodes].copy(),
        thresh[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        leaf_class[:n_nodes].copy(),
        state,
    )


@nb.njit(cache=True, nogil=True)
def predict_rows(feat, thresh, left, right, leaf_class, xdense, rows):
    """Route each listed row of the dense matrix to a leaf class."""
    out = np.empty(rows.shape[0], np.int32)
    for i in range(rows.shape[0]):
        r = rows[i]
        node = 0
        while feat[node] >= 1:
            if xdense[r, feat[node] - 1] <= thresh[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out


@nb.njit(cache=True, nogil=True)
def oob_confusion(feat, thresh, left, right, leaf_class, xdense, ydata, oob, n_classes):
    """K x K (true, predicted) counts of a tree over its out-of-bag rows."""
    counts = np.zeros((n_classes, n_classes), np.int64)
    for i in range(oob.shape[0]):
        r = oob[i]
        node = 0
        while feat[node] >= 1:
            if xdense[r, feat[node] - 1] <= thresh[node]:
                node = left[node]
            else:
                node = right[node]
        counts[ydata[r], leaf_class[node]] += 1
    return counts
