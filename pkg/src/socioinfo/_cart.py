"""Compiled CART kernels shared by single trees, bagging and random forests.

Splits minimise the summed squared error of the children. For 0/1 targets
that is the Gini criterion up to a factor of two, so one kernel serves both
families. Nodes are numbered in pre-order: a left child is always its
parent's id + 1.
"""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def _best_split(XT, ys, order, start, end, feats, min_leaf):
    n = end - start
    total = 0.0
    for i in range(start, end):
        total += ys[order[0, i]]
    parent_score = total * total / n
    best_score = -np.inf
    best_feat = -1
    best_thr = 0.0
    for f in feats:
        row = order[f]
        xf = XT[f]
        left = 0.0
        for i in range(n - 1):
            slot = row[start + i]
            left += ys[slot]
            nl = i + 1
            nr = n - nl
            if nl < min_leaf:
                continue
            if nr < min_leaf:
                break
            a = xf[slot]
            b = xf[row[start + i + 1]]
            if not a < b:
                continue
            right = total - left
            score = left * left / nl + right * right / nr
            if score > best_score:
                best_score = score
                best_feat = f
                thr = a + (b - a) / 2.0
                if not thr < b:
                    thr = a
                best_thr = thr
    gain = best_score - parent_score
    if best_feat < 0 or not gain > 1e-12 * max(1.0, abs(parent_score)):
        return -1, 0.0
    return best_feat, best_thr


@njit(cache=True)
def build_tree(X, y, sample, mtry, min_leaf, max_depth):
    """Grow one tree on rows ``sample`` (may repeat); ``mtry`` features per node.

    Each feature's slot order is sorted once and kept sorted within every
    node by stable partitioning. Random feature subsets draw from numba's
    global generator, so callers seed it first. ``max_depth < 0`` means
    unlimited.
    """
    n = sample.shape[0]
    p = X.shape[1]
    XT = np.empty((p, n))
    ys = np.empty(n)
    for i in range(n):
        ys[i] = y[sample[i]]
        for f in range(p):
            XT[f, i] = X[sample[i], f]
    order = np.empty((p, n), dtype=np.int64)
    for f in range(p):
        order[f] = np.argsort(XT[f], kind="mergesort")
    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)

    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_parent = np.empty(cap, dtype=np.int64)
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    st_parent[0] = -1
    st_top = 1
    count = 0
    all_feats = np.arange(p)
    while st_top > 0:
        st_top -= 1
        start = st_start[st_top]
        end = st_end[st_top]
        depth = st_depth[st_top]
        parent = st_parent[st_top]
        node = count
        count += 1
        if parent >= 0 and node != parent + 1:
            # the left child is always parent + 1; only right links are stored
            right[parent] = node
        m = end - start
        s = 0.0
        for i in range(start, end):
            s += ys[order[0, i]]
        value[node] = s / m
        if m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue
        if mtry < p:
            feats = np.sort(np.random.permutation(p)[:mtry])
        else:
            feats = all_feats
        f, thr = _best_split(XT, ys, order, start, end, feats, min_leaf)
        if f < 0:
            continue
        nl = 0
        for i in range(start, end):
            slot = order[0, i]
            left = XT[f, slot] <= thr
            goes_left[slot] = left
            if left:
                nl += 1
        for g in range(p):
            row = order[g]
            a = start
            b = 0
            for i in range(start, end):
                slot = row[i]
                if goes_left[slot]:
                    row[a] = slot
                    a += 1
                else:
                    buf[b] = slot
                    b += 1
            for i in range(b):
                row[a + i] = buf[i]
        feature[node] = f
        threshold[node] = thr
        # push right first so the left subtree is numbered next
        st_start[st_top] = start + nl
        st_end[st_top] = end
        st_depth[st_top] = depth + 1
        st_parent[st_top] = node
        st_top += 1
        st_start[st_top] = start
        st_end[st_top] = start + nl
        st_depth[st_top] = depth + 1
        st_parent[st_top] = node
        st_top += 1
    return feature[:count].copy(), threshold[:count].copy(), right[:count].copy(), value[:count].copy()


@njit(cache=True)
def grow_ensemble(X, y, seeds, bootstrap, mtry, min_leaf, max_depth):
    """One tree per seed; returns concatenated node arrays and tree offsets."""
    n = X.shape[0]
    t = seeds.shape[0]
    feats = []
    thrs = []
    rights = []
    values = []
    offsets = np.zeros(t + 1, dtype=np.int64)
    for k in range(t):
        np.random.seed(seeds[k])
        if bootstrap:
            sample = np.random.randint(0, n, n)
        else:
            sample = np.arange(n)
        f, th, r, v = build_tree(X, y, sample, mtry, min_leaf, max_depth)
        feats.append(f)
        thrs.append(th)
        rights.append(r)
        values.append(v)
        offsets[k + 1] = offsets[k] + f.shape[0]
    total = offsets[t]
    feature = np.empty(total, dtype=np.int64)
    threshold = np.empty(total)
    right = np.empty(total, dtype=np.int64)
    value = np.empty(total)
    for k in range(t):
        a = offsets[k]
        b = offsets[k + 1]
        feature[a:b] = feats[k]
        threshold[a:b] = thrs[k]
        right[a:b] = rights[k]
        value[a:b] = values[k]
    return feature, threshold, right, value, offsets


@njit(cache=True)
def predict_ensemble(X, feature, threshold, right, value, offsets):
    """Mean leaf value across trees for every row of ``X``."""
    n = X.shape[0]
    t = offsets.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for k in range(t):
            base = offsets[k]
            node = 0
            while feature[base + node] != LEAF:
                if X[i, feature[base + node]] <= threshold[base + node]:
                    node += 1
                else:
                    node = right[base + node]
            acc += value[base + node]
        out[i] = acc / t
    return out
