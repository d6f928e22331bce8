"""Shared second-order tree engine behind the boosted and bagged ensembles.

One grower family covers three configurations:

* exact level-wise splits on raw feature values (boosting, ``splitter="exact"``),
* histogram leaf-wise splits on binned values with gradient-ratio-ordered
  categorical subsets (boosting, ``splitter="hist"``),
* bootstrapped deep trees with per-node feature subsets (random forest,
  squared loss so leaf values are in-leaf label means).

Every split maximizes  0.5 * (s(GL,HL) + s(GR,HR) - s(G,H)) - gamma  with
s(G,H) = T_a(G)^2 / (H + lambda) and T_a the L1 soft-threshold; leaf weights
are -T_a(G) / (H + lambda).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from stackcast.models.base import BinaryClassifierBase, sigmoid

MAX_BINS = 64


@njit(cache=True)
def _soft_threshold(g, alpha):
    if g > alpha:
        return g - alpha
    if g < -alpha:
        return g + alpha
    return 0.0


@njit(cache=True)
def _leaf_value(g, h, lam, alpha):
    denom = h + lam
    if denom <= 0.0:
        return 0.0
    return -_soft_threshold(g, alpha) / denom


@njit(cache=True)
def _score(g, h, lam, alpha):
    denom = h + lam
    if denom <= 0.0:
        return 0.0
    t = _soft_threshold(g, alpha)
    return t * t / denom


@njit(cache=True)
def _grow_exact(
    X,
    sorted_idx,
    g,
    h,
    w,
    active,
    max_depth,
    lam,
    alpha,
    gamma,
    min_child_weight,
    min_samples_leaf,
    min_samples_split,
    tree_feat_mask,
    mtry,
    seed,
):
    """Level-wise exact greedy grower. Returns flat node arrays.

    ``w`` are sample weights (bootstrap counts / subsample indicator); the
    split threshold is the left-edge feature value, rows with x <= thr go
    left. With ``mtry > 0`` each node samples its own feature subset.
    """
    n, p = X.shape
    max_nodes = 2 * n + 3
    feat = np.full(max_nodes, -1, np.int64)
    thr = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes)

    node_of_row = np.full(n, -1, np.int64)
    n_active = 0
    for r in range(n):
        if active[r]:
            node_of_row[r] = 0
            n_active += 1
    if n_active == 0:
        return feat[:1], thr[:1], left[:1], right[:1], value[:1]

    if mtry > 0:
        np.random.seed(seed)
    allowed = np.empty(p, np.int64)
    n_allowed = 0
    for j in range(p):
        if tree_feat_mask[j]:
            allowed[n_allowed] = j
            n_allowed += 1

    lo, hi = 0, 1
    n_nodes = 1
    depth = 0
    while hi > lo:
        nf = hi - lo
        G = np.zeros(nf)
        H = np.zeros(nf)
        W = np.zeros(nf)
        for r in range(n):
            nd = node_of_row[r]
            if nd >= lo:
                k = nd - lo
                G[k] += g[r]
                H[k] += h[r]
                W[k] += w[r]

        if depth >= max_depth:
            for k in range(nf):
                value[lo + k] = _leaf_value(G[k], H[k], lam, alpha)
            for r in range(n):
                if node_of_row[r] >= lo:
                    node_of_row[r] = -1
            break

        # per-node candidate feature sets
        node_feat = np.zeros((nf, p), np.bool_)
        if mtry > 0 and mtry < n_allowed:
            scratch = np.empty(n_allowed, np.int64)
            for k in range(nf):
                for a in range(n_allowed):
                    scratch[a] = allowed[a]
                for pick in range(mtry):
                    swap = pick + np.random.randint(0, n_allowed - pick)
                    tmp = scratch[pick]
                    scratch[pick] = scratch[swap]
                    scratch[swap] = tmp
                    node_feat[k, scratch[pick]] = True
        else:
            for k in range(nf):
                for a in range(n_allowed):
                    node_feat[k, allowed[a]] = True

        parent_score = np.empty(nf)
        splittable = np.empty(nf, np.bool_)
        for k in range(nf):
            parent_score[k] = _score(G[k], H[k], lam, alpha)
            splittable[k] = W[k] >= min_samples_split

        best_gain = np.zeros(nf)
        best_feat = np.full(nf, -1, np.int64)
        best_thr = np.zeros(nf)

        run_g = np.empty(nf)
        run_h = np.empty(nf)
        run_w = np.empty(nf)
        last_val = np.empty(nf)
        seen = np.empty(nf, np.bool_)
        for j in range(p):
            if not tree_feat_mask[j]:
                continue
            for k in range(nf):
                run_g[k] = 0.0
                run_h[k] = 0.0
                run_w[k] = 0.0
                seen[k] = False
            for ii in range(n):
                r = sorted_idx[ii, j]
                nd = node_of_row[r]
                if nd < lo:
                    continue
                k = nd - lo
                v = X[r, j]
                if seen[k] and v > last_val[k] and splittable[k] and node_feat[k, j]:
                    wl = run_w[k]
                    wr = W[k] - wl
                    hl = run_h[k]
                    hr = H[k] - hl
                    if (
                        wl >= min_samples_leaf
                        and wr >= min_samples_leaf
                        and hl >= min_child_weight
                        and hr >= min_child_weight
                    ):
                        gl = run_g[k]
                        gain = (
                            0.5
                            * (
                                _score(gl, hl, lam, alpha)
                                + _score(G[k] - gl, H[k] - hl, lam, alpha)
                                - parent_score[k]
                            )
                            - gamma
                        )
                        if gain > best_gain[k]:
                            best_gain[k] = gain
                            best_feat[k] = j
                            best_thr[k] = last_val[k]
                run_g[k] += g[r]
                run_h[k] += h[r]
                run_w[k] += w[r]
                last_val[k] = v
                seen[k] = True

        new_hi = n_nodes
        for k in range(nf):
            nd = lo + k
            if best_feat[k] >= 0 and best_gain[k] > 0.0:
                feat[nd] = best_feat[k]
                thr[nd] = best_thr[k]
                left[nd] = n_nodes
                right[nd] = n_nodes + 1
                n_nodes += 2
            else:
                value[nd] = _leaf_value(G[k], H[k], lam, alpha)

        for r in range(n):
            nd = node_of_row[r]
            if nd < lo:
                continue
            if feat[nd] >= 0:
                node_of_row[r] = left[nd] if X[r, feat[nd]] <= thr[nd] else right[nd]
            else:
                node_of_row[r] = -1

        lo, hi = new_hi, n_nodes
        depth += 1

    return feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True)
def _predict_exact(X, feat, thr, left, right, value, out):
    for r in range(X.shape[0]):
        nd = 0
        while feat[nd] >= 0:
            if X[r, feat[nd]] <= thr[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[r] += value[nd]


@njit(cache=True)
def _hist_best_split(
    Xb, n_bins, is_cat, g, h, w, idx, seg_lo, seg_hi,
    G, H, W, lam, alpha, gamma, min_child_weight, min_samples_leaf, feat_mask,
):
    """Best histogram split for one leaf segment.

    Numeric features scan bin prefixes; categorical features scan prefixes of
    bins ordered by sum-gradient / sum-hessian. Returns (gain, feature,
    threshold bin, go-left bin flags).
    """
    p = Xb.shape[1]
    parent = _score(G, H, lam, alpha)
    best_gain = 0.0
    best_feat = -1
    best_thr = -1
    best_mask = np.zeros(MAX_BINS, np.bool_)

    gb = np.empty(MAX_BINS)
    hb = np.empty(MAX_BINS)
    wb = np.empty(MAX_BINS)
    order = np.empty(MAX_BINS, np.int64)
    for j in range(p):
        if not feat_mask[j]:
            continue
        nb = n_bins[j]
        for b in range(nb):
            gb[b] = 0.0
            hb[b] = 0.0
            wb[b] = 0.0
        for ii in range(seg_lo, seg_hi):
            r = idx[ii]
            b = Xb[r, j]
            gb[b] += g[r]
            hb[b] += h[r]
            wb[b] += w[r]

        if is_cat[j]:
            # order non-empty category bins by gradient/hessian ratio
            m = 0
            for b in range(nb):
                if wb[b] > 0.0:
                    order[m] = b
                    m += 1
            for a in range(1, m):
                key = order[a]
                ratio_key = gb[key] / (hb[key] + 1e-12)
                t = a - 1
                while t >= 0 and gb[order[t]] / (hb[order[t]] + 1e-12) > ratio_key:
                    order[t + 1] = order[t]
                    t -= 1
                order[t + 1] = key
            gl = 0.0
            hl = 0.0
            wl = 0.0
            for a in range(m - 1):
                b = order[a]
                gl += gb[b]
                hl += hb[b]
                wl += wb[b]
                wr = W - wl
                hr = H - hl
                if (
                    wl >= min_samples_leaf
                    and wr >= min_samples_leaf
                    and hl >= min_child_weight
                    and hr >= min_child_weight
                ):
                    gain = (
                        0.5 * (_score(gl, hl, lam, alpha) + _score(G - gl, H - hl, lam, alpha) - parent)
                        - gamma
                    )
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = j
                        best_thr = -1
                        for b2 in range(MAX_BINS):
                            best_mask[b2] = False
                        for a2 in range(a + 1):
                            best_mask[order[a2]] = True
        else:
            gl = 0.0
            hl = 0.0
            wl = 0.0
            for b in range(nb - 1):
                gl += gb[b]
                hl += hb[b]
                wl += wb[b]
                if wl <= 0.0:
                    continue
                wr = W - wl
                if wr <= 0.0:
                    break
                hr = H - hl
                if (
                    wl >= min_samples_leaf
                    and wr >= min_samples_leaf
                    and hl >= min_child_weight
                    and hr >= min_child_weight
                ):
                    gain = (
                        0.5 * (_score(gl, hl, lam, alpha) + _score(G - gl, H - hl, lam, alpha) - parent)
                        - gamma
                    )
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = j
                        best_thr = b
                        for b2 in range(MAX_BINS):
                            best_mask[b2] = False
    return best_gain, best_feat, best_thr, best_mask.copy()


@njit(cache=True)
def _grow_hist(
    Xb, n_bins, is_cat, g, h, w, rows,
    num_leaves, max_depth, lam, alpha, gamma,
    min_child_weight, min_samples_leaf, min_samples_split, feat_mask,
):
    """Leaf-wise histogram grower: repeatedly split the highest-gain leaf."""
    max_nodes = 2 * num_leaves + 1
    feat = np.full(max_nodes, -1, np.int64)
    cat_split = np.zeros(max_nodes, np.bool_)
    thr_bin = np.full(max_nodes, -1, np.int64)
    cat_go_left = np.zeros((max_nodes, MAX_BINS), np.bool_)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes)
    depth_of = np.zeros(max_nodes, np.int64)

    seg_lo = np.zeros(max_nodes, np.int64)
    seg_hi = np.zeros(max_nodes, np.int64)
    node_G = np.zeros(max_nodes)
    node_H = np.zeros(max_nodes)
    node_W = np.zeros(max_nodes)
    cand_gain = np.full(max_nodes, -1.0)
    cand_feat = np.full(max_nodes, -1, np.int64)
    cand_thr = np.full(max_nodes, -1, np.int64)
    cand_mask = np.zeros((max_nodes, MAX_BINS), np.bool_)
    is_leaf = np.zeros(max_nodes, np.bool_)

    idx = rows.copy()
    n_rows = idx.shape[0]
    n_nodes = 1
    seg_lo[0] = 0
    seg_hi[0] = n_rows
    for ii in range(n_rows):
        r = idx[ii]
        node_G[0] += g[r]
        node_H[0] += h[r]
        node_W[0] += w[r]
    value[0] = _leaf_value(node_G[0], node_H[0], lam, alpha)
    is_leaf[0] = True
    if n_rows == 0:
        return (
            feat[:1], cat_split[:1], thr_bin[:1], cat_go_left[:1], left[:1],
            right[:1], value[:1],
        )
    if node_W[0] >= min_samples_split and max_depth > 0:
        gain, f, t, mask = _hist_best_split(
            Xb, n_bins, is_cat, g, h, w, idx, seg_lo[0], seg_hi[0],
            node_G[0], node_H[0], node_W[0], lam, alpha, gamma,
            min_child_weight, min_samples_leaf, feat_mask,
        )
        cand_gain[0] = gain
        cand_feat[0] = f
        cand_thr[0] = t
        cand_mask[0] = mask

    n_leaves = 1
    scratch = np.empty(n_rows, np.int64)
    while n_leaves < num_leaves:
        # highest-gain open leaf (lowest id on ties, for determinism)
        pick = -1
        pick_gain = 0.0
        for nd in range(n_nodes):
            if is_leaf[nd] and cand_feat[nd] >= 0 and cand_gain[nd] > pick_gain:
                pick = nd
                pick_gain = cand_gain[nd]
        if pick < 0:
            break

        j = cand_feat[pick]
        a, b = seg_lo[pick], seg_hi[pick]
        # stable partition of the leaf's row segment
        n_left = 0
        n_right = 0
        for ii in range(a, b):
            r = idx[ii]
            bin_r = Xb[r, j]
            if cat_split_goes_left(cand_thr[pick], cand_mask[pick], bin_r, is_cat[j]):
                scratch[n_left] = r
                n_left += 1
        for ii in range(a, b):
            r = idx[ii]
            bin_r = Xb[r, j]
            if not cat_split_goes_left(cand_thr[pick], cand_mask[pick], bin_r, is_cat[j]):
                scratch[n_left + n_right] = r
                n_right += 1
        for off in range(n_left + n_right):
            idx[a + off] = scratch[off]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[pick] = j
        cat_split[pick] = is_cat[j]
        thr_bin[pick] = cand_thr[pick]
        cat_go_left[pick] = cand_mask[pick]
        left[pick] = lid
        right[pick] = rid
        is_leaf[pick] = False

        seg_lo[lid], seg_hi[lid] = a, a + n_left
        seg_lo[rid], seg_hi[rid] = a + n_left, b
        depth_of[lid] = depth_of[pick] + 1
        depth_of[rid] = depth_of[pick] + 1
        for child in (lid, rid):
            for ii in range(seg_lo[child], seg_hi[child]):
                r = idx[ii]
                node_G[child] += g[r]
                node_H[child] += h[r]
                node_W[child] += w[r]
            value[child] = _leaf_value(node_G[child], node_H[child], lam, alpha)
            is_leaf[child] = True
            if node_W[child] >= min_samples_split and depth_of[child] < max_depth:
                gain, f, t, mask = _hist_best_split(
                    Xb, n_bins, is_cat, g, h, w, idx, seg_lo[child], seg_hi[child],
                    node_G[child], node_H[child], node_W[child], lam, alpha, gamma,
                    min_child_weight, min_samples_leaf, feat_mask,
                )
                cand_gain[child] = gain
                cand_feat[child] = f
                cand_thr[child] = t
                cand_mask[child] = mask
        n_leaves += 1

    return (
        feat[:n_nodes], cat_split[:n_nodes], thr_bin[:n_nodes],
        cat_go_left[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes],
    )


@njit(cache=True)
def cat_split_goes_left(thr, mask, bin_r, is_cat_feature):
    if is_cat_feature:
        return mask[bin_r]
    return bin_r <= thr


@njit(cache=True)
def _predict_hist(Xb, feat, cat_split, thr_bin, cat_go_left, left, right, value, out):
    for r in range(Xb.shape[0]):
        nd = 0
        while feat[nd] >= 0:
            b = Xb[r, feat[nd]]
            if cat_split[nd]:
                go_left = cat_go_left[nd, b]
            else:
                go_left = b <= thr_bin[nd]
            nd = left[nd] if go_left else right[nd]
        out[r] += value[nd]


class _Binner:
    """Quantile binning for numeric columns, identity for categorical ones."""

    def __init__(self, categorical: np.ndarray, n_bins: int):
        self.categorical = categorical
        self.n_bins = n_bins

    def fit(self, X: np.ndarray) -> "_Binner":
        self.edges_ = []
        counts = np.empty(X.shape[1], np.int64)
        for j in range(X.shape[1]):
            if self.categorical[j]:
                col = X[:, j]
                if not np.array_equal(col, np.round(col)) or col.min() < 0 or col.max() >= MAX_BINS:
                    raise ValueError(
                        f"categorical column {j} must hold integer codes in [0, {MAX_BINS})"
                    )
                self.edges_.append(None)
                counts[j] = int(col.max()) + 1
            else:
                qs = np.quantile(X[:, j], np.linspace(0.0, 1.0, self.n_bins + 1)[1:-1])
                edges = np.unique(qs)
                self.edges_.append(edges)
                counts[j] = len(edges) + 1
        self.bin_counts_ = counts
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape, np.int64)
        for j in range(X.shape[1]):
            if self.categorical[j]:
                col = np.round(X[:, j]).astype(np.int64)
                out[:, j] = np.clip(col, 0, MAX_BINS - 1)
            else:
                out[:, j] = np.searchsorted(self.edges_[j], X[:, j], side="right")
        return out

    def state(self) -> dict:
        return {
            "categorical": self.categorical.tolist(),
            "n_bins": self.n_bins,
            "edges": [e.tolist() if e is not None else None for e in self.edges_],
            "bin_counts": self.bin_counts_.tolist(),
        }

    @staticmethod
    def from_state(state: dict) -> "_Binner":
        binner = _Binner(np.asarray(state["categorical"], dtype=bool), int(state["n_bins"]))
        binner.edges_ = [
            np.asarray(e, dtype=np.float64) if e is not None else None for e in state["edges"]
        ]
        binner.bin_counts_ = np.asarray(state["bin_counts"], dtype=np.int64)
        return binner


def _logloss(y: np.ndarray, proba: np.ndarray) -> float:
    p = np.clip(proba, 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


class GradientBoostingClassifier(BinaryClassifierBase):
    """Second-order boosted trees on logistic loss.

    ``splitter="exact"`` grows level-wise on raw values; ``splitter="hist"``
    grows leaf-wise on quantile-binned values and supports declared
    categorical columns (gradient-ratio category subsets). The first margin
    is the prior log-odds, so fully regularized models fall back to the
    training base rate.
    """

    def __init__(
        self,
        splitter: str = "exact",
        n_estimators: int = 100,
        learning_rate: float = 0.1,
        max_depth: int = 3,
        min_child_weight: float = 1.0,
        subsample: float = 1.0,
        subsample_freq: int = 1,
        colsample_bytree: float = 1.0,
        reg_alpha: float = 0.0,
        reg_lambda: float = 1.0,
        gamma: float = 0.0,
        num_leaves: int = 31,
        n_bins: int = MAX_BINS,
        categorical_features: tuple = (),
        seed: int = 0,
    ):
        self.splitter = splitter
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_child_weight = min_child_weight
        self.subsample = subsample
        self.subsample_freq = subsample_freq
        self.colsample_bytree = colsample_bytree
        self.reg_alpha = reg_alpha
        self.reg_lambda = reg_lambda
        self.gamma = gamma
        self.num_leaves = num_leaves
        self.n_bins = n_bins
        self.categorical_features = categorical_features
        self.seed = seed

    @property
    def family(self):
        return "xgb" if self.splitter == "exact" else "lgbm"

    def _categorical_mask(self, p: int) -> np.ndarray:
        mask = np.zeros(p, dtype=bool)
        for c in self.categorical_features:
            j = c if isinstance(c, (int, np.integer)) else self.feature_names_in_.index(c)
            mask[j] = True
        return mask

    def fit(self, X, y):
        if self.splitter not in ("exact", "hist"):
            raise ValueError("splitter must be 'exact' or 'hist'")
        X, y = self._start_fit(X, y)
        n, p = X.shape
        if n < 20:
            raise ValueError(f"boosted trees need at least 20 training rows, got {n}")
        rng = np.random.default_rng(self.seed)

        base_rate = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
        self.base_score_ = float(np.log(base_rate / (1 - base_rate)))

        if self.splitter == "exact":
            if self._categorical_mask(p).any():
                raise ValueError("categorical_features require splitter='hist'")
            sorted_idx = np.argsort(X, axis=0, kind="stable").astype(np.int64)
            Xb = None
        else:
            self.binner_ = _Binner(self._categorical_mask(p), self.n_bins).fit(X)
            Xb = self.binner_.transform(X)

        margin = np.full(n, self.base_score_)
        yf = y.astype(np.float64)
        self.trees_ = []
        self.train_loss_path_ = []
        include = np.ones(n, dtype=bool)
        n_cols = max(1, int(round(self.colsample_bytree * p)))
        for m in range(self.n_estimators):
            proba = sigmoid(margin)
            grad = proba - yf
            hess = proba * (1 - proba)
            if self.subsample < 1.0 and m % max(self.subsample_freq, 1) == 0:
                include = rng.random(n) < self.subsample
                if not include.any():
                    include[rng.integers(0, n)] = True
            elif self.subsample >= 1.0:
                include = np.ones(n, dtype=bool)
            feat_mask = np.zeros(p, dtype=bool)
            feat_mask[rng.choice(p, size=n_cols, replace=False)] = True

            w = include.astype(np.float64)
            if self.splitter == "exact":
                nodes = _grow_exact(
                    X, sorted_idx, grad * w, hess * w, w, include,
                    self.max_depth, float(self.reg_lambda), float(self.reg_alpha),
                    float(self.gamma), float(self.min_child_weight), 0.0, 0.0,
                    feat_mask, 0, 0,
                )
                tree = {"kind": "exact", "nodes": nodes}
                pred = np.zeros(n)
                _predict_exact(X, *nodes, pred)
            else:
                rows = np.flatnonzero(include).astype(np.int64)
                nodes = _grow_hist(
                    Xb, self.binner_.bin_counts_, self.binner_.categorical,
                    grad * w, hess * w, w, rows,
                    self.num_leaves, self.max_depth, float(self.reg_lambda),
                    float(self.reg_alpha), float(self.gamma),
                    float(self.min_child_weight), 0.0, 0.0, feat_mask,
                )
                tree = {"kind": "hist", "nodes": nodes}
                pred = np.zeros(n)
                _predict_hist(Xb, *nodes, pred)

            tree["nodes"][-1][:] *= self.learning_rate
            pred *= self.learning_rate
            margin += pred
            self.trees_.append(tree)
            self.train_loss_path_.append(_logloss(yf, sigmoid(margin)))
        return self

    def decision_function(self, X):
        X = self._check_X(X)
        out = np.full(X.shape[0], self.base_score_)
        Xb = self.binner_.transform(X) if self.splitter == "hist" else None
        for tree in self.trees_:
            if tree["kind"] == "exact":
                _predict_exact(X, *tree["nodes"], out)
            else:
                _predict_hist(Xb, *tree["nodes"], out)
        return out

    def predict_proba(self, X):
        return sigmoid(self.decision_function(X))

    def leaf_weights(self) -> np.ndarray:
        """All leaf values across the ensemble (learning rate included)."""
        values = []
        for tree in self.trees_:
            nodes = tree["nodes"]
            feat, value = nodes[0], nodes[-1]
            values.extend(value[feat < 0].tolist())
        return np.asarray(values)

    def _get_state(self):
        trees = []
        for tree in self.trees_:
            trees.append(
                {"kind": tree["kind"], "nodes": [a.tolist() for a in tree["nodes"]]}
            )
        state = {"base_score": self.base_score_, "trees": trees}
        if self.splitter == "hist":
            state["binner"] = self.binner_.state()
        return state

    def _set_state(self, state):
        self.base_score_ = float(state["base_score"])
        self.trees_ = []
        for tree in state["trees"]:
            raw = tree["nodes"]
            if tree["kind"] == "exact":
                nodes = (
                    np.asarray(raw[0], np.int64),
                    np.asarray(raw[1], np.float64),
                    np.asarray(raw[2], np.int64),
                    np.asarray(raw[3], np.int64),
                    np.asarray(raw[4], np.float64),
                )
            else:
                nodes = (
                    np.asarray(raw[0], np.int64),
                    np.asarray(raw[1], np.bool_),
                    np.asarray(raw[2], np.int64),
                    np.asarray(raw[3], np.bool_),
                    np.asarray(raw[4], np.int64),
                    np.asarray(raw[5], np.int64),
                    np.asarray(raw[6], np.float64),
                )
            self.trees_.append({"kind": tree["kind"], "nodes": nodes})
        if "binner" in state:
            self.binner_ = _Binner.from_state(state["binner"])


class RandomForestClassifier(BinaryClassifierBase):
    """Bootstrap-aggregated deep trees; the prediction is the mean of the
    per-tree in-leaf positive rates."""

    family = "rf"

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int = 25,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        max_features="sqrt",
        bootstrap: bool = True,
        oob_score: bool = False,
        seed: int = 0,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.oob_score = oob_score
        self.seed = seed

    def _mtry(self, p: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(p)))
        if self.max_features is None:
            return 0
        return max(1, min(int(self.max_features), p))

    def fit(self, X, y):
        X, y = self._start_fit(X, y)
        n, p = X.shape
        rng = np.random.default_rng(self.seed)
        sorted_idx = np.argsort(X, axis=0, kind="stable").astype(np.int64)
        yf = y.astype(np.float64)
        all_feats = np.ones(p, dtype=bool)
        mtry = self._mtry(p)

        self.trees_ = []
        oob_sum = np.zeros(n)
        oob_cnt = np.zeros(n)
        for _ in range(self.n_estimators):
            if self.bootstrap:
                counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            else:
                counts = np.ones(n)
            active = counts > 0
            tree_seed = int(rng.integers(0, 2**31 - 1))
            # squared loss around 0: g = -y * w, h = w -> leaf = weighted mean(y)
            nodes = _grow_exact(
                X, sorted_idx, -yf * counts, counts, counts, active,
                self.max_depth, 0.0, 0.0, 0.0, 0.0,
                float(self.min_samples_leaf), float(self.min_samples_split),
                all_feats, mtry, tree_seed,
            )
            self.trees_.append(nodes)
            if self.oob_score and self.bootstrap:
                out = np.zeros(n)
                _predict_exact(X, *nodes, out)
                oob = ~active
                oob_sum[oob] += out[oob]
                oob_cnt[oob] += 1.0
        if self.oob_score and self.bootstrap:
            with np.errstate(invalid="ignore"):
                self.oob_decision_ = np.where(oob_cnt > 0, oob_sum / np.maximum(oob_cnt, 1), np.nan)
        return self

    def predict_proba(self, X):
        X = self._check_X(X)
        out = np.zeros(X.shape[0])
        for nodes in self.trees_:
            _predict_exact(X, *nodes, out)
        return out / len(self.trees_)

    def _get_state(self):
        return {"trees": [[a.tolist() for a in nodes] for nodes in self.trees_]}

    def _set_state(self, state):
        self.trees_ = []
        for raw in state["trees"]:
            self.trees_.append(
                (
                    np.asarray(raw[0], np.int64),
                    np.asarray(raw[1], np.float64),
                    np.asarray(raw[2], np.int64),
                    np.asarray(raw[3], np.int64),
                    np.asarray(raw[4], np.float64),
                )
            )
