"""Independent reference computations used by the tests.

These re-derive the forward losses with explicit loops in extended precision
(np.longdouble) and share no code with the package's vectorised forward and
backward passes. Finite differences of these functions are the gradient oracle.
"""
import numpy as np

LD = np.longdouble


def _htanh(v):
    return max(LD(-1), min(LD(1), v))


def mswe_loss_ref(P, windows, label, lex, corrupt):
    """Joint loss for one tweet; ``lex`` maps id -> 0 (pos) / 1 (neg) / -1."""
    emb = P.embeddings.astype(LD)
    Ws, bs = P.W_shared.astype(LD), P.b_shared.astype(LD)
    wn, Wws = P.W_ngram.astype(LD)[0], P.W_ws.astype(LD)
    Wt, bt = P.W_tweet.astype(LD), P.b_tweet.astype(LD)
    Wp, bp = P.W_proj.astype(LD), P.b_proj.astype(LD)
    t, h = P.t, P.h
    c = t // 2

    def unit(ids):
        x = np.concatenate([emb[i] for i in ids])
        return np.array([np.dot(x, Ws[:, j]) + bs[j] for j in range(h)], dtype=LD)

    es, word_losses = [], []
    for k, win in enumerate(windows):
        e = unit(win)
        es.append(e)
        bad = list(win)
        bad[c] = corrupt[k]
        ec = unit(bad)
        a = np.array([_htanh(v) for v in e], dtype=LD)
        ac = np.array([_htanh(v) for v in ec], dtype=LD)
        ngm = max(LD(0), 1 - np.dot(wn, a) + np.dot(wn, ac))
        pol = lex[win[c]]
        if pol < 0:
            word_losses.append(ngm)
        else:
            s = [np.dot(Wws[0], a), np.dot(Wws[1], a)]  # slot 1 = positive
            true, false = (s[1], s[0]) if pol == 0 else (s[0], s[1])
            ws = max(LD(0), 1 - true + false)
            word_losses.append(P.alpha * ngm + (1 - P.alpha) * ws)
    word = sum(word_losses) / len(word_losses)

    n = len(es)
    mx = [max(es[k][j] for k in range(n)) for j in range(h)]
    av = [sum(es[k][j] for k in range(n)) / n for j in range(h)]
    mn = [min(es[k][j] for k in range(n)) for j in range(h)]
    pooled = np.array(mx + av + mn, dtype=LD)
    a2 = np.array([np.dot(Wt[j], pooled) + bt[j] for j in range(h)], dtype=LD)
    z = np.array([np.dot(Wp[k], a2) + bp[k] for k in range(2)], dtype=LD)
    m = max(z)
    logsum = m + np.log(sum(np.exp(v - m) for v in z))
    tweet = -(z[label] - logsum)
    return P.beta * word + (1 - P.beta) * tweet


def mswe_kink_distance(P, windows, lex, corrupt):
    """Smallest distance of any non-smooth point from its kink."""
    emb = P.embeddings
    t, c = P.t, P.t // 2
    d = []
    es = []
    for k, win in enumerate(windows):
        bad = np.array(win)
        bad[c] = corrupt[k]
        e = emb[np.array(win)].reshape(-1) @ P.W_shared + P.b_shared
        ec = emb[bad].reshape(-1) @ P.W_shared + P.b_shared
        es.append(e)
        d.extend(np.abs(np.abs(e) - 1))
        d.extend(np.abs(np.abs(ec) - 1))
        a, ac = np.clip(e, -1, 1), np.clip(ec, -1, 1)
        d.append(abs(1 - a @ P.W_ngram[0] + ac @ P.W_ngram[0]))
        if lex[win[c]] >= 0:
            s = P.W_ws @ a
            d.append(abs(1 - s[0] + s[1]) if lex[win[c]] == 1 else abs(1 - s[1] + s[0]))
    E = np.sort(np.array(es), axis=0)
    if len(E) > 1:
        d.extend(E[-1] - E[-2])
        d.extend(E[1] - E[0])
    return float(min(d))


def classifier_loss_ref(params, seqs, gold, table, with_kink=False):
    """Mean cross-entropy of the CNN classifier (no dropout), by explicit loops.

    With ``with_kink`` also returns the smallest max-pool top-2 gap or |ReLU
    input| seen, i.e. the distance from the nearest non-smooth point.
    """
    T = {k: v.astype(LD) for k, v in params.tensors.items()}
    table = table.astype(LD)
    smax = max(params.widths)
    total = LD(0)
    kink = np.inf
    for seq, y in zip(seqs, gold):
        rows = [table[i] for i in seq]
        d = table.shape[1]
        while len(rows) < smax:
            rows.append(np.zeros(d, dtype=LD))
        feats = []
        for s in params.widths:
            W, b = T[f"conv{s}_W"], T[f"conv{s}_b"]
            for f in range(W.shape[0]):
                vals = sorted(b[f] + sum(np.dot(W[f, q], rows[p + q]) for q in range(s))
                              for p in range(len(rows) - s + 1))
                if len(vals) > 1:
                    kink = min(kink, float(vals[-1] - vals[-2]))
                feats.append(vals[-1])
        feats = np.array(feats, dtype=LD)
        pre = [np.dot(T["W_hidden"][j], feats) + T["b_hidden"][j]
               for j in range(T["W_hidden"].shape[0])]
        kink = min(kink, float(min(abs(v) for v in pre)))
        hid = np.array([max(LD(0), v) for v in pre], dtype=LD)
        z = np.array([np.dot(T["W_out"][k], hid) + T["b_out"][k] for k in range(2)], dtype=LD)
        m = max(z)
        total += -(z[y] - m - np.log(sum(np.exp(v - m) for v in z)))
    loss = total / len(seqs)
    return (loss, kink) if with_kink else loss
