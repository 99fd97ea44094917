"""Independent oracles shared by the unit and acceptance tests."""

import itertools

import numpy as np

from drugscreen.cnn import CnnConfig, init_params, loss_and_grad, weighted_cross_entropy


def random_tiny_config(rng):
    length = int(rng.integers(4, 11))
    heights = [h for h in (2, 3, 4) if h <= length and rng.random() < 0.6] or [2]
    return CnnConfig(window_length=length, embedding_dim=int(rng.integers(2, 9)),
                     filter_heights=tuple(heights), filters_per_height=int(rng.integers(1, 5)),
                     pos_weight=float(rng.uniform(0.5, 4.0)), stride=1)


def gradient_check(seed, step=1e-5):
    """Largest relative error between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(|a|, |n|, 1e-7)``; the floor keeps
    components that are zero on both sides from dividing by zero.
    """
    rng = np.random.default_rng(seed)
    cfg = random_tiny_config(rng)
    params = init_params(cfg, rng)
    for name in params:
        if name.endswith(".bias"):
            params[name] = rng.normal(0, 0.1, params[name].shape)
    b = int(rng.integers(1, 5))
    x = rng.normal(size=(b, cfg.window_length, cfg.embedding_dim))
    y = rng.integers(0, 2, size=b)
    _, grads = loss_and_grad(x, y, params, cfg)
    worst = 0.0
    for name, p in params.items():
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + step
            up, _ = loss_and_grad(x, y, params, cfg)
            p[idx] = old - step
            down, _ = loss_and_grad(x, y, params, cfg)
            p[idx] = old
            num = (up - down) / (2 * step)
            ana = grads[name][idx]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-7)
            worst = max(worst, err)
    return worst, cfg


def naive_forward(x, params, cfg):
    """Straight-line evaluation with explicit loops; returns (logits, yhat, features)."""
    length, k = x.shape
    feats = []
    for h in cfg.filter_heights:
        w, bias = params[f"conv{h}.weight"], params[f"conv{h}.bias"]
        for f in range(cfg.filters_per_height):
            best = None
            for pos in range(length - h + 1):
                s = bias[f]
                for r in range(h):
                    for c in range(k):
                        s += x[pos + r, c] * w[r, c, f]
                s = max(s, 0.0)
                best = s if best is None or s > best else best
            feats.append(best)
    feats = np.array(feats)
    logits = np.array([sum(feats[i] * params["out.weight"][i, o] for i in range(len(feats)))
                       + params["out.bias"][o] for o in range(2)])
    e = np.exp(logits - logits.max())
    return logits, e[1] / e.sum(), feats


def plain_cross_entropy(y, p):
    return -(y * np.log(p) + (1 - y) * np.log(1 - p))


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def brute_kappa(table):
    """Fleiss' kappa straight from the definitions, items x raters labels."""
    cats = sorted({c for row in table for c in row})
    n_items, r = len(table), len(table[0])
    agree = []
    for row in table:
        pairs = sum(1 for i, j in itertools.permutations(range(r), 2) if row[i] == row[j])
        agree.append(pairs / (r * (r - 1)))
    p_bar = sum(agree) / n_items
    p_e = sum((sum(row.count(c) for row in table) / (n_items * r)) ** 2 for c in cats)
    return (p_bar - p_e) / (1 - p_e)


def brute_itemsets(transactions, min_support, max_len=None):
    items = sorted({i for t in transactions for i in t})
    n = len(transactions)
    out = {}
    for size in range(1, (max_len or len(items)) + 1):
        for combo in itertools.combinations(items, size):
            c = sum(1 for t in transactions if set(combo) <= t)
            if c / n >= min_support:
                out[combo] = c
    return out


def power_hits(adj, iters=20000):
    """Dominant eigenvectors of A^T A and A A^T by dense power iteration."""
    ata = adj.T @ adj
    aat = adj @ adj.T
    a = adj.T @ np.ones(adj.shape[0])
    h = adj @ a
    for _ in range(iters):
        a = ata @ a
        a /= np.linalg.norm(a)
        h = aat @ h
        h /= np.linalg.norm(h)
    return h, a


def weighted_ce(y, p, w):
    return weighted_cross_entropy(y, p, w)


def run_pipeline(workdir, n_records=500, seed=0):
    """clean -> attrs -> synth -> train -> predict -> eval -> mine through the CLI.

    Returns the produced data files (checkpoint included) in a stable order.
    """
    import json
    from pathlib import Path

    from drugscreen.cli import main
    from drugscreen.toydata import make_toy_records, toy_vectors_path

    w = Path(workdir)
    w.mkdir(parents=True, exist_ok=True)
    (w / "raw.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in make_toy_records(n_records, seed=seed)))
    vec = str(toy_vectors_path())
    s = ["--seed", str(seed)]
    steps = [
        ["clean", "raw.jsonl", "clean.jsonl", "--funnel", "funnel.csv"],
        ["attrs", "clean.jsonl", "attrs.jsonl"],
        ["synth", "attrs.jsonl", "synth.jsonl", "--m", "2", "--balance", "balance.csv"],
        ["train", "synth.jsonl", "model.bin", "--vectors", vec, "--epochs", "2",
         "--learning-rate", "1e-3", "--window-length", "10", "--filter-heights", "2,3",
         "--n-filters", "8", "--stride", "5", "--batch-size", "32", "--trace", "trace.csv"],
        ["predict", "model.bin", "attrs.jsonl", "pred.jsonl", "--vectors", vec],
        ["eval", "pred.jsonl", "metrics.csv", "--roc", "roc.csv"],
        ["mine", "pred.jsonl", "mined", "--min-support", "0.01"],
    ]
    for step in steps:
        args = s + [step[0]] + [str(w / a) if a.endswith((".jsonl", ".csv", ".bin")) or a == "mined"
                                else a for a in step[1:]]
        code = main(args)
        if code != 0:
            raise RuntimeError(f"step {step[0]} exited with {code}")
    return sorted(p for p in w.rglob("*") if p.is_file() and p.name != "raw.jsonl")
