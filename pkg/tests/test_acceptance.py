"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import time

import numpy as np

from drugscreen.cnn import CnnConfig, predict_texts, train, weighted_cross_entropy
from drugscreen.corpus import FunnelReport, PostRecord, TextCleaner, filter_rows
from drugscreen.evaluation import f1_score, fleiss_kappa, rating_counts, roc_auc
from drugscreen.lexicon import match_keywords
from drugscreen.rulemine import Rule, apriori, gen_rules, hits, rule_graph
from drugscreen.synthgen import (
    ClassBalance,
    Kind,
    LabeledText,
    SynthBatch,
    SynthConfig,
    balance_report,
    generate_synthetic,
)
from drugscreen.toydata import make_benchmark_texts, make_toy_records, make_toy_texts
from helpers import (
    brute_auc,
    brute_itemsets,
    brute_kappa,
    gradient_check,
    plain_cross_entropy,
    power_hits,
    run_pipeline,
)

RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_gradient_correctness():
    start = time.perf_counter()
    worst = [gradient_check(seed)[0] for seed in range(25)]
    elapsed = time.perf_counter() - start
    ok = max(worst) < 1e-4 and elapsed < 60
    report(1, ok, f"25 configs, max relative error {max(worst):.2e}, {elapsed:.1f}s")


def test_02_loss_formula():
    a = float(weighted_cross_entropy(1, 0.5, 2.0))
    b = [float(weighted_cross_entropy(0, 0.5, w)) for w in (0.1, 1.0, 6.153, 100.0)]
    rng = np.random.default_rng(2)
    y = rng.integers(0, 2, 1000)
    p = rng.uniform(1e-9, 1 - 1e-9, 1000)
    gap = float(np.abs(weighted_cross_entropy(y, p, 1.0) - plain_cross_entropy(y, p)).max())
    ok = abs(a - 1.386294) <= 1e-6 and all(abs(v - 0.693147) <= 1e-6 for v in b) and gap <= 1e-12
    report(2, ok, f"L(1,0.5,2)={a:.6f}, L(0,0.5,.)={b[0]:.6f}, unit-weight gap {gap:.1e}")


def test_03_trainability(toy_table):
    texts, labels = make_toy_texts(200, 200, seed=0)
    held_x, held_y = make_toy_texts(100, 100, seed=1)
    cfg = CnnConfig(embedding_dim=8, learning_rate=1e-3, epochs=10)
    start = time.perf_counter()
    res = train(texts, labels, toy_table, cfg)
    elapsed = time.perf_counter() - start
    pred, _ = predict_texts(held_x, res.params, toy_table, cfg)
    acc = float(np.mean(pred == held_y))
    losses = np.array([s.loss for s in res.trace])
    moving = np.convolve(losses, np.ones(5) / 5, mode="valid")
    decreasing = bool(np.all(np.diff(moving) < 0))
    ok = acc >= 0.95 and elapsed <= 60 and decreasing
    report(3, ok, f"held-out accuracy {acc:.3f}, {elapsed:.1f}s, moving-average loss "
                  f"{'strictly decreasing' if decreasing else 'NOT decreasing'}")


def _residual(tokens, lexicon):
    _, spans = match_keywords(tokens, lexicon)
    keep, pos = [], 0
    for s in spans:
        keep.extend(tokens[pos:s.start])
        keep.append(None)
        pos = s.start + s.length
    return keep + tokens[pos:]


def test_04_synthetic_generation(lexicon):
    texts, labels = make_toy_texts(150, 150, seed=11)
    src = [LabeledText(str(i), t, int(y)) for i, (t, y) in enumerate(zip(texts, labels))]
    src = [s for s in src if match_keywords(s.tokens, lexicon)[1]]
    batch = generate_synthetic(src, SynthConfig(m=4, seed=3), lexicon)
    variants = batch.synthetics
    by_id = {s.id_str: s for s in src}
    violations = {"label": 0, "kind": 0, "residual": 0}
    for s in variants:
        parent = by_id[s.source_id]
        violations["label"] += s.label != parent.label
        for r in s.replacements:
            placed = s.tokens[r.start:r.start + r.length] == list(r.replacement)
            same_kind = any(e.kind is r.kind for e in lexicon.lookup(r.replacement))
            violations["kind"] += not (placed and same_kind)
        violations["residual"] += _residual(s.tokens, lexicon) != _residual(parent.tokens, lexicon)
    example = generate_synthetic([LabeledText("t", ["smoke", "weed", "everyday"], 1)],
                                 SynthConfig(m=1, seed=996), lexicon).synthetics[0]
    reachable = (example.tokens == ["snort", "cocaine", "everyday"]
                 and [r.kind for r in example.replacements] == [Kind.USE, Kind.DRUG])
    ok = len(variants) >= 1000 and not any(violations.values()) and reachable
    report(4, ok, f"{len(variants)} variants, violations {violations}, "
                  f"'smoke weed everyday' -> '{' '.join(example.tokens)}' (seed 996)")


def test_05_metric_reproduction():
    f_a = f1_score(0.893, 0.784)
    f_b = f1_score(0.597, 0.906)
    orig = [LabeledText(f"p{i}", ["x"], 1) for i in range(372)]
    orig += [LabeledText(f"n{i}", ["x"], 0) for i in range(2289)]
    extra = [LabeledText(f"s{i}", ["x"], 1) for i in range(5352 - 372)]
    extra += [LabeledText(f"t{i}", ["x"], 0) for i in range(6790 - 2289)]
    rep = balance_report(SynthBatch(orig, extra))
    ok = (abs(f_a - 0.835) <= 1e-3 and abs(f_b - 0.719) <= 1e-3
          and rep["original"].total == 2661 and rep["combined"] == ClassBalance(5352, 6790)
          and rep["combined"].total == 12142)
    report(5, ok, f"F1 {f_a:.4f} and {f_b:.4f}; totals {rep['original'].total} "
                  f"and {rep['combined'].total}")


def test_06_auc_oracle():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 501))
        y = rng.integers(0, 2, n)
        y[:2] = [0, 1]
        s = np.round(rng.normal(size=n) + rng.uniform(0, 2) * y, int(rng.integers(1, 4)))
        worst = max(worst, abs(roc_auc(s, y)[1] - brute_auc(s, y)))
    y = np.array([0, 1, 1, 0, 1])
    perfect = roc_auc(y.astype(float), y)[1]
    constant = roc_auc(np.zeros(5), y)[1]
    ok = worst <= 1e-9 and perfect == 1.0 and constant == 0.5
    report(6, ok, f"100 sets, max |trapezoid - pairwise| {worst:.1e}; perfect {perfect}, "
                  f"constant {constant}")


def test_07_fleiss_kappa():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        n, r, k = int(rng.integers(1, 40)), int(rng.integers(2, 7)), int(rng.integers(2, 5))
        table = rng.integers(0, k, size=(n, r)).tolist()
        if len({c for row in table for c in row}) < 2:
            table[0][0], table[0][1] = 0, 1
        worst = max(worst, abs(fleiss_kappa(rating_counts(table)).kappa - brute_kappa(table)))
    perfect = fleiss_kappa(rating_counts([[0, 0, 0], [1, 1, 1], [2, 2, 2]])).kappa
    noise = fleiss_kappa(rating_counts(rng.integers(0, 3, size=(10_000, 3)))).kappa
    ok = worst <= 1e-9 and perfect == 1.0 and abs(noise) < 0.05
    report(7, ok, f"100 tables, max deviation {worst:.1e}; perfect {perfect}; random {noise:+.4f}")


def test_08_apriori_exactness():
    rng = np.random.default_rng(8)
    mismatches, stat_gap = 0, 0.0
    for _ in range(50):
        items = [f"t{i}" for i in range(int(rng.integers(1, 9)))]
        n = int(rng.integers(1, 201))
        db = [frozenset(i for i in items if rng.random() < rng.uniform(0.2, 0.7)) for _ in range(n)]
        s = float(rng.choice([0.05, 0.1, 0.2, 0.3, 0.4, 0.5]))
        found = apriori(db, s, max_len=8)
        mismatches += found != brute_itemsets(db, s)
        for r in gen_rules(found, n, 0.3):
            cons = sum(set(r.consequent) <= t for t in db) / n
            stat_gap = max(stat_gap, abs(r.support - r.count / n), abs(r.lift - r.confidence / cons))
    sup = gen_rules({("a",): 1990, ("b",): 2000, ("a", "b"): 1984}, 3_696_150, 0.3)[0].support
    ok = mismatches == 0 and stat_gap <= 1e-9 and abs(sup - 0.00053677) <= 1e-8
    report(8, ok, f"50 databases, {mismatches} mismatches, rule-stat gap {stat_gap:.1e}, "
                  f"1984/3696150 = {sup:.10f}")


def _edge(a, b):
    return Rule((a,), (b,), 0.1, 0.5, 1.0, 1)


def test_09_hits():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        k = int(rng.integers(2, 13))
        names = [f"n{i:02d}" for i in range(k)]
        rules = [_edge(names[i], names[j]) for i in range(k) for j in range(k)
                 if i != j and rng.random() < rng.uniform(0.1, 0.5)]
        rules = rules or [_edge(names[0], names[1])]
        res = hits(rules)
        _, adj = rule_graph(rules)
        h, a = power_hits(adj)
        worst = max(worst, np.abs(res.hubs - h).max(), np.abs(res.authorities - a).max())
    single = hits([_edge("a", "b")])
    cycle = hits([_edge("a", "b"), _edge("b", "a")])
    single_ok = single.hubs.tolist() == [1.0, 0.0] and single.authorities.tolist() == [0.0, 1.0]
    cycle_ok = (cycle.hubs[0] == cycle.hubs[1] and cycle.authorities[0] == cycle.authorities[1])
    ok = worst <= 1e-8 and single_ok and cycle_ok
    report(9, ok, f"50 graphs, max deviation {worst:.1e}; single rule {single_ok}, cycle {cycle_ok}")


def test_10_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    first = run_pipeline(tmp_path / "a", n_records=500, seed=0)
    second = run_pipeline(tmp_path / "b", n_records=500, seed=0)
    elapsed = time.perf_counter() - start
    rel_a = [p.relative_to(tmp_path / "a") for p in first]
    rel_b = [p.relative_to(tmp_path / "b") for p in second]
    differ = [str(r) for r, p, q in zip(rel_a, first, second) if p.read_bytes() != q.read_bytes()]
    ok = rel_a == rel_b and not differ and elapsed < 300
    report(10, ok, f"{len(first)} artifacts per run, differing: {differ or 'none'}, "
                   f"two runs in {elapsed:.1f}s")


def test_11_cleaning_throughput(lexicon):
    texts = make_benchmark_texts(20_000, length=200, seed=11)
    assert all(len(t) == 200 for t in texts)
    cleaner = TextCleaner().fit()
    cleaner.clean(texts[0])
    best = 0.0
    for _ in range(3):
        start = time.perf_counter()
        for t in texts:
            cleaner.clean(t)
        best = max(best, len(texts) / (time.perf_counter() - start))

    sums_ok = True
    for seed in range(5):
        raw = [PostRecord.from_dict(d) for d in make_toy_records(400, seed=seed)]
        for r in raw:
            r.text = cleaner.clean(r.original_text)
        kept, rep = filter_rows(iter(raw), lexicon)
        n_kept = len(list(kept))
        rows = rep.rows()
        sums_ok &= (rep.input == 400 and rep.kept == n_kept
                    and n_kept + sum(d for _, _, d in rows) == rep.input
                    and all(rows[i][1] == rows[i - 1][1] - rows[i][2] for i in range(1, len(rows))))
    total = sum((FunnelReport(10, 1, 2, 3), FunnelReport(5, 0, 1, 1)), FunnelReport())
    sums_ok &= total.kept == 7 and total.input == 15
    ok = best >= 50_000 and sums_ok
    report(11, ok, f"{best:,.0f} records/s on 200-character texts; funnel sums "
                   f"{'consistent' if sums_ok else 'INCONSISTENT'}")
