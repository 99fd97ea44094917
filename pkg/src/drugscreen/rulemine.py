"""Tag transactions, Apriori frequent itemsets, association rules and HITS."""

import csv
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Classification
from .lexicon import default_lexicon, match_keywords

__all__ = [
    "POSITIVE_TAG",
    "PRUNED_TAGS",
    "HitsResult",
    "Rule",
    "SweepResult",
    "TagStats",
    "apriori",
    "build_transactions",
    "gen_rules",
    "hits",
    "mine_rules",
    "read_transactions",
    "sensitivity_sweep",
    "tag_stats",
    "write_hits_csv",
    "write_rules_csv",
    "write_sweep_csv",
    "write_tag_stats_csv",
    "write_transactions",
]

logger = logging.getLogger(__name__)

POSITIVE_TAG = "drug_positive"
PRUNED_TAGS = frozenset({"drug_negative", "possibly_sensitive"})


@dataclass(frozen=True)
class TagStats:
    """Tags-per-transaction summary plus per-tag frequencies."""

    n_transactions: int
    n_dropped: int
    minimum: float
    q1: float
    median: float
    mean: float
    q3: float
    maximum: float
    frequencies: tuple  # ((tag, count), ...) by count desc, then tag

    def rows(self):
        return [
            ("transactions", self.n_transactions), ("dropped_empty", self.n_dropped),
            ("min", self.minimum), ("q1", self.q1), ("median", self.median),
            ("mean", self.mean), ("q3", self.q3), ("max", self.maximum),
        ]


def _record_tags(record, lexicon):
    hits = record.hits
    if hits is None:
        if record.text is None:
            raise ValueError(f"record {record.id_str} has neither text nor keyword hits")
        hits, _ = match_keywords(record.text, lexicon)
    tags = {cat.lower() for cat, c in hits.counts.items() if c > 0}
    if record.classification == Classification.POSITIVE:
        tags.add(POSITIVE_TAG)
    return frozenset(tags - PRUNED_TAGS)


def build_transactions(records, lexicon=None):
    """One tag set per record: drug categories, use attributes, ``drug_positive``.

    Category names are lowercased. Negative classification and the
    platform's sensitivity flag contribute no tag. Records with no tags are
    dropped and counted. Returns ``(transactions, TagStats)``.
    """
    lexicon = default_lexicon() if lexicon is None else lexicon
    transactions, dropped = [], 0
    for rec in records:
        tags = _record_tags(rec, lexicon)
        if tags:
            transactions.append(tags)
        else:
            dropped += 1
    return transactions, tag_stats(transactions, dropped)


def tag_stats(transactions, dropped=0):
    sizes = np.array([len(t) for t in transactions], dtype=np.float64)
    freq = Counter(tag for t in transactions for tag in t)
    ranked = tuple(sorted(freq.items(), key=lambda kv: (-kv[1], kv[0])))
    if sizes.size == 0:
        nan = float("nan")
        return TagStats(0, dropped, nan, nan, nan, nan, nan, nan, ranked)
    q1, med, q3 = np.percentile(sizes, [25, 50, 75])
    return TagStats(sizes.size, dropped, float(sizes.min()), float(q1), float(med),
                    float(sizes.mean()), float(q3), float(sizes.max()), ranked)


def apriori(transactions, min_support, max_len=5):
    """Frequent itemsets by level-wise search over tid-sets.

    An itemset is frequent when ``count / N >= min_support``. Returns a dict
    mapping sorted item tuples to counts, ordered by size then items.
    """
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    transactions = [frozenset(t) for t in transactions]
    n = len(transactions)
    if n == 0:
        raise ValueError("no transactions")

    # tid-sets as Python int bitmasks
    tids = {}
    for i, t in enumerate(transactions):
        bit = 1 << i
        for item in t:
            tids[item] = tids.get(item, 0) | bit

    def frequent(count):
        return count / n >= min_support

    level = {}
    for item in sorted(tids):
        c = tids[item].bit_count()
        if frequent(c):
            level[(item,)] = tids[item]
    result = {k: v.bit_count() for k, v in level.items()}
    k = 1
    while level and k < max_len:
        keys = sorted(level)
        nxt = {}
        for a_i, a in enumerate(keys):
            for b in keys[a_i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if any(cand[:j] + cand[j + 1:] not in level for j in range(k - 1)):
                    continue
                mask = level[a] & level[b]
                c = mask.bit_count()
                if frequent(c):
                    nxt[cand] = mask
        result.update((key, m.bit_count()) for key, m in sorted(nxt.items()))
        level = nxt
        k += 1
    return result


@dataclass(frozen=True)
class Rule:
    antecedent: tuple
    consequent: tuple
    support: float
    confidence: float
    lift: float
    count: int


def gen_rules(itemsets, n_transactions, min_confidence):
    """All rules ``A -> C`` from the frequent itemsets with confidence >= threshold.

    Sorted by confidence descending, then support descending, then
    antecedent and consequent.
    """
    if n_transactions <= 0:
        raise ValueError("n_transactions must be positive")
    n = n_transactions
    rules = []
    for items, count in itemsets.items():
        if len(items) < 2:
            continue
        for r in range(1, len(items)):
            for ante in itertools.combinations(items, r):
                cons = tuple(x for x in items if x not in ante)
                conf = count / itemsets[ante]
                if conf >= min_confidence:
                    lift = conf / (itemsets[cons] / n)
                    rules.append(Rule(ante, cons, count / n, conf, lift, count))
    rules.sort(key=lambda r: (-r.confidence, -r.support, r.antecedent, r.consequent))
    return rules


def mine_rules(transactions, min_support=0.0003, min_confidence=0.3, max_len=5):
    items = apriori(transactions, min_support, max_len)
    return gen_rules(items, len(transactions), min_confidence)


@dataclass(frozen=True)
class SweepResult:
    supports: tuple
    confidences: tuple
    counts: np.ndarray  # (len(supports), len(confidences))


def sensitivity_sweep(transactions, support_grid, confidence_grid, max_len=5):
    """Rule counts for every (min_support, min_confidence) pair.

    Grids are sorted ascending; itemsets are mined once at the lowest support.
    """
    supports = tuple(sorted(float(s) for s in support_grid))
    confs = tuple(sorted(float(c) for c in confidence_grid))
    if not supports or not confs:
        raise ValueError("support and confidence grids must be non-empty")
    n = len(transactions)
    itemsets = apriori(transactions, supports[0], max_len)
    rules = gen_rules(itemsets, n, confs[0])
    counts = np.zeros((len(supports), len(confs)), dtype=np.int64)
    for rule in rules:
        s_ok = np.array([rule.count / n >= s for s in supports])
        c_ok = np.array([rule.confidence >= c for c in confs])
        counts += np.outer(s_ok, c_ok)
    return SweepResult(supports, confs, counts)


@dataclass(frozen=True)
class HitsResult:
    nodes: tuple
    hubs: np.ndarray
    authorities: np.ndarray
    n_iter: int

    def _ranked(self, scores):
        return sorted(zip(self.nodes, scores.tolist()), key=lambda kv: (-kv[1], kv[0]))

    def ranked_hubs(self):
        return self._ranked(self.hubs)

    def ranked_authorities(self):
        return self._ranked(self.authorities)


def rule_graph(rules, weighted=False):
    """Tag-level adjacency: an edge from every antecedent tag to every consequent tag."""
    nodes = tuple(sorted({t for r in rules for t in r.antecedent + r.consequent}))
    index = {t: i for i, t in enumerate(nodes)}
    adj = np.zeros((len(nodes), len(nodes)))
    for r in rules:
        for a in r.antecedent:
            for c in r.consequent:
                if weighted:
                    adj[index[a], index[c]] += r.count
                else:
                    adj[index[a], index[c]] = 1.0
    return nodes, adj


def _unit(v):
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def hits(rules, weighted=False, tol=1e-10, max_iter=100_000):
    """Hub and authority scores on the tag graph of ``rules``.

    Alternates ``auth = A^T hub`` and ``hub = A auth`` with L2 normalisation,
    starting from uniform hubs, until no component moves by ``tol`` or more.
    Edges are deduplicated unless ``weighted``, which sums rule counts.
    """
    rules = list(rules)
    if not rules:
        raise ValueError("HITS needs at least one rule")
    nodes, adj = rule_graph(rules, weighted)
    hub = _unit(np.ones(len(nodes)))
    auth = np.zeros(len(nodes))
    for it in range(1, max_iter + 1):
        new_auth = _unit(adj.T @ hub)
        new_hub = _unit(adj @ new_auth)
        delta = max(np.abs(new_auth - auth).max(), np.abs(new_hub - hub).max())
        auth, hub = new_auth, new_hub
        if delta < tol:
            break
    else:
        logger.warning("HITS did not converge in %d iterations", max_iter)
    return HitsResult(nodes, hub, auth, it)


def _num(x):
    return repr(float(x))


def write_rules_csv(path, rules):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("antecedent", "consequent", "support", "confidence", "lift", "count"))
        for r in rules:
            w.writerow((";".join(r.antecedent), ";".join(r.consequent), _num(r.support),
                        _num(r.confidence), _num(r.lift), r.count))


def write_sweep_csv(path, sweep):
    """Rows are min_support values, columns min_confidence values."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["min_support"] + [_num(c) for c in sweep.confidences])
        for s, row in zip(sweep.supports, sweep.counts):
            w.writerow([_num(s)] + [int(v) for v in row])


def write_hits_csv(path, result):
    """``rank,hub_tag,hub,authority_tag,authority`` with both lists ranked."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rank", "hub_tag", "hub", "authority_tag", "authority"))
        for i, ((ht, hs), (at, as_)) in enumerate(
                zip(result.ranked_hubs(), result.ranked_authorities()), start=1):
            w.writerow((i, ht, _num(hs), at, _num(as_)))


def write_tag_stats_csv(path, stats):
    """Summary rows ``statistic,value`` followed by ``tag:<name>,count`` rows."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("statistic", "value"))
        for k, v in stats.rows():
            w.writerow((k, v if isinstance(v, int) else _num(v)))
        for tag, c in stats.frequencies:
            w.writerow((f"tag:{tag}", c))


def write_transactions(path, transactions):
    """One transaction per line, tags sorted and joined by ``;``."""
    with Path(path).open("w", newline="\n") as fh:
        for t in transactions:
            fh.write(";".join(sorted(t)) + "\n")


def read_transactions(path):
    out = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(frozenset(x.strip() for x in line.split(";") if x.strip()))
    return out
