"""Metric and correlation statistics tests against independent oracles."""

from __future__ import annotations

import itertools
import math
import random

import pytest

from narrafact.errors import (
    DegenerateSeries,
    EmptyInput,
    InvalidParams,
    SentenceCountMismatch,
)
from narrafact.evalharness import (
    PerturbationCase,
    ScorePairSeries,
    build_series,
    correlation_report,
    kendall_tau,
    load_human_scores,
    load_metric_scores,
    permutation_pvalue,
    perturb_summary,
    rouge_l,
    rouge_n,
    spearman,
    strength_label,
)
from narrafact.provider import ScriptedProvider


# --- ROUGE -----------------------------------------------------------------

def test_rouge_n_identical_texts():
    assert rouge_n("the cat sat", "the cat sat", 1) == pytest.approx(100.0)
    assert rouge_n("the cat sat", "the cat sat", 2) == pytest.approx(100.0)


def test_rouge_n_disjoint_texts():
    assert rouge_n("alpha beta", "gamma delta", 1) == 0.0


def test_rouge_1_hand_case():
    # candidate "a b c" vs reference "a b d": overlap 2, P = R = 2/3
    assert rouge_n("a b c", "a b d", 1) == pytest.approx(200.0 / 3.0, abs=1e-6)


def test_rouge_l_identical():
    assert rouge_l("x y z", "x y z") == pytest.approx(100.0)


def test_rouge_l_hand_case_transposition():
    # LCS("a b c d", "a c b d") = 3 -> F1 = 75
    assert rouge_l("a b c d", "a c b d") == pytest.approx(75.0, abs=1e-6)


def test_rouge_l_hand_case_reversal():
    # LCS("a b c", "c b a") = 1 -> P = R = 1/3
    assert rouge_l("a b c", "c b a") == pytest.approx(100.0 / 3.0, abs=1e-6)


def test_rouge_f1_symmetric_under_swap():
    rng = random.Random(2)
    vocab = list("abcdefg")
    for _ in range(50):
        cand = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12)))
        ref = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12)))
        assert rouge_n(cand, ref, 1) == pytest.approx(rouge_n(ref, cand, 1), abs=1e-12)
        assert rouge_l(cand, ref) == pytest.approx(rouge_l(ref, cand), abs=1e-12)


def test_rouge_empty_rejected():
    with pytest.raises(EmptyInput):
        rouge_n("", "x", 1)
    with pytest.raises(EmptyInput):
        rouge_l("x", " ")


# --- correlations ----------------------------------------------------------

def series(xs: list[float], ys: list[float]) -> ScorePairSeries:
    return ScorePairSeries(items=tuple((f"u{i}", x, y) for i, (x, y) in enumerate(zip(xs, ys))))


def test_spearman_perfect_and_reversed():
    assert spearman(series([1, 2, 3, 4], [10, 20, 30, 40])) == pytest.approx(1.0)
    assert spearman(series([1, 2, 3, 4], [40, 30, 20, 10])) == pytest.approx(-1.0)


def test_kendall_perfect_and_reversed():
    assert kendall_tau(series([1, 2, 3], [1, 2, 3])) == pytest.approx(1.0)
    assert kendall_tau(series([1, 2, 3], [3, 2, 1])) == pytest.approx(-1.0)


def test_degenerate_series_rejected():
    with pytest.raises(DegenerateSeries):
        spearman(series([1], [1]))
    with pytest.raises(DegenerateSeries):
        spearman(series([1, 1, 1], [1, 2, 3]))
    with pytest.raises(DegenerateSeries):
        kendall_tau(series([1, 2, 3], [5, 5, 5]))


def test_spearman_tie_free_matches_d_squared_formula():
    rng = random.Random(31)
    for _ in range(100):
        n = rng.randint(3, 12)
        xs = rng.sample(range(1000), n)
        ys = rng.sample(range(1000), n)
        rho = spearman(series([float(x) for x in xs], [float(y) for y in ys]))
        rank = lambda vals: {v: i + 1 for i, v in enumerate(sorted(vals))}
        rx, ry = rank(xs), rank(ys)
        d2 = sum((rx[x] - ry[y]) ** 2 for x, y in zip(xs, ys))
        assert rho == pytest.approx(1 - 6 * d2 / (n * (n * n - 1)), abs=1e-9)


def oracle_kendall_tau_b(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    concordant = discordant = 0
    tied_x = tied_y = 0
    for i, j in itertools.combinations(range(n), 2):
        dx, dy = xs[i] - xs[j], ys[i] - ys[j]
        if dx == 0:
            tied_x += 1
        if dy == 0:
            tied_y += 1
        if dx == 0 or dy == 0:
            continue
        if dx * dy > 0:
            concordant += 1
        else:
            discordant += 1
    n0 = n * (n - 1) / 2
    return (concordant - discordant) / math.sqrt((n0 - tied_x) * (n0 - tied_y))


def test_kendall_matches_pair_counting_oracle_with_ties():
    rng = random.Random(77)
    checked = 0
    while checked < 500:
        n = rng.randint(2, 10)
        xs = [float(rng.randint(0, 5)) for _ in range(n)]
        ys = [float(rng.randint(0, 5)) for _ in range(n)]
        if len(set(xs)) == 1 or len(set(ys)) == 1:
            continue
        try:
            got = kendall_tau(series(xs, ys))
        except DegenerateSeries:
            continue
        assert got == pytest.approx(oracle_kendall_tau_b(xs, ys), abs=1e-12)
        checked += 1


def test_spearman_matches_rank_pearson_oracle_with_ties():
    rng = random.Random(78)
    for _ in range(200):
        n = rng.randint(3, 10)
        xs = [float(rng.randint(0, 4)) for _ in range(n)]
        ys = [float(rng.randint(0, 4)) for _ in range(n)]
        if len(set(xs)) == 1 or len(set(ys)) == 1:
            continue

        def avg_ranks(vals):
            pairs = sorted(range(n), key=lambda i: vals[i])
            ranks = [0.0] * n
            i = 0
            while i < n:
                j = i
                while j + 1 < n and vals[pairs[j + 1]] == vals[pairs[i]]:
                    j += 1
                for k in range(i, j + 1):
                    ranks[pairs[k]] = (i + j) / 2 + 1
                i = j + 1
            return ranks

        rx, ry = avg_ranks(xs), avg_ranks(ys)
        mean = lambda v: sum(v) / n
        mx, my = mean(rx), mean(ry)
        cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
        denom = math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))
        if denom == 0:
            continue
        assert spearman(series(xs, ys)) == pytest.approx(cov / denom, abs=1e-9)


# --- permutation test --------------------------------------------------------

def test_permutation_pvalue_deterministic_per_seed():
    s = series([1, 2, 3, 4, 5, 6, 7], [2, 1, 4, 3, 6, 5, 7])
    p1 = permutation_pvalue(s, "spearman", permutations=500, seed=9)
    p2 = permutation_pvalue(s, "spearman", permutations=500, seed=9)
    assert p1 == p2
    assert 0 < p1 <= 1


def test_permutation_pvalue_exhaustive_n3_matches_enumeration():
    s = series([1.0, 2.0, 3.0], [10.0, 20.0, 30.0])
    got = permutation_pvalue(s, "spearman", permutations=10000, seed=0)
    xs = [1.0, 2.0, 3.0]
    observed = abs(spearman(s))
    hits = 0
    for perm in itertools.permutations([10.0, 20.0, 30.0]):
        hits += abs(spearman(series(xs, list(perm)))) >= observed
    assert got == pytest.approx(hits / 6, abs=0)
    assert got == pytest.approx(2 / 6, abs=0)  # only identity and full reversal reach |rho| = 1


def test_permutation_pvalue_small_for_perfect_series():
    xs = [float(i) for i in range(8)]
    s = series(xs, xs)
    p = permutation_pvalue(s, "kendall", permutations=10000, seed=3)
    assert p <= 0.01


# --- report assembly ---------------------------------------------------------

def test_strength_bands():
    assert strength_label(0.47, "spearman") == "strong"
    assert strength_label(0.43, "spearman") == "strong"
    assert strength_label(0.35, "spearman") == "moderate"
    assert strength_label(0.31, "kendall") == "strong"
    assert strength_label(-0.33, "kendall") == "strong"
    assert strength_label(0.05, "kendall") == "very weak"


def test_correlation_report_perfect_series():
    s = series([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    report = correlation_report({"metric_a": s}, permutations=200, seed=1)
    row = report.rows[0]
    assert row.spearman == pytest.approx(1.0)
    assert row.kendall == pytest.approx(1.0)
    assert row.spearman_p <= 0.05
    assert row.spearman_strength == "strong"
    assert "metric_a" in report.render_text()


def test_correlation_report_empty_map_rejected():
    with pytest.raises(InvalidParams):
        correlation_report({})


def test_csv_loaders_and_series_join(tmp_path):
    human = tmp_path / "human.csv"
    human.write_text("unit_id,human_score\nu1,3\nu2,5\nu3,1\n")
    metrics = tmp_path / "metrics.csv"
    metrics.write_text("unit_id,metric,score\nu1,nfs,0.7\nu2,nfs,0.9\nu3,nfs,0.2\nu1,rouge,44\n")
    joined = build_series(load_metric_scores(metrics), load_human_scores(human))
    assert set(joined) == {"nfs", "rouge"}
    assert len(joined["nfs"].items) == 3
    assert len(joined["rouge"].items) == 1


# --- perturbation ------------------------------------------------------------

def test_perturb_summary_joins_scripted_rewrites():
    provider = ScriptedProvider(["The keeper abandoned the lamp.", "The ship sank in the storm."])
    case = perturb_summary(provider, "The keeper lit the lamp. The ship survived the storm.")
    assert case.perturbed == "The keeper abandoned the lamp. The ship sank in the storm."
    assert len(provider.calls) == 2


def test_perturb_summary_one_call_per_sentence():
    provider = ScriptedProvider([f"Rewritten {i}." for i in range(5)])
    reference = " ".join(f"Sentence number {i}." for i in range(5))
    perturb_summary(provider, reference)
    assert len(provider.calls) == 5


def test_perturb_summary_sentence_count_mismatch():
    provider = ScriptedProvider(["Two sentences. Came back!"])
    with pytest.raises(SentenceCountMismatch):
        perturb_summary(provider, "One sentence only.")


def test_perturbation_case_relative_drop():
    case = PerturbationCase(reference="r", perturbed="p",
                            scores={"rouge_l": (100.0, 81.61), "nfs": (95.42, 40.81)})
    assert case.relative_drop("nfs") > case.relative_drop("rouge_l")
