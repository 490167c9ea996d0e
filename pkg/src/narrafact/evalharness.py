"""Reference metrics and correlation statistics for the evaluation harness.

ROUGE uses lowercase whitespace tokens with no stemming or stopword
removal, so reported numbers are reproducible across implementations.
Significance uses a seeded permutation test (exact enumeration when the
series is small enough) rather than an asymptotic approximation.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .ckg import CharacterKG
from .corpus import Narrative
from .errors import DegenerateSeries, EmptyInput, InvalidParams, SentenceCountMismatch
from .factscore import score_summary
from .prompts import PERTURBATION_PROMPT
from .provider import ChatRequest, Provider
from .summarize import draft_from_text, split_sentences


def _rouge_tokens(text: str) -> list[str]:
    return text.lower().split()


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: str, reference: str, n: int = 1) -> float:
    """N-gram multiset overlap F1, scaled to [0, 100]."""
    if n not in (1, 2):
        raise InvalidParams("n must be 1 or 2")
    if not candidate.strip() or not reference.strip():
        raise EmptyInput("rouge requires non-empty texts")
    cand = _rouge_tokens(candidate)
    ref = _rouge_tokens(reference)
    cand_grams = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
    ref_grams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
    if not cand_grams or not ref_grams:
        return 0.0
    overlap = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    precision = overlap / sum(cand_grams.values())
    recall = overlap / sum(ref_grams.values())
    return _f1(precision, recall) * 100.0


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for token in a:
        row = [0]
        for j, other in enumerate(b):
            row.append(prev[j] + 1 if token == other else max(prev[j + 1], row[j]))
        prev = row
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """Longest-common-subsequence F1 over token sequences, scaled to [0, 100]."""
    if not candidate.strip() or not reference.strip():
        raise EmptyInput("rouge requires non-empty texts")
    cand = _rouge_tokens(candidate)
    ref = _rouge_tokens(reference)
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    return _f1(lcs / len(cand), lcs / len(ref)) * 100.0


@dataclass(frozen=True)
class ScorePairSeries:
    """Paired (metric, human) scores per unit for correlation analysis."""

    items: tuple[tuple[str, float, float], ...]  # (unit id, metric score, human score)

    def __post_init__(self) -> None:
        ids = [unit for unit, _, _ in self.items]
        if len(set(ids)) != len(ids):
            raise InvalidParams("unit ids must be unique")

    def metric_scores(self) -> list[float]:
        return [m for _, m, _ in self.items]

    def human_scores(self) -> list[float]:
        return [h for _, _, h in self.items]


def _check_series(series: ScorePairSeries) -> tuple[list[float], list[float]]:
    xs, ys = series.metric_scores(), series.human_scores()
    if len(xs) < 2:
        raise DegenerateSeries("need at least 2 items")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise DegenerateSeries("all-constant scores have no defined correlation")
    return xs, ys


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def _pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateSeries("zero variance")
    return cov / math.sqrt(var_x * var_y)


def spearman(series: ScorePairSeries) -> float:
    """Pearson correlation of average-ranked values (ties share mean rank)."""
    xs, ys = _check_series(series)
    return _pearson(_average_ranks(xs), _average_ranks(ys))


def kendall_tau(series: ScorePairSeries) -> float:
    """Tie-corrected tau-b by exhaustive pair enumeration."""
    xs, ys = _check_series(series)
    n = len(xs)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    pairs = n * (n - 1) // 2
    denominator = math.sqrt((pairs - ties_x) * (pairs - ties_y))
    if denominator == 0.0:
        raise DegenerateSeries("all pairs tied")
    return (concordant - discordant) / denominator


_STATISTICS = {"spearman": spearman, "kendall": kendall_tau}


def permutation_pvalue(
    series: ScorePairSeries,
    statistic: str = "spearman",
    permutations: int = 10000,
    seed: int = 0,
) -> float:
    """Two-sided permutation p-value from shuffling the human scores.

    When n! fits within the permutation budget every permutation is
    enumerated and the p-value is the exact tail probability; otherwise
    `permutations` seeded shuffles are sampled with the add-one correction
    p = (1 + hits) / (permutations + 1).
    """
    if statistic not in _STATISTICS:
        raise InvalidParams(f"unknown statistic {statistic!r}")
    if permutations < 1:
        raise InvalidParams("permutations must be >= 1")
    stat = _STATISTICS[statistic]
    observed = abs(stat(series))
    ids = [unit for unit, _, _ in series.items]
    xs = series.metric_scores()
    ys = series.human_scores()

    def stat_for(permuted: tuple[float, ...] | list[float]) -> float:
        shuffled = ScorePairSeries(
            items=tuple((ids[i], xs[i], permuted[i]) for i in range(len(ids)))
        )
        try:
            return abs(stat(shuffled))
        except DegenerateSeries:
            return 0.0

    n = len(ys)
    if math.factorial(n) <= permutations:
        hits = sum(1 for perm in itertools.permutations(ys) if stat_for(perm) >= observed)
        return hits / math.factorial(n)
    rng = random.Random(seed)
    hits = 0
    for _ in range(permutations):
        permuted = ys[:]
        rng.shuffle(permuted)
        if stat_for(permuted) >= observed:
            hits += 1
    return (1 + hits) / (permutations + 1)


# Strength bands for absolute coefficients: (upper bound, label); the last
# band is inclusive of 1.0.
_SPEARMAN_BANDS = [(0.15, "very weak"), (0.30, "weak"), (0.43, "moderate"), (1.01, "strong")]
_KENDALL_BANDS = [(0.10, "very weak"), (0.20, "weak"), (0.30, "moderate"), (1.01, "strong")]


def strength_label(coefficient: float, statistic: str) -> str:
    bands = _SPEARMAN_BANDS if statistic == "spearman" else _KENDALL_BANDS
    value = abs(coefficient)
    for upper, label in bands:
        if value < upper:
            return label
    return "strong"


@dataclass(frozen=True)
class CorrelationRow:
    metric: str
    n: int
    spearman: float
    spearman_p: float
    spearman_strength: str
    kendall: float
    kendall_p: float
    kendall_strength: str


@dataclass
class CorrelationReport:
    rows: list[CorrelationRow]
    permutations: int
    seed: int
    significance_threshold: float = 0.05
    method: str = "two-sided permutation test (exact when n! <= permutations)"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "permutations": self.permutations,
            "seed": self.seed,
            "significance_threshold": self.significance_threshold,
            "rows": [
                {
                    "metric": r.metric,
                    "n": r.n,
                    "spearman": r.spearman,
                    "spearman_p": r.spearman_p,
                    "spearman_strength": r.spearman_strength,
                    "kendall": r.kendall,
                    "kendall_p": r.kendall_p,
                    "kendall_strength": r.kendall_strength,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def render_text(self) -> str:
        header = f"{'metric':<24}{'n':>4}{'spearman':>10}{'p':>9}{'kendall':>9}{'p':>9}  strength"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.metric:<24}{r.n:>4}{r.spearman:>10.4f}{r.spearman_p:>9.4f}"
                f"{r.kendall:>9.4f}{r.kendall_p:>9.4f}  {r.spearman_strength}/{r.kendall_strength}"
            )
        return "\n".join(lines)


def correlation_report(
    series_by_metric: dict[str, ScorePairSeries],
    permutations: int = 10000,
    seed: int = 0,
) -> CorrelationReport:
    """Spearman, tau-b, and permutation p-values per metric."""
    if not series_by_metric:
        raise InvalidParams("no metric series given")
    rows = []
    for metric in sorted(series_by_metric):
        series = series_by_metric[metric]
        rho = spearman(series)
        tau = kendall_tau(series)
        rows.append(
            CorrelationRow(
                metric=metric,
                n=len(series.items),
                spearman=rho,
                spearman_p=permutation_pvalue(series, "spearman", permutations, seed),
                spearman_strength=strength_label(rho, "spearman"),
                kendall=tau,
                kendall_p=permutation_pvalue(series, "kendall", permutations, seed),
                kendall_strength=strength_label(tau, "kendall"),
            )
        )
    return CorrelationReport(rows=rows, permutations=permutations, seed=seed)


def load_human_scores(path: str | Path) -> dict[str, float]:
    """CSV `unit_id,human_score` (header optional)."""
    scores: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip().lower() == "unit_id":
                continue
            scores[row[0].strip()] = float(row[1])
    return scores


def load_metric_scores(path: str | Path) -> dict[str, dict[str, float]]:
    """CSV `unit_id,metric,score` (header optional) -> metric -> unit -> score."""
    scores: dict[str, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip().lower() == "unit_id":
                continue
            unit, metric, value = row[0].strip(), row[1].strip(), float(row[2])
            scores.setdefault(metric, {})[unit] = value
    return scores


def build_series(
    metric_scores: dict[str, dict[str, float]],
    human_scores: dict[str, float],
) -> dict[str, ScorePairSeries]:
    """Join metric and human scores on unit id, sorted by unit id."""
    series: dict[str, ScorePairSeries] = {}
    for metric, per_unit in metric_scores.items():
        shared = sorted(set(per_unit) & set(human_scores))
        series[metric] = ScorePairSeries(
            items=tuple((unit, per_unit[unit], human_scores[unit]) for unit in shared)
        )
    return series


@dataclass
class PerturbationCase:
    """A reference summary, its per-sentence factual perturbation, and the
    before/after scores of each metric."""

    reference: str
    perturbed: str
    scores: dict[str, tuple[float, float]] = field(default_factory=dict)

    def relative_drop(self, metric: str) -> float:
        before, after = self.scores[metric]
        if before == 0.0:
            return 0.0
        return (before - after) / before

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "perturbed": self.perturbed,
            "scores": {m: {"before": b, "after": a} for m, (b, a) in self.scores.items()},
        }


def perturb_summary(provider: Provider, reference: str, temperature: float = 0.0) -> PerturbationCase:
    """Rewrite each sentence with one minimal factual edit and rejoin.

    Raises SentenceCountMismatch when the rewritten summary does not keep
    the reference sentence count.
    """
    sentences = split_sentences(reference)
    if not sentences:
        raise EmptyInput("reference summary has no sentences")
    rewritten = []
    for i, sentence in enumerate(sentences):
        prompt = PERTURBATION_PROMPT.format(sentence=sentence)
        response = provider.chat(
            ChatRequest(prompt=prompt, temperature=temperature, tag=f"perturbation sentence {i}")
        )
        rewritten.append(response.strip())
    perturbed = " ".join(rewritten)
    if len(split_sentences(perturbed)) != len(sentences):
        raise SentenceCountMismatch(
            f"perturbed summary has {len(split_sentences(perturbed))} sentences; "
            f"reference has {len(sentences)}"
        )
    return PerturbationCase(reference=reference, perturbed=perturbed)


def run_perturbation_experiment(
    provider: Provider,
    narrative: Narrative,
    graph: CharacterKG | None,
    reference: str,
    backend,
    k: int = 3,
) -> PerturbationCase:
    """Score ROUGE-L and the factuality metric before and after perturbation.

    The expected direction: the factuality score drops far more than the
    lexical metric, because the edits are minimal word replacements.
    """
    case = perturb_summary(provider, reference)
    reference_draft = draft_from_text(case.reference, iteration=0)
    perturbed_draft = draft_from_text(case.perturbed, iteration=0)
    nfs_before = score_summary(provider, reference_draft, narrative, graph, backend, k)
    nfs_after = score_summary(provider, perturbed_draft, narrative, graph, backend, k)
    case.scores["rouge_l"] = (
        rouge_l(case.reference, case.reference),
        rouge_l(case.perturbed, case.reference),
    )
    case.scores["narrative_fact_score"] = (
        float(nfs_before.score) * 100.0,
        float(nfs_after.score) * 100.0,
    )
    return case
