"""Measure what multi-level pruning buys over exhaustive intent matching.

Builds a synthetic representation store where a fraction of functions
share the query's platform and a small core matches its services, then
compares similarity-evaluation counts and ranking latency between the
pruned pipeline and the prune-free variant:

    python scripts/pruning_benchmark.py --functions 500 --platform-share 0.4
"""

import argparse
import random
import statistics

from slsrec.baselines import rank_all_intents
from slsrec.embedding import DeterministicEmbedder, embed_intent
from slsrec.extraction import Provenance, SemanticRepresentation
from slsrec.matching import recommend

OTHER_PLATFORMS = ["azure functions", "google cloud functions", "apache openwhisk"]
OTHER_SERVICES = [f"svc-{c}" for c in "cdefghij"]
WORDS = ["upload", "resize", "detect", "store", "publish", "count", "parse",
         "alert", "index", "route"]


def build_store(n, platform_share, full_matches, partial_matches, rng, embedder):
    reps = {}
    for i in range(n):
        fid = f"fn-{i:04d}"
        if rng.random() < platform_share:
            platforms = {"aws lambda"}
        else:
            platforms = {rng.choice(OTHER_PLATFORMS)}
        if i < full_matches:
            services = {"svc-a", "svc-b"}
        elif i < full_matches + partial_matches:
            services = {"svc-a"}
        else:
            services = {rng.choice(OTHER_SERVICES)}
        text = f"task {i} " + " ".join(rng.sample(WORDS, 3))
        reps[fid] = SemanticRepresentation(
            subject_id=fid,
            intent_text=text,
            intent_vector=embed_intent(text, embedder),
            platforms=frozenset(platforms),
            services=frozenset(services),
            languages=frozenset({"python"}),
            provenance=Provenance("synthetic", "synthetic", 0.0),
        )
    return reps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--functions", type=int, default=500)
    parser.add_argument("--platform-share", type=float, default=0.4)
    parser.add_argument("--full-matches", type=int, default=15)
    parser.add_argument("--partial-matches", type=int, default=5)
    parser.add_argument("--rounds", type=int, default=25)
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    embedder = DeterministicEmbedder()
    reps = build_store(
        args.functions, args.platform_share, args.full_matches,
        args.partial_matches, rng, embedder,
    )
    query_text = "detect labels and upload results"
    query = SemanticRepresentation(
        subject_id="query",
        intent_text=query_text,
        intent_vector=embed_intent(query_text, embedder),
        platforms=frozenset({"aws lambda"}),
        services=frozenset({"svc-a", "svc-b"}),
        languages=frozenset(),
        provenance=Provenance("synthetic", "synthetic", 0.0),
    )

    pruned_ms, variant_ms = [], []
    for _ in range(args.rounds):
        pruned_ms.append(recommend(query, reps, 10, "query").latency_ms)
        variant_ms.append(
            rank_all_intents(query.intent_vector, reps, 10, "query").latency_ms
        )
    outcome = recommend(query, reps, 10, "query")

    print(f"functions:            {args.functions}")
    for audit in outcome.candidates.audit:
        state = (
            f"full={audit.full} pareto={audit.pareto} retained={audit.retained}"
            if audit.applied else "skipped"
        )
        print(f"  level {audit.level:<10} {state}")
    survivors = len(outcome.candidates.ids)
    print(f"survivors:            {survivors} "
          f"({100 * survivors / args.functions:.1f}% of the store)")
    print(f"similarity evals:     pruned={outcome.similarity_evals} "
          f"exhaustive={args.functions}")
    print(f"ranking latency (ms): pruned median={statistics.median(pruned_ms):.3f} "
          f"exhaustive median={statistics.median(variant_ms):.3f}")
    saved = 1 - statistics.median(pruned_ms) / statistics.median(variant_ms)
    print(f"latency saved:        {100 * saved:.1f}%")


if __name__ == "__main__":
    main()
