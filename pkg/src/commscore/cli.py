"""Command-line entry point: ``commscore <subcommand> ...``.

Every subcommand writes TSV with a header row (``detect`` writes node-id
lines). Randomized commands are reproducible under ``--seed-rng`` and
independent of ``--threads``.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import goodness as gd
from .evaluation import eval_seed_run, prf
from .graph import (
    CommunitySet,
    Graph,
    GraphFormatError,
    load_communities,
    load_edge_list,
    median_degree,
    preprocess_communities,
    serialize_communities,
    serialize_edge_list,
    set_stats,
)
from .perturbation import PerturbSpec, Strategy, zscore, zscore_increment
from .ranking import (
    average_rank_table,
    correlation_matrix,
    downsample_grid,
    score_curves,
    threshold_clusters,
    top_k_by_average_rank,
    upper_bound_curve,
)
from .scoring import REPRESENTATIVE_SCORES, ScoreId, parse_scores, score_all
from .seed import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DEFAULT_TELEPORT,
    detect_all_communities,
    detect_lc_baseline,
)
from .synth import PlantedPartitionSpec, synth_planted_partition

log = logging.getLogger("commscore")

THREADS_ENV = "COMMSCORE_THREADS"


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def tsv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _parse_list(text: str, parse) -> list:
    try:
        return [parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_scores(text: str) -> list[ScoreId]:
    try:
        return parse_scores(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_grid(text: str) -> list[float]:
    """``lo:hi:n`` -> ``n`` linearly spaced intensities."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected lo:hi:n") from None
    if n < 1 or not 0 < lo <= hi <= 1:
        raise UsageError(f"bad grid {text!r}; need 0 < lo <= hi <= 1 and n >= 1")
    if n == 1:
        return [lo]
    return [float(x) for x in np.linspace(lo, hi, n)]


def _load_graph(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh)


def _load_truth(args, graph: Graph) -> CommunitySet:
    with open(args.communities, "r", encoding="utf-8") as fh:
        raw = load_communities(fh, graph)
    cs = raw if args.no_preprocess else preprocess_communities(raw, graph)
    if args.min_size > 1:
        keep = [(lab, c) for lab, c in zip(cs.labels, cs.communities) if len(c) >= args.min_size]
        cs = CommunitySet(tuple(c for _, c in keep), cs.source, tuple(lab for lab, _ in keep), cs.dropped_ids)
    return cs


def _internal_id(graph: Graph, ext: int) -> int:
    try:
        return graph.label_index[ext]
    except KeyError:
        raise GraphFormatError(f"seed node {ext} not in graph") from None


def _ext(graph: Graph, nodes: Iterable[int]) -> list[int]:
    lab = graph.node_labels
    return sorted(lab[u] for u in nodes)


# -- subcommands -------------------------------------------------------------


def cmd_stats(args) -> None:
    graph = _load_graph(args.graph)
    if args.communities:
        cs = _load_truth(args, graph)
        rows = []
        for lab, c in zip(cs.labels, cs.communities):
            st = set_stats(graph, c)
            rows.append((lab, st.n_S, st.m_S, st.c_S, st.volume))
        text = tsv(["community", "n_S", "m_S", "c_S", "volume"], rows)
    else:
        rows = [
            ("nodes", graph.node_count),
            ("edges", graph.edge_count),
            ("median_degree", median_degree(graph)),
            ("max_degree", max(graph.degrees)),
            ("dropped_self_loops", graph.dropped_self_loops),
            ("dropped_duplicates", graph.dropped_duplicates),
        ]
        text = tsv(["key", "value"], rows)
    with _output(args.out) as fh:
        fh.write(text)


def cmd_score(args) -> None:
    ids = _parse_scores(args.scores)
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    matrix = score_all(graph, cs, ids, threads=args.threads)
    rows = [
        [lab, len(c), *matrix[i]] for i, (lab, c) in enumerate(zip(cs.labels, cs.communities))
    ]
    with _output(args.out) as fh:
        fh.write(tsv(["community", "size", *[s.token for s in ids]], rows))


def _goodness_matrix(graph, cs, metrics, mode, threads) -> np.ndarray:
    def row(c):
        return [gd.goodness(graph, c, m, mode) for m in metrics]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(row, cs.communities))
    return np.array(rows, dtype=float).reshape(len(cs), len(metrics))


def _cohesiveness_mode(text: str):
    return None if text == "auto" else gd.Mode(text)


def cmd_goodness(args) -> None:
    metrics = _parse_list(args.metrics, gd.GoodnessId.parse)
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    g = _goodness_matrix(graph, cs, metrics, _cohesiveness_mode(args.cohesiveness_mode), args.threads)
    rows = [[lab, len(c), *g[i]] for i, (lab, c) in enumerate(zip(cs.labels, cs.communities))]
    with _output(args.out) as fh:
        fh.write(tsv(["community", "size", *[m.token for m in metrics]], rows))


def cmd_rank(args) -> None:
    ids = _parse_scores(args.scores)
    metrics = _parse_list(args.metrics, gd.GoodnessId.parse)
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    if len(cs) == 0:
        raise GraphFormatError("no communities to rank")
    scores = score_all(graph, cs, ids, threads=args.threads)
    if args.top_k:
        keep = top_k_by_average_rank(scores, ids, args.top_k)
        scores = scores[keep]
        cs = CommunitySet(tuple(cs.communities[i] for i in keep), cs.source, tuple(cs.labels[i] for i in keep))
    g = _goodness_matrix(graph, cs, metrics, _cohesiveness_mode(args.cohesiveness_mode), args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_curves = {}
    for j, metric in enumerate(metrics):
        curves = score_curves(scores, ids, g[:, j])
        all_curves[metric] = curves
        upper = upper_bound_curve(g[:, j])
        pick = downsample_grid(len(cs))
        rows = [
            [int(upper.k_values[i]), upper.cum_avg[i], *[curves[s].cum_avg[i] for s in ids]]
            for i in pick
        ]
        (out_dir / f"rank_{metric.token}.tsv").write_text(
            tsv(["k", "U", *[s.token for s in ids]], rows), encoding="utf-8"
        )
    table = average_rank_table(all_curves)
    rows = [[s.token, *table.entries[i]] for i, s in enumerate(table.rows)]
    (out_dir / "avg_rank.tsv").write_text(
        tsv(["score", *[m.token for m in table.columns]], rows), encoding="utf-8"
    )


def cmd_correlate(args) -> None:
    ids = _parse_scores(args.scores)
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    if len(cs) < 2:
        raise GraphFormatError("correlation needs at least two communities")
    corr = correlation_matrix(score_all(graph, cs, ids, threads=args.threads), ids)
    tokens = [s.token for s in ids]
    matrix_text = tsv(["score", *tokens], [[t, *corr[i]] for i, t in enumerate(tokens)])
    groups = threshold_clusters(corr, args.tau, tokens)
    groups_text = tsv(["group", "scores"], [[i, ",".join(gr)] for i, gr in enumerate(groups)])
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "correlation.tsv").write_text(matrix_text, encoding="utf-8")
        (out_dir / "groups.tsv").write_text(groups_text, encoding="utf-8")
    else:
        with _output(args.out) as fh:
            fh.write(matrix_text + "\n" + groups_text)


def cmd_perturb(args) -> None:
    ids = _parse_scores(args.score)
    strategies = _parse_list(args.strategy, Strategy.parse)
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    if len(cs) < 2:
        raise GraphFormatError("Z-scores need at least two communities")
    if args.increment:
        rows = []
        for sid in ids:
            for strat in strategies:
                inc = zscore_increment(graph, cs, sid, strat, args.seed_rng, args.trials, args.threads)
                rows.append([sid.token, strat.value, inc.value, inc.low.z, inc.high.z, inc.degenerate])
        text = tsv(["score", "strategy", "increment", "z_low", "z_high", "degenerate"], rows)
    else:
        grid = parse_grid(args.grid)
        rows = []
        for sid in ids:
            for strat in strategies:
                for p in grid:
                    spec = PerturbSpec(strat, p, args.trials, args.seed_rng)
                    r = zscore(graph, cs, sid, spec, args.threads)
                    rows.append(
                        [sid.token, strat.value, p, r.z, r.degenerate, r.mean_true,
                         r.mean_perturbed, r.variance_perturbed, r.communities_used, r.skipped_steps]
                    )
        text = tsv(
            ["score", "strategy", "p", "z", "degenerate", "mean_true", "mean_perturbed",
             "variance_perturbed", "communities", "skipped_steps"],
            rows,
        )
    with _output(args.out) as fh:
        fh.write(text)


def _detect(graph, seed, args) -> list[frozenset]:
    if args.lc:
        return [detect_lc_baseline(graph, seed, args.alpha_pr, args.eps)]
    found = detect_all_communities(graph, seed, args.score_id, args.alpha_pr, args.eps, args.alpha)
    return list(found.communities) if args.all else [found.communities[0]]


def cmd_detect(args) -> None:
    args.score_id = _parse_scores(args.score)[0]
    graph = _load_graph(args.graph)
    seed = _internal_id(graph, args.seed)
    if args.curve:
        found = detect_all_communities(graph, seed, args.score_id, args.alpha_pr, args.eps, args.alpha)
        c = found.curve
        rows = [[k + 1, graph.node_labels[u], c.raw[k]] for k, u in enumerate(c.order)]
        Path(args.curve).write_text(tsv(["k", "node", args.score_id.token], rows), encoding="utf-8")
    comms = _detect(graph, seed, args)
    with _output(args.out) as fh:
        for c in comms:
            fh.write(" ".join(str(x) for x in _ext(graph, c)) + "\n")


def cmd_eval_seed(args) -> None:
    args.score_id = _parse_scores(args.score)[0]
    graph = _load_graph(args.graph)
    cs = _load_truth(args, graph)
    if len(cs) == 0:
        raise GraphFormatError("no ground-truth communities")
    rng = np.random.default_rng(args.seed_rng)
    if args.all:
        membership: dict[int, list[int]] = {}
        for i, c in enumerate(cs.communities):
            for u in c:
                membership.setdefault(u, []).append(i)
        nodes = sorted(membership)
        picks = rng.choice(len(nodes), size=min(args.samples, len(nodes)), replace=False)
        jobs = [(nodes[int(i)], membership[nodes[int(i)]]) for i in picks]
    else:
        picks = rng.choice(len(cs), size=min(args.samples, len(cs)), replace=False)
        jobs = []
        for i in picks:
            members = sorted(cs.communities[int(i)])
            jobs.append((members[int(rng.integers(len(members)))], [int(i)]))

    def run(job):
        seed, truth_idx = job
        detected = _detect(graph, seed, args)
        truth = [cs.communities[i] for i in truth_idx]
        match = eval_seed_run(detected, truth)
        pr = [prf(detected[d], truth[t]) for t, d in match.pairs]
        p = sum(x.precision for x in pr) / len(pr) if pr else 0.0
        r = sum(x.recall for x in pr) / len(pr) if pr else 0.0
        return [graph.node_labels[seed], len(truth), len(detected), p, r, match.total_f1, match.f1_over_truth]

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(run, jobs))
    if rows:
        means = [math.fsum(row[j] for row in rows) / len(rows) for j in range(3, 7)]
        rows.append(["mean", "", "", *means])
    header = ["seed", "n_truth", "n_detected", "precision", "recall", "f1", "f1_over_truth"]
    with _output(args.out) as fh:
        fh.write(tsv(header, rows))


def _size_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad size range {text!r}; expected lo:hi") from None
    if not 1 <= lo <= hi:
        raise UsageError("size range needs 1 <= lo <= hi")
    return lo, hi


def cmd_synth(args) -> None:
    try:
        if args.size_range:
            lo, hi = _size_range(args.size_range)
            spec = PlantedPartitionSpec.with_size_range(args.communities, lo, hi, args.p_in, args.p_out, args.seed_rng)
        else:
            spec = PlantedPartitionSpec(args.communities, args.size, args.p_in, args.p_out, args.seed_rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    graph, truth = synth_planted_partition(spec)
    Path(args.out_graph).write_text(serialize_edge_list(graph), encoding="utf-8")
    Path(args.out_communities).write_text(serialize_communities(graph, truth), encoding="utf-8")
    with _output(args.out) as fh:
        fh.write(tsv(["nodes", "edges", "communities"], [[graph.node_count, graph.edge_count, len(truth)]]))


# -- parser ------------------------------------------------------------------


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (env {THREADS_ENV})")
    common.add_argument("--seed-rng", type=int, default=0, help="base seed for every random draw")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    truth = argparse.ArgumentParser(add_help=False)
    truth.add_argument("--graph", required=True, help="edge-list file")
    truth.add_argument("--communities", required=True, help="community file, one group per line")
    truth.add_argument("--no-preprocess", action="store_true", help="keep raw groups unsplit")
    truth.add_argument("--min-size", type=int, default=1, help="drop communities smaller than this")

    detect = argparse.ArgumentParser(add_help=False)
    detect.add_argument("--score", default="conductance")
    detect.add_argument("--all", action="store_true", help="every confirmed minimum, not only the first")
    detect.add_argument("--lc", action="store_true", help="global-minimum conductance baseline")
    detect.add_argument("--alpha-pr", type=float, default=DEFAULT_TELEPORT, help="PageRank teleport probability")
    detect.add_argument("--eps", type=float, default=DEFAULT_EPSILON, help="push residual tolerance")
    detect.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="local-minimum rise factor")

    parser = argparse.ArgumentParser(prog="commscore", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="graph or per-community statistics")
    p.add_argument("--graph", required=True)
    p.add_argument("--communities")
    p.add_argument("--no-preprocess", action="store_true")
    p.add_argument("--min-size", type=int, default=1)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("score", parents=[common, truth], help="score matrix of communities")
    p.add_argument("--scores", default="all")
    p.set_defaults(func=cmd_score)

    coh = dict(choices=["auto", "exact", "approx"], default="auto")
    p = sub.add_parser("goodness", parents=[common, truth], help="goodness metrics of communities")
    p.add_argument("--metrics", default="separability,density,cohesiveness,ccf")
    p.add_argument("--cohesiveness-mode", **coh)
    p.set_defaults(func=cmd_goodness)

    p = sub.add_parser("rank", parents=[common, truth], help="cumulative goodness curves and average ranks")
    p.add_argument("--scores", default=",".join(s.token for s in REPRESENTATIVE_SCORES))
    p.add_argument("--metrics", default="separability,density,cohesiveness,ccf")
    p.add_argument("--top-k", type=int, default=0, help="restrict to the k best communities by mean rank")
    p.add_argument("--cohesiveness-mode", **coh)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("correlate", parents=[common, truth], help="score correlation matrix and groups")
    p.add_argument("--scores", default="all")
    p.add_argument("--tau", type=float, default=0.6)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("perturb", parents=[common, truth], help="Z-scores under community perturbation")
    p.add_argument("--score", default="conductance", help="comma-separated scores")
    p.add_argument("--strategy", default="nodeswap", help="comma-separated strategies")
    p.add_argument("--grid", default="0.01:0.6:12", help="intensities as lo:hi:n")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--increment", action="store_true", help="report Z(0.2) - Z(0.05) instead of a grid")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("detect", parents=[common, detect], help="communities of one seed node")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, required=True, help="seed node (file id)")
    p.add_argument("--curve", help="write the sweep curve TSV here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval-seed", parents=[common, truth, detect], help="evaluate seed detection")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_eval_seed)

    p = sub.add_parser("synth", parents=[common], help="planted-partition graph and its blocks")
    p.add_argument("--communities", type=int, required=True)
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--size-range", help="lo:hi, block sizes drawn uniformly")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-communities", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.threads is None:
        args.threads = _default_threads()
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"commscore: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, GraphFormatError, ValueError) as exc:
        print(f"commscore: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
