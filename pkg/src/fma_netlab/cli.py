"""Command-line front end.

Every command writes its artifacts into ``--out-dir`` together with a
``<command>.run.json`` record holding the effective configuration, the input
checksums and the checksum of each artifact. Settings are resolved as
command-line flags, then the ``--config`` JSON file, then built-in defaults.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric or
convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._io import atomic_open, sha256_file, write_json
from .activity import (ActivityRecord, issue_ranking, join_top_users, merge_ratio, merged_pr_ranking,
                       pearson_matrix)
from .centrality import HitsConfig, PageRankConfig, hits, in_degree_centrality, pagerank, rank_order
from .errors import ConfigError, DataError, InsufficientDataError, NetlabError, NumericError
from .graph import build_graph, filter_stages
from .ingest import (DatasetManifest, load_activity_json, load_follows_csv, load_users_csv,
                     parse_timestamp, write_follows_csv, write_users_csv)
from .macro import (DAY, FmaThresholds, classify_growth, cohort_curves, degree_histogram, fit_power_law,
                    fma_diagnose, growth_curve, period_cohorts, quantile_cohorts)
from .simulate import ArrivalProcess, SimConfig, simulate

log = logging.getLogger("fma_netlab")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class Opt:
    name: str
    type: type
    default: object
    help: str
    choices: tuple | None = None


OPTIONS = {
    "input": [
        Opt("data_dir", str, None, "directory holding users.csv, follows.csv and optionally activity.json"),
        Opt("users", str, None, "users.csv path (overrides --data-dir)"),
        Opt("follows", str, None, "follows.csv path (overrides --data-dir)"),
        Opt("activity", str, None, "activity.json path (overrides --data-dir)"),
    ],
    "filter": [
        Opt("min_followers", int, 5, "drop users with at most this many followers"),
        Opt("drop_orgs", bool, True, "drop organization accounts"),
        Opt("drop_fake", bool, True, "drop fake and deleted accounts"),
    ],
    "pagerank": [
        Opt("damping", float, 0.85, "PageRank damping factor"),
        Opt("tolerance", float, 1e-9, "PageRank L1 convergence tolerance"),
        Opt("max_iterations", int, 200, "PageRank iteration cap"),
    ],
    "hits": [
        Opt("hits_norm", str, "l1", "HITS normalization", ("l1", "l2")),
        Opt("hits_tolerance", float, 1e-12, "HITS max per-node change tolerance"),
        Opt("hits_max_iterations", int, 200, "HITS iteration cap"),
    ],
    "ranking": [
        Opt("metric", str, "all", "metric to rank by",
            ("all", "in_degree", "pagerank", "hits_authority", "hits_hub")),
        Opt("top_k", int, 10, "length of each ranking"),
    ],
    "activity": [
        Opt("corr_top_k", int, 100, "correlate metrics over the users with the top PageRank"),
    ],
    "distribution": [
        Opt("binning", str, "both", "histogram binning", ("exact", "logarithmic", "both")),
        Opt("min_tail", int, 50, "minimum tail size for the power-law fit"),
    ],
    "cohorts": [
        Opt("cohorts", str, "year",
            "cohort definition: 'year', 'periods:N' (equal join windows) or 'quantiles:N' (equal-size groups)"),
        Opt("lifetime_step_days", float, 30.0, "lifetime grid spacing in days"),
        Opt("lifetime_step", int, None, "lifetime grid spacing in seconds (overrides days)"),
        Opt("min_cohort_size", int, 10, "minimum users behind every curve point"),
        Opt("join_cutoff", str, None, "ignore users who joined after this time (ISO-8601 or epoch seconds)"),
        Opt("zero_policy", str, "lifetime", "how users without followers are excluded",
            ("lifetime", "final", "keep")),
    ],
    "growth": [
        Opt("granularity", str, "year", "growth period: 'year', 'periods:N' or seconds"),
        Opt("growth_threshold", float, 0.01, "concavity threshold separating growth regimes"),
    ],
    "diagnose": [
        Opt("min_lifetime_days", float, 365.0, "compare cohorts from this lifetime on (days)"),
        Opt("min_lifetime", int, None, "same, in seconds (overrides days)"),
        Opt("min_lifetime_fraction", float, None, "same, as a fraction of the observed span (overrides both)"),
        Opt("present_min", float, 0.8, "dominance score at or above which FMA is present"),
        Opt("absent_low", float, 0.35, "lower end of the dominance band for FMA absent"),
        Opt("absent_high", float, 0.65, "upper end of the dominance band for FMA absent"),
    ],
    "simulate": [
        Opt("model", str, "barabasi_albert", "growth model", ("barabasi_albert", "fitness", "aging")),
        Opt("n", int, 1000, "final number of nodes"),
        Opt("m", int, 2, "follows created by each arriving node"),
        Opt("arrival", str, "constant_rate", "arrival process", ("constant_rate", "exponential", "polynomial")),
        Opt("steps", int, 100, "number of arrival steps"),
        Opt("rate", float, 0.0, "exponential arrival rate per step (0: grow from the seed)"),
        Opt("exponent", float, 1.0, "polynomial arrival exponent"),
        Opt("fitness_dist", str, "uniform", "fitness distribution", ("uniform", "exponential")),
        Opt("fitness_mean", float, 1.0, "mean of exponential fitness"),
        Opt("aging_decay", str, "power", "aging decay form", ("power", "exponential")),
        Opt("aging_param", float, 1.0, "aging decay exponent or rate"),
        Opt("offset", float, None, "attachment offset added to in-degree (default: m)"),
        Opt("seed", int, 0, "random seed"),
    ],
}

COMMANDS = {
    "ingest": ("validate input files and write a dataset manifest", ["input"]),
    "filter": ("drop flagged and low-follower users", ["input", "filter"]),
    "centrality": ("rank users by followers, PageRank and HITS", ["input", "pagerank", "hits", "ranking"]),
    "activity": ("rank users by contributions and correlate metrics", ["input", "pagerank", "ranking", "activity"]),
    "distribution": ("in-degree histogram and power-law fit", ["input", "distribution"]),
    "cohorts": ("mean in-degree against lifetime per join cohort", ["input", "cohorts"]),
    "growth": ("cumulative user count and growth regime", ["input", "growth"]),
    "diagnose": ("first-mover-advantage verdict", ["input", "cohorts", "growth", "diagnose"]),
    "simulate": ("generate a synthetic dataset", ["simulate"]),
    "report": ("run every analysis and write a self-describing bundle",
               ["input", "pagerank", "hits", "ranking", "activity", "distribution", "cohorts", "growth",
                "diagnose"]),
}


def _options(command):
    return [o for group in COMMANDS[command][1] for o in OPTIONS[group]]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fma-netlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (helptext, _) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--out-dir", default=None, help="artifact directory (default: out)")
        p.add_argument("--config", default=None, help="JSON config file")
        if name == "report":
            p.add_argument("--from-bundle", default=None, help="re-run from an existing report.json")
        for o in _options(name):
            flag = "--" + o.name.replace("_", "-")
            if o.type is bool:
                p.add_argument(flag, dest=o.name, action=argparse.BooleanOptionalAction, default=None, help=o.help)
            else:
                p.add_argument(flag, dest=o.name, type=o.type, default=None, choices=o.choices,
                               help=f"{o.help} (default: {o.default})")
    return parser


def _coerce(o: Opt, value):
    if value is None:
        return None
    if o.type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{o.name} must be true or false")
        return value
    try:
        value = o.type(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {o.name}: {value!r}") from exc
    if o.choices and value not in o.choices:
        raise ConfigError(f"{o.name} must be one of {o.choices}")
    return value


def effective_config(command: str, ns: argparse.Namespace | None = None, file_cfg: dict | None = None) -> dict:
    opts = {o.name: o for o in _options(command)}
    cfg = {name: o.default for name, o in opts.items()}
    if file_cfg:
        layer = {k: v for k, v in file_cfg.items() if not isinstance(v, dict)}
        layer.update(file_cfg.get("defaults", {}))
        layer.update(file_cfg.get(command, {}))
        for k, v in layer.items():
            if k in opts:
                cfg[k] = _coerce(opts[k], v)
            elif not any(k == o.name for c in COMMANDS for o in _options(c)):
                raise ConfigError(f"unknown config key {k!r}")
    if ns is not None:
        for k in opts:
            v = getattr(ns, k, None)
            if v is not None:
                cfg[k] = v
    return cfg


def _threads() -> int:
    raw = os.environ.get("FMA_NETLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"FMA_NETLAB_THREADS must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1


# --- inputs ------------------------------------------------------------------

def _input_paths(cfg) -> tuple[Path, Path, Path | None]:
    d = Path(cfg["data_dir"]) if cfg.get("data_dir") else None
    users = cfg.get("users") or (d / "users.csv" if d else None)
    follows = cfg.get("follows") or (d / "follows.csv" if d else None)
    if users is None or follows is None:
        raise ConfigError("give --data-dir or both --users and --follows")
    activity = cfg.get("activity")
    if activity is None and d is not None and (d / "activity.json").exists():
        activity = d / "activity.json"
    return Path(users), Path(follows), (Path(activity) if activity else None)


class Inputs:
    """Loads the dataset once and remembers checksums of every file read."""

    def __init__(self, cfg):
        self.users_path, self.follows_path, self.activity_path = _input_paths(cfg)
        self.checksums = {}
        self._graph = None
        self._activity = None
        self.load_reports = {}

    def _note(self, path, report):
        self.checksums[str(path)] = sha256_file(path)
        self.load_reports[str(path)] = report
        if report.errors:
            log.warning("%s: %d malformed rows reported (first: line %d, %s)", path, len(report.errors),
                        report.errors[0].line, report.errors[0].reason)

    @property
    def graph(self):
        if self._graph is None:
            users, ur = load_users_csv(self.users_path)
            self._note(self.users_path, ur)
            edges, er = load_follows_csv(self.follows_path)
            self._note(self.follows_path, er)
            self._graph = build_graph(users, edges)
            self.users_table, self.edges_table = users, edges
        return self._graph

    @property
    def activity(self) -> list[ActivityRecord]:
        if self._activity is None:
            if self.activity_path is None:
                raise DataError("no activity data: give --activity or put activity.json in --data-dir")
            recs, rep = load_activity_json(self.activity_path)
            self._note(self.activity_path, rep)
            self._activity = recs
        return self._activity

    @property
    def has_activity(self) -> bool:
        return self.activity_path is not None


# --- artifact helpers ---------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path, header, rows):
    with atomic_open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([_fmt(v) for v in row] for row in rows)


class Artifacts:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.names = []

    def path(self, name) -> Path:
        self.names.append(name)
        return self.out_dir / name

    def checksums(self) -> dict:
        return {n: sha256_file(self.out_dir / n) for n in sorted(set(self.names))}


def _write_run_record(out_dir, command, cfg, inputs: Inputs | None, artifacts: Artifacts, extra=None):
    record = {
        "command": command,
        "tool_version": __version__,
        "config": cfg,
        "inputs": dict(sorted(inputs.checksums.items())) if inputs else {},
        "artifacts": artifacts.checksums(),
    }
    if extra:
        record.update(extra)
    write_json(out_dir / f"{command}.run.json", record)
    return record


# --- commands ------------------------------------------------------------------

def cmd_ingest(cfg, inputs: Inputs, art: Artifacts):
    g = inputs.graph
    counts = {"users": inputs.load_reports[str(inputs.users_path)].rows_loaded,
              "follows": inputs.load_reports[str(inputs.follows_path)].rows_loaded,
              "graph_users": g.n_users, "graph_edges": g.n_edges}
    if inputs.has_activity:
        counts["activity"] = len(inputs.activity)
    manifest = DatasetManifest(
        users_path=str(inputs.users_path),
        follows_path=str(inputs.follows_path),
        activity_path=str(inputs.activity_path) if inputs.activity_path else None,
        counts=counts,
        checksums=dict(sorted(inputs.checksums.items())),
        time_range=g.time_range,
        load_reports={p: r.as_dict() for p, r in sorted(inputs.load_reports.items())},
    )
    d = manifest.as_dict()
    d["build_report"] = g.report.as_dict()
    write_json(art.path("manifest.json"), d)
    return manifest


def cmd_filter(cfg, inputs: Inputs, art: Artifacts):
    g, stages = filter_stages(inputs.graph, cfg["min_followers"], cfg["drop_orgs"], cfg["drop_fake"])
    write_users_csv(art.path("users.csv"), g)
    write_follows_csv(art.path("follows.csv"), g)
    report = {"stages": [{"stage": s.name, "users": s.users, "links": s.links} for s in stages],
              "build_report": inputs.graph.report.as_dict()}
    write_json(art.path("filter_report.json"), report)
    return report


def _pagerank_cfg(cfg):
    return PageRankConfig(cfg["damping"], cfg["tolerance"], cfg["max_iterations"])


def _run_pagerank(g, cfg):
    pr = pagerank(g, _pagerank_cfg(cfg))
    if not pr.converged:
        raise NumericError(f"PageRank did not converge in {pr.iterations} iterations")
    return pr


def _run_hits(g, cfg):
    auth, hub = hits(g, HitsConfig(cfg["hits_tolerance"], cfg["hits_max_iterations"], cfg["hits_norm"]))
    if not auth.converged:
        raise NumericError(f"HITS did not converge in {auth.iterations} iterations")
    return auth, hub


def _ranking_rows(g, scores, k):
    order = rank_order(scores.user_ids, scores.values)[:k]
    return [(r + 1, int(g.user_ids[i]), g.logins[i], scores.values[i]) for r, i in enumerate(order.tolist())]


def cmd_centrality(cfg, inputs: Inputs, art: Artifacts):
    g = inputs.graph
    k = cfg["top_k"]
    if k < 1:
        raise ConfigError("top_k must be >= 1")
    scores = {"in_degree": in_degree_centrality(g)}
    if g.n_users == 0:
        raise DataError("graph has no users")
    with ThreadPoolExecutor(max_workers=min(2, _threads())) as pool:
        fut_pr = pool.submit(_run_pagerank, g, cfg)
        fut_hits = pool.submit(_run_hits, g, cfg) if g.n_edges else None
        scores["pagerank"] = fut_pr.result()
        if fut_hits is not None:
            scores["hits_authority"], scores["hits_hub"] = fut_hits.result()

    metrics = list(scores) if cfg["metric"] == "all" else [cfg["metric"]]
    summary = {}
    for m in metrics:
        if m not in scores:
            raise DataError(f"{m} is undefined on a graph without edges")
        write_csv(art.path(f"ranking_{m}.csv"), ["rank", "user_id", "login", "value"],
                  _ranking_rows(g, scores[m], k))
        summary[m] = {"iterations": scores[m].iterations, "converged": scores[m].converged}

    # five-column table: PageRank, HITS authority, followers, merged PRs, issues
    columns = [_ranking_rows(g, scores["pagerank"], k),
               _ranking_rows(g, scores["hits_authority"], k) if "hits_authority" in scores else [],
               _ranking_rows(g, scores["in_degree"], k)]
    if inputs.has_activity:
        for ranked, field_ in ((merged_pr_ranking(inputs.activity, k), "merged_pr_count"),
                               (issue_ranking(inputs.activity, k), "issue_count")):
            columns.append([(i + 1, r.user, r.login, getattr(r, field_)) for i, r in enumerate(ranked)])
    else:
        columns += [[], []]
    header = ["rank"]
    for name in ("pagerank", "authority", "followers", "merged_prs", "issues"):
        header += [f"{name}_login", name]
    rows = []
    for r in range(k):
        row = [r + 1]
        for col in columns:
            row += [col[r][2], col[r][3]] if r < len(col) else [None, None]
        if any(v is not None for v in row[1:]):
            rows.append(row)
    write_csv(art.path("top_table.csv"), header, rows)
    write_json(art.path("centrality.json"), summary)
    return summary


def cmd_activity(cfg, inputs: Inputs, art: Artifacts):
    g = inputs.graph
    records = inputs.activity
    k = cfg["top_k"]
    write_csv(art.path("ranking_merged_prs.csv"), ["rank", "user_id", "login", "merged_pr_count"],
              [(i + 1, r.user, r.login, r.merged_pr_count) for i, r in enumerate(merged_pr_ranking(records, k))])
    write_csv(art.path("ranking_issues.csv"), ["rank", "user_id", "login", "issue_count"],
              [(i + 1, r.user, r.login, r.issue_count) for i, r in enumerate(issue_ranking(records, k))])
    ratio_rows = []
    for r in sorted(records, key=lambda r: r.user):
        ratio = merge_ratio(r) if r.submitted_pr_count else None
        ratio_rows.append((r.user, r.login, r.merged_pr_count, r.submitted_pr_count, ratio))
    write_csv(art.path("merge_ratio.csv"),
              ["user_id", "login", "merged_pr_count", "submitted_pr_count", "merge_ratio"], ratio_rows)

    pr = _run_pagerank(g, cfg)
    top = [(int(g.user_ids[i]), pr.values[i]) for i in rank_order(pr.user_ids, pr.values)[:cfg["corr_top_k"]]]
    joined = join_top_users(top, records)
    followers = dict(zip(g.user_ids.tolist(), g.in_degree.tolist()))
    metrics = ("followers", "repo_count", "merged_pr_count", "issue_count")
    corr = pearson_matrix(joined, metrics, extra={"followers": followers})
    write_csv(art.path("correlation.csv"), ["metric", *metrics],
              [(a, *corr.rho[i].tolist()) for i, a in enumerate(metrics)])
    result = {"labels": list(metrics), "rho": corr.rho.tolist(), "n_users": len(joined),
              "users": [r.user for r in joined]}
    write_json(art.path("correlation.json"), result)
    return result


def cmd_distribution(cfg, inputs: Inputs, art: Artifacts):
    g = inputs.graph
    binnings = ["exact", "logarithmic"] if cfg["binning"] == "both" else [cfg["binning"]]
    for b in binnings:
        h = degree_histogram(g, b)
        write_csv(art.path(f"degree_histogram_{b}.csv"), ["lower", "upper", "users"], h.bins)
    try:
        fit = fit_power_law(g.in_degree, min_tail=cfg["min_tail"])
        result = {"fit": {"gamma": fit.gamma, "xmin": fit.xmin, "ks_distance": fit.ks_distance,
                          "n_tail": fit.n_tail, "n_samples": fit.n_samples}}
    except DataError as exc:
        result = {"fit": None, "reason": str(exc)}
    result["total_users"] = g.n_users
    write_json(art.path("power_law_fit.json"), result)
    return result


def _parse_time(text):
    if text is None:
        return None
    try:
        return int(text)
    except ValueError:
        try:
            return parse_timestamp(text)
        except ValueError as exc:
            raise ConfigError(f"bad timestamp {text!r}") from exc


def _periods(value: str, prefix: str = "periods:") -> int | None:
    if value.startswith(prefix):
        try:
            n = int(value.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad period value {value!r}") from exc
        if n < 1:
            raise ConfigError("period count must be >= 1")
        return n
    return None


def _curves(cfg, g):
    value = cfg["cohorts"]
    n = _periods(value)
    q = _periods(value, "quantiles:")
    if n is not None:
        cohorts = period_cohorts(g, n)
    elif q is not None:
        cohorts = quantile_cohorts(g, q)
    elif value == "year":
        cohorts = "year"
    else:
        raise ConfigError(f"bad cohort value {value!r}")
    step = cfg["lifetime_step"] if cfg["lifetime_step"] is not None else int(round(cfg["lifetime_step_days"] * DAY))
    return cohort_curves(g, cohorts, lifetime_step=step, min_cohort_size=cfg["min_cohort_size"],
                         join_cutoff=_parse_time(cfg["join_cutoff"]), zero_policy=cfg["zero_policy"])


def _write_curves(path, curves):
    rows = []
    for c in curves.ordered():
        for lt, mean, n in zip(c.lifetimes.tolist(), c.mean_in_degree.tolist(), c.n_users.tolist()):
            rows.append((c.cohort.label, c.cohort.start, c.cohort.end, lt, mean, n))
    write_csv(path, ["cohort", "start", "end", "lifetime", "mean_in_degree", "n_users"], rows)


def cmd_cohorts(cfg, inputs: Inputs, art: Artifacts):
    curves = _curves(cfg, inputs.graph)
    _write_curves(art.path("cohort_curves.csv"), curves)
    return {"cohorts": [str(c.cohort.label) for c in curves.ordered()]}


def _growth(cfg, g):
    value = cfg["granularity"]
    n = _periods(value)
    if n is not None:
        t0, t1 = int(g.created_at.min()), int(g.created_at.max())
        granularity = max(1, (t1 - t0 + 1) // n)
    elif value == "year":
        granularity = "year"
    else:
        try:
            granularity = int(value)
        except ValueError as exc:
            raise ConfigError(f"bad granularity {value!r}") from exc
    return growth_curve(g, granularity)


def _regime_dict(r):
    return {"classification": r.classification, "log_fit_r2": r.log_fit_r2,
            "concavity_stat": r.concavity_stat, "threshold": r.threshold}


def cmd_growth(cfg, inputs: Inputs, art: Artifacts):
    curve = _growth(cfg, inputs.graph)
    write_csv(art.path("growth.csv"), ["time", "users"], curve)
    try:
        result = {"regime": _regime_dict(classify_growth(curve, cfg["growth_threshold"]))}
    except DataError as exc:
        result = {"regime": None, "reason": str(exc)}
    write_json(art.path("growth_regime.json"), result)
    return result


def cmd_diagnose(cfg, inputs: Inputs, art: Artifacts):
    g = inputs.graph
    curves = _curves(cfg, g)
    curve = _growth(cfg, g)
    regime = classify_growth(curve, cfg["growth_threshold"])
    if cfg["min_lifetime_fraction"] is not None:
        t0, t1 = g.time_range
        min_lifetime = int(round(cfg["min_lifetime_fraction"] * (t1 - t0 + 1)))
    elif cfg["min_lifetime"] is not None:
        min_lifetime = cfg["min_lifetime"]
    else:
        min_lifetime = int(round(cfg["min_lifetime_days"] * DAY))
    thresholds = FmaThresholds(cfg["present_min"], (cfg["absent_low"], cfg["absent_high"]))
    v = fma_diagnose(curves, regime, min_lifetime, thresholds)
    _write_curves(art.path("cohort_curves.csv"), curves)
    write_csv(art.path("growth.csv"), ["time", "users"], curve)
    result = {"verdict": v.verdict, "dominance_score": v.dominance_score, "comparisons": v.comparisons,
              "min_lifetime_used": v.min_lifetime_used, "regime": _regime_dict(v.regime),
              "thresholds": {"present_min": thresholds.present_min, "absent_band": list(thresholds.absent_band)},
              "cohorts": [str(c.cohort.label) for c in curves.ordered()]}
    write_json(art.path("verdict.json"), result)
    return result


def sim_config(cfg) -> SimConfig:
    return SimConfig(
        model=cfg["model"], n_final=cfg["n"], m=cfg["m"],
        arrival=ArrivalProcess(cfg["arrival"], cfg["steps"], cfg["rate"], cfg["exponent"]),
        fitness_distribution=cfg["fitness_dist"], fitness_mean=cfg["fitness_mean"],
        aging_decay=cfg["aging_decay"], aging_param=cfg["aging_param"], offset=cfg["offset"],
        seed=cfg["seed"])


def ground_truth(sc: SimConfig) -> str:
    if sc.model != "barabasi_albert":
        return "unknown"
    return "absent" if sc.arrival.kind == "exponential" else "present"


def cmd_simulate(cfg, inputs, art: Artifacts):
    sc = sim_config(cfg)
    g = simulate(sc)
    write_users_csv(art.path("users.csv"), g)
    write_follows_csv(art.path("follows.csv"), g)
    meta = {"config": sc.as_dict(), "n_seed": sc.n_seed, "effective_offset": sc.effective_offset,
            "users": g.n_users, "edges": g.n_edges, "fma_ground_truth": ground_truth(sc)}
    if sc.arrival.kind == "exponential":
        meta["effective_rate"] = sc.arrival.effective_rate(sc.n_final, sc.n_seed)
    write_json(art.path("simulation.json"), meta)
    return meta


RUNNERS = {
    "ingest": cmd_ingest, "filter": cmd_filter, "centrality": cmd_centrality, "activity": cmd_activity,
    "distribution": cmd_distribution, "cohorts": cmd_cohorts, "growth": cmd_growth,
    "diagnose": cmd_diagnose, "simulate": cmd_simulate,
}


def run_command(command, cfg, out_dir: Path, inputs: Inputs | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    if command == "report":
        return run_report(cfg, out_dir)
    if inputs is None and command != "simulate":
        inputs = Inputs(cfg)
    art = Artifacts(out_dir)
    result = RUNNERS[command](cfg, inputs, art)
    _write_run_record(out_dir, command, cfg, inputs, art)
    return result


def run_report(cfg, out_dir: Path):
    inputs = Inputs(cfg)
    steps = ["centrality"] + (["activity"] if inputs.has_activity else []) + [
        "distribution", "cohorts", "growth", "diagnose"]
    outputs = {}
    for command in steps:
        sub = {o.name: cfg[o.name] for o in _options(command)}
        art = Artifacts(out_dir)
        RUNNERS[command](sub, inputs, art)
        outputs.update(art.checksums())
    bundle = {
        "tool_version": __version__,
        "run_config": {"command": "report", "config": cfg},
        "inputs": dict(sorted(inputs.checksums.items())),
        "outputs": dict(sorted(outputs.items())),
    }
    write_json(out_dir / "report.json", bundle)
    return bundle


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = None
        if ns.config:
            try:
                with open(ns.config, encoding="utf-8") as fh:
                    file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if getattr(ns, "from_bundle", None):
            try:
                with open(ns.from_bundle, encoding="utf-8") as fh:
                    file_cfg = {"report": json.load(fh)["run_config"]["config"]}
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise ConfigError(f"cannot read bundle {ns.from_bundle}: {exc}") from exc
        cfg = effective_config(ns.command, ns, file_cfg)
        out_dir = Path(ns.out_dir or "out")
        run_command(ns.command, cfg, out_dir)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except NumericError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (DataError, InsufficientDataError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except NetlabError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK
