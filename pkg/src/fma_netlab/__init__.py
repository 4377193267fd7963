"""Influence ranking and first-mover-advantage diagnostics for temporal follower networks."""

__version__ = "0.1.0"

from .activity import (ActivityRecord, CorrelationMatrix, issue_ranking, merge_ratio,
                       merged_pr_ranking, pearson_matrix)
from .centrality import (CentralityScores, HitsConfig, PageRankConfig, hits, in_degree_centrality,
                         pagerank, top_k)
from .graph import (FollowEdge, Snapshot, TemporalGraph, UserKind, UserRecord, build_graph,
                    filter_graph, snapshot_at)
from .ingest import (DatasetManifest, FetchPlan, load_activity_json, load_dataset, load_follows_csv,
                     load_users_csv, plan_fetch)
from .macro import (CohortCurveSet, DegreeHistogram, FmaVerdict, GrowthRegime, PowerLawFit,
                    classify_growth, cohort_curves, degree_histogram, fit_power_law, fma_diagnose,
                    growth_curve, period_cohorts, quantile_cohorts, year_cohorts)
from .simulate import ArrivalProcess, SimConfig, attachment_probabilities, simulate
