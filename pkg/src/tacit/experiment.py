"""Counterfactual experiment harness.

Each repetition samples a fresh subgraph from the base graph, runs the
pre-period once, snapshots, then runs every mitigation (and the
no-mitigation baseline) from that shared snapshot to the end. Treatment
effects compare each node against itself under the baseline; everything
is aggregated across repetitions and written as CSV.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boosting import BoostingParams
from .checkworthy import (
    CLAIM_STRATEGIES,
    CLAIM_STRATIFIED,
    CLAIM_VIRALITY,
    LABEL_KNOWLEDGEABLE,
    LABEL_RANDOM,
    LABEL_STRATEGIES,
    LABEL_STRATIFIED,
    build_training_set,
    write_model_dump,
    write_training_set_csv,
)
from .engine import (
    SimLog,
    restore,
    run,
    snapshot,
    write_belief_checkpoints_csv,
    write_claims_csv,
    write_simlog_csv,
)
from .features import FeatureSchema
from .graph import Graph, approx_betweenness, generate_synthetic_graph, load_graph, sample_subgraph
from .intervention import (
    WORKFLOW_BY_TOPIC,
    WORKFLOW_NONE,
    WORKFLOW_TOP,
    MitigationConfig,
    TrainedModels,
    run_mitigation,
)
from .metrics import cascade_stats, ccdf, iwcib_all, misinfo_read_series, utterances_per_claim
from .world import MISINFO, ScenarioConfig, WorldState, default_scenario, init_world

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "full_mitigation_grid",
    "run_experiment",
    "validate_cascade_ordering",
    "COMPONENTS",
]

logger = logging.getLogger(__name__)

# seed-stream tags for per-repetition substreams
_STREAM_GRAPH = 0
_STREAM_WORLD = 1
_STREAM_CENTRALITY = 2
_STREAM_LABELS = 3

SCOPE_NETWORK = "network"
SCOPE_MAJORITY = "majority"
SCOPE_MINORITY = "minority_pooled"

# (diversity variable, component, cell predicate)
COMPONENTS = (
    ("claim_sampling", CLAIM_VIRALITY),
    ("claim_sampling", CLAIM_STRATIFIED),
    ("label_sampling", LABEL_RANDOM),
    ("label_sampling", LABEL_STRATIFIED),
    ("label_sampling", LABEL_KNOWLEDGEABLE),
    ("workflow", WORKFLOW_TOP),
    ("workflow", WORKFLOW_BY_TOPIC),
)

CCDF_METRICS = (
    "depth",
    "max_breadth",
    "size",
    "unique_readers",
    "structural_virality",
    "utterances_per_claim",
)


def full_mitigation_grid(checks_per_step=2, training_claims=200, labelers_per_claim=30):
    """All 12 strategy combinations plus the single baseline."""
    grid = [MitigationConfig()]
    for cs in CLAIM_STRATEGIES:
        for ls in LABEL_STRATEGIES:
            for wf in (WORKFLOW_TOP, WORKFLOW_BY_TOPIC):
                grid.append(
                    MitigationConfig(
                        claim_strategy=cs,
                        label_strategy=ls,
                        workflow=wf,
                        checks_per_step=checks_per_step,
                        training_claims=training_claims,
                        labelers_per_claim=labelers_per_claim,
                    )
                )
    return grid


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment end to end."""

    scenario: ScenarioConfig
    graph_source: dict
    sample_fraction: float = 0.15
    repetitions: int = 5
    t_mid: int = 50
    t_end: int = 100
    mitigations: list[MitigationConfig] = field(default_factory=full_mitigation_grid)
    master_seed: int = 7
    betweenness_pivots: int = 256
    feature_snapshots: tuple[int, ...] = (1, 2, 5, 10)
    feature_depths: tuple[int, ...] = (1, 2, 3, 4, 5)
    boosting: BoostingParams = field(default_factory=BoostingParams)
    export_event_logs: str = "m0"  # "m0" | "all" | "none"

    def validate(self) -> None:
        self.scenario.validate()
        if not (0 < self.sample_fraction <= 1):
            raise ValueError("sample_fraction must be in (0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not (0 <= self.t_mid < self.t_end):
            raise ValueError("need 0 <= t_mid < t_end")
        baselines = [m for m in self.mitigations if m.is_baseline]
        if len(baselines) != 1:
            raise ValueError("the grid must include the no-mitigation baseline exactly once")
        names = [m.name for m in self.mitigations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate mitigation configurations in the grid")
        for m in self.mitigations:
            m.validate(self.scenario.num_topics)
        if self.export_event_logs not in ("m0", "all", "none"):
            raise ValueError("export_event_logs must be one of m0, all, none")

    @property
    def schema(self) -> FeatureSchema:
        return FeatureSchema(tuple(self.feature_snapshots), tuple(self.feature_depths))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "graph_source": self.graph_source,
            "sample_fraction": self.sample_fraction,
            "repetitions": self.repetitions,
            "t_mid": self.t_mid,
            "t_end": self.t_end,
            "mitigations": [
                {
                    "claim_strategy": m.claim_strategy,
                    "label_strategy": m.label_strategy,
                    "workflow": m.workflow,
                    "checks_per_step": m.checks_per_step,
                    "training_claims": m.training_claims,
                    "labelers_per_claim": m.labelers_per_claim,
                }
                for m in self.mitigations
            ],
            "master_seed": self.master_seed,
            "betweenness_pivots": self.betweenness_pivots,
            "feature_snapshots": list(self.feature_snapshots),
            "feature_depths": list(self.feature_depths),
            "boosting": vars(self.boosting),
            "export_event_logs": self.export_event_logs,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        scenario = ScenarioConfig.from_dict(raw.pop("scenario", default_scenario().to_dict()))
        mit_raw = raw.pop("mitigations", "full")
        checks = raw.pop("checks_per_step", 2)
        n_claims = raw.pop("training_claims", 200)
        m_labelers = raw.pop("labelers_per_claim", 30)
        if mit_raw == "full":
            mitigations = full_mitigation_grid(checks, n_claims, m_labelers)
        else:
            mitigations = []
            for entry in mit_raw:
                entry = dict(entry)
                entry.setdefault("checks_per_step", checks)
                entry.setdefault("training_claims", n_claims)
                entry.setdefault("labelers_per_claim", m_labelers)
                if entry.get("workflow", WORKFLOW_NONE) == WORKFLOW_NONE:
                    mitigations.append(MitigationConfig())
                else:
                    mitigations.append(MitigationConfig(**entry))
        boosting = BoostingParams(**raw.pop("boosting", {}))
        raw.pop("out_dir", None)
        cfg = cls(scenario=scenario, mitigations=mitigations, boosting=boosting, **raw)
        cfg.feature_snapshots = tuple(cfg.feature_snapshots)
        cfg.feature_depths = tuple(cfg.feature_depths)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text())
        raw.update(overrides)
        return cls.from_dict(raw)


@dataclass
class ExperimentResult:
    out_dir: Path
    mitigation_names: list[str]
    scopes: list[str]
    completed_reps: list[int]
    failed_reps: list[tuple[int, str]]
    per_rep_ate: dict  # (rep, name, scope) -> float
    agg_ate: dict  # (name, scope) -> (mean, se)
    per_rep_component_ate: dict  # (rep, variable, component, scope) -> float
    agg_component_ate: dict  # (variable, component, scope) -> (mean, se)
    per_rep_disparity: dict  # (rep, level, name) -> ratio
    prefix_hashes: dict  # (rep, name) -> hex digest


def build_base_graph(source: dict, out_dir: Path | None = None) -> Graph:
    if "synthetic" in source:
        spec = source["synthetic"]
        return generate_synthetic_graph(
            spec["community_sizes"], spec["p_in"], spec["p_out"], spec.get("seed", 0)
        )
    if "edge_list" in source:
        remap = None if out_dir is None else out_dir / "id_remap.csv"
        return load_graph(source["edge_list"], source["communities"], remap_path=remap)
    raise ValueError("graph_source must contain either 'synthetic' or 'edge_list'")


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def _prefix_hash(log: SimLog, t_limit: int) -> str:
    digest = hashlib.sha256()
    for i in range(log.num_utterances):
        if log.utt_t[i] >= t_limit:
            break
        digest.update(
            f"u,{log.utt_claim[i]},{log.utt_author[i]},{log.utt_t[i]},{log.utt_parent[i]},{log.utt_depth[i]}\n".encode()
        )
    for i in range(log.num_reads):
        if log.read_t[i] >= t_limit:
            break
        digest.update(f"r,{log.read_node[i]},{log.read_utt[i]},{log.read_t[i]}\n".encode())
    return digest.hexdigest()


def _fmt(x) -> str:
    return repr(float(x))


@dataclass
class _RunOutcome:
    name: str
    iwcib: np.ndarray
    misinfo: np.ndarray  # (C, topics, T) cumulative per node
    prefix_hash: str
    factchecks: list  # (t, claim, score, veracity, blocked)
    cascades: list | None
    utt_per_claim: np.ndarray | None
    claim_veracity: np.ndarray | None


def _run_one_mitigation(mit, snap, models, cfg, centrality, want_cascades):
    world, log, ledger = run_mitigation(
        snap, mit, models, cfg.t_end, centrality=centrality, schema=cfg.schema
    )
    scores = iwcib_all(
        log.belief_checkpoints[cfg.t_mid], log.belief_checkpoints[cfg.t_end], world.impactedness
    )
    checks = [
        (e.t, cid, e.score, e.veracity, e.blocked)
        for cid, e in sorted(ledger.entries.items(), key=lambda kv: (kv[1].t, kv[0]))
    ]
    outcome = _RunOutcome(
        name=mit.name,
        iwcib=scores,
        misinfo=misinfo_read_series(log, world.graph),
        prefix_hash=_prefix_hash(log, cfg.t_mid),
        factchecks=checks,
        cascades=cascade_stats(log) if want_cascades else None,
        utt_per_claim=utterances_per_claim(log, len(world.claims)) if want_cascades else None,
        claim_veracity=np.array([c.veracity for c in world.claims]) if want_cascades else None,
    )
    return world, log, outcome


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path) -> ExperimentResult:
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective_config.json").write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    cfg.schema.to_json(out_dir / "features_schema.json")

    base_graph = build_base_graph(cfg.graph_source, out_dir)
    mitigation_names = [m.name for m in cfg.mitigations]
    baseline_name = next(m.name for m in cfg.mitigations if m.is_baseline)

    rep_data = {}
    failed: list[tuple[int, str]] = []
    for rep in range(cfg.repetitions):
        t0 = time.time()
        try:
            rep_data[rep] = _run_repetition(cfg, base_graph, rep, out_dir)
        except Exception as exc:  # noqa: BLE001 - a failed repetition must not sink the rest
            logger.error("repetition %d failed: %s", rep, exc, exc_info=True)
            failed.append((rep, str(exc)))
            continue
        logger.info("repetition %d finished in %.1fs", rep, time.time() - t0)

    completed = sorted(rep_data)
    if not completed:
        raise RuntimeError("every repetition failed")
    if failed:
        _write_failures(out_dir, failed)

    result = _aggregate(cfg, out_dir, rep_data, mitigation_names, baseline_name, failed)
    return result


def _run_repetition(cfg: ExperimentConfig, base_graph: Graph, rep: int, out_dir: Path):
    seed_graph = _derive_seed(cfg.master_seed, rep, _STREAM_GRAPH)
    seed_world = _derive_seed(cfg.master_seed, rep, _STREAM_WORLD)
    seed_centrality = _derive_seed(cfg.master_seed, rep, _STREAM_CENTRALITY)

    g = sample_subgraph(base_graph, cfg.sample_fraction, seed_graph)
    centrality = approx_betweenness(g, min(cfg.betweenness_pivots, g.num_nodes), seed_centrality)
    world = init_world(g, cfg.scenario, seed_world)
    run(world, cfg.t_mid)
    snap = snapshot(world)

    rep_dir = out_dir / "reps" / f"rep_{rep:03d}"
    rep_dir.mkdir(parents=True, exist_ok=True)
    _write_nodes_csv(world, rep_dir / "nodes.csv")
    write_claims_csv(world.claims, rep_dir / "claims.csv")

    # train each (claim, label) model pair once; workflows share them
    w_mid = restore(snap)
    models_cache: dict[tuple[str, str], TrainedModels] = {}
    for mit in cfg.mitigations:
        if mit.is_baseline:
            continue
        key = (mit.claim_strategy, mit.label_strategy)
        if key in models_cache:
            continue
        cs_idx = CLAIM_STRATEGIES.index(mit.claim_strategy)
        ls_idx = LABEL_STRATEGIES.index(mit.label_strategy)
        label_seed = _derive_seed(cfg.master_seed, rep, _STREAM_LABELS, cs_idx, ls_idx)
        training, f1, f2 = build_training_set(
            w_mid,
            centrality,
            mit.claim_strategy,
            mit.label_strategy,
            n=mit.training_claims,
            m=mit.labelers_per_claim,
            seed=label_seed,
            schema=cfg.schema,
            boosting=cfg.boosting,
        )
        models_cache[key] = TrainedModels(f1, f2, mit.claim_strategy, mit.label_strategy)
        train_dir = rep_dir / "training" / f"{mit.claim_strategy}+{mit.label_strategy}"
        train_dir.mkdir(parents=True, exist_ok=True)
        write_training_set_csv(training, train_dir / "training_set.csv")
        write_model_dump(f1, f2, train_dir / "models.json")

    outcomes = {}
    for mit in cfg.mitigations:
        models = None if mit.is_baseline else models_cache[(mit.claim_strategy, mit.label_strategy)]
        want_cascades = mit.is_baseline
        world_end, log, outcome = _run_one_mitigation(
            mit, snap, models, cfg, centrality, want_cascades
        )
        run_dir = rep_dir / "runs" / mit.name
        run_dir.mkdir(parents=True, exist_ok=True)
        write_belief_checkpoints_csv(log, run_dir / "belief_checkpoints.csv")
        if cfg.export_event_logs == "all" or (cfg.export_event_logs == "m0" and mit.is_baseline):
            write_simlog_csv(log, run_dir)
        outcomes[mit.name] = outcome

    return {
        "graph": g,
        "community": g.community.copy(),
        "outcomes": outcomes,
    }


def _scopes_for(community: np.ndarray) -> dict[str, np.ndarray]:
    sizes = np.bincount(community)
    majority = int(np.argmax(sizes))
    scopes = {f"community_{c}": np.nonzero(community == c)[0] for c in range(len(sizes))}
    scopes[SCOPE_MAJORITY] = scopes[f"community_{majority}"]
    scopes[SCOPE_MINORITY] = np.nonzero(community != majority)[0]
    scopes[SCOPE_NETWORK] = np.arange(len(community))
    return scopes


def _aggregate(cfg, out_dir, rep_data, mitigation_names, baseline_name, failed):
    per_rep_ate = {}
    per_rep_component = {}
    per_rep_disparity = {}
    prefix_hashes = {}
    completed = sorted(rep_data)

    num_comms = cfg.scenario.num_communities
    scope_names = [f"community_{c}" for c in range(num_comms)] + [
        SCOPE_MAJORITY,
        SCOPE_MINORITY,
        SCOPE_NETWORK,
    ]

    for rep in completed:
        data = rep_data[rep]
        scopes = _scopes_for(data["community"])
        base = data["outcomes"][baseline_name].iwcib
        for name in mitigation_names:
            outcome = data["outcomes"][name]
            prefix_hashes[(rep, name)] = outcome.prefix_hash
            diff = outcome.iwcib - base
            for scope in scope_names:
                per_rep_ate[(rep, name, scope)] = float(diff[scopes[scope]].mean())
        # component marginals: mean over the grid cells containing the component
        for variable, component in COMPONENTS:
            cells = [
                m.name
                for m in cfg.mitigations
                if not m.is_baseline
                and component in (m.claim_strategy, m.label_strategy, m.workflow)
            ]
            if not cells:
                continue
            for scope in scope_names:
                per_rep_component[(rep, variable, component, scope)] = float(
                    np.mean([per_rep_ate[(rep, name, scope)] for name in cells])
                )
            maj = per_rep_component[(rep, variable, component, SCOPE_MAJORITY)]
            mino = per_rep_component[(rep, variable, component, SCOPE_MINORITY)]
            per_rep_disparity[(rep, "component", component)] = (
                maj / mino if mino != 0 else float("inf")
            )
        for name in mitigation_names:
            maj = per_rep_ate[(rep, name, SCOPE_MAJORITY)]
            mino = per_rep_ate[(rep, name, SCOPE_MINORITY)]
            per_rep_disparity[(rep, "cell", name)] = maj / mino if mino != 0 else float("inf")

    def agg(values):
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        return mean, se

    agg_ate = {
        (name, scope): agg([per_rep_ate[(rep, name, scope)] for rep in completed])
        for name in mitigation_names
        for scope in scope_names
    }
    agg_component = {}
    for variable, component in COMPONENTS:
        for scope in scope_names:
            key = (completed[0], variable, component, scope)
            if key not in per_rep_component:
                continue
            agg_component[(variable, component, scope)] = agg(
                [per_rep_component[(rep, variable, component, scope)] for rep in completed]
            )

    _write_ate_csv(out_dir / "ate.csv", mitigation_names, scope_names, agg_ate)
    _write_component_csv(out_dir / "component_ate.csv", scope_names, agg_component)
    _write_disparity_csv(out_dir / "disparity.csv", cfg, completed, per_rep_disparity, agg_ate, agg_component)
    _write_iwcib_csv(out_dir / "iwcib.csv", completed, rep_data, mitigation_names)
    _write_hashes_csv(out_dir / "pre_period_hashes.csv", completed, mitigation_names, prefix_hashes)
    _write_factchecks_csv(out_dir / "factchecks.csv", completed, rep_data, mitigation_names)
    _write_misinfo_csv(out_dir / "misinfo_read.csv", completed, rep_data, mitigation_names)
    _write_cascades_and_ccdfs(out_dir, completed, rep_data, baseline_name)

    return ExperimentResult(
        out_dir=out_dir,
        mitigation_names=mitigation_names,
        scopes=scope_names,
        completed_reps=completed,
        failed_reps=failed,
        per_rep_ate=per_rep_ate,
        agg_ate=agg_ate,
        per_rep_component_ate=per_rep_component,
        agg_component_ate=agg_component,
        per_rep_disparity=per_rep_disparity,
        prefix_hashes=prefix_hashes,
    )


def _write_nodes_csv(world: WorldState, path: Path) -> None:
    g = world.graph
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        topics = range(world.num_topics)
        writer.writerow(
            ["node", "original_id", "community", "is_bot", "prestige"]
            + [f"impactedness_{t}" for t in topics]
        )
        originals = g.original_ids if g.original_ids is not None else g.nodes
        for j in range(g.num_nodes):
            writer.writerow(
                [j, int(originals[j]), int(g.community[j]), int(world.is_bot[j]), _fmt(world.prestige[j])]
                + [_fmt(world.impactedness[j, t]) for t in topics]
            )


def _write_failures(out_dir: Path, failed) -> None:
    with open(out_dir / "failures.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "error"])
        for rep, err in failed:
            writer.writerow([rep, err])


def _write_ate_csv(path, names, scopes, agg_ate) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mitigation", "scope", "ate", "se"])
        for name in names:
            for scope in scopes:
                mean, se = agg_ate[(name, scope)]
                writer.writerow([name, scope, _fmt(mean), _fmt(se)])


def _write_component_csv(path, scopes, agg_component) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["diversity_variable", "component", "scope", "ate", "se"])
        for (variable, component, scope), (mean, se) in agg_component.items():
            writer.writerow([variable, component, scope, _fmt(mean), _fmt(se)])


def _write_disparity_csv(path, cfg, completed, per_rep_disparity, agg_ate, agg_component) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "name", "repetition", "disparity_ratio"])
        for (rep, level, name), ratio in sorted(
            per_rep_disparity.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
        ):
            writer.writerow([level, name, rep, _fmt(ratio)])
        # aggregate ratios from the cross-repetition mean treatment effects
        for name in [m.name for m in cfg.mitigations]:
            maj = agg_ate[(name, SCOPE_MAJORITY)][0]
            mino = agg_ate[(name, SCOPE_MINORITY)][0]
            writer.writerow(["cell", name, "all", _fmt(maj / mino if mino else float("inf"))])
        for variable, component in COMPONENTS:
            key_m = (variable, component, SCOPE_MAJORITY)
            if key_m not in agg_component:
                continue
            maj = agg_component[key_m][0]
            mino = agg_component[(variable, component, SCOPE_MINORITY)][0]
            writer.writerow(["component", component, "all", _fmt(maj / mino if mino else float("inf"))])


def _write_iwcib_csv(path, completed, rep_data, names) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "mitigation", "node", "community", "iwcib"])
        for rep in completed:
            community = rep_data[rep]["community"]
            for name in names:
                scores = rep_data[rep]["outcomes"][name].iwcib
                for j in range(len(scores)):
                    writer.writerow([rep, name, j, int(community[j]), _fmt(scores[j])])


def _write_hashes_csv(path, completed, names, prefix_hashes) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "mitigation", "pre_period_hash"])
        for rep in completed:
            for name in names:
                writer.writerow([rep, name, prefix_hashes[(rep, name)]])


def _write_factchecks_csv(path, completed, rep_data, names) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "mitigation", "t", "claim", "score", "veracity", "blocked"])
        for rep in completed:
            for name in names:
                for t, claim, score, veracity, blocked in rep_data[rep]["outcomes"][name].factchecks:
                    writer.writerow([rep, name, t, claim, _fmt(score), veracity, int(blocked)])


def _write_misinfo_csv(path, completed, rep_data, names) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "mitigation", "community", "topic", "t", "reads_per_node"])
        for rep in completed:
            for name in names:
                series = rep_data[rep]["outcomes"][name].misinfo
                num_comms, num_topics, steps = series.shape
                for c in range(num_comms):
                    for topic in range(num_topics):
                        for t in range(steps):
                            writer.writerow([rep, name, c, topic, t, _fmt(series[c, topic, t])])


def _write_cascades_and_ccdfs(out_dir, completed, rep_data, baseline_name) -> None:
    rows = []
    upc_by_veracity = {-1: [], 0: [], 1: []}
    for rep in completed:
        outcome = rep_data[rep]["outcomes"][baseline_name]
        veracity_of = outcome.claim_veracity
        for stats in outcome.cascades:
            rows.append((rep, stats, int(veracity_of[stats.claim_id])))
        for veracity in (-1, 0, 1):
            mask = veracity_of == veracity
            counts = outcome.utt_per_claim[mask]
            upc_by_veracity[veracity].extend(counts[counts > 0].tolist())

    with open(out_dir / "cascades.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["repetition", "mitigation", "root_utterance", "claim", "veracity",
             "depth", "max_breadth", "size", "unique_readers", "structural_virality"]
        )
        for rep, stats, veracity in rows:
            writer.writerow(
                [rep, baseline_name, stats.root_utterance, stats.claim_id, veracity,
                 stats.depth, stats.max_breadth, stats.size, stats.unique_readers,
                 _fmt(stats.structural_virality)]
            )

    by_metric = {name: {-1: [], 0: [], 1: []} for name in CCDF_METRICS}
    for rep, stats, veracity in rows:
        by_metric["depth"][veracity].append(stats.depth)
        by_metric["max_breadth"][veracity].append(stats.max_breadth)
        by_metric["size"][veracity].append(stats.size)
        by_metric["unique_readers"][veracity].append(stats.unique_readers)
        by_metric["structural_virality"][veracity].append(stats.structural_virality)
    by_metric["utterances_per_claim"] = upc_by_veracity

    for metric in CCDF_METRICS:
        with open(out_dir / f"ccdf_{metric}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["veracity", "x", "p"])
            for veracity in (-1, 0, 1):
                values = by_metric[metric][veracity]
                if not values:
                    continue
                for x, p in ccdf(values):
                    writer.writerow([veracity, _fmt(x), _fmt(p)])


# -- cascade-shape validation ----------------------------------------------


@dataclass
class CascadeOrderingOutcome:
    seed: int
    mean_depth: dict
    mean_breadth: dict
    mean_readers: dict
    max_upc: dict
    conditions: dict[str, bool]

    @property
    def all_hold(self) -> bool:
        return all(self.conditions.values())


def validate_cascade_ordering(cfg: ExperimentConfig, seeds: int = 10) -> list[CascadeOrderingOutcome]:
    """Unmitigated runs per seed, checking the veracity ordering of cascades.

    Misinformation cascades should be deeper, wider, and more read on
    average, while the single most-tweeted claim should be an
    anti-misinformation claim (the heavy right tail of true claims).
    """
    base_graph = build_base_graph(cfg.graph_source)
    outcomes = []
    for seed_idx in range(seeds):
        g = sample_subgraph(base_graph, cfg.sample_fraction, _derive_seed(cfg.master_seed, seed_idx, 100))
        world = init_world(g, cfg.scenario, _derive_seed(cfg.master_seed, seed_idx, 101))
        run(world, cfg.t_end)
        stats = cascade_stats(world.log)
        veracity_of = {c.id: c.veracity for c in world.claims}
        groups = {-1: [], 1: []}
        for s in stats:
            v = veracity_of[s.claim_id]
            if v in groups:
                groups[v].append(s)
        upc = utterances_per_claim(world.log, len(world.claims))
        max_upc = {
            v: int(max((upc[c.id] for c in world.claims if c.veracity == v), default=0))
            for v in (-1, 1)
        }

        def mean(group, attr):
            return float(np.mean([getattr(s, attr) for s in group])) if group else 0.0

        mean_depth = {v: mean(groups[v], "depth") for v in (-1, 1)}
        mean_breadth = {v: mean(groups[v], "max_breadth") for v in (-1, 1)}
        mean_readers = {v: mean(groups[v], "unique_readers") for v in (-1, 1)}
        conditions = {
            "misinfo_deeper": mean_depth[1] > mean_depth[-1],
            "misinfo_wider": mean_breadth[1] > mean_breadth[-1],
            "misinfo_more_readers": mean_readers[1] > mean_readers[-1],
            "anti_heavier_tail": max_upc[-1] > max_upc[1],
        }
        outcomes.append(
            CascadeOrderingOutcome(
                seed=seed_idx,
                mean_depth=mean_depth,
                mean_breadth=mean_breadth,
                mean_readers=mean_readers,
                max_upc=max_upc,
                conditions=conditions,
            )
        )
        logger.info(
            "seed %d: depth %.2f/%.2f breadth %.2f/%.2f readers %.2f/%.2f max-upc %d/%d",
            seed_idx,
            mean_depth[1], mean_depth[-1],
            mean_breadth[1], mean_breadth[-1],
            mean_readers[1], mean_readers[-1],
            max_upc[-1], max_upc[1],
        )
    return outcomes
