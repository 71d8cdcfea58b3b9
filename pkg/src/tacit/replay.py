"""Recompute metrics from an experiment's exported CSVs and cross-check.

This is the independent verification path: it parses only the CSV files
an experiment wrote (belief checkpoints, node attributes, event logs)
and rebuilds per-node outcomes, treatment effects, and cascade
statistics, comparing them against the stored result files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import SimLog
from .metrics import cascade_stats, iwcib_all

__all__ = ["ReplayReport", "replay_outputs", "load_simlog_csv"]

ABS_TOL = 1e-12


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ReplayReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, ok, detail))


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def load_simlog_csv(run_dir: Path, num_communities: int = 1, num_topics: int = 1) -> SimLog:
    """Rebuild a SimLog's event tables from utterances.csv and reads.csv."""
    log = SimLog(num_communities, num_topics)
    for row in _read_rows(run_dir / "utterances.csv"):
        log.append_utterance(
            int(row["claim"]),
            int(row["author"]),
            int(row["t"]),
            int(row["parent"]) if row["parent"] else -1,
            int(row["depth"]),
        )
    for row in _read_rows(run_dir / "reads.csv"):
        log.read_node.append(int(row["node"]))
        log.read_utt.append(int(row["utterance"]))
        log.read_t.append(int(row["t"]))
    return log


def _load_checkpoints(path: Path) -> dict[int, np.ndarray]:
    rows = _read_rows(path)
    num_nodes = max(int(r["node"]) for r in rows) + 1
    num_topics = max(int(r["topic"]) for r in rows) + 1
    out: dict[int, np.ndarray] = {}
    for row in rows:
        t = int(row["t"])
        if t not in out:
            out[t] = np.zeros((num_nodes, num_topics))
        out[t][int(row["node"]), int(row["topic"])] = float(row["belief"])
    return out


def _load_nodes(path: Path):
    rows = _read_rows(path)
    num_nodes = len(rows)
    topics = [k for k in rows[0] if k.startswith("impactedness_")]
    impact = np.zeros((num_nodes, len(topics)))
    community = np.zeros(num_nodes, dtype=int)
    for row in rows:
        j = int(row["node"])
        community[j] = int(row["community"])
        for t, key in enumerate(topics):
            impact[j, t] = float(row[key])
    return impact, community


def replay_outputs(out_dir: str | Path) -> ReplayReport:
    """Verify an experiment directory against recomputation from its CSVs."""
    out_dir = Path(out_dir)
    report = ReplayReport()

    stored_iwcib: dict[tuple[int, str, int], float] = {}
    for row in _read_rows(out_dir / "iwcib.csv"):
        stored_iwcib[(int(row["repetition"]), row["mitigation"], int(row["node"]))] = float(row["iwcib"])

    recomputed: dict[tuple[int, str], np.ndarray] = {}
    communities: dict[int, np.ndarray] = {}
    reps_root = out_dir / "reps"
    for rep_dir in sorted(reps_root.iterdir()):
        rep = int(rep_dir.name.split("_")[1])
        impact, community = _load_nodes(rep_dir / "nodes.csv")
        communities[rep] = community
        for run_dir in sorted((rep_dir / "runs").iterdir()):
            name = run_dir.name
            checkpoints = _load_checkpoints(run_dir / "belief_checkpoints.csv")
            # outcome window is the last two checkpoints (intervention start, end)
            t_start, t_end = sorted(checkpoints)[-2:]
            scores = iwcib_all(checkpoints[t_start], checkpoints[t_end], impact)
            recomputed[(rep, name)] = scores
            worst = max(
                abs(scores[j] - stored_iwcib[(rep, name, j)]) for j in range(len(scores))
            )
            report.add(
                f"iwcib rep={rep} run={name}",
                worst <= ABS_TOL,
                f"max deviation {worst:.2e}",
            )

    # treatment effects from the recomputed per-node outcomes
    stored_ate = {
        (row["mitigation"], row["scope"]): float(row["ate"])
        for row in _read_rows(out_dir / "ate.csv")
    }
    names = sorted({name for (_, name) in recomputed})
    reps = sorted(communities)
    baseline = "none"
    if baseline in names:
        from .experiment import _scopes_for

        for name in names:
            per_rep = {}
            for rep in reps:
                scopes = _scopes_for(communities[rep])
                diff = recomputed[(rep, name)] - recomputed[(rep, baseline)]
                for scope, members in scopes.items():
                    per_rep.setdefault(scope, []).append(float(diff[members].mean()))
            for scope, values in per_rep.items():
                key = (name, scope)
                if key not in stored_ate:
                    report.add(f"ate {name}/{scope}", False, "missing from ate.csv")
                    continue
                dev = abs(float(np.mean(values)) - stored_ate[key])
                report.add(f"ate {name}/{scope}", dev <= ABS_TOL, f"deviation {dev:.2e}")

    # cascade statistics from raw event logs, where exported
    stored_cascades: dict[tuple[int, int], dict] = {}
    cascades_path = out_dir / "cascades.csv"
    if cascades_path.exists():
        for row in _read_rows(cascades_path):
            stored_cascades[(int(row["repetition"]), int(row["root_utterance"]))] = row
        for rep_dir in sorted(reps_root.iterdir()):
            rep = int(rep_dir.name.split("_")[1])
            run_dir = rep_dir / "runs" / baseline
            if not (run_dir / "utterances.csv").exists():
                continue
            log = load_simlog_csv(run_dir)
            mismatches = 0
            for stats in cascade_stats(log):
                row = stored_cascades.get((rep, stats.root_utterance))
                if row is None:
                    mismatches += 1
                    continue
                same = (
                    int(row["depth"]) == stats.depth
                    and int(row["max_breadth"]) == stats.max_breadth
                    and int(row["size"]) == stats.size
                    and int(row["unique_readers"]) == stats.unique_readers
                    and abs(float(row["structural_virality"]) - stats.structural_virality) <= ABS_TOL
                )
                mismatches += 0 if same else 1
            report.add(f"cascades rep={rep}", mismatches == 0, f"{mismatches} mismatching rows")

    return report
