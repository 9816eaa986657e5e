"""Run manifests and the CSV/JSON artifacts written for runs and sweeps."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .. import __version__
from ..types.models import ComparisonReport, RunConfig, RunManifest, SimulationResult
from .scheduler import derive_weights

logger = logging.getLogger(__name__)

HOURLY_COLUMNS = [
    "hour",
    "region",
    "originated",
    "served",
    "emissions_g",
    "utilization",
    "overloads",
    "mean_latency_ms",
]
MANIFEST_PREFIX = "# manifest: "


def build_manifest(
    config_path: str, config: RunConfig, out_dir: str, policies: Optional[Sequence[str]] = None
) -> RunManifest:
    return RunManifest(
        config_path=str(config_path),
        trace_paths=config.trace_paths(),
        policies=list(policies if policies is not None else config.policies),
        seed=config.seed,
        out_dir=str(out_dir),
        tool_version=__version__,
        config=config.model_dump(mode="json"),
    )


def _manifest_line(manifest: RunManifest) -> str:
    return MANIFEST_PREFIX + json.dumps(manifest.model_dump(mode="json"), sort_keys=True) + "\n"


def write_csv(path: Path, frame: pd.DataFrame, manifest: RunManifest) -> Path:
    """Write ``frame`` after a comment line carrying the manifest."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(_manifest_line(manifest))
        frame.to_csv(handle, index=False, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path: Path) -> Tuple[Dict[str, Any], pd.DataFrame]:
    """Read an artifact CSV back as (manifest, frame)."""
    with Path(path).open(encoding="utf-8") as handle:
        first = handle.readline()
        frame = pd.read_csv(handle)
    if not first.startswith(MANIFEST_PREFIX):
        raise ValueError(f"{path}: missing manifest line")
    return json.loads(first[len(MANIFEST_PREFIX) :]), frame


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def hourly_rows(result: SimulationResult) -> List[Dict[str, Any]]:
    return [
        {
            "hour": report.hour,
            "region": stats.region,
            "originated": stats.originated,
            "served": stats.served,
            "emissions_g": stats.emissions_g,
            "utilization": stats.utilization,
            "overloads": stats.overloads,
            "mean_latency_ms": stats.mean_latency_ms,
        }
        for report in result.reports
        for stats in report.regions
    ]


def hourly_frame(result: SimulationResult) -> pd.DataFrame:
    """Per-hour, per-region metrics of one run."""
    return pd.DataFrame(hourly_rows(result), columns=HOURLY_COLUMNS)


def write_run_artifacts(
    out_dir: Path, label: str, result: SimulationResult, manifest: RunManifest
) -> Dict[str, Path]:
    """``hourly_report.csv``, ``summary.json`` and ``weights.json`` under ``<out>/<label>``."""
    policy_dir = Path(out_dir) / label.replace("#", "_")
    summary = {
        "manifest": manifest.model_dump(mode="json"),
        "policy": result.policy.model_dump(mode="json"),
        "summary": result.summary.model_dump(mode="json"),
    }
    weights = {
        "manifest": summary["manifest"],
        "hours": [derive_weights(r.plan).model_dump(mode="json") for r in result.reports],
    }
    return {
        "hourly": write_csv(policy_dir / "hourly_report.csv", hourly_frame(result), manifest),
        "summary": write_json(policy_dir / "summary.json", summary),
        "weights": write_json(policy_dir / "weights.json", weights),
    }


def write_comparison(out_dir: Path, comparison: ComparisonReport) -> Path:
    return write_json(Path(out_dir) / "comparison.json", comparison.model_dump(mode="json"))


def write_plot_data(
    out_dir: Path,
    labelled: Sequence[Tuple[str, SimulationResult]],
    regions: Sequence[str],
    manifest: RunManifest,
) -> Dict[str, Path]:
    """Tidy tables, one row per policy and hour/region, for external plotting."""
    hourly, redirections, provisioning, buckets = [], [], [], []
    for label, result in labelled:
        hourly.extend({"policy": label, **row} for row in hourly_rows(result))

        matrix = result.summary.redirections
        for i, origin in enumerate(regions):
            row_total = sum(matrix[i])
            for j, destination in enumerate(regions):
                redirections.append(
                    {
                        "policy": label,
                        "origin": origin,
                        "destination": destination,
                        "requests": matrix[i][j],
                        "share": matrix[i][j] / row_total if row_total else 0.0,
                    }
                )

        provisioning.extend(
            {"policy": label, **entry.model_dump()} for entry in result.summary.provisioning
        )

        for report in result.reports:
            for bucket, served in enumerate(report.bucket_served):
                for region, count in zip(regions, served):
                    buckets.append(
                        {
                            "policy": label,
                            "hour": report.hour,
                            "bucket": bucket,
                            "region": region,
                            "served": count,
                        }
                    )

    out = Path(out_dir)
    return {
        "hourly": write_csv(
            out / "hourly.csv",
            pd.DataFrame(hourly, columns=["policy", *HOURLY_COLUMNS]),
            manifest,
        ),
        "redirections": write_csv(
            out / "redirections.csv",
            pd.DataFrame(
                redirections, columns=["policy", "origin", "destination", "requests", "share"]
            ),
            manifest,
        ),
        "provisioning": write_csv(
            out / "provisioning.csv",
            pd.DataFrame(
                provisioning,
                columns=["policy", "region", "mean_servers", "max_servers", "server_hours"],
            ),
            manifest,
        ),
        "buckets": write_csv(
            out / "buckets.csv",
            pd.DataFrame(buckets, columns=["policy", "hour", "bucket", "region", "served"]),
            manifest,
        ),
    }
