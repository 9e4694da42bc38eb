"""Scenario execution: run configs, write CSVs, record a manifest.

The pipeline is deterministic: identical configs produce bit-identical
CSV files regardless of worker count.  Floats are serialized with
round-trip repr formatting; undefined (NaN) correlation entries become
empty cells.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, build_scenario, expand_sweep

FWM_COLUMNS = (
    "two_c2_t", "n1", "nm1", "n01", "n02",
    "g2_1", "g2_m1", "g2_01", "g2_02",
    "g2_1_m1", "g2_1_01", "r_1_m1", "r_1_01", "q_1_m1",
)
PAMP_COLUMNS = (
    "omega_r_t", "I_a", "I_p", "I_m",
    "g2_a", "g2_p", "g2_m", "g2_am", "g2_ap", "g2_mp",
    "r_am", "q_am", "r_mp", "q_mp", "r_ap",
)


def _cell(value) -> str:
    v = float(value)
    return "" if math.isnan(v) else repr(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _run_fwm(cfg: ScenarioConfig, key: str, params: dict, out_dir: Path) -> list[Path]:
    from .spinor import correlation_report

    scn = build_scenario(cfg, params)
    rep = correlation_report(scn)
    pair_sm = ("a1", "am1")
    pair_cs = ("a1", "a01")
    rows = zip(
        rep.times,
        rep.intensities["a1"], rep.intensities["am1"],
        rep.intensities["a01"], rep.intensities["a02"],
        rep.g2["a1"], rep.g2["am1"], rep.g2["a01"], rep.g2["a02"],
        rep.g2_pairs[pair_sm], rep.g2_pairs[pair_cs],
        rep.classical_margin[pair_sm], rep.classical_margin[pair_cs],
        rep.quantum_margin[pair_sm],
    )
    path = out_dir / f"{key}.csv"
    _write_csv(path, FWM_COLUMNS, rows)
    return [path]


def _run_pamp(cfg: ScenarioConfig, key: str, params: dict, out_dir: Path) -> list[Path]:
    from .pamp import correlations, propagate

    three, state0, times = build_scenario(cfg, params)
    rows = []
    for t in times:
        cor = correlations(propagate(state0, three, float(t)))
        i_a, i_p, i_m = cor.intensities
        rows.append((
            t, i_a, i_p, i_m,
            cor.g2[0], cor.g2[1], cor.g2[2],
            cor.g2_am, cor.g2_ap, cor.g2_mp,
            cor.r_am, cor.q_am, cor.r_mp, cor.q_mp, cor.r_ap,
        ))
    path = out_dir / f"{key}.csv"
    _write_csv(path, PAMP_COLUMNS, rows)
    return [path]


def _run_holo(cfg: ScenarioConfig, key: str, params: dict, out_dir: Path) -> list[Path]:
    from .holo import run_holography
    from .holo.fields import ScalarField, write_field_csv

    scn = build_scenario(cfg, params)
    run = run_holography(scn)
    rec = run.reconstruction

    image_path = out_dir / f"{key}__image.csv"
    write_field_csv(rec.image, image_path)

    object_path = out_dir / f"{key}__object.csv"
    object_field = ScalarField(
        grid=rec.image.grid,
        values=np.sqrt(run.object_intensity).astype(complex),
        wavelength=scn.writing_wavelength,
    )
    write_field_csv(object_field, object_path)

    scan_path = out_dir / f"{key}__scan.csv"
    _write_csv(scan_path, ("distance_m", "score"), zip(rec.distances, rec.scores))

    summary_path = out_dir / f"{key}__summary.csv"
    _write_csv(
        summary_path,
        ("best_distance_m", "score", "lambda_db_m", "conjugate_center_m",
         "real_center_m", "clipping_fraction", "fragmented"),
        [(
            rec.distance, rec.score, run.wavelength, rec.conjugate_center,
            rec.real_center, run.hologram.clipping_fraction,
            1.0 if run.hologram.fragmented else 0.0,
        )],
    )
    return [image_path, object_path, scan_path, summary_path]


_RUNNERS = {"fwm": _run_fwm, "pamp": _run_pamp, "holo": _run_holo}


def _run_job(args):
    cfg, key, params, out_dir = args
    started = time.perf_counter()
    files = _RUNNERS[cfg.kind](cfg, key, params, Path(out_dir))
    elapsed = time.perf_counter() - started
    return key, [str(f) for f in files], elapsed


@dataclass(frozen=True)
class RunManifest:
    path: Path
    data: dict


def run_config(cfg: ScenarioConfig, out_dir, workers: int = 1) -> RunManifest:
    """Execute a config (including its sweep) and write the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, key, params, str(out_dir)) for key, params in expand_sweep(cfg)]
    for _, key, params, _ in jobs:
        build_scenario(cfg, params)      # full validation before any compute

    if workers > 1 and len(jobs) > 1:
        with get_context("spawn").Pool(processes=min(workers, len(jobs))) as pool:
            results = pool.map(_run_job, jobs)
    else:
        results = [_run_job(job) for job in jobs]

    outputs = []
    timings = {}
    for key, files, elapsed in results:
        timings[key] = elapsed
        for f in files:
            p = Path(f)
            outputs.append({
                "path": p.name,
                "sha256": _sha256(p),
                "bytes": p.stat().st_size,
            })
    data = {
        "tool": "mwoptics",
        "version": __version__,
        "kind": cfg.kind,
        "name": cfg.name,
        "config_sha256": cfg.sha256,
        "outputs": outputs,
        "timings_s": timings,
    }
    manifest_path = out_dir / f"{cfg.name}__manifest.json"
    manifest_path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return RunManifest(path=manifest_path, data=data)


def load_manifest(path) -> RunManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    if data.get("tool") != "mwoptics":
        raise ConfigError(f"{path} is not a mwoptics manifest")
    return RunManifest(path=path, data=data)
