"""Figure rendering from run manifests; pure presentation of CSV data."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .config import ConfigError
from .runner import RunManifest, load_manifest


def _read_csv(path: Path) -> dict[str, list[float]]:
    if not path.exists():
        raise ConfigError(f"manifest references missing CSV {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"CSV {path} is empty") from None
        columns = {name: [] for name in header}
        rows = 0
        for row in reader:
            rows += 1
            for name, cell in zip(header, row):
                columns[name].append(math.nan if cell == "" else float(cell))
    if rows == 0:
        raise ConfigError(f"CSV {path} has no data rows")
    return columns


def _require(columns: dict, names, path: Path):
    for name in names:
        if name not in columns:
            raise ConfigError(f"CSV {path} lacks required column '{name}'")


def _outputs(manifest: RunManifest, suffix: str) -> list[Path]:
    base = manifest.path.parent
    return [
        base / entry["path"]
        for entry in manifest.data["outputs"]
        if entry["path"].endswith(suffix)
    ]


def _render_fwm_figure(manifest: RunManifest, out_path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = sorted(_outputs(manifest, ".csv"))
    if not paths:
        raise ConfigError("manifest lists no population CSVs")
    panels = []
    for p in paths:
        cols = _read_csv(p)
        _require(cols, ("two_c2_t", "n1"), p)
        panels.append((p.stem, cols))

    fig, axes = plt.subplots(
        len(panels), 1, figsize=(6.0, 2.8 * len(panels)), sharex=True, squeeze=False
    )
    for ax, (label, cols) in zip(axes[:, 0], panels):
        tau = [t / math.pi for t in cols["two_c2_t"]]
        ax.plot(tau, cols["n1"], lw=0.8, color="k")
        ax.set_ylabel(r"$\langle n_{+1} \rangle$")
        ax.set_title(label, fontsize=9)
    axes[-1, 0].set_xlabel(r"$2 c_2 t / \pi$")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def _render_holo_figure(manifest: RunManifest, out_path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    images = _outputs(manifest, "__image.csv")
    objects = _outputs(manifest, "__object.csv")
    summaries = _outputs(manifest, "__summary.csv")
    if not images or not objects:
        raise ConfigError("manifest lists no reconstruction CSVs")
    img = _read_csv(images[0])
    obj = _read_csv(objects[0])
    _require(img, ("x_m", "intensity"), images[0])
    _require(obj, ("x_m", "intensity"), objects[0])

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x_um = [x * 1e6 for x in img["x_m"]]
    ax.plot(x_um, img["intensity"], lw=0.7, color="k")
    ax.set_xlabel(r"$x$ [$\mu$m]")
    ax.set_ylabel("matter-wave intensity")
    ax.set_yscale("log")

    if summaries:
        summary = _read_csv(summaries[0])
        center = summary["conjugate_center_m"][0] * 1e6
        inset = ax.inset_axes([0.06, 0.62, 0.36, 0.33])
        sel = [i for i, x in enumerate(x_um) if abs(x - center) < 25.0]
        if sel:
            win = [img["intensity"][i] for i in sel]
            peak = max(win) or 1.0
            inset.plot([x_um[i] - center for i in sel], [v / peak for v in win],
                       lw=0.8, color="k", label="reconstructed")
        ox = [x * 1e6 for x in obj["x_m"]]
        opk = max(obj["intensity"]) or 1.0
        osel = [i for i, _ in enumerate(ox) if abs(ox[i]) < 25.0]
        inset.plot([ox[i] for i in osel], [obj["intensity"][i] / opk for i in osel],
                   lw=0.8, ls="--", color="tab:red", label="original")
        inset.set_xlabel(r"$\Delta x$ [$\mu$m]", fontsize=7)
        inset.tick_params(labelsize=6)
        inset.legend(fontsize=5, loc="upper right")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def make_plot(manifest_path, figure_id: str, out_path=None) -> Path:
    """Render a named figure from a manifest's CSVs into a vector file."""
    manifest = load_manifest(manifest_path)
    if out_path is None:
        out_path = manifest.path.parent / f"{manifest.data['name']}__{figure_id}.svg"
    out_path = Path(out_path)
    if figure_id == "fig1":
        if manifest.data["kind"] != "fwm":
            raise ConfigError("fig1 needs a four-wave-mixing manifest")
        return _render_fwm_figure(manifest, out_path)
    if figure_id == "fig2":
        if manifest.data["kind"] != "holo":
            raise ConfigError("fig2 needs a holography manifest")
        return _render_holo_figure(manifest, out_path)
    raise ConfigError(f"unknown figure id '{figure_id}' (expected fig1 or fig2)")
