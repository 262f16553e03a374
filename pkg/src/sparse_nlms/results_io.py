"""Result emission: one CSV table per plot, a run manifest, and SVG plots.

Outputs are deterministic: identical config and master seed reproduce
byte-identical CSVs and manifests (floats are written with full repr
precision, LF line endings), and the SVG renderer is pinned to a fixed
hash salt with no embedded timestamps.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiment import AggregateResult, MseCurve, trial_seed  # noqa: E402
from .configfile import content_hash, dump_config_json  # noqa: E402

__all__ = ["emit_results"]

_SVG_SALT = "sparse-nlms"


def _fmt(value) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _scenario_tag(sparsity: int, snr_db: float) -> str:
    return f"k{sparsity}_snr{snr_db:g}db"


def _save_svg(fig, path: Path) -> None:
    with plt.rc_context({"svg.hashsalt": _SVG_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_mse(curves: list[MseCurve], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    for c in curves:
        ax.plot(range(1, c.mean_mse.size + 1), c.mean_mse_db, label=c.algorithm)
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean channel MSE [dB]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if curves:
        ax.set_title(f"K={curves[0].sparsity}, SNR={curves[0].snr_db:g} dB")
    _save_svg(fig, path)


def _plot_ber(rows, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for es_n0, modulation, algorithm, ber in rows:
        series.setdefault((modulation, algorithm), []).append((es_n0, ber))
    for (modulation, algorithm), points in series.items():
        points.sort()
        xs = [p[0] for p in points]
        ys = [max(p[1], 1e-300) for p in points]
        ax.semilogy(xs, ys, label=f"{modulation} {algorithm}", linewidth=1)
    ax.set_xlabel("Es/N0 [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=6)
    _save_svg(fig, path)


def _plot_stepsize(result: AggregateResult, path: Path) -> None:
    trace = result.step_trace
    fig, ax = plt.subplots(figsize=(7, 5))
    if trace is not None:
        ax.plot(
            abs(trace.errors),
            trace.step_sizes,
            ".",
            markersize=2,
            label=f"{trace.algorithm} (adaptive)",
        )
    cfg = result.config
    ax.axhline(cfg.mu, linestyle="--", color="gray", label=f"fixed step {cfg.mu:g}")
    ax.axhline(
        cfg.mu_max, linestyle=":", color="black", label=f"step ceiling {cfg.mu_max:g}"
    )
    ax.set_xlabel("|a-priori error|")
    ax.set_ylabel("realized step size")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    _save_svg(fig, path)


def emit_results(result: AggregateResult, out_dir: Union[str, Path]) -> list[Path]:
    """Write the CSV tables, the run manifest, and the SVG plots.

    One mse_curves table per scenario (plain ``mse_curves.csv`` when the
    run covered a single scenario, scenario-suffixed file names otherwise),
    one ber_curves table, one stepsize_trace table holding the step-versus-
    |error| samples of the adaptive-step demo run. Empty sections still
    produce header-only CSVs. Returns the list of written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []

    scenarios: dict[tuple[int, float], list[MseCurve]] = {}
    for curve in result.curves:
        scenarios.setdefault((curve.sparsity, curve.snr_db), []).append(curve)

    if not scenarios:
        path = out / "mse_curves.csv"
        _write_csv(path, ["iteration", "algorithm", "mean_mse_db"], [])
        written.append(path)
    else:
        single = len(scenarios) == 1
        for (sparsity, snr_db), curves in scenarios.items():
            stem = (
                "mse_curves"
                if single
                else f"mse_curves_{_scenario_tag(sparsity, snr_db)}"
            )
            rows = []
            for curve in curves:
                db = curve.mean_mse_db
                rows.extend(
                    (i + 1, curve.algorithm, _fmt(db[i])) for i in range(db.size)
                )
            path = out / f"{stem}.csv"
            _write_csv(path, ["iteration", "algorithm", "mean_mse_db"], rows)
            written.append(path)
            svg = out / f"{stem}.svg"
            _plot_mse(curves, svg)
            written.append(svg)

    ber_path = out / "ber_curves.csv"
    _write_csv(
        ber_path,
        ["es_n0_db", "modulation", "algorithm", "ber"],
        [
            (_fmt(es), modulation, algorithm, _fmt(ber))
            for es, modulation, algorithm, ber in result.ber_rows
        ],
    )
    written.append(ber_path)
    if result.ber_rows:
        svg = out / "ber_curves.svg"
        _plot_ber(result.ber_rows, svg)
        written.append(svg)

    step_path = out / "stepsize_trace.csv"
    trace = result.step_trace
    step_rows = []
    if trace is not None:
        step_rows = [
            (i + 1, _fmt(abs(trace.errors[i])), _fmt(trace.step_sizes[i]))
            for i in range(trace.errors.size)
        ]
    _write_csv(step_path, ["iteration", "error", "step"], step_rows)
    written.append(step_path)
    if trace is not None:
        svg = out / "stepsize_trace.svg"
        _plot_stepsize(result, svg)
        written.append(svg)

    manifest = out / "run_manifest.txt"
    config_json = dump_config_json(result.config)
    lines = [
        "sparse-nlms run manifest",
        f"config-hash: {content_hash(config_json.encode())}",
        f"master-seed: {result.config.master_seed}",
        "",
        "first trial seed per cell:",
    ]
    cfg = result.config
    for sparsity in cfg.sparsity_list:
        for snr_db in cfg.snr_db_list:
            for algorithm in cfg.algorithms:
                seed = trial_seed(cfg.master_seed, sparsity, snr_db, algorithm, 0)
                lines.append(
                    f"  K={sparsity} SNR={snr_db:g}dB {algorithm}: {seed}"
                )
    lines += ["", "config:", config_json, ""]
    manifest.write_text("\n".join(lines))
    written.append(manifest)

    return written
