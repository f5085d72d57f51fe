"""Figure rendering for the CLI report path.

Each helper takes already-computed table data and writes one figure to a file;
nothing here feeds back into the numerics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_REGION_COLORS = {
    "O1": "tab:blue",
    "O2": "tab:orange",
    "O3": "tab:green",
}


def _color_for(label: str) -> str:
    return _REGION_COLORS.get(label, "tab:red")


def plot_dmt_curve(rows, subset, path) -> str:
    """Diversity order against multiplexing rate for one subset."""
    rs = [r for r, _ in rows]
    ds = [d for _, d in rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(rs, ds, "-", color="tab:blue")
    anchors = [(r, d) for r, d in rows if float(r).is_integer()]
    ax.plot([a for a, _ in anchors], [d for _, d in anchors], "o", color="tab:blue")
    ax.set_xlabel("multiplexing rate r")
    ax.set_ylabel("diversity order d(r)")
    ax.set_title(f"subset {{{','.join(str(u) for u in subset)}}}")
    ax.grid(True, linestyle="--", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_region_grid(rows, path) -> str:
    """Dominant-event partition of the two-user rate plane."""
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    by_label: dict[str, list[tuple[float, float]]] = {}
    for r1, r2, label in rows:
        by_label.setdefault(label, []).append((r1, r2))
    for label in sorted(by_label):
        pts = by_label[label]
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=3,
                   color=_color_for(label), label=label, linewidths=0)
    ax.set_xlabel("r1")
    ax.set_ylabel("r2")
    ax.legend(markerscale=4, fontsize=8)
    ax.set_title("dominant outage event regions")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_rate_regions(regions, path) -> str:
    """Nested multiplexing-rate regions, one polygon per diversity order."""
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    for d, vertices in regions:
        if len(vertices) < 2:
            ax.plot([v[0] for v in vertices], [v[1] for v in vertices], "o",
                    label=f"d={d:g}")
            continue
        closed = list(vertices) + [vertices[0]]
        ax.plot([v[0] for v in closed], [v[1] for v in closed], "-",
                label=f"d={d:g}")
    ax.set_xlabel("r1")
    ax.set_ylabel("r2")
    ax.legend(fontsize=8)
    ax.set_title("rate regions by diversity order")
    ax.grid(True, linestyle="--", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_outage(rows, fit, path) -> str:
    """Outage probability against SNR on log axes, with the fitted slope."""
    dbs = [r[0] for r in rows]
    ps = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogy(dbs, ps, "o-", color="tab:blue", label="estimate")
    if fit is not None:
        anchor = ps[0] if ps[0] > 0 else 1.0
        line = [anchor * 10 ** (-fit.exponent * (db - dbs[0]) / 10) for db in dbs]
        ax.semilogy(dbs, line, "--", color="tab:red",
                    label=f"slope {fit.exponent:.2f}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("outage probability")
    ax.grid(True, which="both", linestyle="--", linewidth=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_error_events(rows, path) -> str:
    """Per-subset error-event frequencies against SNR."""
    series: dict[str, list[tuple[float, float]]] = {}
    for snr_db, label, freq in rows:
        series.setdefault(label, []).append((snr_db, freq))
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for label in sorted(series):
        pts = sorted(series[label])
        ax.semilogy([p[0] for p in pts], [max(p[1], 1e-12) for p in pts], "o-",
                    label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("error-event frequency")
    ax.grid(True, which="both", linestyle="--", linewidth=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_lambda_decay(rows, path) -> str:
    """Lambda against SNR on log axes, one series per subset."""
    series: dict[str, list[tuple[float, float]]] = {}
    for snr_db, label, lam in rows:
        series.setdefault(label, []).append((snr_db, lam))
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for label in sorted(series):
        pts = sorted(series[label])
        ax.semilogy([p[0] for p in pts], [max(p[1], 1e-300) for p in pts], "o-",
                    label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Lambda")
    ax.grid(True, which="both", linestyle="--", linewidth=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_omega(rows, path) -> str:
    """Minimum determinant against implied SNR."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogy([r[0] for r in rows], [r[1] for r in rows], "o-", color="tab:blue")
    ax.set_xlabel("implied SNR (dB)")
    ax.set_ylabel("min |det|^2")
    ax.grid(True, which="both", linestyle="--", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
