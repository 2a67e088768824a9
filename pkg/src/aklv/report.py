"""Optional matplotlib figures for a run. Imported only when figures are requested."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path):
    # no Software/creation-date metadata so repeated runs are byte-identical
    fig.savefig(path, format="png", dpi=100, metadata={"Software": None})


def orbit_levels(graph, path: Path):
    plt = _pyplot()
    counts: dict[int, int] = {}
    for k in graph.order:
        counts[graph.delta(k)] = counts.get(graph.delta(k), 0) + 1
    xs = sorted(counts)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(xs, [counts[x] for x in xs], color="#4c72b0")
    ax.set_xlabel("delta")
    ax.set_ylabel("Iwahori orbits")
    ax.set_title(f"{graph.spec.name}: orbits per level")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def p_degrees(graph, P, path: Path):
    plt = _pyplot()
    pts: dict[tuple[int, int], int] = {}
    for (eta, u, xi, v), p in P.entries.items():
        if u == v or not p:
            continue
        key = (graph.delta(v) - graph.delta(u), p.max_exp() // 2)
        pts[key] = pts.get(key, 0) + 1
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if pts:
        keys = sorted(pts)
        ax.scatter([k[0] for k in keys], [k[1] for k in keys], s=[12 + 4 * pts[k] for k in keys], color="#dd8452")
    ax.set_xlabel("delta(v) - delta(u)")
    ax.set_ylabel("deg_q P")
    ax.set_title(f"{graph.spec.name}: degrees of P")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def render(out_dir: Path, graph, P=None) -> list[Path]:
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = [fig_dir / "orbit_levels.png"]
    orbit_levels(graph, written[0])
    if P is not None:
        written.append(fig_dir / "p_degrees.png")
        p_degrees(graph, P, written[1])
    return written
