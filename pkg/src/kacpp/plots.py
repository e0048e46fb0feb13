"""Optional SVG plots (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def write_plots(outdir: str, res, outputs) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    trials = res.trials or []
    nd = np.sort([t["nearest_distance"] for t in trials if t.get("nearest_distance") is not None])
    if nd.size:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.step(nd, np.arange(1, nd.size + 1) / nd.size, where="post", label="empirical")
        x = np.linspace(0, nd.max(), 400)
        ax.plot(x, -np.expm1(-x / 6), "--", label="1 - exp(-x/6)")
        ax.set_xlabel("n^2 dist(circle, roots)")
        ax.legend()
        fig.tight_layout()
        p = out / f"nearest_cdf_{res.config_hash}.svg"
        fig.savefig(p)
        plt.close(fig)
        written.append(str(p))
    ext = [o.extended for o in outputs if o.summary is not None and o.extended is not None]
    if ext:
        m = np.concatenate(ext)
        fig, axs = plt.subplots(1, 2, figsize=(8, 3.5))
        axs[0].hist(m[:, 1], bins=30)
        axs[0].set_xlabel("n^2 rho")
        s = np.hypot(m[:, 3], m[:, 4])
        axs[1].hist(s, bins=30, density=True)
        g = np.linspace(0, s.max(), 300)
        axs[1].plot(g, 288 * g**3 * np.exp(-12 * g**2), "--")
        axs[1].set_xlabel("|(x', y')|")
        fig.tight_layout()
        p = out / f"intensity_{res.config_hash}.svg"
        fig.savefig(p)
        plt.close(fig)
        written.append(str(p))
    return written
