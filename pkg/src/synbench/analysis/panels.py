"""Side-by-side audit panels: synthetic image, nearest real neighbor, and the
attribution overlay, written as one PNG row per example."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .attribution import AttributionMap


def save_panel(
    path: str | Path,
    synthetic: np.ndarray,
    nearest_real: np.ndarray,
    attribution: AttributionMap | None = None,
    distance: float | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = 3 if attribution is not None else 2
    fig, axes = plt.subplots(1, cols, figsize=(3 * cols, 3.2))
    titles = ["synthetic", "nearest real" + (f" (d={distance:.3f})" if distance is not None else "")]
    for ax, img, title in zip(axes, [synthetic, nearest_real], titles):
        ax.imshow(img, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
        ax.set_title(title, fontsize=9)
        ax.axis("off")
    if attribution is not None:
        ax = axes[2]
        ax.imshow(nearest_real, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
        ax.imshow(attribution.upsampled(), cmap="Reds", alpha=0.55, vmin=0, vmax=1,
                  interpolation="nearest")
        ax.set_title("attribution", fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
