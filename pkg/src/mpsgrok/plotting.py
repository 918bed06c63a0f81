"""Static SVG figures of a run, rendered deterministically with matplotlib."""
from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PLOT_FILES = ("accuracy.svg", "entropy.svg", "magnetization.svg", "te.svg", "oinfo.svg")

_STYLE = {
    "svg.hashsalt": "mpsgrok",  # stable element ids
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path: Path, write) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    write(Path(path), buf.getvalue())


def _default_write(path: Path, data: bytes) -> None:
    path.write_bytes(data)


def plot_accuracy(metrics: dict[str, np.ndarray], path, label_names=None, write=_default_write):
    sweeps = metrics["sweep"]
    nl = sum(1 for k in metrics if k.startswith("acc_train_"))
    names = label_names or [str(l) for l in range(nl)]
    with plt.rc_context(_STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
        ax0.plot(sweeps, metrics["acc_train"], label="train", color="k")
        ax0.plot(sweeps, metrics["acc_test"], label="test", color="k", ls="--")
        ax0.set_title("overall")
        for l in range(nl):
            line, = ax1.plot(sweeps, metrics[f"acc_train_{l}"], label=f"{names[l]} train")
            ax1.plot(sweeps, metrics[f"acc_test_{l}"], color=line.get_color(), ls="--",
                     label=f"{names[l]} test")
        ax1.set_title("per class")
        for ax in (ax0, ax1):
            ax.set_xlabel("sweep")
            ax.set_ylim(-0.02, 1.02)
            ax.legend(fontsize=7)
        ax0.set_ylabel("accuracy")
        fig.tight_layout()
        _save(fig, path, write)


def plot_entropy(entropy: np.ndarray, path, write=_default_write):
    """Heat map of bond entropy, sweeps on the horizontal axis."""
    t, nb = entropy.shape
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 3.6))
        im = ax.imshow(entropy.T, origin="lower", aspect="auto", cmap="viridis",
                       extent=(0.5, t + 0.5, -0.5, nb - 0.5), interpolation="nearest")
        ax.grid(False)
        ax.set_xlabel("sweep")
        ax.set_ylabel("bond")
        fig.colorbar(im, ax=ax, label="S (nats)")
        fig.tight_layout()
        _save(fig, path, write)


def plot_magnetization(mag: np.ndarray, path, label_names=None, write=_default_write):
    """One heat-map panel per label of the local magnetization over sweeps and sites."""
    t, nl, n = mag.shape
    names = label_names or [str(l) for l in range(nl)]
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nl, 1, figsize=(6.5, 2.2 * nl), squeeze=False, sharex=True)
        for l, ax in enumerate(axes[:, 0]):
            im = ax.imshow(mag[:, l, :].T, origin="lower", aspect="auto", cmap="coolwarm",
                           vmin=-1, vmax=1, extent=(0.5, t + 0.5, -0.5, n - 0.5),
                           interpolation="nearest")
            ax.grid(False)
            ax.set_ylabel(f"site ({names[l]})")
            fig.colorbar(im, ax=ax)
        axes[-1, 0].set_xlabel("sweep")
        fig.tight_layout()
        _save(fig, path, write)


def plot_te(te_rows, path, label_names=None, write=_default_write):
    """TE against delay for each direction, with a one-sigma band."""
    rows = np.asarray(te_rows, dtype=float)
    dirs = sorted({(int(a), int(b)) for a, b in rows[:, :2]})
    names = label_names
    ncol = 3
    nrow = -(-len(dirs) // ncol)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nrow, ncol, figsize=(9, 2.6 * nrow), squeeze=False)
        for ax, (a, b) in zip(axes.ravel(), dirs):
            sel = rows[(rows[:, 0] == a) & (rows[:, 1] == b)]
            sel = sel[np.argsort(sel[:, 2])]
            tau, mu, sd = sel[:, 2], sel[:, 3], sel[:, 4]
            ax.plot(tau, mu, marker="o", ms=3)
            ax.fill_between(tau, mu - sd, mu + sd, alpha=0.25)
            src = names[a] if names else a
            tgt = names[b] if names else b
            ax.set_title(f"TE {src} -> {tgt}")
            ax.set_xlabel("tau (sweeps)")
        for ax in axes.ravel()[len(dirs):]:
            ax.set_visible(False)
        fig.tight_layout()
        _save(fig, path, write)


def plot_oinfo(oinfo_rows, path, write=_default_write):
    rows = np.asarray(oinfo_rows, dtype=float)
    s, mu, sd, win = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 3.2))
        if win.any():
            ax.axvspan(s[win > 0].min() - 0.5, s[win > 0].max() + 0.5, color="0.9", lw=0)
        ax.axhline(0.0, color="0.4", lw=0.8)
        ax.plot(s, mu, color="C3")
        ax.fill_between(s, mu - sd, mu + sd, color="C3", alpha=0.25)
        ax.set_xlabel("sweep")
        ax.set_ylabel("O-information (nats)")
        fig.tight_layout()
        _save(fig, path, write)
