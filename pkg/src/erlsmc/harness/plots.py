"""PNG panels of a trace: tracking, torque, rotor flux, sliding surfaces."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .trace import Trace, TraceIOError  # noqa: E402


def _panels(tr: Trace):
    t = tr["t"]
    if tr.meta.get("mode", "speed") == "position":
        tracking = ("position", "deg",
                    [("theta", np.degrees(tr["theta"])), ("theta*", np.degrees(tr["theta_ref"]))])
    else:
        tracking = ("speed", "rad/s", [("omega", tr["omega"]), ("omega*", tr["omega_ref"])])
    return t, [
        tracking,
        ("torque", "N*m", [("Te", tr["Te"]), ("TL", tr["TL"])]),
        ("flux", "Wb", [("psi_rd", tr["psird"]), ("psi_rq", tr["psirq"])]),
        ("surfaces", "", [("S_outer", tr["S_outer"]), ("S_d", tr["Sd"]), ("S_q", tr["Sq"])]),
        ("currents", "A", [("isd", tr["isd"]), ("isq", tr["isq"]), ("isq*", tr["isq_ref"])]),
    ]


def emit_plots(tr: Trace, directory: str | Path) -> list[Path]:
    """Write one PNG per panel into ``directory`` and return the paths."""
    directory = Path(directory)
    t, panels = _panels(tr)
    written = []
    for name, unit, series in panels:
        fig, ax = plt.subplots(figsize=(7, 3.2))
        for label, y in series:
            ax.plot(t, y, label=label, linewidth=1)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(f"{name} [{unit}]" if unit else name)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = directory / f"{name}.png"
        try:
            fig.savefig(path, dpi=110)
        except OSError as exc:
            raise TraceIOError(f"cannot write plot {path}: {exc}") from exc
        finally:
            plt.close(fig)
        written.append(path)
    return written
