#!/usr/bin/env python3
"""Stroboscopic edge transport in the anomalous and staggered phases.

Drops a wavepacket on one edge site of a ribbon, evolves it for twenty
periods with the exact time-dependent bonds, and maps the edge density
against position and time.  In the anomalous phase the packet marches
around the ring in one direction; in the staggered phase the two gaps
host counter-propagating branches, so the drift is visibly weaker.  The
fitted center-of-mass slope quantifies both.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from floquet_honeycomb.dynamics import chirality_fit, evolve_wavepacket
from floquet_honeycomb.model import LatticeSpec, ModelParams


def main():
    lat = LatticeSpec(60, 17, "ribbon")
    start = lat.site_index(0, lat.nx // 2, 1)  # red site, middle of the bottom edge
    n_periods = 20
    runs = [
        ("anomalous", ModelParams(t_avg=0.25, t_mod=0.25)),
        ("staggered", ModelParams(t_avg=0.4, t_mod=0.25, mass=0.3)),
    ]

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharey=True)
    for ax, (tag, p) in zip(axes, runs):
        h = evolve_wavepacket(start, n_periods, lat, p, frames_per_period=2)
        fit = chirality_fit(h)
        ax.imshow(
            h.rho_edge,
            origin="lower",
            aspect="auto",
            extent=(0.0, h.x_grid[-1], 0.0, n_periods),
            cmap="magma",
            vmax=np.quantile(h.rho_edge, 0.995),
        )
        start_x = h.x_grid[np.argmax(h.rho_edge[0])]
        centers = start_x + (fit.centers - fit.centers[0]) * p.a
        ax.plot(np.mod(centers, h.x_grid[-1]), h.times / p.period, ".", ms=2,
                color="#55c0a8")
        ax.set_title(f"{tag}: drift {fit.value:+.2f} a/period", fontsize=9)
        ax.set_xlabel("x along the bottom edge  (a)")
        print(f"{tag}: chirality {fit.value:+.3f} +- {fit.stderr:.3f} a/period")
    axes[0].set_ylabel("driving periods")
    fig.tight_layout()
    fig.savefig("edge_packet.png", dpi=160)
    print("wrote edge_packet.png")


if __name__ == "__main__":
    main()
