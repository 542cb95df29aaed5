"""Green functions of the time-fractional equation, from slow diffusion to waves.

Run with ``python3 demos/green_functions.py``. Prints a small table and writes
``green.svg`` next to the script.
"""

import math
from pathlib import Path

import numpy as np

from fracspde import cli, green as gr
from fracspde.green import GreenKind
from fracspde.specfun import mittag_leffler

# The Mittag-Leffler function interpolates between exp (alpha = 1) and cos (alpha = 2).
for alpha in (1.0, 1.5, 2.0):
    print(f"E_{alpha},1(-4) = {mittag_leffler((alpha, 1.0), -4.0): .6f}")
print(f"exp(-4) = {math.exp(-4): .6f}, cos(2) = {math.cos(2): .6f}")

# The primary Green function keeps unit mass for beta < 2 and peaks at the
# origin with height t^(-beta/2) / (2 Gamma(ceil(beta) - beta/2)).
x = np.linspace(-5, 5, 2001)
print("\n beta   mass     G(1, 0)   argmax |x|")
for beta in (0.25, 0.5, 1.0, 1.5, 1.9):
    g = gr.green(beta, GreenKind.PRIMARY, 1.0, x)
    mass = gr.green_total_mass(beta, GreenKind.PRIMARY, 1.0)
    print(f" {beta:4.2f}  {mass:.4f}  {g[1000]:.5f}   {abs(x[np.argmax(g)]):.3f}")

# As beta approaches 2 the profile concentrates on the light cone |x| <= t:
# the L1 distance to the box 1/2 on [-1, 1] shrinks.
for beta in (1.5, 1.75, 1.9, 1.95):
    print(f"L1 distance to wave box, beta={beta}: {cli.wave_box_distance(beta, 1.0, x):.3f}")

svg, _ = cli.plot_green(out=str(Path(__file__).with_name("green.svg")))
print(f"\nwrote green.svg ({len(svg)} bytes)")
