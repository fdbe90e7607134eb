""" Registry of the figure presets shipped in d2dcell/presets """
from pathlib import Path

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"

PRESETS = {
    "fig2a": "Outage at the BS versus xi, R_D = 10 m, alpha_C = 3.5",
    "fig2b": "Successful D2D transmissions versus xi, R_D = 50 m, m = 3",
    "fig3": "Outage at a DRx versus its distance to the BS, m = 3",
    "fig4": "M and tau versus density at QoS 1e-2, rho_D = -70 dBm",
    "fig5": "M and tau versus rho_D at QoS 1e-2, rho_BS = -60 dBm",
}

PRESET_PATHS = {name: PRESET_DIR / f"{name}.yaml" for name in PRESETS}
