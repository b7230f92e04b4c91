"""
Running the three figure presets from Python rather than the command line.
Each call writes a CSV next to this script.
"""

from pathlib import Path

from udn_meanfield import cli

here = Path(__file__).parent

# %% Rate accuracy across density ratios (small trial count for speed)
spec = cli.preset_spec("fig1", trials=500, output=str(here / "fig1.csv"))
cli.run_experiment(spec)

# %% Energy efficiency over time under three power policies
cli.run_experiment(cli.preset_spec("fig2", output=str(here / "fig2.csv")))

# %% Maximised stationary EE over antennas and BS density
cli.run_experiment(cli.preset_spec("fig3", output=str(here / "fig3.csv")))

# %% The effective configuration can be dumped and reloaded unchanged
import json

cfg_path = here / "fig1.json"
cfg_path.write_text(json.dumps(cli.dump_config(spec), indent=2))
assert cli.load_config(cfg_path) == spec
print("config round trip ok:", cfg_path.name)
