"""Random valid sensor designs that fit the default 25 x 60 mm tray."""

import numpy as np

from diwbench.sensor import CircularElectrode, SensorSpec, SerpentinePattern


def random_spec(rng: np.random.Generator) -> SensorSpec:
    if rng.random() < 0.5:
        lw = float(rng.uniform(0.2, 1.0))
        pattern = SerpentinePattern(
            width_mm=float(rng.uniform(lw, 18.0)),
            length_mm=float(rng.uniform(2.0, 45.0)),
            line_width_mm=lw,
            line_separation_mm=float(rng.uniform(0.0, 3.0)),
            pad_side_mm=float(rng.uniform(1.0, 4.0)),
        )
        return SensorSpec.default("resistive", pattern=pattern)
    d = float(rng.uniform(0.6, 20.0))
    side = float(rng.uniform(1.0, 4.0))
    lead = float(rng.uniform(0.0, 29.0 - d / 2 - side))
    return SensorSpec.default("capacitive", pattern=CircularElectrode(diameter_mm=d, lead_length_mm=lead, pad_side_mm=side))
