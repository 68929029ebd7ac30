"""Figures reported for the fabricated sensors, used as calibration targets and checks."""

ZERO_RESISTANCE_KOHM = (200.0, 167.0, 140.0, 265.0, 230.0, 180.0, 310.0)
ZERO_CAPACITANCE_PF = (6.97, 6.95, 7.00, 6.90, 6.10, 6.10, 6.95)

# (mean, sample std, relative std in %) of the zero values above
ZERO_RESISTANCE_STATS = (213.14, 59.31, 27.8)
ZERO_CAPACITANCE_STATS = (6.71, 0.42, 6.2)

GAUGE_FACTOR = {"capacitive": 0.95, "resistive": 16.83}
R_SQUARED = {"capacitive": 0.99, "resistive": 0.96}
HYSTERESIS_PCT = {"capacitive": 1.36, "resistive": 21.88}
FAILURE_STRAIN_PCT = {"capacitive": 550.0, "resistive": 600.0}

CYCLIC_MAX_STRAIN_PCT = 300.0
CYCLES = 5
