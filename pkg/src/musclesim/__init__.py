"""Hill-type muscle dynamics with 3CC-r fatigue and muscle-space PD control."""
