"""Random smooth data and solution generators shared by the tests."""

from viscowave.manufactured import band_limited, random_data, random_state, random_volume, smooth_vertical  # noqa: F401
