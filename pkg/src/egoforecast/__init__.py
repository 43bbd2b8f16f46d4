"""Egocentric trajectory forecasting toolkit.

Forecasts the future pose track of a camera wearer moving through a
crowd, from three observed input streams: the wearer's own past poses,
surrounding people as seen in the egocentric view, and a polar
occupancy encoding of the scene.  Ships a cascaded cross-attention
transformer, two LSTM baselines, a synthetic crowd/camera data
generator, training and ablation drivers, and a small CLI.
"""

__version__ = "0.1.0"
