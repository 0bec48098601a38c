"""Audio channel selection for multi-channel recordings."""

from __future__ import annotations

import numpy as np

from ..errors import DataError


def channel_energies(channels):
    return [float(np.square(np.asarray(c, dtype=np.float64)).sum()) for c in channels]


def select_channel_index(channel_count, energies=None):
    """6 channels -> fixed third channel; 2 -> highest energy; 1 -> only one."""
    if channel_count == 1:
        return 0
    if channel_count == 6:
        return 2
    if channel_count == 2:
        if energies is None or len(energies) != 2:
            raise DataError("2-channel selection requires per-channel energies")
        return 0 if energies[0] >= energies[1] else 1
    raise DataError(f"unsupported channel layout: {channel_count} channels")


def select_audio_channel(channels):
    return select_channel_index(len(channels), channel_energies(channels))
