"""Small reference data sets."""

import numpy as np

from .core import Cohort

# ten players of a mobile puzzle game: (id, playtime h:m:s, censored)
_TEN_PLAYERS = (
    ("gp0", "00:22:51", False),
    ("gp1", "05:55:32", False),
    ("gp2", "00:10:48", False),
    ("gp3", "00:00:13", False),
    ("gp4", "01:50:59", False),
    ("gp5", "02:21:48", False),
    ("gp6", "00:47:27", True),
    ("gp7", "04:45:25", False),
    ("gp8", "11:55:22", False),
    ("gp9", "00:01:53", False),
)


def _seconds(hms):
    h, m, s = (int(x) for x in hms.split(":"))
    return 3600 * h + 60 * m + s


def ten_players(rounded=False):
    """The ten-player sample as a cohort in hours.

    By default durations keep their one-second resolution (gp0 is
    0.380833 h); ``rounded=True`` gives the two-decimal hours instead.
    """
    hours = np.array([_seconds(hms) for _, hms, _ in _TEN_PLAYERS]) / 3600.0
    if rounded:
        hours = np.round(hours, 2)
    return Cohort(
        hours,
        np.array([c for *_, c in _TEN_PLAYERS]),
        "ten_players",
        tuple(pid for pid, *_ in _TEN_PLAYERS),
    )
