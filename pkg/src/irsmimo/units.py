"""Decibel and power-unit conversions."""

import numpy as np


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


def dbm_to_watts(value_dbm):
    """Convert dBm to watts, ``P_W = 10^((dBm - 30) / 10)``."""
    return 10.0 ** ((np.asarray(value_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(value_w):
    return 10.0 * np.log10(value_w) + 30.0
