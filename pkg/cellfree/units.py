"""
Power and gain conversions.

All helpers accept scalars or numpy arrays and return the same shape.
``-inf`` dB maps to a linear 0, which is how a disabled residual
self-interference level is expressed.
"""
import numpy as np


def db_to_linear(value_db):
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    with np.errstate(divide='ignore'):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def dbm_to_watts(value_dbm):
    return db_to_linear(np.asarray(value_dbm, dtype=float) - 30.0)


def watts_to_dbm(value_w):
    return linear_to_db(value_w) + 30.0
