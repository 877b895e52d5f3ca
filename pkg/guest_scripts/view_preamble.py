"""Array views over host memory from a published (address, shape) pair.

After the host publishes ``<name>_address`` and ``<name>_shape`` into the
scope, ``view_from_address`` turns them into a float64 array backed by the
host buffer - no data is copied, and writes through the view land directly
in host memory. The view must not be kept past its lease: once the host
releases the buffer the address may dangle.
"""
import ctypes

import numpy as np


def view_from_address(address, shape):
    size = 1
    for extent in shape:
        size = size * extent
    if size == 0:
        return np.empty(shape, dtype=np.float64)
    pointer = ctypes.cast(int(address), ctypes.POINTER(ctypes.c_double))
    return np.ctypeslib.as_array(pointer, shape=tuple(shape))
