"""Explicit finite-difference temperature update on a square grid.

``calculate`` receives the flat cell-centre temperature array (boundary
cells already holding their Dirichlet values) and the stencil coefficient
gamma, and sweeps the interior in place in row-major order. The flat
indexing T[i*Ny + j] assumes a square grid, so the field length must be a
perfect square.
"""
import numpy as np


def calculate(T, gamma):

    # Get number of cells in x and y directions
    N = T.shape[0]
    Nx = int(np.sqrt(N))
    if Nx * Nx != N:
        raise ValueError("temperature field length %d is not a perfect square" % N)
    Ny = Nx

    # Use explicit finite difference method to update the non-boundary cells
    for i in range(1, Nx - 1):
        for j in range(1, Ny - 1):
            T[i*Ny + j] = \
                gamma*(T[i*Ny + j + 1] + T[i*Ny + j - 1] \
                    + T[(i + 1)*Ny + j] + T[(i - 1)*Ny + j] \
                    - 4*T[i*Ny + j]) + T[i*Ny + j]

    return T
