"""Linear-elastic stress from strain, evaluated directly in array expressions.

Strain and stress are (n, 6) arrays in [xx, yy, zz, xy, yz, zx] packing.
The host provides the material constants as the globals ``lame_1`` (first
Lame parameter) and ``lame_2`` (shear modulus) before loading this script.
``predict_into`` is the by-reference variant: it assigns into the published
stress view instead of returning a new array.
"""
import numpy as np


def predict(strain_tensor):
    stress = np.zeros([strain_tensor.shape[0], 6])
    stress[:, 0] = 2 * lame_2 * strain_tensor[:, 0] \
        + lame_1 * (strain_tensor[:, 0] \
        + strain_tensor[:, 1] + strain_tensor[:, 2])
    stress[:, 1] = 2 * lame_2 * strain_tensor[:, 1] \
        + lame_1 * (strain_tensor[:, 0] \
        + strain_tensor[:, 1] + strain_tensor[:, 2])
    stress[:, 2] = 2 * lame_2 * strain_tensor[:, 2] \
        + lame_1 * (strain_tensor[:, 0] \
        + strain_tensor[:, 1] + strain_tensor[:, 2])
    stress[:, 3] = 2 * lame_2 * strain_tensor[:, 3]
    stress[:, 4] = 2 * lame_2 * strain_tensor[:, 4]
    stress[:, 5] = 2 * lame_2 * strain_tensor[:, 5]
    return stress


def predict_into(strain_view, stress_view):
    stress_view[...] = predict(strain_view)
