"""Boundary velocity profile: u_x = sin(pi*t) * sin(40*pi*x), u_y = u_z = 0.

Loaded at run time by the host; the only requirement is the ``calculate``
function below, taking the (n, 3) face-centre coordinates and the current
time and returning an (n, 3) array.
"""
import numpy as np


def calculate(face_centres, time):
    # Initialise result
    result = np.zeros(shape=face_centres.shape)
    # Calculate values using the x coordinates and time
    x = face_centres[:, 0]
    result[:, 0] = np.sin(np.pi*time)*np.sin(40*np.pi*x)

    return result
