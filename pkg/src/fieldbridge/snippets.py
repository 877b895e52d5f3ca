"""Inline guest-script fixtures shipped with the host package.

These snippets satisfy the guest calling conventions (``calculate`` for the
boundary profile and the heat step, ``predict``/``predict_into`` for the
constitutive laws) without requiring the external script library. The CLI
uses them as defaults; tests use them as self-contained fixtures.

The analytic law reads the Lame parameters from the guest globals ``lame_1``
(first parameter) and ``lame_2`` (shear modulus); the neural-network law
reads its weight/scaler file location from the guest global ``weights_path``.
"""

INLINE_PROFILE = """\
import numpy as np

def calculate(face_centres, time):
    result = np.zeros(shape=face_centres.shape)
    x = face_centres[:, 0]
    result[:, 0] = np.sin(np.pi * time) * np.sin(40.0 * np.pi * x)
    return result
"""

INLINE_HEAT_STEP = """\
import numpy as np

def calculate(T, gamma):
    N = T.shape[0]
    Nx = int(np.sqrt(N))
    if Nx * Nx != N:
        raise ValueError("temperature field length %d is not a perfect square" % N)
    Ny = Nx
    for i in range(1, Nx - 1):
        for j in range(1, Ny - 1):
            T[i*Ny + j] = \\
                gamma*(T[i*Ny + j + 1] + T[i*Ny + j - 1] \\
                    + T[(i + 1)*Ny + j] + T[(i - 1)*Ny + j] \\
                    - 4*T[i*Ny + j]) + T[i*Ny + j]
    return T
"""

INLINE_ANALYTIC_LAW = """\
import numpy as np

def predict(strain_tensor):
    trace = strain_tensor[:, 0] + strain_tensor[:, 1] + strain_tensor[:, 2]
    stress = np.empty((strain_tensor.shape[0], 6))
    stress[:, 0] = 2.0 * lame_2 * strain_tensor[:, 0] + lame_1 * trace
    stress[:, 1] = 2.0 * lame_2 * strain_tensor[:, 1] + lame_1 * trace
    stress[:, 2] = 2.0 * lame_2 * strain_tensor[:, 2] + lame_1 * trace
    stress[:, 3] = 2.0 * lame_2 * strain_tensor[:, 3]
    stress[:, 4] = 2.0 * lame_2 * strain_tensor[:, 4]
    stress[:, 5] = 2.0 * lame_2 * strain_tensor[:, 5]
    return stress

def predict_into(strain_view, stress_view):
    trace = strain_view[:, 0] + strain_view[:, 1] + strain_view[:, 2]
    stress_view[:, 0] = 2.0 * lame_2 * strain_view[:, 0] + lame_1 * trace
    stress_view[:, 1] = 2.0 * lame_2 * strain_view[:, 1] + lame_1 * trace
    stress_view[:, 2] = 2.0 * lame_2 * strain_view[:, 2] + lame_1 * trace
    stress_view[:, 3] = 2.0 * lame_2 * strain_view[:, 3]
    stress_view[:, 4] = 2.0 * lame_2 * strain_view[:, 4]
    stress_view[:, 5] = 2.0 * lame_2 * strain_view[:, 5]
"""

INLINE_NN_LAW = """\
import json
import numpy as np

with open(weights_path) as _fh:
    _bundle = json.load(_fh)

w0 = np.array(_bundle["w0"], dtype=np.float64)
b0 = np.array(_bundle["b0"], dtype=np.float64)
w1 = np.array(_bundle["w1"], dtype=np.float64)
b1 = np.array(_bundle["b1"], dtype=np.float64)
x_min = np.array(_bundle["x_scaler"]["min"], dtype=np.float64)
x_max = np.array(_bundle["x_scaler"]["max"], dtype=np.float64)
y_min = np.array(_bundle["y_scaler"]["min"], dtype=np.float64)
y_max = np.array(_bundle["y_scaler"]["max"], dtype=np.float64)

if w0.shape != (6, 20) or w1.shape != (20, 6):
    raise ValueError("expected a 6 -> 20 -> 6 layer stack, got %r / %r" % (w0.shape, w1.shape))

def neural_prediction(x, w0, w1, b0, b1):
    l0 = x.dot(w0) + b0
    l0 = np.maximum(0, l0)
    l1 = l0.dot(w1) + b1
    return l1

def predict(x):
    x = (np.asarray(x, dtype=np.float64) - x_min) / (x_max - x_min)
    prediction_output_scaled = neural_prediction(x, w0, w1, b0, b1)
    return prediction_output_scaled * (y_max - y_min) + y_min

def predict_into(strain_view, stress_view):
    stress_view[...] = predict(strain_view)
"""
