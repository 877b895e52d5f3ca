"""Feed-forward network stress law on plain arrays: 6 -> 20 (ReLU) -> 6 (linear).

Weights, biases and the input/output min-max scalers are read from the JSON
file named by the ``weights_path`` global, which the host must set before
loading this script. Inputs are scaled into [0, 1], pushed through the two
dense layers, and the output is scaled back to stress units.
"""
import json

import numpy as np

with open(weights_path) as _fh:                      # noqa: F821 - host-provided global
    _bundle = json.load(_fh)

w0 = np.array(_bundle["w0"], dtype=np.float64)
b0 = np.array(_bundle["b0"], dtype=np.float64)
w1 = np.array(_bundle["w1"], dtype=np.float64)
b1 = np.array(_bundle["b1"], dtype=np.float64)
x_min = np.array(_bundle["x_scaler"]["min"], dtype=np.float64)
x_max = np.array(_bundle["x_scaler"]["max"], dtype=np.float64)
y_min = np.array(_bundle["y_scaler"]["min"], dtype=np.float64)
y_max = np.array(_bundle["y_scaler"]["max"], dtype=np.float64)

if w0.shape[1] != 20:
    raise ValueError("hidden layer width must be 20, got %d" % w0.shape[1])
if w0.shape != (6, 20) or b0.shape != (20,) or w1.shape != (20, 6) or b1.shape != (6,):
    raise ValueError("unexpected layer shapes in %r" % weights_path)   # noqa: F821


def neural_prediction(x, w0, w1, b0, b1):
    l0 = x.dot(w0) + b0
    l0 = np.maximum(0, l0)
    l1 = l0.dot(w1) + b1
    return l1


def predict(x):
    x = (np.array(x, dtype=np.float64) - x_min) / (x_max - x_min)
    prediction_output_scaled = neural_prediction(x, w0, w1, b0, b1)
    prediction = prediction_output_scaled * (y_max - y_min) + y_min
    return prediction


def predict_into(strain_view, stress_view):
    stress_view[...] = predict(strain_view)
