"""The three evaluation metrics on a worked example.

For the number 153236 the true count vector is [0,1,1,2,0,1,1,0,0,0].
Against a prediction that misses both 1-counts, per-entry accuracy is 8/10,
RMSE is sqrt(2/10), and MAE is 2/10.  Also shows the regression-to-
classification rounding: nearest integer, clamped into [0, d].
"""

import numpy as np

from digitfreq import accuracy, classify, mae, rmse

y_true = [0, 1, 1, 2, 0, 1, 1, 0, 0, 0]
y_pred = [0, 0, 1, 2, 0, 0, 1, 0, 0, 0]

print(f"accuracy = {accuracy(y_true, y_pred)}   (8 of 10 entries match)")
print(f"rmse     = {rmse(y_true, y_pred):.5f}   (sqrt(2/10) = {np.sqrt(0.2):.5f})")
print(f"mae      = {mae(y_true, y_pred)}")

raw = np.array([[-0.3, 0.4, 1.5, 2.5, 6.4, 5.51, -1.2, 0.49, 3.0, 9.7]])
print(f"\nraw regression outputs: {raw[0].tolist()}")
print(f"classified (d=6):       {classify(raw, d=6)[0].astype(int).tolist()}")
print("negatives clamp to 0, values above d clamp to d, halves round away from zero")
