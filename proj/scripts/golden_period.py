#!/usr/bin/env python3
# Copyright 2026 The vamo Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent periodicity features for the seed-13 golden window.

Reads period_window_seed13.txt and period_params_seed13.txt and writes
period_features_seed13.txt using numpy's FFT.
"""
import pathlib
import sys

import numpy as np

K_TOP = 2
OUT = 5


def pool(x, q):
    h, d = x.shape
    cycles = h // q
    t = x[h % q:].reshape(cycles, q, d)  # [cycle, phase, channel]
    stats = []
    for c in range(d):
        v = t[:, :, c]
        stats += [v.mean(), v.max(), v.mean(axis=0).max(), v[:, 0].mean()]
    return np.array(stats)


def main(golden):
    tokens = (golden / "period_window_seed13.txt").read_text().split()
    h, d = int(tokens[0]), int(tokens[1])
    x = np.array([float(v) for v in tokens[2:]]).reshape(h, d)
    p = np.array([float(v) for v in (golden / "period_params_seed13.txt").read_text().split()])
    n_in = 4 * d
    w = p[:n_in * OUT].reshape(OUT, n_in)
    b = p[n_in * OUT:]

    amp = np.abs(np.fft.fft(x, axis=0)).mean(axis=1)
    freqs = np.arange(1, h // 2 + 1)
    order = freqs[np.argsort(-amp[freqs], kind="stable")][:K_TOP]
    periods = []
    for f in order:
        q = min(max(h // f, 2), h)
        if q not in [pq for pq, _ in periods]:
            periods.append((q, amp[f]))
    a = np.array([amp_f for _, amp_f in periods])
    weights = np.exp(a - a[0])
    weights /= weights.sum()
    z = sum(wk * (w @ pool(x, q) + b) for wk, (q, _) in zip(weights, periods))
    (golden / "period_features_seed13.txt").write_text("".join(f"{v:.17g}\n" for v in z))


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/golden"))
