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
"""Independent forward pass for the seed-42 golden model.

Reads tests/golden/model_seed42.params and writes forward_seed42.txt: the
prediction for an all-ones window (2 rows x 3 state features) with quality 1.
"""
import pathlib
import sys

import numpy as np


def load(path):
    lines = pathlib.Path(path).read_text().split("\n")
    values = np.array([float(v) for v in lines[1:] if v], dtype=np.float64)
    tensors, off = {}, 0
    for spec in lines[0].split(","):
        name, shape = spec.split(":")
        dims = [int(s) for s in shape.split("x")]
        n = int(np.prod(dims))
        tensors[name] = values[off:off + n].reshape(dims)
        off += n
    assert off == len(values)
    return tensors


def main(golden):
    t = load(golden / "model_seed42.params")
    x = np.ones(6)
    h = np.tanh(t["encoder.0.weight"] @ x + t["encoder.0.bias"])
    h = np.append(h, 1.0)
    h = np.tanh(t["head.0.0.weight"] @ h + t["head.0.0.bias"])
    y = t["head.0.1.weight"] @ h + t["head.0.1.bias"]
    (golden / "forward_seed42.txt").write_text(f"{y[0]:.17g}\n")


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/golden"))
