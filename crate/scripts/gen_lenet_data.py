#!/usr/bin/env python3
"""Train a small LeNet-style digit classifier and export it in the native
graph/weights format, together with a held-out test batch.

Outputs (under data/lenet/):
  graph.json   model graph in the loader's JSON schema
  weights.bin  named tensors: u32 name_len, name, u32 rank, u32 dims, f32 data
  images.bin   200 test images, float32 row-major 28x28x1 each
  labels.bin   200 test labels, one byte each
"""

import json
import struct
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from sklearn.datasets import load_digits

OUT = Path(__file__).resolve().parent.parent / "data" / "lenet"
SEED = 7
N_TEST = 200


def make_dataset():
    digits = load_digits()
    x = torch.tensor(digits.images, dtype=torch.float32).unsqueeze(1) / 16.0
    x = F.interpolate(x, size=(28, 28), mode="bilinear", align_corners=False)
    y = torch.tensor(digits.target, dtype=torch.long)
    g = torch.Generator().manual_seed(SEED)
    perm = torch.randperm(len(y), generator=g)
    x, y = x[perm], y[perm]
    return x[:-N_TEST], y[:-N_TEST], x[-N_TEST:], y[-N_TEST:]


class LeNetSmall(nn.Module):
    def __init__(self):
        super().__init__()
        self.c1 = nn.Conv2d(1, 8, 5, padding=2)
        self.c2 = nn.Conv2d(8, 32, 5, padding=2)
        self.f1 = nn.Linear(32, 32)
        self.f2 = nn.Linear(32, 10)

    def forward(self, x):
        # Conv bias commutes with max-pool, matching the exported graph where
        # the bias is applied to the pooled tensor.
        x = F.relu(F.max_pool2d(self.c1(x), 2))
        x = F.relu(F.max_pool2d(self.c2(x), 2))
        x = x.mean(dim=(2, 3))
        x = F.relu(self.f1(x))
        return self.f2(x)


def train(xtr, ytr, xte, yte):
    torch.manual_seed(SEED)
    model = LeNetSmall()
    opt = torch.optim.Adam(model.parameters(), lr=2e-3)
    sched = torch.optim.lr_scheduler.StepLR(opt, step_size=60, gamma=0.3)
    for epoch in range(150):
        for i in range(0, len(ytr), 64):
            xb, yb = xtr[i : i + 64], ytr[i : i + 64]
            opt.zero_grad()
            loss = F.cross_entropy(model(xb), yb)
            loss.backward()
            opt.step()
        sched.step()
        if epoch % 10 == 9:
            with torch.no_grad():
                acc = (model(xte).argmax(1) == yte).float().mean().item()
            print(f"epoch {epoch}: test acc {acc:.4f}")
    return model


def write_weights(path, tensors):
    with open(path, "wb") as f:
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            f.write(struct.pack("<I", len(name)))
            f.write(name.encode())
            f.write(struct.pack("<I", arr.ndim))
            for d in arr.shape:
                f.write(struct.pack("<I", d))
            f.write(arr.tobytes())


def export(model, xte, yte):
    OUT.mkdir(parents=True, exist_ok=True)
    sd = {k: v.detach().numpy() for k, v in model.state_dict().items()}
    tensors = {
        # Conv filters: torch (co, ci, f, g) -> runtime (f, g, ci, co).
        "w1": sd["c1.weight"].transpose(2, 3, 1, 0),
        "w2": sd["c2.weight"].transpose(2, 3, 1, 0),
        # Linear: torch (out, in) -> runtime (in, out).
        "w3": sd["f1.weight"].T,
        "b3": sd["f1.bias"],
        "w4": sd["f2.weight"].T,
        "b4": sd["f2.bias"],
    }
    # Conv biases ride on identity batch-norm params (gamma=1, mean=0,
    # var=1, epsilon=0) so the add folds into the fused multiplier/offset.
    for idx, key in ((1, "c1.bias"), (2, "c2.bias")):
        c = sd[key].shape[0]
        tensors[f"g{idx}"] = np.ones(c, dtype="<f4")
        tensors[f"b{idx}c"] = sd[key]
        tensors[f"mu{idx}"] = np.zeros(c, dtype="<f4")
        tensors[f"var{idx}"] = np.ones(c, dtype="<f4")
    write_weights(OUT / "weights.bin", tensors)

    def node(op, inputs, output, **attrs):
        n = {"op": op, "inputs": inputs, "output": output}
        if attrs:
            n["attrs"] = attrs
        return n

    graph = {
        "tensors": [
            {"name": "input", "dims": [28, 28, 1]},
            {"name": "w1", "dims": [5, 5, 1, 8]},
            {"name": "w2", "dims": [5, 5, 8, 32]},
            {"name": "w3", "dims": [32, 32]},
            {"name": "b3", "dims": [32]},
            {"name": "w4", "dims": [32, 10]},
            {"name": "b4", "dims": [10]},
            {"name": "flat", "dims": [1, 32]},
        ],
        "nodes": [
            node("Conv", ["input", "w1"], "c1", padding="same"),
            node("MaxPool", ["c1"], "p1", pool=[2, 2]),
            node("FusedBatchNorm", ["p1", "g1", "b1c", "mu1", "var1"], "cb1", epsilon=0.0),
            node("ReLU", ["cb1"], "r1"),
            node("Conv", ["r1", "w2"], "c2", padding="same"),
            node("MaxPool", ["c2"], "p2", pool=[2, 2]),
            node("FusedBatchNorm", ["p2", "g2", "b2c", "mu2", "var2"], "cb2", epsilon=0.0),
            node("ReLU", ["cb2"], "r2"),
            node("AvgPool", ["r2"], "gap", pool=[7, 7]),
            node("Reshape", ["gap"], "flat"),
            node("MatMul", ["flat", "w3"], "m3"),
            node("MatAdd", ["m3", "b3"], "a3"),
            node("ReLU", ["a3"], "r3"),
            node("MatMul", ["r3", "w4"], "m4"),
            node("MatAdd", ["m4", "b4"], "logits"),
            node("ArgMax", ["logits"], "label"),
        ],
        "input": "input",
        "output": "label",
    }
    (OUT / "graph.json").write_text(json.dumps(graph, indent=1))

    imgs = xte.permute(0, 2, 3, 1).numpy().astype("<f4")  # N, 28, 28, 1
    (OUT / "images.bin").write_bytes(imgs.tobytes())
    (OUT / "labels.bin").write_bytes(bytes(int(v) for v in yte))


def main():
    xtr, ytr, xte, yte = make_dataset()
    model = train(xtr, ytr, xte, yte)
    export(model, xte, yte)
    print("exported to", OUT)


if __name__ == "__main__":
    main()
