#!/usr/bin/env python3
"""Regenerates the bundled fixtures: input images, CNN weights and goldens.

The goldens come from straightforward numpy re-implementations (zero-padded
correlation, 2x2 floor-mean binning, Moller-Trumbore ray casting, an f32
CNN forward pass), written independently of the Rust kernels.

    python3 fixtures/tools/make_fixtures.py
"""

import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
SEED = 20240531


def write_pgm(path, img, maxval):
    img = np.asarray(img)
    h, w = img.shape
    dtype = ">u1" if maxval < 256 else ">u2"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        f.write(img.astype(dtype).tobytes())


def write_ppm16(path, rgb):
    h, w, _ = rgb.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n65535\n".encode())
        f.write(rgb.astype(">u2").tobytes())


def round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


# ---- images ---------------------------------------------------------------

def scene64(rng):
    y, x = np.mgrid[0:64, 0:64]
    img = 2.0 * x + 1.5 * y
    img += 90.0 * ((x - 40) ** 2 + (y - 22) ** 2 < 12 ** 2)
    img -= 60.0 * ((abs(x - 16) < 7) & (abs(y - 46) < 9))
    img += rng.integers(0, 24, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def ships128(rng):
    y, x = np.mgrid[0:128, 0:128]
    sea = np.stack([6000 + 40 * y, 14000 + 30 * x, 22000 + 20 * (x + y)], axis=-1).astype(np.float64)
    hull = (abs(x - 70) < 22) & (abs(y - 50) < 5)
    sea[hull] = [52000, 50000, 47000]
    wake = (x > 92) & (x < 120) & (abs(y - 50) < 2 + (x - 92) // 6)
    sea[wake] += 9000
    sea += rng.integers(0, 2500, size=sea.shape)
    return np.clip(sea, 0, 65535).astype(np.uint16)


# ---- oracles --------------------------------------------------------------

def correlate_u8(img, kernel):
    k = kernel.shape[0]
    r = k // 2
    h, w = img.shape
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=np.float32)
    padded[r:r + h, r:r + w] = img
    acc = np.zeros((h, w), dtype=np.float32)
    for ky in range(k):
        for kx in range(k):
            acc += padded[ky:ky + h, kx:kx + w] * np.float32(kernel[ky, kx])
    return np.clip(round_half_away(acc), 0, 255).astype(np.uint8)


def bin2x2(img):
    a = img.astype(np.uint32)
    s = a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2]
    return (s // 4).astype(np.uint8)


def read_off(path):
    lines = [l.split("#")[0].strip() for l in path.read_text().splitlines()]
    lines = [l for l in lines if l]
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    verts = np.array([list(map(float, l.split())) for l in lines[2:2 + nv]])
    tris = []
    for l in lines[2 + nv:2 + nv + nf]:
        idx = list(map(int, l.split()))[1:]
        tris += [(idx[0], idx[i], idx[i + 1]) for i in range(1, len(idx) - 1)]
    return verts, tris


def rotation(a, b, c):
    rx = np.array([[1, 0, 0], [0, np.cos(a), -np.sin(a)], [0, np.sin(a), np.cos(a)]])
    ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    rz = np.array([[np.cos(c), -np.sin(c), 0], [np.sin(c), np.cos(c), 0], [0, 0, 1]])
    return rx @ ry @ rz


def raycast(verts, tris, pose, cam):
    """Depth image by casting one ray per pixel centre, camera frame +Z forward."""
    t, rot = pose[:3], pose[3:]
    r = rotation(*rot)
    cam_pts = (verts - t) @ r  # R^T (p - t), row vectors
    out = np.full((cam["height"], cam["width"]), 65535, dtype=np.uint16)
    for y in range(cam["height"]):
        for x in range(cam["width"]):
            d = np.array([(x + 0.5 - cam["cx"]) / cam["fx"], (y + 0.5 - cam["cy"]) / cam["fy"], 1.0])
            d /= np.linalg.norm(d)
            best = np.inf
            for i, j, k in tris:
                v0, v1, v2 = cam_pts[i], cam_pts[j], cam_pts[k]
                if min(v0[2], v1[2], v2[2]) <= 1e-9:
                    continue
                e1, e2 = v1 - v0, v2 - v0
                p = np.cross(d, e2)
                det = e1 @ p
                if abs(det) < 1e-12:
                    continue
                s = -v0
                u = (s @ p) / det
                q = np.cross(s, e1)
                v = (d @ q) / det
                dist = (e2 @ q) / det
                if u < 0 or v < 0 or u + v > 1 or dist <= 0:
                    continue
                if cam["near"] <= dist <= cam["far"]:
                    best = min(best, dist)
            if np.isfinite(best):
                t_ = (best - cam["near"]) / (cam["far"] - cam["near"])
                out[y, x] = int(np.clip(round_half_away(t_ * 65534), 0, 65534))
    return out


CNN_LAYERS = [
    ("conv1.weight", [8, 3, 3, 3]),
    ("conv1.bias", [8]),
    ("conv2.weight", [16, 8, 3, 3]),
    ("conv2.bias", [16]),
    ("dense1.weight", [64, 1936]),
    ("dense1.bias", [64]),
    ("dense2.weight", [1, 64]),
    ("dense2.bias", [1]),
]


def cnn_weights(rng):
    fan_in = [27, 72, 1936, 64]
    tensors = []
    for i, (_, shape) in enumerate(CNN_LAYERS):
        scale = np.sqrt(6.0 / fan_in[i // 2]) if i % 2 == 0 else 0.05
        tensors.append(rng.uniform(-scale, scale, size=shape).astype(np.float16))
    return tensors


def conv3x3_relu(x, w, b):
    c, h, wd = x.shape
    p = np.zeros((c, h + 2, wd + 2), dtype=np.float32)
    p[:, 1:-1, 1:-1] = x
    out = np.zeros((w.shape[0], h, wd), dtype=np.float32)
    for ky in range(3):
        for kx in range(3):
            out += np.einsum("oc,chw->ohw", w[:, :, ky, kx], p[:, ky:ky + h, kx:kx + wd])
    return np.maximum(out + b[:, None, None], 0)


def max_pool(x, k):
    c, h, w = x.shape
    oh = -(-h // k)
    p = np.full((c, oh * k, oh * k), -np.inf, dtype=np.float32)
    p[:, :h, :w] = x
    return p.reshape(c, oh, k, oh, k).max(axis=(2, 4))


def cnn_f32(tensors, patch):
    w = [t.astype(np.float32) for t in tensors]
    a = max_pool(conv3x3_relu(patch, w[0], w[1]), 4)
    a = max_pool(conv3x3_relu(a, w[2], w[3]), 3)
    h = np.maximum(w[4] @ a.reshape(-1) + w[5], 0)
    logit = (w[6] @ h + w[7])[0]
    return float(1.0 / (1.0 + np.exp(-logit)))


# ---- main -----------------------------------------------------------------

def main():
    rng = np.random.default_rng(SEED)
    img = scene64(rng)
    const = np.full((64, 64), 137, dtype=np.uint8)
    write_pgm(ROOT / "images/scene64.pgm", img, 255)
    write_pgm(ROOT / "images/const64.pgm", const, 255)

    write_pgm(ROOT / "golden/binning_scene64.pgm", bin2x2(img), 255)
    write_pgm(ROOT / "golden/binning_const64.pgm", bin2x2(const), 255)

    smooth = np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=np.float32) / 16
    write_pgm(ROOT / "golden/conv3_scene64.pgm", correlate_u8(img, smooth), 255)
    box13 = np.full((13, 13), 1.0 / 169, dtype=np.float32)
    write_pgm(ROOT / "golden/conv13_scene64.pgm", correlate_u8(img, box13), 255)

    verts, tris = read_off(ROOT / "meshes/cube.off")
    cam = {"width": 16, "height": 16, "fx": 40.0, "fy": 40.0, "cx": 8.0, "cy": 8.0, "near": 0.1, "far": 20.0}
    rot = np.array([0.35, -0.25, 0.6])
    centre = np.full(3, 0.5)
    trans = centre - 3.5 * rotation(*rot)[:, 2]
    # The pose crosses the bus as f32; the oracle sees the same rounding.
    pose = np.concatenate([trans, rot]).astype(np.float32).astype(np.float64)
    depth = raycast(verts, tris, pose, cam)
    write_pgm(ROOT / "golden/render_cube16.pgm", depth, 65535)
    (ROOT / "golden/render_cube16.pose.json").write_text(
        json.dumps({"pose": [float(v) for v in pose], "camera": cam}, indent=2) + "\n"
    )

    tensors = cnn_weights(rng)
    (ROOT / "weights").mkdir(exist_ok=True)
    (ROOT / "weights/cnn_tiny.f16").write_bytes(b"".join(t.astype("<f2").tobytes() for t in tensors))
    manifest = {"dtype": "f16le", "layers": [{"name": n, "shape": s} for n, s in CNN_LAYERS]}
    (ROOT / "weights/cnn_tiny.json").write_text(json.dumps(manifest, indent=2) + "\n")

    rgb = ships128(rng)
    write_ppm16(ROOT / "images/ships128.ppm", rgb)
    patch = (rgb.transpose(2, 0, 1).astype(np.float32) / 65535.0)
    scores = [cnn_f32(tensors, patch)]
    (ROOT / "golden/cnn_ships128.json").write_text(json.dumps({"scores": scores}, indent=2) + "\n")
    print("covered pixels:", int((depth != 65535).sum()), "cnn score:", scores[0])


if __name__ == "__main__":
    main()
