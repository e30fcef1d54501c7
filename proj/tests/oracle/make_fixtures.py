"""Regenerates the frozen fixtures under tests/data.

The metric values here come from a separate numpy implementation that
follows the evaluation-toolbox conventions directly, without sharing any
code with the C++ library.
"""

import json
import pathlib
import sys

import numpy as np
from scipy import ndimage

EPS = np.finfo(np.float64).eps
ROOT = pathlib.Path(__file__).resolve().parents[1] / "data"


def write_pgm(path, img):
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(img.tobytes())


# ---------------------------------------------------------------- metrics

def s_object(pred, gt):
    def score(x):
        if x.size == 0:
            return 0.0
        mu = x.mean()
        sd = x.std(ddof=1) if x.size > 1 else 0.0
        return 2.0 * mu / (mu * mu + 1.0 + sd + EPS)

    u = gt.mean()
    return u * score(pred[gt]) + (1 - u) * score(1.0 - pred[~gt])


def ssim_block(p, g):
    n = p.size
    x, y = p.mean(), g.mean()
    vx = ((p - x) ** 2).sum() / (n - 1 + EPS)
    vy = ((g - y) ** 2).sum() / (n - 1 + EPS)
    cxy = ((p - x) * (g - y)).sum() / (n - 1 + EPS)
    a = 4 * x * y * cxy
    b = (x * x + y * y) * (vx + vy)
    if a != 0:
        return a / (b + EPS)
    return 1.0 if b == 0 else 0.0


def s_region(pred, gt):
    h, w = gt.shape
    ys, xs = np.nonzero(gt)
    # 1-based centroid, MATLAB round (half away from zero)
    cx = int(np.floor(np.mean(xs + 1.0) + 0.5))
    cy = int(np.floor(np.mean(ys + 1.0) + 0.5))
    area = float(w * h)
    ws = [cx * cy / area, (w - cx) * cy / area, cx * (h - cy) / area]
    ws.append(1.0 - sum(ws))
    blocks = [
        (slice(0, cy), slice(0, cx)),
        (slice(0, cy), slice(cx, w)),
        (slice(cy, h), slice(0, cx)),
        (slice(cy, h), slice(cx, w)),
    ]
    total = 0.0
    for wt, (sy, sx) in zip(ws, blocks):
        p, g = pred[sy, sx], gt[sy, sx].astype(np.float64)
        if p.size:
            total += wt * ssim_block(p, g)
    return total


def s_measure(pred, gt):
    if not gt.any():
        q = 1.0 - pred.mean()
    elif gt.all():
        q = pred.mean()
    else:
        q = 0.5 * s_object(pred, gt) + 0.5 * s_region(pred, gt)
    return float(min(max(q, 0.0), 1.0))


def e_measure(pred, gt):
    g = gt.astype(np.float64)
    scores = []
    for k in range(256):
        fm = (pred > k / 256.0).astype(np.float64)
        if not gt.any():
            enhanced = 1.0 - fm
        elif gt.all():
            enhanced = fm
        else:
            a = fm - fm.mean()
            b = g - g.mean()
            align = 2 * a * b / (a * a + b * b + EPS)
            enhanced = (align + 1) ** 2 / 4
        scores.append(enhanced.sum() / pred.size)
    return float(min(max(np.mean(scores), 0.0), 1.0))


def nearest_foreground(gt):
    """Index (row, col) of the nearest GT pixel; ties go to the lowest
    column, then the lowest row. Brute force."""
    h, w = gt.shape
    fy, fx = np.nonzero(gt)
    order = np.lexsort((fy, fx))  # sort by column, then row
    fy, fx = fy[order], fx[order]
    yy, xx = np.mgrid[0:h, 0:w]
    d2 = (yy[..., None] - fy) ** 2 + (xx[..., None] - fx) ** 2
    best = np.argmin(d2, axis=-1)  # first minimum in (col,row) order
    return fy[best], fx[best], np.sqrt(d2.min(axis=-1).astype(np.float64))


def gaussian_window(size, sigma):
    r = size // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    k = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return k / k.sum()


def weighted_f(pred, gt):
    if not gt.any():
        return None
    g = gt.astype(np.float64)
    err = np.abs(pred - g)
    ny, nx, dist = nearest_foreground(gt)
    et = err.copy()
    et[~gt] = err[ny, nx][~gt]
    ea = ndimage.correlate(et, gaussian_window(7, 5.0), mode="nearest")
    min_e = err.copy()
    pick = gt & (ea < err)
    min_e[pick] = ea[pick]
    b = np.ones_like(g)
    b[~gt] = 2 - np.exp(np.log(0.5) / 5 * dist[~gt])
    ew = min_e * b
    tpw = gt.sum() - ew[gt].sum()
    fpw = ew[~gt].sum()
    r = 1 - ew[gt].mean()
    p = tpw / (EPS + tpw + fpw)
    q = 2 * r * p / (EPS + r + p)
    return float(min(max(q, 0.0), 1.0))


def dice_iou(pred, gt):
    a = pred >= 0.5
    inter = np.logical_and(a, gt).sum()
    total = a.sum() + gt.sum()
    if total == 0:
        return 1.0, 1.0
    return 2.0 * inter / total, inter / (total - inter)


def metrics(pred_u8, gt_u8):
    pred = pred_u8.astype(np.float64) / 255.0
    gt = gt_u8 > 128
    d, i = dice_iou(pred, gt)
    return {
        "S_alpha": s_measure(pred, gt),
        "F_beta_w": weighted_f(pred, gt),
        "E_phi": e_measure(pred, gt),
        "MAE": float(np.abs(pred - gt).mean()),
        "mDice": float(d),
        "mIoU": float(i),
    }


def random_gt(rng, h, w):
    yy, xx = np.mgrid[0:h, 0:w]
    mask = np.zeros((h, w), bool)
    for _ in range(rng.integers(1, 4)):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        ry, rx = rng.uniform(1.5, h / 2.5), rng.uniform(1.5, w / 2.5)
        mask |= ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1
    if not mask.any():
        mask[h // 2, w // 2] = True
    return mask


def random_pred(rng, gt):
    soft = ndimage.gaussian_filter(gt.astype(np.float64), rng.uniform(0.5, 2.0))
    shift = np.roll(soft, (rng.integers(-2, 3), rng.integers(-2, 3)), axis=(0, 1))
    noisy = shift + rng.normal(0, 0.15, gt.shape)
    return np.clip(np.round(noisy * 255), 0, 255).astype(np.uint8)


def make_metric_corpus():
    rng = np.random.default_rng(20240601)
    out = ROOT / "metrics"
    (out / "gt").mkdir(parents=True, exist_ok=True)
    (out / "pred").mkdir(parents=True, exist_ok=True)
    cases = {}
    for idx in range(20):
        name = f"p{idx:02d}"
        if idx == 0:
            h = w = 8
        else:
            h, w = int(rng.integers(8, 33)), int(rng.integers(8, 33))
        if idx == 17:
            gt = np.zeros((h, w), bool)
            gt[int(rng.integers(0, h)), int(rng.integers(0, w))] = True
        elif idx == 18:
            gt = np.zeros((h, w), bool)
        elif idx == 19:
            gt = np.ones((h, w), bool)
        else:
            gt = random_gt(rng, h, w)
        pred = random_pred(rng, gt)
        if idx == 18:
            pred = rng.integers(0, 256, (h, w)).astype(np.uint8)
        # exercise the >128 cut with off-white / off-black GT pixels
        gt_u8 = np.where(gt, rng.integers(129, 256, gt.shape), rng.integers(0, 129, gt.shape)).astype(np.uint8)
        write_pgm(out / "gt" / f"{name}.pgm", gt_u8)
        write_pgm(out / "pred" / f"{name}.pgm", pred)
        cases[name] = metrics(pred, gt_u8)
    with open(out / "expected.json", "w") as f:
        json.dump(cases, f, indent=1, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------- npy

def fixture_arrays():
    i = lambda n: np.arange(n, dtype=np.float64)
    return {
        "u8_2x3": ((i(6) * 37) % 256).astype(np.uint8).reshape(2, 3),
        "f32_2x2": (i(4) * 0.37 - 1.5).astype(np.float32).reshape(2, 2),
        "f64_3x4x5": (np.sin(i(60)) * 1e3).reshape(3, 4, 5),
        "f64_vec7": i(7) / 3.0,
        "f32_1000x2": (np.cos(i(2000)) / 7).astype(np.float32).reshape(1000, 2),
        "f64_scalar": np.array(np.pi),
        "u8_empty": np.zeros((0, 4), np.uint8),
    }


def describe(a):
    return {
        "dtype": a.dtype.str,
        "shape": list(a.shape),
        "values": [float(v) for v in a.ravel()],
    }


def make_npy_fixtures():
    out = ROOT / "npy"
    out.mkdir(parents=True, exist_ok=True)
    arrays = fixture_arrays()
    for name, a in arrays.items():
        np.save(out / f"{name}.npy", a)
    bundle = {k: arrays[k] for k in ("u8_2x3", "f32_2x2", "f64_3x4x5")}
    np.savez(out / "bundle_stored.npz", **bundle)
    np.savez_compressed(out / "bundle_deflate.npz", **bundle)
    with open(out / "values.json", "w") as f:
        json.dump({k: describe(v) for k, v in arrays.items()}, f, indent=1, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------- image io

def make_io_fixtures():
    from PIL import Image

    out = ROOT / "io"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    rgb = rng.integers(0, 256, (5, 7, 3)).astype(np.uint8)
    Image.fromarray(rgb, "RGB").save(out / "rgb.png")
    r, g, b = (rgb[..., i].astype(np.int64) for i in range(3))
    luma = (299 * r + 587 * g + 114 * b + 500) // 1000
    with open(out / "rgb.ppm", "wb") as f:
        f.write(b"P6\n7 5\n255\n" + rgb.tobytes())
    gray = rng.integers(0, 256, (6, 4)).astype(np.uint8)
    Image.fromarray(gray, "L").save(out / "gray.png")
    smooth = np.tile(np.linspace(0, 255, 16), (16, 1)).astype(np.uint8)
    Image.fromarray(smooth, "L").save(out / "smooth.jpg", quality=95)
    with open(out / "expected.json", "w") as f:
        json.dump(
            {
                "rgb_luma": luma.ravel().tolist(),
                "gray": gray.ravel().tolist(),
                "smooth": smooth.ravel().tolist(),
            },
            f,
        )
        f.write("\n")


if __name__ == "__main__":
    make_metric_corpus()
    make_npy_fixtures()
    make_io_fixtures()
    sys.exit(0)
