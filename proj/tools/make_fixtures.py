#!/usr/bin/env python3
"""Regenerate the bundled reference images and DEMs under tests/fixtures.

The outputs are committed; rerun only when the fixtures need to change.
"""
import json
import pathlib

import numpy as np
from PIL import Image

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
rng = np.random.default_rng(20240607)


def smooth_noise(h, w, scale, octaves=4):
    out = np.zeros((h, w))
    amp = 1.0
    for o in range(octaves):
        gh, gw = max(2, h // (scale >> o or 1)), max(2, w // (scale >> o or 1))
        coarse = rng.standard_normal((gh + 1, gw + 1))
        ys = np.linspace(0, gh, h)
        xs = np.linspace(0, gw, w)
        y0 = np.floor(ys).astype(int).clip(0, gh - 1)
        x0 = np.floor(xs).astype(int).clip(0, gw - 1)
        fy = (ys - y0)[:, None]
        fx = (xs - x0)[None, :]
        a = coarse[y0][:, x0]
        b = coarse[y0][:, x0 + 1]
        c = coarse[y0 + 1][:, x0]
        d = coarse[y0 + 1][:, x0 + 1]
        out += amp * ((a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy)
        amp *= 0.5
    return out


def landscape(w, h, sky_top, sky_bottom, hills, ground, water=None):
    img = np.zeros((h, w, 3))
    t = np.linspace(0, 1, h)[:, None, None]
    img[:] = np.array(sky_top) * (1 - t) + np.array(sky_bottom) * t
    xs = np.arange(w)
    for i, (base, amp, color) in enumerate(hills):
        ridge = base * h + amp * h * smooth_noise(1, w, 32, 3)[0]
        mask = np.arange(h)[:, None] >= ridge[None, :]
        shade = 0.85 + 0.15 * smooth_noise(h, w, 16, 2)
        img[mask] = (np.array(color)[None, None, :] * shade[..., None])[mask]
    gmask = np.arange(h)[:, None] >= int(0.78 * h)
    gmask = np.broadcast_to(gmask, (h, w))
    img[gmask] = np.array(ground)
    if water is not None:
        wmask = (np.arange(h)[:, None] >= int(0.9 * h)) & (np.abs(xs - w * 0.6)[None, :] < w * 0.25)
        img[wmask] = np.array(water)
    img += rng.normal(0, 4.0, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def speckle(img, top, colors, density, radius=2):
    """Scatter small blobs (flowers, leaves, rocks) below row `top`."""
    h, w, _ = img.shape
    count = int(density * w * (h - top))
    ys = rng.integers(top, h, count)
    xs = rng.integers(0, w, count)
    picks = rng.integers(0, len(colors), count)
    for y, x, k in zip(ys, xs, picks):
        img[max(0, y - radius):y + radius, max(0, x - radius):x + radius] = colors[k]


def snow_caps(img, below, depth, color=(245, 245, 250)):
    """Whiten the top `depth` rows of every column's first non-sky pixel."""
    h, w, _ = img.shape
    for x in range(w):
        col = np.where(below[:, x])[0]
        if col.size:
            img[col[0]:col[0] + depth, x] = color


def sun_disk(img, cx, cy, r, color):
    h, w, _ = img.shape
    yy, xx = np.mgrid[0:h, 0:w]
    m = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    img[m] = color


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    meadow = landscape(240, 160, (90, 150, 220), (200, 225, 245),
                       [(0.35, 0.08, (110, 120, 150)), (0.5, 0.06, (40, 90, 50)),
                        (0.62, 0.05, (70, 130, 60))],
                       (150, 180, 70), water=(40, 90, 160))
    far = np.all(np.abs(meadow.astype(int) - (110, 120, 150)) < 40, axis=2)
    snow_caps(meadow, far, 5)
    speckle(meadow, 112, [(220, 40, 40), (250, 220, 60), (150, 70, 180), (250, 250, 250)], 0.01)
    Image.fromarray(meadow).save(OUT / "meadow.png")

    sunset = landscape(240, 160, (60, 30, 90), (250, 150, 60),
                       [(0.5, 0.1, (90, 50, 80)), (0.65, 0.05, (40, 30, 50))],
                       (120, 70, 40), water=(200, 110, 70))
    sun_disk(sunset, 170, 70, 14, (255, 220, 120))
    speckle(sunset, 104, [(230, 90, 40), (30, 60, 40), (160, 40, 50)], 0.006)
    Image.fromarray(sunset).save(OUT / "sunset.jpg", quality=92)

    autumn = landscape(200, 200, (180, 200, 210), (230, 220, 190),
                       [(0.35, 0.12, (160, 80, 40)), (0.55, 0.08, (200, 140, 30)),
                        (0.7, 0.05, (120, 60, 30))],
                       (90, 100, 50))
    speckle(autumn, 80, [(220, 50, 30), (240, 190, 40), (60, 110, 40)], 0.006)
    Image.fromarray(autumn).save(OUT / "autumn.png")

    # 2x2 crafted image: red, green / blue, white
    tiny = np.array([[[255, 0, 0], [0, 255, 0]], [[0, 0, 255], [255, 255, 255]]], dtype=np.uint8)
    Image.fromarray(tiny).save(OUT / "tiny2x2.png")
    data = (OUT / "tiny2x2.png").read_bytes()
    (OUT / "truncated.png").write_bytes(data[: len(data) // 2])

    n = 128
    yy, xx = np.mgrid[0:n, 0:n] / (n - 1)

    ridge = 1200 + 900 * np.exp(-((xx - 0.5 - 0.15 * np.sin(yy * 6)) ** 2) / 0.02)
    ridge += 40 * smooth_noise(n, n, 16, 3)
    write_asc(OUT / "ridge.asc", ridge, 30.0, nodata_corner=True)

    r = np.hypot(xx - 0.5, yy - 0.5)
    crater = 2000 + 600 * np.exp(-((r - 0.3) ** 2) / 0.006) - 300 * (r < 0.3) * (1 - r / 0.3)
    crater += 15 * smooth_noise(n, n, 16, 3)
    write_asc(OUT / "crater.asc", crater, 10.0)

    canyon = 800 + 500 * np.minimum(1.0, np.abs(xx - 0.5 - 0.1 * np.sin(yy * 9)) / 0.25) ** 1.5
    canyon += 20 * smooth_noise(n, n, 16, 3) + 150 * yy
    write_asc(OUT / "canyon.asc", canyon, 12.5)

    mountain = 500 + 2500 * np.exp(-((xx - 0.45) ** 2 + (yy - 0.55) ** 2) / 0.06)
    mountain += 120 * smooth_noise(n, n, 32, 4)
    lo, hi = float(mountain.min()), float(mountain.max())
    g = np.round((mountain - lo) / (hi - lo) * 65535).astype(np.uint16)
    Image.fromarray(g).save(OUT / "mountain.png")
    (OUT / "mountain.json").write_text(json.dumps(
        {"min_elev": round(lo, 3), "max_elev": round(hi, 3), "cellsize": 30.0}, indent=2) + "\n")


def write_asc(path, z, cellsize, nodata_corner=False):
    rows, cols = z.shape
    lines = [f"ncols {cols}", f"nrows {rows}", "xllcorner 0.0", "yllcorner 0.0",
             f"cellsize {cellsize}", "NODATA_value -9999"]
    z = np.round(z, 2)
    if nodata_corner:
        z[:6, :6] = -9999
    for row in z:
        lines.append(" ".join(f"{v:.2f}" for v in row))
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
