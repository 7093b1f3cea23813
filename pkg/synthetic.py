"""
Synthetic vehicle corpora for desk-scale experiments.

inter/: `boxy` (rectangular cab) vs `rounded` (trapezoidal cab) - distinct silhouettes.
intra/: `sedan` vs `taxi` - identical silhouettes, taxis carry a small bright roof sign.

Every image is 128x96 with a silhouette mask next to it; output is a pure
function of the seed.
"""
import logging
from pathlib import Path

import numpy as np

from evaluation import load_dataset
from imgio import mask_path_for, write_pgm

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 128, 96
BACKGROUND = 50
BODY_INTENSITY = 150
INTENSITY_JITTER = 20
NOISE_AMPLITUDE = 8
POSITION_JITTER = 4
SIZE_JITTER = 0.10

CORPORA = {
    "inter": ("boxy", "rounded"),
    "intra": ("sedan", "taxi"),
}


def _segment_distance(xx, yy, p, q):
    (px, py), (qx, qy) = p, q
    dx, dy = qx - px, qy - py
    t = np.clip(((xx - px) * dx + (yy - py) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return np.hypot(xx - (px + t * dx), yy - (py + t * dy))


def _convex_fill(xx, yy, vertices):
    """Inside test for a convex polygon given in either winding"""
    signs = []
    for (px, py), (qx, qy) in zip(vertices, vertices[1:] + vertices[:1]):
        signs.append((qx - px) * (yy - py) - (qy - py) * (xx - px))
    signs = np.stack(signs)
    return np.all(signs >= 0, axis=0) | np.all(signs <= 0, axis=0)


def _outline(xx, yy, vertices, half_width=1.0):
    near = np.zeros(xx.shape, dtype=bool)
    for p, q in zip(vertices, vertices[1:] + vertices[:1]):
        near |= _segment_distance(xx, yy, p, q) <= half_width
    return near


def render_vehicle(rng, cab="rect", roof_sign=False):
    """Return (pixels uint8, silhouette bool) for one randomized vehicle"""
    yy, xx = np.mgrid[0:HEIGHT, 0:WIDTH].astype(np.float64) + 0.5
    scale = 1.0 + rng.uniform(-SIZE_JITTER, SIZE_JITTER)
    cx = WIDTH / 2 + rng.integers(-POSITION_JITTER, POSITION_JITTER + 1)
    cy = 58 + rng.integers(-POSITION_JITTER, POSITION_JITTER + 1)
    body = BODY_INTENSITY + rng.uniform(-INTENSITY_JITTER, INTENSITY_JITTER)

    body_w, body_h = 84 * scale, 26 * scale
    cab_w, cab_h = 46 * scale, 20 * scale
    top = cy - body_h / 2
    body_poly = [(cx - body_w / 2, top), (cx + body_w / 2, top),
                 (cx + body_w / 2, cy + body_h / 2), (cx - body_w / 2, cy + body_h / 2)]
    roof_half = cab_w / 2 if cab == "rect" else cab_w * 0.3
    cab_poly = [(cx - roof_half, top - cab_h), (cx + roof_half, top - cab_h),
                (cx + cab_w / 2, top), (cx - cab_w / 2, top)]

    canvas = np.full((HEIGHT, WIDTH), float(BACKGROUND))
    body_fill = _convex_fill(xx, yy, body_poly)
    cab_fill = _convex_fill(xx, yy, cab_poly)
    canvas[body_fill] = body
    canvas[cab_fill] = body - 30
    canvas[_outline(xx, yy, cab_poly)] = min(255.0, body + 60)
    silhouette = body_fill | cab_fill

    if roof_sign:
        sign_w, sign_h = 12 * scale, 5 * scale
        sign_poly = [(cx - sign_w / 2, top - cab_h - sign_h), (cx + sign_w / 2, top - cab_h - sign_h),
                     (cx + sign_w / 2, top - cab_h), (cx - sign_w / 2, top - cab_h)]
        sign_fill = _convex_fill(xx, yy, sign_poly)
        canvas[sign_fill] = 250
        silhouette |= sign_fill

    canvas += rng.uniform(-NOISE_AMPLITUDE, NOISE_AMPLITUDE, size=canvas.shape)
    return np.clip(np.rint(canvas), 0, 255).astype(np.uint8), silhouette


def _class_style(corpus, label):
    if corpus == "inter":
        return {"cab": "rect" if label == "boxy" else "trapezoid", "roof_sign": False}
    return {"cab": "rect", "roof_sign": label == "taxi"}


def gen_corpus(out_dir, corpus, n_per_class, seed):
    """Write one corpus (`inter` or `intra`) under out_dir and load it back"""
    out_dir = Path(out_dir)
    rng = np.random.default_rng([seed, list(CORPORA).index(corpus)])
    for label in CORPORA[corpus]:
        class_dir = out_dir / label
        class_dir.mkdir(parents=True, exist_ok=True)
        style = _class_style(corpus, label)
        for index in range(n_per_class):
            pixels, silhouette = render_vehicle(rng, **style)
            image_path = write_pgm(class_dir / f"{label}_{index:03d}.pgm", pixels)
            write_pgm(mask_path_for(image_path), np.where(silhouette, 255, 0))
    logger.debug("wrote %s corpus: %d images per class under %s", corpus, n_per_class, out_dir)
    return load_dataset(out_dir)


def gen_synthetic(out_dir, n_per_class, seed):
    """Both corpora, under out_dir/inter and out_dir/intra"""
    out_dir = Path(out_dir)
    return {corpus: gen_corpus(out_dir / corpus, corpus, n_per_class, seed) for corpus in CORPORA}
