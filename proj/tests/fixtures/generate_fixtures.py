#!/usr/bin/env python3
"""Generate the committed COCO-format fixtures and their golden metrics.

Run from this directory:  python3 generate_fixtures.py

Outputs, all committed:
  mixed_gt.json / mixed_dets.json / mixed_golden.json
  ties_gt.json  / ties_dets.json  / ties_golden.json
  edge_gt.json  / edge_dets.json  / edge_golden.json
  clean_gt.json
  sweep_gt.json / sweep_dets.json

Golden values come from cocoeval_ref.py (see its docstring). The script
fails if any fixture lands on a 1-ulp threshold knife edge (literal decimal
thresholds vs linspace-built thresholds must agree to 1e-12), so the
committed goldens are insensitive to that construction detail.

Box coordinates are snapped to a 0.25 grid and scores to 1/128 so every
derived quantity (corner form, w*h areas) is exact in binary floating point.
"""

import json
import random

import numpy as np

import cocoeval_ref as ref


def snap(v, grid=0.25):
    return round(v / grid) * grid


def snap_score(v):
    s = round(v * 128) / 128
    return min(max(s, 1 / 128), 1.0)


class Builder:
    def __init__(self):
        self.images = []
        self.categories = []
        self.annotations = []
        self._next_ann_id = 1

    def image(self, image_id, w=640, h=480):
        self.images.append({"id": image_id, "width": w, "height": h})

    def category(self, cat_id, name):
        self.categories.append({"id": cat_id, "name": name})

    def ann(self, image_id, cat_id, x, y, w, h, area=None, iscrowd=0):
        ann = {
            "id": self._next_ann_id,
            "image_id": image_id,
            "category_id": cat_id,
            "bbox": [x, y, w, h],
            "area": w * h if area is None else area,
            "iscrowd": iscrowd,
        }
        self._next_ann_id += 1
        self.annotations.append(ann)
        return ann

    def dataset(self):
        return {
            "images": self.images,
            "annotations": self.annotations,
            "categories": self.categories,
        }


def det(image_id, cat_id, x, y, w, h, score):
    return {
        "image_id": image_id,
        "category_id": cat_id,
        "bbox": [x, y, w, h],
        "score": score,
    }


def random_box(rng, size_lo, size_hi, img_w=640, img_h=480):
    w = snap(rng.uniform(size_lo, size_hi))
    h = snap(rng.uniform(size_lo, size_hi))
    x = snap(rng.uniform(0, max(img_w - w, 1)))
    y = snap(rng.uniform(0, max(img_h - h, 1)))
    return x, y, w, h


SIZE_BANDS = {"small": (6, 28), "medium": (40, 88), "large": (112, 224)}


def make_mixed(rng):
    b = Builder()
    for i in range(1, 11):
        b.image(i)
    for cid, name in [(1, "widget"), (2, "gadget"), (3, "sprocket"),
                      (5, "gizmo"), (8, "doohickey"), (13, "phantom")]:
        b.category(cid, name)

    gt_cats = [1, 2, 3, 5, 8]  # 13 stays empty; 8 gets no detections
    dets = []
    for img in range(1, 11):
        for band, (lo, hi) in SIZE_BANDS.items():
            n = {"small": 2, "medium": 2, "large": 1}[band]
            for _ in range(n):
                x, y, w, h = random_box(rng, lo, hi)
                cat = rng.choice(gt_cats)
                # A third of the annotations carry a segmentation-style area
                # smaller than the box area.
                area = 0.75 * w * h if rng.random() < 0.33 else None
                ann = b.ann(img, cat, x, y, w, h, area=area)
                if cat == 8:
                    continue  # category with ground truth but no detections
                if rng.random() < 0.85:
                    jx, jy = snap(rng.uniform(-2, 2)), snap(rng.uniform(-2, 2))
                    grow = snap(rng.uniform(-1.5, 1.5))
                    dets.append(det(img, cat, x + jx, y + jy,
                                    max(w + grow, 1.0), max(h + grow, 1.0),
                                    snap_score(rng.uniform(0.2, 1.0))))
                if rng.random() < 0.12:  # duplicate detection on the same box
                    dets.append(det(img, cat, x + snap(rng.uniform(-3, 3)), y,
                                    w, h, snap_score(rng.uniform(0.1, 0.9))))

    # Crowd regions, with detections brushing them.
    crowds = [(2, 1), (5, 2), (9, 3)]
    for img, cat in crowds:
        x, y, w, h = random_box(rng, 150, 280)
        b.ann(img, cat, x, y, w, h, iscrowd=1)
        dets.append(det(img, cat, x + 10, y + 10, snap(w / 3), snap(h / 3),
                        snap_score(rng.uniform(0.3, 0.8))))

    # False positives, including in the empty category 13.
    for _ in range(8):
        img = rng.randint(1, 10)
        cat = rng.choice([1, 2, 3, 5, 13])
        x, y, w, h = random_box(rng, 10, 120)
        dets.append(det(img, cat, x, y, w, h,
                        snap_score(rng.uniform(0.05, 0.95))))

    rng.shuffle(dets)
    return b.dataset(), dets


CYCLE = [(1, 0), (-1, 1), (0, -1), (-1, 0), (0, 1), (1, -1), (1, 1), (-1, -1)]


def make_ties(rng):
    """Score-1.0 detections: ground truth shifted one pixel, cycling
    through the eight directions. Every score ties; ordering discipline is
    what this fixture pins."""
    b = Builder()
    for i in range(1, 9):
        b.image(i)
    for cid in range(1, 5):
        b.category(cid, f"c{cid}")

    for img in range(1, 9):
        for band, (lo, hi) in SIZE_BANDS.items():
            n = {"small": 2, "medium": 1, "large": 1}[band]
            for _ in range(n):
                x, y, w, h = random_box(rng, lo, hi)
                b.ann(img, rng.randint(1, 4), x, y, w, h)
    # two crowds; gt-as-predictions includes them
    for img, cat in [(3, 1), (7, 2)]:
        x, y, w, h = random_box(rng, 180, 300)
        b.ann(img, cat, x, y, w, h, iscrowd=1)

    dets = []
    anns = sorted(b.annotations, key=lambda a: a["id"])
    for i, ann in enumerate(anns):
        dx, dy = CYCLE[i % len(CYCLE)]
        x, y, w, h = ann["bbox"]
        dets.append(det(ann["image_id"], ann["category_id"],
                        x + dx, y + dy, w, h, 1.0))
    return b.dataset(), dets


def make_edge(rng):
    b = Builder()
    for i in range(1, 7):
        b.image(i)
    for cid, name in [(1, "a"), (2, "b"), (7, "crowd-only")]:
        b.category(cid, name)

    dets = []
    # image 1: detections with no ground truth at all
    for k in range(3):
        dets.append(det(1, 1, 50 + 40 * k, 60, 30, 30,
                        snap_score(0.9 - 0.1 * k)))
    # image 2: ground truth with no detections
    b.ann(2, 1, 100, 100, 50, 50)
    b.ann(2, 1, 300, 200, 20, 20)
    # category 7: crowd-only ground truth (npig stays 0 -> sentinel)
    b.ann(3, 7, 50, 50, 200, 200, iscrowd=1)
    b.ann(3, 7, 300, 100, 150, 150, iscrowd=1)
    dets.append(det(3, 7, 80, 80, 60, 60, 0.75))     # inside the crowd
    dets.append(det(3, 7, 500, 400, 40, 40, 0.5))    # clear of the crowd
    # zero-width ground truth plus a real detection near it
    b.ann(4, 1, 200, 200, 0, 40, area=0.0)
    dets.append(det(4, 1, 198, 198, 5, 44, 0.875))
    # zero-width detection against a normal ground truth
    b.ann(4, 2, 100, 100, 60, 60)
    dets.append(det(4, 2, 100, 100, 0, 60, 1.0))
    dets.append(det(4, 2, 101, 101, 58, 58, 0.25))
    # bucket mismatch: box says medium, area field says small
    b.ann(4, 2, 300, 300, 40, 40, area=900.0)
    dets.append(det(4, 2, 300.5, 300.5, 40, 40, 0.625))
    # max_dets truncation: 101 detections, the last would match gt #4
    gts5 = [(20, 20), (120, 20), (220, 20), (320, 20)]
    for x, y in gts5:
        b.ann(5, 1, x, y, 40, 40)
    for k in range(100):
        x = 20 + (k % 10) * 2
        y = 100 + (k // 10) * 6
        dets.append(det(5, 1, x, y, 38, 38, snap_score(1.0 - k / 128)))
    dets.append(det(5, 1, 320, 20, 40, 40, 1 / 128))  # rank 101: truncated off
    # duplicate ground truths and an exactly coincident detection:
    # the equal-IOU tie goes to the later slot, as the reference tool does
    b.ann(6, 2, 150, 150, 64, 64)
    b.ann(6, 2, 150, 150, 64, 64)
    b.ann(6, 2, 400, 150, 64, 64)
    dets.append(det(6, 2, 150, 150, 64, 64, 0.9375))
    dets.append(det(6, 2, 152, 150, 64, 64, 0.875))
    dets.append(det(6, 2, 402, 152, 64, 64, 0.8125))
    return b.dataset(), dets


def make_clean(rng):
    """Crowd-free, tie-free, duplicate-free; gt-as-predictions must score a
    perfect 1.0 everywhere."""
    b = Builder()
    for i in range(1, 7):
        b.image(i, 1280, 960)
    for cid in (1, 2, 3):
        b.category(cid, f"c{cid}")
    for img in range(1, 7):
        slot = 0
        for band, (lo, hi) in SIZE_BANDS.items():
            for cat in (1, 2, 3):
                w = snap(rng.uniform(lo, hi))
                h = snap(rng.uniform(lo, hi))
                x = snap(10 + (slot % 4) * 300 + rng.uniform(0, 40))
                y = snap(10 + (slot // 4) * 300 + rng.uniform(0, 40))
                b.ann(img, cat, x, y, w, h)
                slot += 1
    return b.dataset(), []


def make_sweeppred(rng):
    """Model-prediction-like fixture for sweep property tests: dense small
    boxes, varied scores, a few misses and false positives."""
    b = Builder()
    for i in range(1, 41):
        b.image(i, 800, 600)
    for cid in (1, 2, 3):
        b.category(cid, f"c{cid}")

    dets = []
    for img in range(1, 41):
        plan = [("small", 4), ("medium", 2), ("large", 2)]
        for band, n in plan:
            lo, hi = SIZE_BANDS[band]
            for _ in range(n):
                w = snap(rng.uniform(lo, hi))
                h = snap(rng.uniform(lo, hi))
                x = snap(rng.uniform(0, 800 - hi))
                y = snap(rng.uniform(0, 600 - hi))
                cat = rng.randint(1, 3)
                b.ann(img, cat, x, y, w, h)
                if rng.random() < 0.94:
                    jx = snap(rng.uniform(-1.0, 1.0))
                    jy = snap(rng.uniform(-1.0, 1.0))
                    dets.append(det(img, cat, x + jx, y + jy, w, h,
                                    snap_score(rng.uniform(0.3, 1.0))))
        if rng.random() < 0.3:
            x, y, w, h = random_box(rng, 10, 80, 800, 600)
            dets.append(det(img, rng.randint(1, 3), x, y, w, h,
                            snap_score(rng.uniform(0.05, 0.4))))
    rng.shuffle(dets)
    return b.dataset(), dets


# --- verification helpers ----------------------------------------------------

LITERAL_IOU = np.array([(50 + 5 * i) / 100 for i in range(10)])
LITERAL_REC = np.array([i / 100 for i in range(101)])


def eval_with(dataset, dets, iou_thrs, rec_thrs):
    saved = ref.IOU_THRS, ref.REC_THRS
    ref.IOU_THRS, ref.REC_THRS = iou_thrs, rec_thrs
    try:
        return ref.evaluate(dataset, dets)
    finally:
        ref.IOU_THRS, ref.REC_THRS = saved


def check_knife_edges(name, dataset, dets):
    linspace = eval_with(dataset, dets, ref.IOU_THRS, ref.REC_THRS)
    literal = eval_with(dataset, dets, LITERAL_IOU, LITERAL_REC)
    for key in linspace:
        delta = abs(linspace[key] - literal[key])
        if delta > 1e-12:
            raise SystemExit(
                f"{name}: metric {key} sits on a threshold knife edge "
                f"(delta {delta}); reroll the generator seed")
    return linspace


MASK = (1 << 64) - 1


def splitmix64_at(seed, index):
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


DIRS = [(-1, 0), (1, 0), (0, -1), (0, 1),
        (-1, -1), (1, -1), (-1, 1), (1, 1)]


def shifted(dets, offset, seed):
    out = []
    for ordinal, d in enumerate(dets):
        dx, dy = DIRS[splitmix64_at(seed, ordinal) % 8]
        x, y, w, h = d["bbox"]
        nd = dict(d)
        nd["bbox"] = [x + dx * offset, y + dy * offset, w, h]
        out.append(nd)
    return out


def check_sweep_properties(dataset, dets, seed=1):
    """The committed sweep fixture must exhibit the rank properties the
    acceptance suite asserts: drop(small) >= drop(medium) >= drop(large) at
    offsets >= 1, and drop(AP50) <= drop(mAP) <= drop(AP75) at 1px."""
    base = ref.evaluate(dataset, dets)
    drops = {}
    for offset in (1, 2, 3):
        cur = ref.evaluate(dataset, shifted(dets, offset, seed))
        drops[offset] = {k: 100 * (base[k] - cur[k]) / base[k]
                         for k in base if base[k] > 0}
    for offset, d in drops.items():
        if not (d["ap_small"] >= d["ap_medium"] >= d["ap_large"]):
            raise SystemExit(f"sweep fixture: size-drop ordering fails at "
                             f"offset {offset}: {d}")
    d1 = drops[1]
    if not (d1["ap50"] <= d1["map"] <= d1["ap75"]):
        raise SystemExit(f"sweep fixture: AP50<=mAP<=AP75 drop ordering "
                         f"fails at 1px: {d1}")
    print(f"  sweep drops at 1px: "
          f"mAP {d1['map']:.2f}% ap50 {d1['ap50']:.2f}% "
          f"ap75 {d1['ap75']:.2f}% small {d1['ap_small']:.2f}% "
          f"medium {d1['ap_medium']:.2f}% large {d1['ap_large']:.2f}%")


def dump(obj, name):
    with open(name, "w") as f:
        json.dump(obj, f, separators=(",", ":"), sort_keys=True)
        f.write("\n")


def main():
    rng = random.Random(20260810)
    jobs = {
        "mixed": make_mixed(rng),
        "ties": make_ties(rng),
        "edge": make_edge(rng),
    }
    for name, (dataset, dets) in jobs.items():
        golden = check_knife_edges(name, dataset, dets)
        dump(dataset, f"{name}_gt.json")
        dump(dets, f"{name}_dets.json")
        dump(golden, f"{name}_golden.json")
        print(f"{name}: {len(dataset['annotations'])} gts, {len(dets)} dets")
        print("  golden:", {k: round(v, 6) for k, v in golden.items()})

    clean_ds, _ = make_clean(rng)
    dump(clean_ds, "clean_gt.json")
    clean_self = ref.evaluate(clean_ds, [
        {"image_id": a["image_id"], "category_id": a["category_id"],
         "bbox": a["bbox"], "score": 1.0}
        for a in sorted(clean_ds["annotations"], key=lambda a: a["id"])])
    assert clean_self["map"] == 1.0, clean_self
    print("clean: gt-as-predictions scores", clean_self)

    for attempt in range(1, 33):
        sweep_ds, sweep_dets = make_sweeppred(random.Random(31400 + attempt))
        try:
            check_knife_edges("sweep", sweep_ds, sweep_dets)
        except SystemExit as e:
            print(f"sweep attempt {attempt}: {e}")
            continue
        break
    else:
        raise SystemExit("no knife-edge-free sweep fixture found")
    check_sweep_properties(sweep_ds, sweep_dets)
    dump(sweep_ds, "sweep_gt.json")
    dump(sweep_dets, "sweep_dets.json")
    print(f"sweep: {len(sweep_ds['annotations'])} gts, {len(sweep_dets)} dets"
          f" (attempt {attempt})")


if __name__ == "__main__":
    main()
