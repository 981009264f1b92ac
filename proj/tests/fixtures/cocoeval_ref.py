"""NumPy transcription of the COCO bbox evaluation protocol.

This mirrors the reference tool (pycocotools COCOeval, iouType='bbox',
maxDets=100) step for step: linspace threshold construction, stable
mergesort ordering, the greedy per-image matcher with crowd handling, the
np.spacing(1) precision epsilon, and searchsorted recall sampling. It exists
to generate the golden metric values committed next to the fixtures; the
C++ implementation must reproduce them to well below 1e-6.

Only the standard library and numpy are required.
"""

import numpy as np


IOU_THRS = np.linspace(0.5, 0.95, int(np.round((0.95 - 0.5) / 0.05)) + 1)
REC_THRS = np.linspace(0.0, 1.00, int(np.round((1.00 - 0.0) / 0.01)) + 1)
AREA_RNG = [
    [0.0, 1e5 ** 2],
    [0.0, 32 ** 2],
    [32 ** 2, 96 ** 2],
    [96 ** 2, 1e5 ** 2],
]
MAX_DETS = 100


def bbox_iou(dt_boxes, gt_boxes, iscrowd):
    """maskApi bbIou on xywh boxes; crowd unions over the detection area."""
    ious = np.zeros((len(dt_boxes), len(gt_boxes)))
    for g, (gx, gy, gw, gh) in enumerate(gt_boxes):
        ga = gw * gh
        for d, (dx, dy, dw, dh) in enumerate(dt_boxes):
            da = dw * dh
            w = min(dx + dw, gx + gw) - max(dx, gx)
            if w <= 0:
                continue
            h = min(dy + dh, gy + gh) - max(dy, gy)
            if h <= 0:
                continue
            inter = w * h
            union = da if iscrowd[g] else da + ga - inter
            if union <= 0:
                continue
            ious[d, g] = inter / union
    return ious


def _prepare(dataset, detections):
    """Bucket annotations the way the reference tool's prepare() does.

    Ground-truth ignore == iscrowd. Detections get area = w*h and
    sequential ids starting at 1 (the loadRes convention).
    """
    img_ids = sorted(im["id"] for im in dataset["images"])
    cat_ids = sorted(c["id"] for c in dataset["categories"])
    gts = {}
    for ann in dataset["annotations"]:
        gt = {
            "id": ann["id"],
            "bbox": [float(v) for v in ann["bbox"]],
            "area": float(ann["area"]),
            "iscrowd": int(ann.get("iscrowd", 0)),
        }
        gt["ignore"] = gt["iscrowd"]
        gts.setdefault((ann["image_id"], ann["category_id"]), []).append(gt)
    dts = {}
    for pos, det in enumerate(detections):
        bb = [float(v) for v in det["bbox"]]
        dt = {
            "id": pos + 1,
            "bbox": bb,
            "score": float(det["score"]),
            "area": bb[2] * bb[3],
        }
        dts.setdefault((det["image_id"], det["category_id"]), []).append(dt)
    return img_ids, cat_ids, gts, dts


def _evaluate_img(gt, dt, ious_full, area_rng):
    if len(gt) == 0 and len(dt) == 0:
        return None
    for g in gt:
        g["_ignore"] = 1 if (g["ignore"] or g["area"] < area_rng[0]
                             or g["area"] > area_rng[1]) else 0

    gtind = np.argsort([g["_ignore"] for g in gt], kind="mergesort")
    gt = [gt[i] for i in gtind]
    dtind = np.argsort([-d["score"] for d in dt], kind="mergesort")
    dt = [dt[i] for i in dtind][0:MAX_DETS]
    iscrowd = [int(g["iscrowd"]) for g in gt]
    ious = ious_full[:, gtind] if len(ious_full) > 0 else ious_full

    T = len(IOU_THRS)
    G = len(gt)
    D = len(dt)
    gtm = np.zeros((T, G))
    dtm = np.zeros((T, D))
    gt_ig = np.array([g["_ignore"] for g in gt])
    dt_ig = np.zeros((T, D))
    if len(ious) > 0:
        for tind, t in enumerate(IOU_THRS):
            for dind, d in enumerate(dt):
                iou = min([t, 1 - 1e-10])
                m = -1
                for gind in range(G):
                    if gtm[tind, gind] > 0 and not iscrowd[gind]:
                        continue
                    if m > -1 and gt_ig[m] == 0 and gt_ig[gind] == 1:
                        break
                    if ious[dind, gind] < iou:
                        continue
                    iou = ious[dind, gind]
                    m = gind
                if m == -1:
                    continue
                dt_ig[tind, dind] = gt_ig[m]
                dtm[tind, dind] = gt[m]["id"]
                gtm[tind, m] = d["id"]
    a = np.array([d["area"] < area_rng[0] or d["area"] > area_rng[1]
                  for d in dt]).reshape((1, len(dt)))
    dt_ig = np.logical_or(dt_ig, np.logical_and(dtm == 0, np.repeat(a, T, 0)))
    return {
        "dtMatches": dtm,
        "dtScores": [d["score"] for d in dt],
        "gtIgnore": gt_ig,
        "dtIgnore": dt_ig,
    }


def evaluate(dataset, detections):
    """Full protocol; returns the six headline stats.

    stats order: mAP, AP50, AP75, APsmall, APmedium, APlarge.
    """
    img_ids, cat_ids, gts, dts = _prepare(dataset, detections)

    ious = {}
    for img_id in img_ids:
        for cat_id in cat_ids:
            gt = gts.get((img_id, cat_id), [])
            dt = dts.get((img_id, cat_id), [])
            if len(gt) == 0 or len(dt) == 0:
                ious[img_id, cat_id] = np.zeros((0, 0))
                continue
            inds = np.argsort([-d["score"] for d in dt], kind="mergesort")
            dt_sorted = [dt[i] for i in inds][0:MAX_DETS]
            ious[img_id, cat_id] = bbox_iou(
                [d["bbox"] for d in dt_sorted],
                [g["bbox"] for g in gt],
                [int(g["iscrowd"]) for g in gt],
            )

    eval_imgs = [
        _evaluate_img(gts.get((img_id, cat_id), []),
                      dts.get((img_id, cat_id), []),
                      ious[img_id, cat_id], area_rng)
        for cat_id in cat_ids
        for area_rng in AREA_RNG
        for img_id in img_ids
    ]

    T = len(IOU_THRS)
    R = len(REC_THRS)
    K = len(cat_ids)
    A = len(AREA_RNG)
    I = len(img_ids)
    precision = -np.ones((T, R, K, A))

    for k in range(K):
        for a in range(A):
            E = [eval_imgs[k * A * I + a * I + i] for i in range(I)]
            E = [e for e in E if e is not None]
            if len(E) == 0:
                continue
            dt_scores = np.concatenate(
                [np.array(e["dtScores"][0:MAX_DETS]) for e in E])
            inds = np.argsort(-dt_scores, kind="mergesort")
            dtm = np.concatenate(
                [e["dtMatches"][:, 0:MAX_DETS] for e in E], axis=1)[:, inds]
            dt_ig = np.concatenate(
                [e["dtIgnore"][:, 0:MAX_DETS] for e in E], axis=1)[:, inds]
            gt_ig = np.concatenate([e["gtIgnore"] for e in E])
            npig = np.count_nonzero(gt_ig == 0)
            if npig == 0:
                continue
            tps = np.logical_and(dtm, np.logical_not(dt_ig))
            fps = np.logical_and(np.logical_not(dtm), np.logical_not(dt_ig))
            tp_sum = np.cumsum(tps, axis=1).astype(dtype=np.float64)
            fp_sum = np.cumsum(fps, axis=1).astype(dtype=np.float64)
            for t, (tp, fp) in enumerate(zip(tp_sum, fp_sum)):
                nd = len(tp)
                rc = tp / npig
                pr = tp / (fp + tp + np.spacing(1))
                q = np.zeros((R,))
                pr = pr.tolist()
                q = q.tolist()
                for i in range(nd - 1, 0, -1):
                    if pr[i] > pr[i - 1]:
                        pr[i - 1] = pr[i]
                s_inds = np.searchsorted(rc, REC_THRS, side="left")
                try:
                    for ri, pi in enumerate(s_inds):
                        q[ri] = pr[pi]
                except IndexError:
                    pass
                precision[t, :, k, a] = np.array(q)

    def mean_over(t_sel, a_sel):
        s = precision[t_sel, :, :, a_sel]
        valid = s[s > -1]
        return -1.0 if valid.size == 0 else float(np.mean(valid))

    all_t = slice(None)
    t50 = int(np.where(IOU_THRS == 0.5)[0][0])
    t75 = int(np.where(IOU_THRS == 0.75)[0][0])
    return {
        "map": mean_over(all_t, 0),
        "ap50": mean_over(slice(t50, t50 + 1), 0),
        "ap75": mean_over(slice(t75, t75 + 1), 0),
        "ap_small": mean_over(all_t, 1),
        "ap_medium": mean_over(all_t, 2),
        "ap_large": mean_over(all_t, 3),
    }
