"""Ablation harness: run H-AdaIN over a grid of (levels, overlap) cells on a corpus.

A plan is a JSON document::

    {
      "cells": [[1, 0.0], [30, 0.7]],          # or "levels": [...], "gammas": [...]
      "corpus": [{"reference": "a.png", "generated": "b.png", "label": [1, 0, 3]}],
      "simulate": {"kind": "smooth", "magnitude": 0.5, "seeds": [1, 2],
                   "inputs": ["a.png"], "fixtures": {"count": 5, "height": 256, "width": 256, "seed": 0}},
      "metrics": ["psnr", "ssim", "stat_distance", "seam_score"]
    }

``corpus`` and ``simulate`` may be combined; at least one entry must result.
Relative paths resolve against the plan file's directory. Every cell sees
the same corpus, and the (1, 0) AdaIN control cell is always evaluated.
"""

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, HAdaInError
from .hadain import HAdaInConfig, hadain_correct, hadain_describe
from .image_core import load_image
from .metrics import max_stat_distance, psnr, seam_score, ssim, stat_distance
from .patch_grid import make_grid
from .shift_sim import RetouchLabel, apply_shift, canonical_kind, fixture_image, random_spec

METRICS = ("psnr", "ssim", "stat_distance", "seam_score")
CONTROL_CELL = (1, 0.0)
# cells tested in the original ablation table, control first
DEFAULT_CELLS = ((1, 0.0), (30, 0.0), (100, 0.0), (30, 0.5), (30, 0.9), (30, 0.7))


@dataclass
class CorpusEntry:
    name: str
    reference: object  # path or image array
    generated: object
    label: RetouchLabel = None


@dataclass
class SweepPlan:
    cells: list
    corpus: list
    metrics: tuple = METRICS
    eps: float = 1e-6

    def __post_init__(self):
        if not self.cells:
            raise ConfigError("sweep plan has no (levels, overlap) cells")
        if not self.corpus:
            raise ConfigError("sweep plan has an empty corpus")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad or not self.metrics:
            raise ConfigError(f"unknown or empty metric selection {list(self.metrics)}; choose from {METRICS}")
        cells = []
        for levels, gamma in self.cells:
            cell = (int(levels), float(gamma))
            HAdaInConfig(cell[0], cell[1], self.eps)  # validates
            if cell not in cells:
                cells.append(cell)
        if CONTROL_CELL not in cells:
            cells.insert(0, CONTROL_CELL)
        self.cells = cells
        names = [e.name for e in self.corpus]
        if len(set(names)) != len(names):
            raise ConfigError("corpus entry names must be unique")

    @property
    def levels(self):
        return sorted({c[0] for c in self.cells})

    @property
    def gammas(self):
        return sorted({c[1] for c in self.cells})


def _resolve(path, base):
    return path if os.path.isabs(path) or base is None else os.path.join(base, path)


def _simulated_entries(recipe, base):
    try:
        kind = canonical_kind(recipe["kind"])
        magnitude = float(recipe.get("magnitude", 0.5))
        seeds = [int(s) for s in recipe["seeds"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed simulate recipe: {exc!r}") from None
    grid = recipe.get("grid")
    sources = []
    for p in recipe.get("inputs", []):
        sources.append((os.path.splitext(os.path.basename(p))[0], _resolve(p, base)))
    fx = recipe.get("fixtures")
    if fx:
        h, w, s0 = int(fx.get("height", 256)), int(fx.get("width", 256)), int(fx.get("seed", 0))
        for k in range(int(fx["count"])):
            sources.append((f"fixture{s0 + k}", ("fixture", s0 + k, h, w)))
    label = recipe.get("label")
    label = None if label is None else RetouchLabel.from_list(label)
    entries = []
    for name, src in sources:
        for seed in seeds:
            entries.append(CorpusEntry(f"{name}_s{seed}", src, ("shift", kind, seed, magnitude, grid), label))
    return entries


def plan_from_dict(d, base=None):
    if not isinstance(d, dict) or not d:
        raise ConfigError("sweep plan must be a non-empty JSON object")
    if "cells" in d:
        cells = [tuple(c) for c in d["cells"]]
    else:
        levels, gammas = d.get("levels") or [], d.get("gammas") or []
        if not levels or not gammas:
            raise ConfigError("sweep plan needs non-empty 'levels' and 'gammas' (or 'cells')")
        cells = list(itertools.product(levels, gammas))
    corpus = []
    for i, e in enumerate(d.get("corpus", [])):
        try:
            ref, gen = _resolve(e["reference"], base), _resolve(e["generated"], base)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"corpus entry {i} malformed: {exc!r}") from None
        name = e.get("name") or os.path.splitext(os.path.basename(e["generated"]))[0]
        label = e.get("label")
        corpus.append(CorpusEntry(name, ref, gen, None if label is None else RetouchLabel.from_list(label)))
    if d.get("simulate"):
        corpus.extend(_simulated_entries(d["simulate"], base))
    try:
        return SweepPlan(cells=cells, corpus=corpus, metrics=tuple(d.get("metrics", METRICS)),
                         eps=float(d.get("eps", 1e-6)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed sweep plan: {exc!r}") from None


def load_plan(path):
    try:
        with open(path) as f:
            d = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return plan_from_dict(d, base=os.path.dirname(os.path.abspath(path)))


def default_plan(n_fixtures=5, seeds=(1, 2), kind="smooth_field", magnitude=0.5, size=256):
    return plan_from_dict({
        "cells": [list(c) for c in DEFAULT_CELLS],
        "simulate": {"kind": kind, "magnitude": magnitude, "seeds": list(seeds),
                     "fixtures": {"count": n_fixtures, "height": size, "width": size, "seed": 0}},
    })


def _materialize(src, reference=None):
    if isinstance(src, tuple) and src[0] == "fixture":
        _, seed, h, w = src
        return fixture_image(seed, h, w)
    if isinstance(src, tuple) and src[0] == "shift":
        _, kind, seed, magnitude, grid = src
        _, h, w = reference.shape
        return apply_shift(reference, random_spec(kind, h, w, seed, magnitude, grid=grid))
    if isinstance(src, str):
        return load_image(src)
    return src


def load_pair(entry):
    ref = _materialize(entry.reference)
    gen = _materialize(entry.generated, reference=ref)
    if ref.shape != gen.shape:
        raise HAdaInError(f"{entry.name}: reference {ref.shape[1:]} and generated {gen.shape[1:]} differ in size")
    return ref, gen


def _evaluate(pair, cell, metrics, eps):
    ref, gen = pair
    levels, gamma = cell
    out = hadain_correct(ref, gen, HAdaInConfig(levels, gamma, eps))
    row = {}
    if "psnr" in metrics:
        row["psnr"] = psnr(out, ref)
    if "ssim" in metrics:
        row["ssim"] = ssim(out, ref)
    if "stat_distance" in metrics:
        row["stat_distance"] = max_stat_distance(stat_distance(out, ref))
    if "seam_score" in metrics:
        # seams are measured on the finest grid the cell ran
        row["seam_score"] = seam_score(out, make_grid(ref.shape[1], ref.shape[2], levels, gamma))
    return row


@dataclass
class SweepResult:
    cells: list
    entries: list
    metrics: tuple
    values: dict  # (cell, entry name) -> {metric: value}
    labels: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def complete(self):
        return not self.errors

    def per_image(self, cell, metric):
        return [self.values[(cell, e)][metric] for e in self.entries if (cell, e) in self.values]

    def mean(self, cell, metric):
        vals = self.per_image(cell, metric)
        if len(vals) != len(self.entries) or not vals:
            return None
        # fsum is exactly rounded, so corpus order cannot change the result
        return math.fsum(vals) / len(vals)


def run_sweep(plan, threads=1):
    """Evaluate every cell on every corpus entry.

    Entries that fail to load are reported in ``errors`` and left out; any
    error marks the result incomplete.
    """
    errors = []
    pairs = {}
    for e in plan.corpus:
        try:
            pairs[e.name] = load_pair(e)
        except (OSError, HAdaInError) as exc:
            errors.append({"entry": e.name, "error": str(exc)})
    names = [e.name for e in plan.corpus if e.name in pairs]
    jobs = [(cell, n) for cell in plan.cells for n in names]

    def work(job):
        cell, n = job
        return _evaluate(pairs[n], cell, plan.metrics, plan.eps)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, jobs))
    else:
        rows = [work(j) for j in jobs]
    labels = {e.name: e.label.to_list() for e in plan.corpus if e.label is not None}
    return SweepResult(
        cells=list(plan.cells),
        entries=[e.name for e in plan.corpus],
        metrics=tuple(plan.metrics),
        values=dict(zip(jobs, rows)),
        labels=labels,
        errors=errors,
    )


def _fmt(v):
    return "" if v is None else f"{v:.4f}"


def _r4(v):
    return None if v is None else round(v, 4)


def to_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "gamma", "metric", "mean"] + result.entries)
    for cell in result.cells:
        for m in result.metrics:
            per = [_fmt(result.values[(cell, e)][m]) if (cell, e) in result.values else "" for e in result.entries]
            w.writerow([cell[0], f"{cell[1]:.4f}", m, _fmt(result.mean(cell, m))] + per)
    return buf.getvalue()


def to_json(result):
    doc = {
        "metrics": list(result.metrics),
        "entries": result.entries,
        "cells": [
            {
                "L": cell[0],
                "gamma": _r4(cell[1]),
                "mean": {m: _r4(result.mean(cell, m)) for m in result.metrics},
                "per_image": {
                    e: {m: _r4(result.values[(cell, e)][m]) for m in result.metrics}
                    for e in result.entries if (cell, e) in result.values
                },
            }
            for cell in result.cells
        ],
        "complete": result.complete,
        "errors": result.errors,
    }
    if result.labels:
        doc["labels"] = result.labels
    return json.dumps(doc, indent=2) + "\n"


def format_table(result):
    header = ["L", "gamma"] + list(result.metrics)
    rows = [[str(c[0]), f"{c[1]:.4f}"] + [_fmt(result.mean(c, m)) or "n/a" for m in result.metrics]
            for c in result.cells]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(s.rjust(w) for s, w in zip(r, widths)) for r in [header] + rows]
    return "\n".join(lines) + "\n"


def grid_dump(plan):
    """Patch geometry per cell and distinct corpus image size."""
    sizes = []
    for e in plan.corpus:
        try:
            ref, _ = load_pair(e)
        except (OSError, HAdaInError):
            continue
        if ref.shape[1:] not in sizes:
            sizes.append(ref.shape[1:])
    out = []
    for levels, gamma in plan.cells:
        cfg = HAdaInConfig(levels, gamma, plan.eps)
        for h, w in sizes:
            out.append({"L": levels, "gamma": gamma, "height": h, "width": w,
                        "levels": hadain_describe(cfg, h, w)})
    return out


def write_outputs(result, out_dir, plan=None, dump_grids=False):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as f:
        f.write(to_csv(result))
    with open(os.path.join(out_dir, "results.json"), "w") as f:
        f.write(to_json(result))
    with open(os.path.join(out_dir, "table.txt"), "w") as f:
        f.write(format_table(result))
    if dump_grids and plan is not None:
        with open(os.path.join(out_dir, "grids.json"), "w") as f:
            json.dump(grid_dump(plan), f, indent=2)
            f.write("\n")
