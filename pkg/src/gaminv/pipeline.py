"""End-to-end experiment: gamma -> invariant -> errors -> template matching.

For every corpus image the uncorrected ("0GC") image is compared with its
synthetically gamma-corrected counterpart ("SGC").  Results are written as
one CSV per table plus PGM visualizations.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from gaminv import fileio
from gaminv.error_metrics import THRESHOLDS, error_report, reliable_points
from gaminv.invariants import gamma_correct, invariant_map, prefilter
from gaminv.matching import correlation_accuracy
from gaminv.synth import synth_image

log = logging.getLogger(__name__)

REPRESENTATIONS = ("intensity", "invariant")


class PipelineError(Exception):
    """A stage failed; ``exit_code`` 2 = bad input, 3 = internal invariant violation."""

    def __init__(self, stage: str, message: str, exit_code: int = 2):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


@dataclass
class RunConfig:
    gamma: float = 0.6
    sigma_pre: tuple[float, ...] = (0.0, 1.0)
    sigma_der: float = 1.0
    kernel_size: int = 7
    kind: str = "m12g"
    requantize: bool = True
    template_sizes: tuple[tuple[int, int], ...] = ((6, 8), (10, 10))
    thresholds: tuple[float, ...] = THRESHOLDS
    images: list[str] = field(default_factory=list)
    synthetic: list[str] = field(default_factory=list)   # "kind:seed" entries
    synth_size: tuple[int, int] = (128, 128)
    out_dir: str = "gaminv_out"

    def validate(self) -> None:
        if not self.gamma > 0:
            raise PipelineError("config", f"gamma must be positive, got {self.gamma}")
        if self.sigma_der <= 0 or any(s < 0 for s in self.sigma_pre):
            raise PipelineError("config", "sigma_der must be positive and sigma_pre non-negative")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise PipelineError("config", f"kernel_size must be odd >= 3, got {self.kernel_size}")
        if any(tn <= 0 or tm <= 0 for tn, tm in self.template_sizes):
            raise PipelineError("config", "template sizes must be positive")
        if not self.images and not self.synthetic:
            raise PipelineError("config", "no images")

    @classmethod
    def from_json(cls, path) -> RunConfig:
        raw = json.loads(Path(path).read_text())
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise PipelineError("config", f"unknown config keys: {sorted(unknown)}")
        for key in ("sigma_pre", "thresholds", "synth_size"):
            if key in raw:
                raw[key] = tuple(raw[key])
        if "template_sizes" in raw:
            raw["template_sizes"] = tuple(tuple(t) for t in raw["template_sizes"])
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


def _sp_tag(sp: float) -> str:
    return f"s{sp:g}".replace(".", "p")


def corpus_names(cfg: RunConfig) -> list[str]:
    names = [Path(p).stem for p in cfg.images]
    names += [s.replace(":", "_") for s in cfg.synthetic]
    if len(set(names)) != len(names):
        raise PipelineError("config", "corpus image names are not unique")
    return names


def plan(cfg: RunConfig) -> list[Path]:
    """Every artifact a successful run writes, in writing order."""
    out = Path(cfg.out_dir)
    files = [out / "config.json", out / "reliable_points.csv", out / "correlation_accuracy.csv"]
    for name in corpus_names(cfg):
        files += [out / f"{name}_0gc.pgm", out / f"{name}_sgc.pgm"]
        for sp in cfg.sigma_pre:
            t = _sp_tag(sp)
            files += [out / f"{name}_inv0gc_{t}.pgm", out / f"{name}_invsgc_{t}.pgm",
                      out / f"{name}_inv0gc_{t}.ginv", out / f"{name}_invsgc_{t}.ginv",
                      out / f"{name}_delta_{t}.pgm"]
            files += [out / f"{name}_rp{e:g}_{t}.pgm" for e in cfg.thresholds]
            for rep in REPRESENTATIONS:
                for tn, tm in cfg.template_sizes:
                    files.append(out / f"{name}_cmcp_{rep}_{t}_{tn}x{tm}.pgm")
    return files


def _load_corpus(cfg: RunConfig):
    w, h = cfg.synth_size
    for path, name in zip(cfg.images, corpus_names(cfg)):
        try:
            yield name, fileio.load_image(path)
        except (OSError, ValueError) as e:
            raise PipelineError("load", f"{path}: {e}") from e
    for entry, name in zip(cfg.synthetic, corpus_names(cfg)[len(cfg.images):]):
        kind, _, seed = entry.partition(":")
        try:
            yield name, synth_image(kind, int(seed or 0), w, h)
        except ValueError as e:
            raise PipelineError("synth", f"{entry}: {e}") from e


def _summary_rows(rows, first_cols):
    vals = np.array([r[first_cols:] for r in rows], dtype=np.float64)
    lead = [""] * (first_cols - 1)
    return [["median", *lead, *np.round(np.median(vals, axis=0), 1)],
            ["mean", *lead, *np.round(vals.mean(axis=0), 1)]]


def run_pipeline(cfg: RunConfig, dry_run: bool = False) -> list[Path]:
    """Run the whole experiment, returning the list of written artifacts."""
    cfg.validate()
    files = plan(cfg)
    if dry_run:
        return files
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2))

    sps = cfg.sigma_pre
    prp_rows, ca_rows = [], []
    inv_kw = dict(sigma_der=cfg.sigma_der, size=cfg.kernel_size)
    for name, img0 in _load_corpus(cfg):
        log.info("processing %s", name)
        try:
            img_g = gamma_correct(img0, cfg.gamma, requantize=cfg.requantize)
        except ValueError as e:
            raise PipelineError("gamma", f"{name}: {e}") from e
        fileio.save_pgm(out / f"{name}_0gc.pgm", img0)
        fileio.save_pgm(out / f"{name}_sgc.pgm", img_g)

        prp_row = [name]
        reps = {}
        for sp in sps:
            t = _sp_tag(sp)
            a = invariant_map(img0, cfg.kind, sigma_pre=sp, **inv_kw)
            b = invariant_map(img_g, cfg.kind, sigma_pre=sp, **inv_kw)
            for m in (a, b):
                vals = m.values.values()
                if vals.size and np.abs(vals).max() > 1.0:
                    raise PipelineError("invariant", f"{name}: map leaves [-1, 1]", exit_code=3)
            fileio.save_pgm(out / f"{name}_inv0gc_{t}.pgm", fileio.invariant_to_gray(a))
            fileio.save_pgm(out / f"{name}_invsgc_{t}.pgm", fileio.invariant_to_gray(b))
            fileio.save_map(out / f"{name}_inv0gc_{t}.ginv", a)
            fileio.save_map(out / f"{name}_invsgc_{t}.ginv", b)

            rep = error_report(b, a, cfg.thresholds)
            fileio.save_pgm(out / f"{name}_delta_{t}.pgm", fileio.scaled_to_gray(rep.abs_err, 2.0))
            for e in cfg.thresholds:
                rp, _ = reliable_points(rep.rel_err, e)
                # reliable points in black
                fileio.save_pgm(out / f"{name}_rp{e:g}_{t}.pgm", fileio.mask_to_gray(rp, on=0))
            prp_row += [round(rep.prp[float(e)], 1) for e in cfg.thresholds]

            reps[("intensity", sp)] = (prefilter(img0, sp, cfg.kernel_size),
                                       prefilter(img_g, sp, cfg.kernel_size))
            reps[("invariant", sp)] = (a.values, b.values)
        prp_rows.append(prp_row)

        # one evaluation border for all conditions so their anchors coincide
        margin = max(f.margin for pair in reps.values() for f in pair)
        for tn, tm in cfg.template_sizes:
            ca_row = [name, f"{tn}x{tm}"]
            for rep_name in REPRESENTATIONS:
                for sp in sps:
                    src, tgt = reps[(rep_name, sp)]
                    r = correlation_accuracy(src, tgt, tn, tm, margin=margin)
                    fileio.save_pgm(out / f"{name}_cmcp_{rep_name}_{_sp_tag(sp)}_{tn}x{tm}.pgm",
                                    fileio.mask_to_gray(r.cmcp_mask, on=255))
                    ca_row.append(round(r.ca, 1))
            ca_rows.append(ca_row)

    header = ["image"] + [f"prp{e:g}_{_sp_tag(sp)}" for sp in sps for e in cfg.thresholds]
    fileio.write_csv(out / "reliable_points.csv", header, prp_rows + _summary_rows(prp_rows, 1))
    header = ["image", "template"] + [f"{'int' if r == 'intensity' else 'inv'}_{_sp_tag(sp)}"
                                      for r in REPRESENTATIONS for sp in sps]
    by_size = {}
    for row in ca_rows:
        by_size.setdefault(row[1], []).append(row)
    summary = []
    for size, rows in by_size.items():
        for s in _summary_rows(rows, 2):
            s[1] = size
            summary.append(s)
    fileio.write_csv(out / "correlation_accuracy.csv", header, ca_rows + summary)

    missing = [f for f in files if not f.exists()]
    if missing:
        raise PipelineError("finalize", f"declared artifacts missing: {missing[:3]}", exit_code=3)
    return files
