"""Experiment harness: seeded replication, the E1-E8 catalog, CSV emission,
bitmap rendering, and the command-line interface.

Experiments map almost-sure statements about half-plane marginals to
desk-scale trends on finite bands.  A torus sample is restricted to its top
rows (a planar band whose severed wrap column sits at the left/right edges)
and statistics are measured on a centered window at least ``margin`` columns
away from the cut:

* E1  Bernoulli(1/2): frequency that a bottom-row origin reaches L-infinity
      distance R inside a band of height R+1 (torus 4(R+1), margin > R).
* E2  random cluster at the self-dual point, q in {0.25, 0.5, 1, 2, 4}:
      frequency that a size x 8 window carries BOTH a primal and a dual
      left-right crossing (band height 8, margin 8, torus size+16).
* E3  uniform spanning tree: largest cluster fraction of the restricted tree
      on a size x 16 window (band height 16, margin 16, torus size+32).
* E4  uniform odd subgraph: window crossing frequency and largest cluster
      fraction, same geometry as E3 (expected to decay).
* E5  uniform even subgraph control: same statistics on tall size x 2*size
      windows (band height 2*size, margin 8; the measure is 2-dependent so a
      small margin suffices), where its crossing frequency saturates
      (expected NOT to decay).
* E6  arm-alternation audit on 24x24 windows over a mixed model roster.
* E7  exploration halting tails (window 513 x 65, Bernoulli(1/2), n=2).
* E8  trifurcation audit on 16x16 windows at p in {0.4, 0.6, 0.7}.

Every row of the emitted CSV carries (experiment, model, params, size,
replicate, seed, stat, value); rows are sorted before writing, so reruns and
any degree of replicate parallelism produce byte-identical files.  The
summary holds mean and 95% confidence interval per (size, stat): the plain
normal approximation mean +/- 1.96 sqrt(v/n) with v = phat(1-phat) for
indicator statistics and the sample variance otherwise (no continuity
correction; trend checks do not lean on interval exactness).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import clusters, exploration, samplers
from .duality import dual, dual_as_torus_config
from .lattice import (
    BondConfig,
    Region,
    adjacency_csr,
    from_text,
    halfplane_restrict,
    to_text,
)
from . import _kernels

_MASK64 = (1 << 64) - 1

EXPERIMENT_IDS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8")


def _mix64(x: int) -> int:
    """splitmix64 output step (finalizer on x + golden gamma)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, replicate: int, size_index: int) -> int:
    """Fixed 64-bit mixing of (master, replicate, size_index):

        z0 = mix(master)
        z1 = mix(z0 XOR (0x9E3779B97F4A7C15 * (replicate + 1) mod 2^64))
        z2 = mix(z1 XOR (0xC2B2AE3D27D4EB4F * (size_index + 1) mod 2^64))

    with mix = splitmix64's output function.  Identical across platforms;
    collision-free on any realistic replicate/size sweep.
    """
    z = _mix64(master & _MASK64)
    z = _mix64(z ^ ((0x9E3779B97F4A7C15 * (replicate + 1)) & _MASK64))
    z = _mix64(z ^ ((0xC2B2AE3D27D4EB4F * (size_index + 1)) & _MASK64))
    return z


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    sizes: tuple
    replicates: int
    seed: int
    knobs: tuple  # sorted (key, value) pairs; experiment-specific

    def __post_init__(self):
        if self.id not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment id {self.id!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])) or not self.sizes:
            raise ValueError("sizes must be nonempty and strictly increasing")

    def knob(self, key, default=None):
        for k, v in self.knobs:
            if k == key:
                return v
        return default


_DEFAULTS = {
    "E1": dict(sizes=(16, 32, 64, 128), replicates=10000, p=0.5),
    "E2": dict(
        sizes=(16, 32, 64, 128),
        replicates=10000,
        q_values=(0.25, 0.5, 1.0, 2.0, 4.0),
        sweeps=0,  # 0 = per-q auto table; a positive value applies to every q
        band_height=8,
    ),
    "E3": dict(sizes=(16, 32, 64, 128), replicates=10000),
    "E4": dict(sizes=(16, 32, 64, 128), replicates=10000),
    "E5": dict(sizes=(16, 32, 64, 128), replicates=10000),
    "E6": dict(sizes=(24,), replicates=1000),
    "E7": dict(sizes=(256,), replicates=10000, height=64, n=2),
    "E8": dict(sizes=(16,), replicates=10000, p_values=(0.4, 0.6, 0.7)),
}

_KNOB_TYPES = {
    "p": float,
    "sweeps": int,
    "band_height": int,
    "height": int,
    "n": int,
    "q_values": "floats",
    "p_values": "floats",
}


def build_experiment(conf: dict) -> ExperimentSpec:
    """Assemble an ExperimentSpec from flat config keys, rejecting unknown
    keys by name."""
    conf = dict(conf)
    exp_id = conf.pop("experiment", None)
    if exp_id not in EXPERIMENT_IDS:
        raise ValueError(f"config key 'experiment' must be one of {EXPERIMENT_IDS}")
    defaults = dict(_DEFAULTS[exp_id])
    sizes = tuple(defaults.pop("sizes"))
    replicates = defaults.pop("replicates")
    seed = 0
    knobs = defaults
    if "sizes" in conf:
        sizes = tuple(int(s) for s in str(conf.pop("sizes")).split(","))
    if "replicates" in conf:
        replicates = int(conf.pop("replicates"))
    if "seed" in conf:
        seed = int(conf.pop("seed"))
    for key in list(conf):
        if key not in knobs:
            raise ValueError(f"unknown config key for {exp_id}: {key!r}")
        typ = _KNOB_TYPES[key]
        raw = conf.pop(key)
        if typ == "floats":
            knobs[key] = tuple(float(v) for v in str(raw).split(","))
        else:
            knobs[key] = typ(raw)
    knob_pairs = tuple(sorted(knobs.items()))
    return ExperimentSpec(exp_id, sizes, replicates, seed, knob_pairs)


def parse_config(text: str) -> dict:
    """Flat key=value lines; # starts a comment; blank lines ignored."""
    conf = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        conf[key.strip()] = val.strip()
    return conf


# ---------------------------------------------------------------------------
# Window plumbing.


def slice_columns(band: BondConfig, x0: int, x1: int) -> BondConfig:
    """Sub-box of a band config spanning columns x0..x1 (inclusive)."""
    region = band.region
    if region.kind != "box":
        raise ValueError("column slice is defined on boxes")
    w, h = region.width, region.height
    if not (0 <= x0 <= x1 <= w - 1):
        raise ValueError("bad column range")
    ww = x1 - x0 + 1
    sub = Region.box(ww, h, region.boundary)
    bits = np.zeros(sub.edge_count, dtype=np.uint8)
    for y in range(h):
        src = band.open[y * (w - 1) + x0 : y * (w - 1) + x0 + (ww - 1)]
        bits[y * (ww - 1) : y * (ww - 1) + (ww - 1)] = src
    up0 = h * (ww - 1)
    src_up0 = h * (w - 1)
    for y in range(h - 1):
        bits[up0 + y * ww : up0 + (y + 1) * ww] = band.open[
            src_up0 + y * w + x0 : src_up0 + y * w + x0 + ww
        ]
    return BondConfig(sub, bits)


def _torus_band(config: BondConfig, band_height: int) -> BondConfig:
    return halfplane_restrict(config, config.region.n - band_height)


def _dual_band(config: BondConfig, band_height: int) -> BondConfig:
    return halfplane_restrict(
        dual_as_torus_config(dual(config)), config.region.n - band_height
    )


# ---------------------------------------------------------------------------
# Per-replicate experiment bodies: list of (model, params, stat, value).


def _e1_rows(size, seed, knobs):
    p = knobs["p"]
    radius = size
    n_t = 4 * (radius + 1)
    spec = samplers.SampleSpec(samplers.BERNOULLI, Region.torus(n_t), seed, p=p)
    band = _torus_band(samplers.sample(spec), radius + 1)
    region = band.region
    indptr, adj_v, adj_e = adjacency_csr(region)
    visited = np.zeros(region.vertex_count, dtype=np.uint8)
    queue = np.empty(region.vertex_count, dtype=np.int32)
    hit = _kernels.one_arm(
        region.width,
        region.height,
        indptr,
        adj_v,
        adj_e,
        band.open,
        n_t // 2,
        radius,
        visited,
        queue,
    )
    return [("bernoulli", f"p={p:g}", "one_arm", float(hit))]


_E2_AUTO_SWEEPS = {0.25: 2, 0.5: 2, 1.0: 2, 2.0: 6, 4.0: 8}


def _e2_sweeps(knobs, q):
    """Sweep budget per q.  Heat-bath cost at the self-dual point rises
    steeply for q < 1 (sparse near-tree clusters make the exact connectivity
    queries expensive), while q > 1 needs more sweeps to densify from the
    all-closed start; the auto table balances both so the full ladder stays
    inside the desk-scale budget.  Oracle tests validate the same chain at
    equilibrium depth on small regions."""
    if knobs["sweeps"]:
        return knobs["sweeps"]
    if q in _E2_AUTO_SWEEPS:
        return _E2_AUTO_SWEEPS[q]
    return 2 if q <= 1 else min(16, max(4, int(round(2 * q))))


def _e2_rows(size, seed, knobs, q):
    hband = knobs["band_height"]
    margin = hband
    n_t = size + 2 * margin
    p = samplers.p_sd(q)
    sweeps = _e2_sweeps(knobs, q)
    spec = samplers.SampleSpec(
        samplers.RANDOM_CLUSTER,
        Region.torus(n_t),
        seed,
        p=p,
        q=q,
        sweeps=sweeps,
        init=samplers.ALL_CLOSED,
    )
    cfg = samplers.sample(spec)
    window = slice_columns(_torus_band(cfg, hband), margin, margin + size - 1)
    dwindow = slice_columns(_dual_band(cfg, hband), margin, margin + size - 1)
    primal = clusters.crossing(window, clusters.LEFT_RIGHT)
    dualx = clusters.crossing(dwindow, clusters.LEFT_RIGHT)
    params = f"p=p_sd;q={q:g};sweeps={sweeps}"
    return [
        ("random_cluster", params, "primal_crossing", float(primal)),
        ("random_cluster", params, "dual_crossing", float(dualx)),
        ("random_cluster", params, "coexistence", float(primal and dualx)),
    ]


def _band_window(size, seed, model):
    """E3/E4 geometry: a band of fixed height 16 (margin 16, torus size+32),
    window size x 16.  Decay statistics sharpen as the window outgrows the
    fixed height."""
    margin = 16
    hband = 16
    n_t = size + 2 * margin
    spec = samplers.SampleSpec(model, Region.torus(n_t), seed)
    cfg = samplers.sample(spec)
    return slice_columns(_torus_band(cfg, hband), margin, margin + size - 1)


def _e3_rows(size, seed, knobs):
    window = _band_window(size, seed, samplers.UST)
    frac = float(clusters.largest_cluster_fraction(window))
    return [("ust", "", "largest_fraction", frac)]


def _e4_rows(size, seed, knobs):
    window = _band_window(size, seed, samplers.UNIFORM_ODD)
    frac = float(clusters.largest_cluster_fraction(window))
    cross = clusters.crossing(window, clusters.LEFT_RIGHT)
    return [
        ("uniform_odd", "", "crossing", float(cross)),
        ("uniform_odd", "", "largest_fraction", frac),
    ]


def _e5_rows(size, seed, knobs):
    # Control geometry: tall self-similar windows (size x 2*size) keep the
    # percolating even subgraph's crossing frequency saturated at every rung,
    # so non-decay is visible; the margin can stay small because the measure
    # is 2-dependent, making the influence of the severed wrap column local.
    hband = 2 * size
    margin = 8
    n_t = 2 * size + 2 * margin
    spec = samplers.SampleSpec(samplers.UNIFORM_EVEN, Region.torus(n_t), seed)
    cfg = samplers.sample(spec)
    m0 = (n_t - size) // 2
    window = slice_columns(_torus_band(cfg, hband), m0, m0 + size - 1)
    frac = float(clusters.largest_cluster_fraction(window))
    cross = clusters.crossing(window, clusters.LEFT_RIGHT)
    return [
        ("uniform_even", "", "crossing", float(cross)),
        ("uniform_even", "", "largest_fraction", frac),
    ]


_E6_ROSTER = (
    ("bernoulli", dict(p=0.5)),
    ("bernoulli", dict(p=0.35)),
    ("bernoulli", dict(p=0.65)),
    ("uniform_even", {}),
    ("ust", {}),
    ("random_cluster", dict(p=samplers.p_sd(2.0), q=2.0, sweeps=16)),
)


def _e6_rows(size, seed, knobs, replicate):
    model, kw = _E6_ROSTER[replicate % len(_E6_ROSTER)]
    region = Region.box(size, size)
    spec = samplers.SampleSpec(model, region, seed, **kw)
    window = samplers.sample(spec)
    third = size // 3
    inner = (third, third, size - third - 1, size - third - 1)
    seq = clusters.arms(window, inner)
    ok = seq.alternation_ok()
    params = ";".join(f"{k}={v:g}" for k, v in sorted(kw.items()))
    return [(model, params, "alternation_violation", float(not ok))]


def _e7_rows(size, seed, knobs):
    height = knobs["height"]
    n = knobs["n"]
    region = Region.box(2 * size + 1, height + 1)
    spec = samplers.SampleSpec(samplers.BERNOULLI, region, seed, p=0.5)
    cfg = samplers.sample(spec)
    trace = exploration.explore(cfg, n)
    rows = [
        ("bernoulli", "p=0.5", "halt_index", float(trace.halt_index)),
        (
            "bernoulli",
            "p=0.5",
            "window_exhausted",
            float(trace.halt_reason == exploration.WINDOW_EXHAUSTED),
        ),
        ("bernoulli", "p=0.5", "growth_ok", float(trace.growth_ok())),
    ]
    if trace.halt_reason == exploration.CUT_OFF:
        verdict = clusters.tenuous_check(cfg, n, trace.target)
        sound = verdict != clusters.NON_TENUOUS_PROXY
        rows.append(("bernoulli", "p=0.5", "cutoff_sound", float(sound)))
        rows.append(("bernoulli", "p=0.5", "cutoff", 1.0))
    else:
        rows.append(("bernoulli", "p=0.5", "cutoff", 0.0))
    return rows


def _e8_rows(size, seed, knobs, p):
    region = Region.box(size, size)
    spec = samplers.SampleSpec(samplers.BERNOULLI, region, seed, p=p)
    cfg = samplers.sample(spec)
    total, per_cluster = clusters.trifurcation_count(cfg)
    lab = clusters.label(cfg)
    violations = 0
    for cid, t in per_cluster.items():
        b = int(lab.boundary_counts[cid])
        if t > max(0, b - 2):
            violations += 1
    params = f"p={p:g}"
    return [
        ("bernoulli", params, "trifurcations", float(total)),
        ("bernoulli", params, "bk_violation", float(violations > 0)),
    ]


def _variants(spec: ExperimentSpec):
    """Model-parameter variants swept inside one experiment (q or p lists)."""
    if spec.id == "E2":
        return [("q", q) for q in spec.knob("q_values")]
    if spec.id == "E8":
        return [("p", p) for p in spec.knob("p_values")]
    return [(None, None)]


def _replicate_rows(spec: ExperimentSpec, size_index: int, size: int, replicate: int):
    knobs = dict(spec.knobs)
    out = []
    for vi, (vname, vval) in enumerate(_variants(spec)):
        master = derive_seed(spec.seed, vi, 0) if vname else spec.seed
        seed = derive_seed(master, replicate, size_index)
        if spec.id == "E1":
            rows = _e1_rows(size, seed, knobs)
        elif spec.id == "E2":
            rows = _e2_rows(size, seed, knobs, vval)
        elif spec.id == "E3":
            rows = _e3_rows(size, seed, knobs)
        elif spec.id == "E4":
            rows = _e4_rows(size, seed, knobs)
        elif spec.id == "E5":
            rows = _e5_rows(size, seed, knobs)
        elif spec.id == "E6":
            rows = _e6_rows(size, seed, knobs, replicate)
        elif spec.id == "E7":
            rows = _e7_rows(size, seed, knobs)
        else:
            rows = _e8_rows(size, seed, knobs, vval)
        for model, params, stat, value in rows:
            out.append((spec.id, model, params, size, replicate, seed, stat, value))
    return out


def _chunk_worker(args):
    spec, size_index, size, rep_lo, rep_hi = args
    rows = []
    for rep in range(rep_lo, rep_hi):
        rows.extend(_replicate_rows(spec, size_index, size, rep))
    return rows


ROWS_HEADER = "experiment,model,params,size,replicate,seed,stat,value"
SUMMARY_HEADER = "experiment,model,params,size,stat,n,mean,ci_lo,ci_hi"


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def run(spec: ExperimentSpec, out_dir, threads: int = 1):
    """Run an experiment; write <id>_rows.csv and <id>_summary.csv under
    out_dir.  Returns (rows, summary) in memory as well.  Byte-identical
    reruns for a fixed spec, regardless of thread count."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for size_index, size in enumerate(spec.sizes):
        step = max(1, spec.replicates // max(1, threads * 4))
        for lo in range(0, spec.replicates, step):
            tasks.append((spec, size_index, size, lo, min(spec.replicates, lo + step)))
    rows = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_chunk_worker, tasks):
                rows.extend(part)
    else:
        for task in tasks:
            rows.extend(_chunk_worker(task))
    rows.sort(key=lambda r: (r[3], r[1], r[2], r[4], r[6]))
    rows_path = out_dir / f"{spec.id}_rows.csv"
    with open(rows_path, "w") as fh:
        fh.write(ROWS_HEADER + "\n")
        for exp, model, params, size, rep, seed, stat, value in rows:
            fh.write(f"{exp},{model},{params},{size},{rep},{seed},{stat},{_fmt(value)}\n")
    summary = summarize(rows)
    summary_path = out_dir / f"{spec.id}_summary.csv"
    with open(summary_path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for key, cell in summary.items():
            exp, model, params, size, stat = key
            n, mean, lo, hi = cell
            fh.write(
                f"{exp},{model},{params},{size},{stat},{n},{_fmt(mean)},{_fmt(lo)},{_fmt(hi)}\n"
            )
    return rows, summary


def summarize(rows):
    """Mean and 95% normal-approximation interval per (size, statistic)."""
    groups: dict = {}
    for exp, model, params, size, rep, seed, stat, value in rows:
        groups.setdefault((exp, model, params, size, stat), []).append(value)
    out = {}
    for key in sorted(groups):
        vals = np.asarray(groups[key], dtype=np.float64)
        n = vals.size
        mean = float(vals.mean())
        if np.all((vals == 0.0) | (vals == 1.0)):
            var = mean * (1.0 - mean)
        else:
            var = float(vals.var(ddof=1)) if n > 1 else 0.0
        half = 1.96 * (var / n) ** 0.5
        out[key] = (n, mean, mean - half, mean + half)
    return out


def stat_summary(summary, stat, size=None, params_contains=None):
    """Pick (n, mean, lo, hi) cells for one statistic."""
    hits = {}
    for (exp, model, params, sz, st), cell in summary.items():
        if st != stat:
            continue
        if size is not None and sz != size:
            continue
        if params_contains is not None and params_contains not in params:
            continue
        hits[sz] = cell
    return hits


# ---------------------------------------------------------------------------
# Rendering.


def render(config: BondConfig, path) -> None:
    """Plain PBM: vertex pixels at even-even positions, open edges as the
    pixel between their endpoints, lattice y increasing upward (image row 0 is
    the top row).  Boxes draw on a (2w-1) x (2h-1) canvas; tori on 2n x 2n,
    the extra last column/row carrying the wrap-edge pixels."""
    region = config.region
    w, h = region.width, region.height
    if region.kind == "torus":
        wpx, hpx = 2 * w, 2 * h
    else:
        wpx, hpx = 2 * w - 1, 2 * h - 1
    grid = np.zeros((hpx, wpx), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            grid[2 * y, 2 * x] = 1
    nright = region.right_count
    bits = config.open
    for i in np.nonzero(bits[:nright])[0]:
        if region.kind == "torus":
            x, y = int(i) % w, int(i) // w
        else:
            x, y = int(i) % (w - 1), int(i) // (w - 1)
        grid[2 * y, 2 * x + 1] = 1
    for i in np.nonzero(bits[nright:])[0]:
        x, y = int(i) % w, int(i) // w
        grid[2 * y + 1, 2 * x] = 1
    lines = [f"P1", f"{wpx} {hpx}"]
    for row in grid[::-1]:  # image top = largest lattice y
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def render_dual(config: BondConfig, path) -> None:
    """Render the dual process: the torus dual on its own torus; the box dual
    as the plaquette grid with the unbounded-face edges omitted."""
    region = config.region
    if region.kind == "torus":
        render(dual_as_torus_config(dual(config)), path)
        return
    w, h = region.width, region.height
    if w < 2 or h < 2:
        raise ValueError("box dual rendering needs at least a 2x2 box")
    sub = Region.box(max(w - 1, 1), max(h - 1, 1))
    bits = np.zeros(sub.edge_count, dtype=np.uint8)
    dual_open = 1 - config.open
    nright = h * (w - 1)
    k = 0
    for y in range(h - 1):
        for x in range(w - 2):
            # dual horizontal between plaquettes (x, y), (x+1, y) crosses Up(x+1, y)
            bits[k] = dual_open[nright + y * w + (x + 1)]
            k += 1
    up0 = sub.right_count
    for y in range(h - 2):
        for x in range(w - 1):
            # dual vertical between plaquettes (x, y), (x, y+1) crosses Right(x, y+1)
            bits[up0 + y * (w - 1) + x] = dual_open[(y + 1) * (w - 1) + x]
    render(BondConfig(sub, bits), path)


# ---------------------------------------------------------------------------
# CLI.


def _cmd_sample(args) -> int:
    conf = parse_config(Path(args.config).read_text()) if args.config else {}
    for key, val in (
        ("model", args.model),
        ("p", args.p),
        ("q", args.q),
        ("sweeps", args.sweeps),
        ("seed", args.seed),
    ):
        if val is not None:
            conf[key] = val
    if args.region:
        kind, _, rest = args.region.partition(":")
        if kind == "torus":
            conf["n"] = rest
        elif kind == "box":
            parts = rest.split(":")
            conf["width"], conf["height"] = parts[0].split("x")
            if len(parts) > 1:
                conf["boundary"] = parts[1]
        else:
            return _fail(f"bad region spec {args.region!r}")
    spec = samplers.SampleSpec.from_config(conf)
    cfg = samplers.sample(spec)
    out = Path(args.out or "sample.txt")
    out.write_text(to_text(cfg))
    if args.render:
        render(cfg, out.with_suffix(".pbm"))
        render_dual(cfg, out.with_suffix(".dual.pbm"))
    print(f"wrote {out} ({cfg.open_count()} open / {cfg.region.edge_count} edges)")
    return 0


def _cmd_experiment(args) -> int:
    conf = parse_config(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        conf["seed"] = args.seed
    spec = build_experiment(conf)
    rows, summary = run(spec, args.out or ".", threads=args.threads)
    bad = 0.0
    for (exp, model, params, size, stat), (n, mean, lo, hi) in summary.items():
        print(f"{exp} size={size} {model} {params} {stat}: mean={mean:.4g} n={n}")
        if stat in ("alternation_violation", "bk_violation") or stat == "cutoff_sound":
            if stat == "cutoff_sound":
                bad += n * (1.0 - mean)
            else:
                bad += n * mean
    if bad:
        print(f"error: per-sample invariant violations detected ({int(bad)} rows)")
        return 1
    return 0


def _cmd_oracle(args) -> int:
    draws = args.draws
    report = oracle_report(draws, seed=args.seed or 0)
    worst = 0.0
    for name, tv in report:
        print(f"{name}: tv={tv:.4f} (draws={draws})")
        worst = max(worst, tv)
    return 0


def _cmd_render(args) -> int:
    cfg = from_text(Path(args.infile).read_text())
    out = Path(args.out or "render")
    render(cfg, f"{out}_primal.pbm")
    render_dual(cfg, f"{out}_dual.pbm")
    print(f"wrote {out}_primal.pbm and {out}_dual.pbm")
    return 0


def oracle_report(draws: int, seed: int = 0):
    """Sampler-vs-enumeration total-variation distances at a configurable
    draw count (the acceptance suite runs the full-size versions)."""
    out = []
    box33 = Region.box(3, 3)
    table = samplers.enumerate_exact(samplers.UNIFORM_EVEN, box33)
    states = samplers.batch_even_states(box33, draws, derive_seed(seed, 1, 0))
    out.append(("uniform_even box 3x3", _tv_from_states(table, states)))
    t4 = Region.torus(4)
    table = samplers.enumerate_exact(samplers.UNIFORM_EVEN, t4)
    states = samplers.batch_even_states(t4, draws, derive_seed(seed, 2, 0))
    out.append(("uniform_even torus 4", _tv_from_states(table, states)))
    table = samplers.enumerate_exact(samplers.UNIFORM_ODD, t4)
    states = samplers.batch_odd_states(t4, draws, derive_seed(seed, 3, 0))
    out.append(("uniform_odd torus 4", _tv_from_states(table, states)))
    box22 = Region.box(2, 2)
    table = samplers.enumerate_exact(samplers.UST, box22)
    seeds = np.array(
        [derive_seed(seed, rep, 4) for rep in range(draws)], dtype=np.uint64
    )
    counts_arr = _kernels.wilson_draw_states(2, 2, False, box22.edge_count, seeds)
    counts = {s: int(c) for s, c in enumerate(counts_arr) if c}
    out.append(("ust box 2x2", samplers.tv_distance(table, counts, draws)))
    box23 = Region.box(2, 3)
    for q in (0.5, 2.0):
        table = samplers.enumerate_exact(samplers.RANDOM_CLUSTER, box23, p=0.5, q=q)
        conn = samplers.connectivity_table(box23)
        seeds = np.array(
            [derive_seed(seed, rep, 5 if q == 0.5 else 6) for rep in range(draws)],
            dtype=np.uint64,
        )
        counts_arr = _kernels.rc_draws_table(
            box23.edge_count, conn, 0.5, q, 1000, 0, seeds
        )
        counts = {s: int(c) for s, c in enumerate(counts_arr) if c}
        out.append((f"random_cluster box 2x3 q={q:g}", samplers.tv_distance(table, counts, draws)))
    return out


def _tv_from_states(table, states: np.ndarray) -> float:
    uniq, cnt = np.unique(states, return_counts=True)
    counts = {int(s): int(c) for s, c in zip(uniq, cnt)}
    return samplers.tv_distance(table, counts, states.size)


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="percolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw one config to a file")
    p_sample.add_argument("--config")
    p_sample.add_argument("--model")
    p_sample.add_argument("--region", help="torus:N or box:WxH[:boundary]")
    p_sample.add_argument("--p")
    p_sample.add_argument("--q")
    p_sample.add_argument("--sweeps")
    p_sample.add_argument("--seed")
    p_sample.add_argument("--out")
    p_sample.add_argument("--render", action="store_true")
    p_sample.set_defaults(fn=_cmd_sample)

    p_exp = sub.add_parser("experiment", help="run an experiment spec")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--seed")
    p_exp.add_argument("--out")
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.set_defaults(fn=_cmd_experiment)

    p_oracle = sub.add_parser("oracle", help="sampler-vs-enumeration checks")
    p_oracle.add_argument("--draws", type=int, default=100000)
    p_oracle.add_argument("--seed", type=int)
    p_oracle.set_defaults(fn=_cmd_oracle)

    p_render = sub.add_parser("render", help="render a saved config")
    p_render.add_argument("infile")
    p_render.add_argument("--out")
    p_render.set_defaults(fn=_cmd_render)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
