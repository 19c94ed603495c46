"""
Command-line front end.

Machine-readable summaries go to stdout as single-line ``key=value``
records (``eval`` prints CSV instead); human-readable detail goes to stderr.
"""

import argparse
import statistics
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path


from . import io
from .core import PRESETS, GraphParams, GuidanceParams, LinearParams, density, validate_hint_map
from .expand_graph import expand_graph
from .expand_linear import expand_linear_multi
from .guidance import compute_range, confidence_filter, patch_descriptor
from .matcher import MatchParams, guided_match
from .metrics import evaluate
from .synth import SceneSpec, make_scene


class CliError(Exception):
    pass


def _record(**fields) -> str:
    parts = []
    for key, value in fields.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return " ".join(parts)


def _emit(**fields):
    print(_record(**fields), flush=True)


def _info(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _windows(text: str):
    try:
        return tuple(int(w) for w in text.split(",") if w.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"windows must be comma-separated integers, got {text!r}")


def _shape(text: str):
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like HEIGHTxWIDTH, got {text!r}")


def graph_params(args) -> GraphParams:
    base = PRESETS[args.preset] if args.preset else GraphParams()
    radius = args.radius if args.radius is not None else base.radius
    return GraphParams(radius=radius, color_tau=args.tau, sort_key=args.sort_key)


def guidance_params(args) -> GuidanceParams:
    return GuidanceParams(
        alpha=args.alpha,
        d_min=args.d_min,
        d_max=args.d_max,
        k=getattr(args, "k", 10.0),
        c=getattr(args, "c", 1.0),
        conf_tau=getattr(args, "conf_tau", 0.9),
        shift_sign=getattr(args, "shift_sign", 1),
    )


def run_expansion(algo: str, hints, image, args):
    if algo == "graph":
        return expand_graph(hints, image, graph_params(args))
    if algo == "lin3d":
        return expand_linear_multi(hints, LinearParams(args.windows, args.fill_mode))
    raise CliError(f"unknown algorithm {algo!r}")


# --- subcommands -------------------------------------------------------------------


def cmd_expand(args) -> int:
    image = io.read_image(args.image)
    hints = io.read_hints_csv(args.hints, image.shape)
    start = time.perf_counter()
    out = run_expansion(args.algo, hints, image, args)
    elapsed = time.perf_counter() - start
    problems = validate_hint_map(out)
    if problems:
        raise CliError(f"expansion produced an invalid hint map: {problems[0]}")
    io.write_hints_csv(args.out, out)
    if args.viz:
        io.write_visualization(args.viz, out, args.viz_min, args.viz_max)
    _emit(
        algo=args.algo,
        in_count=hints.nnz,
        out_count=out.nnz,
        in_density=density(hints),
        out_density=density(out),
        time_ms=elapsed * 1e3,
    )
    return 0


def _map_shape(args):
    if args.shape:
        return args.shape
    if args.image:
        return io.read_image(args.image).shape
    raise CliError("need --image or --shape to size the hint map")


def cmd_range(args) -> int:
    hints = io.read_hints_csv(args.hints, _map_shape(args))
    r = compute_range(hints, guidance_params(args))
    io.write_pfm(args.out_low, r.low)
    io.write_pfm(args.out_high, r.high)
    width = r.high - r.low
    _emit(
        hints=hints.nnz,
        mean_width=float(width.mean()),
        hinted_mean_width=float(width[hints.mask].mean()) if hints.nnz else float("nan"),
    )
    return 0


def cmd_filter(args) -> int:
    left = io.read_image(args.left)
    right = io.read_image(args.right)
    hints = io.read_hints_csv(args.hints, left.shape)
    f_left = patch_descriptor(left.gray(), args.window)
    f_right = patch_descriptor(right.gray(), args.window)
    kept, _ = confidence_filter(hints, f_left, f_right, args.conf_tau, args.shift_sign)
    io.write_hints_csv(args.out, kept)
    _emit(in_count=hints.nnz, kept=kept.nnz, dropped=hints.nnz - kept.nnz)
    return 0


def match_params(args) -> MatchParams:
    return MatchParams(args.block_radius, args.candidates, args.cost, guidance_params(args))


def cmd_match(args) -> int:
    left = io.read_image(args.left)
    right = io.read_image(args.right)
    if left.shape != right.shape:
        raise CliError(f"left {left.shape} and right {right.shape} differ in size")
    hints = io.read_hints_csv(args.hints, left.shape) if args.hints else None
    start = time.perf_counter()
    disp = guided_match(left.gray(), right.gray(), hints, match_params(args))
    elapsed = time.perf_counter() - start
    io.write_disparity(args.out, disp)
    _emit(
        hints=0 if hints is None else hints.nnz,
        valid=int(disp.valid.sum()),
        pixels=int(disp.valid.size),
        time_ms=elapsed * 1e3,
    )
    return 0


def scene_spec(args) -> SceneSpec:
    if args.config:
        spec = io.read_scene_spec(args.config)
        return spec.replace(seed=args.seed) if args.seed_given else spec
    return SceneSpec(
        seed=args.seed,
        height=args.height,
        width=args.width,
        n_planes=args.planes,
        d_min=args.scene_d_min,
        d_max=args.scene_d_max,
        texture=args.texture,
        density=args.density,
        noise_sigma=args.sigma,
        max_slope=args.max_slope,
    )


def write_scene(out_dir: Path, spec: SceneSpec):
    out_dir.mkdir(parents=True, exist_ok=True)
    scene = make_scene(spec)
    io.write_image(out_dir / "left.png", scene.left)
    io.write_image(out_dir / "right.png", scene.right)
    io.write_pfm(out_dir / "gt.pfm", scene.gt)
    io.write_hints_csv(out_dir / "hints.csv", scene.hints)
    io.write_scene_spec(out_dir / "scene.cfg", spec)
    return scene


def cmd_simulate(args) -> int:
    try:
        spec = scene_spec(args)
    except ValueError as exc:
        raise CliError(f"invalid scene: {exc}")
    out_dir = Path(args.out_dir)
    scene = write_scene(out_dir, spec)
    _emit(
        seed=spec.seed,
        height=spec.height,
        width=spec.width,
        hints=scene.hints.nnz,
        density=density(scene.hints),
        out_dir=str(out_dir),
    )
    return 0


def _pairs(args):
    if args.pred and args.gt:
        return [(Path(args.pred), Path(args.gt))]
    if args.pred_dir and args.gt_dir:
        pred_dir, gt_dir = Path(args.pred_dir), Path(args.gt_dir)
        pairs = []
        for pred in sorted(p for p in pred_dir.iterdir() if p.suffix.lower() in (".pfm", ".png")):
            matches = sorted(gt_dir.glob(pred.stem + ".*"))
            matches = [g for g in matches if g.suffix.lower() in (".pfm", ".png")]
            if not matches:
                raise CliError(f"no ground truth for {pred.name} in {gt_dir}")
            pairs.append((pred, matches[0]))
        if not pairs:
            raise CliError(f"no .pfm/.png predictions in {pred_dir}")
        return pairs
    raise CliError("need --pred and --gt, or --pred-dir and --gt-dir")


def cmd_eval(args) -> int:
    pairs = _pairs(args)

    def one(pair):
        pred_path, gt_path = pair
        pred = io.read_disparity(pred_path)
        gt = io.read_disparity(gt_path)
        if pred.shape != gt.shape:
            raise CliError(f"{pred_path.name}: prediction {pred.shape} vs ground truth {gt.shape}")
        hints = io.read_hints_csv(args.hints, gt.shape) if args.hints else None
        try:
            return evaluate(pred, gt, hints, name=pred_path.stem)
        except ValueError as exc:
            raise CliError(f"{pred_path.name}: {exc}")

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        reports = list(pool.map(one, pairs))
    lines = [reports[0].csv_header()] + [r.csv_row() for r in reports]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    for r in reports:
        _info(r.to_text())
    return 0


def _bench_inputs(args, workdir: Path):
    if args.image and args.hints:
        return Path(args.image), Path(args.hints), Path(args.right) if args.right else None
    spec = SceneSpec(
        seed=args.seed,
        height=args.height,
        width=args.width,
        density=min(0.05, args.n_hints / (args.height * args.width)),
        texture="checker",
    )
    write_scene(workdir, spec)
    return workdir / "left.png", workdir / "hints.csv", workdir / "right.png"


def cmd_bench(args) -> int:
    if args.reps < 5:
        raise CliError("bench needs at least 5 repetitions")
    algos = ["lin3d", "graph"] if args.algo == "both" else [args.algo]
    with tempfile.TemporaryDirectory() as tmp:
        image_path, hints_path, right_path = _bench_inputs(args, Path(tmp))
        if args.match and right_path is None:
            raise CliError("--match needs --right (or synthetic inputs)")
        for algo in algos:
            samples = {"load": [], "expand": [], "match": []}
            for _ in range(args.reps):
                t0 = time.perf_counter()
                image = io.read_image(image_path)
                hints = io.read_hints_csv(hints_path, image.shape)
                right = io.read_image(right_path) if args.match else None
                t1 = time.perf_counter()
                out = run_expansion(algo, hints, image, args)
                t2 = time.perf_counter()
                if args.match:
                    guided_match(image.gray(), right.gray(), out, match_params(args))
                t3 = time.perf_counter()
                samples["load"].append(t1 - t0)
                samples["expand"].append(t2 - t1)
                samples["match"].append(t3 - t2)
            stages = ["load", "expand"] + (["match"] if args.match else [])
            med = {s: statistics.median(samples[s]) * 1e3 for s in stages}
            total = sum(med.values())
            record = {"algo": algo, "reps": args.reps, "in_count": hints.nnz, "out_count": out.nnz}
            for s in stages:
                record[f"{s}_ms"] = med[s]
            for s in stages:
                record[f"{s}_pct"] = 100.0 * med[s] / total if total > 0 else 0.0
            record["expand_samples_ms"] = ",".join(f"{v * 1e3:.3f}" for v in samples["expand"])
            _emit(**record)
    return 0


# --- parser ------------------------------------------------------------------------


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (only simulate/bench use it)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch work")


def _graph_opts(p):
    p.add_argument("--radius", type=float, default=None, help="3-D graph radius R (default 8)")
    p.add_argument("--tau", type=float, default=0.9, help="color cosine threshold")
    p.add_argument("--sort-key", choices=("3d", "2d"), default="3d")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--windows", type=_windows, default=(8, 16), help="lin3d tile sizes, e.g. 8,16")
    p.add_argument("--fill-mode", choices=("clamped", "between"), default="clamped")


def _range_opts(p):
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--d-min", type=float, default=0.0)
    p.add_argument("--d-max", type=float, default=192.0)


def _match_opts(p):
    p.add_argument("--block-radius", type=int, default=2)
    p.add_argument("--candidates", type=int, default=16)
    p.add_argument("--cost", choices=("sad", "zncc"), default="sad")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="densehints", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="densify a hints file")
    _common(p)
    p.add_argument("--hints", required=True)
    p.add_argument("--image", required=True, help="left image aligned with the hints")
    p.add_argument("--out", required=True)
    p.add_argument("--algo", choices=("graph", "lin3d"), default="graph")
    _graph_opts(p)
    p.add_argument("--viz", default=None, help="also write a PPM visualization")
    p.add_argument("--viz-min", type=float, default=0.0)
    p.add_argument("--viz-max", type=float, default=192.0)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("range", help="per-pixel search range from hints")
    _common(p)
    p.add_argument("--hints", required=True)
    p.add_argument("--image", default=None)
    p.add_argument("--shape", type=_shape, default=None, help="HEIGHTxWIDTH when no image is given")
    p.add_argument("--out-low", required=True)
    p.add_argument("--out-high", required=True)
    _range_opts(p)
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("filter", help="confidence-filter hints with patch descriptors")
    _common(p)
    p.add_argument("--hints", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--conf-tau", type=float, default=0.9)
    p.add_argument("--shift-sign", type=int, choices=(1, -1), default=1)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("match", help="guided winner-take-all block matching")
    _common(p)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--hints", default=None)
    p.add_argument("--out", required=True, help=".pfm or .png (KITTI 16-bit)")
    _range_opts(p)
    _match_opts(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("simulate", help="write a synthetic scene (left, right, gt, hints)")
    _common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="key=value scene file; flags below are ignored")
    defaults = SceneSpec()
    p.add_argument("--height", type=int, default=defaults.height)
    p.add_argument("--width", type=int, default=defaults.width)
    p.add_argument("--planes", type=int, default=defaults.n_planes)
    p.add_argument("--scene-d-min", type=float, default=defaults.d_min)
    p.add_argument("--scene-d-max", type=float, default=defaults.d_max)
    p.add_argument("--texture", default=defaults.texture)
    p.add_argument("--density", type=float, default=defaults.density)
    p.add_argument("--sigma", type=float, default=defaults.noise_sigma)
    p.add_argument("--max-slope", type=float, default=defaults.max_slope)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="MAE and >t error rates against ground truth")
    _common(p)
    p.add_argument("--pred", default=None)
    p.add_argument("--gt", default=None)
    p.add_argument("--pred-dir", default=None)
    p.add_argument("--gt-dir", default=None)
    p.add_argument("--hints", default=None, help="also report hint statistics")
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time loading, expansion and matching")
    _common(p)
    p.add_argument("--image", default=None)
    p.add_argument("--hints", default=None)
    p.add_argument("--right", default=None)
    p.add_argument("--algo", choices=("both", "graph", "lin3d"), default="both")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--match", action="store_true")
    p.add_argument("--height", type=int, default=375)
    p.add_argument("--width", type=int, default=1242)
    p.add_argument("--n-hints", type=int, default=5000)
    _graph_opts(p)
    _range_opts(p)
    _match_opts(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.seed_given = "--seed" in argv or any(a.startswith("--seed=") for a in argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        _info(f"densehints {args.command}: error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
