"""Command-line interface.

Verbs: synth (generate a synthetic contact scene), fit (run the joint
optimization on a scene), eval (metrics against ground truth), scale
(depth-aware mesh normalization), diagnose (field-quality report).

Exit codes: 0 success, 2 usage or configuration error, 3 scene validation
error, 4 fitting error, 5 evaluation error.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from ..errors import (CorrespondenceMismatch, EmptyShell, HoifitError,
                      MalformedGrid, MaskMissing, RigFormatError,
                      SceneValidationError, TopologyMismatch)
from ..fields import NoiseSpec, field_diagnostic, mesh_oracle
from ..fitting import FitConfig
from ..mesh import load_mesh, save_mesh
from ..scaling import DEFAULT_TARGET_DEPTH, depth_aware_scale, joint_scale
from .evaluate import ALIGN_MODES, cmd_eval
from .fitcmd import InitSpec, cmd_fit
from .scene import load_scene
from .synth import CONTACT_PARTS, SynthConfig, cmd_synth

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENE = 3
EXIT_FIT = 4
EXIT_EVAL = 5

_SCENE_ERRORS = (SceneValidationError, MaskMissing, CorrespondenceMismatch,
                 RigFormatError, MalformedGrid)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="fit configuration file (key-value)")
    group = parser.add_argument_group("fit configuration overrides")
    defaults = FitConfig()
    for f in fields(FitConfig):
        flag = "--" + f.name.replace("_", "-")
        default = getattr(defaults, f.name)
        if isinstance(default, bool):
            group.add_argument(flag, dest=f"cfg_{f.name}", default=None,
                               action=argparse.BooleanOptionalAction)
        else:
            group.add_argument(flag, dest=f"cfg_{f.name}", default=None,
                               type=type(default))
    parser.add_argument("--no-contact", action="store_true",
                        help="shorthand for --no-use-contacts")


def _resolve_config(args) -> FitConfig:
    cfg = FitConfig.load(args.config) if args.config else FitConfig()
    overrides = {}
    for f in fields(FitConfig):
        val = getattr(args, f"cfg_{f.name}", None)
        if val is not None:
            overrides[f.name] = val
    if getattr(args, "no_contact", False):
        overrides["use_contacts"] = False
    return cfg.replace(**overrides) if overrides else cfg


def _add_noise_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("field noise")
    group.add_argument("--noise-sigma-d", type=float, default=0.0)
    group.add_argument("--noise-sigma-g", type=float, default=0.0)
    group.add_argument("--noise-flip-prob", type=float, default=0.0)
    group.add_argument("--noise-sigma-r", type=float, default=0.0)
    group.add_argument("--noise-sigma-c", type=float, default=0.0)
    group.add_argument("--noise-seed", type=int, default=None)


def _resolve_noise(args, seed: int) -> NoiseSpec:
    return NoiseSpec(args.noise_sigma_d, args.noise_sigma_g,
                     args.noise_flip_prob, args.noise_sigma_r,
                     args.noise_sigma_c,
                     args.noise_seed if args.noise_seed is not None else seed)


def _run_synth(args) -> int:
    base = Path(args.output)
    count = args.count
    for i in range(count):
        cfg = SynthConfig(
            object_shape=args.object_shape,
            contact_part=args.contact_part,
            pose_jitter_deg=args.pose_jitter_deg,
            target_depth=args.depth,
            image_size=args.image_size,
            gap=args.gap,
            slide=args.slide,
            object_yaw_deg=args.object_yaw_deg,
            seed=args.seed + i,
        )
        out = base if count == 1 else base / f"scene_{args.seed + i:03d}"
        result = cmd_synth(cfg, out)
        print(f"synth {result.path} (seed {cfg.seed}, "
              f"{args.object_shape} on {args.contact_part})")
    return EXIT_OK


def _fit_one(scene_dir, out_dir, cfg, init, noise, seed):
    start = time.perf_counter()
    result = cmd_fit(scene_dir, out_dir, cfg, init, noise, seed)
    return scene_dir, time.perf_counter() - start, result.report.stage_converged


def _run_fit(args) -> int:
    cfg = _resolve_config(args)
    init = InitSpec(
        body_source=args.init,
        perturb_pose_deg=args.perturb_pose_deg,
        perturb_trans=args.perturb_trans,
        object_source=args.object_init,
        perturb_object_deg=args.perturb_object_deg,
        perturb_object_trans=args.perturb_object_trans,
        seed=args.seed,
    )
    noise = _resolve_noise(args, args.seed)
    scenes = [Path(s) for s in args.scenes]
    if args.output is not None and len(scenes) > 1:
        raise ValueError("--output applies to a single scene; omit it for batches")
    jobs = [(s, args.output, cfg, init, noise, args.seed) for s in scenes]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_fit_one, *zip(*jobs)))
    else:
        results = [_fit_one(*j) for j in jobs]
    for scene_dir, elapsed, converged in sorted(results, key=lambda r: str(r[0])):
        flags = " ".join(f"{k}={'y' if v else 'n'}" for k, v in converged.items())
        print(f"fit {scene_dir} in {elapsed:.1f}s ({flags})")
    return EXIT_OK


def _run_eval(args) -> int:
    report = cmd_eval(args.scenes, fit_name=args.fit_name, mode=args.mode,
                      output=args.output)
    for line in report.to_lines():
        print(line)
    return EXIT_OK


def _run_scale(args) -> int:
    paths = [Path(p) for p in args.meshes]
    if args.joint:
        if len(paths) != 2:
            raise ValueError("--joint expects exactly two meshes (human, object)")
        human, obj = load_mesh(paths[0]), load_mesh(paths[1])
        human_s, obj_s, record = joint_scale(human, obj, args.z0)
        for path, scaled in zip(paths, (human_s, obj_s)):
            out = path.with_stem(path.stem + "_scaled")
            save_mesh(scaled, out)
            record.save(out.with_suffix(".scale.txt"))
            print(f"scale {path} -> {out} (s={record.s:.6g})")
    else:
        for path in paths:
            scaled, record = depth_aware_scale(load_mesh(path), args.z0)
            out = path.with_stem(path.stem + "_scaled")
            save_mesh(scaled, out)
            record.save(out.with_suffix(".scale.txt"))
            print(f"scale {path} -> {out} (s={record.s:.6g})")
    return EXIT_OK


def _run_diagnose(args) -> int:
    scene = load_scene(args.scene)
    noise = _resolve_noise(args, args.seed)
    gt_rotation = scene.gt_object.rotation if scene.gt_object else np.eye(3)
    oracle = mesh_oracle(scene.human, scene.obj, scene.rig, gt_rotation,
                         noise=noise)
    gt_centers = oracle.gt_centers if noise.is_zero else mesh_oracle(
        scene.human, scene.obj, scene.rig, gt_rotation).gt_centers
    report = field_diagnostic(oracle, scene.human, scene.obj,
                              samples=args.samples, delta=args.delta,
                              body_model=scene.rig, gt_rotation=gt_rotation,
                              gt_centers=gt_centers, seed=args.seed)
    lines = report.to_lines()
    for line in lines:
        print(line)
    if args.output:
        Path(args.output).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoifit",
        description="Joint body and object fitting to field-based scene descriptions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic contact scenes")
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--object-shape", default="box",
                   choices=("box", "rod", "cylinder", "composite"))
    p.add_argument("--contact-part", default="left_hand", choices=CONTACT_PARTS)
    p.add_argument("--pose-jitter-deg", type=float, default=8.0)
    p.add_argument("--depth", type=float, default=DEFAULT_TARGET_DEPTH)
    p.add_argument("--image-size", type=int, default=256)
    p.add_argument("--gap", type=float, default=0.002)
    p.add_argument("--slide", type=float, default=0.0)
    p.add_argument("--object-yaw-deg", type=float, default=25.0)
    p.set_defaults(func=_run_synth, error_code=EXIT_USAGE)

    p = sub.add_parser("fit", help="fit body and object to a scene")
    p.add_argument("scenes", nargs="+")
    p.add_argument("--output", type=Path, default=None,
                   help="output directory (single scene only; default SCENE/fit)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--init", default="file",
                   help="'file' (init_body.txt), 'gt', or a parameter file path")
    p.add_argument("--perturb-pose-deg", type=float, default=0.0)
    p.add_argument("--perturb-trans", type=float, default=0.0)
    p.add_argument("--object-init", default="field", choices=("field", "gt"))
    p.add_argument("--perturb-object-deg", type=float, default=0.0)
    p.add_argument("--perturb-object-trans", type=float, default=0.0)
    _add_noise_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=_run_fit, error_code=EXIT_FIT)

    p = sub.add_parser("eval", help="metrics against scene ground truth")
    p.add_argument("scenes", nargs="+")
    p.add_argument("--fit-name", default="fit")
    p.add_argument("--mode", default="combined", choices=ALIGN_MODES)
    p.add_argument("--output", type=Path, default=None)
    p.set_defaults(func=_run_eval, error_code=EXIT_EVAL)

    p = sub.add_parser("scale", help="depth-aware scaling of meshes")
    p.add_argument("meshes", nargs="+")
    p.add_argument("--z0", type=float, default=DEFAULT_TARGET_DEPTH)
    p.add_argument("--joint", action="store_true",
                   help="one shared factor for a (human, object) pair")
    p.set_defaults(func=_run_scale, error_code=EXIT_USAGE)

    p = sub.add_parser("diagnose", help="field-quality report for a scene")
    p.add_argument("scene")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, default=None)
    _add_noise_flags(p)
    p.set_defaults(func=_run_diagnose, error_code=EXIT_USAGE)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SCENE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EmptyShell, TopologyMismatch, HoifitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return args.error_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
