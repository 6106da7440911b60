"""Command-line front end: ``screen``, ``verify``, ``bench`` and ``gen``.

Exit codes: 0 ok, 1 safety violation, 2 I/O or parse error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time

import numpy as np

from . import solvers, synthetic
from .config import FIELDS, Config, ConfigError, load_config
from .geometry import GeometryError, Region, normalize, orthonormal_basis, project
from .lasso import LassoError, LassoInstance, solve_lasso
from .matrix_io import MatrixFileError, load_instance, save_matrix
from .screening import ScreeningError, greedy_halfspaces, screen, sphere_bound, verify_screening

EXIT_OK, EXIT_UNSAFE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

CSV_HEADER = "feature_index,mu_pos,mu_neg,rejected"
BENCH_RATIOS = (0.3, 0.4, 0.5, 0.7, 0.9, 1.0)
BENCH_MS = (1, 2, 3, 5)


class NumericalFailure(RuntimeError):
    pass


def build_parser():
    parser = argparse.ArgumentParser(prog="domescreen",
                                     description="Safe lasso screening with sphere and half-space bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "screen": "screen a dictionary and write per-feature values as CSV",
        "verify": "screen, then check the rejections against the lasso solution",
        "bench": "rejection and timing table over m and lambda ratios",
        "gen": "write a synthetic dictionary and target",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text, argument_default=argparse.SUPPRESS)
        cmd.add_argument("--config", help="key = value file; flags override its entries")
        for key, field in FIELDS.items():
            kind = {"int": int, "float": float}.get(field.type, str)
            cmd.add_argument("--" + key.replace("_", "-"), dest=key, type=kind, metavar=key.upper())
    return parser


def resolve_config(args) -> Config:
    values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(load_config(config_path))
    values.update({k: v for k, v in vars(args).items() if k in FIELDS})
    return Config().updated(values).validate()


def synthetic_spec(cfg: Config):
    return synthetic.SyntheticSpec(n=cfg.n, p=cfg.p, target_model=cfg.target_model,
                                   atoms=cfg.atoms, noise=cfg.noise)


def instance_from(cfg: Config) -> LassoInstance:
    """Instance from ``dict``/``target`` files, or a synthetic one from ``seed``."""
    if (cfg.dict is None) != (cfg.target is None):
        raise ConfigError("give both dict and target, or neither")
    if cfg.dict is not None:
        return load_instance(cfg.dict, cfg.target, cfg.lambda_ratio)
    return synthetic.instance(synthetic_spec(cfg), cfg.seed, cfg.lambda_ratio)


def format_csv(report) -> list:
    lines = [CSV_HEADER]
    for i, (a, b, rej) in enumerate(zip(report.mu_pos, report.mu_neg, report.rejected)):
        lines.append(f"{i},{float(a)!r},{float(b)!r},{int(rej)}")
    return lines


def summary_line(report) -> str:
    t = report.timing
    return (f"# summary rejected={report.n_rejected} p={report.rejected.size} "
            f"fraction={report.rejection_fraction:.6f} m={report.m_used} status={report.status} "
            f"t_region={t.get('region', 0.0):.6f} t_project={t.get('project', 0.0):.6f} "
            f"t_solve={t.get('solve', 0.0):.6f}")


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _check_numerics(report):
    if report.status != "ok":
        raise NumericalFailure(f"screening status {report.status}")
    if not (np.all(np.isfinite(report.mu_pos)) and np.all(np.isfinite(report.mu_neg))):
        raise NumericalFailure("non-finite screening value")


def cmd_screen(cfg: Config) -> int:
    inst = instance_from(cfg)
    report = screen(inst, cfg.m, tol=cfg.solver_tol, margin=cfg.margin,
                    parallelism=cfg.parallelism)
    _check_numerics(report)
    _emit(format_csv(report) + [summary_line(report)], cfg.out)
    return EXIT_OK


def cmd_verify(cfg: Config) -> int:
    inst = instance_from(cfg)
    report = screen(inst, cfg.m, tol=cfg.solver_tol, margin=cfg.margin,
                    parallelism=cfg.parallelism)
    _check_numerics(report)
    outcome = verify_screening(inst, report, lasso_tol=cfg.lasso_tol)
    lines = [summary_line(report), outcome.describe(),
             f"# objective full={outcome.full_objective!r} reduced={outcome.reduced_objective!r} "
             f"padded_kkt={outcome.padded_kkt:.3e} full_kkt={outcome.full_kkt:.3e}"]
    _emit(lines, cfg.out)
    if outcome.violations:
        return EXIT_UNSAFE
    if outcome.full_kkt > cfg.lasso_tol:
        raise NumericalFailure(f"lasso did not converge (kkt {outcome.full_kkt:.3e})")
    return EXIT_OK if outcome.passed else EXIT_UNSAFE


def cmd_gen(cfg: Config) -> int:
    B, x = synthetic.generate(synthetic_spec(cfg), cfg.seed)
    out = cfg.out or "."
    os.makedirs(out, exist_ok=True)
    ext = ".txt" if cfg.fmt == "text" else ".bin"
    save_matrix(os.path.join(out, "dict" + ext), B, fmt=cfg.fmt)
    save_matrix(os.path.join(out, "target" + ext), x, fmt=cfg.fmt)
    print(f"wrote {out}/dict{ext} ({B.shape[0]}x{B.shape[1]}) and {out}/target{ext} "
          f"(model={cfg.target_model}, seed={cfg.seed})")
    return EXIT_OK


def median_time(fn, reps):
    """Median wall time of ``reps`` calls after one untimed warmup call."""
    fn()
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def timing_features(inst, m, count):
    """Signed features that need a real solve: the most correlated ones outside
    the half-space set, taken with the sign of their correlation."""
    corr = inst.B.T @ inst.x
    order = np.argsort(-np.abs(corr), kind="stable")[m:m + count]
    return [np.sign(corr[i]) * inst.B[:, i] for i in order]


def bench_cell(inst, m, cfg):
    report = screen(inst, m, tol=cfg.solver_tol, margin=cfg.margin, parallelism=cfg.parallelism)
    row = {"rejection_fraction": report.rejection_fraction,
           "reduced_s": float("nan"), "full_s": float("nan")}
    q, r = sphere_bound(inst)
    if r > 0:
        normals, offsets, _ = greedy_halfspaces(inst, m)
        nr = normalize(Region(q, r, normals, offsets))
        basis = orthonormal_basis(nr.N)
        feats = timing_features(inst, m, cfg.bench_features)

        def run_reduced():
            for b in feats:
                solvers.solve_reduced(project(b, basis), basis.A, nr.psi, cfg.solver_tol)

        def run_full():
            for b in feats:
                solvers.solve_full(b, nr, cfg.solver_tol)

        row["reduced_s"] = median_time(run_reduced, cfg.reps) / len(feats)
        row["full_s"] = median_time(run_full, cfg.reps) / len(feats)

    def screened_lasso():
        rep = screen(inst, m, tol=cfg.solver_tol, margin=cfg.margin, parallelism=cfg.parallelism)
        keep = ~rep.rejected
        if np.any(keep):
            solve_lasso(inst.restricted(keep), tol=cfg.lasso_tol)

    row["lasso_screened_s"] = median_time(screened_lasso, cfg.reps)
    return row


def cmd_bench(cfg: Config) -> int:
    spec = synthetic_spec(cfg)
    lines = [f"# bench n={cfg.n} p={cfg.p} target_model={cfg.target_model} seed={cfg.seed} "
             f"timing=median of {cfg.reps} after 1 warmup, per-feature over "
             f"{cfg.bench_features} features",
             "lambda_ratio,m,rejection_fraction,reduced_s,full_s,reduced_over_full,"
             "lasso_full_s,lasso_screened_s"]
    _emit_progress(lines)
    for ratio in BENCH_RATIOS:
        inst = synthetic.instance(spec, cfg.seed, ratio)
        lasso_full = median_time(lambda: solve_lasso(inst, tol=cfg.lasso_tol), cfg.reps)
        for m in BENCH_MS:
            row = bench_cell(inst, m, cfg)
            speed = row["reduced_s"] / row["full_s"] if row["full_s"] > 0 else float("nan")
            line = (f"{ratio},{m},{row['rejection_fraction']:.6f},{row['reduced_s']:.6g},"
                    f"{row['full_s']:.6g},{speed:.4g},{lasso_full:.6g},{row['lasso_screened_s']:.6g}")
            lines.append(line)
            _emit_progress([line])
    if cfg.out is not None:
        _emit(lines, cfg.out)
    return EXIT_OK


def _emit_progress(lines):
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.flush()


COMMANDS = {"screen": cmd_screen, "verify": cmd_verify, "bench": cmd_bench, "gen": cmd_gen}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (MatrixFileError, ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except (LassoError, ScreeningError, GeometryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
