"""Command-line entry points: synth | solve | eval | discretize.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import discrete, gaussian, metrics, pathio, smoothing, synth
from .dp import solve_parametric_batch
from .errors import ConfigError, DataError, NumericalError, TvmrfError

__all__ = ["main", "RunConfig"]


@dataclass
class RunConfig:
    """Validated solve-command configuration; fields mirror the flags."""

    model: str = "gmrf"
    q: float = 0.0
    lam: float | None = None
    lam0: float | None = None
    nu0: float = 0.0
    nu_rule: str = "per-period"
    center: bool = False
    states: int | None = None
    alpha: float = 0.0
    rho: float = 1.0
    kernel: smoothing.KernelSpec | None = None
    raw_weights: bool = False
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("gmrf", "dmrf"):
            raise ConfigError(f"model must be gmrf or dmrf, got {self.model!r}")
        if self.q not in (0.0, 1.0, 2.0):
            raise ConfigError(f"q must be 0, 1 or 2 at the command line, got {self.q}")
        if (self.lam is None) == (self.lam0 is None):
            raise ConfigError("exactly one of --lam (constant) or --lam0 (scaled rule) is required")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("--lam must be nonnegative")
        if self.model == "gmrf" and self.nu0 < 0:
            raise ConfigError("--nu0 must be nonnegative for gmrf")
        if self.model == "dmrf" and self.alpha < 0:
            raise ConfigError("--alpha must be nonnegative for dmrf")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")


def _add_kernel_flags(p):
    p.add_argument("--kernel", choices=("uniform", "truncated-gaussian"),
                   help="enable kernel averaging of the sufficient statistics")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="kernel bandwidth h in (0, 1]; default T^(-1/4) for gmrf, "
                        "0.02 T^(-1/3) for dmrf")
    p.add_argument("--raw-weights", action="store_true",
                   help="use the raw kernel weights instead of renormalizing them to sum to one")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="tvmrf",
        description="Exact solution paths for sparsely- and smoothly-changing Markov random fields.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="generate a synthetic Gaussian instance")
    ps.add_argument("--n", type=int, required=True, help="dimension of the random vector")
    ps.add_argument("--horizon", type=int, required=True, metavar="T",
                    help="number of steps; the instance has T+1 time points")
    ps.add_argument("--samples", type=int, required=True, metavar="N",
                    help="observations per time point (train and validation each)")
    ps.add_argument("--change-frac", type=float, default=0.04,
                    help="fraction of nonzero pairs swapped at each step (default 0.04)")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out-dir", type=Path, required=True,
                    help="writes train.csv, valid.csv, truth.csv here")

    pv = sub.add_parser("solve", help="compute the full solution path from a sample file")
    pv.add_argument("--model", choices=("gmrf", "dmrf"), default="gmrf")
    pv.add_argument("--train", type=Path, required=True, help="sample CSV (t,sample,i,value|state)")
    pv.add_argument("--q", type=float, default=0.0, choices=(0.0, 1.0, 2.0),
                    help="temporal exponent: 0 for sparse changes, 1/2 for smooth ones")
    pv.add_argument("--lam", type=float, default=None,
                    help="constant box radius lambda around the surrogate parameters")
    pv.add_argument("--lam0", type=float, default=None,
                    help="scale for the sample-size radius rule lambda_t = lam0*sqrt(log n/N_t) "
                         "(gmrf), lam0*sqrt(log p/N_t) or lam0*sqrt(n/(T N h)) with a kernel (dmrf)")
    pv.add_argument("--nu0", type=float, default=0.0,
                    help="gmrf shrinkage scale: nu_t = nu0*sqrt(log n/N_t)")
    pv.add_argument("--nu-rule", choices=("per-period", "pooled"), default="per-period",
                    help="divide by N_t (per-period) or by T*N_t (pooled)")
    pv.add_argument("--center", action="store_true",
                    help="subtract per-time empirical means before the second moments")
    pv.add_argument("--states", type=int, default=None,
                    help="dmrf state count K (default: inferred from the data)")
    pv.add_argument("--alpha", type=float, default=0.0, help="dmrf Laplace pseudocount")
    pv.add_argument("--rho", type=float, default=1.0,
                    help="dmrf edge appearance weight (scalar, default 1)")
    pv.add_argument("--rho-file", type=Path, default=None,
                    help="dmrf per-edge appearance weights: headerless numeric "
                         "n x n CSV (overrides --rho; for tree-structured priors)")
    _add_kernel_flags(pv)
    pv.add_argument("--workers", type=int, default=1, help="coordinate solver thread count")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--out", type=Path, required=True, help="solution-path CSV")

    pe = sub.add_parser("eval", help="score a solution path against truth/validation data")
    pe.add_argument("--path", type=Path, required=True, help="solution-path CSV from solve")
    pe.add_argument("--valid", type=Path, required=True, help="validation sample CSV")
    pe.add_argument("--truth", type=Path, default=None, help="truth CSV (t,i,j,value)")
    pe.add_argument("--gamma-grid", type=str, default="0.01:0.99:99",
                    help="lo:hi:count sparsity-level grid (default 99 points)")
    pe.add_argument("--out", type=Path, required=True, help="metrics CSV")

    pd = sub.add_parser("discretize", help="binarize a percent-change matrix into volatility states")
    pd.add_argument("--input", type=Path, required=True,
                    help="headerless numeric CSV, securities in rows, days in columns")
    pd.add_argument("--period-length", type=int, required=True, metavar="N",
                    help="days per period; the trailing remainder is discarded")
    pd.add_argument("--per-security", action="store_true",
                    help="pick the threshold per security instead of globally")
    pd.add_argument("--out", type=Path, required=True, help="discrete sample CSV")
    return ap


def _cmd_synth(args) -> int:
    truth, train, valid = synth.make_instance(
        args.n, args.horizon, args.samples, args.change_frac, args.seed
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    pathio.write_samples_csv(args.out_dir / "train.csv", train)
    pathio.write_samples_csv(args.out_dir / "valid.csv", valid)
    pathio.write_truth_csv(args.out_dir / "truth.csv", truth.theta)
    print(f"wrote {args.out_dir}/train.csv valid.csv truth.csv "
          f"(n={args.n}, T={args.horizon}, N={args.samples}, rng={truth.rng_algorithm})")
    return 0


def _read_matrix_csv(path, n: int) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(p) for p in line.split(",")])
            except ValueError as e:
                raise DataError(str(e), line=ln) from None
    m = np.array(rows)
    if m.shape != (n, n):
        raise DataError(f"expected an {n} x {n} matrix, got {m.shape}")
    return m


def _kernel_spec(args, T: int, model: str):
    if args.kernel is None:
        return None
    if args.bandwidth is not None:
        h = args.bandwidth
    elif model == "gmrf":
        h = smoothing.default_bandwidth(T)
    else:
        h = smoothing.stock_bandwidth(T)
    return smoothing.KernelSpec(args.kernel, h)


def _cmd_solve(args) -> int:
    cfg = RunConfig(
        model=args.model, q=args.q, lam=args.lam, lam0=args.lam0, nu0=args.nu0,
        nu_rule=args.nu_rule, center=args.center, states=args.states, alpha=args.alpha,
        rho=args.rho, raw_weights=args.raw_weights, workers=args.workers, seed=args.seed,
    )
    discrete_data = cfg.model == "dmrf"
    samples = pathio.read_samples_csv(args.train, discrete=discrete_data)
    Tp1 = len(samples)
    T = Tp1 - 1
    n = samples[0].shape[1]
    counts = np.array([x.shape[0] for x in samples], dtype=np.float64)
    spec = _kernel_spec(args, max(T, 1), cfg.model)
    renorm = not cfg.raw_weights

    t0 = time.perf_counter()
    if cfg.model == "gmrf":
        if spec is None:
            cov = gaussian.sample_covariance(samples, center=cfg.center)
        else:
            cov = smoothing.kernel_covariance(samples, spec, renorm, center=cfg.center)
        nus = gaussian.default_thresholds(
            n, counts, cfg.nu0, horizon=T if cfg.nu_rule == "pooled" else None
        )
        lam = np.full(Tp1, cfg.lam) if cfg.lam is not None else gaussian.default_deviations(
            n, counts, cfg.lam0
        )
        est = gaussian.backward_estimate(cov, nus, lam)
        lower, upper, (rows, cols) = gaussian.build_intervals(est)
    else:
        K = cfg.states if cfg.states is not None else int(max(np.max(x) for x in samples)) + 1
        p_per_t = n * K + n * (n - 1) // 2 * K * K
        if cfg.lam is not None:
            lam = np.full(Tp1, cfg.lam)
        elif spec is not None:
            lam = np.full(Tp1, cfg.lam0 * math.sqrt(n / (T * float(np.mean(counts)) * spec.bandwidth)))
        else:
            lam = cfg.lam0 * np.sqrt(math.log(p_per_t) / counts)
        rho = cfg.rho if args.rho_file is None else _read_matrix_csv(args.rho_file, n)
        lower, upper, (rows, cols) = discrete.build_intervals_dmrf_streaming(
            samples, K, lam, alpha=cfg.alpha, spec=spec, renormalize=renorm, rho=rho
        )
    t1 = time.perf_counter()
    paths = solve_parametric_batch(lower, upper, cfg.q, workers=cfg.workers)
    t2 = time.perf_counter()
    pathio.write_path_csv(args.out, paths, rows, cols)
    print(f"backward mapping: {t1 - t0:.2f} s")
    print(f"dynamic program:  {t2 - t1:.2f} s")
    print(f"total:            {t2 - t0:.2f} s")
    print(f"wrote {args.out} ({len(paths)} coordinates, T={T})")
    return 0


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise ConfigError(f"--gamma-grid expects lo:hi:count, got {text!r}") from None
    if not (0.0 <= lo <= hi < 1.0) or count < 1:
        raise ConfigError("gamma grid must satisfy 0 <= lo <= hi < 1 and count >= 1")
    return np.linspace(lo, hi, count)


def _cmd_eval(args) -> int:
    valid = pathio.read_samples_csv(args.valid)
    Tp1 = len(valid)
    n = valid[0].shape[1]
    truth = None
    if args.truth is not None:
        truth = pathio.read_truth_csv(args.truth)
        if truth.shape != (Tp1, n, n):
            raise DataError(
                f"truth shape {truth.shape} does not match validation data ({Tp1}, {n}, {n})"
            )
    pf = pathio.read_path_csv(args.path)
    grid = _parse_grid(args.gamma_grid)
    moments, counts = metrics.second_moments(valid)
    best_idx, reports = metrics.score_gamma_grid(
        lambda g: pf.estimate_at(g, Tp1, n), grid, moments, counts, truth
    )
    pathio.write_metrics_csv(args.out, reports)
    best = reports[best_idx]
    print(f"best gamma: {best.gamma:g} (nll {best.nll:.6g})")
    if truth is not None:
        print(f"f1_params {best.f1_params:.4f}  f1_diffs {best.f1_diffs:.4f}  "
              f"error {best.error:.4%}")
    print(f"wrote {args.out} ({len(reports)} grid points)")
    return 0


def _cmd_discretize(args) -> int:
    rows = []
    width = None
    with open(args.input, encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError as e:
                raise DataError(str(e), line=ln) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(f"expected {width} columns, got {len(row)}", line=ln)
            rows.append(row)
    if not rows:
        raise DataError("no data rows")
    changes = np.abs(np.array(rows))  # securities x days
    nsec, days = changes.shape
    N = args.period_length
    if N < 1 or N > days:
        raise ConfigError(f"--period-length must be in [1, {days}]")
    if args.per_security:
        kappa = np.median(changes, axis=1, keepdims=True)
    else:
        kappa = np.median(changes)
    states = (changes > kappa).astype(np.int64)
    T = days // N
    samples = [states[:, t * N:(t + 1) * N].T for t in range(T)]
    pathio.write_samples_csv(args.out, samples, discrete=True)
    kdesc = "per-security" if args.per_security else f"{float(np.asarray(kappa).ravel()[0]):g}"
    print(f"kappa: {kdesc}; periods: {T} x {N} days ({days - T * N} days discarded)")
    print(f"wrote {args.out} ({nsec} securities)")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "solve": _cmd_solve,
    "eval": _cmd_eval,
    "discretize": _cmd_discretize,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except TvmrfError as e:  # safety net for future subclasses
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
