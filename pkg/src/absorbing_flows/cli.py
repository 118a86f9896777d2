"""Command-line front end: ``absorbing-flows {build,verify,evolve,gap,demo-perturbation,sweep}``.

Exit codes: 0 success, 1 a certificate failed, 2 invalid arguments or input
values, 3 a model file that does not parse against the schema.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, flowbuild, generator, presets
from .errors import FlowError, NotADensity, NotInvariant, NoInvariantState, SchemaError
from .states import FaithfulState, make_state, matrix_from_json

SEED_ENV = "ABSORBING_FLOWS_SEED"
DEFAULT_STEPS = 64
GRID_START = 1e-2
DEFAULT_TMAX = 50.0
DECAY_TARGET = 1e-6
VERIFY_TOL = 1e-9
SWEEP_CAP = 5
SUM_RENORMALIZE_TOL = 1e-9
CHOI_SAMPLE_TIMES = (0.1, 1.0, 10.0)


class UsageError(FlowError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    eigenvalues: tuple[float, ...] | None
    index: int | None
    model: str | None
    rho0: str
    tmax: float | None
    steps: int
    log_grid: bool
    seed: int | None
    tol: float
    out: str | None
    m_max: int
    epsilon: float
    r_max: int


def parse_eigenvalues(text: str) -> tuple[float, ...]:
    """Comma-separated decimals; renormalized only when already within 1e-9 of summing to 1."""
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"eigenvalues must be comma-separated numbers: {exc}") from None
    if len(values) < 2:
        raise UsageError("at least two eigenvalues are required")
    if any(v <= 0 for v in values):
        raise UsageError("eigenvalues must be strictly positive")
    if any(b > a for a, b in zip(values, values[1:])):
        raise UsageError("eigenvalues must be listed in non-increasing order")
    total = math.fsum(values)
    if abs(total - 1.0) > SUM_RENORMALIZE_TOL:
        raise UsageError(f"eigenvalues must sum to 1 (got {total:.12g})")
    return tuple(v / total for v in values)


def time_grid(tmax: float, steps: int, log_grid: bool) -> np.ndarray:
    if not tmax > 0:
        raise UsageError("--tmax must be positive")
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    if log_grid:
        start = min(GRID_START, tmax / 10.0)
        return np.geomspace(start, tmax, steps)
    return np.linspace(0.0, tmax, steps)


def resolve_seed(seed: int | None) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_model(source: str, cfg: RunConfig) -> tuple[generator.LindbladGenerator, FaithfulState]:
    """Read a generator JSON file, or build a ``preset:NAME`` reference model."""
    if source.startswith("preset:"):
        name = source.split(":", 1)[1]
        lam = cfg.eigenvalues or (2 / 3, 1 / 3)
        state = make_state(lam)
        if name == "depolarizing":
            return presets.depolarizing(state), state
        if name == "dephasing":
            state = make_state([1.0 / len(lam)] * len(lam))
            return presets.dephasing(state.r), state
        raise UsageError(f"unknown preset {name!r} (choose depolarizing or dephasing)")
    try:
        with open(source) as fh:
            obj = json.load(fh)
        if not isinstance(obj, dict):
            raise SchemaError("model file must hold a JSON object")
        return generator.generator_from_json(obj)
    except OSError as exc:
        raise SchemaError(f"cannot read model file: {exc}") from None
    except (json.JSONDecodeError, KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"model file does not match the generator schema: {exc!r}") from None
    except FlowError as exc:
        raise SchemaError(f"model file holds invalid data: {exc}") from None
    except ValueError as exc:
        raise SchemaError(f"model file does not match the generator schema: {exc}") from None


def parse_rho0(source: str, state: FaithfulState, seed: int | None) -> np.ndarray:
    r = state.r
    if source == "maximally-mixed":
        return np.eye(r, dtype=np.complex128) / r
    if source == "omega":
        return state.density.copy()
    if source.startswith("pure-"):
        try:
            k = int(source[5:])
        except ValueError:
            raise NotADensity(f"bad preset {source!r}") from None
        if not 0 <= k < r:
            raise NotADensity(f"pure-{k} is outside 0..{r - 1}")
        rho = np.zeros((r, r), dtype=np.complex128)
        rho[k, k] = 1.0
        return rho
    if source == "random":
        return random_density(r, np.random.default_rng(seed))
    try:
        text = Path(source).read_text() if Path(source).is_file() else source
        return matrix_from_json(json.loads(text))
    except (OSError, ValueError, TypeError, IndexError) as exc:
        raise NotADensity(f"cannot interpret --rho0 {source!r}: {exc}") from None


def random_density(r: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    rho = g @ np.conj(g).T
    return rho / np.trace(rho).real


def _summary(model: flowbuild.PureFlowModel) -> str:
    c = model.certificate
    lines = [
        f"branch            {model.branch.value}",
        f"r                 {model.state.r}",
        f"eigenvalues       {', '.join(f'{x:.12g}' for x in model.state.eigenvalue_list)}",
        f"kraus selection   {' '.join(f'({i},{j})' for i, j in model.kraus_selection)}",
        f"pure              {str(c.pure).lower()}",
        f"index             {model.index}",
        f"fixed-point dim   {c.fixed_point_dim}",
        f"commutant dim     {c.commutant_dim}",
        f"spectral gap      {c.spectral_gap:.12g}",
        f"gap constant      {c.gap_constant:.12g}",
        f"unital defect     {model.generator.unital_defect:.3e}",
        f"invariance defect {model.invariance_defect:.3e}",
    ]
    return "\n".join(lines)


def cmd_build(cfg: RunConfig) -> int:
    if cfg.eigenvalues is None or cfg.index is None:
        raise UsageError("build needs --eigenvalues and --index")
    model = flowbuild.build_theorem51(cfg.eigenvalues, cfg.index, seed=cfg.seed)
    if cfg.out:
        _atomic_write(cfg.out, _dump_json(model.to_json()))
    print(_summary(model))
    return 0


def verify_report(gen: generator.LindbladGenerator, state: FaithfulState, tol: float = VERIFY_TOL) -> dict:
    """Every certificate the CLI checks, as a JSON-ready dict with an ``ok`` verdict."""
    lmap = generator.as_superoperator(gen)
    report: dict = {
        "unital_defect": gen.unital_defect,
        "invariance_defect": generator.invariance_defect(lmap, state),
    }
    q = generator.kraus_map(gen.kraus, gen.r)
    holds, residual = generator.criterion_38(q, state)
    report["criterion_38"] = holds
    report["criterion_38_residual"] = residual
    choi_min = min(generator.choi_positive(analysis.evolve(lmap, t))[1] for t in CHOI_SAMPLE_TIMES)
    report["choi_min_eigenvalue"] = choi_min
    idx, space = flowbuild.index(gen, state)
    report["index"] = idx
    report["intersects_scalars"] = space.intersects_scalars
    try:
        cert = analysis.purity_verdict(gen, state, tol=tol if tol > 0 else analysis.KERNEL_TOL)
        report["certificate"] = cert.to_json()
        pure = cert.pure
    except (NoInvariantState, NotInvariant) as exc:
        report["certificate"] = None
        report["certificate_error"] = str(exc)
        pure = False
    report["ok"] = bool(
        report["unital_defect"] <= VERIFY_TOL
        and report["invariance_defect"] <= VERIFY_TOL
        and holds
        and choi_min >= -VERIFY_TOL
        and pure
    )
    return report


def cmd_verify(cfg: RunConfig) -> int:
    if not cfg.model:
        raise UsageError("verify needs --model")
    gen, state = load_model(cfg.model, cfg)
    report = verify_report(gen, state, cfg.tol)
    text = _dump_json(report)
    if cfg.out:
        _atomic_write(cfg.out, text)
    print(text, end="")
    return 0 if report["ok"] else 1


def cmd_evolve(cfg: RunConfig) -> int:
    if not cfg.model:
        raise UsageError("evolve needs --model")
    gen, state = load_model(cfg.model, cfg)
    rho0 = parse_rho0(cfg.rho0, state, cfg.seed)
    lmap = generator.as_superoperator(gen)
    try:
        cert = analysis.purity_verdict(gen, state, tol=cfg.tol, m_max=cfg.m_max)
        gap = analysis.spectral_gap(lmap, state, cfg.m_max)
    except (NoInvariantState, NotInvariant):
        cert, gap = None, None
    tmax = cfg.tmax
    if tmax is None:
        tmax = 50.0 / gap.epsilon if gap is not None and gap.epsilon > 0 else DEFAULT_TMAX
    grid = time_grid(tmax, cfg.steps, cfg.log_grid)
    report = analysis.trajectory(gen, state, rho0, grid, gap=gap)
    csv_text = report.to_csv()
    if cfg.out:
        _atomic_write(cfg.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    print(f"final distance {report.final_distance:.6e} at t = {report.times[-1]:.6g}", file=sys.stderr)
    if cert is None or not cert.pure:
        print("no decay detected: model is not certified pure", file=sys.stderr)
        return 1
    if report.final_distance > DECAY_TARGET:
        print(f"no decay detected: final distance exceeds {DECAY_TARGET:g}", file=sys.stderr)
        return 1
    return 0


def cmd_gap(cfg: RunConfig) -> int:
    if not cfg.model:
        raise UsageError("gap needs --model")
    gen, state = load_model(cfg.model, cfg)
    try:
        gap = analysis.spectral_gap(generator.as_superoperator(gen), state, cfg.m_max)
    except NotInvariant as exc:
        print(f"gap undefined: {exc}", file=sys.stderr)
        return 1
    out = {"epsilon": gap.epsilon, "constant": gap.constant, "spectral_radius": gap.spectral_radius, "m_max": cfg.m_max}
    text = _dump_json(out)
    if cfg.out:
        _atomic_write(cfg.out, text)
    print(text, end="")
    return 0 if gap.epsilon > 0 else 1


def cmd_demo_perturbation(cfg: RunConfig) -> int:
    lam = cfg.eigenvalues or (2 / 3, 1 / 3)
    state = make_state(lam)
    demo = generator.demo_3_19(state, cfg.epsilon)
    out = {
        "eigenvalues": list(state.eigenvalue_list),
        "epsilon": cfg.epsilon,
        "defect_before": demo.defect_before,
        "defect_after": demo.defect_after,
        "ell": [[[z.real, z.imag] for z in row] for row in demo.ell],
    }
    text = _dump_json(out)
    if cfg.out:
        _atomic_write(cfg.out, text)
    print(f"defect before perturbation {demo.defect_before:.12g}")
    print(f"defect after perturbation  {demo.defect_after:.3e}")
    return 0 if demo.defect_after <= VERIFY_TOL else 1


SWEEP_HEADER = ["r", "n", "branch", "pure", "index", "gap", "max_defect", "status"]


def sweep_rows(r_max: int, seed: int | None = None) -> list[dict]:
    rows = []
    for r in range(2, r_max + 1):
        for lam in (flowbuild.constant_list(r), flowbuild.nonconstant_list(r)):
            for n in range(1, r * r):
                row = {"r": r, "n": n}
                try:
                    model = flowbuild.build_theorem51(lam, n, seed=seed)
                    defect = max(model.generator.unital_defect, model.invariance_defect)
                    ok = model.certificate.pure and model.index == n and defect <= VERIFY_TOL
                    row.update(
                        branch=model.branch.value,
                        pure=str(model.certificate.pure).lower(),
                        index=model.index,
                        gap=f"{model.certificate.spectral_gap:.17g}",
                        max_defect=f"{defect:.17g}",
                        status="ok" if ok else "failed",
                    )
                except FlowError as exc:
                    branch = "Tracial" if flowbuild.is_constant_list(lam) else "NonTracial"
                    row.update(branch=branch, pure="false", index="", gap="", max_defect="", status=f"error: {exc}")
                rows.append(row)
    return rows


def cmd_sweep(cfg: RunConfig) -> int:
    if not 2 <= cfg.r_max <= SWEEP_CAP:
        raise UsageError(f"--r-max must lie in 2..{SWEEP_CAP}")
    rows = sweep_rows(cfg.r_max, cfg.seed)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out_dir = Path(cfg.out or ".")
    _atomic_write(out_dir / "sweep.csv", buf.getvalue())
    failed = [row for row in rows if row["status"] != "ok"]
    print(f"{len(rows)} cases, {len(rows) - len(failed)} certified, {len(failed)} failed -> {out_dir / 'sweep.csv'}")
    for row in failed:
        print(f"  r={row['r']} n={row['n']} {row['branch']}: {row['status']}")
    return 1 if failed else 0


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "gap": cmd_gap,
    "demo-perturbation": cmd_demo_perturbation,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="absorbing-flows",
        description="Build, certify and simulate state-preserving pure CP semigroups on matrix algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help=f"seed (falls back to ${SEED_ENV})")
        p.add_argument("--tol", type=float, default=analysis.KERNEL_TOL, help="kernel tolerance for dimension counts")
        p.add_argument("--out", default=None, help="output file (directory for sweep)")

    p = sub.add_parser("build", help="construct a certified pure model with given eigenvalues and index")
    p.add_argument("--eigenvalues", required=True)
    p.add_argument("--index", type=int, required=True)
    common(p)

    p = sub.add_parser("verify", help="certify a generator JSON file")
    p.add_argument("--model", required=True)
    common(p)

    p = sub.add_parser("evolve", help="trace-distance trajectory to the invariant state as CSV")
    p.add_argument("--model", required=True, help="generator JSON file or preset:depolarizing / preset:dephasing")
    p.add_argument("--eigenvalues", default=None, help="state for preset models")
    p.add_argument("--rho0", default="maximally-mixed", help="maximally-mixed, pure-K, omega, random, or a JSON matrix")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--log-grid", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--m-max", type=int, default=analysis.DEFAULT_M_MAX)
    common(p)

    p = sub.add_parser("gap", help="spectral gap estimate on the mean-zero subspace")
    p.add_argument("--model", required=True)
    p.add_argument("--eigenvalues", default=None, help="state for preset models")
    p.add_argument("--m-max", type=int, default=analysis.DEFAULT_M_MAX)
    common(p)

    p = sub.add_parser("demo-perturbation", help="unperturbed generator that moves the state, and its repair")
    p.add_argument("--eigenvalues", default=None)
    p.add_argument("--epsilon", type=float, default=0.1)
    common(p)

    p = sub.add_parser("sweep", help="build and certify every (r, n) up to --r-max")
    p.add_argument("--r-max", type=int, default=3)
    common(p)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    eig = getattr(args, "eigenvalues", None)
    return RunConfig(
        command=args.command,
        eigenvalues=parse_eigenvalues(eig) if eig else None,
        index=getattr(args, "index", None),
        model=getattr(args, "model", None),
        rho0=getattr(args, "rho0", "maximally-mixed"),
        tmax=getattr(args, "tmax", None),
        steps=getattr(args, "steps", DEFAULT_STEPS),
        log_grid=getattr(args, "log_grid", True),
        seed=resolve_seed(args.seed),
        tol=args.tol,
        out=args.out,
        m_max=getattr(args, "m_max", analysis.DEFAULT_M_MAX),
        epsilon=getattr(args, "epsilon", 0.1),
        r_max=getattr(args, "r_max", 3),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
