"""Batch front end: ``gen-data``, ``train``, ``sample``, ``sweep``, ``eval``, ``diagnose``.

Every command resolves its parameters from built-in defaults, then an
optional ``--config`` file of ``key = value`` lines, then command-line flags,
and writes the resolved set as ``config.txt`` next to its outputs. Feeding
that file back through ``--config`` reproduces the outputs byte for byte.

Guidance stacks use the grammar ``cfg:1.5 + spg:0.3:5``; terms are
``cfg:s``, ``spg:s:k[:both]``, ``sagdet:s:k[:both]``, ``icg:s[:sigma]`` and
``sg:s:delta_t``. ``none`` means unguided sampling.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from spglab import trajio
from spglab.core import Condition, NoiseSchedule, Trajectory, make_linear_schedule, make_scaled_linear_schedule
from spglab.guidance import GuidanceStack
from spglab.metrics import EvalReport, Reference, evaluate, format_table, reports_json
from spglab.sampler import ChainRNG, ddpm_sample
from spglab.toymodel import SyntheticMotionSpec, TinyDenoiser, TrainConfig, sample_arrays, train

log = logging.getLogger("spglab")

COMMANDS = ("gen-data", "train", "sample", "sweep", "eval", "diagnose")
THREADS_ENV = "SPG_THREADS"
DATA_PREFIX = "data."


class ConfigError(ValueError):
    pass


# -- flat key = value configuration -------------------------------------------


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # int, float, str, bool, ints, floats, strs
    default: object
    commands: tuple[str, ...]
    help: str


def _n_default(cmd):
    return {"gen-data": 4096, "diagnose": 10}.get(cmd, 256)


KEYS = [
    Key("seed", "int", 0, COMMANDS, "base random seed"),
    Key("n", "int", _n_default, ("gen-data", "sample", "sweep", "diagnose"),
        "trajectories to generate / samples per run or sweep cell / chains to diagnose"),
    Key("spec", "str", "", ("gen-data",), "optional key = value file of synthetic-data fields"),
    Key("dataset", "str", "data", ("train",), "dataset directory written by gen-data"),
    Key("schedule", "str", "scaled_linear:50", ("train",),
        "noise schedule: linear:T[:beta_start:beta_end] or scaled_linear:T[:beta_start:beta_end]"),
    Key("width", "int", 56, ("train",), "hidden width of the denoiser"),
    Key("skip", "bool", False, ("train",), "use the skip-connection preconditioning"),
    Key("model_seed", "int", 0, ("train",), "parameter initialization seed"),
    Key("steps", "int", 9000, ("train",), "optimizer steps"),
    Key("batch_size", "int", 64, ("train",), "minibatch size"),
    Key("lr", "float", 1e-3, ("train",), "learning rate"),
    Key("momentum", "float", 0.9, ("train",), "SGD momentum"),
    Key("cond_dropout", "float", 0.1, ("train",), "probability of training on the null condition"),
    Key("model", "str", "model/model.tden", ("sample", "sweep", "diagnose"), "TDEN1 checkpoint"),
    Key("stack", "str", "none", ("sample",), "guidance stack"),
    Key("frame_rate", "float", 20.0, ("sample",), "frame rate stamped on sampled trajectories"),
    Key("samples", "str", "samples", ("eval",), "sample directory written by sample"),
    Key("reference", "str", "reference", ("eval", "sweep"), "dataset directory holding reference data"),
    Key("pairs", "int", 300, ("eval", "sweep"), "random pairs for the diversity score"),
    Key("methods", "strs", ["none", "spg", "sagdet"], ("sweep",),
        "methods to sweep: none, cfg, spg, sagdet, spg-both, sagdet-both, icg, sg, cfg+spg"),
    Key("s_grid", "floats", [0.1, 0.2, 0.3, 0.5, 0.7], ("sweep",), "guidance scales"),
    Key("k_grid", "ints", [3, 5, 7, 9, 11], ("sweep",), "smoothing windows"),
    Key("dt_grid", "ints", [10, 20], ("sweep",), "timestep shifts for sg"),
    Key("cfg_grid", "floats", [1.5], ("sweep",), "CFG scales for cfg+spg"),
    Key("seeds", "ints", [], ("sweep",), "sampling seeds (empty: use --seed)"),
    Key("stacks", "strs", ["none", "cfg:1.5", "spg:0.3:5", "cfg:1.5 + spg:0.3:5"], ("diagnose",),
        "comma-separated guidance stacks to compare"),
    Key("repeats", "int", 1, ("diagnose",), "timed repetitions per stack (minimum is reported)"),
]
KEY_BY_NAME = {k.name: k for k in KEYS}

_SPEC_FIELDS = {f.name: f for f in fields(SyntheticMotionSpec) if f.init}


def _spec_kind(name):
    default = getattr(SyntheticMotionSpec(), name)
    if isinstance(default, tuple):
        return "floats" if isinstance(default[0], float) else "ints"
    return type(default).__name__


def parse_value(kind: str, text: str):
    text = text.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind == "str":
            return text
        items = [t.strip() for t in text.split(",") if t.strip()]
        conv = {"ints": int, "floats": float, "strs": str}[kind]
        return [conv(t) for t in items]
    except ValueError:
        raise ConfigError(f"cannot read {text!r} as {kind}") from None


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def read_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{i}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def write_pairs(pairs: dict) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in pairs.items())


class RunConfig:
    """Resolved parameters of one command."""

    def __init__(self, command: str):
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        self.command = command
        self.values: dict[str, object] = {}
        for key in KEYS:
            if command in key.commands:
                d = key.default(command) if callable(key.default) else key.default
                self.values[key.name] = list(d) if isinstance(d, list) else d
        self.data: dict[str, object] = {}

    def set(self, name: str, raw):
        """Set from text (file or flag) or from an already typed value."""
        if name == "command":
            if raw != self.command:
                raise ConfigError(f"config is for {raw!r}, not {self.command!r}")
            return
        if name.startswith(DATA_PREFIX):
            field = name[len(DATA_PREFIX):]
            if self.command != "gen-data" or field not in _SPEC_FIELDS:
                raise ConfigError(f"unknown key {name!r} for {self.command}")
            self.data[field] = parse_value(_spec_kind(field), raw) if isinstance(raw, str) else raw
            return
        if name not in self.values:
            raise ConfigError(f"unknown key {name!r} for {self.command}")
        kind = KEY_BY_NAME[name].kind
        self.values[name] = parse_value(kind, raw) if isinstance(raw, str) else raw

    def update_text(self, text: str, source: str = "<config>"):
        for k, v in read_pairs(text, source).items():
            self.set(k, v)

    def __getitem__(self, name):
        return self.values[name]

    def resolved(self) -> dict:
        out = {"command": self.command, **self.values}
        if self.command == "gen-data":
            for k, v in self.synthetic_spec().to_dict().items():
                out[DATA_PREFIX + k] = v
        return out

    def to_text(self) -> str:
        return write_pairs(self.resolved())

    def synthetic_spec(self) -> SyntheticMotionSpec:
        kw = {}
        if self.values.get("spec"):
            path = Path(self.values["spec"])
            for k, v in read_pairs(_read_text(path), str(path)).items():
                k = k[len(DATA_PREFIX):] if k.startswith(DATA_PREFIX) else k
                if k not in _SPEC_FIELDS:
                    raise ConfigError(f"{path}: unknown data field {k!r}")
                kw[k] = parse_value(_spec_kind(k), v)
        kw.update(self.data)
        return SyntheticMotionSpec(**kw)


# -- helpers --------------------------------------------------------------------


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def parse_schedule(text: str) -> NoiseSchedule:
    parts = text.strip().split(":")
    kind, args = parts[0], parts[1:]
    if kind not in ("linear", "scaled_linear") or len(args) not in (1, 3):
        raise ConfigError(f"bad schedule {text!r}; try scaled_linear:50 or linear:1000:1e-4:0.02")
    T = int(args[0])
    betas = [float(a) for a in args[1:]] or [1e-4, 0.02]
    make = make_linear_schedule if kind == "linear" else make_scaled_linear_schedule
    return make(T, *betas)


def schedule_of(model: TinyDenoiser) -> NoiseSchedule:
    """Schedule recovered from the checkpoint's cumulative products."""
    ab = model.alpha_bar
    return NoiseSchedule.from_betas(1.0 - ab[1:] / ab[:-1])


def write_dataset(out: Path, X: np.ndarray, labels: np.ndarray, frame_rate: float):
    trajio.save_many([Trajectory(x, frame_rate) for x in X], out / "trajectories.traj")
    trajio.atomic_write(out / "labels.csv", csv_text(["index", "label"], enumerate(labels.tolist())))


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    trajs = trajio.load_many(path / "trajectories.traj")
    rows = list(csv.reader(io.StringIO(_read_text(path / "labels.csv"))))
    if not rows or rows[0] != ["index", "label"]:
        raise ValueError(f"{path / 'labels.csv'}: expected header 'index,label'")
    labels = np.array([int(r[1]) for r in rows[1:]], dtype=int)
    if len(labels) != len(trajs):
        raise ValueError(f"{path}: {len(trajs)} trajectories but {len(labels)} labels")
    return np.stack([t.data for t in trajs]), labels


def read_spec(path) -> SyntheticMotionSpec:
    pairs = read_pairs(_read_text(Path(path) / "spec.txt"), str(Path(path) / "spec.txt"))
    return SyntheticMotionSpec(**{k: parse_value(_spec_kind(k), v) for k, v in pairs.items()})


def load_reference(path, pairs: int) -> Reference:
    X, _ = read_dataset(path)
    return Reference.from_data(X, read_spec(path), pairs=pairs)


def round_robin(n: int, num_classes: int):
    labels = np.arange(n) % num_classes
    return labels, [Condition.label(int(y)) for y in labels]


def run_cell(model, schedule, ref: Reference, stack: str, seed: int, n: int, pairs: int = 300):
    """Sample ``n`` vectorized chains under ``stack`` and score them; returns (report, diagnostics)."""
    labels, conds = round_robin(n, ref.spec.num_classes)
    x, diag = ddpm_sample(model, schedule, GuidanceStack.parse(stack), conds, ChainRNG.from_seed(seed),
                          (n, model.J, model.N))
    return evaluate(x, labels, ref, pairs=pairs), diag


# -- sweep grid -----------------------------------------------------------------

METHODS = {
    "none": ("none", ()),
    "cfg": ("cfg:{s}", ("s",)),
    "spg": ("spg:{s}:{k}", ("s", "k")),
    "sagdet": ("sagdet:{s}:{k}", ("s", "k")),
    "spg-both": ("spg:{s}:{k}:both", ("s", "k")),
    "sagdet-both": ("sagdet:{s}:{k}:both", ("s", "k")),
    "icg": ("icg:{s}", ("s",)),
    "sg": ("sg:{s}:{dt}", ("s", "dt")),
    "cfg+spg": ("cfg:{c} + spg:{s}:{k}", ("c", "s", "k")),
}

SWEEP_HEADER = ["method", "stack", "cfg_scale", "s", "k", "delta_t", "seed",
                "ffd", "diversity", "diversity_gap", "accuracy", "accel", "error"]


@dataclass(frozen=True)
class Cell:
    method: str
    seed: int
    s: float | None = None
    k: int | None = None
    dt: int | None = None
    c: float | None = None

    @property
    def stack(self) -> str:
        fmt, _ = METHODS[self.method]
        return fmt.format(s=self.s, k=self.k, dt=self.dt, c=self.c)


def sweep_cells(methods, seeds, s_grid, k_grid, dt_grid, cfg_grid) -> list[Cell]:
    """Cells in grid order: seed, then method, then the method's axes."""
    axes = {"s": s_grid, "k": k_grid, "dt": dt_grid, "c": cfg_grid}
    cells = []
    for seed in seeds:
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown sweep method {m!r}; choose from {', '.join(METHODS)}")
            names = METHODS[m][1]
            for combo in itertools.product(*(axes[a] for a in names)):
                cells.append(Cell(m, seed, **dict(zip(names, combo))))
    return cells


def sweep_row(cell: Cell, report: EvalReport | None, error: str | None) -> list:
    metrics = report.row() if report is not None else [None] * 5
    head = [cell.method, cell.stack, cell.c, cell.s, cell.k, cell.dt, cell.seed]
    return [_csv_cell(v) for v in head + metrics] + [error or ""]


def run_sweep(model, ref: Reference, cells, n: int, pairs: int = 300, workers: int = 1) -> list[list]:
    schedule = schedule_of(model)

    def one(cell):
        try:
            rep, _ = run_cell(model, schedule, ref, cell.stack, cell.seed, n, pairs)
            return sweep_row(cell, rep, None)
        except Exception as exc:  # recorded in the row, the sweep goes on
            return sweep_row(cell, None, f"{type(exc).__name__}: {exc}")

    if workers <= 1:
        return [one(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, cells))


# -- commands -------------------------------------------------------------------


def _finish(cfg: RunConfig, out: Path):
    trajio.atomic_write(out / "config.txt", cfg.to_text())


def cmd_gen_data(cfg: RunConfig, out: Path, threads: int):
    n = cfg["n"]
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    spec = cfg.synthetic_spec()
    X, labels = sample_arrays(spec, n, np.random.default_rng(cfg["seed"]))
    write_dataset(out, X, labels, spec.frame_rate)
    trajio.atomic_write(out / "spec.txt", write_pairs(spec.to_dict()))
    log.info("wrote %d trajectories to %s", n, out)


def cmd_train(cfg: RunConfig, out: Path, threads: int):
    X, labels = read_dataset(cfg["dataset"])
    spec = read_spec(cfg["dataset"])
    schedule = parse_schedule(cfg["schedule"])
    model = TinyDenoiser(spec.J, spec.N, spec.num_classes, schedule.alpha_bar, width=cfg["width"],
                         skip=cfg["skip"], seed=cfg["model_seed"])
    tc = TrainConfig(steps=cfg["steps"], batch_size=cfg["batch_size"], lr=cfg["lr"],
                     momentum=cfg["momentum"], cond_dropout=cfg["cond_dropout"], seed=cfg["seed"])
    res = train(model, (X, labels), schedule, tc)
    model.save(out / "model.tden")
    trajio.atomic_write(out / "loss.csv", csv_text(["step", "loss"],
                                                   ((i + 1, repr(v)) for i, v in enumerate(res.losses))))
    summary = {"initial_loss": res.initial_loss, "final_loss": res.final_loss, "steps": len(res.losses),
               "num_params": model.num_params(), "supports_null": model.supports_null}
    trajio.atomic_write(out / "train.json", json.dumps(summary, indent=2) + "\n")
    log.info("loss %.4f -> %.4f", res.initial_loss, res.final_loss)


def cmd_sample(cfg: RunConfig, out: Path, threads: int):
    model = TinyDenoiser.load(cfg["model"])
    n = cfg["n"]
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    labels, conds = round_robin(n, model.num_classes)
    stack = GuidanceStack.parse(cfg["stack"])
    x, diag = ddpm_sample(model, schedule_of(model), stack, conds, ChainRNG.from_seed(cfg["seed"]),
                          (n, model.J, model.N))
    write_dataset(out, x, labels, cfg["frame_rate"])
    doc = {"stack": str(stack), "steps": len(diag.steps), "denoiser_calls": diag.denoiser_calls,
           "eps_norm_mean": diag.eps_norm.mean(axis=1).tolist()}
    trajio.atomic_write(out / "diagnostics.json", json.dumps(doc, indent=2) + "\n")


def cmd_eval(cfg: RunConfig, out: Path, threads: int):
    ref = load_reference(cfg["reference"], cfg["pairs"])
    X, labels = read_dataset(cfg["samples"])
    rep = evaluate(X, labels, ref, pairs=cfg["pairs"])
    Xr, yr = read_dataset(cfg["reference"])
    gt = evaluate(Xr, yr, ref, pairs=cfg["pairs"])
    rows = {"Real": gt, Path(cfg["samples"]).name or "samples": rep}
    trajio.atomic_write(out / "metrics.json", reports_json(rows) + "\n")
    trajio.atomic_write(out / "metrics.txt", format_table(rows) + "\n")
    print(format_table(rows))


def cmd_sweep(cfg: RunConfig, out: Path, threads: int):
    model = TinyDenoiser.load(cfg["model"])
    ref = load_reference(cfg["reference"], cfg["pairs"])
    if (ref.spec.J, ref.spec.N, ref.spec.num_classes) != (model.J, model.N, model.num_classes):
        raise ConfigError("reference data shape or class count does not match the model")
    seeds = cfg["seeds"] or [cfg["seed"]]
    cells = sweep_cells(cfg["methods"], seeds, cfg["s_grid"], cfg["k_grid"], cfg["dt_grid"], cfg["cfg_grid"])
    log.info("sweeping %d cells on %d worker(s)", len(cells), threads)
    rows = run_sweep(model, ref, cells, cfg["n"], cfg["pairs"], workers=threads)
    trajio.atomic_write(out / "sweep.csv", csv_text(SWEEP_HEADER, rows))
    failed = sum(1 for r in rows if r[-1])
    if failed:
        log.warning("%d of %d cells failed; see the error column", failed, len(rows))


def diagnose(model, stacks, n: int, seed: int, repeats: int = 1):
    """Per-stack mean eps-norm trace and cost accounting (best-of-``repeats`` wall time)."""
    schedule = schedule_of(model)
    labels, conds = round_robin(n, model.num_classes)
    traces, calls, times = {}, {}, {}
    for text in stacks:
        stack = GuidanceStack.parse(text)
        best = float("inf")
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            _, diag = ddpm_sample(model, schedule, stack, conds, ChainRNG.from_seed(seed), (n, model.J, model.N))
            best = min(best, time.perf_counter() - start)
        name = str(stack)
        traces[name] = diag.eps_norm.mean(axis=1)
        calls[name] = {"per_step": diag.denoiser_calls // schedule.T, "total": diag.denoiser_calls}
        times[name] = best
    return traces, calls, times, diag.steps


def cmd_diagnose(cfg: RunConfig, out: Path, threads: int):
    model = TinyDenoiser.load(cfg["model"])
    if cfg["n"] < 1:
        raise ConfigError("n must be >= 1")
    traces, calls, times, steps = diagnose(model, cfg["stacks"], cfg["n"], cfg["seed"], cfg["repeats"])
    names = list(traces)
    rows = [[t] + [repr(float(traces[k][i])) for k in names] for i, t in enumerate(steps)]
    trajio.atomic_write(out / "eps_trace.csv", csv_text(["t"] + names, rows))
    trajio.atomic_write(out / "diagnose.json", json.dumps({"n": cfg["n"], "calls": calls}, indent=2) + "\n")
    # wall times vary run to run, so they live apart from the reproducible outputs
    trajio.atomic_write(out / "timing.json", json.dumps({"wall_time_s": times}, indent=2) + "\n")


HANDLERS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "sample": cmd_sample,
    "sweep": cmd_sweep,
    "eval": cmd_eval,
    "diagnose": cmd_diagnose,
}

_SUMMARIES = {
    "gen-data": "draw a synthetic trajectory dataset",
    "train": "train the small denoiser on a dataset",
    "sample": "sample trajectories under a guidance stack",
    "sweep": "grid sweep of guidance parameters, one CSV row per cell",
    "eval": "score a sample directory against reference data",
    "diagnose": "eps-norm traces and denoiser cost per guidance stack",
}


# -- argument parsing -----------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base random seed")
    parser.add_argument("--config", default=argparse.SUPPRESS, help="key = value file (flags override it)")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: out)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spglab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    _global_flags(parser)
    parser.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=_SUMMARIES[cmd], description=_SUMMARIES[cmd])
        _global_flags(p)
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        for key in KEYS:
            if cmd in key.commands and key.name != "seed":
                p.add_argument("--" + key.name.replace("_", "-"), dest="key_" + key.name,
                               default=argparse.SUPPRESS, metavar=key.kind.upper(), help=key.help)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="set any config key, e.g. data.N=64")
    return parser


def resolve(args: argparse.Namespace) -> tuple[RunConfig, Path, int]:
    cfg = RunConfig(args.command)
    if getattr(args, "config", None):
        path = Path(args.config)
        cfg.update_text(_read_text(path), str(path))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        cfg.set(k.strip(), v)
    for name, value in vars(args).items():
        if name.startswith("key_"):
            cfg.set(name[4:], value)
    if hasattr(args, "seed"):
        cfg.set("seed", args.seed)
    threads = getattr(args, "threads", None)
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        try:
            threads = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return cfg, Path(getattr(args, "out", "out")), threads


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg, out, threads = resolve(args)
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[cfg.command](cfg, out, threads)
        _finish(cfg, out)
    except Exception as exc:
        print(f"spglab {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
