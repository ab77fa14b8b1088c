"""Acceptance gate: one test and one summary line per criterion.

The directional suite trains the toy denoiser through the command-line
front end and keeps every sweep CSV under ``$SPG_ACCEPTANCE_DIR``
(default ``acceptance_report/`` in the working directory) for inspection.
"""

import csv
import io
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import ACCEPTANCE_LINES, IdentityDenoiser, LinearDenoiser
from spglab import cli
from spglab.core import NULL, Condition, implied_eps, make_linear_schedule, make_scaled_linear_schedule, \
    posterior_mean, q_sample
from spglab.guidance import GuidanceStack, apply_stack
from spglab.sampler import ChainRNG, ddpm_sample
from spglab.smoothing import temporal_smooth
from spglab.toymodel import TinyDenoiser
from spglab.toymodel.train import dropout_rows
from test_smoothing import brute_force_rows
from test_toymodel import _numeric_grads

SEEDS = (1, 2, 3)
S_GRID = (0.1, 0.2, 0.3, 0.5, 0.7)
K_GRID = (3, 5, 7, 9, 11)
CFG_GRID = (0.1, 0.3, 0.5, 1.0, 1.5, 2.0)
CELL_SAMPLES = 256
TOY_WIDTH, TOY_STEPS = 56, 9000


def verdict(tag, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {tag}: {detail}")
    assert ok, detail


def two_of_three(flags):
    return sum(bool(f) for f in flags) >= 2


# -- 1. exactness ---------------------------------------------------------------


def test_criterion_1_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    schedule = make_linear_schedule(50)
    cond = Condition.label(1)

    kernel_err = 0.0
    for _ in range(1000):
        J, N = rng.integers(1, 5), rng.integers(11, 40)
        k = int(rng.choice([1, 3, 5, 7, 9, 11]))
        x = rng.normal(size=(J, N))
        kernel_err = max(kernel_err, np.max(np.abs(temporal_smooth(x, k) - brute_force_rows(x, k))))

    x_t = rng.normal(size=(4, 16))
    out = apply_stack(IdentityDenoiser(), GuidanceStack.parse("cfg:1.5 + spg:0.3:5"), x_t, 20, cond,
                      np.random.default_rng(11), schedule)
    g_spg = q_sample(temporal_smooth(x_t, 5), 20, np.random.default_rng(11).standard_normal(x_t.shape), schedule)
    algebra_err = np.max(np.abs(out - ((1 + 1.5 + 0.3) * x_t - 1.5 * x_t - 0.3 * g_spg)))
    lin = LinearDenoiser(schedule.T, shape=(3, 10))
    x_t = rng.normal(size=(3, 10))
    out = apply_stack(lin, GuidanceStack.parse("cfg:2 + sagdet:0.4:3"), x_t, 33, cond, rng, schedule)
    strong, null = lin.predict_x0(x_t, 33, cond), lin.predict_x0(x_t, 33, NULL)
    eps = implied_eps(x_t, strong, 33, schedule)
    sag = lin.predict_x0(q_sample(temporal_smooth(strong, 3), 33, eps, schedule), 33, cond)
    algebra_err = max(algebra_err, np.max(np.abs(out - (strong + 2 * (strong - null) + 0.4 * (strong - sag)))))

    trip_err = 0.0
    for t in range(1, schedule.T + 1):
        x0, e = rng.normal(size=(2, 3, 12))
        trip_err = max(trip_err, np.max(np.abs(implied_eps(q_sample(x0, t, e, schedule), x0, t, schedule) - e)))
    x1, x0 = rng.normal(size=(2, 3, 12))
    t1_exact = np.array_equal(posterior_mean(x1, x0, 1, schedule), x0)

    g = LinearDenoiser(schedule.T, shape=(4, 12))
    base, _ = ddpm_sample(g, schedule, GuidanceStack(), cond, ChainRNG.from_seed(11), (4, 12))
    zero_ok = all(
        np.array_equal(base, ddpm_sample(g, schedule, GuidanceStack.parse(s), cond, ChainRNG.from_seed(11),
                                         (4, 12))[0])
        for s in ("spg:0:5", "cfg:0 + spg:0:3", "sagdet:0:5", "sg:0:10", "spg:0:5:both"))

    elapsed = time.perf_counter() - start
    ok = kernel_err <= 1e-12 and algebra_err <= 1e-12 and trip_err <= 1e-10 and t1_exact and zero_ok and elapsed < 60
    verdict("1 exactness", ok,
            f"kernel {kernel_err:.1e} algebra {algebra_err:.1e} round-trip {trip_err:.1e} "
            f"t=1 exact {t1_exact} s=0 bit-identical {zero_ok} ({elapsed:.1f}s)")


# -- 2. statistics --------------------------------------------------------------


def test_criterion_2_statistics():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    schedule = make_linear_schedule(50)
    n = 10_000
    worst_z = 0.0
    for t in (1, 10, 50):
        x0 = rng.normal(size=(2, 5))
        draws = np.stack([q_sample(x0, t, rng.standard_normal(x0.shape), schedule) for _ in range(n)])
        ab = schedule.alpha_bar[t]
        var = 1 - ab
        z_mean = np.abs(draws.mean(0) - np.sqrt(ab) * x0) / np.sqrt(var / n)
        z_var = np.abs(draws.var(0, ddof=1) - var) / (var * np.sqrt(2 / (n - 1)))
        worst_z = max(worst_z, z_mean.max(), z_var.max())

    p = 0.1
    rate = np.mean(dropout_rows(np.zeros(n, dtype=int), p, 9, rng) == 9)
    drop_z = abs(rate - p) / np.sqrt(p * (1 - p) / n)

    m = TinyDenoiser(2, 8, 2, make_linear_schedule(10).alpha_bar, width=8, temb_dim=4, cemb_dim=3, seed=1)
    r = np.random.default_rng(0)
    x0, xt = r.standard_normal((2, 5, 2, 8))
    t, rows = r.integers(1, 11, 5), np.array([0, 1, 2, 0, 2])
    _, grads = m.loss_and_grad(xt, t, rows, x0)
    num = _numeric_grads(m, xt, t, rows, x0)
    grad_rel = max(np.abs(num[k] - grads[k]).max() / max(np.abs(num[k]).max(), 1e-12) for k in m.params)

    elapsed = time.perf_counter() - start
    ok = worst_z <= 4 and drop_z <= 3 and grad_rel <= 1e-4 and elapsed < 300
    verdict("2 statistics", ok,
            f"q_sample moments max {worst_z:.2f} SE, dropout {drop_z:.2f} sigma, "
            f"gradient rel err {grad_rel:.1e} ({elapsed:.1f}s)")


# -- 3. evaluation count and cost ----------------------------------------------

STACKS = ("none", "cfg:1.5", "spg:0.3:5", "cfg:1.5 + spg:0.3:5")


def test_criterion_3_cost():
    start = time.perf_counter()
    schedule = make_scaled_linear_schedule(50)
    model = TinyDenoiser(6, 64, 3, schedule.alpha_bar, seed=0)
    _, calls, times, _ = cli.diagnose(model, STACKS, n=10, seed=0, repeats=5)
    per_step = [calls[s]["per_step"] for s in STACKS]
    ordered = times["none"] < times["cfg:1.5"] < times["spg:0.3:5"]
    elapsed = time.perf_counter() - start
    ok = per_step == [1, 2, 2, 3] and ordered and elapsed < 60
    verdict("3 cost", ok,
            f"calls/step {per_step}; wall none {times['none']:.3f}s < cfg {times['cfg:1.5']:.3f}s "
            f"< spg {times['spg:0.3:5']:.3f}s: {ordered} ({elapsed:.1f}s)")


# -- 4. directional reproduction on the toy model --------------------------------


def _grid(values):
    return ",".join(str(v) for v in values)


def _rows(path):
    rows = list(csv.DictReader(io.StringIO(Path(path).read_text())))
    for r in rows:
        for key in ("ffd", "accel"):
            r[key] = float(r[key]) if r[key] else float("inf")
    return rows


@pytest.fixture(scope="module")
def toy():
    start = time.perf_counter()
    root = Path(os.environ.get("SPG_ACCEPTANCE_DIR", "acceptance_report")).resolve()
    run = lambda *a: cli.main([str(x) for x in a])  # noqa: E731
    assert run("gen-data", "--n", 4096, "--seed", 0, "--out", root / "data") == 0
    assert run("gen-data", "--n", 2048, "--seed", 99, "--out", root / "reference") == 0
    assert run("train", "--dataset", root / "data", "--width", TOY_WIDTH, "--steps", TOY_STEPS,
               "--seed", 0, "--out", root / "model") == 0
    model = root / "model" / "model.tden"
    common = ["--model", model, "--reference", root / "reference", "--n", CELL_SAMPLES,
              "--seeds", _grid(SEEDS)]
    assert run("sweep", *common, "--methods", "none,spg,sagdet,spg-both,cfg+spg", "--s-grid", _grid(S_GRID),
               "--k-grid", _grid(K_GRID), "--cfg-grid", _grid(CFG_GRID), "--out", root / "sweep") == 0
    assert run("sweep", *common, "--methods", "cfg", "--s-grid", _grid(CFG_GRID), "--out", root / "sweep_cfg") == 0
    rows = _rows(root / "sweep" / "sweep.csv") + _rows(root / "sweep_cfg" / "sweep.csv")
    m = TinyDenoiser.load(model)

    per_seed = {}
    for seed in SEEDS:
        sel = lambda meth: [r for r in rows if r["seed"] == str(seed) and r["method"] == meth]  # noqa: E731
        base = sel("none")[0]
        spg = sel("spg")
        best = min(spg, key=lambda r: r["ffd"])
        row = [r for r in spg if r["s"] == best["s"]]
        k_arg = int(np.argmin([r["ffd"] for r in row]))
        traces, _, _, _ = cli.diagnose(m, ["none", best["stack"]], n=10, seed=seed)
        base_tr, best_tr = traces["none"], traces[str(GuidanceStack.parse(best["stack"]))]
        per_seed[seed] = {
            "base": base["ffd"],
            "spg": best["ffd"],
            "spg_cell": best["stack"],
            "u_row": [r["ffd"] for r in row],
            "u_interior": 0 < k_arg < len(row) - 1,
            "sagdet": min(r["ffd"] for r in sel("sagdet")),
            "both": min(r["ffd"] for r in sel("spg-both")),
            "cfg": min(r["ffd"] for r in sel("cfg")),
            "cfg_spg": min(r["ffd"] for r in sel("cfg+spg")),
            "accel_base": base["accel"],
            "accel_spg": best["accel"],
            "eps_fraction": float(np.mean(best_tr <= 1.05 * base_tr)),
        }
    elapsed = time.perf_counter() - start
    (root / "summary.json").write_text(json.dumps({"seconds": elapsed, "seeds": per_seed}, indent=2) + "\n")
    return {"root": root, "seeds": per_seed, "elapsed": elapsed}


def _fmt(values):
    return " ".join(f"{v:.4f}" for v in values)


def test_criterion_4a_spg_beats_baseline(toy):
    s = toy["seeds"]
    flags = [s[k]["spg"] < s[k]["base"] for k in SEEDS]
    verdict("4a SPG < baseline", two_of_three(flags),
            f"best SPG {_fmt(s[k]['spg'] for k in SEEDS)} vs baseline {_fmt(s[k]['base'] for k in SEEDS)} "
            f"at {[s[k]['spg_cell'] for k in SEEDS]}; per seed {flags}")


def test_criterion_4b_k_shape(toy):
    s = toy["seeds"]
    flags = [s[k]["u_interior"] and s[k]["u_row"][-1] > min(s[k]["u_row"]) for k in SEEDS]
    rows = "; ".join(_fmt(s[k]["u_row"]) for k in SEEDS)
    verdict("4b FFD rises again at large k", two_of_three(flags), f"best-s rows over k={K_GRID}: {rows}; per seed {flags}")


def test_criterion_4c_random_noise_beats_deterministic(toy):
    s = toy["seeds"]
    flags = [s[k]["spg"] <= s[k]["sagdet"] for k in SEEDS]
    verdict("4c SPG <= SAG-det", two_of_three(flags),
            f"SPG {_fmt(s[k]['spg'] for k in SEEDS)} vs SAG-det {_fmt(s[k]['sagdet'] for k in SEEDS)}; per seed {flags}")


def test_criterion_4d_temporal_beats_both_axes(toy):
    s = toy["seeds"]
    flags = [s[k]["both"] > s[k]["spg"] for k in SEEDS]
    verdict("4d both-axes worse than temporal", two_of_three(flags),
            f"both-axes {_fmt(s[k]['both'] for k in SEEDS)} vs temporal {_fmt(s[k]['spg'] for k in SEEDS)}; "
            f"per seed {flags}")


def test_criterion_4e_acceleration_increases(toy):
    s = toy["seeds"]
    flags = [s[k]["accel_spg"] > s[k]["accel_base"] for k in SEEDS]
    verdict("4e SPG raises |accel|", two_of_three(flags),
            f"SPG {_fmt(s[k]['accel_spg'] for k in SEEDS)} vs baseline {_fmt(s[k]['accel_base'] for k in SEEDS)}; "
            f"per seed {flags}")


def test_criterion_4f_eps_norm_trust_region(toy):
    s = toy["seeds"]
    flags = [s[k]["eps_fraction"] > 0.5 for k in SEEDS]
    verdict("4f eps-norm within baseline + 5%", two_of_three(flags),
            f"fraction of steps {[round(s[k]['eps_fraction'], 3) for k in SEEDS]}; per seed {flags}")


def test_criterion_4g_cfg_spg_complementary(toy):
    s = toy["seeds"]
    flags = [s[k]["cfg_spg"] <= min(s[k]["cfg"], s[k]["spg"]) for k in SEEDS]
    detail = (f"CFG+SPG {_fmt(s[k]['cfg_spg'] for k in SEEDS)} vs CFG {_fmt(s[k]['cfg'] for k in SEEDS)} "
              f"and SPG {_fmt(s[k]['spg'] for k in SEEDS)}; per seed {flags}")
    if not all(flags):
        detail += f"; full sweeps in {toy['root'] / 'sweep'} and {toy['root'] / 'sweep_cfg'}"
    verdict("4g CFG+SPG <= min(CFG, SPG)", two_of_three(flags), detail)


def test_criterion_4_runtime(toy):
    verdict("4 runtime", toy["elapsed"] < 1800, f"{toy['elapsed']:.0f}s end to end")


# -- 5. reproducibility -----------------------------------------------------------


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir()) if p.is_file() and p.name != "timing.json"}


def test_criterion_5_reproducible(toy, tmp_path):
    root = toy["root"]
    checked = []
    for name in ("reference", "model", "sweep_cfg"):
        conf = root / name / "config.txt"
        assert cli.main(["gen-data" if name == "reference" else "train" if name == "model" else "sweep",
                         "--config", str(conf), "--out", str(tmp_path / name)]) == 0
        checked.append((name, _files(root / name) == _files(tmp_path / name)))
    model = str(root / "model" / "model.tden")
    for i in range(2):
        assert cli.main(["diagnose", "--model", model, "--out", str(tmp_path / f"diag{i}")]) == 0
    checked.append(("diagnose", _files(tmp_path / "diag0") == _files(tmp_path / "diag1")))
    verdict("5 reproducibility", all(ok for _, ok in checked),
            "byte-identical reruns: " + ", ".join(f"{n} {ok}" for n, ok in checked))
