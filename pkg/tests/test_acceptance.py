"""Acceptance suite: one PASS/FAIL line per criterion.

The experiment criteria (6 to 9) run on the smoke agent profile by default so
the suite finishes on a single CPU.  Set ``COOPCACHE_ACCEPTANCE_PROFILE=full``
to run them at the full configuration (2500 episodes, 512/128 network), which
takes several CPU-hours.  Smoke sweeps use 3 seeds; the full profile uses 5.
"""

import hashlib
import itertools
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from coopcache import nn
from coopcache.actions import Action, enumerate_actions
from coopcache.agent import compute_targets, train
from coopcache.cli import main
from coopcache.config import AgentConfig, Config
from coopcache.env import ChannelGains, SlotState, evaluate_slot, sample_gains, sample_request, zipf_pmf
from coopcache.experiments import PROFILES, STRATEGIES, run_strategy
from coopcache.metrics import final_metrics

PROFILE = os.environ.get("COOPCACHE_ACCEPTANCE_PROFILE", "smoke")
if PROFILE not in PROFILES:
    raise ValueError(f"COOPCACHE_ACCEPTANCE_PROFILE must be one of {sorted(PROFILES)}")
AGENT = PROFILES[PROFILE]
ORDER_SEEDS = (0, 1, 2, 3, 4)
SWEEP_SEEDS = ORDER_SEEDS if PROFILE == "full" else (0, 1, 2)
UCBZ, EPS, LRU, NONCOOP = STRATEGIES

_CACHE: dict = {}


def finals(cfg: Config, strategy: str, seeds) -> dict[str, np.ndarray]:
    """Final metrics per seed, memoized on (config, strategy, seed)."""
    rows = []
    for seed in seeds:
        key = (cfg, strategy, seed)
        if key not in _CACHE:
            records = run_strategy(strategy, cfg, AGENT, seed)
            _CACHE[key] = final_metrics(records, AGENT.final_window)
        rows.append(_CACHE[key])
    return {k: np.array([r[k] for r in rows]) for k in rows[0]}


def sweep(axis: str, values, metric: str):
    """{strategy: (means, stds)} over the sweep grid."""
    out = {}
    for strategy in STRATEGIES:
        vals = [finals(replace(Config(), **{axis: v}), strategy, SWEEP_SEEDS)[metric]
                for v in values]
        out[strategy] = (np.array([v.mean() for v in vals]), np.array([v.std() for v in vals]))
    return out


def fmt_row(means):
    return "/".join(f"{m:.3f}" for m in means)


# ---------------------------------------------------------------- criterion 1
def test_action_space_cardinality(criterion):
    coop = enumerate_actions(5, 5, 4, cooperative=True).z
    solo = enumerate_actions(5, 5, 4, cooperative=False).z
    ok = criterion(1, "action-space cardinality", coop == 105 and solo == 5,
                   f"cooperative={coop} non-cooperative={solo}")
    assert ok


# ---------------------------------------------------------------- criterion 2
def _numeric_grads(params, x, actions, targets, alpha, h=1e-5):
    def loss():
        q, _ = nn.forward(params, x, alpha)
        return nn.mse_loss_and_grad(q, actions, targets)[0]

    grads = []
    for arr in params.arrays():
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = loss()
            arr[idx] = old - h
            down = loss()
            arr[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def test_gradient_check(criterion):
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        params = nn.init_kaiming(rng, (6, 8, 8, 5))
        for b in params.biases:
            b[:] = rng.normal(0, 0.1, b.shape)
        x = rng.normal(size=(9, 6))
        actions = rng.integers(0, 5, size=9)
        targets = rng.normal(size=9)
        q, trace = nn.forward(params, x, 0.01)
        _, dq = nn.mse_loss_and_grad(q, actions, targets)
        analytic = nn.backward(params, trace, dq).arrays()
        for a, n in zip(analytic, _numeric_grads(params, x, actions, targets, 0.01)):
            denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    ok = criterion(2, "gradient check (6,8,8,5), 10 seeds", worst < 1e-4,
                   f"max relative error {worst:.2e} (< 1e-4)")
    assert ok


# ---------------------------------------------------------------- criterion 3
def _reference_reward(omega, shared, pu_hit, su_hit, r0, k, phi):
    if shared and omega == 1 and pu_hit and su_hit:
        return r0 / k
    if omega == 0 and su_hit:
        return r0
    return -phi


def test_reward_oracle(criterion):
    cfg = Config()
    rng = np.random.default_rng(11)
    mismatches = checked = 0
    for omega, I_t, pu_hit, su_hit in itertools.product((0, 1), repeat=4):
        action = Action(0, I_t, frozenset({1, 2}) if I_t else frozenset(), frozenset({1, 2}))
        d_p = 2 if pu_hit else 5
        d_s = 1 if su_hit else 4
        for _ in range(100):
            gains = ChannelGains(rng.exponential(0.1), 0.2, 0.2)
            out = evaluate_slot(SlotState(omega, d_p, d_s, gains), action, d_p, d_s, cfg)
            r0 = cfg.W_bw * np.log2(1 + cfg.P_s * gains.g_ss / cfg.sigma2)
            want = _reference_reward(omega, I_t == 1, pu_hit, su_hit, r0, cfg.k_share, cfg.phi)
            mismatches += out.reward != want
            checked += 1
    ok = criterion(3, "reward oracle, 16 branches x 100 gains", mismatches == 0,
                   f"{mismatches} mismatches in {checked} slots")
    assert ok


# ---------------------------------------------------------------- criterion 4
def test_double_q_discrimination(criterion):
    def net(out):
        return nn.MlpParams([np.array([[1.0]]), np.array([[1.0]]), np.array([out])],
                            [np.zeros(1), np.zeros(1), np.zeros(2)])

    online, target = net([2.0, 1.0]), net([3.0, 10.0])
    s2 = np.array([[1.0]])
    y = compute_targets(s2, [0.5], online, target, 0.9)[0]
    vanilla = 0.5 + 0.9 * nn.predict(target, s2).max()
    ok = criterion(4, "double-Q target discrimination",
                   y == 0.5 + 0.9 * 3.0 and vanilla - y == pytest.approx(0.9 * 7.0),
                   f"double={y:.4f} vanilla={vanilla:.4f}")
    assert ok


# ---------------------------------------------------------------- criterion 5
def test_sampler_fidelity(criterion):
    n = 10**6
    rng = np.random.default_rng(5)
    pmf = zipf_pmf(5, 0.6)
    draws = np.array([sample_request(rng, pmf) for _ in range(n)])
    emp = np.bincount(draws, minlength=6)[1:] / n
    zipf_err = float(np.max(np.abs(emp - pmf)))
    cfg = Config()
    g = np.array([sample_gains(rng, cfg).g_ss for _ in range(n)])
    mean_err = abs(g.mean() / cfg.mean_gss - 1)
    ok = criterion(5, "sampler fidelity at 1e6 draws", zipf_err <= 0.005 and mean_err < 0.01,
                   f"zipf max |err| {zipf_err:.4f} (<= 0.005), gain mean rel err {mean_err:.4f} (< 0.01)")
    assert ok


# ---------------------------------------------------------------- criterion 6
@pytest.mark.slow
def test_final_asr_ordering(criterion):
    start = time.perf_counter()
    asr = {s: finals(Config(), s, ORDER_SEEDS)["final_asr"] for s in STRATEGIES}
    elapsed = time.perf_counter() - start
    mean = {s: v.mean() for s, v in asr.items()}
    std = {s: v.std() for s, v in asr.items()}
    ordering = (mean[UCBZ] > mean[EPS] and mean[UCBZ] > mean[LRU]
                and mean[NONCOOP] == min(mean.values()))
    gap = abs(mean[LRU] - mean[EPS])
    overlap = gap <= std[LRU] + std[EPS]
    detail = ", ".join(f"{s}={mean[s]:.3f}+-{std[s]:.3f}" for s in STRATEGIES)
    criterion(6, f"final ASR ordering [{PROFILE}]", ordering,
              f"{detail}; {elapsed:.0f}s")
    criterion(6, f"LRU and epsilon-greedy 1-std bands overlap [{PROFILE}]", overlap,
              f"|gap|={gap:.3f} vs band sum {std[LRU] + std[EPS]:.3f}")
    assert ordering, detail
    assert overlap, f"LRU/epsilon-greedy gap {gap:.3f} exceeds {std[LRU] + std[EPS]:.3f}"


# ---------------------------------------------------------------- criterion 7
def _monotone(means, stds, increasing, allowed):
    """Count adjacent-pair violations; a tolerated one must stay within 1 std."""
    bad = 0
    for i in range(len(means) - 1):
        step = means[i + 1] - means[i]
        if (step < 0) if increasing else (step > 0):
            if allowed and abs(step) <= max(stds[i], stds[i + 1]):
                allowed -= 1
            else:
                bad += 1
    return bad == 0


@pytest.mark.slow
def test_delay_grows_with_pu_occupancy(criterion):
    grid = (18, 22, 26, 30)
    res = sweep("L", grid, "final_delay")
    trends = {s: _monotone(m, sd, True, 1) for s, (m, sd) in res.items()}
    means = np.array([res[s][0] for s in STRATEGIES])
    ucbz_low = bool(np.all(means[0] <= means.min(axis=0)))
    noncoop_high = bool(np.all(means[3] >= means.max(axis=0)))
    ok = all(trends.values()) and ucbz_low and noncoop_high
    detail = "; ".join(f"{s}={fmt_row(res[s][0])}" for s in STRATEGIES)
    criterion(7, f"delay non-decreasing in L, UCBZ lowest, non-coop highest [{PROFILE}]", ok,
              f"{detail}; trend={trends} ucbz_lowest={ucbz_low} noncoop_highest={noncoop_high}")
    assert ok, detail


# ---------------------------------------------------------------- criterion 8
@pytest.mark.slow
def test_delay_falls_with_transmit_power(criterion):
    grid = (0.05, 0.1, 0.15, 0.2)
    res = sweep("P_s", grid, "final_delay")
    trends = {s: _monotone(m, sd, False, 0) for s, (m, sd) in res.items()}
    means = np.array([res[s][0] for s in STRATEGIES])
    ucbz_low = bool(np.all(means[0] <= means.min(axis=0)))
    ok = all(trends.values()) and ucbz_low
    detail = "; ".join(f"{s}={fmt_row(res[s][0])}" for s in STRATEGIES)
    criterion(8, f"delay non-increasing in P_s, UCBZ lowest [{PROFILE}]", ok,
              f"{detail}; trend={trends} ucbz_lowest={ucbz_low}")
    assert ok, detail


# ---------------------------------------------------------------- criterion 9
@pytest.mark.slow
def test_hit_rate_rises_with_su_skew(criterion):
    grid = (0.1, 0.3, 0.6, 0.9)
    res = sweep("gamma_s", grid, "final_su_hit_rate")
    trends = {s: _monotone(m, sd, True, 0) for s, (m, sd) in res.items()}
    means = np.array([res[s][0] for s in STRATEGIES])
    ucbz_top = bool(means[0][0] >= means[:, 0].max())
    noncoop_low = bool(np.all(means[3] <= means.min(axis=0)))
    ok = all(trends.values()) and ucbz_top and noncoop_low
    detail = "; ".join(f"{s}={fmt_row(res[s][0])}" for s in STRATEGIES)
    criterion(9, f"CIoT hit rate non-decreasing in gamma_s [{PROFILE}]", ok,
              f"{detail}; trend={trends} ucbz_top_at_0.1={ucbz_top} noncoop_lowest={noncoop_low}")
    assert ok, detail


# --------------------------------------------------------------- criterion 10
def test_warmup_contract(criterion):
    res = train(Config(), AgentConfig(episodes=334), seed=0)
    ok = (res.buffer_size_at_first_update == 9990 and res.first_update_episode == 334
          and res.grad_steps == 30)
    criterion(10, "warm-up: first update in episode 334 with 9990 transitions", ok,
              f"episode={res.first_update_episode} buffer={res.buffer_size_at_first_update} "
              f"grad_steps={res.grad_steps}")
    assert ok


# --------------------------------------------------------------- criterion 11
def test_byte_identical_csvs(criterion, tmp_path):
    args = ["-s", "agent.episodes=40", "-s", "agent.hidden=16,8", "-s", "agent.kappa=5",
            "-s", "agent.batch_size=16", "-s", "agent.kappa_target=20",
            "-s", "agent.final_window=10", "--seeds", "0,1"]
    digests = []
    for name in ("first", "second"):
        assert main(["train", *args, "-o", str(tmp_path / name)]) == 0
        files = sorted((tmp_path / name).rglob("*.csv"))
        digests.append([(p.relative_to(tmp_path / name).as_posix(),
                         hashlib.sha256(p.read_bytes()).hexdigest()) for p in files])
    ok = criterion(11, "byte-identical CSVs across runs", digests[0] == digests[1],
                   f"{len(digests[0])} files compared")
    assert ok
