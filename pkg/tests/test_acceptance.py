"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
Everything is seeded; the verdicts are stable across runs.
"""

import os
import random
import time

import numpy as np
import pytest

from gmkit.cli import main
from gmkit.core import (
    ModelConfig,
    ProjectionMatrix,
    SignatureMatrix,
    TernaryCode,
    correlation,
    squared_distance,
)
from gmkit.data import SyntheticSpec, generate
from gmkit.evaluation import (
    identification_report,
    identification_sweep,
    pfn_at_pfp,
    query_set_from_dataset,
    security_report,
    threshold_at_pfp,
    verification_sweep,
)
from gmkit.learning import (
    AssignmentMatrix,
    GroupRepresentations,
    HashMatrix,
    e_step,
    embedding_cost,
    grouping_scale,
    kmeans,
    objective,
    ry_step,
    scatter_traces,
    train,
    train_random_assignment_baseline,
    w_step,
)
from gmkit.protocol import (
    ProtocolKeys,
    SecurityParams,
    additive_add,
    additive_decrypt,
    additive_encrypt,
    additive_keygen,
    additive_scalar_mul,
    mult_decrypt,
    mult_encrypt,
    mult_keygen,
    mult_multiply,
    mult_rerandomize_by_one,
    run_protocol,
)

SEEDS = (0, 1, 2, 3, 4)


def report(number, name, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number:02d} {name}: {verdict}{suffix}")
    return ok


def unit_columns(a):
    return a / np.linalg.norm(a, axis=0)


def random_hash_matrix(code_length, n, sparsity, rng):
    cols = np.zeros((code_length, n), dtype=np.int8)
    for j in range(n):
        support = rng.choice(code_length, size=sparsity, replace=False)
        cols[support, j] = rng.choice([-1, 1], size=sparsity)
    return HashMatrix(cols, sparsity)


def random_protocol_code(length, sparsity, rng):
    symbols = np.zeros(length, dtype=np.int8)
    for i in rng.sample(range(length), sparsity):
        symbols[i] = rng.choice((-1, 1))
    return TernaryCode(symbols, sparsity)


# ---------------------------------------------------------------------------
# shared synthetic family (criteria 7 and 9)

VERIF_SPEC = dict(num_identities=128, samples_per_identity=4, dim=64, impostor_fraction=0.5)
VERIF_CONFIG = dict(
    code_length=32, sparsity=8, within_weight=1.0, between_weight=0.1,
    max_outer_iters=20, convergence_tol=0.0,
)


def _verification_run(seed):
    dataset = generate(SyntheticSpec(noise_sigma=0.15, seed=seed, **VERIF_SPEC))
    config = ModelConfig(num_groups=16, seed=seed, **VERIF_CONFIG)
    learned = train(dataset.enrolled, config)
    baseline = train_random_assignment_baseline(dataset.enrolled, config, group_size=8)
    return dataset, learned, baseline


@pytest.fixture(scope="module")
def verification_runs():
    return {seed: _verification_run(seed) for seed in SEEDS}


def test_c01_procrustes_optimality():
    rng = np.random.default_rng(100)
    start = time.perf_counter()
    worst_margin = np.inf
    for _ in range(50):
        signatures = SignatureMatrix(unit_columns(rng.standard_normal((16, 50))))
        codes = random_hash_matrix(8, 50, 3, rng)
        fit = embedding_cost(signatures, w_step(signatures, codes), codes)
        for _ in range(100):
            q, _ = np.linalg.qr(rng.standard_normal((16, 8)))
            competitor = embedding_cost(signatures, ProjectionMatrix(q), codes)
            worst_margin = min(worst_margin, competitor - fit)
    elapsed = time.perf_counter() - start
    ok = worst_margin >= -1e-9 and elapsed < 10.0
    assert report(1, "procrustes-optimality", ok, f"worst margin {worst_margin:.3e}, {elapsed:.1f}s")


def test_c02_kmeans_inner_monotonicity():
    violations = 0
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        codes = random_hash_matrix(16, 40, 4, rng)
        points = grouping_scale(1.0, 0.1) * codes.codes.astype(float).T
        result = kmeans(points, 6, np.random.default_rng(seed))
        trace = result.objective_trace
        violations += sum(b > a + 1e-9 for a, b in zip(trace, trace[1:]))
        ry_step(codes, 1.0, 0.1, 6, np.random.default_rng(seed))  # internal check must not raise
    ok = violations == 0
    assert report(2, "kmeans-inner-monotonicity", ok, "20 seeded runs, every update")


def test_c03_substep_oracle_equivalence():
    rng = np.random.default_rng(300)
    worst = 0.0
    for _ in range(100):
        code_length = int(rng.integers(4, 17))
        n = int(rng.integers(4, 21))
        d = code_length + int(rng.integers(1, 8))
        sparsity = int(rng.integers(1, code_length))
        num_groups = int(rng.integers(1, n + 1))
        lam = float(rng.uniform(0.2, 3.0))
        gam = float(rng.uniform(0.01, lam * 0.9))

        signatures = SignatureMatrix(unit_columns(rng.standard_normal((d, n))))
        q, _ = np.linalg.qr(rng.standard_normal((d, code_length)))
        projection = ProjectionMatrix(q)
        codes = random_hash_matrix(code_length, n, sparsity, rng)
        reps = GroupRepresentations(random_hash_matrix(code_length, num_groups, sparsity, rng).codes, sparsity)
        group_of = rng.integers(num_groups, size=n)
        group_of[:num_groups] = np.arange(num_groups)
        assignments = AssignmentMatrix(group_of, num_groups)

        # correlation / squared distance: exact integer loop oracles
        a = codes.column(0)
        b = codes.column(n - 1)
        corr_oracle = sum(int(a.symbols[i]) * int(b.symbols[i]) for i in range(code_length))
        dist_oracle = sum((int(a.symbols[i]) - int(b.symbols[i])) ** 2 for i in range(code_length))
        assert correlation(a, b) == corr_oracle
        assert squared_distance(a, b) == dist_oracle

        # scatter traces: definition double sums
        within_o = 0.0
        between_o = 0.0
        for i in range(n):
            r = reps.codes[:, group_of[i]].astype(float)
            e = codes.codes[:, i].astype(float)
            within_o += float(np.sum((e - r) ** 2))
            between_o += float(np.sum(r * r))
        within, between = scatter_traces(codes, reps, assignments)
        worst = max(worst, abs(within - within_o), abs(between - between_o))

        # objective: loop recomputation of eq. parts
        emb_o = 0.0
        target = q.T @ signatures.data
        for i in range(code_length):
            for j in range(n):
                emb_o += (float(codes.codes[i, j]) - target[i, j]) ** 2
        breakdown = objective(signatures, projection, codes, reps, assignments, lam, gam)
        worst = max(worst, abs(breakdown.total - (emb_o + lam * within_o - gam * between_o)))

        # e_step: per-column sum-then-sort oracle
        new_codes = e_step(projection, signatures, reps, assignments, lam, sparsity)
        for j in range(n):
            col = target[:, j] + lam * reps.codes[:, group_of[j]].astype(float)
            ranked = sorted(range(code_length), key=lambda i: (-abs(col[i]), i))
            expected = np.zeros(code_length, dtype=int)
            for i in ranked[:sparsity]:
                expected[i] = -1 if col[i] < 0 else 1
            assert new_codes.codes[:, j].tolist() == expected.tolist()
    ok = worst <= 1e-9
    assert report(3, "substep-oracle-equivalence", ok, f"100 instances, worst real deviation {worst:.2e}")


def test_c04_protocol_end_to_end():
    code_length, sparsity, num_groups = 64, 8, 16
    rng = random.Random(400)
    params = SecurityParams(additive_bits=128)
    keys = ProtocolKeys.generate(params, rng)
    start = time.perf_counter()
    agree = 0
    trials = 1000
    for _ in range(trials):
        code = random_protocol_code(code_length, sparsity, rng)
        reps = GroupRepresentations(
            np.column_stack([random_protocol_code(code_length, sparsity, rng).symbols for _ in range(num_groups)]),
            sparsity,
        )
        tau = rng.randint(-1, 4 * sparsity)
        decision, _ = run_protocol(code, reps, tau, rng, params, keys)
        plain = any(squared_distance(code, reps.column(g)) <= tau for g in range(num_groups))
        agree += decision.accept == plain
    elapsed = time.perf_counter() - start
    ok = agree == trials and elapsed < 60.0
    assert report(4, "protocol-end-to-end", ok, f"{agree}/{trials} agree, {elapsed:.1f}s at 128-bit")


def test_c05_homomorphic_identities():
    rng = random.Random(500)
    add_pk, add_sk = additive_keygen(128, rng)
    mul_pk, mul_sk = mult_keygen(272, rng)
    add_ok = mul_ok = rr_ok = 0
    trials = 1000
    for _ in range(trials):
        a = rng.randint(-10**9, 10**9)
        b = rng.randint(-10**9, 10**9)
        k = rng.randint(-10**4, 10**4)
        ca = additive_encrypt(add_pk, a, rng)
        cb = additive_encrypt(add_pk, b, rng)
        sum_ok = additive_decrypt(add_sk, additive_add(add_pk, ca, cb)) == a + b
        mul_scalar_ok = additive_decrypt(add_sk, additive_scalar_mul(add_pk, ca, k)) == k * a
        add_ok += sum_ok and mul_scalar_ok

        x = rng.randrange(1, mul_pk.modulus)
        y = rng.randrange(1, mul_pk.modulus)
        cx = mult_encrypt(mul_pk, x, rng)
        cy = mult_encrypt(mul_pk, y, rng)
        mul_ok += mult_decrypt(mul_sk, mult_multiply(mul_pk, cx, cy)) == x * y % mul_pk.modulus

        fresh = mult_rerandomize_by_one(mul_pk, cx, rng)
        rr_ok += mult_decrypt(mul_sk, fresh) == x and (fresh.c1, fresh.c2) != (cx.c1, cx.c2)
    ok = add_ok == trials and mul_ok == trials and rr_ok == trials
    assert report(5, "homomorphic-identities", ok, f"add {add_ok}, mult {mul_ok}, rerand {rr_ok} of {trials}")


def test_c06_masking_blindness():
    code_length, sparsity = 8, 2
    rng = random.Random(600)
    params = SecurityParams(additive_bits=64)
    keys = ProtocolKeys.generate(params, rng)
    n_mod = keys.additive_public.modulus
    hits = 0
    rounds = 10_000
    for _ in range(rounds):
        code = random_protocol_code(code_length, sparsity, rng)
        reps = GroupRepresentations(random_protocol_code(code_length, sparsity, rng).symbols.reshape(-1, 1), sparsity)
        tau = rng.randint(0, 4 * sparsity)
        _, transcript = run_protocol(code, reps, tau, rng, params, keys)
        residue = transcript.message(5).payloads[0]
        revealed = residue - n_mod if residue > n_mod // 2 else residue
        truth = (squared_distance(code, reps.column(0)) - tau) > 0
        hits += (revealed > 0) == truth
    accuracy = hits / rounds
    ok = 0.48 <= accuracy <= 0.52
    assert report(6, "masking-blindness", ok, f"sign predictor accuracy {accuracy:.4f} over {rounds} rounds")


def test_c07_learned_beats_random_assignment(verification_runs):
    learned_rates = []
    baseline_rates = []
    for seed in SEEDS:
        dataset, learned, baseline = verification_runs[seed]
        for model, rates in ((learned, learned_rates), (baseline, baseline_rates)):
            queries = query_set_from_dataset(dataset, model)
            roc = verification_sweep(model, queries, np.random.default_rng([seed, 7]))
            rates.append(pfn_at_pfp(roc, 0.05))
    mean_learned = float(np.mean(learned_rates))
    mean_baseline = float(np.mean(baseline_rates))
    ok = mean_learned <= mean_baseline
    assert report(
        7,
        "learned-vs-random-assignment",
        ok,
        f"mean pfn@pfp=0.05 learned {mean_learned:.3f} vs random {mean_baseline:.3f}",
    )


def test_c08_group_size_degrades_dir():
    # measurable-noise member of the synthetic family: at sigma=0.15 the DIR
    # saturates near zero for every m and the trend is unmeasurable (see the
    # project notes); sigma=0.08 keeps the metric in a responsive range
    group_sizes = (2, 8, 32)
    dirs = {m: [] for m in group_sizes}
    for seed in SEEDS:
        dataset = generate(
            SyntheticSpec(
                num_identities=128, samples_per_identity=4, dim=64,
                noise_sigma=0.08, impostor_fraction=0.5, seed=seed,
            )
        )
        for m in group_sizes:
            config = ModelConfig(num_groups=128 // m, seed=seed, **VERIF_CONFIG)
            model = train(dataset.enrolled, config)
            queries = query_set_from_dataset(dataset, model)
            roc = identification_sweep(model, queries)
            tau = threshold_at_pfp(roc, 0.05)
            dirs[m].append(identification_report(model, queries, tau).dir_rate)
    means = {m: float(np.mean(dirs[m])) for m in group_sizes}
    ok = True
    details = []
    for a, b in zip(group_sizes, group_sizes[1:]):
        diffs = np.array(dirs[b]) - np.array(dirs[a])
        se = float(diffs.std(ddof=1) / np.sqrt(len(diffs)))
        ok = ok and float(diffs.mean()) <= se
        details.append(f"m{a}->m{b}: {diffs.mean():+.4f} (se {se:.4f})")
    assert report(
        8,
        "group-size-degrades-dir",
        ok,
        f"mean DIR {means[2]:.3f}/{means[8]:.3f}/{means[32]:.3f}; " + "; ".join(details),
    )


def test_c09_aggregation_secures_enrolled(verification_runs):
    worse_every_run = True
    pairs = []
    for seed in SEEDS:
        dataset, learned, _ = verification_runs[seed]  # m = 8 members per group
        queries = query_set_from_dataset(dataset, learned)
        rep = security_report(dataset.enrolled, queries, learned)
        pairs.append((rep.mse_security, rep.mse_privacy))
        worse_every_run = worse_every_run and rep.mse_security > rep.mse_privacy
    detail = ", ".join(f"{s:.4f}>{p:.4f}" for s, p in pairs)
    assert report(9, "aggregation-secures-enrolled", worse_every_run, detail)


CLI_CONFIG = """\
[model]
code_length = 8
sparsity = 2
num_groups = 4
max_outer_iters = 8
seed = 3

[data]
num_identities = 16
samples_per_identity = 2
dim = 16
noise_sigma = 0.05
impostor_fraction = 0.25
data_seed = 4

[sweep]
group_sizes = 2,4
sparsity_levels = 2,3

[output]
out_dir = {out}
"""


def test_c10_cli_determinism(tmp_path):
    def snapshot(root):
        tree = {}
        for dirpath, _, filenames in os.walk(root):
            for name in filenames:
                full = os.path.join(dirpath, name)
                with open(full, "rb") as fh:
                    tree[os.path.relpath(full, root)] = fh.read()
        return tree

    def run_twice(label, argv, out_dir):
        runs = []
        for _ in range(2):
            if os.path.isdir(out_dir):
                for rel in snapshot(out_dir):
                    os.unlink(os.path.join(out_dir, rel))
            assert main(argv) == 0, f"{label} failed"
            runs.append(snapshot(out_dir))
        return runs[0] == runs[1]

    out = str(tmp_path / "out")
    cfg_path = str(tmp_path / "exp.ini")
    with open(cfg_path, "w") as fh:
        fh.write(CLI_CONFIG.format(out=out))

    results = {}
    results["gen-data"] = run_twice("gen-data", ["gen-data", "--config", cfg_path], out)
    results["train"] = run_twice("train", ["train", "--config", cfg_path], out)
    model_path = os.path.join(out, "model.txt")
    model_bytes = open(model_path, "rb").read()
    for mode in ("eval-verify", "eval-identify", "eval-security"):
        results[mode] = run_twice(mode, [mode, "--config", cfg_path], out)
    demo_out = str(tmp_path / "demo")
    model_copy = str(tmp_path / "model.txt")
    with open(model_copy, "wb") as fh:
        fh.write(model_bytes)
    results["protocol-demo"] = run_twice(
        "protocol-demo",
        [
            "protocol-demo", "--model", model_copy, "--query-index", "0", "--tau", "4",
            "--seed", "5", "--out-dir", demo_out, "--additive-bits", "64",
        ],
        demo_out,
    )
    ok = all(results.values())
    failing = [k for k, v in results.items() if not v]
    assert report(10, "cli-determinism", ok, "all six subcommands" if ok else f"nondeterministic: {failing}")
