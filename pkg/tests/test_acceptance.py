"""Acceptance checks, one per headline criterion, each at its stated tolerance.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from wlembed import theory as th
from wlembed.errors import DanglingRingClosure, EmptyInput, UnbalancedParenthesis, UnknownAtom
from wlembed.experiments import ExperimentConfig, figure3_table, hardness_losses, load_or_generate, run_figure3
from wlembed.smiles import parse_smiles
from wlembed.synthetic import TARGET_PATTERNS, contained_patterns
from wlembed.wl import LabelRegistry, WLTestResult, wl_isomorphism_test, wl_refine, wl_refine_many

from conftest import ACCEPTANCE_LINES, permuted, random_graph
from gradcheck import checked_error
from test_synthetic import nx_contains
from test_wl import C6, TWO_C3, _unfolded


def record(name, ok, detail=""):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def test_construction_rank():
    t = time.perf_counter()
    bad = []
    for K in (1, 2, 3):
        for M in (1, 2, 3):
            if (M + 1) ** K > 256:
                continue
            _, rank = th.construction_rank(K, M)
            if rank != th.capacity_bound(K, M):
                bad.append((K, M, rank))
    elapsed = time.perf_counter() - t
    record("construction rank = K(M+1)^K", not bad and elapsed < 10,
           f"mismatches={bad} time={elapsed:.2f}s")


def _random_set(rng):
    K = int(rng.integers(1, 4))
    out = []
    while len(out) < int(rng.integers(1, 13)):
        g = random_graph(rng, n_max=8, K=K, p=0.35)
        if g.label_specific_max_degree() <= 3:
            out.append(g)
    return out


def test_readout_dimension_bound():
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    over = []
    for _ in range(100):
        gs = _random_set(rng)
        K, M = th.graph_set_parameters(gs)
        r = th.wle_max_dimensionality(gs)
        if r > th.capacity_bound(K, M):
            over.append((K, M, r))
    # equality: the star set covers every (k, m) of the lattice
    ranks = {}
    for K in (1, 2, 3):
        for M in (1, 2, 3):
            ranks[K, M] = th.wle_max_dimensionality(th.star_graph_set(K, M))
    missing = {km: (r, th.capacity_bound(*km)) for km, r in ranks.items() if r != th.capacity_bound(*km)}
    elapsed = time.perf_counter() - t
    record("readout dimension <= K(M+1)^K, equality per (K, M)",
           not over and not missing and elapsed < 30,
           f"violations={over} equality_missed(rank, bound)={missing} time={elapsed:.1f}s")


def test_readout_dimension_realizable_maximum():
    # what graphs can reach: the bound minus one edge-balance constraint per label pair
    ranks = {(K, M): th.wle_max_dimensionality(th.star_graph_set(K, M))
             for K in (1, 2, 3) for M in (1, 2, 3)}
    assert all(r == th.graph_realizable_dimensionality(K, M) for (K, M), r in ranks.items())


def test_bias_norm_rate():
    t = time.perf_counter()
    worst = {}
    for K in (1, 2):
        prof = th.norm_profile(K, [2, 4, 8, 16, 32])
        ref = prof[-1][2]
        worst[K] = max(max(r / ref, ref / r) for _, _, r in prof)
    elapsed = time.perf_counter() - t
    record("bias norm / M^(3K/2) within 3x of M=32", all(w <= 3 for w in worst.values()) and elapsed < 5,
           f"worst_factor={ {k: round(v, 3) for k, v in worst.items()} } time={elapsed:.3f}s")


@pytest.fixture(scope="module")
def figure3_rows():
    t = time.perf_counter()
    rows = {}
    for task in ("detection", "counting"):
        cfg = ExperimentConfig(task=task, layers=(1, 2))
        rows[task] = figure3_table(run_figure3(cfg))
    return rows, time.perf_counter() - t


@pytest.mark.slow
def test_figure3_detection(figure3_rows):
    rows, elapsed = figure3_rows[0]["detection"], figure3_rows[1]
    gaps = {(e, L): rows[e, L] - rows["atomic", L] for e in ("wl", "cwl", "gwl") for L in (1, 2)}
    record("depth grid: detection AUC gap >= 0.05", all(g >= 0.05 for g in gaps.values()) and elapsed <= 1800,
           f"gaps={ {k: round(v, 3) for k, v in gaps.items()} } time={elapsed:.0f}s")


@pytest.mark.slow
def test_figure3_counting(figure3_rows):
    rows, elapsed = figure3_rows[0]["counting"], figure3_rows[1]
    rel = {(e, L): abs(rows[e, L] - rows["atomic", L]) / rows["atomic", L]
           for e in ("wl", "cwl", "gwl") for L in (1, 2)}
    record("depth grid: counting MAE within 20% of atomic", all(r <= 0.2 for r in rel.values()) and elapsed <= 1800,
           f"relative_diff={ {k: round(v, 3) for k, v in rel.items()} } "
           f"atomic={ {L: round(rows['atomic', L], 4) for L in (1, 2)} } time={elapsed:.0f}s")


@pytest.mark.slow
def test_single_layer_hardness():
    recs = load_or_generate("detection", 0, 0)
    out = {}
    for d in (32, 128):
        out[d] = hardness_losses(recs, d, epochs=500)
    ok = all(v["atomic_L1"] >= 2 * v["wl_L0"] for v in out.values())
    record("atomic 1-layer loss >= 2x WL readout-only loss", ok,
           "; ".join(f"d={d}: {v['atomic_L1']:.3g} vs {v['wl_L0']:.3g}" for d, v in out.items()))


def test_gradients():
    rng = np.random.default_rng(7)
    errs = [checked_error(rng) for _ in range(200)]
    record("reverse mode vs finite differences < 1e-4", max(errs) < 1e-4, f"max_rel_err={max(errs):.2e}")


def test_wl_engine():
    rng = np.random.default_rng(11)
    perm_ok = mono_ok = iso_ok = True
    for _ in range(500):
        g = random_graph(rng)
        h = permuted(g, rng)
        a, b = wl_refine(g, 3), wl_refine(h, 3)
        perm_ok &= all(_unfolded(a, t) == _unfolded(b, t) for t in range(4))
        _, counts = wl_refine_many([g, h], 4, LabelRegistry())
        mono_ok &= all(x <= y for x, y in zip(counts, counts[1:]))
    for _ in range(500):
        g = random_graph(rng)
        iso_ok &= wl_isomorphism_test(g, permuted(g, rng), 4) is WLTestResult.INCONCLUSIVE
    c6 = wl_isomorphism_test(C6, TWO_C3, 5) is WLTestResult.INCONCLUSIVE
    record("WL engine properties", perm_ok and mono_ok and iso_ok and c6,
           f"permutation={perm_ok} monotone={mono_ok} isomorphic={iso_ok} c6_vs_2c3={c6}")


def test_generator_validity():
    recs = load_or_generate("detection", 0, 0)
    pats = list(TARGET_PATTERNS.values())
    bad = 0
    for r in recs:
        g = r.graph
        hits = sum(nx_contains(g, p) for p in pats)
        ok = g.is_connected() and g.max_degree() <= 4 and hits == (1 if r.target == 1 else 0)
        ok &= len(contained_patterns(g, TARGET_PATTERNS)) == hits
        bad += not ok
    record("generator validity on 600 detection graphs", len(recs) == 600 and bad == 0,
           f"n={len(recs)} invalid={bad}")


def test_smiles():
    counts = {s: (g.num_nodes, len(g.edges)) for s in ("C", "CCO", "C1CC1", "c1ccccc1")
              for g in [parse_smiles(s)]}
    ok = counts == {"C": (1, 0), "CCO": (3, 2), "C1CC1": (3, 3), "c1ccccc1": (6, 6)}
    ok &= parse_smiles("CCO").edges == ((0, 1), (1, 2))
    errs = {"": EmptyInput, "CXC": UnknownAtom, "C(C": UnbalancedParenthesis, "CC)": UnbalancedParenthesis,
            "C1CC": DanglingRingClosure}
    raised = {}
    for text, cls in errs.items():
        try:
            parse_smiles(text)
            raised[text] = None
        except cls:
            raised[text] = cls.__name__
        except Exception as exc:  # wrong class
            raised[text] = f"unexpected {type(exc).__name__}"
    ok &= all(raised[t] == c.__name__ for t, c in errs.items())
    record("SMILES examples and error classes", ok, f"counts={counts}")
