"""Smoke test for the crt_subaging extension.

Build and install with `maturin develop --release` (or `pip install .`) from
crates/python, then run `python python/smoke_test.py` or point pytest at it.
"""

import json
import math

import crt_subaging as cs


def test_trees():
    tree = cs.prufer_decode([2, 2, 4, 4, 6], 7)
    assert tree.n == 7
    assert tree.prufer() == [2, 2, 4, 4, 6]
    assert cs.LabeledTree.from_dump(tree.dump()).edges == tree.edges

    big = cs.sample_uniform_tree(500, seed=3)
    assert len(big.edges) == 499
    reduced = cs.reduce_to_vertices(big, 4)
    assert reduced.leaf_count == 4
    assert reduced.total_length() > 0

    limit = cs.sample_reduced_tree(6, seed=1)
    assert limit.is_binary()
    assert len(limit.lengths) == 2 * 6 - 3
    blocks = limit.mark_partition(1.0, seed=2)
    assert sorted(v for b in blocks for v in b) == list(range(1, 7))


def test_chain():
    n = 400
    chain = cs.MarkChain(cs.sample_uniform_tree(n, seed=5), seed=6)
    k = cs.observation_step(n, 1.0, 0.0)
    assert k == n
    chain.run_until(k)
    assert chain.k == k
    masses = chain.ranked_masses()
    assert abs(sum(masses) - 1.0) < 1e-9
    assert len(masses) == chain.mark_count + 1
    step, obs_masses, marks, flags = chain.observe([(1, 1), (1, 2)])
    assert step == k and marks == chain.mark_count and flags[0]
    assert obs_masses == masses


def test_limit_formulas():
    assert abs(cs.mixed_pair_prob(1.0, 0.0) - 0.5) < 1e-8
    assert cs.mixed_pair_prob(1.0, 2.0) < cs.mixed_pair_prob(1.0, 0.0)
    assert abs(cs.pair_joint_survival(1.0, 1.0, 0.0) - math.exp(-1.0)) < 1e-12
    assert 0.0 < cs.mixed_survival(1.0, 1.0) < 1.0
    assert abs(cs.half_normal_cdf(1.0, 1.0) - math.erf(1 / math.sqrt(2))) < 1e-9
    sizes = cs.sample_block_sizes(1000, 1.0, seed=4)
    assert sum(sizes) == 1000


def test_statistics():
    draws = [cs.sample_reflected_bm(1.0, seed=s) for s in range(2000)]
    assert cs.ks_vs_half_normal(draws, 1.0) < 0.05
    assert cs.ks_two_sample(draws, draws) == 0.0
    assert cs.wasserstein1(draws, draws) == 0.0
    counts = [cs.urn_count_at(400, 1.0, seed=s) for s in range(200)]
    assert all(0 <= c <= 400 for c in counts)
    count, fraction, empty = cs.urn_turnover(400, 1.0, 0.5, seed=1)
    assert 0.0 <= fraction <= 1.0 and empty == (count == 0)


def test_experiment_runner():
    passed, summary = cs.run_experiment(
        [("experiment", "urn-check"), ("n", "200"), ("replicas", "5"), ("threads", "1")]
    )
    report = json.loads(summary)
    assert passed
    assert report["experiment"] == "urn-check"
    assert all(c["status"] == "skipped" for c in report["checks"])
    try:
        cs.run_experiment([("s_grid", "1,0")])
    except ValueError:
        pass
    else:
        raise AssertionError("bad s_grid accepted")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
    print(f"crt_subaging {cs.__version__}: all smoke tests passed")
