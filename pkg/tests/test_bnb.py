import math

import pytest
from hypothesis import given, settings, strategies as st

from branchlearn.bnb import (
    BnbConfig, FathomMode, NodeSelection, NodeState, cost_tree_size, node_select, run,
)
from branchlearn.generators import (
    FamilyParams, family_F, family_G, jeroslow, knapsack_example, random_binary_milp,
)
from branchlearn.milp import MilpInstance
from branchlearn.scoring import ScoringSpec
from oracles import milp_enumerate

MOSTFRAC = ScoringSpec.single("mostfrac")
KNAPSACK_TREE = """\
0 -1 - - branched 140.0
1 0 0 0 branched 135.0
2 0 0 1 branched 136.0
3 2 1 0 fathomed:bound 120.0
4 2 1 1 fathomed:bound 120.0
5 1 5 0 branched 133.33333333333334
6 1 5 1 fathomed:bound 116.0
7 5 2 0 fathomed:integral 133.0
8 5 2 1 fathomed:bound 118.0
"""


def test_knapsack_golden_tree():
    res = run(knapsack_example(), MOSTFRAC)
    assert res.optimum == pytest.approx(133.0)
    assert res.tree.dump() == KNAPSACK_TREE
    assert cost_tree_size(res.tree, 10**6) == 9
    assert {round(res.tree.nodes[k].bound, 6) for k in res.tree.root.children} == {135.0, 136.0}


def test_node_select_follows_example_order():
    q = knapsack_example()
    after_root = run(q, MOSTFRAC, BnbConfig(node_cap=3)).tree
    assert after_root.capped
    assert after_root.nodes[node_select(after_root, NodeSelection.BEST_BOUND)].bound == pytest.approx(136.0)
    after_pink = run(q, MOSTFRAC, BnbConfig(node_cap=5)).tree
    assert after_pink.nodes[node_select(after_pink, "bestbound")].bound == pytest.approx(135.0)
    # depth first takes the newest sibling pair and its value-0 child
    assert after_pink.nodes[node_select(after_pink, "depthfirst")].label == (1, 0)


def test_node_select_requires_open_leaf():
    tree = run(knapsack_example(), MOSTFRAC).tree
    with pytest.raises(ValueError):
        node_select(tree, "bestbound")


def test_single_open_leaf():
    q = MilpInstance.from_rows([1.0, 1.0], [([1, 1], "le", 1.5)])
    tree = run(q, MOSTFRAC, BnbConfig(node_cap=1)).tree
    assert node_select(tree, "depthfirst") == 0


def test_cost_cap():
    tree = run(family_F(FamilyParams(10, 0.45)), ScoringSpec.pair("minchange", "maxchange", 0.9)).tree
    assert tree.size == 139
    assert cost_tree_size(tree, 10) == 10
    root_only = run(MilpInstance.from_rows([1.0], [([1], "le", 1)]), MOSTFRAC).tree
    assert cost_tree_size(root_only, 10) == 1


def test_family_big_side_with_dfs():
    cfg = BnbConfig(node_selection="depthfirst")
    tree = run(family_F(FamilyParams(8, 0.45)), ScoringSpec.pair("minchange", "maxchange", 0.9), cfg).tree
    big = [nd for nd in tree.nodes if nd.state is NodeState.BRANCHED and nd.branch_var < 5]
    assert len(big) >= 2 ** ((8 - 4) // 2)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_jeroslow_lower_bound(n):
    for spec in (MOSTFRAC, ScoringSpec.single("product")):
        res = run(jeroslow(n), spec)
        assert res.optimum is None
        assert res.tree.size >= 2 ** ((n - 1) // 2)


def test_jeroslow_needs_odd():
    with pytest.raises(ValueError):
        jeroslow(4)


def test_config_validation():
    with pytest.raises(ValueError):
        BnbConfig(node_cap=0)
    with pytest.raises(ValueError):
        BnbConfig(node_selection="breadth")
    assert BnbConfig(node_cap=50).kappa == 50 and BnbConfig(node_cap=50, cost_cap=7).kappa == 7


def test_requires_binary():
    q = MilpInstance.from_rows([1.0], [], binary=[])
    with pytest.raises(ValueError):
        run(q, MOSTFRAC)


def _spec_strategy():
    rules = st.sampled_from(["mostfrac", "product", "minchange", "maxchange", "linear", "entropic"])
    return st.builds(lambda a, b, mu: ScoringSpec.pair(a, b, mu), rules, rules, st.sampled_from([0, 0.3, 0.5, 1]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 8), st.integers(1, 4), st.integers(0, 2), _spec_strategy(),
       st.sampled_from(["bestbound", "depthfirst"]))
def test_optimum_matches_enumeration(seed, n, rows, n_cont, spec, sel):
    q = random_binary_milp(n, rows, seed=seed, n_continuous=n_cont)
    res = run(q, spec, BnbConfig(node_selection=sel))
    ref = milp_enumerate(q)
    if ref is None:
        assert res.optimum is None
    else:
        assert res.optimum == pytest.approx(ref, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), _spec_strategy(), st.sampled_from(["bestbound", "depthfirst"]))
def test_bound_fathoms_respect_incumbent(seed, spec, sel):
    tree = run(random_binary_milp(8, 3, seed=seed), spec, BnbConfig(node_selection=sel)).tree
    for nd in tree.nodes:
        if nd.fathom_reason == "bound":
            assert nd.bound <= nd.incumbent_at_fathom + 1e-6
        if nd.state is not NodeState.OPEN:
            assert nd.state in (NodeState.BRANCHED, NodeState.FATHOMED)
    assert not any(nd.state is NodeState.OPEN for nd in tree.nodes)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), _spec_strategy())
def test_full_tree_is_rooted_subtree_of_localonly(seed, spec):
    q = random_binary_milp(8, 3, seed=seed)
    full = run(q, spec, BnbConfig(fathom_mode=FathomMode.FULL)).tree
    loose = run(q, spec, BnbConfig(fathom_mode="localonly")).tree
    assert full.paths() <= loose.paths()
    assert full.size <= loose.size


@pytest.mark.parametrize("fam", [family_F, family_G])
@pytest.mark.parametrize("mu", [0.0, 0.2, 0.9, 1.0])
def test_node_selection_invariance_on_infeasible(fam, mu):
    q = fam(FamilyParams(10, 0.45))
    spec = ScoringSpec.pair("minchange", "maxchange", mu)
    bb = run(q, spec, BnbConfig(node_selection="bestbound")).tree
    dfs = run(q, spec, BnbConfig(node_selection="depthfirst")).tree
    assert bb.fingerprint == dfs.fingerprint
    assert bb.incumbent == -math.inf


def test_fingerprint_changes_with_shape():
    q = family_F(FamilyParams(8, 0.45))
    a = run(q, ScoringSpec.pair("minchange", "maxchange", 0.2)).tree
    b = run(q, ScoringSpec.pair("minchange", "maxchange", 0.9)).tree
    assert a.fingerprint != b.fingerprint and len(a.fingerprint) == 16
