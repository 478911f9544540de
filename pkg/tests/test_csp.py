import itertools

import pytest
from hypothesis import given, settings, strategies as st

from branchlearn import csp, erm
from branchlearn.csp import Constraint, CspConfig, CspInstance, PartialSolution
from branchlearn.scoring import ScoringSpec
from oracles import colorable

EXAMPLE = csp.encode_graph_coloring(csp.EXAMPLE_GRAPH_EDGES, 3)


def valid_coloring(inst, y):
    return y.complete and all(c.holds([y.values[v] for v in c.scope]) for c in inst.constraints)


def test_example_graph_scores_and_first_branch():
    y = PartialSolution.empty(4)
    assert csp.score_deg_dom(EXAMPLE, y, 2) == 1.0
    assert csp.score_deg_dom(EXAMPLE, y, 0) == pytest.approx(2 / 3)
    res = csp.ts_run(EXAMPLE)
    assert res.tree.root.branch_var == 2
    assert valid_coloring(EXAMPLE, res.best)


def test_dynamic_degree_can_vanish():
    inst = CspInstance(["a", "b"], [(0, 1), (0, 1)], [csp.not_equal(0, 1)])
    y = PartialSolution.empty(2).assign(0, 0)
    assert inst.degree(1) == 1
    assert csp.score_ddeg_dom(inst, y, 1) == 0.0 and csp.score_deg_dom(inst, y, 1) == 0.5


def test_smallest_domain_rule():
    inst = CspInstance(["a", "b"], [(7,), (0, 1, 2, 3)], [])
    y = PartialSolution.empty(2)
    assert csp.score_smallest_domain(inst, y, 0) == 1.0
    assert csp.score_smallest_domain(inst, y, 1) == 0.25


def test_one_level_search():
    inst = CspInstance(["x"], [(0, 1, 2)], [Constraint((0,), lambda v: v != 0)])
    res = csp.ts_run(inst)
    assert res.best.values == (1,)
    assert res.tree.size == 3 + 1


def test_k3_two_colors_is_null():
    k3 = csp.encode_graph_coloring([(0, 1), (0, 2), (1, 2)], 2)
    assert csp.ts_run(k3).best is None
    assert not colorable(3, [(0, 1), (0, 2), (1, 2)], 2)


def test_encoding_examples():
    assert csp.ts_run(csp.encode_graph_coloring([], 1, n_vertices=3)).best is not None
    k4 = list(itertools.combinations(range(4), 2))
    assert csp.ts_run(csp.encode_graph_coloring(k4, 3)).best is None
    assert csp.brute_force_satisfiable(EXAMPLE)
    with pytest.raises(ValueError):
        csp.encode_graph_coloring([(0, 1)], 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_all_small_graphs_against_oracle(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        for k in (1, 2, 3):
            inst = csp.encode_graph_coloring(edges, k, n)
            res = csp.ts_run(inst)
            assert (res.best is not None) == colorable(n, edges, k)
            if res.best is not None:
                assert valid_coloring(inst, res.best)


@st.composite
def small_csps(draw):
    n = draw(st.integers(1, 5))
    domains = [tuple(range(draw(st.integers(1, 3)))) for _ in range(n)]
    cons = []
    for _ in range(draw(st.integers(0, 6))):
        a, b = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        kind = draw(st.sampled_from(["ne", "lt", "sum2"]))
        if kind == "ne" and a != b:
            cons.append(csp.not_equal(a, b))
        elif kind == "lt" and a != b:
            cons.append(Constraint((a, b), lambda u, v: u < v, "lt"))
        else:
            cons.append(Constraint((a,), lambda u: u != 2, "unary"))
    return CspInstance([f"v{k}" for k in range(n)], domains, cons)


def brute(inst):
    best_sat, any_ok = -1, False
    for vals in itertools.product(*inst.domains):
        ok = [c.holds([vals[v] for v in c.scope]) for c in inst.constraints]
        any_ok = any_ok or all(ok)
        best_sat = max(best_sat, sum(ok))
    return any_ok, best_sat


@settings(max_examples=80, deadline=None)
@given(small_csps(), st.sampled_from(["degdom", "ddegdom", "mindom"]), st.sampled_from(["depthfirst", "bestbound"]))
def test_hard_preset_verdict_matches_brute_force(inst, rule, sel):
    res = csp.ts_run(inst, spec=ScoringSpec.single(rule), cfg=CspConfig(node_selection=sel))
    sat, _ = brute(inst)
    assert (res.best is not None) == sat
    if sat:
        assert valid_coloring(inst, res.best)


@settings(max_examples=80, deadline=None)
@given(small_csps(), st.sampled_from(["degdom", "ddegdom", "mindom"]))
def test_none_preset_maximizes_satisfied(inst, rule):
    res = csp.ts_run(inst, spec=ScoringSpec.single(rule), cfg=CspConfig(preset="none"))
    _, best_sat = brute(inst)
    assert res.tree.incumbent == best_sat
    assert res.best is not None and res.best.complete
    assert inst.status(res.best)[1] == best_sat


def test_pathwise_scores():
    y = PartialSolution.empty(4).assign(0, 1)
    for rule in (csp.score_deg_dom, csp.score_ddeg_dom, csp.score_smallest_domain):
        # scores depend only on the partial solution itself
        assert [rule(EXAMPLE, y, i) for i in (1, 2, 3)] == [rule(EXAMPLE, PartialSolution(y.values), i) for i in (1, 2, 3)]


def test_file_round_trip():
    text = csp.dumps_csp(EXAMPLE)
    assert text.startswith("var x1 0 1 2\n")
    back = csp.loads_csp(text)
    assert csp.dumps_csp(back) == text
    assert back.names == EXAMPLE.names and back.domains == EXAMPLE.domains


def test_dimacs_input():
    text = "c colors 2\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n"
    inst = csp.loads_csp(text)
    assert inst.n == 3 and inst.domains[0] == (0, 1) and len(inst.constraints) == 3
    assert csp.ts_run(inst).best is None
    assert csp.loads_csp("p edge 2 1\ne 1 2\n").domains[0] == (0, 1, 2)


@pytest.mark.parametrize("text", ["var\n", "ne a\n", "var a 1\nne a b\n", "foo a\n"])
def test_bad_files(text):
    with pytest.raises(ValueError):
        csp.loads_csp(text)


def test_validation():
    with pytest.raises(ValueError):
        CspInstance(["a"], [()], [])
    with pytest.raises(ValueError):
        CspInstance(["a"], [(0,)], [csp.not_equal(0, 1)])
    with pytest.raises(ValueError):
        CspConfig(preset="soft")
    with pytest.raises(ValueError):
        PartialSolution.empty(2).assign(0, 1).assign(0, 2)


def test_node_cap_reported():
    k5 = list(itertools.combinations(range(5), 2))
    res = csp.ts_run(csp.encode_graph_coloring(k5, 4), cfg=CspConfig(node_cap=5))
    assert res.tree.capped and res.best is None


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("preset", ["hard", "none"])
def test_csp_sweep_grid_oracle(seed, preset):
    inst = csp.encode_graph_coloring(csp.random_graph(6, 0.5, seed), 3, 6)
    cfg = CspConfig(preset=preset)
    pc = erm.enumerate_behaviors(inst, "degdom", "ddegdom", cfg)
    pc.check_partition()
    for g in erm.grid_sweep(inst, ["degdom", "ddegdom"], [k / 200 for k in range(201)], cfg):
        assert g.fingerprint == pc.piece_at(g.weights[0]).fingerprint
