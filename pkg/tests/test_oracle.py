import itertools

import numpy as np
import pytest

from sphnn.geometry import BaseRel, Sphere, TargetRel, classify
from sphnn.oracle import (
    GridSpec,
    brute_force_model,
    brute_force_third,
    chain_relations,
    chain_valid,
    coincidence_forced,
    composition_table,
    cycle_satisfiable,
    is_valid_classic,
    relation_of,
    transpose_set,
    valid_classic_forms,
    valid_classic_names,
)
from sphnn.reasoner import _order_cycle, check_model, spatialise, task_constraints
from sphnn.syllogism import parse_task
from sphnn.tasks import enumerate_classic, task_id

D, PO, PP, PPbar, EQ = BaseRel.D, BaseRel.PO, BaseRel.PP, BaseRel.PPbar, BaseRel.EQ
ALL = frozenset(BaseRel)


@pytest.fixture(scope="module")
def table():
    return composition_table()


class TestGridClassifier:
    def test_agrees_with_float_classifier(self):
        c, r = GridSpec(bound=3, radius_bound=3).spheres()
        rng = np.random.default_rng(0)
        for _ in range(2000):
            i, j = rng.integers(len(r), size=2)
            # exp(log(r)) is not always r, so exact tangencies may round either way
            d2 = int(((c[i] - c[j]) ** 2).sum())
            if d2 and d2 in ((r[i] + r[j]) ** 2, (r[i] - r[j]) ** 2):
                continue
            a = Sphere.from_radius(c[i].astype(float), float(r[i]))
            b = Sphere.from_radius(c[j].astype(float), float(r[j]))
            assert relation_of(c[i], r[i], c[j], r[j]) is classify(a, b)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            GridSpec(bound=2)
        with pytest.raises(ValueError):
            GridSpec(dim=3)


class TestCompositionTable:
    def test_eq_is_identity(self, table):
        for r in BaseRel:
            assert table[(EQ, r)] == {r}
            assert table[(r, EQ)] == {r}

    def test_known_entries(self, table):
        assert table[(PP, PP)] == {PP}
        assert table[(D, D)] == ALL
        assert table[(PP, D)] == {D}
        assert table[(PPbar, PP)] == {PO, PP, PPbar, EQ}
        assert table[(PO, PO)] == ALL

    def test_transpose_consistent(self, table):
        for a, b in itertools.product(BaseRel, repeat=2):
            lhs = transpose_set(table[(a, b)])
            rhs = table[(next(iter(transpose_set({b}))), next(iter(transpose_set({a}))))]
            assert lhs == rhs

    def test_finer_grid_adds_nothing(self, table):
        finer = composition_table(GridSpec(bound=8, radius_bound=8))
        for key, rels in table.items():
            assert finer[key] == rels

    def test_json_round_trip(self, table):
        import json
        rows = json.loads(table.to_json())
        assert len(rows) == 25
        assert rows["PP,PP"] == ["PP"]


class TestClassicForms:
    def test_twenty_four_named_rows(self):
        assert len(valid_classic_forms()) == 24
        assert len(set(valid_classic_names())) == 24
        assert all(is_valid_classic(t) for t in valid_classic_forms())

    def test_chain_semantics_matches_table(self, table):
        tasks = enumerate_classic()
        assert len(tasks) == 256
        valid = {task_id(t) for t in tasks if chain_valid(t, table)}
        assert valid == {task_id(t) for t in tasks if is_valid_classic(t)}
        assert len(valid) == 24

    def test_valid_iff_negated_cycle_unsat(self, table):
        for task in enumerate_classic():
            _, targets = _order_cycle(task_constraints(task))
            assert chain_valid(task, table) == (not cycle_satisfiable(targets, table))

    def test_barbara_chain_relations(self, table):
        task = parse_task("all s m\nall m p\ntherefore: all s p")
        assert chain_relations(task, table) == {PP, EQ}

    def test_is_valid_classic_rejects_long_tasks(self):
        with pytest.raises(ValueError):
            is_valid_classic(parse_task("all a b\nall b c\nall c d\ntherefore: all a d"))

    def test_symmetric_moods_match_either_order(self):
        assert is_valid_classic(parse_task("no m p\nall s m\ntherefore: no p s"))


class TestCoincidence:
    def test_only_aao4_is_forced(self, table):
        forced = []
        for task in enumerate_classic():
            _, targets = _order_cycle(task_constraints(task))
            if coincidence_forced(targets, table):
                forced.append(task_id(task))
        assert forced == ["aao4"]

    def test_all_cycle(self, table):
        assert coincidence_forced([TargetRel.P] * 3, table)
        assert not coincidence_forced([TargetRel.P, TargetRel.P, TargetRel.Pbar], table)
        assert not coincidence_forced([TargetRel.D, TargetRel.P, TargetRel.P], table)


class TestBruteForce:
    def test_models_pass_check(self):
        for task in enumerate_classic()[::16]:
            cs = task_constraints(task)
            m = brute_force_model([(c.target, c.i, c.j) for c in cs])
            if chain_valid(task):
                assert m is None
                continue
            assert m is not None
            config = {t: Sphere.from_radius(c, r) for t, (c, r) in m.items()}
            assert check_model(config, cs) == 0.0

    def test_third_sphere_hits_hold(self):
        from sphnn.geometry import holds
        x, y = ((0, 0), 2), ((2, 0), 1)
        hits = brute_force_third(x, y, TargetRel.P, TargetRel.NotD)
        assert hits
        xs, ys = Sphere.from_radius(*x), Sphere.from_radius(*y)
        for c, r in hits:
            z = Sphere.from_radius(c, r)
            assert holds(TargetRel.P, z, xs) and holds(TargetRel.NotD, z, ys)

    def test_term_limit(self):
        cs = [spatialise(s) for s in
              parse_task("all a b\nall b c\nall c d\nall d e\ntherefore: all a e").premises]
        with pytest.raises(ValueError):
            brute_force_model([(c.target, c.i, c.j) for c in cs])
