import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knotenergy.diagrams import (ChordDiagram, DiagramError, GaussDiagram, KnotDiagramCode, Layered,
                                 SkeinBudgetError, Token, add_kink, braid_word_moves,
                                 chord_diagram_of, conway_a2_skein, count_subdiagrams,
                                 diagram_stats, induced, intersecting_pairs, layered_code,
                                 pairing_matrix, parse_diagram, parse_gauss_code,
                                 random_code_diagram, x_crossing_upper_bound, x_diagram, zoo_code)
import oracles


def tokens_of(code):
    return [(t.cid, t.over, t.sign) for t in code.tokens]


# -- chord diagrams ----------------------------------------------------------------

def test_perfect_matching_is_enforced():
    with pytest.raises(DiagramError):
        ChordDiagram(((1, 2), (2, 3)))
    with pytest.raises(DiagramError):
        ChordDiagram(((1, 5), (2, 3)))


def test_pairs_are_normalised():
    d = ChordDiagram(((4, 2), (3, 1)))
    assert d.pairs == ((1, 3), (2, 4))
    assert d.partner == (2, 3, 0, 1)
    assert ChordDiagram.from_partner(d.partner) == d


def test_rotation_and_isomorphism():
    d = ChordDiagram(((1, 2), (3, 6), (4, 5)))
    for k in range(6):
        assert d.rotated(k).isomorphic(d)
    assert not d.isomorphic(x_diagram(3))
    # as Gauss diagrams the rotations are distinct objects
    g = GaussDiagram(((1, 2), (3, 4)))
    assert GaussDiagram(g.rotated(1).pairs) != g
    assert g.as_chord_diagram().isomorphic(ChordDiagram(g.rotated(1).pairs))


def test_json_roundtrip():
    d = x_diagram(3)
    assert ChordDiagram.from_json(json.loads(json.dumps(d.to_json()))) == d
    with pytest.raises(DiagramError):
        ChordDiagram.from_json({"n": 2, "pairs": [[1, 2]]})


def test_parse_diagram_forms():
    assert parse_diagram("w").pairs == ((1, 2),)
    assert parse_diagram("X").pairs == ((1, 3), (2, 4))
    assert parse_diagram("X3").pairs == ((1, 4), (2, 5), (3, 6))
    assert parse_diagram("1-2,3-4").n == 2
    for bad in ("1-2-3", "a-b", "1-3,2-3"):
        with pytest.raises(DiagramError):
            parse_diagram(bad)


diagrams = st.integers(1, 6).flatmap(
    lambda n: st.permutations(range(1, 2 * n + 1)).map(
        lambda p: ChordDiagram(tuple((p[2 * i], p[2 * i + 1]) for i in range(len(p) // 2)))))


@given(diagrams)
def test_intersecting_pairs_matches_brute_force(d):
    assert intersecting_pairs(d) == oracles.crossing_pair_count(d.pairs)
    M = pairing_matrix(d)
    assert M.sum() == 2 * intersecting_pairs(d)


@given(diagrams, st.integers(1, 3))
def test_subdiagram_count_matches_brute_force(d, k):
    pattern = x_diagram(k)
    brute = 0
    for sub in itertools.combinations(range(d.n), k):
        if all(oracles.chords_cross(d.pairs[a], d.pairs[b]) for a, b in itertools.combinations(sub, 2)):
            brute += 1
    assert count_subdiagrams(d, pattern) == brute


def test_induced_renumbers():
    d = ChordDiagram(((1, 4), (2, 6), (3, 5)))
    assert induced(d, (1, 2)).pairs == ((1, 4), (2, 3))


def test_x_diagram_is_totally_interleaved():
    for n in range(1, 7):
        assert intersecting_pairs(x_diagram(n)) == n * (n - 1) // 2


# -- Gauss codes -------------------------------------------------------------------

def test_parse_gauss_code_and_errors():
    code = parse_gauss_code("O1+ U2+ O3+ U1+ O2+ U3+")
    assert code.crossings == 3
    assert str(code) == "O1+ U2+ O3+ U1+ O2+ U3+"
    with pytest.raises(DiagramError, match="position 2"):
        parse_gauss_code("O1+ X2+ U1+")
    with pytest.raises(DiagramError, match="appears 1 times"):
        parse_gauss_code("O1+ U2+ O2+")
    with pytest.raises(DiagramError, match="over/under"):
        parse_gauss_code("O1+ O1+")
    with pytest.raises(DiagramError, match="inconsistent"):
        parse_gauss_code("O1+ U1-")


def test_trefoil_stats():
    code = parse_gauss_code("O1+ U2+ O3+ U1+ O2+ U3+")
    assert diagram_stats(code) == {"crossings": 3, "pairs": 3, "x3": 1, "writhe": 3}
    assert x_crossing_upper_bound(code) == 3
    assert chord_diagram_of(code).isomorphic(x_diagram(3))


def test_code_transformations():
    code = zoo_code("figure8")
    assert conway_a2_skein(code.rotated(3)) == conway_a2_skein(code)
    assert conway_a2_skein(code.mirrored()) == conway_a2_skein(code)
    rel = parse_gauss_code("O7+ U9+ O4+ U7+ O9+ U4+").relabelled()
    assert [t.cid for t in rel.tokens] == [1, 2, 3, 1, 2, 3]


# -- second Conway coefficient -------------------------------------------------------

ZOO_NAMES = ["unknot", "torus2q(3)", "torus2q(5)", "torus2q(7)", "figure-eight",
             "twist(1)", "twist(2)", "twist(3)", "twist(4)"]


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_skein_matches_alexander_oracle(name):
    code = zoo_code(name)
    assert conway_a2_skein(code) == oracles.alexander_a2(tokens_of(code))


@pytest.mark.parametrize("q", [3, 5, 7, 9])
def test_torus_knot_coefficient(q):
    assert conway_a2_skein(zoo_code(f"torus2q:q={q}")) == (q * q - 1) // 8


def test_named_values():
    assert conway_a2_skein(zoo_code("unknot")) == 0
    assert conway_a2_skein(zoo_code("twist(1)")) == 1
    assert conway_a2_skein(zoo_code("twist(2)")) == -1


def test_zoo_code_errors():
    for bad in ("torus2q(4)", "twist(0)", "granny"):
        with pytest.raises(DiagramError):
            zoo_code(bad)


@settings(max_examples=20)
@given(st.sampled_from(["torus2q(3)", "figure-eight", "twist(3)"]), st.data())
def test_kinks_leave_coefficient_unchanged(name, data):
    code = zoo_code(name)
    base = conway_a2_skein(code)
    for _ in range(data.draw(st.integers(1, 2))):
        pos = data.draw(st.integers(0, len(code.tokens)))
        code = add_kink(code, pos, data.draw(st.booleans()), data.draw(st.sampled_from([1, -1])))
    assert conway_a2_skein(code) == base


def test_braid_moves_preserve_coefficient():
    word = (1, 1, 1)
    for moved in braid_word_moves(word):
        code = layered_code(Layered(max(2, max(abs(g) for g in moved) + 1), moved, "braid"))
        assert conway_a2_skein(code) == 1


@settings(max_examples=15)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), min_size=2, max_size=7))
def test_random_three_braid_closures_match_oracle(word):
    # keep only closures with one component: the permutation must be a 3-cycle
    perm = list(range(3))
    for g in word:
        a = abs(g) - 1
        perm[a], perm[a + 1] = perm[a + 1], perm[a]
    cycle = perm[perm[0]] != 0 and perm[0] != 0
    if not cycle:
        return
    code = layered_code(Layered(3, tuple(word), "braid"))
    assert conway_a2_skein(code) == oracles.alexander_a2(tokens_of(code))


def test_skein_budget():
    with pytest.raises(SkeinBudgetError):
        conway_a2_skein(zoo_code("torus2q(9)"), max_crossings=5)


def test_torus_code_diagram_is_totally_interleaved():
    for q in (3, 5, 7):
        d = chord_diagram_of(zoo_code(f"torus2q({q})"))
        assert d.isomorphic(x_diagram(q))


def test_random_code_diagram_is_seeded():
    a = random_code_diagram(5, np.random.default_rng(1))
    b = random_code_diagram(5, np.random.default_rng(1))
    assert a == b and a.n == 5


def test_token_str():
    assert str(Token(3, False, -1)) == "U3-"
    assert KnotDiagramCode(()).crossings == 0


def brute_x3(d):
    return sum(all(oracles.chords_cross(d.pairs[a], d.pairs[b]) for a, b in itertools.combinations(t, 2))
               for t in itertools.combinations(range(d.n), 3))


def test_twist_family_has_bounded_x3_count():
    # even twist counts: infinitely many distinct knots, none with an X_3 sub-diagram
    a2 = []
    for k in range(2, 13, 2):
        code = zoo_code(f"twist({k})")
        d = chord_diagram_of(code)
        assert count_subdiagrams(d, x_diagram(3)) == brute_x3(d) == 0
        a2.append(conway_a2_skein(code, max_crossings=20))
    assert len(set(a2)) == len(a2)


def test_odd_twist_diagrams_have_interleaved_clasps():
    # with an odd twist count the two clasp crossings interleave and every
    # twist crossing closes a triangle with them
    for k in range(1, 10, 2):
        d = chord_diagram_of(zoo_code(f"twist({k})"))
        assert count_subdiagrams(d, x_diagram(3)) == brute_x3(d) == k


def test_four_crossing_diagram_bound():
    # the standard figure-eight projection: four crossings, four interleaved pairs
    code = zoo_code("figure-eight")
    assert code.crossings == 4
    assert x_crossing_upper_bound(code) == intersecting_pairs(chord_diagram_of(code)) == 4
