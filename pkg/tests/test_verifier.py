from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphnn.config import OptimConfig
from sphnn.errors import ParseError
from sphnn.geometry import holds
from sphnn.syllogism import parse_statements
from sphnn.verifier import (
    VERBS,
    Claim,
    Decision,
    HallucinationClass,
    check,
    classify_hallucination,
    construct_claims,
    feedback_line,
    parse_reply,
    parse_transcript,
    verify_transcript,
)

DATA = Path(__file__).parent / "data"
H = HallucinationClass


def stmts(text):
    premises, conclusion = parse_statements(text)
    return premises + ([conclusion] if conclusion else [])


S1 = stmts("no m0 s\nall p m0\nsome-not s p")


class TestParseReply:
    def test_triples(self):
        d = parse_reply("Sure: (circle S, inside, circle P) and (circle p, Partially  Overlaps\n"
                        " with, circle q).")
        assert d.answer == "yes"
        assert d.claims == (Claim("s", "inside", "p"), Claim("p", "partially-overlaps-with", "q"))
        assert d.fragment.startswith("(circle S") and d.fragment.endswith("circle q)")

    def test_cannot(self):
        d = parse_reply("No, this CANNOT be drawn.")
        assert d.answer == "cannot" and d.fragment == "CANNOT"

    def test_triples_win_over_cannot(self):
        assert parse_reply("cannot? (circle a, outside, circle b)").answer == "yes"

    def test_unknown_verb_offset(self):
        text = "(circle a, touches, circle b)"
        with pytest.raises(ParseError) as err:
            parse_reply(text)
        assert err.value.offset == text.index("touches")

    def test_nothing_to_read(self):
        with pytest.raises(ParseError):
            parse_reply("perhaps")

    def test_decision_validation(self):
        with pytest.raises(ValueError):
            Decision("yes")
        with pytest.raises(ValueError):
            Decision("cannot", (Claim("a", "inside", "b"),))
        with pytest.raises(ValueError):
            Decision("maybe")
        with pytest.raises(ValueError):
            Claim("a", "touches", "b")


class TestConstruct:
    def test_consistent_claims_build(self):
        claims = [Claim("a", "inside", "b"), Claim("b", "disconnects-from", "c"),
                  Claim("a", "disconnects-from", "c")]
        model = construct_claims(claims, OptimConfig())
        assert model is not None
        for c in claims:
            assert holds(VERBS[c.verb], model[c.subject], model[c.object])

    def test_contradictory_claims_fail(self):
        claims = [Claim("a", "inside", "b"), Claim("b", "inside", "c"),
                  Claim("c", "disconnects-from", "a")]
        assert construct_claims(claims, OptimConfig()) is None

    def test_mutual_containment_means_coincidence(self):
        claims = [Claim("a", "inside", "b"), Claim("b", "inside", "a")]
        model = construct_claims(claims, OptimConfig())
        assert model is not None
        assert model["a"] == model["b"]


class TestRounds:
    def test_round_one_is_h2(self):
        d = parse_reply("(circle s, disconnects from, circle m0), (circle p, inside, circle m0), "
                        "(circle s, partially overlaps with, circle p)")
        r = check(d, S1)
        # each triple explains its statement, but p inside m0 and s apart
        # from m0 leave s no way to overlap p
        assert r.decision_matches_engine and not r.claims_constructible
        assert all(status == "faithful" for _, status in r.coverage)
        assert classify_hallucination(r) is H.H2
        assert feedback_line(r, d) == (
            "It is not correct that '''(circle s, disconnects from, circle m0), "
            "(circle p, inside, circle m0), (circle s, partially overlaps with, circle p)'''")

    def test_round_two_cannot(self):
        d = parse_reply("cannot")
        r = check(d, S1)
        assert r.engine_satisfiable and not r.decision_matches_engine
        assert r.claims_constructible and r.coverage == []
        assert r.hallucination_class is H.IncorrectDecision
        assert feedback_line(r, d) == "It is not correct that '''cannot'''."

    def test_round_three_strict_and_lenient(self):
        d = parse_reply("(circle m0, inside, circle p)\n(circle s, disconnects from, circle p)\n"
                        "(circle s, disconnects from, circle m0)")
        r = check(d, S1)
        assert r.claims_constructible
        assert r.hallucination_class is H.H1
        assert r.hallucination_class_lenient is H.Correct

    @pytest.mark.parametrize("statements, reply, cls", [
        ("some-not s m0\nall m0 p\nall s p",
         "(circle S, inside, circle P)\n(circle P, inside, circle M0)\n(circle M0, inside, circle P)",
         H.H0),
        ("no m0 s\nno m0 p\nall s p",
         "(circle P, inside, circle M0) \n(circle M0, outside, circle S)\n(circle S, inside, circle P)",
         H.H1),
        ("some-not m0 s\nall m0 p\nsome-not s p",
         "(circle M0, overlaps, circle S)\n(circle M0, inside, circle P)\n(circle S, outside, circle P)",
         H.H2),
    ])
    def test_hallucination_examples(self, statements, reply, cls):
        r = check(parse_reply(reply), stmts(statements))
        assert r.hallucination_class is cls

    def test_correct_reply_has_no_feedback(self):
        d = parse_reply("(circle p, inside, circle m0), (circle s, disconnects from, circle m0), "
                        "(circle s, disconnects from, circle p)")
        r = check(d, S1)
        assert r.correct
        assert r.to_dict(d)["feedback"] is None
        with pytest.raises(ValueError):
            feedback_line(r, d)

    def test_correct_cannot(self):
        d = parse_reply("cannot")
        r = check(d, stmts("all a b\nall b c\nsome-not a c"))
        assert r.correct and r.claims_constructible and r.coverage == []


class TestFeedback:
    def test_quoted_fragment_parses_back(self):
        text = "(circle s, disconnects from, circle m0), (circle p, inside, circle m0)"
        d = parse_reply("yes! " + text + " done")
        r = check(d, S1)
        line = feedback_line(r, d)
        quoted = line.split("'''")[1]
        assert quoted == text
        assert parse_reply(quoted).claims == d.claims


class TestTranscript:
    def test_rounds(self):
        rounds = parse_transcript((DATA / "transcript.txt").read_text())
        assert len(rounds) == 3
        assert all(s == S1 for s, _ in rounds)
        assert rounds[1][1] == "cannot"

    def test_reports(self):
        reports = verify_transcript((DATA / "transcript.txt").read_text())
        assert [r["class"] for r in reports] == ["H2", "IncorrectDecision", "H1"]
        assert reports[2]["classLenient"] == "Correct"
        assert reports[1]["feedback"] == "It is not correct that '''cannot'''."

    def test_deterministic(self):
        text = (DATA / "transcript.txt").read_text()
        assert verify_transcript(text) == verify_transcript(text)

    @pytest.mark.parametrize("text", [
        "REPLY:\ncannot\n",
        "hello\nSTATEMENTS:\nall a b\n",
        "STATEMENTS:\n\nREPLY:\ncannot\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_transcript(text)


terms = st.sampled_from(["a", "b", "c"])
verbs = st.sampled_from(sorted(VERBS))


@st.composite
def claims(draw):
    s = draw(terms)
    o = draw(terms.filter(lambda t: t != s))
    return Claim(s, draw(verbs), o)


@settings(max_examples=60, deadline=None)
@given(st.lists(claims(), min_size=1, max_size=4),
       st.sampled_from(["all a b\nsome b c\nno a c", "all a b\nall b c\nsome-not a c",
                        "no a b\nsome-not b c\nsome a c"]))
def test_exactly_one_class(cs, statements):
    r = check(Decision("yes", tuple(cs), "x"), stmts(statements))
    cls = classify_hallucination(r)
    assert isinstance(cls, HallucinationClass)
    if cls is H.Correct:
        assert r.decision_matches_engine and r.claims_constructible
        assert all(status == "faithful" for _, status in r.coverage)
    if r.claims_constructible:
        for c in cs:
            assert holds(VERBS[c.verb], r.model[c.subject], r.model[c.object])
