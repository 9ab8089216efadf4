"""Smoke test for the `cfb` extension module. Run after `maturin develop`."""

import itertools
import math
import pathlib

import cfb

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "core" / "tests" / "fixtures"


def test_parse_and_fragment():
    t = cfb.parse_transcript((FIXTURES / "lecture.srt").read_bytes(), "srt")
    assert len(t["spans"]) == 5
    spans = [(s["start"], s["end"], s["text"]) for s in t["spans"]]
    frags = cfb.fragment(spans, 40)
    text = "".join(s[2] + " " for s in spans)
    assert "".join(f["text"] for f in frags) == text
    assert [f["char_start"] for f in frags[1:]] == [f["char_end"] for f in frags[:-1]]


def test_lexicon():
    lex = cfb.Lexicon(str(FIXTURES / "lexicon.jsonl"))
    mentions = lex.link("Gradient descent trains a neural network.")
    assert [m[1] for m in mentions] == ["Gradient descent", "neural network"]
    annotations = lex.annotate("machine learning and gradient descent")
    assert math.isclose(sum(a["score"] for a in annotations), 1.0)
    assert lex.definition("Computer_network") is None


def test_pagerank_symmetric_pair():
    pr, scores = cfb.pagerank({"a": 0.5, "b": 0.5}, {"a": ["b"], "b": ["a"]})
    assert math.isclose(pr["a"], 0.5, abs_tol=1e-9) and math.isclose(scores["b"], 0.5, abs_tol=1e-9)


def test_wilcoxon_against_enumeration():
    d = [1.5, -0.5, 2.0, 3.0, -1.0, 0.25]
    w = cfb.wilcoxon(d)
    ranks = sorted(range(len(d)), key=lambda i: abs(d[i]))
    rank = {i: r + 1 for r, i in enumerate(ranks)}
    total = sum(rank.values())
    stat = min(w["w_plus"], w["w_minus"])
    extreme = sum(
        1
        for signs in itertools.product([0, 1], repeat=len(d))
        if min(s := sum(rank[i] for i in range(len(d)) if signs[i]), total - s) <= stat
    )
    assert math.isclose(w["p_value"], extreme / 2 ** len(d), abs_tol=1e-12)
    assert cfb.wilcoxon([1, 2, 3, 4, 5])["p_value"] == 0.0625


def test_relevance_and_levels():
    assert math.isclose(cfb.relevance({"a": 1.0}, {"a": 2.0, "b": 0.0}), 1.0)
    levels = cfb.highlight_levels([0.0, 0.2, 0.9, 0.5], 4)
    order = sorted(range(4), key=lambda i: [0.0, 0.2, 0.9, 0.5][i])
    assert [levels[i] for i in order] == sorted(levels)


def test_simulate_then_analyze():
    logs = cfb.simulate(10, 3, on_exploration_factor=2.0)
    assert len(logs) == 20
    report = cfb.analyze([e for log in logs for e in log], n_repeats=2)
    assert report["n_sessions"] == 20
    exploration = next(m for m in report["metrics"] if m["metric"] == "exploration_time")
    assert exploration["mean_difference"] > 0


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
