import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetmine.corpstats import (
    DEFAULT_FRACTIONS,
    PosAnnotatedDoc,
    RankFrequencyTable,
    TermContrast,
    discriminativeness,
    discriminativeness_table,
    hashtag_table,
    length_summary,
    length_t_test,
    log_window,
    pearson_r,
    pos_by_length,
    pos_proportions,
    pos_t_test,
    rank_frequency,
    read_pos_annotations,
    t_test,
    term_table,
    windowed_pearson,
    zipf_fit,
)
from tweetmine.errors import (
    ConfigError,
    EmptyInputError,
    InsufficientDataError,
    SchemaError,
    UndefinedCorrelationError,
    VocabularyError,
    ZeroVarianceError,
)
from tweetmine.ingest import DEFAULT_KEYWORDS, TweetRecord
from tweetmine.synth import multinomial_power_law_sample, pos_groups, power_law_counts
from tweetmine.textprep import TokenDoc


def doc(s, i=0):
    return TokenDoc(str(i), tuple(s.split()))


def docs_of_lengths(lengths):
    return [TokenDoc(str(i), ("w",) * n) for i, n in enumerate(lengths)]


def pos_doc(tags, i=0):
    return PosAnnotatedDoc(str(i), tuple((f"t{j}", t) for j, t in enumerate(tags)))


# -- rank/frequency ----------------------------------------------------------


def test_rank_frequency_basic():
    t = rank_frequency([doc("a a a b b c")])
    assert [(e.term, e.count, e.rank) for e in t] == [("a", 3, 1), ("b", 2, 2), ("c", 1, 3)]


def test_rank_ties_lexicographic():
    assert [e.term for e in rank_frequency([doc("b a")])] == ["a", "b"]


def test_rank_frequency_empty():
    with pytest.raises(EmptyInputError):
        rank_frequency([TokenDoc("1", ())])
    with pytest.raises(EmptyInputError):
        rank_frequency([])


def test_rank_frequency_recount():
    rng = np.random.default_rng(3)
    words = [f"w{i}" for i in range(300)]
    docs = [TokenDoc(str(i), tuple(rng.choice(words, size=10))) for i in range(1000)]
    table = rank_frequency(docs)
    tally = {}
    for d in docs:
        for t in d.tokens:
            tally[t] = tally.get(t, 0) + 1
    assert {e.term: e.count for e in table} == tally
    assert table.total == 10_000
    counts = [e.count for e in table]
    assert counts == sorted(counts, reverse=True)
    assert [e.rank for e in table] == list(range(1, len(table) + 1))


@settings(max_examples=30)
@given(st.lists(st.lists(st.sampled_from("abcdef"), max_size=6), min_size=1, max_size=8), st.randoms())
def test_rank_frequency_permutation_invariant(token_lists, rnd):
    docs = [TokenDoc(str(i), tuple(t)) for i, t in enumerate(token_lists)]
    if not any(d.tokens for d in docs):
        return
    shuffled = docs[:]
    rnd.shuffle(shuffled)
    assert rank_frequency(docs) == rank_frequency(shuffled)
    assert rank_frequency(docs).total == sum(len(d) for d in docs)


# -- pearson and windows -------------------------------------------------------


def direct_pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sx = math.sqrt(sum((a - mx) ** 2 for a in x))
    sy = math.sqrt(sum((b - my) ** 2 for b in y))
    return cov / (sx * sy)


def test_pearson_matches_direct_formula():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    y = 0.3 * x + rng.normal(size=50)
    assert abs(pearson_r(x, y) - direct_pearson(x.tolist(), y.tolist())) <= 1e-12


def test_pearson_errors():
    with pytest.raises(InsufficientDataError):
        pearson_r([1, 2], [3, 4])
    with pytest.raises(UndefinedCorrelationError):
        pearson_r([1, 2, 3], [5, 5, 5])


def test_full_window_is_plain_pearson():
    t = RankFrequencyTable.from_counts(multinomial_power_law_sample(5000, 200, -1.0, seed=1))
    lnr, lnf = t.log_points()
    assert windowed_pearson(t, 1.0) == pytest.approx(direct_pearson(lnr.tolist(), lnf.tolist()), abs=1e-12)


def test_window_geometry():
    # V = e^4 rounded: check membership against the ln-rank interval directly
    t = RankFrequencyTable.from_counts({f"w{i:03d}": 1000 - i for i in range(55)})
    top = math.log(55)
    for f in DEFAULT_FRACTIONS:
        mask = log_window(t, f)
        lo, hi = top / 2 - f * top / 2, top / 2 + f * top / 2
        expect = [lo - 1e-9 <= math.log(r) <= hi + 1e-9 for r in range(1, 56)]
        assert mask.tolist() == expect
    assert log_window(t, 1.0).all()


def test_window_fraction_validated():
    t = RankFrequencyTable.from_counts({"a": 3, "b": 2, "c": 1})
    with pytest.raises(ConfigError):
        log_window(t, 0.0)
    with pytest.raises(ConfigError):
        zipf_fit(t, [1.5])


def test_too_few_points_in_window():
    t = RankFrequencyTable.from_counts({"a": 5, "b": 3, "c": 2, "d": 1})
    with pytest.raises(InsufficientDataError):
        windowed_pearson(t, 0.2)


def test_noiseless_power_law():
    t = RankFrequencyTable.from_counts(power_law_counts(2000, -1.2))
    fit = zipf_fit(t)
    assert fit.exponent == pytest.approx(-1.2, abs=1e-9)
    assert sorted(fit.pearson_by_window) == list(DEFAULT_FRACTIONS)
    for r in fit.pearson_by_window.values():
        assert abs(abs(r) - 1.0) <= 1e-9


def test_exact_inverse_rank_gives_minus_one():
    t = RankFrequencyTable.from_counts(power_law_counts(500, -1.0))
    assert windowed_pearson(t, 0.5) == pytest.approx(-1.0, abs=1e-12)


def test_sampled_power_law_exponent():
    t = RankFrequencyTable.from_counts(multinomial_power_law_sample(50_000, 1000, -1.1, seed=0))
    fit = zipf_fit(t)
    assert abs(fit.exponent + 1.1) <= 0.05
    assert all(-1.0 <= r <= 1.0 for r in fit.pearson_by_window.values())


def test_nonpositive_counts_rejected():
    with pytest.raises(ValueError):
        RankFrequencyTable.from_counts({"a": 0})


# -- lengths and t-tests -------------------------------------------------------

# two-sided Welch / Student values for {ln 3, ln 3, ln 5} vs {ln 8, ln 9},
# computed with 50-digit arithmetic and the regularized incomplete beta function
LEN_WELCH = (-4.825648817237707, 2.4373451744177947, 0.026885404918507888)
LEN_STUDENT = (-3.8786125882517306, 3.0, 0.030351622767848602)
# same, for noun proportions {1/2, 1/3, 1/2} vs {0, 1/4, 1/5, 0}
POS_WELCH = (3.8563438201830087, 4.9942945680591274, 0.011950219799463439)
POS_STUDENT = (3.6629051514530598, 5.0, 0.014550693663563821)

POS_A = [pos_doc("NV", 0), pos_doc("NVV", 1), pos_doc("NNVV", 2)]
POS_B = [pos_doc("VVV", 3), pos_doc("NVVV", 4), pos_doc("NVVVV", 5), pos_doc("VV", 6)]


def check(res, expected):
    t, df, p = expected
    assert res.t == pytest.approx(t, abs=1e-6)
    assert res.df == pytest.approx(df, abs=1e-6)
    assert res.p == pytest.approx(p, abs=1e-6)


def test_length_t_test_oracle():
    a, b = docs_of_lengths([3, 3, 5]), docs_of_lengths([8, 9])
    check(length_t_test(a, b), LEN_WELCH)
    check(length_t_test(a, b, equal_var=True), LEN_STUDENT)


def test_pos_t_test_oracle():
    check(pos_t_test(POS_A, POS_B, "N"), POS_WELCH)
    check(pos_t_test(POS_A, POS_B, "N", equal_var=True), POS_STUDENT)


def test_identical_groups_p_one():
    d = docs_of_lengths([2, 3, 5, 8])
    r = length_t_test(d, d)
    assert r.t == 0.0 and r.p == 1.0
    assert pos_t_test(POS_A, POS_A, "N").p == 1.0


def test_noun_rate_difference_detected():
    a = pos_groups(500, 0.40, seed=11)
    b = pos_groups(500, 0.20, seed=12)
    assert pos_t_test(a, b, "N").p < 0.05


def test_zero_variance():
    with pytest.raises(ZeroVarianceError):
        length_t_test(docs_of_lengths([3, 3]), docs_of_lengths([4, 4]))


def test_t_test_needs_two_each():
    with pytest.raises(InsufficientDataError):
        t_test([1.0], [1.0, 2.0])
    with pytest.raises(EmptyInputError):
        length_t_test([], docs_of_lengths([1, 2]))


@given(
    st.lists(st.floats(-50, 50), min_size=2, max_size=15),
    st.lists(st.floats(-50, 50), min_size=2, max_size=15),
    st.booleans(),
)
def test_t_test_swap_and_bounds(a, b, eq):
    try:
        r = t_test(a, b, eq)
    except ZeroVarianceError:
        return
    s = t_test(b, a, eq)
    assert 0.0 <= r.p <= 1.0
    assert s.t == pytest.approx(-r.t, rel=1e-9, abs=1e-12)
    assert s.p == pytest.approx(r.p, rel=1e-9, abs=1e-300)


def test_length_summary():
    s = length_summary(docs_of_lengths([3, 3, 5, 0]))
    assert s.histogram == {0: 1, 3: 2, 5: 1}
    assert sum(s.histogram.values()) == 4
    logs = [math.log(3), math.log(3), math.log(5)]
    assert s.log_mean == pytest.approx(sum(logs) / 3, abs=1e-15)
    assert s.log_sd == pytest.approx(np.std(logs, ddof=1), abs=1e-15)
    assert s.n_empty == 1


# -- frequency tables ----------------------------------------------------------


def test_term_table():
    d = [doc("a a a b b c")]
    assert term_table(d, 0) == []
    assert term_table(d, 2) == [("a", 3), ("b", 2)]
    assert term_table([doc("autism autismawareness day day")], 5, DEFAULT_KEYWORDS) == [("day", 2)]


def test_term_table_sort_oracle():
    rng = np.random.default_rng(9)
    words = [f"t{i}" for i in range(400)]
    docs = [TokenDoc(str(i), tuple(rng.choice(words, size=8, p=None))) for i in range(600)]
    c = Counter(t for d in docs for t in d.tokens)
    expected = sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[:100]
    assert term_table(docs, 100) == expected


def test_hashtag_table():
    only_kw = [TweetRecord(id=str(i), text="x", hashtags=("autism",)) for i in range(3)]
    assert hashtag_table(only_kw, 10, DEFAULT_KEYWORDS) == []
    assert hashtag_table([TweetRecord(id="1", text="x")], 10) == []
    rng = np.random.default_rng(1)
    tags = ["aba", "vaccines", "autismspeaks", "health", "adhdlife"]
    recs = [TweetRecord(id=str(i), text="x", hashtags=tuple(rng.choice(tags, size=2))) for i in range(200)]
    c = Counter(h for r in recs for h in r.hashtags if not h.startswith(("autism", "adhd")))
    assert hashtag_table(recs, 10, DEFAULT_KEYWORDS) == sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))


# -- discriminativeness --------------------------------------------------------

TOPIC = [TokenDoc("t", ("x",) * 9 + ("y",))]
CONTROL = [TokenDoc("c", ("x",) + ("y",) * 9)]


def test_discriminativeness_hand_value():
    assert discriminativeness(TOPIC, CONTROL, "x") == pytest.approx(math.log(5), abs=1e-15)
    assert discriminativeness(CONTROL, TOPIC, "x") == pytest.approx(math.log(5), abs=1e-15)


def test_discriminativeness_zero_when_equal():
    d = [doc("a b b")]
    assert discriminativeness(d, d, "b") == 0.0


def test_discriminativeness_unknown_term():
    with pytest.raises(VocabularyError):
        discriminativeness(TOPIC, CONTROL, "zzz")


def test_discriminativeness_table_order():
    rows = discriminativeness_table([doc("a a a b c")], [doc("b c c")])
    scores = [r[2] for r in rows]
    assert scores == sorted(scores, reverse=True)
    assert all(s >= 0 for s in scores)


@given(st.dictionaries(st.sampled_from("abcde"), st.integers(0, 20)), st.dictionaries(st.sampled_from("abcde"), st.integers(0, 20)))
def test_discriminativeness_nonnegative_symmetric(a, b):
    tc = TermContrast(Counter(a), Counter(b))
    rev = TermContrast(Counter(b), Counter(a))
    for t in tc.vocabulary:
        assert tc.score(t) >= 0
        assert tc.score(t) == pytest.approx(rev.score(t), abs=1e-12)


# -- part of speech ------------------------------------------------------------


def test_pos_proportion_simple():
    assert pos_proportions([PosAnnotatedDoc("1", (("dog", "N"), ("runs", "V")))], "N") == [0.5]


def test_pos_tagset_enforced():
    with pytest.raises(SchemaError):
        PosAnnotatedDoc("1", (("dog", "NOUN"),))
    other = PosAnnotatedDoc("2", (("dog", "NN"),), tagset=frozenset({"NN", "VB"}))
    with pytest.raises(SchemaError):
        pos_t_test(POS_A, [other, other], "N")
    with pytest.raises(SchemaError):
        pos_proportions(POS_A, "NN")


def test_pos_empty_doc():
    with pytest.raises(EmptyInputError):
        pos_proportions([PosAnnotatedDoc("1", ())], "N")


def test_read_pos_annotations():
    lines = ["1\tdog\tN\n", "1\truns\tV\n", "\n", "2\tgo\tV\n", "3\tcat\tN\n"]
    docs = read_pos_annotations(lines)
    assert [d.tweet_id for d in docs] == ["1", "2", "3"]
    assert docs[0].tagged == (("dog", "N"), ("runs", "V"))
    with pytest.raises(SchemaError):
        read_pos_annotations(["1\tdog\n"])


def test_pos_by_length_bins():
    docs = [pos_doc("NV", 0), pos_doc("VV", 1), pos_doc("NNV", 2)]
    bins = pos_by_length(docs, "N")
    assert [(b.length, b.n) for b in bins] == [(2, 2), (3, 1)]
    assert bins[0].mean == 0.25
    assert bins[0].sd == pytest.approx(math.sqrt(0.125), abs=1e-15)
    assert bins[0].se == pytest.approx(bins[0].sd / math.sqrt(2), abs=1e-15)
    assert bins[1].sd == 0.0


def test_welch_df_with_tiny_variance():
    r = t_test([0.0, 0.0], [0.0, 3.6e-127])
    assert r.df == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= r.p <= 1.0
