import pytest
from hypothesis import given, strategies as st

from clusterfeat.cluster import ClusterLexicon
from clusterfeat.features import (
    SentenceFeatureConfig, SentimentLexicon, annotation_features, capitalization_features,
    char_ngram_features, cluster_membership_features, combine, is_cluster_feature,
    lexicon_features, load_sentiment_lexicon, ngram_features, parse_feature_name,
    sentence_features,
)

LEX = SentimentLexicon("L", {"good": 1.0, "bad": -2.0, "meh": 0.0})
MODEL = ClusterLexicon(500, {"great": 17, "awesome": 17, "awful": 3})


class TestNgrams:
    def test_examples(self):
        assert ngram_features(["a", "b"], (1, 2)) == {"ng1:a": 1, "ng1:b": 1, "ng2:a_b": 1}
        assert ngram_features([], (1, 3)) == {}
        assert ngram_features(["a", "a"], (1, 1)) == {"ng1:a": 2}

    def test_bad_range(self):
        with pytest.raises(ValueError):
            ngram_features(["a"], (2, 1))
        with pytest.raises(ValueError):
            char_ngram_features("a", (0, 1))

    def test_char_examples(self):
        assert char_ngram_features("ab", (2, 2)) == {"cg2:ab": 1}
        assert char_ngram_features("aaa", (2, 2)) == {"cg2:aa": 2}
        assert char_ngram_features("", (3, 5)) == {}

    @given(st.lists(st.sampled_from("abc"), max_size=12), st.integers(1, 3))
    def test_ngram_total(self, tokens, n):
        feats = ngram_features(tokens, (n, n))
        assert sum(feats.values()) == max(0, len(tokens) - n + 1)


class TestLexicon:
    def test_no_hits(self):
        assert lexicon_features(["x", "y"], LEX) == {}

    def test_single_positive(self):
        assert lexicon_features(["good"], LEX) == {
            "lex:L:pos_count": 1, "lex:L:sum": 1, "lex:L:max": 1, "lex:L:last": 1}

    def test_mixed(self):
        f = lexicon_features(["good", "x", "bad"], LEX)
        assert f == {"lex:L:pos_count": 1, "lex:L:neg_count": 1, "lex:L:sum": -1,
                     "lex:L:max": 1, "lex:L:last": -2}

    def test_zero_score_counts_as_hit_but_stores_nothing(self):
        assert lexicon_features(["meh"], LEX) == {}

    def test_load(self, tmp_path):
        p = tmp_path / "bingliu.tsv"
        p.write_text("# comment\nnice\t1\nugly\t-1\n")
        lex = load_sentiment_lexicon(p)
        assert lex.name == "bingliu" and lex.polarity == {"nice": 1.0, "ugly": -1.0}
        p.write_text("nice\tx\n")
        with pytest.raises(ValueError, match=":1:"):
            load_sentiment_lexicon(p)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            SentimentLexicon("L", {"a": float("inf")})


class TestClusterFeatures:
    def test_all_oov(self):
        assert cluster_membership_features(["x", "y", "x"], MODEL) == {"clus500:oov": 3}

    def test_single_member(self):
        assert cluster_membership_features(["great"], MODEL) == {"clus500:17": 1}

    def test_per_token_window(self):
        rows = cluster_membership_features(["great", "awful", "awesome"], MODEL, "per_token", 1)
        assert rows[1] == ["clus500[-1]:17", "clus500[+0]:3", "clus500[+1]:17"]
        assert rows[0][0] == "clus500[-1]:<s>" and rows[2][-1] == "clus500[+1]:</s>"
        assert all(len(r) == 3 for r in rows)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            cluster_membership_features(["a"], MODEL, "nope")

    @given(st.lists(st.sampled_from(["great", "awful", "zzz", "awesome", "q"]), max_size=20))
    def test_bag_sums_to_length(self, tokens):
        assert sum(cluster_membership_features(tokens, MODEL).values()) == len(tokens)

    @given(st.lists(st.sampled_from(["great", "awful", "zzz"]), max_size=10))
    def test_deterministic(self, tokens):
        a = cluster_membership_features(tokens, MODEL)
        b = cluster_membership_features(list(tokens), MODEL)
        assert list(a.items()) == list(b.items())


class TestCapitalization:
    def test_examples(self):
        club, tonite, ninety, dots = capitalization_features(["CLUB", "tonite", "90", "..."])
        assert set(club) == {"cap:all_caps", "cap:initial"}
        assert tonite == []
        assert ninety == ["cap:digit"]
        assert dots == ["cap:punct"]

    def test_annotations(self):
        rows = annotation_features(["NN", None], [("person",), ()], 2)
        assert rows == [["pos:NN", "gaz:person"], []]
        assert annotation_features(None, None, 3) == [[], [], []]


class TestCombine:
    def test_identity_and_sum(self):
        v = {"ng1:a": 2.0}
        assert combine([v, {}]) == v
        assert combine([{"a:x": 1}, {"a:x": 2}]) == {"a:x": 3}

    @given(st.lists(st.dictionaries(st.sampled_from(["a:x", "b:y", "c:z"]),
                                    st.integers(-3, 3).map(float), max_size=3), max_size=4))
    def test_order_independent_and_sparse(self, vecs):
        a, b = combine(vecs), combine(reversed(vecs))
        assert a == b
        assert all(v != 0 for v in a.values())


class TestNames:
    @pytest.mark.parametrize("name, expected", [
        ("ng2:not_good", ("ng2", None, "not_good")),
        ("clus500:17", ("clus500", 500, "17")),
        ("clus500[-1]:oov", ("clus500[-1]", 500, "oov")),
        ("lex:L:sum", ("lex", None, "L:sum")),
        ("ng1::", ("ng1", None, ":")),
    ])
    def test_parse(self, name, expected):
        assert parse_feature_name(name) == expected

    def test_unparseable(self):
        with pytest.raises(ValueError):
            parse_feature_name("plain")

    @given(st.lists(st.text(alphabet="ab:_#<", min_size=1, max_size=4), max_size=6))
    def test_every_emitted_name_parses(self, tokens):
        feats = sentence_features(tokens, SentenceFeatureConfig(), [LEX], [MODEL])
        for name, value in feats.items():
            family, k, _ = parse_feature_name(name)
            assert (k == 500) == is_cluster_feature(name)
            assert value != 0

    def test_toggle_only_removes_cluster_family(self):
        tokens = ["great", "movie", "good"]
        on = sentence_features(tokens, SentenceFeatureConfig(), [LEX], [MODEL])
        off = sentence_features(tokens, SentenceFeatureConfig(clusters=False), [LEX], [MODEL])
        assert {n: v for n, v in on.items() if not is_cluster_feature(n)} == off

    def test_binary(self):
        feats = sentence_features(["a", "a"], SentenceFeatureConfig(char_ngrams=False, binary=True))
        assert feats["ng1:a"] == 1.0
