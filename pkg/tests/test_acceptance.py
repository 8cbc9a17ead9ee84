"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; the lines are repeated in
the pytest terminal summary. Run alone with::

    pytest tests/test_acceptance.py -v
"""

import itertools
import json
import math
import time
from contextlib import contextmanager

import numpy as np
from scipy import optimize

from tweetmine.cli import main
from tweetmine.corpstats import (
    PosAnnotatedDoc,
    RankFrequencyTable,
    length_t_test,
    pos_t_test,
    windowed_pearson,
    zipf_fit,
)
from tweetmine.experiments import (
    ConfoundParams,
    ExperimentConfig,
    apparent_specificity,
    run_basic_classification,
    run_condition_experiment,
    run_loko,
    simulate_apparent_specificity,
)
from tweetmine.features import CONTROL, TOPIC, Scheme, SparseVector, Vocabulary, featurize_corpus
from tweetmine.ingest import matched_keywords, split_corpus, write_records
from tweetmine.models import logistic_gradient, logistic_objective, posterior_topic, train_lasso, train_logreg, train_nb
from tweetmine.synth import multinomial_power_law_sample, pos_groups, power_law_counts, two_topic_corpus
from tweetmine.textprep import TokenDoc, preprocess, preprocess_all

RESULTS: list[str] = []


@contextmanager
def criterion(n, title):
    info = {"detail": ""}
    try:
        yield info
    except BaseException as e:
        line = f"FAIL criterion {n:>2}: {title} ({type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''})"
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS criterion {n:>2}: {title}" + (f" ({info['detail']})" if info["detail"] else "")
    RESULTS.append(line)
    print(line)


# 1 ---------------------------------------------------------------------------

TWEET_2 = (
    'Authors who see autism as "tremendously burdening" elicit dire views of autism '
    'from parents http://j.mp/1FyqXwF  "Ethical approval: none"'
)
TWEET_3 = (
    "101 autism: Genetic analysis of individuals with autism finds gene deletions - "
    "Using powerful genetic sequencing. http://is.gd/UhprQK"
)
TWEET_4 = (
    "#Apple #Censorship &amp; Dr. Brian Hooker Interview exposing CDC Cover-up of the Vaccine "
    "&amp; Autism Link on .@rediceradio  http://youtu.be/19uvPtg6SPI"
)


def test_c01_preprocessing_golden():
    with criterion(1, "preprocessing golden tweets") as info:
        t0 = time.perf_counter()
        out2 = " ".join(preprocess(TWEET_2).tokens)
        out4 = " ".join(preprocess(TWEET_4).tokens)
        out3 = preprocess(TWEET_3).tokens
        elapsed = time.perf_counter() - t0
        assert out2.startswith("author see autism tremend burden")
        assert out2 == "author see autism tremend burden elicit dire view autism parent url ethic approv none"
        assert out4.startswith("appl censorship dr brian hooker")
        assert out4 == "appl censorship dr brian hooker interview expos cdc cover vaccin autism link atus url"
        for s in ("genet", "analysi", "individu", "delet", "sequenc"):
            assert s in out3, s
        assert elapsed < 1.0
        info["detail"] = f"{elapsed * 1000:.1f} ms"


# 2 ---------------------------------------------------------------------------


def test_c02_zipf_recovery():
    with criterion(2, "Zipf exponent and windowed r") as info:
        t0 = time.perf_counter()
        fit = zipf_fit(RankFrequencyTable.from_counts(multinomial_power_law_sample(50_000, 1000, -1.1, seed=0)))
        assert abs(fit.exponent + 1.1) <= 0.05, fit.exponent
        assert abs(fit.pearson_by_window[0.6]) >= 0.98
        clean = zipf_fit(RankFrequencyTable.from_counts(power_law_counts(1000, -1.1)))
        for f in (0.2, 0.4, 0.6, 0.8, 1.0):
            assert abs(abs(clean.pearson_by_window[f]) - 1.0) <= 1e-9
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0
        info["detail"] = f"exponent {fit.exponent:.4f}, r {fit.pearson_by_window[0.6]:.5f}, {elapsed:.2f} s"


# 3 ---------------------------------------------------------------------------


def _direct_r(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return cov / math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))


def test_c03_windowed_pearson_direct():
    with criterion(3, "windowed Pearson equals direct covariance formula") as info:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(100):
            v = int(rng.integers(20, 400))
            counts = {f"w{i:04d}": float(c) for i, c in enumerate(rng.pareto(1.2, v) * 100 + 1)}
            table = RankFrequencyTable.from_counts(counts)
            frac = float(rng.choice([0.2, 0.4, 0.6, 0.8, 1.0]))
            # independent window: centred interval in ln-rank space
            top = math.log(len(table))
            lo, hi = top / 2 * (1 - frac), top / 2 * (1 + frac)
            freqs = sorted(counts.values(), reverse=True)
            pts = [(math.log(r), math.log(f)) for r, f in enumerate(freqs, 1) if lo - 1e-12 <= math.log(r) <= hi + 1e-12]
            if len(pts) < 3:
                continue
            expected = _direct_r([p[0] for p in pts], [p[1] for p in pts])
            worst = max(worst, abs(windowed_pearson(table, frac) - expected))
        assert worst <= 1e-12
        info["detail"] = f"max diff {worst:.1e}"


# 4 ---------------------------------------------------------------------------


def test_c04_nb_enumeration():
    with criterion(4, "NB posterior equals brute-force Bayes over 2^10 vectors") as info:
        rng = np.random.default_rng(4)
        vocab = Vocabulary(tuple(f"v{j}" for j in range(10)))
        docs = [TokenDoc(str(i), tuple(rng.choice(vocab.terms, size=rng.integers(1, 6), replace=False))) for i in range(200)]
        labels = [TOPIC if rng.random() < 0.4 else CONTROL for _ in docs]
        ds = featurize_corpus(docs, labels, vocab, "binary")
        worst = 0.0
        for event in ("multinomial", "bernoulli"):
            m = train_nb(ds, event_model=event)
            prior = np.exp(m.log_prior)
            p = np.exp(m.log_likelihood)
            for bits in itertools.product((0, 1), repeat=10):
                joint = []
                for c in (0, 1):
                    v = prior[c]
                    for j, b in enumerate(bits):
                        if event == "multinomial":
                            v *= p[c, j] if b else 1.0
                        else:
                            v *= p[c, j] if b else 1.0 - p[c, j]
                    joint.append(v)
                x = SparseVector(Scheme.BINARY, tuple(j for j in range(10) if bits[j]), (1.0,) * sum(bits), 10)
                worst = max(worst, abs(posterior_topic(m, x) - joint[1] / sum(joint)))
        assert worst <= 1e-12
        info["detail"] = f"max diff {worst:.1e}"


# 5 ---------------------------------------------------------------------------


def _dataset(seed, n=300, d=40):
    rng = np.random.default_rng(seed)
    vocab = Vocabulary(tuple(f"f{j:02d}" for j in range(d)))
    beta = rng.normal(size=d)
    docs, labels = [], []
    for i in range(n):
        toks = tuple(rng.choice(vocab.terms, size=rng.integers(0, 8)))
        s = sum(beta[vocab.index[t]] for t in toks)
        docs.append(TokenDoc(str(i), toks))
        labels.append(TOPIC if rng.random() < 1 / (1 + math.exp(-s)) else CONTROL)
    return featurize_corpus(docs, labels, vocab, "count")


def test_c05_logistic_numerics():
    with criterion(5, "logistic gradient and independent optimizer agreement") as info:
        ds = _dataset(5)
        d = len(ds.vocab)
        rng = np.random.default_rng(50)
        h = 1e-5
        worst = 0.0
        for _ in range(10):
            w, b = rng.normal(scale=0.5, size=d), float(rng.normal())
            g, gb = logistic_gradient(ds, w, b)
            num = []
            for j in range(d + 1):
                e = np.zeros(d + 1)
                e[j] = h
                up = logistic_objective(ds, w + e[:d], b + e[d])
                dn = logistic_objective(ds, w - e[:d], b - e[d])
                num.append((up - dn) / (2 * h))
            num = np.array(num)
            worst = max(worst, np.linalg.norm(np.append(g, gb) - num) / np.linalg.norm(num))
        assert worst <= 1e-6
        m = train_logreg(ds)

        def f(th):
            return logistic_objective(ds, th[:d], th[d])

        def jac(th):
            gw, gbb = logistic_gradient(ds, th[:d], th[d])
            return np.append(gw, gbb)

        res = optimize.minimize(f, rng.normal(size=d + 1), jac=jac, method="L-BFGS-B",
                                options={"gtol": 1e-12, "ftol": 1e-16, "maxiter": 20_000})
        gap = abs(res.fun - m.diagnostics.final_objective)
        assert gap <= 1e-6
        info["detail"] = f"max rel err {worst:.1e}, objective gap {gap:.1e}"


# 6 ---------------------------------------------------------------------------


def test_c06_lasso_sparsity():
    with criterion(6, "LASSO nnz monotone, zero at 1e6, KKT <= 1e-8") as info:
        ds = _dataset(6, n=500, d=60)
        nnz, worst = [], 0.0
        for lam in (1e-5, 1e-4, 1e-3, 1e-2):
            m = train_lasso(ds, lam)
            nnz.append(m.nnz)
            # independent KKT check from the plain gradient
            g, gb = logistic_gradient(ds, m.weights, m.bias, C=m.C)
            g = g - 2 * m.weights
            viol = np.where(m.weights != 0, np.abs(g + lam * np.sign(m.weights)), np.maximum(np.abs(g) - lam, 0))
            worst = max(worst, float(viol.max()), abs(gb))
        assert all(a >= b for a, b in zip(nnz, nnz[1:])), nnz
        assert train_lasso(ds, 1e6).nnz == 0
        assert worst <= 1e-8
        info["detail"] = f"nnz {nnz}, worst KKT {worst:.1e}"


# 7 ---------------------------------------------------------------------------


def test_c07_end_to_end():
    with criterion(7, "end-to-end classification on 10k synthetic tweets") as info:
        t0 = time.perf_counter()
        sc = two_topic_corpus(5000, 5000, seed=1)
        topic, control = split_corpus(sc.records, sc.keywords, "synthetic")
        res = run_basic_classification(preprocess_all(topic.records), preprocess_all(control.records), ExperimentConfig(seed=0))
        elapsed = time.perf_counter() - t0
        lowest = 1.0
        for cm in res.grid.values():
            for row in cm.rates:
                assert abs(sum(row) - 1.0) <= 1e-9
            lowest = min(lowest, cm.control_accuracy, cm.topic_accuracy)
        assert {c for c, _ in res.grid} == {"nb", "logreg"}
        assert lowest >= 0.95
        assert elapsed < 60
        info["detail"] = f"min per-class accuracy {lowest:.4f}, {elapsed:.1f} s"


# 8 ---------------------------------------------------------------------------


def test_c08_condition_vs_condition(conditions):
    with criterion(8, "condition vs condition per-class accuracy >= 0.97") as info:
        a, b, ka, kb = conditions
        res = run_condition_experiment(a, b, ExperimentConfig(keywords=ka), other_keywords=kb)
        lowest = min(min(cm.control_accuracy, cm.topic_accuracy) for cm in res.grid.values())
        assert lowest >= 0.97
        info["detail"] = f"min per-class accuracy {lowest:.4f}"


# 9 ---------------------------------------------------------------------------


def test_c09_confound():
    with criterion(9, "apparent specificity 0.82 and Monte-Carlo agreement") as info:
        p = ConfoundParams(0.9, 0.9, 0.1)
        value = apparent_specificity(p)
        assert value == 0.82
        sim = simulate_apparent_specificity(p, 1_000_000, seed=0)
        assert abs(sim - 0.82) <= 1e-3
        info["detail"] = f"exact {value!r}, simulated {sim:.5f}"


# 10 --------------------------------------------------------------------------


def test_c10_loko_direction(polysemous):
    with criterion(10, "LOKO: polysemous keyword has the strict minimum held-out accuracy") as info:
        d = polysemous
        rep = run_loko(d["topic_docs"], d["matches"], d["control_docs"], ExperimentConfig(seed=0))
        held = {r.keyword: r.acc_heldout_keyword for r in rep.rows}
        others = [v for k, v in held.items() if k != "adhd"]
        assert held["adhd"] < min(others), held
        base = rep.baseline
        drift = max(
            max(abs(r.acc_control_test - base.acc_control_test), abs(r.acc_topic_test - base.acc_topic_test))
            for r in rep.rows
        )
        assert drift <= 0.05
        info["detail"] = f"adhd {held['adhd']:.4f} vs next {min(others):.4f}, max test drift {drift:.4f}"


# 11 --------------------------------------------------------------------------

# 50-digit reference values: {ln 3, ln 3, ln 5} vs {ln 8, ln 9} and noun shares
# {1/2, 1/3, 1/2} vs {0, 1/4, 1/5, 0}; (t, df, two-sided p)
LEN_WELCH = (-4.825648817237707, 2.4373451744177947, 0.026885404918507888)
LEN_STUDENT = (-3.8786125882517306, 3.0, 0.030351622767848602)
POS_WELCH = (3.8563438201830087, 4.9942945680591274, 0.011950219799463439)
POS_STUDENT = (3.6629051514530598, 5.0, 0.014550693663563821)


def _pos(tags, i):
    return PosAnnotatedDoc(str(i), tuple((f"t{j}", t) for j, t in enumerate(tags)))


def _lengths(ns):
    return [TokenDoc(str(i), ("w",) * n) for i, n in enumerate(ns)]


def test_c11_statistics():
    with criterion(11, "t-tests match oracle; identical p = 1; noun-rate shift detected") as info:
        pa = [_pos("NV", 0), _pos("NVV", 1), _pos("NNVV", 2)]
        pb = [_pos("VVV", 3), _pos("NVVV", 4), _pos("NVVVV", 5), _pos("VV", 6)]
        la, lb = _lengths([3, 3, 5]), _lengths([8, 9])
        for res, ref in (
            (length_t_test(la, lb), LEN_WELCH),
            (length_t_test(la, lb, equal_var=True), LEN_STUDENT),
            (pos_t_test(pa, pb, "N"), POS_WELCH),
            (pos_t_test(pa, pb, "N", equal_var=True), POS_STUDENT),
        ):
            for got, want in zip((res.t, res.df, res.p), ref):
                assert abs(got - want) <= 1e-6
        same = _lengths([2, 3, 5, 8])
        assert length_t_test(same, same).p == 1.0
        assert pos_t_test(pa, pa, "N").p == 1.0
        shift = pos_t_test(pos_groups(500, 0.40, seed=11), pos_groups(500, 0.20, seed=12), "N")
        assert shift.p < 0.05
        info["detail"] = f"noun-rate p {shift.p:.1e}"


# 12 --------------------------------------------------------------------------


def test_c12_determinism(tmp_path):
    with criterion(12, "manifest replay gives byte-identical CSVs") as info:
        sc = two_topic_corpus(400, 400, seed=12)
        write_records(tmp_path / "stream.ndjson", sc.records)
        assert main(["ingest", "--in", str(tmp_path / "stream.ndjson"), "--out", str(tmp_path / "corpus")]) == 0
        assert main(["prep", "--in", str(tmp_path / "corpus"), "--out", str(tmp_path / "tok")]) == 0
        tok, corpus = str(tmp_path / "tok"), str(tmp_path / "corpus")
        runs = {
            "classify": ["classify", "--in", tok, "--seed", "7"],
            "lasso": ["lasso-sweep", "--in", tok, "--lambdas", "1e-4,1e-3,1e-2"],
            "loko": ["loko", "--corpus", corpus, "--in", tok, "--seed", "3"],
            "zipf": ["zipf", "--in", tok],
            "lengths": ["lengths", "--in", tok],
        }
        compared = 0
        for name, argv in runs.items():
            first, replay = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
            assert main(argv + ["--out", str(first)]) == 0
            assert main(["report", "--manifest", str(first / "manifest.json"), "--out", str(replay)]) == 0
            outputs = json.loads((first / "manifest.json").read_text())["outputs"]
            assert outputs
            for fname in outputs + ["manifest.json"]:
                assert (first / fname).read_bytes() == (replay / fname).read_bytes(), fname
                compared += 1
        info["detail"] = f"{compared} files compared"
