"""Naive Bayes, L2 logistic regression and L1 (LASSO) logistic regression."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import linalg

from . import _cd
from .errors import ConfigError, ConvergenceError, DegenerateTrainingError, SchemaError
from .features import CONTROL, TOPIC, LabeledDataset, SparseVector, Vocabulary

DEFAULT_LAMBDAS = (1e-5, 1e-4, 1e-3, 1e-2)
# the literal reading of "10e-5 ... 10e-2"
LITERAL_LAMBDAS = (1e-4, 1e-3, 1e-2, 1e-1)
DEFAULT_TOL = 1e-8
MAX_PASSES = 100_000
DENSE_NEWTON_LIMIT = 4000


def _check_classes(ds: LabeledDataset) -> None:
    present = set(ds.labels)
    if present != {TOPIC, CONTROL}:
        raise DegenerateTrainingError(f"training data needs both classes, found {sorted(present)}")


# -- naive Bayes -------------------------------------------------------------


@dataclass(frozen=True)
class NBModel:
    """Per-class log priors and per-term log likelihoods.

    Row 0 is the control class (-1), row 1 the topic class (+1). For the
    Bernoulli event model ``log_absent`` holds ln(1 - p) for each term.
    """

    log_prior: np.ndarray
    log_likelihood: np.ndarray
    alpha: float
    vocab: Vocabulary
    event_model: str = "multinomial"
    log_absent: Optional[np.ndarray] = field(default=None, repr=False)

    kind = "naive_bayes"

    def decision(self, x: SparseVector) -> float:
        """Log posterior odds of topic over control."""
        score = float(self.log_prior[1] - self.log_prior[0])
        idx = np.array(x.indices, dtype=np.int64)
        if self.event_model == "multinomial":
            diff = self.log_likelihood[1, idx] - self.log_likelihood[0, idx]
            return score + float(np.dot(np.array(x.values), diff))
        absent = self.log_absent[1] - self.log_absent[0]
        score += float(absent.sum())
        score += float((self.log_likelihood[1, idx] - self.log_likelihood[0, idx] - absent[idx]).sum())
        return score

    def decision_matrix(self, X) -> np.ndarray:
        prior = self.log_prior[1] - self.log_prior[0]
        if self.event_model == "multinomial":
            return prior + X @ (self.log_likelihood[1] - self.log_likelihood[0])
        B = X.copy()
        B.data[:] = 1.0
        absent = self.log_absent[1] - self.log_absent[0]
        present = self.log_likelihood[1] - self.log_likelihood[0]
        return prior + absent.sum() + B @ (present - absent)


def train_nb(ds: LabeledDataset, alpha: float = 1.0, event_model: str = "multinomial") -> NBModel:
    """Fit class priors and additively smoothed term probabilities.

    The multinomial model sums feature values per class (term counts under
    the count scheme, presence counts under the binary scheme). The Bernoulli
    model counts documents containing each term.
    """
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    if event_model not in ("multinomial", "bernoulli"):
        raise ConfigError(f"unknown event model {event_model!r}")
    _check_classes(ds)
    X = ds.matrix()
    y = np.array(ds.labels)
    n_d = len(ds.vocab)
    log_prior = np.empty(2)
    ll = np.empty((2, n_d))
    absent = np.empty((2, n_d)) if event_model == "bernoulli" else None
    for row, cls in enumerate((CONTROL, TOPIC)):
        mask = y == cls
        n_c = int(mask.sum())
        log_prior[row] = math.log(n_c / len(y))
        Xc = X[mask]
        if event_model == "multinomial":
            totals = np.asarray(Xc.sum(axis=0)).ravel()
            ll[row] = np.log(totals + alpha) - math.log(totals.sum() + alpha * n_d)
        else:
            present = np.bincount(Xc.indices, minlength=n_d).astype(float)
            p = (present + alpha) / (n_c + 2.0 * alpha)
            ll[row] = np.log(p)
            absent[row] = np.log1p(-p)
    return NBModel(log_prior, ll, alpha, ds.vocab, event_model, absent)


# -- linear models -----------------------------------------------------------


@dataclass(frozen=True)
class Diagnostics:
    final_objective: float
    iterations: int
    violation: float
    converged: bool = True


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    reg: str
    C: float
    lam: Optional[float]
    vocab: Vocabulary
    diagnostics: Diagnostics
    fit_bias: bool = True

    @property
    def kind(self) -> str:
        return "logreg" if self.reg == "l2" else "lasso"

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.weights))

    def decision(self, x: SparseVector) -> float:
        return float(np.dot(self.weights[list(x.indices)], x.values)) + self.bias

    def decision_matrix(self, X) -> np.ndarray:
        return X @ self.weights + self.bias


Model = Union[NBModel, LinearModel]


def logistic_objective(ds: LabeledDataset, w: np.ndarray, b: float = 0.0, C: float = 1.0) -> float:
    """C * sum log(1 + exp(-y (w.x + b))) + w.w."""
    z = ds.matrix() @ w + b
    return C * float(np.logaddexp(0.0, -ds.y * z).sum()) + float(w @ w)


def logistic_gradient(ds: LabeledDataset, w: np.ndarray, b: float = 0.0, C: float = 1.0) -> tuple[np.ndarray, float]:
    X = ds.matrix()
    y = ds.y
    z = X @ w + b
    # d/dz log(1+exp(-yz)) = -y / (1 + exp(yz))
    r = -C * y * np.exp(-np.logaddexp(0.0, y * z))
    return X.T @ r + 2.0 * w, float(r.sum())


def _prepare(ds: LabeledDataset):
    _check_classes(ds)
    csc = ds.matrix().tocsc()
    csc.sort_indices()
    return csc, ds.y


def _newton_l2(X, y, w, b, C, fit_bias, tol, max_iter):
    """Damped Newton on the L2 objective; the bias is the last coordinate."""
    n, d = X.shape
    ones = np.ones((n, 1))
    A = sp.hstack([X, sp.csr_matrix(ones)]).tocsr() if fit_bias else X
    theta = np.append(w, b) if fit_bias else w.copy()
    reg = np.full(A.shape[1], 2.0)
    if fit_bias:
        reg[-1] = 0.0

    def objective(th):
        z = A @ th
        return C * float(np.logaddexp(0.0, -y * z).sum()) + float(th[:d] @ th[:d])

    obj = objective(theta)
    it = 0
    viol = math.inf
    while it < max_iter:
        z = A @ theta
        tau = np.exp(-np.logaddexp(0.0, y * z))
        g = A.T @ (-C * y * tau) + reg * theta
        viol = float(np.abs(g).max())
        if viol <= tol:
            break
        dvec = C * tau * (1.0 - tau)
        if A.shape[1] <= DENSE_NEWTON_LIMIT:
            H = (A.T @ sp.diags(dvec) @ A).toarray()
            H[np.diag_indices_from(H)] += reg + 1e-12
            step = -linalg.solve(H, g, assume_a="pos")
        else:
            hv = lambda v: A.T @ (dvec * (A @ v)) + (reg + 1e-12) * v
            op = spla.LinearOperator((A.shape[1],) * 2, matvec=hv)
            diag_h = A.T.power(2) @ dvec + reg + 1e-12
            precond = spla.LinearOperator((A.shape[1],) * 2, matvec=lambda v: v / diag_h)
            step, _ = spla.cg(op, -g, rtol=min(0.1, math.sqrt(viol) * 1e-3), M=precond, maxiter=10 * A.shape[1])
        slope = float(g @ step)
        if -slope <= 64 * np.finfo(float).eps * max(1.0, abs(obj)):
            # predicted decrease is below rounding in the objective, so Armijo
            # cannot judge the step; keep the full Newton step if it shrinks the gradient
            cand = theta + step
            tau_c = np.exp(-np.logaddexp(0.0, y * (A @ cand)))
            if float(np.abs(A.T @ (-C * y * tau_c) + reg * cand).max()) >= viol:
                break
            theta, obj = cand, objective(cand)
            it += 1
            continue
        t = 1.0
        new_obj = objective(theta + step)
        while new_obj > obj + 1e-4 * t * slope and t > 1e-12:
            t *= 0.5
            new_obj = objective(theta + t * step)
        if new_obj > obj:
            # numerically at the floor; no descent left
            break
        theta = theta + t * step
        obj = new_obj
        it += 1
    if fit_bias:
        return theta[:d], float(theta[d]), obj, it, viol
    return theta, 0.0, obj, it, viol


def train_logreg(
    ds: LabeledDataset,
    C: float = 1.0,
    tol: float = DEFAULT_TOL,
    fit_bias: bool = True,
    solver: str = "newton",
    max_passes: int = MAX_PASSES,
    w0: Optional[np.ndarray] = None,
    b0: float = 0.0,
) -> LinearModel:
    """Minimise the L2-penalised logistic loss.

    ``solver="cd"`` runs coordinate descent (one Newton step per coordinate);
    ``solver="newton"`` runs damped Newton on all coordinates at once and is
    far quicker on nearly separable data. Both stop when the largest absolute
    gradient entry, bias included, is at most ``tol``, and raise
    :class:`ConvergenceError` when the pass/iteration cap is reached first.
    """
    if C <= 0:
        raise ConfigError("C must be positive")
    if solver not in ("cd", "newton"):
        raise ConfigError(f"unknown solver {solver!r}")
    csc, y = _prepare(ds)
    w = np.zeros(len(ds.vocab)) if w0 is None else np.array(w0, dtype=float)
    b = float(b0) if fit_bias else 0.0
    if solver == "newton":
        w, b, obj, passes, viol = _newton_l2(csc.tocsr(), y, w, b, C, fit_bias, tol, min(max_passes, 500))
        obj, g, gb = _cd.l2_gradient(csc, y, w, b, C, fit_bias)
        viol = max(float(np.abs(g).max(initial=0.0)), abs(gb))
    else:
        obj, viol = math.inf, math.inf
        passes = 0
        while passes < max_passes:
            z = _cd.margins(csc.indptr, csc.indices, csc.data, y, w, b, fit_bias)
            b = _cd.l2_pass(csc.indptr, csc.indices, csc.data, y, z, w, b, C, fit_bias)
            passes += 1
            obj, g, gb = _cd.l2_gradient(csc, y, w, b, C, fit_bias)
            viol = max(float(np.abs(g).max(initial=0.0)), abs(gb))
            if viol <= tol:
                break
    diag = Diagnostics(obj, passes, viol, viol <= tol)
    if not diag.converged:
        raise ConvergenceError("logistic regression did not converge", diag)
    return LinearModel(w, b, "l2", C, None, ds.vocab, diag, fit_bias)


def train_lasso(
    ds: LabeledDataset,
    lam: float,
    C: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    fit_bias: bool = True,
    max_passes: int = MAX_PASSES,
    w0: Optional[np.ndarray] = None,
    b0: float = 0.0,
) -> LinearModel:
    """Minimise ``C * sum logloss + lam * |w|_1`` by coordinate descent with soft thresholding.

    ``C`` defaults to ``1 / n`` (mean loss), which puts ``lam`` on the scale
    of a per-example gradient so the default grid spans dense to sparse.
    """
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    csc, y = _prepare(ds)
    if C is None:
        C = 1.0 / len(ds)
    if C <= 0:
        raise ConfigError("C must be positive")
    w = np.zeros(len(ds.vocab)) if w0 is None else np.array(w0, dtype=float)
    b = float(b0) if fit_bias else 0.0
    obj, viol = math.inf, math.inf
    passes = 0
    while passes < max_passes:
        z = _cd.margins(csc.indptr, csc.indices, csc.data, y, w, b, fit_bias)
        b = _cd.l1_pass(csc.indptr, csc.indices, csc.data, y, z, w, b, C, lam, fit_bias)
        passes += 1
        obj, viol = _cd.l1_kkt(csc, y, w, b, C, lam, fit_bias)
        if viol <= tol:
            break
    diag = Diagnostics(obj, passes, viol, viol <= tol)
    if not diag.converged:
        raise ConvergenceError("LASSO did not converge", diag)
    return LinearModel(w, b, "l1", C, lam, ds.vocab, diag, fit_bias)


# -- prediction and evaluation -----------------------------------------------


def _check_dim(model: Model, dim: int) -> None:
    if dim != len(model.vocab):
        raise SchemaError("vector", f"dimension {dim} does not match vocabulary size {len(model.vocab)}")


def predict(model: Model, x: SparseVector) -> tuple[int, float]:
    """Label and log-odds score; a score of exactly zero goes to control."""
    _check_dim(model, x.dim)
    score = model.decision(x)
    return (TOPIC if score > 0 else CONTROL), score


def posterior_topic(model: NBModel, x: SparseVector) -> float:
    _check_dim(model, x.dim)
    s = model.decision(x)
    return 1.0 / (1.0 + math.exp(-s)) if s >= 0 else math.exp(s) / (1.0 + math.exp(s))


def predict_dataset(model: Model, ds: LabeledDataset) -> np.ndarray:
    if ds.vocab.hash != model.vocab.hash:
        raise SchemaError("vocab", "model and dataset use different vocabularies")
    if len(ds) == 0:
        return np.zeros(0, dtype=int)
    scores = model.decision_matrix(ds.matrix())
    return np.where(scores > 0, TOPIC, CONTROL)


@dataclass(frozen=True)
class ConfusionMatrix2:
    """Rows are the true class, columns the prediction; control comes first."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    @classmethod
    def from_labels(cls, true: Sequence[int], pred: Sequence[int]) -> "ConfusionMatrix2":
        m = [[0, 0], [0, 0]]
        pos = {CONTROL: 0, TOPIC: 1}
        for t, p in zip(true, pred):
            m[pos[int(t)]][pos[int(p)]] += 1
        return cls(((m[0][0], m[0][1]), (m[1][0], m[1][1])))

    @property
    def rates(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Row-normalised counts; a row with no examples is reported as zeros."""
        out = []
        for row in self.counts:
            n = sum(row)
            out.append(tuple(c / n for c in row) if n else (0.0, 0.0))
        return tuple(out)

    @property
    def control_accuracy(self) -> float:
        return self.rates[0][0]

    @property
    def topic_accuracy(self) -> float:
        return self.rates[1][1]

    @property
    def accuracy(self) -> float:
        total = sum(map(sum, self.counts))
        return (self.counts[0][0] + self.counts[1][1]) / total if total else 0.0

    def to_csv(self) -> str:
        r = self.rates
        lines = [
            "true,pred_control,pred_topic,rate_control,rate_topic",
            f"control,{self.counts[0][0]},{self.counts[0][1]},{r[0][0]!r},{r[0][1]!r}",
            f"topic,{self.counts[1][0]},{self.counts[1][1]},{r[1][0]!r},{r[1][1]!r}",
        ]
        return "\n".join(lines) + "\n"


def evaluate(model: Model, test: LabeledDataset) -> ConfusionMatrix2:
    if len(test) == 0:
        raise SchemaError("test", "empty test set")
    return ConfusionMatrix2.from_labels(test.labels, predict_dataset(model, test))


@dataclass(frozen=True)
class SweepPoint:
    lam: float
    confusion: ConfusionMatrix2
    nnz: int
    diagnostics: Diagnostics


def lasso_sweep(
    ds_train: LabeledDataset,
    ds_test: LabeledDataset,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    C: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> list[SweepPoint]:
    """Fit one LASSO model per lambda (ascending, warm-started) and evaluate each."""
    points = []
    w0, b0 = None, 0.0
    for lam in sorted(lambdas):
        m = train_lasso(ds_train, lam, C=C, tol=tol, w0=w0, b0=b0)
        w0, b0 = m.weights, m.bias
        points.append(SweepPoint(lam, evaluate(m, ds_test), m.nnz, m.diagnostics))
    return points


def top_coefficients(model: LinearModel, k: int) -> list[tuple[str, float]]:
    """Non-zero weights by decreasing magnitude, sign kept."""
    order = sorted(
        (i for i in range(len(model.weights)) if model.weights[i] != 0.0),
        key=lambda i: (-abs(model.weights[i]), model.vocab.terms[i]),
    )
    return [(model.vocab.terms[i], float(model.weights[i])) for i in order[:k]]


# -- persistence -------------------------------------------------------------


def model_to_dict(model: Model) -> dict:
    if isinstance(model, NBModel):
        out = {
            "kind": model.kind,
            "vocab_hash": model.vocab.hash,
            "event_model": model.event_model,
            "alpha": model.alpha,
            "log_prior": model.log_prior.tolist(),
            "log_likelihood": model.log_likelihood.tolist(),
        }
        if model.log_absent is not None:
            out["log_absent"] = model.log_absent.tolist()
        return out
    return {
        "kind": model.kind,
        "vocab_hash": model.vocab.hash,
        "C": model.C,
        "lambda": model.lam,
        "fit_bias": model.fit_bias,
        "bias": model.bias,
        "weights": model.weights.tolist(),
        "diagnostics": asdict(model.diagnostics),
    }


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_model(path, vocab: Vocabulary) -> Model:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("vocab_hash") != vocab.hash:
        raise SchemaError("vocab", "model was trained on a different vocabulary")
    if d["kind"] == "naive_bayes":
        absent = d.get("log_absent")
        return NBModel(
            np.array(d["log_prior"]),
            np.array(d["log_likelihood"]),
            d["alpha"],
            vocab,
            d["event_model"],
            None if absent is None else np.array(absent),
        )
    if d["kind"] not in ("logreg", "lasso"):
        raise SchemaError("kind", f"unknown model kind {d['kind']!r}")
    return LinearModel(
        np.array(d["weights"], dtype=float),
        float(d["bias"]),
        "l2" if d["kind"] == "logreg" else "l1",
        d["C"],
        d["lambda"],
        vocab,
        Diagnostics(**d["diagnostics"]),
        d["fit_bias"],
    )
