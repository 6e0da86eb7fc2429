"""Sentiment classifiers: a lexicon rule engine, multinomial Naive Bayes and a
linear max-margin model, plus an accuracy harness for comparing them."""

import math
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyCorpus, EmptyLexicon, SingleClassCorpus

POSITIVE = "positive"
NEGATIVE = "negative"
NEUTRAL = "neutral"

_FILE_LABELS = {"pos": POSITIVE, "neg": NEGATIVE, POSITIVE: POSITIVE, NEGATIVE: NEGATIVE}


@dataclass(frozen=True)
class RuleConstants:
    negation_scalar: float = -0.74
    caps_increment: float = 0.733
    exclamation_increment: float = 0.292
    max_exclamations: int = 4
    booster_damping: Tuple[float, float, float] = (1.0, 0.95, 0.9)
    window: int = 3
    alpha: float = 15.0
    label_threshold: float = 0.05


RULES = RuleConstants()

BOOSTER_INCREMENT = 0.293

DEFAULT_BOOSTERS: Dict[str, float] = {
    **{w: BOOSTER_INCREMENT for w in (
        "absolutely", "amazingly", "awfully", "completely", "considerably", "decidedly",
        "deeply", "enormously", "entirely", "especially", "exceptionally", "extremely",
        "fabulously", "fully", "greatly", "highly", "hugely", "incredibly", "intensely",
        "majorly", "more", "most", "particularly", "purely", "quite", "really",
        "remarkably", "so", "substantially", "thoroughly", "totally", "tremendously",
        "unbelievably", "unusually", "utterly", "very")},
    **{w: -BOOSTER_INCREMENT for w in (
        "almost", "barely", "hardly", "kinda", "less", "little", "marginally",
        "occasionally", "partly", "scarcely", "slightly", "somewhat", "sorta")},
}

DEFAULT_NEGATIONS: FrozenSet[str] = frozenset((
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "dont",
    "hadnt", "hasnt", "havent", "isnt", "mightnt", "mustnt", "neither", "neednt", "never",
    "none", "nope", "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt",
    "wasnt", "werent", "without", "wont", "wouldnt", "rarely", "seldom", "despite",
    "ain't", "aren't", "can't", "couldn't", "daren't", "didn't", "doesn't", "don't",
    "hadn't", "hasn't", "haven't", "isn't", "mightn't", "mustn't", "needn't", "shan't",
    "shouldn't", "wasn't", "weren't", "won't", "wouldn't",
))


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, float]
    booster_map: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_BOOSTERS))
    negation_set: FrozenSet[str] = DEFAULT_NEGATIONS

    def __post_init__(self):
        for tok, v in self.entries.items():
            if not math.isfinite(v):
                raise ValueError(f"valence of {tok!r} is not finite")
        for tok, inc in self.booster_map.items():
            if not -1.0 <= inc <= 1.0:
                raise ValueError(f"booster increment of {tok!r} outside [-1, 1]")


def read_lexicon(path) -> Lexicon:
    """Load ``token<TAB>valence`` lines (``#`` comments allowed)."""
    with open(path, encoding="utf-8") as fh:
        return _parse_lexicon(fh)


def bundled_lexicon() -> Lexicon:
    with resources.files("convsent.data").joinpath("lexicon.tsv").open(encoding="utf-8") as fh:
        return _parse_lexicon(fh)


def _parse_lexicon(lines: Iterable[str]) -> Lexicon:
    entries = {}
    for line in lines:
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        token, _, rest = line.partition("\t")
        # the published lexicon carries extra columns after the mean valence
        entries[token.lower()] = float(rest.split("\t")[0])
    return Lexicon(entries)


class Tokens(NamedTuple):
    words: List[str]
    exclamations: int
    questions: int


def tokenize(text: str) -> Tokens:
    """Whitespace split with surrounding punctuation stripped; case is kept."""
    words = []
    for raw in text.split():
        w = raw.strip(string.punctuation)
        if w:
            words.append(w)
    return Tokens(words, text.count("!"), text.count("?"))


@dataclass(frozen=True)
class SentimentScore:
    compound: float
    label: str

    @classmethod
    def from_compound(cls, compound: float, threshold: float = RULES.label_threshold) -> "SentimentScore":
        if compound >= threshold:
            label = POSITIVE
        elif compound <= -threshold:
            label = NEGATIVE
        else:
            label = NEUTRAL
        return cls(compound, label)


def normalize_score(s: float, alpha: float = RULES.alpha) -> float:
    return max(-1.0, min(1.0, s / math.sqrt(s * s + alpha)))


def _is_negation(word: str, lex: Lexicon) -> bool:
    return word in lex.negation_set or word.endswith("n't")


def _token_valence(words: List[str], lower: List[str], i: int, lex: Lexicon,
                   rules: RuleConstants) -> float:
    word = lower[i]
    if word in lex.booster_map or word not in lex.entries:
        return 0.0
    valence = lex.entries[word]
    if words[i].isupper() and any(c.isalpha() for c in words[i]):
        valence += math.copysign(rules.caps_increment, valence) if valence else 0.0
    for dist in range(1, rules.window + 1):
        if i - dist < 0:
            break
        prev = lower[i - dist]
        if prev in lex.entries:
            continue
        inc = lex.booster_map.get(prev, 0.0)
        if inc:
            if valence < 0:
                inc = -inc
            valence += inc * rules.booster_damping[dist - 1]
        if _is_negation(prev, lex):
            valence *= rules.negation_scalar
    return valence


def polarity_sum(text: str, lex: Lexicon, rules: RuleConstants = RULES) -> float:
    if not lex.entries:
        raise EmptyLexicon("lexicon has no entries")
    tokens = tokenize(text)
    lower = [w.lower() for w in tokens.words]
    total = sum(_token_valence(tokens.words, lower, i, lex, rules) for i in range(len(lower)))
    if total:
        bang = min(tokens.exclamations, rules.max_exclamations) * rules.exclamation_increment
        total += bang if total > 0 else -bang
    return total


def rule_polarity(text: str, lex: Lexicon, rules: RuleConstants = RULES) -> SentimentScore:
    compound = normalize_score(polarity_sum(text, lex, rules), rules.alpha)
    return SentimentScore.from_compound(compound, rules.label_threshold)


# --- corpora -----------------------------------------------------------------

@dataclass(frozen=True)
class LabeledCorpus:
    documents: List[Tuple[str, str]]
    name: str = "corpus"

    def __post_init__(self):
        for _, label in self.documents:
            if label not in (POSITIVE, NEGATIVE):
                raise ValueError(f"corpus labels must be positive/negative, got {label!r}")

    def __len__(self):
        return len(self.documents)

    @property
    def labels(self) -> List[str]:
        return [lab for _, lab in self.documents]

    def split(self, test_every: int = 5) -> Tuple["LabeledCorpus", "LabeledCorpus"]:
        """Deterministic train/test split: every ``test_every``-th document is held out."""
        train = [d for k, d in enumerate(self.documents) if k % test_every != test_every - 1]
        test = [d for k, d in enumerate(self.documents) if k % test_every == test_every - 1]
        return LabeledCorpus(train, f"{self.name}/train"), LabeledCorpus(test, f"{self.name}/test")


def read_corpus(path, name: Optional[str] = None) -> LabeledCorpus:
    """Load ``label<TAB>text`` lines with label ``pos`` or ``neg``."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep or label not in _FILE_LABELS:
                raise ValueError(f"{path}:{lineno}: expected 'pos|neg<TAB>text'")
            docs.append((text, _FILE_LABELS[label]))
    return LabeledCorpus(docs, name or str(path))


BUNDLED_CORPORA = ("reviews", "messages")


def bundled_corpus(name: str) -> LabeledCorpus:
    if name not in BUNDLED_CORPORA:
        raise KeyError(f"unknown bundled corpus {name!r}; choose from {BUNDLED_CORPORA}")
    with resources.as_file(resources.files("convsent.data").joinpath(f"{name}.tsv")) as path:
        return read_corpus(path, name)


def _require_two_classes(corpus: LabeledCorpus) -> None:
    if not corpus.documents:
        raise EmptyCorpus("training corpus is empty")
    if len(set(corpus.labels)) < 2:
        raise SingleClassCorpus(f"{corpus.name} contains only {corpus.labels[0]!r} documents")


def bag_of_words(text: str) -> List[str]:
    return [w.lower() for w in tokenize(text).words]


# --- Naive Bayes ---------------------------------------------------------------

CLASSES = (POSITIVE, NEGATIVE)


@dataclass(frozen=True)
class NbModel:
    log_priors: Dict[str, float]
    log_likelihoods: Dict[str, Dict[str, float]]
    vocabulary: FrozenSet[str]


def train_naive_bayes(corpus: LabeledCorpus) -> NbModel:
    """Multinomial NB with add-one smoothing over the training vocabulary."""
    _require_two_classes(corpus)
    doc_counts = {c: 0 for c in CLASSES}
    token_counts: Dict[str, Dict[str, int]] = {c: {} for c in CLASSES}
    for text, label in corpus.documents:
        doc_counts[label] += 1
        counts = token_counts[label]
        for tok in bag_of_words(text):
            counts[tok] = counts.get(tok, 0) + 1
    vocab = frozenset(t for c in CLASSES for t in token_counts[c])
    n_docs = len(corpus.documents)
    log_priors = {c: math.log(doc_counts[c] / n_docs) for c in CLASSES}
    log_lik = {}
    for c in CLASSES:
        denom = sum(token_counts[c].values()) + len(vocab)
        log_lik[c] = {t: math.log((token_counts[c].get(t, 0) + 1) / denom) for t in sorted(vocab)}
    return NbModel(log_priors, log_lik, vocab)


def naive_bayes_log_posteriors(model: NbModel, text: str) -> Dict[str, float]:
    scores = dict(model.log_priors)
    for tok in bag_of_words(text):
        if tok in model.vocabulary:
            for c in CLASSES:
                scores[c] += model.log_likelihoods[c][tok]
    return scores


def predict_naive_bayes(model: NbModel, text: str) -> str:
    s = naive_bayes_log_posteriors(model, text)
    return POSITIVE if s[POSITIVE] >= s[NEGATIVE] else NEGATIVE


def naive_bayes_score(model: NbModel, text: str) -> SentimentScore:
    """Posterior margin P(pos) - P(neg) read as a compound score."""
    s = naive_bayes_log_posteriors(model, text)
    diff = s[NEGATIVE] - s[POSITIVE]
    p_pos = 1.0 / (1.0 + math.exp(diff)) if diff < 700 else 0.0
    return SentimentScore.from_compound(2.0 * p_pos - 1.0)


# --- linear max-margin ---------------------------------------------------------

@dataclass(frozen=True)
class LinearHyperparams:
    learning_rate: float = 0.1
    regularization: float = 1e-3
    epochs: int = 50
    max_halvings: int = 30


@dataclass(frozen=True, eq=False)
class LinearModel:
    vocabulary: Dict[str, int]
    weights: np.ndarray
    bias: float
    hyperparams: LinearHyperparams
    objective_trace: List[float] = field(default_factory=list)

    def decision(self, text: str) -> float:
        return float(self.weights @ _vectorize(text, self.vocabulary) + self.bias)


def _vectorize(text: str, vocab: Mapping[str, int]) -> np.ndarray:
    x = np.zeros(len(vocab))
    for tok in bag_of_words(text):
        k = vocab.get(tok)
        if k is not None:
            x[k] += 1.0
    return x


def hinge_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    margins = y * (X @ w + b)
    return float(lam * (w @ w) + np.mean(np.maximum(0.0, 1.0 - margins)))


def train_linear(corpus: LabeledCorpus, hp: LinearHyperparams = LinearHyperparams()) -> LinearModel:
    """Minimise ``lam * |w|^2 + mean hinge loss`` by per-document subgradient steps.

    Documents are visited in corpus order every epoch. An epoch whose result
    would raise the objective is rejected and retried with half the step
    size, so ``objective_trace`` never increases.
    """
    _require_two_classes(corpus)
    vocab: Dict[str, int] = {}
    for text, _ in corpus.documents:
        for tok in bag_of_words(text):
            vocab.setdefault(tok, len(vocab))
    X = np.array([_vectorize(t, vocab) for t, _ in corpus.documents])
    y = np.array([1.0 if lab == POSITIVE else -1.0 for _, lab in corpus.documents])
    lam = hp.regularization
    w = np.zeros(len(vocab))
    b = 0.0
    lr = hp.learning_rate
    trace = [hinge_objective(X, y, w, b, lam)]

    for _ in range(hp.epochs):
        for _attempt in range(hp.max_halvings + 1):
            w_new, b_new = w.copy(), b
            for xi, yi in zip(X, y):
                grad_w = 2.0 * lam * w_new
                if yi * (xi @ w_new + b_new) < 1.0:
                    w_new -= lr * (grad_w - yi * xi)
                    b_new += lr * yi
                else:
                    w_new -= lr * grad_w
            obj = hinge_objective(X, y, w_new, b_new, lam)
            if obj <= trace[-1]:
                w, b = w_new, b_new
                break
            lr *= 0.5
        else:
            obj = trace[-1]
        trace.append(obj)
    return LinearModel(vocab, w, b, hp, trace)


def predict_linear(model: LinearModel, text: str) -> str:
    return POSITIVE if model.decision(text) >= 0 else NEGATIVE


def linear_score(model: LinearModel, text: str) -> SentimentScore:
    return SentimentScore.from_compound(math.tanh(model.decision(text)))


# --- harness -----------------------------------------------------------------

METHODS = ("vader", "nb", "svm")
METHOD_TITLES = {"vader": "VADER", "nb": "Naive Bayes", "svm": "Linear SVM"}


@dataclass
class SentimentMethod:
    """A ready-to-use classifier; ``score`` gives a compound in [-1, 1]."""

    name: str
    score: Callable[[str], SentimentScore]
    predict: Callable[[str], str]

    def __call__(self, text: str) -> str:
        return self.predict(text)


def make_method(name: str, train: Optional[LabeledCorpus] = None,
                lexicon: Optional[Lexicon] = None,
                hp: LinearHyperparams = LinearHyperparams()) -> SentimentMethod:
    if name == "vader":
        lex = lexicon if lexicon is not None else bundled_lexicon()
        if not lex.entries:
            raise EmptyLexicon("lexicon has no entries")
        return SentimentMethod(name, lambda t: rule_polarity(t, lex),
                               lambda t: rule_polarity(t, lex).label)
    if train is None:
        raise ValueError(f"method {name!r} needs a training corpus")
    if name == "nb":
        nb = train_naive_bayes(train)
        return SentimentMethod(name, lambda t: naive_bayes_score(nb, t),
                               lambda t: predict_naive_bayes(nb, t))
    if name == "svm":
        lin = train_linear(train, hp)
        return SentimentMethod(name, lambda t: linear_score(lin, t),
                               lambda t: predict_linear(lin, t))
    raise ValueError(f"unknown sentiment method {name!r}; choose from {METHODS}")


def evaluate_accuracy(method: Callable[[str], str], test: LabeledCorpus) -> float:
    """Percent of documents whose predicted label equals the reference.

    A neutral prediction never matches a binary reference.
    """
    if not test.documents:
        raise EmptyCorpus("test corpus is empty")
    correct = sum(1 for text, label in test.documents if method(text) == label)
    return 100.0 * correct / len(test.documents)


def compare_methods(corpora: Mapping[str, LabeledCorpus], lexicon: Optional[Lexicon] = None,
                    methods: Sequence[str] = METHODS, test_every: int = 5) -> Dict[str, Dict[str, float]]:
    """Accuracy of every method on every corpus's held-out split.

    Returns ``{method: {corpus_name: accuracy_percent}}``.
    """
    table: Dict[str, Dict[str, float]] = {m: {} for m in methods}
    for cname, corpus in corpora.items():
        train, test = corpus.split(test_every)
        for m in methods:
            method = make_method(m, train=train, lexicon=lexicon)
            table[m][cname] = evaluate_accuracy(method, test)
    return table


def format_table(table: Mapping[str, Mapping[str, float]]) -> str:
    corpora = list(next(iter(table.values())).keys()) if table else []
    lines = ["\t".join(["Method"] + corpora)]
    for m in (k for k in ("nb", "svm", "vader") if k in table):
        row = [METHOD_TITLES.get(m, m)] + [f"{table[m][c]:.1f}" for c in corpora]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
