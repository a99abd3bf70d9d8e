"""scikit-learn style front end so the pipeline composes with that ecosystem.

fit() learns the correction-rule library from NL/assertion pairs; predict()
runs retrieval-guided generation for new specifications; score() is mean
functional equivalence against reference assertions.
"""

from __future__ import annotations

import tempfile
from pathlib import Path
from sklearn.base import BaseEstimator

from .dataset import NlSvaPair, pair_from_dict, parse_design_context
from .gateway import LlmGateway, Provider, ScriptedProvider
from .inference import RetrievalConfig, infer
from .optree import library_load
from .semantics import BoundedOracle
from .trainer import TrainConfig, train


def _resolve_provider(provider) -> Provider:
    if provider is None:
        raise ValueError("a provider is required (Provider instance or 'scripted:<fixture.jsonl>')")
    if isinstance(provider, str):
        if provider.startswith("scripted:"):
            return ScriptedProvider.from_jsonl(provider.split(":", 1)[1])
        raise ValueError(f"unrecognized provider spec {provider!r}")
    return provider


def _as_pairs(X, y=None) -> list[NlSvaPair]:
    """Accept NlSvaPair lists, dicts, or parallel (nl, golden) arrays."""
    if y is not None:
        if len(X) != len(y):
            raise ValueError(f"X and y lengths differ: {len(X)} vs {len(y)}")
        return [
            NlSvaPair(id=f"item-{i:04d}", nl=str(nl), golden_sva=str(sva))
            for i, (nl, sva) in enumerate(zip(X, y))
        ]
    pairs = []
    for i, item in enumerate(X):
        if isinstance(item, NlSvaPair):
            pairs.append(item)
        elif isinstance(item, dict):
            doc = dict(item)
            doc.setdefault("id", f"item-{i:04d}")
            pairs.append(pair_from_dict(doc))
        else:
            raise ValueError(
                "X must contain NlSvaPair or dicts with nl/golden_sva, "
                "or pass golden assertions as y"
            )
    return pairs


class RuleLearner(BaseEstimator):
    """Estimator over NL-to-assertion pairs.

    Parameters mirror the pipeline knobs: retrieval breadth (k_trees,
    k_traces), the operator/semantic balance alpha, training bounds, and the
    bounded-oracle trace length. `provider` is a Provider instance or a
    ``scripted:<fixture.jsonl>`` string. get_params/set_params come from
    sklearn, so grid search over alpha or k works out of the box.
    """

    def __init__(
        self,
        provider=None,
        k_trees: int = 3,
        k_traces: int = 3,
        alpha: float = 0.5,
        max_iterations: int = 25,
        questions_per_layer: int = 3,
        max_len: int = 5,
        rng_seed: int = 0,
        concurrency_limit: int = 4,
        library_path: str | None = None,
    ):
        self.provider = provider
        self.k_trees = k_trees
        self.k_traces = k_traces
        self.alpha = alpha
        self.max_iterations = max_iterations
        self.questions_per_layer = questions_per_layer
        self.max_len = max_len
        self.rng_seed = rng_seed
        self.concurrency_limit = concurrency_limit
        self.library_path = library_path

    def _gateway(self) -> LlmGateway:
        return LlmGateway(_resolve_provider(self.provider))

    def _oracle(self) -> BoundedOracle:
        return BoundedOracle(max_len=self.max_len)

    def fit(self, X, y=None):
        pairs = _as_pairs(X, y)
        if not pairs:
            raise ValueError("cannot fit on an empty dataset")
        out = self.library_path or str(
            Path(tempfile.mkdtemp(prefix="oprules-")) / "library.jsonl"
        )
        config = TrainConfig(
            max_iterations=self.max_iterations,
            questions_per_layer=self.questions_per_layer,
            rng_seed=self.rng_seed,
            concurrency_limit=self.concurrency_limit,
        )
        path, train_log = train(pairs, config, self._gateway(), out, oracle=self._oracle())
        self.library_path_ = str(path)
        self.trees_, self.library_errors_ = library_load(path)
        self.train_log_ = train_log
        return self

    def _check_fitted(self):
        if not hasattr(self, "trees_"):
            raise RuntimeError("this RuleLearner instance is not fitted yet; call fit first")

    def predict(self, X) -> list[str]:
        """Final assertion text for each specification in X (strings,
        NlSvaPair, or dicts with nl/design_context)."""
        self._check_fitted()
        gateway = self._gateway()
        config = RetrievalConfig(
            k_trees=self.k_trees, k_traces=self.k_traces, alpha=self.alpha
        )
        out = []
        for item in X:
            if isinstance(item, str):
                nl, context = item, ()
            elif isinstance(item, NlSvaPair):
                nl, context = item.nl, item.design_context
            elif isinstance(item, dict):
                nl = item["nl"]
                context = parse_design_context(item.get("design_context"))
            else:
                raise ValueError(f"cannot interpret prediction input {item!r}")
            result = infer(nl, context, self.trees_, config, gateway)
            out.append(result.final_sva)
        return out

    def score(self, X, y=None) -> float:
        """Mean functional equivalence of predictions against the reference
        assertions (unparseable predictions count as wrong)."""
        pairs = _as_pairs(X, y)
        predictions = self.predict(pairs)
        oracle = self._oracle()
        hits = 0
        for pair, predicted in zip(pairs, predictions):
            try:
                hits += int(oracle.equivalent(pair.golden_sva, predicted))
            except Exception:
                pass
        return hits / len(pairs) if pairs else 0.0
