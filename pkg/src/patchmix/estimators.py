"""Scikit-learn style wrappers so the dataset transforms drop into pipelines.

Both estimators are stateless transformers over Dataset values: ``fit`` only
validates parameters, ``transform`` builds a new Dataset, and run artifacts
land in trailing-underscore attributes (``change_log_``, ``report_``). They
follow the usual conventions (params stored verbatim in ``__init__``,
``get_params``/``set_params`` via BaseEstimator), so ``clone`` and
``Pipeline`` work as expected.
"""

from __future__ import annotations

from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin

from .dataset import Dataset
from .mix_paste import MixConfig, augment_dataset
from .noise import (
    GaussianBoxNoise,
    NoiseSpec,
    UniformBoxNoise,
    corrupt_labels,
    perturb_boxes,
)


class AnnotationNoiser(TransformerMixin, BaseEstimator):
    """Inject category noise and bounding-box noise into a Dataset.

    Parameters
    ----------
    p_c, p_b : float
        Label flip rate and box perturbation rate, both in [0, 1].
    box_model : {"uniform", "gaussian"}
        Distribution of the four shift/scale factors.
    delta : float
        Half-width of the uniform factor range.
    mu, sigma : float
        Mean and standard deviation of the gaussian factors.
    seed : int
        Drives all randomness; equal inputs and seed give equal outputs.

    After ``transform``, ``change_log_`` holds the applied changes.
    """

    def __init__(self, p_c=0.0, p_b=0.0, box_model="uniform",
                 delta=0.3, mu=0.0, sigma=0.1, seed=0):
        self.p_c = p_c
        self.p_b = p_b
        self.box_model = box_model
        self.delta = delta
        self.mu = mu
        self.sigma = sigma
        self.seed = seed

    def _spec(self) -> NoiseSpec:
        if self.box_model == "uniform":
            model = UniformBoxNoise(delta=self.delta)
        elif self.box_model == "gaussian":
            model = GaussianBoxNoise(mu=self.mu, sigma=self.sigma)
        else:
            raise ValueError(
                f"box_model must be 'uniform' or 'gaussian', got {self.box_model!r}"
            )
        return NoiseSpec(p_c=self.p_c, p_b=self.p_b, box_model=model, seed=self.seed)

    def fit(self, X: Dataset, y=None):
        self._spec()
        return self

    def transform(self, X: Dataset) -> Dataset:
        spec = self._spec()
        out, label_changes = corrupt_labels(X, spec)
        out, box_changes = perturb_boxes(out, spec)
        self.change_log_ = [*label_changes, *box_changes]
        return out


class MixPasteAugmenter(TransformerMixin, BaseEstimator):
    """Run whole-dataset patch-mix augmentation as a Dataset -> Dataset transform.

    ``image_root`` and ``out_root`` locate the input and output image trees;
    ``transform`` returns the dataset with updated file names and stores the
    run report in ``report_``.
    """

    def __init__(self, image_root=".", out_root="augmented", k=2, apply_prob=0.6,
                 beta_frac=0.10, lambda_a=1.0, lambda_b=1.0, seed=0, workers=1):
        self.image_root = image_root
        self.out_root = out_root
        self.k = k
        self.apply_prob = apply_prob
        self.beta_frac = beta_frac
        self.lambda_a = lambda_a
        self.lambda_b = lambda_b
        self.seed = seed
        self.workers = workers

    def _config(self) -> MixConfig:
        return MixConfig(
            k=self.k,
            apply_prob=self.apply_prob,
            beta_frac=self.beta_frac,
            lambda_a=self.lambda_a,
            lambda_b=self.lambda_b,
            seed=self.seed,
        )

    def fit(self, X: Dataset, y=None):
        self._config()
        return self

    def transform(self, X: Dataset) -> Dataset:
        out, report = augment_dataset(
            X, Path(self.image_root), Path(self.out_root), self._config(),
            workers=self.workers,
        )
        self.report_ = report
        return out


__all__ = ["AnnotationNoiser", "MixPasteAugmenter"]
