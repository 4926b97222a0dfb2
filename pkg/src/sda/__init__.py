"""Scalable data augmentation (SDA) training for small ReLU networks."""

from .baseline import fit_baseline_dl
from .bench import prepare_dataset, run_experiment, run_single
from .config import RunConfig
from .data import Dataset, gen_blobs, gen_friedman, split_dataset
from .gaussian import GaussianSdaModel, fit_gaussian, predict_gaussian
from .logit import LogitSdaModel, fit_logit, predict_logit
from .nn import NetworkParams, backward, forward, init_params, sgd_epoch, stack
from .samplers import make_rng, pg_em_weight, sample_inverse_gaussian, sample_normal, verify_identity
from .svm import SvmSdaModel, fit_svm, predict_svm

__version__ = "0.1.0"
